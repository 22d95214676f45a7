//! Learning-rate and margin schedules for pre-training, fine-tuning and the
//! staircase recipe.
//!
//! cargo run --example schedules

use voxfuse::trainspec::{base_lr, base_margin, finetune_lr, staircase_lr, StaircaseSpec};
use voxfuse::Result;

fn main() -> Result<()> {
    println!("base:");
    for e in [0.0, 5.0, 10.0, 35.0, 60.0, 80.0, 100.0, 299.0] {
        println!("  epoch {e:>5}: lr {:<12.6e} margin {:.3}", base_lr(e)?, base_margin(e)?);
    }
    println!("fine-tune:");
    for e in [0.0, 0.5, 1.0, 6.0, 11.0, 29.0] {
        println!("  epoch {e:>5}: lr {:.6e}", finetune_lr(e)?);
    }
    let spec = StaircaseSpec::new(0.5, 2, 6, 2, 1.0)?;
    let lrs: Vec<f64> = (0..14).map(|e| staircase_lr(&spec, e)).collect();
    println!("staircase (0.5, 2, 6, 2): {lrs:?}");
    Ok(())
}
