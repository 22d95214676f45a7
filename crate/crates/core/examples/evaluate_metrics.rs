//! DET curve, EER and minDCF for a small labeled score list.
//!
//! cargo run --example evaluate_metrics

use voxfuse::metrics::{det_curve, eer, evaluate, min_dcf, DcfParams};
use voxfuse::Result;

fn main() -> Result<()> {
    let scores = [2.1, 1.7, 1.5, 0.9, 0.8, 0.4, 0.3, -0.2, -0.6, -1.1];
    let labels = [true, true, false, true, true, false, false, true, false, false];

    let curve = det_curve(&scores, &labels)?;
    println!("{:>10} {:>8} {:>8}", "threshold", "p_miss", "p_fa");
    for p in &curve.points {
        println!("{:>10.3} {:>8.3} {:>8.3}", p.threshold, p.p_miss, p.p_fa);
    }
    println!("EER = {:.4}", eer(&curve));
    for prior in [0.5, 0.05, 0.01] {
        let params = DcfParams::with_prior(prior)?;
        let (cost, threshold) = min_dcf(&curve, &params);
        println!("minDCF(p={prior}) = {cost:.4} at threshold {threshold}");
    }

    let params = [DcfParams::with_prior(0.05)?, DcfParams::with_prior(0.01)?];
    println!("{}", evaluate(&scores, &labels, &params)?);
    Ok(())
}
