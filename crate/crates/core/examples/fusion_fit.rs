//! L1-regularized logistic fusion on a toy problem with one informative
//! feature and two noise features, across a range of penalties.
//!
//! cargo run --release --example fusion_fit

use voxfuse::fusion::{fit, sigmoid, FitOptions, FusionProblem};
use voxfuse::rng::Rng;
use voxfuse::Result;

fn main() -> Result<()> {
    let mut rng = Rng::new(42);
    let n = 400;
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let x = rng.next_f64();
        let label = rng.next_f64() < sigmoid(8.0 * (x - 0.5));
        rows.push(vec![x, rng.next_f64(), rng.next_f64()]);
        labels.push(label);
    }

    println!("{:>8} {:>10} {:>10} {:>10} {:>10} {:>6}", "lambda", "w0", "w1", "w2", "b", "iters");
    for lambda in [0.0, 1e-3, 1e-2, 0.1, 1.0] {
        let problem = FusionProblem::new(&rows, &labels, lambda)?;
        let f = fit(&problem, &FitOptions::default())?;
        println!(
            "{lambda:>8} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>6}",
            f.weights[0], f.weights[1], f.weights[2], f.intercept, f.iterations
        );
    }
    Ok(())
}
