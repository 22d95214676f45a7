//! L1-penalized logistic-regression score fusion.
//!
//! The fused logit is a linear combination of min-max normalized system
//! scores `S` and quality measures `Q` plus an unpenalized intercept:
//!
//! ```text
//! L = w·S + v·Q + b,    P(L) = 1 / (1 + e^{-L})
//! ```
//!
//! Weights are fitted by minimizing the mean logistic loss plus `λ‖(w, v)‖₁`
//! with proximal gradient descent (ISTA). The step is `1/L_lip` with
//! `L_lip = σ_max([X 1])² / (4n)`, estimated by power iteration on the Gram
//! matrix and capped by the Frobenius bound; it is halved whenever an update
//! fails to decrease the objective, so the accepted objective sequence is
//! non-increasing.

use crate::dataio::FusionModelFile;
use crate::error::{Error, Result};
use crate::qmf::MinMaxScaler;

/// Logistic function, evaluated without overflow for any finite input.
pub fn sigmoid(l: f64) -> f64 {
    if l >= 0.0 {
        1.0 / (1.0 + (-l).exp())
    } else {
        let e = l.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Proximal operator of `t·|x|`.
pub fn soft_threshold(a: f64, t: f64) -> f64 {
    a.signum() * (a.abs() - t).max(0.0)
}

/// Design matrix (row-major, entries in `[0, 1]`), labels and penalty.
#[derive(Debug, Clone)]
pub struct FusionProblem {
    x: Vec<f64>,
    n: usize,
    d: usize,
    y: Vec<bool>,
    lambda: f64,
}

impl FusionProblem {
    pub fn new(rows: &[Vec<f64>], labels: &[bool], lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::invalid(format!("lambda must be a nonnegative number, got {lambda}")));
        }
        if rows.len() != labels.len() {
            return Err(Error::invalid(format!("{} rows but {} labels", rows.len(), labels.len())));
        }
        if rows.len() < 2 || labels.iter().all(|&l| l) || labels.iter().all(|&l| !l) {
            return Err(Error::SingleClass);
        }
        let d = rows[0].len();
        if let Some(r) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::DimMismatch {
                expected: d,
                found: r.len(),
            });
        }
        let x = rows.concat();
        if let Some(v) = x.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::invalid(format!("feature value {v} outside [0, 1]")));
        }
        Ok(Self {
            x,
            n: rows.len(),
            d,
            y: labels.to_vec(),
            lambda,
        })
    }

    pub fn n_trials(&self) -> usize {
        self.n
    }

    pub fn n_features(&self) -> usize {
        self.d
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.d..(i + 1) * self.d]
    }

    fn logits(&self, w: &[f64], b: f64, out: &mut [f64]) {
        for (i, z) in out.iter_mut().enumerate() {
            *z = b + self.row(i).iter().zip(w).map(|(x, w)| x * w).sum::<f64>();
        }
    }

    fn loss_from_logits(&self, z: &[f64]) -> f64 {
        let total: f64 = z
            .iter()
            .zip(&self.y)
            .map(|(&z, &y)| if y { softplus(-z) } else { softplus(z) })
            .sum();
        total / self.n as f64
    }

    /// Mean logistic loss plus `λ·Σ|w|` (intercept unpenalized).
    pub fn objective(&self, weights: &[f64], intercept: f64) -> f64 {
        let mut z = vec![0.0; self.n];
        self.logits(weights, intercept, &mut z);
        self.loss_from_logits(&z) + self.lambda * weights.iter().map(|w| w.abs()).sum::<f64>()
    }

    /// Upper estimate of the gradient's Lipschitz constant.
    fn lipschitz(&self) -> f64 {
        let m = self.d + 1;
        let mut gram = vec![0.0; m * m];
        for i in 0..self.n {
            let row = self.row(i);
            let aug = |k: usize| if k < self.d { row[k] } else { 1.0 };
            for a in 0..m {
                let xa = aug(a);
                for b in a..m {
                    gram[a * m + b] += xa * aug(b);
                }
            }
        }
        for a in 0..m {
            for b in 0..a {
                gram[a * m + b] = gram[b * m + a];
            }
        }
        let frobenius: f64 = (0..m).map(|k| gram[k * m + k]).sum();

        let mut v = vec![1.0 / (m as f64).sqrt(); m];
        let mut eig = 0.0;
        for _ in 0..1000 {
            let mut next: Vec<f64> = (0..m)
                .map(|a| (0..m).map(|b| gram[a * m + b] * v[b]).sum())
                .collect();
            let norm = next.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                break;
            }
            next.iter_mut().for_each(|x| *x /= norm);
            let done = (norm - eig).abs() <= 1e-13 * norm;
            eig = norm;
            v = next;
            if done {
                break;
            }
        }
        let top = if eig > 0.0 { (eig * (1.0 + 1e-9)).min(frobenius) } else { frobenius };
        top / (4.0 * self.n as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub max_iters: usize,
    /// Stop once an accepted step improves the objective by less than this.
    pub tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iters: 100_000,
            tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FittedFusion {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub objective: f64,
    pub iterations: usize,
    /// Objective after initialization and after each accepted step.
    pub trace: Vec<f64>,
}

impl FittedFusion {
    pub fn logit(&self, features: &[f64]) -> Result<f64> {
        if features.len() != self.weights.len() {
            return Err(Error::DimMismatch {
                expected: self.weights.len(),
                found: features.len(),
            });
        }
        Ok(self.intercept + features.iter().zip(&self.weights).map(|(x, w)| x * w).sum::<f64>())
    }
}

/// Fits the fusion weights. Starts from all-zero parameters and is fully
/// deterministic.
pub fn fit(problem: &FusionProblem, opts: &FitOptions) -> Result<FittedFusion> {
    if !(opts.tol >= 0.0) {
        return Err(Error::invalid("tol must be nonnegative"));
    }
    let (n, d) = (problem.n, problem.d);
    let penalty = |w: &[f64]| problem.lambda * w.iter().map(|v| v.abs()).sum::<f64>();

    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut z = vec![0.0; n];
    problem.logits(&w, b, &mut z);
    let mut obj = problem.loss_from_logits(&z) + penalty(&w);
    let mut trace = vec![obj];

    let mut step = 1.0 / problem.lipschitz();
    let mut grad_w = vec![0.0; d];
    let mut cand_w = vec![0.0; d];
    let mut cand_z = vec![0.0; n];
    let mut iterations = 0;

    while iterations < opts.max_iters {
        grad_w.iter_mut().for_each(|g| *g = 0.0);
        let mut grad_b = 0.0;
        for i in 0..n {
            let r = sigmoid(z[i]) - if problem.y[i] { 1.0 } else { 0.0 };
            grad_b += r;
            for (g, x) in grad_w.iter_mut().zip(problem.row(i)) {
                *g += r * x;
            }
        }
        let inv_n = 1.0 / n as f64;
        grad_b *= inv_n;
        grad_w.iter_mut().for_each(|g| *g *= inv_n);

        let mut accepted = None;
        for _ in 0..64 {
            for j in 0..d {
                cand_w[j] = soft_threshold(w[j] - step * grad_w[j], step * problem.lambda);
            }
            let cand_b = b - step * grad_b;
            problem.logits(&cand_w, cand_b, &mut cand_z);
            let cand_obj = problem.loss_from_logits(&cand_z) + penalty(&cand_w);
            if cand_obj <= obj {
                accepted = Some((cand_b, cand_obj));
                break;
            }
            step *= 0.5;
        }
        let Some((cand_b, cand_obj)) = accepted else {
            break;
        };

        iterations += 1;
        let improvement = obj - cand_obj;
        std::mem::swap(&mut w, &mut cand_w);
        std::mem::swap(&mut z, &mut cand_z);
        b = cand_b;
        obj = cand_obj;
        trace.push(obj);
        if improvement < opts.tol {
            break;
        }
    }

    Ok(FittedFusion {
        weights: w,
        intercept: b,
        objective: obj,
        iterations,
        trace,
    })
}

/// `L = w·S + v·Q + b` for already-normalized scores and quality measures.
pub fn fuse_logit(scores: &[f64], qmfs: &[f64], model: &FittedFusion) -> Result<f64> {
    if scores.len() + qmfs.len() != model.weights.len() {
        return Err(Error::DimMismatch {
            expected: model.weights.len(),
            found: scores.len() + qmfs.len(),
        });
    }
    let (w, v) = model.weights.split_at(scores.len());
    let ws: f64 = w.iter().zip(scores).map(|(a, b)| a * b).sum();
    let vq: f64 = v.iter().zip(qmfs).map(|(a, b)| a * b).sum();
    Ok(ws + vq + model.intercept)
}

pub fn fuse_probability(scores: &[f64], qmfs: &[f64], model: &FittedFusion) -> Result<f64> {
    fuse_logit(scores, qmfs, model).map(sigmoid)
}

/// A complete fusion model: feature names, normalization and weights.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionModel {
    pub feature_names: Vec<String>,
    pub n_scores: usize,
    pub scaler: MinMaxScaler,
    pub fitted: FittedFusion,
    pub lambda: f64,
}

fn join_row(scores: &[f64], qmfs: &[Option<f64>]) -> Vec<Option<f64>> {
    scores.iter().copied().map(Some).chain(qmfs.iter().copied()).collect()
}

impl FusionModel {
    /// Fits normalization and weights on a labeled development set.
    ///
    /// `score_rows[i]` holds the raw scores of each system for trial `i`;
    /// `qmf_rows[i]` its quality measures (missing values allowed).
    pub fn fit(
        feature_names: Vec<String>,
        score_rows: &[Vec<f64>],
        qmf_rows: &[Vec<Option<f64>>],
        labels: &[bool],
        lambda: f64,
        opts: &FitOptions,
    ) -> Result<Self> {
        if score_rows.len() != qmf_rows.len() {
            return Err(Error::invalid(format!(
                "{} score rows but {} QMF rows",
                score_rows.len(),
                qmf_rows.len()
            )));
        }
        let n_scores = score_rows.first().map_or(0, Vec::len);
        let joined: Vec<Vec<Option<f64>>> = score_rows
            .iter()
            .zip(qmf_rows)
            .map(|(s, q)| join_row(s, q))
            .collect();
        let scaler = MinMaxScaler::fit(&joined)?;
        if feature_names.len() != scaler.width() {
            return Err(Error::invalid(format!(
                "{} feature names for {} features",
                feature_names.len(),
                scaler.width()
            )));
        }
        let x = joined.iter().map(|r| scaler.apply(r)).collect::<Result<Vec<_>>>()?;
        let problem = FusionProblem::new(&x, labels, lambda)?;
        let fitted = fit(&problem, opts)?;
        Ok(Self {
            feature_names,
            n_scores,
            scaler,
            fitted,
            lambda,
        })
    }

    /// Fails on the first position where `names` differs from the model.
    pub fn check_features(&self, names: &[String]) -> Result<()> {
        let longest = self.feature_names.len().max(names.len());
        for i in 0..longest {
            let expected = self.feature_names.get(i).map_or("<none>", String::as_str);
            let found = names.get(i).map_or("<none>", String::as_str);
            if expected != found {
                return Err(Error::FeatureMismatch {
                    index: i,
                    expected: expected.to_string(),
                    found: found.to_string(),
                });
            }
        }
        Ok(())
    }

    pub fn logit(&self, scores: &[f64], qmfs: &[Option<f64>]) -> Result<f64> {
        if scores.len() != self.n_scores {
            return Err(Error::DimMismatch {
                expected: self.n_scores,
                found: scores.len(),
            });
        }
        let x = self.scaler.apply(&join_row(scores, qmfs))?;
        let (s, q) = x.split_at(self.n_scores);
        fuse_logit(s, q, &self.fitted)
    }

    pub fn probability(&self, scores: &[f64], qmfs: &[Option<f64>]) -> Result<f64> {
        self.logit(scores, qmfs).map(sigmoid)
    }

    pub fn to_file(&self) -> FusionModelFile {
        FusionModelFile {
            feature_names: self.feature_names.clone(),
            n_scores: self.n_scores,
            weights: self.fitted.weights.clone(),
            intercept: self.fitted.intercept,
            minmax: self.scaler.params.clone(),
            medians: self.scaler.medians.clone(),
            lambda: self.lambda,
            objective: self.fitted.objective,
            iterations: self.fitted.iterations,
        }
    }

    pub fn from_file(file: FusionModelFile) -> Result<Self> {
        file.validate()?;
        Ok(Self {
            feature_names: file.feature_names,
            n_scores: file.n_scores,
            scaler: MinMaxScaler {
                params: file.minmax,
                medians: file.medians,
            },
            fitted: FittedFusion {
                weights: file.weights,
                intercept: file.intercept,
                objective: file.objective,
                iterations: file.iterations,
                trace: Vec::new(),
            },
            lambda: file.lambda,
        })
    }
}
