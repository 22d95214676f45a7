use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{atomic_write, read_to_string};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinMaxParams {
    pub lo: f64,
    pub hi: f64,
}

/// Serialized fusion model (JSON).
///
/// The first `n_scores` features are system scores, the rest are quality
/// measures. `medians` holds the fit-set median used to impute a missing
/// value of each feature before min-max scaling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionModelFile {
    pub feature_names: Vec<String>,
    pub n_scores: usize,
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub minmax: Vec<MinMaxParams>,
    pub medians: Vec<f64>,
    pub lambda: f64,
    #[serde(default)]
    pub objective: f64,
    #[serde(default)]
    pub iterations: usize,
}

impl FusionModelFile {
    pub fn validate(&self) -> Result<()> {
        let n = self.feature_names.len();
        for (what, len) in [
            ("weights", self.weights.len()),
            ("minmax", self.minmax.len()),
            ("medians", self.medians.len()),
        ] {
            if len != n {
                return Err(Error::invalid(format!(
                    "model has {n} features but {len} {what}"
                )));
            }
        }
        if self.n_scores > n {
            return Err(Error::invalid("n_scores exceeds feature count"));
        }
        if let Some(i) = self.minmax.iter().position(|p| !(p.lo <= p.hi)) {
            return Err(Error::invalid(format!(
                "feature {}: min-max lo > hi",
                self.feature_names[i]
            )));
        }
        if !(self.lambda >= 0.0) {
            return Err(Error::invalid("lambda must be nonnegative"));
        }
        let finite = self
            .weights
            .iter()
            .chain(&self.medians)
            .chain(std::iter::once(&self.intercept))
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::invalid("model contains non-finite parameters"));
        }
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = read_to_string(path)?;
        let model: Self = serde_json::from_str(&text)
            .map_err(|e| Error::parse(path, e.line(), e.to_string()))?;
        model
            .validate()
            .map_err(|e| Error::parse(path, 1, e.to_string()))?;
        Ok(model)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        self.validate()?;
        atomic_write(path.as_ref(), |w| {
            serde_json::to_writer_pretty(&mut *w, self)?;
            writeln!(w)
        })
    }
}
