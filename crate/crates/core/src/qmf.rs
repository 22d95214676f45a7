//! Quality measure functions (QMFs).
//!
//! Per-trial auxiliary features built from two sources: attribute columns
//! ingested from external estimators (MOS, SNR, gender, ...) and statistics
//! of the chunk embeddings themselves. Every per-utterance real value enters
//! the trial as a `(min, max)` pair over the two sides, and categorical
//! columns enter as a single equality bit, so the vector does not depend on
//! which side is enrollment.

use std::collections::HashMap;
use std::path::Path;

use crate::dataio::{
    atomic_write, fmt_f64, AttrValue, AttributeTable, ChunkEmbeddings, Column, MinMaxParams, SchemaEntry,
    Transform, Trial,
};
use crate::error::{Error, Result};
use crate::numeric::{canonical_sum, mean_std};
use crate::scoring::mean_embedding;

/// Statistics of one utterance's chunk embeddings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddingQmf {
    pub l1_norm: f64,
    pub l2_norm: f64,
    pub std_across_dims: f64,
    pub mean_of_dim_stds: f64,
    pub std_of_dim_stds: f64,
}

const EMBEDDING_STATS: [&str; 5] = [
    "emb_l1_norm",
    "emb_l2_norm",
    "emb_std_across_dims",
    "emb_mean_of_dim_stds",
    "emb_std_of_dim_stds",
];

impl EmbeddingQmf {
    fn as_array(&self) -> [f64; 5] {
        [
            self.l1_norm,
            self.l2_norm,
            self.std_across_dims,
            self.mean_of_dim_stds,
            self.std_of_dim_stds,
        ]
    }
}

pub fn embedding_qmf(e: &ChunkEmbeddings) -> EmbeddingQmf {
    let m = mean_embedding(e);
    let mut abs: Vec<f64> = m.iter().map(|v| v.abs()).collect();
    let mut sq: Vec<f64> = m.iter().map(|v| v * v).collect();
    let l1_norm = canonical_sum(&mut abs);
    let l2_norm = canonical_sum(&mut sq).sqrt();
    let (_, std_across_dims) = mean_std(&m);

    let (mean_of_dim_stds, std_of_dim_stds) = if e.n_chunks() == 1 {
        (0.0, 0.0)
    } else {
        let mut column = vec![0.0; e.n_chunks()];
        let dim_stds: Vec<f64> = (0..e.dim())
            .map(|d| {
                for (slot, chunk) in column.iter_mut().zip(e.chunks()) {
                    *slot = chunk[d];
                }
                mean_std(&column).1
            })
            .collect();
        mean_std(&dim_stds)
    };

    EmbeddingQmf {
        l1_norm,
        l2_norm,
        std_across_dims,
        mean_of_dim_stds,
        std_of_dim_stds,
    }
}

/// Named trial feature vector; `None` marks a missing value to be imputed.
#[derive(Debug, Clone, PartialEq)]
pub struct QmfVector {
    pub names: Vec<String>,
    pub values: Vec<Option<f64>>,
}

/// Feature names produced by [`build_trial_qmf`] for `schema`, in order.
pub fn qmf_feature_names(schema: &[SchemaEntry]) -> Vec<String> {
    let mut names = Vec::new();
    for e in schema {
        match e.transform {
            Transform::Match => names.push(format!("{}_match", e.name)),
            Transform::Identity | Transform::Log1p => {
                names.push(format!("{}_min", e.name));
                names.push(format!("{}_max", e.name));
            }
        }
    }
    for stat in EMBEDDING_STATS {
        names.push(format!("{stat}_min"));
        names.push(format!("{stat}_max"));
    }
    names
}

/// One side of a trial: its attribute row and embedding statistics.
#[derive(Debug, Clone, Copy)]
pub struct SideInput<'a> {
    pub columns: &'a [Column],
    pub attributes: &'a [AttrValue],
    pub embedding: &'a EmbeddingQmf,
}

impl SideInput<'_> {
    fn value(&self, name: &str) -> Result<&AttrValue> {
        self.columns
            .iter()
            .position(|c| c.name == name)
            .and_then(|i| self.attributes.get(i))
            .ok_or_else(|| Error::invalid(format!("attribute column {name:?} not available")))
    }
}

fn transformed(entry: &SchemaEntry, v: &AttrValue) -> Result<Option<f64>> {
    match v {
        AttrValue::Missing => Ok(None),
        AttrValue::Real(x) => match entry.transform {
            Transform::Identity => Ok(Some(*x)),
            Transform::Log1p if *x > -1.0 => Ok(Some(x.ln_1p())),
            Transform::Log1p => Err(Error::invalid(format!(
                "column {}: log1p needs values above -1, got {x}",
                entry.name
            ))),
            Transform::Match => Err(Error::invalid(format!("column {} is not categorical", entry.name))),
        },
        AttrValue::Categorical(_) => Err(Error::invalid(format!("column {} is not real-valued", entry.name))),
    }
}

fn min_max_pair(a: Option<f64>, b: Option<f64>) -> [Option<f64>; 2] {
    match (a, b) {
        (Some(a), Some(b)) => [Some(a.min(b)), Some(a.max(b))],
        _ => [None, None],
    }
}

/// Assembles the QMF vector of one trial.
///
/// `match` columns give 1 when both sides carry the same category and 0
/// otherwise (including when either is missing). Real columns are
/// transformed per side and paired as `(min, max)`; if either side is
/// missing both entries are `None`. The five embedding statistics follow,
/// paired the same way.
pub fn build_trial_qmf(enroll: SideInput<'_>, test: SideInput<'_>, schema: &[SchemaEntry]) -> Result<QmfVector> {
    let mut values = Vec::new();
    for entry in schema {
        let (a, b) = (enroll.value(&entry.name)?, test.value(&entry.name)?);
        match entry.transform {
            Transform::Match => {
                let same = match (a, b) {
                    (AttrValue::Categorical(x), AttrValue::Categorical(y)) => x == y,
                    (AttrValue::Missing, _) | (_, AttrValue::Missing) => false,
                    _ => {
                        return Err(Error::invalid(format!(
                            "column {} is not categorical",
                            entry.name
                        )))
                    }
                };
                values.push(Some(if same { 1.0 } else { 0.0 }));
            }
            Transform::Identity | Transform::Log1p => {
                values.extend(min_max_pair(transformed(entry, a)?, transformed(entry, b)?));
            }
        }
    }
    for (x, y) in enroll.embedding.as_array().into_iter().zip(test.embedding.as_array()) {
        values.extend(min_max_pair(Some(x), Some(y)));
    }
    Ok(QmfVector {
        names: qmf_feature_names(schema),
        values,
    })
}

/// QMF vectors for a trial list. With no attribute table only the embedding
/// statistics are produced (the schema must then be empty).
pub fn trial_qmfs(
    trials: &[Trial],
    store: &[ChunkEmbeddings],
    attributes: Option<&AttributeTable>,
    schema: &[SchemaEntry],
) -> Result<Vec<QmfVector>> {
    if attributes.is_none() && !schema.is_empty() {
        return Err(Error::invalid("schema given without an attribute table"));
    }
    let by_id: HashMap<&str, &ChunkEmbeddings> = store.iter().map(|e| (e.utt_id(), e)).collect();
    let mut stats: HashMap<&str, EmbeddingQmf> = HashMap::new();
    let empty: &[AttrValue] = &[];
    let columns: &[Column] = attributes.map_or(&[], |t| t.columns());

    let mut out = Vec::with_capacity(trials.len());
    for t in trials {
        let mut sides = Vec::with_capacity(2);
        for id in [t.enroll_id.as_str(), t.test_id.as_str()] {
            let emb = *by_id.get(id).ok_or_else(|| Error::UnknownUtterance(id.to_string()))?;
            let q = *stats.entry(emb.utt_id()).or_insert_with(|| embedding_qmf(emb));
            let attrs = match attributes {
                Some(table) => table.row(id).ok_or_else(|| Error::UnknownUtterance(id.to_string()))?,
                None => empty,
            };
            sides.push((attrs, q));
        }
        let (ea, eq) = sides[0];
        let (ta, tq) = sides[1];
        out.push(build_trial_qmf(
            SideInput {
                columns,
                attributes: ea,
                embedding: &eq,
            },
            SideInput {
                columns,
                attributes: ta,
                embedding: &tq,
            },
            schema,
        )?);
    }
    Ok(out)
}

/// Per-feature min-max scaling with median imputation of missing values.
#[derive(Debug, Clone, PartialEq)]
pub struct MinMaxScaler {
    pub params: Vec<MinMaxParams>,
    pub medians: Vec<f64>,
}

impl MinMaxScaler {
    /// Fits extremes and medians over the observed values of each column.
    pub fn fit(rows: &[Vec<Option<f64>>]) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::invalid("empty fit set"));
        };
        let width = first.len();
        if let Some(r) = rows.iter().find(|r| r.len() != width) {
            return Err(Error::DimMismatch {
                expected: width,
                found: r.len(),
            });
        }
        let mut params = Vec::with_capacity(width);
        let mut medians = Vec::with_capacity(width);
        for j in 0..width {
            let mut col: Vec<f64> = rows.iter().filter_map(|r| r[j]).collect();
            if col.is_empty() {
                return Err(Error::invalid(format!("feature {j} has no observed values")));
            }
            if col.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("feature {j} has non-finite values")));
            }
            col.sort_by(f64::total_cmp);
            let n = col.len();
            let median = if n % 2 == 1 {
                col[n / 2]
            } else {
                0.5 * (col[n / 2 - 1] + col[n / 2])
            };
            params.push(MinMaxParams {
                lo: col[0],
                hi: col[n - 1],
            });
            medians.push(median);
        }
        Ok(Self { params, medians })
    }

    pub fn width(&self) -> usize {
        self.params.len()
    }

    /// Imputes, then maps each value to `(x - lo) / (hi - lo)` clamped to
    /// `[0, 1]`; constant features map to 0.5.
    pub fn apply(&self, row: &[Option<f64>]) -> Result<Vec<f64>> {
        if row.len() != self.params.len() {
            return Err(Error::DimMismatch {
                expected: self.params.len(),
                found: row.len(),
            });
        }
        Ok(row
            .iter()
            .zip(&self.params)
            .zip(&self.medians)
            .map(|((v, p), med)| scale(v.unwrap_or(*med), *p))
            .collect())
    }
}

pub fn scale(x: f64, p: MinMaxParams) -> f64 {
    if p.hi == p.lo {
        0.5
    } else {
        ((x - p.lo) / (p.hi - p.lo)).clamp(0.0, 1.0)
    }
}

/// Writes QMF vectors as CSV: `enroll,test,<feature names>`; missing values
/// are empty fields.
pub fn write_qmf_csv(trials: &[Trial], qmfs: &[QmfVector], path: impl AsRef<Path>) -> Result<()> {
    if trials.len() != qmfs.len() {
        return Err(Error::invalid(format!("{} trials but {} QMF vectors", trials.len(), qmfs.len())));
    }
    let names: &[String] = qmfs.first().map_or(&[], |q| q.names.as_slice());
    if qmfs.iter().any(|q| q.names != names) {
        return Err(Error::invalid("QMF vectors disagree on feature names"));
    }
    atomic_write(path.as_ref(), |w| {
        let mut writer = csv::Writer::from_writer(w);
        let mut header = vec!["enroll".to_string(), "test".to_string()];
        header.extend(names.iter().cloned());
        writer.write_record(&header)?;
        for (t, q) in trials.iter().zip(qmfs) {
            let mut rec = vec![t.enroll_id.clone(), t.test_id.clone()];
            rec.extend(q.values.iter().map(|v| v.map(fmt_f64).unwrap_or_default()));
            writer.write_record(&rec)?;
        }
        writer.flush()?;
        Ok(())
    })
}

/// A QMF CSV as read back: per-row trial ids and values.
#[derive(Debug, Clone, PartialEq)]
pub struct QmfTable {
    pub names: Vec<String>,
    pub trials: Vec<(String, String)>,
    pub rows: Vec<Vec<Option<f64>>>,
}

pub fn read_qmf_csv(path: impl AsRef<Path>) -> Result<QmfTable> {
    let path = path.as_ref();
    let text = crate::dataio::read_to_string(path)?;
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| Error::parse(path, 1, e.to_string()))?.clone();
    if headers.get(0) != Some("enroll") || headers.get(1) != Some("test") {
        return Err(Error::parse(path, 1, "header must start with enroll,test"));
    }
    let names: Vec<String> = headers.iter().skip(2).map(str::to_string).collect();
    let mut table = QmfTable {
        names,
        trials: Vec::new(),
        rows: Vec::new(),
    };
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let row = record
            .iter()
            .skip(2)
            .map(|f| {
                if f.is_empty() {
                    Ok(None)
                } else {
                    crate::dataio::parse_f64(f)
                        .map(Some)
                        .ok_or_else(|| Error::parse(path, line, format!("invalid value {f:?}")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        table.trials.push((record[0].to_string(), record[1].to_string()));
        table.rows.push(row);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::AttrKind;

    fn emb(chunks: &[Vec<f64>]) -> ChunkEmbeddings {
        ChunkEmbeddings::from_chunks("u", chunks).unwrap()
    }

    #[test]
    fn single_chunk_stats() {
        let q = embedding_qmf(&emb(&[vec![3.0, 4.0]]));
        assert_eq!(q.l1_norm, 7.0);
        assert_eq!(q.l2_norm, 5.0);
        assert_eq!(q.std_across_dims, 0.5);
        assert_eq!(q.mean_of_dim_stds, 0.0);
        assert_eq!(q.std_of_dim_stds, 0.0);
    }

    #[test]
    fn opposite_chunks() {
        let q = embedding_qmf(&emb(&[vec![1.0, 0.0], vec![-1.0, 0.0]]));
        assert_eq!((q.l1_norm, q.l2_norm), (0.0, 0.0));
        assert_eq!(q.mean_of_dim_stds, 0.5);
        assert_eq!(q.std_of_dim_stds, 0.5);
    }

    #[test]
    fn identical_chunks_have_zero_spread() {
        let q = embedding_qmf(&emb(&vec![vec![0.1, 0.7, -0.3]; 6]));
        assert_eq!(q.mean_of_dim_stds, 0.0);
        assert_eq!(q.std_of_dim_stds, 0.0);
    }

    fn schema() -> Vec<SchemaEntry> {
        vec![
            SchemaEntry::new("gender", AttrKind::Categorical, Transform::Match).unwrap(),
            SchemaEntry::new("speech_length", AttrKind::Real, Transform::Log1p).unwrap(),
        ]
    }

    fn columns() -> Vec<Column> {
        vec![
            Column {
                name: "gender".into(),
                kind: AttrKind::Categorical,
            },
            Column {
                name: "speech_length".into(),
                kind: AttrKind::Real,
            },
        ]
    }

    fn trial(a: Vec<AttrValue>, b: Vec<AttrValue>) -> QmfVector {
        let cols = columns();
        let q = embedding_qmf(&emb(&[vec![1.0, 2.0]]));
        build_trial_qmf(
            SideInput {
                columns: &cols,
                attributes: &a,
                embedding: &q,
            },
            SideInput {
                columns: &cols,
                attributes: &b,
                embedding: &q,
            },
            &schema(),
        )
        .unwrap()
    }

    fn cat(s: &str) -> AttrValue {
        AttrValue::Categorical(s.into())
    }

    #[test]
    fn gender_match_bit() {
        let same = trial(vec![cat("m"), AttrValue::Real(1.0)], vec![cat("m"), AttrValue::Real(1.0)]);
        let diff = trial(vec![cat("m"), AttrValue::Real(1.0)], vec![cat("f"), AttrValue::Real(1.0)]);
        let missing = trial(vec![AttrValue::Missing, AttrValue::Real(1.0)], vec![cat("f"), AttrValue::Real(1.0)]);
        assert_eq!(same.names[0], "gender_match");
        assert_eq!(same.values[0], Some(1.0));
        assert_eq!(diff.values[0], Some(0.0));
        assert_eq!(missing.values[0], Some(0.0));
    }

    #[test]
    fn log1p_pairs() {
        let e1 = std::f64::consts::E - 1.0;
        let e2 = std::f64::consts::E.powi(2) - 1.0;
        let q = trial(vec![cat("m"), AttrValue::Real(e2)], vec![cat("m"), AttrValue::Real(e1)]);
        assert_eq!(&q.names[1..3], ["speech_length_min", "speech_length_max"]);
        assert!((q.values[1].unwrap() - 1.0).abs() < 1e-15);
        assert!((q.values[2].unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn missing_real_propagates_to_pair() {
        let q = trial(vec![cat("m"), AttrValue::Missing], vec![cat("m"), AttrValue::Real(3.0)]);
        assert_eq!(&q.values[1..3], [None, None]);
    }

    #[test]
    fn log1p_domain_error() {
        let cols = columns();
        let q = embedding_qmf(&emb(&[vec![1.0, 2.0]]));
        let a = vec![cat("m"), AttrValue::Real(-2.0)];
        let side = SideInput {
            columns: &cols,
            attributes: &a,
            embedding: &q,
        };
        assert!(build_trial_qmf(side, side, &schema()).is_err());
    }

    #[test]
    fn minmax_examples() {
        let s = MinMaxScaler::fit(&[vec![Some(0.0)], vec![Some(10.0)]]).unwrap();
        assert_eq!(s.apply(&[Some(5.0)]).unwrap(), vec![0.5]);
        assert_eq!(s.apply(&[Some(-3.0)]).unwrap(), vec![0.0]);
        assert_eq!(s.apply(&[Some(30.0)]).unwrap(), vec![1.0]);
        assert_eq!(s.apply(&[None]).unwrap(), vec![0.5]);
    }

    #[test]
    fn minmax_constant_and_errors() {
        let s = MinMaxScaler::fit(&[vec![Some(2.0)], vec![Some(2.0)], vec![None]]).unwrap();
        assert_eq!(s.apply(&[Some(7.0)]).unwrap(), vec![0.5]);
        assert!(MinMaxScaler::fit(&[]).is_err());
        assert!(MinMaxScaler::fit(&[vec![None]]).is_err());
        assert!(s.apply(&[Some(1.0), Some(2.0)]).is_err());
    }

    #[test]
    fn median_imputation() {
        let rows: Vec<Vec<Option<f64>>> = [1.0, 9.0, 3.0, 4.0].iter().map(|v| vec![Some(*v)]).collect();
        let s = MinMaxScaler::fit(&rows).unwrap();
        assert_eq!(s.medians, vec![3.5]);
    }
}
