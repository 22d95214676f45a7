//! Cohort construction and adaptive symmetric score normalization.
//!
//! Each trial side is scored against every cohort speaker embedding; the
//! `top_n` highest cohort scores of that side give a mean and population
//! standard deviation, and the raw score is normalized against both sides:
//!
//! ```text
//! 0.5 * ((raw - mu_e) / sigma_e + (raw - mu_t) / sigma_t)
//! ```

use std::collections::BTreeMap;

use crate::dataio::{ChunkEmbeddings, SpeakerMap};
use crate::error::{Error, Result};
use crate::numeric::mean_std;
use crate::rng::Rng;
use crate::scoring::{cosine, mean_embedding, mean_of_vectors};

const MIN_SIGMA: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AsNormConfig {
    pub top_n: usize,
    pub utterances_per_speaker: usize,
}

impl Default for AsNormConfig {
    fn default() -> Self {
        Self {
            top_n: 100,
            utterances_per_speaker: 20,
        }
    }
}

/// One mean embedding per imposter speaker.
#[derive(Debug, Clone, PartialEq)]
pub struct Cohort {
    speaker_ids: Vec<String>,
    dim: usize,
    embeddings: Vec<f64>,
}

impl Cohort {
    pub fn new(speaker_ids: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if speaker_ids.is_empty() || speaker_ids.len() != rows.len() {
            return Err(Error::invalid("cohort needs one embedding per speaker and at least one speaker"));
        }
        let dim = rows[0].len();
        if let Some(r) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::DimMismatch {
                expected: dim,
                found: r.len(),
            });
        }
        let embeddings = rows.concat();
        if dim == 0 || embeddings.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("cohort embeddings must be finite and non-empty"));
        }
        Ok(Self {
            speaker_ids,
            dim,
            embeddings,
        })
    }

    /// Cohort stored as an embedding store: one single-chunk record per speaker.
    pub fn from_store(records: &[ChunkEmbeddings]) -> Result<Self> {
        let mut ids = Vec::with_capacity(records.len());
        let mut rows = Vec::with_capacity(records.len());
        for r in records {
            ids.push(r.utt_id().to_string());
            rows.push(mean_embedding(r));
        }
        Self::new(ids, rows)
    }

    pub fn to_store(&self) -> Result<Vec<ChunkEmbeddings>> {
        self.speaker_ids
            .iter()
            .zip(self.rows())
            .map(|(id, row)| ChunkEmbeddings::new(id.clone(), self.dim, row.to_vec()))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.speaker_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.speaker_ids.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn speaker_ids(&self) -> &[String] {
        &self.speaker_ids
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.embeddings.chunks_exact(self.dim)
    }

    /// Cosine of `emb` against every cohort row, in cohort order.
    pub fn scores(&self, emb: &[f64]) -> Result<Vec<f64>> {
        self.rows().map(|row| cosine(emb, row)).collect()
    }
}

/// Builds a cohort of one embedding per speaker in `speaker_map`.
///
/// Speakers are visited in lexicographic order and share one stream seeded
/// by `seed`. For each speaker the lexicographically sorted utterance ids are
/// shuffled (see [`Rng::shuffle`]) and the first
/// `min(utterances_per_speaker, available)` are kept; the cohort row is the
/// mean of their utterance mean embeddings.
pub fn build_cohort(
    store: &[ChunkEmbeddings],
    speaker_map: &SpeakerMap,
    cfg: &AsNormConfig,
    seed: u64,
) -> Result<Cohort> {
    if speaker_map.is_empty() {
        return Err(Error::invalid("empty speaker map"));
    }
    if cfg.utterances_per_speaker == 0 {
        return Err(Error::invalid("utterances_per_speaker must be positive"));
    }
    let by_id: BTreeMap<&str, &ChunkEmbeddings> = store.iter().map(|e| (e.utt_id(), e)).collect();

    let mut speakers: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (utt, spk) in speaker_map {
        speakers.entry(spk.as_str()).or_default().push(utt.as_str());
    }

    let mut rng = Rng::new(seed);
    let mut ids = Vec::with_capacity(speakers.len());
    let mut rows = Vec::with_capacity(speakers.len());
    for (spk, mut utts) in speakers {
        utts.sort_unstable();
        rng.shuffle(&mut utts);
        utts.truncate(cfg.utterances_per_speaker);
        let means = utts
            .iter()
            .map(|u| {
                by_id
                    .get(u)
                    .map(|e| mean_embedding(e))
                    .ok_or_else(|| Error::UnknownUtterance(u.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        let refs: Vec<&[f64]> = means.iter().map(Vec::as_slice).collect();
        ids.push(spk.to_string());
        rows.push(mean_of_vectors(&refs));
    }
    Cohort::new(ids, rows)
}

/// Mean and population std of the `top_n` largest cohort scores.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SideStats {
    pub mean: f64,
    pub std: f64,
}

pub fn top_n_stats(cohort_scores: &[f64], top_n: usize) -> Result<SideStats> {
    if top_n == 0 {
        return Err(Error::invalid("top_n must be positive"));
    }
    if top_n > cohort_scores.len() {
        return Err(Error::invalid(format!(
            "top_n {top_n} exceeds cohort size {}",
            cohort_scores.len()
        )));
    }
    let mut sorted = cohort_scores.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let (mean, std) = mean_std(&sorted[..top_n]);
    Ok(SideStats { mean, std })
}

/// Normalizes `raw` given each side's cohort statistics.
pub fn normalize(raw: f64, enroll: SideStats, test: SideStats) -> Result<f64> {
    if !raw.is_finite() {
        return Err(Error::invalid("raw score must be finite"));
    }
    for (side, s) in [("enrollment", enroll), ("test", test)] {
        if !(s.std >= MIN_SIGMA) {
            return Err(Error::DegenerateCohort { side, sigma: s.std });
        }
    }
    Ok(0.5 * ((raw - enroll.mean) / enroll.std + (raw - test.mean) / test.std))
}

/// AS-Norm from precomputed cohort score lists for each side.
pub fn asnorm_from_cohort_scores(
    raw: f64,
    enroll_cohort: &[f64],
    test_cohort: &[f64],
    top_n: usize,
) -> Result<f64> {
    normalize(raw, top_n_stats(enroll_cohort, top_n)?, top_n_stats(test_cohort, top_n)?)
}

/// AS-Norm of one trial. Cohort scores use cosine between the utterance
/// embeddings given here (normally chunk means) and the cohort rows.
pub fn asnorm_score(
    raw: f64,
    enroll_emb: &[f64],
    test_emb: &[f64],
    cohort: &Cohort,
    cfg: &AsNormConfig,
) -> Result<f64> {
    if cfg.top_n > cohort.len() {
        return Err(Error::invalid(format!(
            "top_n {} exceeds cohort size {}",
            cfg.top_n,
            cohort.len()
        )));
    }
    asnorm_from_cohort_scores(raw, &cohort.scores(enroll_emb)?, &cohort.scores(test_emb)?, cfg.top_n)
}

/// Caches per-utterance cohort statistics for scoring many trials.
#[derive(Debug)]
pub struct AsNorm<'a> {
    cohort: &'a Cohort,
    top_n: usize,
    cache: BTreeMap<String, SideStats>,
}

impl<'a> AsNorm<'a> {
    pub fn new(cohort: &'a Cohort, cfg: &AsNormConfig) -> Result<Self> {
        if cfg.top_n == 0 || cfg.top_n > cohort.len() {
            return Err(Error::invalid(format!(
                "top_n {} must be in 1..={}",
                cfg.top_n,
                cohort.len()
            )));
        }
        Ok(Self {
            cohort,
            top_n: cfg.top_n,
            cache: BTreeMap::new(),
        })
    }

    pub fn stats(&mut self, utt: &ChunkEmbeddings) -> Result<SideStats> {
        if let Some(s) = self.cache.get(utt.utt_id()) {
            return Ok(*s);
        }
        let scores = self.cohort.scores(&mean_embedding(utt))?;
        let s = top_n_stats(&scores, self.top_n)?;
        self.cache.insert(utt.utt_id().to_string(), s);
        Ok(s)
    }

    pub fn score(&mut self, raw: f64, enroll: &ChunkEmbeddings, test: &ChunkEmbeddings) -> Result<f64> {
        let e = self.stats(enroll)?;
        let t = self.stats(test)?;
        normalize(raw, e, t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit3(a: f64, b: f64) -> Vec<f64> {
        vec![a, b, (1.0 - a * a - b * b).sqrt()]
    }

    #[test]
    fn hand_computed_example() {
        // Cohort rows chosen so the enrollment side sees {0.2, 0.4} and the
        // test side {0.3, 0.7}: mu_e = 0.3, sigma_e = 0.1, mu_t = 0.5, sigma_t = 0.2.
        let cohort = Cohort::new(
            vec!["c1".into(), "c2".into()],
            vec![unit3(0.2, 0.3), unit3(0.4, 0.7)],
        )
        .unwrap();
        let cfg = AsNormConfig {
            top_n: 2,
            utterances_per_speaker: 20,
        };
        let s = asnorm_score(0.5, &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &cohort, &cfg).unwrap();
        assert!((s - 1.0).abs() < 1e-12, "{s}");
    }

    #[test]
    fn same_embedding_both_sides() {
        let scores = [0.1, 0.5, 0.2, 0.4];
        let s = asnorm_from_cohort_scores(0.6, &scores, &scores, 2).unwrap();
        let st = top_n_stats(&scores, 2).unwrap();
        assert_eq!(s, (0.6 - st.mean) / st.std);
    }

    #[test]
    fn identical_cohort_is_degenerate() {
        let row = vec![0.3, 0.4, 0.5];
        let cohort = Cohort::new(vec!["a".into(), "b".into(), "c".into()], vec![row.clone(); 3]).unwrap();
        let cfg = AsNormConfig {
            top_n: 3,
            utterances_per_speaker: 1,
        };
        let err = asnorm_score(0.1, &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &cohort, &cfg).unwrap_err();
        assert!(matches!(err, Error::DegenerateCohort { .. }));
    }

    #[test]
    fn top_n_selects_largest() {
        let st = top_n_stats(&[0.9, -1.0, 0.1, 0.7, 5.0], 2).unwrap();
        assert_eq!(st.mean, 2.95);
        assert!(top_n_stats(&[0.1], 2).is_err());
        assert!(top_n_stats(&[0.1], 0).is_err());
    }

    #[test]
    fn cohort_single_utterance_is_identity() {
        let store = vec![ChunkEmbeddings::new("u1", 2, vec![0.25, -1.5]).unwrap()];
        let map: SpeakerMap = [("u1".to_string(), "spk".to_string())].into();
        let c = build_cohort(&store, &map, &AsNormConfig::default(), 0).unwrap();
        assert_eq!(c.rows().next().unwrap(), &[0.25, -1.5]);
    }

    #[test]
    fn cohort_uses_all_when_under_quota() {
        let store: Vec<ChunkEmbeddings> = (0..5)
            .map(|i| ChunkEmbeddings::new(format!("u{i}"), 1, vec![i as f64]).unwrap())
            .collect();
        let map: SpeakerMap = (0..5).map(|i| (format!("u{i}"), "s".to_string())).collect();
        let c = build_cohort(&store, &map, &AsNormConfig::default(), 3).unwrap();
        assert_eq!(c.rows().next().unwrap(), &[2.0]);
    }

    #[test]
    fn cohort_errors() {
        let store = vec![ChunkEmbeddings::new("u1", 1, vec![1.0]).unwrap()];
        assert!(build_cohort(&store, &SpeakerMap::new(), &AsNormConfig::default(), 0).is_err());
        let map: SpeakerMap = [("missing".to_string(), "s".to_string())].into();
        assert!(matches!(
            build_cohort(&store, &map, &AsNormConfig::default(), 0),
            Err(Error::UnknownUtterance(_))
        ));
    }
}
