//! Domain dataset filtering.
//!
//! Picks the source-corpus speakers that sit closest to a target corpus.
//! Every speaker is summarized by a length-normalized component-wise median
//! of its utterance mean embeddings. Each target speaker nominates its
//! `top_k` most similar source speakers; the union is then stripped of any
//! source speaker whose similarity to some target speaker exceeds
//! `dedup_threshold`, since such pairs are taken to be the same person.

use std::collections::{BTreeMap, BTreeSet};

use crate::dataio::{ChunkEmbeddings, SpeakerMap};
use crate::error::{Error, Result};
use crate::numeric::l2_norm;
use crate::scoring::{cosine, mean_embedding};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DdfConfig {
    pub top_k: usize,
    pub dedup_threshold: f64,
}

impl Default for DdfConfig {
    fn default() -> Self {
        Self {
            top_k: 50,
            dedup_threshold: 0.8,
        }
    }
}

impl DdfConfig {
    pub fn validate(&self) -> Result<()> {
        if self.top_k == 0 {
            return Err(Error::invalid("top_k must be positive"));
        }
        if !(self.dedup_threshold > 0.0 && self.dedup_threshold <= 1.0) {
            return Err(Error::invalid(format!(
                "dedup threshold must be in (0, 1], got {}",
                self.dedup_threshold
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeakerProfile {
    pub speaker_id: String,
    pub median_embedding: Vec<f64>,
}

/// Component-wise median (lower middle for even counts), L2-normalized.
pub fn median_profile(speaker_id: impl Into<String>, utterance_means: &[Vec<f64>]) -> Result<SpeakerProfile> {
    let speaker_id = speaker_id.into();
    let Some(first) = utterance_means.first() else {
        return Err(Error::invalid(format!("speaker {speaker_id} has no utterances")));
    };
    let dim = first.len();
    if let Some(u) = utterance_means.iter().find(|u| u.len() != dim) {
        return Err(Error::DimMismatch {
            expected: dim,
            found: u.len(),
        });
    }
    let mid = (utterance_means.len() - 1) / 2;
    let mut column = vec![0.0; utterance_means.len()];
    let median: Vec<f64> = (0..dim)
        .map(|d| {
            for (slot, u) in column.iter_mut().zip(utterance_means) {
                *slot = u[d];
            }
            column.sort_by(f64::total_cmp);
            column[mid]
        })
        .collect();
    let norm = l2_norm(&median);
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::ZeroNorm);
    }
    Ok(SpeakerProfile {
        speaker_id,
        median_embedding: median.iter().map(|v| v / norm).collect(),
    })
}

/// Profiles for every speaker in `speaker_map`, sorted by speaker id.
pub fn profiles_from_store(store: &[ChunkEmbeddings], speaker_map: &SpeakerMap) -> Result<Vec<SpeakerProfile>> {
    let by_id: BTreeMap<&str, &ChunkEmbeddings> = store.iter().map(|e| (e.utt_id(), e)).collect();
    let mut per_speaker: BTreeMap<&str, Vec<Vec<f64>>> = BTreeMap::new();
    for (utt, spk) in speaker_map {
        let e = by_id.get(utt.as_str()).ok_or_else(|| Error::UnknownUtterance(utt.clone()))?;
        per_speaker.entry(spk.as_str()).or_default().push(mean_embedding(e));
    }
    per_speaker
        .into_iter()
        .map(|(spk, means)| median_profile(spk, &means))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DdfSelection {
    pub speaker_id: String,
    pub max_similarity: f64,
    pub nearest_target: String,
}

/// Runs the filter; the result is sorted by speaker id.
pub fn ddf_select(source: &[SpeakerProfile], target: &[SpeakerProfile], cfg: &DdfConfig) -> Result<Vec<DdfSelection>> {
    cfg.validate()?;
    if source.is_empty() || target.is_empty() {
        return Err(Error::invalid("source and target speaker lists must be non-empty"));
    }
    let mut src: Vec<&SpeakerProfile> = source.iter().collect();
    let mut tgt: Vec<&SpeakerProfile> = target.iter().collect();
    src.sort_by(|a, b| a.speaker_id.cmp(&b.speaker_id));
    tgt.sort_by(|a, b| a.speaker_id.cmp(&b.speaker_id));
    for w in src.windows(2).chain(tgt.windows(2)) {
        if w[0].speaker_id == w[1].speaker_id {
            return Err(Error::invalid(format!("duplicate speaker id {}", w[0].speaker_id)));
        }
    }

    // sim[t][s]
    let sim: Vec<Vec<f64>> = tgt
        .iter()
        .map(|t| {
            src.iter()
                .map(|s| cosine(&t.median_embedding, &s.median_embedding))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let mut union = BTreeSet::new();
    let mut ranked: Vec<usize> = (0..src.len()).collect();
    for row in &sim {
        // Sources are already in id order, so a stable sort breaks ties by id.
        ranked.sort_by(|&a, &b| row[b].total_cmp(&row[a]));
        union.extend(ranked.iter().take(cfg.top_k).copied());
        ranked.sort_unstable();
    }

    let mut out = Vec::new();
    for s in union {
        let (best_t, best_sim) = sim
            .iter()
            .enumerate()
            .map(|(t, row)| (t, row[s]))
            .fold((0, f64::NEG_INFINITY), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        if best_sim > cfg.dedup_threshold {
            continue;
        }
        out.push(DdfSelection {
            speaker_id: src[s].speaker_id.clone(),
            max_similarity: best_sim,
            nearest_target: tgt[best_t].speaker_id.clone(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(id: &str, v: Vec<f64>) -> SpeakerProfile {
        let n = l2_norm(&v);
        SpeakerProfile {
            speaker_id: id.into(),
            median_embedding: v.iter().map(|x| x / n).collect(),
        }
    }

    /// Unit vector at cosine `c` from the x axis.
    fn at(c: f64) -> Vec<f64> {
        vec![c, (1.0 - c * c).sqrt()]
    }

    #[test]
    fn median_examples() {
        let p = median_profile("s", &[vec![0.0, 1.0], vec![0.0, 3.0], vec![0.0, 100.0]]).unwrap();
        assert_eq!(p.median_embedding, vec![0.0, 1.0]);
        let p = median_profile("s", &[vec![1.0, 0.0], vec![3.0, 0.0]]).unwrap();
        assert_eq!(p.median_embedding, vec![1.0, 0.0]);
        let p = median_profile("s", &[vec![3.0, 4.0]]).unwrap();
        assert_eq!(p.median_embedding, vec![0.6, 0.8]);
    }

    #[test]
    fn median_errors() {
        assert!(median_profile("s", &[]).is_err());
        assert!(matches!(median_profile("s", &[vec![0.0, 0.0]]), Err(Error::ZeroNorm)));
        assert!(median_profile("s", &[vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn hand_enumerated_selection() {
        let target = [profile("t", vec![1.0, 0.0])];
        let source = [profile("a", at(0.5)), profile("b", at(0.6)), profile("c", at(0.9))];
        let cfg = DdfConfig {
            top_k: 2,
            dedup_threshold: 0.8,
        };
        let sel = ddf_select(&source, &target, &cfg).unwrap();
        assert_eq!(sel.len(), 1);
        assert_eq!(sel[0].speaker_id, "b");
        assert_eq!(sel[0].nearest_target, "t");
        assert!((sel[0].max_similarity - 0.6).abs() < 1e-15);
    }

    #[test]
    fn no_filtering_keeps_everything() {
        let target = [profile("t", vec![1.0, 0.0])];
        let source = [profile("a", at(0.5)), profile("b", at(0.6)), profile("c", at(0.9))];
        let cfg = DdfConfig {
            top_k: 10,
            dedup_threshold: 1.0,
        };
        let ids: Vec<_> = ddf_select(&source, &target, &cfg)
            .unwrap()
            .into_iter()
            .map(|s| s.speaker_id)
            .collect();
        assert_eq!(ids, ["a", "b", "c"]);
    }

    #[test]
    fn ties_prefer_smaller_id() {
        let target = [profile("t", vec![1.0, 0.0])];
        let source = [profile("z", at(0.5)), profile("y", at(0.5)), profile("x", at(0.5))];
        let cfg = DdfConfig {
            top_k: 1,
            dedup_threshold: 1.0,
        };
        let sel = ddf_select(&source, &target, &cfg).unwrap();
        assert_eq!(sel[0].speaker_id, "x");
    }

    #[test]
    fn invalid_inputs() {
        let t = [profile("t", vec![1.0, 0.0])];
        let s = [profile("s", vec![1.0, 0.0, 0.0])];
        assert!(matches!(ddf_select(&s, &t, &DdfConfig::default()), Err(Error::DimMismatch { .. })));
        assert!(ddf_select(&[], &t, &DdfConfig::default()).is_err());
        let bad = DdfConfig {
            top_k: 0,
            dedup_threshold: 0.8,
        };
        assert!(ddf_select(&t, &t, &bad).is_err());
    }
}
