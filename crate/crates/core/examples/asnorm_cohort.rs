//! Builds an imposter cohort from held-out speakers and compares raw and
//! AS-Norm scores on synthetic trials.
//!
//! cargo run --release --example asnorm_cohort

use std::collections::HashMap;

use voxfuse::asnorm::{build_cohort, AsNorm, AsNormConfig};
use voxfuse::dataio::SpeakerMap;
use voxfuse::metrics::{evaluate, DcfParams};
use voxfuse::scoring::pairwise_score;
use voxfuse::synth::{gen_dataset, gen_trials, speaker_id, SynthConfig};
use voxfuse::{ChunkEmbeddings, Result};

fn main() -> Result<()> {
    let data = gen_dataset(&SynthConfig {
        n_speakers: 60,
        utts_per_speaker: 6,
        chunks_per_utt: 3,
        dim: 24,
        within_spread: 0.25,
        between_spread: 0.6,
        seed: 11,
        attribute_noise: 0.0,
        system: 0,
    })?;

    // The first 20 speakers form the cohort, the rest are evaluated.
    let cohort_ids: Vec<String> = (0..20).map(speaker_id).collect();
    let (cohort_map, eval_map): (SpeakerMap, SpeakerMap) = data
        .speakers
        .clone()
        .into_iter()
        .partition(|(_, spk)| cohort_ids.contains(spk));
    let eval_store: Vec<ChunkEmbeddings> = data
        .store
        .iter()
        .filter(|e| eval_map.contains_key(e.utt_id()))
        .cloned()
        .collect();

    let cfg = AsNormConfig {
        top_n: 10,
        ..AsNormConfig::default()
    };
    let cohort = build_cohort(&data.store, &cohort_map, &cfg, 5)?;
    println!("cohort: {} speakers, dim {}", cohort.len(), cohort.dim());

    let trials = gen_trials(&eval_store, &eval_map, 300, 3000, 3)?;
    let by_id: HashMap<&str, &ChunkEmbeddings> = eval_store.iter().map(|e| (e.utt_id(), e)).collect();
    let mut norm = AsNorm::new(&cohort, &cfg)?;
    let (mut raw, mut normed) = (Vec::new(), Vec::new());
    for t in &trials {
        let (e, s) = (by_id[t.enroll_id.as_str()], by_id[t.test_id.as_str()]);
        let r = pairwise_score(e, s)?.value;
        raw.push(r);
        normed.push(norm.score(r, e, s)?);
    }

    let labels: Vec<bool> = trials.iter().map(|t| t.label == Some(true)).collect();
    let params = [DcfParams::with_prior(0.05)?];
    println!("raw     {}", evaluate(&raw, &labels, &params)?);
    println!("as-norm {}", evaluate(&normed, &labels, &params)?);
    Ok(())
}
