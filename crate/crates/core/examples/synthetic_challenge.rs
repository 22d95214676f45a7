//! Three synthetic embedding systems scored, fused with embedding QMFs on a
//! development half and evaluated on held-out speakers.
//!
//! cargo run --release --example synthetic_challenge

use std::collections::BTreeSet;

use voxfuse::dataio::SpeakerMap;
use voxfuse::fusion::{FitOptions, FusionModel};
use voxfuse::metrics::{evaluate, DcfParams};
use voxfuse::qmf::trial_qmfs;
use voxfuse::scoring::pairwise_score;
use voxfuse::synth::{gen_dataset, gen_trials, SynthConfig};
use voxfuse::{ChunkEmbeddings, Result, Trial};

const SPREADS: [f64; 3] = [0.2, 0.25, 0.3];

fn split(store: &[ChunkEmbeddings], speakers: &SpeakerMap, keep: &BTreeSet<&str>) -> (Vec<ChunkEmbeddings>, SpeakerMap) {
    let part: Vec<ChunkEmbeddings> = store
        .iter()
        .filter(|e| keep.contains(speakers[e.utt_id()].as_str()))
        .cloned()
        .collect();
    let map = part.iter().map(|e| (e.utt_id().to_string(), speakers[e.utt_id()].clone())).collect();
    (part, map)
}

fn score_all(store: &[ChunkEmbeddings], trials: &[Trial]) -> Result<Vec<f64>> {
    let find = |id: &str| store.iter().find(|e| e.utt_id() == id).expect("trial utterance in store");
    trials
        .iter()
        .map(|t| pairwise_score(find(&t.enroll_id), find(&t.test_id)).map(|s| s.value))
        .collect()
}

fn main() -> Result<()> {
    let systems = SPREADS
        .iter()
        .enumerate()
        .map(|(i, &within_spread)| {
            gen_dataset(&SynthConfig {
                n_speakers: 50,
                utts_per_speaker: 8,
                chunks_per_utt: 4,
                dim: 32,
                within_spread,
                between_spread: 0.6,
                seed: 7,
                attribute_noise: 0.0,
                system: i as u64,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let all: BTreeSet<&str> = systems[0].speakers.values().map(String::as_str).collect();
    let dev: BTreeSet<&str> = all.iter().copied().take(all.len() / 2).collect();
    let eval: BTreeSet<&str> = all.difference(&dev).copied().collect();

    let mut halves = Vec::new();
    for (part, seed) in [(&dev, 1), (&eval, 2)] {
        let stores: Vec<_> = systems.iter().map(|s| split(&s.store, &s.speakers, part)).collect();
        let trials = gen_trials(&stores[0].0, &stores[0].1, 400, 2000, seed)?;
        let scores = stores.iter().map(|(st, _)| score_all(st, &trials)).collect::<Result<Vec<_>>>()?;
        let qmf = trial_qmfs(&trials, &stores[0].0, None, &[])?;
        halves.push((trials, scores, qmf));
    }

    let (dev_trials, dev_scores, dev_qmf) = &halves[0];
    let names: Vec<String> = (0..SPREADS.len())
        .map(|i| format!("sys{i}"))
        .chain(dev_qmf[0].names.iter().cloned())
        .collect();
    let rows = |scores: &[Vec<f64>], i: usize| scores.iter().map(|s| s[i]).collect::<Vec<_>>();
    let dev_rows: Vec<Vec<f64>> = (0..dev_trials.len()).map(|i| rows(dev_scores, i)).collect();
    let dev_q: Vec<Vec<Option<f64>>> = dev_qmf.iter().map(|q| q.values.clone()).collect();
    let dev_labels: Vec<bool> = dev_trials.iter().map(|t| t.label == Some(true)).collect();
    let model = FusionModel::fit(names, &dev_rows, &dev_q, &dev_labels, 1e-3, &FitOptions::default())?;

    let (eval_trials, eval_scores, eval_qmf) = &halves[1];
    let labels: Vec<bool> = eval_trials.iter().map(|t| t.label == Some(true)).collect();
    let params = [DcfParams::default()];
    let mut best = f64::INFINITY;
    for (i, s) in eval_scores.iter().enumerate() {
        let r = evaluate(s, &labels, &params)?;
        best = best.min(r.eer);
        println!("system {i} (within spread {}): {r}", SPREADS[i]);
    }
    let fused = (0..eval_trials.len())
        .map(|i| model.logit(&rows(eval_scores, i), &eval_qmf[i].values))
        .collect::<Result<Vec<_>>>()?;
    let r = evaluate(&fused, &labels, &params)?;
    println!("fusion + QMF: {r}");
    println!("best single EER {:.2}%, fused {:.2}%", 100.0 * best, 100.0 * r.eer);
    Ok(())
}
