//! Quality measure features for a few synthetic trials, plus the min-max
//! scaling the fusion stage applies to them.
//!
//! cargo run --example qmf_features

use voxfuse::qmf::{trial_qmfs, MinMaxScaler};
use voxfuse::synth::{attribute_schema, gen_attributes, gen_dataset, gen_trials, SynthConfig};
use voxfuse::Result;

fn main() -> Result<()> {
    let cfg = SynthConfig {
        n_speakers: 8,
        utts_per_speaker: 4,
        chunks_per_utt: 3,
        dim: 16,
        within_spread: 0.3,
        between_spread: 0.8,
        seed: 3,
        attribute_noise: 0.1,
        system: 0,
    };
    let data = gen_dataset(&cfg)?;
    let attrs = gen_attributes(&data.store, &data.speakers, &cfg)?;
    let schema = attribute_schema();
    let trials = gen_trials(&data.store, &data.speakers, 4, 4, 1)?;
    let qmfs = trial_qmfs(&trials, &data.store, Some(&attrs), &schema)?;

    let first = &qmfs[0];
    println!("trial {} / {}:", trials[0].enroll_id, trials[0].test_id);
    for (name, v) in first.names.iter().zip(&first.values) {
        match v {
            Some(v) => println!("  {name:<28} {v:.4}"),
            None => println!("  {name:<28} (missing)"),
        }
    }

    let rows: Vec<Vec<Option<f64>>> = qmfs.iter().map(|q| q.values.clone()).collect();
    let scaler = MinMaxScaler::fit(&rows)?;
    let scaled = scaler.apply(&rows[0])?;
    println!("scaled to [0, 1]: {:.3?}", &scaled[..6]);
    Ok(())
}
