//! Picks source speakers close to a target corpus while dropping likely
//! duplicates of target speakers.
//!
//! cargo run --example ddf_curation

use voxfuse::curation::{ddf_select, median_profile, DdfConfig};
use voxfuse::Result;

fn unit(angle_deg: f64) -> Vec<f64> {
    let a = angle_deg.to_radians();
    vec![a.cos(), a.sin(), 0.0]
}

fn main() -> Result<()> {
    let target = vec![
        median_profile("tgt_a", &[unit(0.0), unit(4.0), unit(-3.0)])?,
        median_profile("tgt_b", &[unit(90.0), unit(95.0)])?,
    ];
    let source = [
        ("src_dup", 1.0),
        ("src_near", 40.0),
        ("src_mid", 60.0),
        ("src_far", 180.0),
        ("src_b_near", 140.0),
    ]
    .iter()
    .map(|&(id, deg)| median_profile(id, &[unit(deg)]))
    .collect::<Result<Vec<_>>>()?;

    let cfg = DdfConfig {
        top_k: 2,
        dedup_threshold: 0.8,
    };
    for s in ddf_select(&source, &target, &cfg)? {
        println!("{:<12} max sim {:.3} (nearest {})", s.speaker_id, s.max_similarity, s.nearest_target);
    }
    Ok(())
}
