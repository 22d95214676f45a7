//! Feature-map shapes through the ResNet-100 speaker encoder.
//!
//! cargo run --example resnet_shapes -- 800

use voxfuse::trainspec::{resnet_shapes, ArchSpec};
use voxfuse::Result;

fn main() -> Result<()> {
    let frames = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(800);
    let r = resnet_shapes(&ArchSpec::resnet100(), frames)?;
    for s in &r.stages {
        println!("{:<10} ({}, {}, {})", s.name, s.channels, s.freq, s.time);
    }
    println!("flatten    {} x {}", r.flatten_channels, r.flatten_frames);
    println!("pooling    {}", r.pooled_dim);
    println!("dense      {}", r.embedding_dim);
    println!("layers     {}", r.layer_count);
    Ok(())
}
