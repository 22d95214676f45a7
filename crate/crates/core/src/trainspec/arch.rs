use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StageSpec {
    /// Residual blocks, two 3x3 convolutions each.
    pub blocks: u32,
    pub channels: u32,
    pub freq_out: u32,
    /// Total time downsampling at the stage output.
    pub time_divisor: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArchSpec {
    pub stem_channels: u32,
    pub stages: Vec<StageSpec>,
    pub input_freq_bins: u32,
    pub embedding_dim: u32,
}

impl ArchSpec {
    /// ResNet-100 with fwSE blocks over 96 log Mel filterbanks.
    pub fn resnet100() -> Self {
        let stage = |blocks, channels, freq_out, time_divisor| StageSpec {
            blocks,
            channels,
            freq_out,
            time_divisor,
        };
        Self {
            stem_channels: 128,
            stages: vec![
                stage(6, 128, 96, 1),
                stage(16, 128, 48, 2),
                stage(24, 256, 24, 4),
                stage(3, 256, 12, 8),
            ],
            input_freq_bins: 96,
            embedding_dim: 256,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageShape {
    pub name: String,
    pub channels: u32,
    pub freq: u32,
    pub time: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShapeReport {
    /// Stem followed by one entry per residual stage, as `(C, F, T)`.
    pub stages: Vec<StageShape>,
    pub flatten_channels: u32,
    pub flatten_frames: u32,
    /// Attentive statistics pooling output (mean and std concatenated).
    pub pooled_dim: u32,
    pub embedding_dim: u32,
    /// Stem conv + two convs per block + dense layer.
    pub layer_count: u32,
}

/// Output shapes for an input of `frames` frames.
pub fn resnet_shapes(spec: &ArchSpec, frames: u32) -> Result<ShapeReport> {
    let Some(last) = spec.stages.last() else {
        return Err(Error::invalid("architecture has no stages"));
    };
    if let Some(s) = spec.stages.iter().find(|s| ![1, 2, 4, 8].contains(&s.time_divisor)) {
        return Err(Error::invalid(format!("time divisor {} not in {{1, 2, 4, 8}}", s.time_divisor)));
    }
    let max_div = spec.stages.iter().map(|s| s.time_divisor).max().unwrap_or(1);
    if frames == 0 || frames % max_div != 0 {
        return Err(Error::invalid(format!("frame count {frames} must be a positive multiple of {max_div}")));
    }
    let mut stages = vec![StageShape {
        name: "stem".into(),
        channels: spec.stem_channels,
        freq: spec.input_freq_bins,
        time: frames,
    }];
    for (i, s) in spec.stages.iter().enumerate() {
        stages.push(StageShape {
            name: format!("resblock{}", i + 1),
            channels: s.channels,
            freq: s.freq_out,
            time: frames / s.time_divisor,
        });
    }
    let flatten_channels = last.channels * last.freq_out;
    Ok(ShapeReport {
        stages,
        flatten_channels,
        flatten_frames: frames / last.time_divisor,
        pooled_dim: 2 * flatten_channels,
        embedding_dim: spec.embedding_dim,
        layer_count: 2 + 2 * spec.stages.iter().map(|s| s.blocks).sum::<u32>(),
    })
}
