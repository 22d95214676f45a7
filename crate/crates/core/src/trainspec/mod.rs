//! Training-recipe calculators: learning-rate and margin schedules, and the
//! layer shapes of the 100-layer ResNet embedding extractor. These are pure
//! functions; no training happens here.

mod arch;
mod schedule;

pub use arch::{resnet_shapes, ArchSpec, ShapeReport, StageShape, StageSpec};
pub use schedule::{
    base_lr, base_margin, finetune_lr, finetune_margin, staircase_lr, PhaseSchedule, StaircaseSpec,
    AM_SOFTMAX_SCALE,
};
