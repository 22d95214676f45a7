//! Speaker-verification back-end.
//!
//! Starting from per-chunk utterance embeddings and per-utterance attribute
//! tables, this crate covers the stages after the embedding network:
//!
//! * [`scoring`]: mean cosine over all enrollment x test chunk pairs
//! * [`asnorm`]: cohort building and adaptive symmetric score normalization
//! * [`qmf`]: quality measure features and min-max normalization
//! * [`fusion`]: L1-penalized logistic-regression fusion of scores and QMFs
//! * [`metrics`]: DET curve, EER and normalized minDCF
//! * [`curation`]: domain dataset filtering by median speaker embeddings
//! * [`trainspec`]: learning-rate / margin schedules and ResNet-100 shapes
//! * [`synth`]: seeded synthetic corpora for tests and examples
//!
//! [`dataio`] defines the text file formats; [`cli`] wires everything into
//! the `voxfuse` binary. The `examples/` directory has one runnable program
//! per stage.

// `!(x >= lo)` style checks are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asnorm;
pub mod cli;
pub mod curation;
pub mod dataio;
pub mod error;
pub mod fusion;
pub mod metrics;
pub mod numeric;
pub mod qmf;
pub mod rng;
pub mod scoring;
pub mod synth;
pub mod trainspec;

pub use dataio::{ChunkEmbeddings, Trial};
pub use error::{Error, Result};
