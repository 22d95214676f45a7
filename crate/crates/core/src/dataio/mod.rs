//! On-disk formats.
//!
//! All formats are line-oriented text so fixtures diff cleanly. Floats are
//! written with the shortest decimal that parses back to the same bits, and
//! every writer goes through [`atomic_write`]: output lands in a temporary
//! file next to the target and is renamed into place only once complete.

mod attributes;
mod embeddings;
mod model;
mod scores;
mod speakers;
mod trials;

pub use attributes::{
    read_attributes, read_schema, write_attributes, write_schema, AttrKind, AttrValue,
    AttributeTable, Column, SchemaEntry, Transform,
};
pub use embeddings::{read_embeddings, write_embeddings, ChunkEmbeddings};
pub use model::{FusionModelFile, MinMaxParams};
pub use scores::{align_scores, read_scores, write_scores, ScoredTrial};
pub use speakers::{read_speaker_map, write_speaker_map, SpeakerMap};
pub use trials::{read_trials, write_trials, Trial};

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Shortest round-trip decimal rendering of a finite float.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

pub(crate) fn parse_f64(token: &str) -> Option<f64> {
    token.parse::<f64>().ok().filter(|v| v.is_finite())
}

pub(crate) fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn valid_id(id: &str) -> bool {
    !id.is_empty() && !id.chars().any(char::is_whitespace)
}

/// Writes `path` through a temporary sibling and renames it into place.
pub fn atomic_write<F>(path: &Path, body: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> std::io::Result<()>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
    {
        let file: &File = tmp.as_file();
        let mut w = BufWriter::new(file);
        body(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}
