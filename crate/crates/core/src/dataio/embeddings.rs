use std::collections::HashSet;
use std::path::Path;

use super::{atomic_write, fmt_f64, parse_f64, read_to_string, valid_id};
use crate::error::{Error, Result};

/// Per-chunk embeddings of one utterance, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ChunkEmbeddings {
    utt_id: String,
    dim: usize,
    data: Vec<f64>,
}

impl ChunkEmbeddings {
    pub fn new(utt_id: impl Into<String>, dim: usize, data: Vec<f64>) -> Result<Self> {
        let utt_id = utt_id.into();
        if !valid_id(&utt_id) {
            return Err(Error::invalid(format!("invalid utterance id {utt_id:?}")));
        }
        if dim == 0 {
            return Err(Error::invalid("embedding dim must be positive"));
        }
        if data.is_empty() || data.len() % dim != 0 {
            return Err(Error::invalid(format!(
                "{utt_id}: {} values do not form whole chunks of dim {dim}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("{utt_id}: non-finite value")));
        }
        Ok(Self { utt_id, dim, data })
    }

    pub fn from_chunks(utt_id: impl Into<String>, chunks: &[Vec<f64>]) -> Result<Self> {
        let dim = chunks.first().map_or(0, Vec::len);
        if let Some(bad) = chunks.iter().find(|c| c.len() != dim) {
            return Err(Error::DimMismatch {
                expected: dim,
                found: bad.len(),
            });
        }
        Self::new(utt_id, dim, chunks.concat())
    }

    pub fn utt_id(&self) -> &str {
        &self.utt_id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_chunks(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn chunk(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn chunks(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }
}

/// Reads an embedding store: a `dim=<D>` header, then one utterance per line
/// as `utt_id n_chunks v1 ... v(n_chunks*D)`.
pub fn read_embeddings(path: impl AsRef<Path>) -> Result<Vec<ChunkEmbeddings>> {
    let path = path.as_ref();
    let text = read_to_string(path)?;
    parse_embeddings(path, &text)
}

fn parse_embeddings(path: &Path, text: &str) -> Result<Vec<ChunkEmbeddings>> {
    let mut lines = text.lines().enumerate();
    let dim = match lines.next() {
        Some((_, header)) => header
            .trim()
            .strip_prefix("dim=")
            .and_then(|d| d.parse::<usize>().ok())
            .filter(|&d| d > 0)
            .ok_or_else(|| Error::parse(path, 1, format!("expected header `dim=<D>`, got {header:?}")))?,
        None => return Err(Error::parse(path, 1, "empty file")),
    };

    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let mut tokens = line.split_whitespace();
        let Some(utt_id) = tokens.next() else {
            continue;
        };
        let n_chunks = tokens
            .next()
            .and_then(|t| t.parse::<usize>().ok())
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::parse(path, lineno, "missing or invalid chunk count"))?;
        let mut data = Vec::with_capacity(n_chunks * dim);
        for tok in tokens {
            let v = parse_f64(tok)
                .ok_or_else(|| Error::parse(path, lineno, format!("invalid value {tok:?}")))?;
            data.push(v);
        }
        if data.len() != n_chunks * dim {
            return Err(Error::parse(
                path,
                lineno,
                format!(
                    "expected {} values ({n_chunks} chunks of dim {dim}), found {}",
                    n_chunks * dim,
                    data.len()
                ),
            ));
        }
        if !seen.insert(utt_id.to_string()) {
            return Err(Error::parse(path, lineno, format!("duplicate utterance id {utt_id:?}")));
        }
        out.push(ChunkEmbeddings {
            utt_id: utt_id.to_string(),
            dim,
            data,
        });
    }
    Ok(out)
}

pub fn write_embeddings(records: &[ChunkEmbeddings], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let Some(first) = records.first() else {
        return Err(Error::invalid("no records"));
    };
    let dim = first.dim;
    let mut seen = HashSet::new();
    for r in records {
        if r.dim != dim {
            return Err(Error::DimMismatch {
                expected: dim,
                found: r.dim,
            });
        }
        if !seen.insert(r.utt_id.as_str()) {
            return Err(Error::invalid(format!("duplicate utterance id {:?}", r.utt_id)));
        }
    }
    atomic_write(path, |w| {
        writeln!(w, "dim={dim}")?;
        for r in records {
            write!(w, "{} {}", r.utt_id, r.n_chunks())?;
            for v in &r.data {
                write!(w, " {}", fmt_f64(*v))?;
            }
            writeln!(w)?;
        }
        Ok(())
    })
}
