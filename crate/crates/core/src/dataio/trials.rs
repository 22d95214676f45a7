use std::path::Path;

use super::{atomic_write, read_to_string, valid_id};
use crate::error::{Error, Result};

/// An (enrollment, test) utterance pair.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Trial {
    pub enroll_id: String,
    pub test_id: String,
    /// `Some(true)` for same-speaker pairs; `None` on unlabeled lists.
    pub label: Option<bool>,
}

impl Trial {
    pub fn new(enroll_id: impl Into<String>, test_id: impl Into<String>, label: Option<bool>) -> Self {
        Self {
            enroll_id: enroll_id.into(),
            test_id: test_id.into(),
            label,
        }
    }
}

/// Reads a VoxCeleb-style trial list (`label enroll test` or `enroll test`).
///
/// With `expect_labels` every line must carry a 0/1 label. Without it,
/// two-field lines are accepted and labels on three-field lines are still
/// parsed and kept. Blank lines are skipped.
pub fn read_trials(path: impl AsRef<Path>, expect_labels: bool) -> Result<Vec<Trial>> {
    let path = path.as_ref();
    let text = read_to_string(path)?;
    parse_trials(path, &text, expect_labels)
}

fn parse_trials(path: &Path, text: &str, expect_labels: bool) -> Result<Vec<Trial>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        let trial = match fields.as_slice() {
            [] => continue,
            [enroll, test] => {
                if expect_labels {
                    return Err(Error::parse(path, lineno, "missing label"));
                }
                Trial::new(*enroll, *test, None)
            }
            [label, enroll, test] => {
                let label = match *label {
                    "1" => true,
                    "0" => false,
                    other => {
                        return Err(Error::parse(
                            path,
                            lineno,
                            format!("label must be 0 or 1, got {other:?}"),
                        ))
                    }
                };
                Trial::new(*enroll, *test, Some(label))
            }
            _ => {
                return Err(Error::parse(
                    path,
                    lineno,
                    format!("expected 2 or 3 fields, found {}", fields.len()),
                ))
            }
        };
        out.push(trial);
    }
    Ok(out)
}

/// Writes trials; labeled trials get a leading `0`/`1`.
pub fn write_trials(trials: &[Trial], path: impl AsRef<Path>) -> Result<()> {
    for t in trials {
        if !valid_id(&t.enroll_id) || !valid_id(&t.test_id) {
            return Err(Error::invalid(format!(
                "invalid trial ids {:?} {:?}",
                t.enroll_id, t.test_id
            )));
        }
    }
    atomic_write(path.as_ref(), |w| {
        for t in trials {
            match t.label {
                Some(l) => writeln!(w, "{} {} {}", u8::from(l), t.enroll_id, t.test_id)?,
                None => writeln!(w, "{} {}", t.enroll_id, t.test_id)?,
            }
        }
        Ok(())
    })
}
