use std::path::Path;

use super::{atomic_write, fmt_f64, parse_f64, read_to_string, Trial};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredTrial {
    pub enroll_id: String,
    pub test_id: String,
    pub score: f64,
}

/// Writes `enroll test score` lines, one per trial, in trial order.
pub fn write_scores(trials: &[Trial], scores: &[f64], path: impl AsRef<Path>) -> Result<()> {
    if trials.len() != scores.len() {
        return Err(Error::invalid(format!(
            "{} trials but {} scores",
            trials.len(),
            scores.len()
        )));
    }
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(Error::invalid(format!(
            "non-finite score for trial {} ({} {})",
            i + 1,
            trials[i].enroll_id,
            trials[i].test_id
        )));
    }
    atomic_write(path.as_ref(), |w| {
        for (t, s) in trials.iter().zip(scores) {
            writeln!(w, "{} {} {}", t.enroll_id, t.test_id, fmt_f64(*s))?;
        }
        Ok(())
    })
}

pub fn read_scores(path: impl AsRef<Path>) -> Result<Vec<ScoredTrial>> {
    let path = path.as_ref();
    let text = read_to_string(path)?;
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields.as_slice() {
            [] => continue,
            [enroll, test, score] => {
                let score = parse_f64(score).ok_or_else(|| {
                    Error::parse(path, idx + 1, format!("invalid score {score:?}"))
                })?;
                out.push(ScoredTrial {
                    enroll_id: enroll.to_string(),
                    test_id: test.to_string(),
                    score,
                });
            }
            _ => {
                return Err(Error::parse(
                    path,
                    idx + 1,
                    format!("expected `enroll test score`, found {} fields", fields.len()),
                ))
            }
        }
    }
    Ok(out)
}

/// Checks that `scores` lists exactly the pairs of `trials`, in order, and
/// returns the bare score values.
pub fn align_scores(trials: &[Trial], scores: &[ScoredTrial], source: &Path) -> Result<Vec<f64>> {
    if trials.len() != scores.len() {
        return Err(Error::invalid(format!(
            "{}: {} scores for {} trials",
            source.display(),
            scores.len(),
            trials.len()
        )));
    }
    trials
        .iter()
        .zip(scores)
        .enumerate()
        .map(|(i, (t, s))| {
            if t.enroll_id == s.enroll_id && t.test_id == s.test_id {
                Ok(s.score)
            } else {
                Err(Error::parse(
                    source,
                    i + 1,
                    format!(
                        "trial mismatch: expected {} {}, found {} {}",
                        t.enroll_id, t.test_id, s.enroll_id, s.test_id
                    ),
                ))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_renders_canonically() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.txt");
        write_scores(&[Trial::new("a", "b", None)], &[0.5], &p).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "a b 0.5\n");
    }

    #[test]
    fn nan_and_count_mismatch_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.txt");
        let t = [Trial::new("a", "b", None)];
        assert!(write_scores(&t, &[f64::NAN], &p).is_err());
        assert!(write_scores(&t, &[0.1, 0.2], &p).is_err());
        assert!(!p.exists());
    }

    #[test]
    fn malformed_score_line_located() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.txt");
        std::fs::write(&p, "a b 0.1\na b\n").unwrap();
        assert!(matches!(read_scores(&p), Err(Error::Parse { line: 2, .. })));
        std::fs::write(&p, "a b nan\n").unwrap();
        assert!(matches!(read_scores(&p), Err(Error::Parse { line: 1, .. })));
    }
}
