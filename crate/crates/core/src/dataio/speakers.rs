use std::collections::BTreeMap;
use std::path::Path;

use super::{atomic_write, read_to_string};
use crate::error::{Error, Result};

/// `utt_id -> speaker_id`, ordered by utterance id.
pub type SpeakerMap = BTreeMap<String, String>;

/// Reads `utt_id speaker_id` lines.
pub fn read_speaker_map(path: impl AsRef<Path>) -> Result<SpeakerMap> {
    let path = path.as_ref();
    let text = read_to_string(path)?;
    let mut map = SpeakerMap::new();
    for (idx, line) in text.lines().enumerate() {
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields.as_slice() {
            [] => continue,
            [utt, spk] => {
                if map.insert(utt.to_string(), spk.to_string()).is_some() {
                    return Err(Error::parse(path, idx + 1, format!("duplicate utterance id {utt:?}")));
                }
            }
            _ => {
                return Err(Error::parse(
                    path,
                    idx + 1,
                    format!("expected `utt_id speaker_id`, found {} fields", fields.len()),
                ))
            }
        }
    }
    Ok(map)
}

pub fn write_speaker_map(map: &SpeakerMap, path: impl AsRef<Path>) -> Result<()> {
    atomic_write(path.as_ref(), |w| {
        for (utt, spk) in map {
            writeln!(w, "{utt} {spk}")?;
        }
        Ok(())
    })
}
