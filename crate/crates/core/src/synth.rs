//! Seeded synthetic speakers, chunk embeddings, attributes and trials.
//!
//! Everything is a pure function of the configuration. Streams come from
//! [`Rng::derive`] with fixed paths so a value does not depend on how many
//! other values were drawn before it:
//!
//! | path                       | use                                         |
//! |----------------------------|---------------------------------------------|
//! | `[0]`                      | global centre, then speaker means in order   |
//! | `[1, spk, utt]`            | utterance quality `q` in `[0, 1)`            |
//! | `[2, system, spk, utt]`    | utterance offset, then chunk noise           |
//! | `[3, spk]`                 | speaker attributes (gender, language, age)   |
//! | `[4, spk, utt]`            | utterance attributes                         |
//!
//! Speaker means are `normalize(c + between_spread * g)` around a random
//! unit centre `c`. A chunk is
//! `normalize(mean + within_spread * (0.5 + q) * (o + z) / sqrt(2))` where
//! `o` is shared by all chunks of an utterance and `z` is per chunk, both
//! standard Gaussian vectors. Embedding systems that share a seed share
//! speakers and utterance qualities but draw independent noise.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataio::{
    write_attributes, write_embeddings, write_schema, write_speaker_map, write_trials, AttrKind, AttrValue,
    AttributeTable, ChunkEmbeddings, Column, SchemaEntry, SpeakerMap, Transform, Trial,
};
use crate::error::{Error, Result};
use crate::numeric::l2_norm;
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthConfig {
    pub n_speakers: usize,
    pub utts_per_speaker: usize,
    pub chunks_per_utt: usize,
    pub dim: usize,
    pub within_spread: f64,
    pub between_spread: f64,
    pub seed: u64,
    #[serde(default)]
    pub attribute_noise: f64,
    /// Embedding system index; selects the chunk-noise stream.
    #[serde(default)]
    pub system: u64,
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_speakers == 0 || self.utts_per_speaker == 0 || self.chunks_per_utt == 0 {
            return Err(Error::invalid("speaker, utterance and chunk counts must be positive"));
        }
        if self.n_speakers > 99_999 || self.utts_per_speaker > 9_999 {
            return Err(Error::invalid("at most 99999 speakers and 9999 utterances per speaker"));
        }
        if self.dim < 2 {
            return Err(Error::invalid("dim must be at least 2"));
        }
        if !(self.within_spread > 0.0 && self.between_spread > 0.0) {
            return Err(Error::invalid("spreads must be positive"));
        }
        if !(self.attribute_noise >= 0.0) {
            return Err(Error::invalid("attribute_noise must be nonnegative"));
        }
        Ok(())
    }
}

pub fn speaker_id(spk: usize) -> String {
    format!("spk{spk:05}")
}

pub fn utt_id(spk: usize, utt: usize) -> String {
    format!("spk{spk:05}/utt{utt:04}")
}

fn normalize(v: &mut [f64]) {
    let n = l2_norm(v);
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}

fn quality(seed: u64, spk: usize, utt: usize) -> f64 {
    Rng::derive(seed, &[1, spk as u64, utt as u64]).next_f64()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthDataset {
    pub store: Vec<ChunkEmbeddings>,
    pub speakers: SpeakerMap,
}

pub fn gen_dataset(cfg: &SynthConfig) -> Result<SynthDataset> {
    cfg.validate()?;
    let mut rng = Rng::derive(cfg.seed, &[0]);
    let mut centre: Vec<f64> = (0..cfg.dim).map(|_| rng.normal()).collect();
    normalize(&mut centre);
    let means: Vec<Vec<f64>> = (0..cfg.n_speakers)
        .map(|_| {
            let mut m: Vec<f64> = centre.iter().map(|c| c + cfg.between_spread * rng.normal()).collect();
            normalize(&mut m);
            m
        })
        .collect();

    let mut store = Vec::with_capacity(cfg.n_speakers * cfg.utts_per_speaker);
    let mut speakers = SpeakerMap::new();
    for (spk, mean) in means.iter().enumerate() {
        for utt in 0..cfg.utts_per_speaker {
            let scale = cfg.within_spread * (0.5 + quality(cfg.seed, spk, utt)) / std::f64::consts::SQRT_2;
            let mut noise = Rng::derive(cfg.seed, &[2, cfg.system, spk as u64, utt as u64]);
            let offset: Vec<f64> = (0..cfg.dim).map(|_| noise.normal()).collect();
            let mut data = Vec::with_capacity(cfg.chunks_per_utt * cfg.dim);
            for _ in 0..cfg.chunks_per_utt {
                let mut chunk: Vec<f64> = mean
                    .iter()
                    .zip(&offset)
                    .map(|(m, o)| m + scale * (o + noise.normal()))
                    .collect();
                normalize(&mut chunk);
                data.extend(chunk);
            }
            let id = utt_id(spk, utt);
            speakers.insert(id.clone(), speaker_id(spk));
            store.push(ChunkEmbeddings::new(id, cfg.dim, data)?);
        }
    }
    Ok(SynthDataset { store, speakers })
}

/// Samples distinct labeled pairs: `n_pos` same-speaker, `n_neg`
/// cross-speaker, shuffled together.
pub fn gen_trials(
    store: &[ChunkEmbeddings],
    speakers: &SpeakerMap,
    n_pos: usize,
    n_neg: usize,
    seed: u64,
) -> Result<Vec<Trial>> {
    let mut utts: Vec<(&str, &str)> = store
        .iter()
        .map(|e| {
            speakers
                .get(e.utt_id())
                .map(|s| (e.utt_id(), s.as_str()))
                .ok_or_else(|| Error::UnknownUtterance(e.utt_id().to_string()))
        })
        .collect::<Result<_>>()?;
    utts.sort_unstable();

    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for i in 0..utts.len() {
        for j in i + 1..utts.len() {
            if utts[i].1 == utts[j].1 {
                pos.push((i, j));
            } else {
                neg.push((i, j));
            }
        }
    }
    if n_pos > pos.len() || n_neg > neg.len() {
        return Err(Error::invalid(format!(
            "requested {n_pos} target / {n_neg} non-target pairs but only {} / {} exist",
            pos.len(),
            neg.len()
        )));
    }

    let mut rng = Rng::new(seed);
    let mut pick = |pairs: &mut Vec<(usize, usize)>, k: usize| {
        for i in 0..k {
            let j = i + rng.below((pairs.len() - i) as u64) as usize;
            pairs.swap(i, j);
        }
        pairs.truncate(k);
    };
    pick(&mut pos, n_pos);
    pick(&mut neg, n_neg);

    let mut trials: Vec<Trial> = pos
        .iter()
        .map(|&p| (p, true))
        .chain(neg.iter().map(|&p| (p, false)))
        .map(|((i, j), label)| Trial::new(utts[i].0, utts[j].0, Some(label)))
        .collect();
    rng.shuffle(&mut trials);
    Ok(trials)
}

/// Attribute schema matching [`gen_attributes`].
pub fn attribute_schema() -> Vec<SchemaEntry> {
    use AttrKind::{Categorical, Real};
    use Transform::{Identity, Log1p, Match};
    [
        ("gender", Categorical, Match),
        ("language", Categorical, Match),
        ("age", Real, Identity),
        ("snr_db", Real, Identity),
        ("mos", Real, Identity),
        ("bnd", Real, Identity),
        ("liveness", Real, Identity),
        ("speech_length", Real, Log1p),
        ("file_length", Real, Log1p),
    ]
    .into_iter()
    .map(|(name, kind, transform)| SchemaEntry::new(name, kind, transform).expect("static schema"))
    .collect()
}

const LANGUAGES: [&str; 5] = ["en", "de", "fr", "es", "ru"];

/// Per-utterance attributes for a synthetic store.
///
/// Speakers and utterances are indexed by rank in sorted id order. SNR and
/// MOS fall with the utterance quality draw that also scales embedding
/// noise, so they carry real information about trial difficulty.
pub fn gen_attributes(store: &[ChunkEmbeddings], speakers: &SpeakerMap, cfg: &SynthConfig) -> Result<AttributeTable> {
    let mut per_speaker: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for e in store {
        let spk = speakers
            .get(e.utt_id())
            .ok_or_else(|| Error::UnknownUtterance(e.utt_id().to_string()))?;
        per_speaker.entry(spk.as_str()).or_default().push(e.utt_id());
    }

    let schema = attribute_schema();
    let columns: Vec<Column> = schema
        .iter()
        .map(|e| Column {
            name: e.name.clone(),
            kind: e.kind,
        })
        .collect();
    let mut table = AttributeTable::new(columns);
    let noise = cfg.attribute_noise;

    for (spk, (_, utts)) in per_speaker.iter_mut().enumerate() {
        utts.sort_unstable();
        let mut srng = Rng::derive(cfg.seed, &[3, spk as u64]);
        let gender = if srng.next_f64() < 0.5 { "m" } else { "f" };
        let language = LANGUAGES[srng.below(LANGUAGES.len() as u64) as usize];
        let age = srng.uniform(18.0, 70.0);

        for (utt, id) in utts.iter().enumerate() {
            let q = quality(cfg.seed, spk, utt);
            let mut r = Rng::derive(cfg.seed, &[4, spk as u64, utt as u64]);
            let speech_length = r.uniform(4.0, 20.0);
            let file_length = speech_length + r.uniform(0.5, 5.0);
            let liveness_base = 1.0 - 0.2 * r.next_f64();
            let mut jitter = |unit: f64| if noise > 0.0 { noise * unit * r.normal() } else { 0.0 };
            let values = vec![
                AttrValue::Categorical(gender.to_string()),
                AttrValue::Categorical(language.to_string()),
                AttrValue::Real(age + jitter(1.0)),
                AttrValue::Real(30.0 * (1.0 - q) + jitter(1.0)),
                AttrValue::Real((5.0 - 4.0 * q + jitter(0.1)).clamp(1.0, 5.0)),
                AttrValue::Real((0.9 * q + jitter(0.02)).clamp(0.0, 1.0)),
                AttrValue::Real((liveness_base + jitter(0.02)).clamp(0.0, 1.0)),
                AttrValue::Real(speech_length),
                AttrValue::Real(file_length),
            ];
            table.insert(*id, values)?;
        }
    }
    Ok(table)
}

/// A full synthetic corpus on disk: dataset parameters plus trial sampling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthJob {
    #[serde(flatten)]
    pub dataset: SynthConfig,
    #[serde(default = "default_trials")]
    pub n_pos: usize,
    #[serde(default = "default_trials")]
    pub n_neg: usize,
    #[serde(default)]
    pub trial_seed: u64,
}

fn default_trials() -> usize {
    500
}

/// File names written by [`write_synth_job`].
pub mod files {
    pub const EMBEDDINGS: &str = "embeddings.txt";
    pub const SPEAKERS: &str = "speakers.txt";
    pub const ATTRIBUTES: &str = "attributes.csv";
    pub const SCHEMA: &str = "schema.txt";
    pub const TRIALS: &str = "trials.txt";
}

pub fn write_synth_job(job: &SynthJob, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    let data = gen_dataset(&job.dataset)?;
    let trials = gen_trials(&data.store, &data.speakers, job.n_pos, job.n_neg, job.trial_seed)?;
    let attrs = gen_attributes(&data.store, &data.speakers, &job.dataset)?;
    write_embeddings(&data.store, dir.join(files::EMBEDDINGS))?;
    write_speaker_map(&data.speakers, dir.join(files::SPEAKERS))?;
    write_attributes(&attrs, dir.join(files::ATTRIBUTES))?;
    write_schema(&attribute_schema(), dir.join(files::SCHEMA))?;
    write_trials(&trials, dir.join(files::TRIALS))?;
    Ok(())
}
