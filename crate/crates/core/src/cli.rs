//! Command-line front end for the `voxfuse` binary.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on data errors.

use std::collections::HashMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::asnorm::{build_cohort, AsNorm, AsNormConfig, Cohort};
use crate::curation::{ddf_select, profiles_from_store, DdfConfig};
use crate::dataio::{
    atomic_write, fmt_f64, read_attributes, read_embeddings, read_schema, read_scores, read_speaker_map,
    read_trials, write_embeddings, write_scores, ChunkEmbeddings, FusionModelFile, ScoredTrial, Trial,
};
use crate::error::{Error, Result};
use crate::fusion::{FitOptions, FusionModel};
use crate::metrics::{evaluate, DcfParams};
use crate::qmf::{read_qmf_csv, trial_qmfs, write_qmf_csv, QmfTable};
use crate::scoring::pairwise_score;
use crate::synth::{write_synth_job, SynthJob};
use crate::trainspec::{base_lr, base_margin, finetune_lr, finetune_margin, staircase_lr, StaircaseSpec};

#[derive(Debug, Parser)]
#[command(name = "voxfuse", version, about = "Speaker-verification scoring, normalization, fusion and evaluation")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Mean chunk-pair cosine score for every trial.
    Score {
        #[arg(long)]
        embeddings: PathBuf,
        #[arg(long)]
        trials: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build an AS-Norm cohort (one mean embedding per speaker).
    Cohort {
        #[arg(long)]
        embeddings: PathBuf,
        #[arg(long)]
        speakers: PathBuf,
        #[arg(long, default_value_t = 20)]
        per_speaker: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Adaptive symmetric score normalization of a score file.
    Asnorm {
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        embeddings: PathBuf,
        #[arg(long)]
        cohort: PathBuf,
        #[arg(long, default_value_t = 100)]
        top_n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Quality measure features for every trial, as CSV.
    Qmf {
        #[arg(long)]
        embeddings: PathBuf,
        #[arg(long)]
        attributes: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        #[arg(long)]
        trials: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit an L1 logistic-regression fusion model on labeled trials.
    FuseFit {
        /// One score file per system; the file stem names the feature.
        #[arg(long = "scores", required = true, num_args = 1)]
        scores: Vec<PathBuf>,
        #[arg(long)]
        qmf: Option<PathBuf>,
        #[arg(long)]
        trials: PathBuf,
        #[arg(long, default_value_t = 0.01)]
        lambda: f64,
        #[arg(long, default_value_t = 100_000)]
        max_iters: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply a fusion model; trials follow the QMF file (or the first score file).
    FuseApply {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "scores", required = true, num_args = 1)]
        scores: Vec<PathBuf>,
        #[arg(long)]
        qmf: Option<PathBuf>,
        /// Write sigmoid probabilities instead of logits.
        #[arg(long)]
        probability: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// EER and minDCF of a score file against labeled trials.
    Eval {
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        trials: PathBuf,
        #[arg(long = "p-target", num_args = 1)]
        p_target: Vec<f64>,
    },
    /// Domain dataset filtering of source speakers against a target set.
    Ddf {
        #[arg(long)]
        source_emb: PathBuf,
        #[arg(long)]
        source_spk: PathBuf,
        #[arg(long)]
        target_emb: PathBuf,
        #[arg(long)]
        target_spk: PathBuf,
        #[arg(long, default_value_t = 50)]
        top_k: usize,
        #[arg(long, default_value_t = 0.8)]
        dedup: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print a learning-rate / margin schedule as CSV.
    Schedule {
        #[arg(long, value_enum)]
        name: ScheduleName,
        /// Staircase parameters `gamma,warmup,plateau,epochs_per`.
        #[arg(long)]
        spec: Option<String>,
        #[arg(long)]
        max_lr: Option<f64>,
        #[arg(long)]
        epochs: u32,
    },
    /// Write a synthetic corpus (embeddings, speakers, attributes, schema, trials).
    Synth {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScheduleName {
    Base,
    Finetune,
    Staircase,
}

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code. Errors go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match execute(cli.command, &mut out) {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Data(e)) => {
            eprintln!("error: {e}");
            EXIT_DATA
        }
    }
}

enum CliError {
    Usage(String),
    Data(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Data(e)
    }
}

fn usage<T>(msg: impl Into<String>) -> std::result::Result<T, CliError> {
    Err(CliError::Usage(msg.into()))
}

fn execute(cmd: Command, out: &mut dyn Write) -> std::result::Result<(), CliError> {
    match cmd {
        Command::Score {
            embeddings,
            trials,
            out: path,
        } => {
            let store = read_embeddings(&embeddings)?;
            let trials = read_trials(&trials, false)?;
            let index = index_store(&store);
            let scores = trials
                .iter()
                .map(|t| {
                    let (e, s) = (lookup(&index, &t.enroll_id)?, lookup(&index, &t.test_id)?);
                    Ok(pairwise_score(e, s)?.value)
                })
                .collect::<Result<Vec<_>>>()?;
            write_scores(&trials, &scores, &path)?;
        }
        Command::Cohort {
            embeddings,
            speakers,
            per_speaker,
            seed,
            out: path,
        } => {
            if per_speaker == 0 {
                return usage("--per-speaker must be positive");
            }
            let store = read_embeddings(&embeddings)?;
            let map = read_speaker_map(&speakers)?;
            let cfg = AsNormConfig {
                utterances_per_speaker: per_speaker,
                ..AsNormConfig::default()
            };
            let cohort = build_cohort(&store, &map, &cfg, seed)?;
            write_embeddings(&cohort.to_store()?, &path)?;
        }
        Command::Asnorm {
            scores,
            embeddings,
            cohort,
            top_n,
            out: path,
        } => {
            if top_n == 0 {
                return usage("--top-n must be positive");
            }
            let raw = read_scores(&scores)?;
            let store = read_embeddings(&embeddings)?;
            let cohort = Cohort::from_store(&read_embeddings(&cohort)?)?;
            let cfg = AsNormConfig {
                top_n,
                ..AsNormConfig::default()
            };
            let mut norm = AsNorm::new(&cohort, &cfg)?;
            let index = index_store(&store);
            let mut trials = Vec::with_capacity(raw.len());
            let mut values = Vec::with_capacity(raw.len());
            for r in &raw {
                let (e, t) = (lookup(&index, &r.enroll_id)?, lookup(&index, &r.test_id)?);
                values.push(norm.score(r.score, e, t)?);
                trials.push(Trial::new(r.enroll_id.clone(), r.test_id.clone(), None));
            }
            write_scores(&trials, &values, &path)?;
        }
        Command::Qmf {
            embeddings,
            attributes,
            schema,
            trials,
            out: path,
        } => {
            let store = read_embeddings(&embeddings)?;
            let schema = read_schema(&schema)?;
            let table = read_attributes(&attributes, &schema)?;
            let trials = read_trials(&trials, false)?;
            let qmfs = trial_qmfs(&trials, &store, Some(&table), &schema)?;
            write_qmf_csv(&trials, &qmfs, &path)?;
        }
        Command::FuseFit {
            scores,
            qmf,
            trials,
            lambda,
            max_iters,
            tol,
            out: path,
        } => {
            if !(lambda >= 0.0) {
                return usage("--lambda must be nonnegative");
            }
            let trials = read_trials(&trials, true)?;
            let keys: Vec<(String, String)> =
                trials.iter().map(|t| (t.enroll_id.clone(), t.test_id.clone())).collect();
            let (names, score_rows) = score_matrix(&scores, &keys)?;
            let (qmf_names, qmf_rows) = qmf_matrix(qmf.as_deref(), &keys)?;
            let labels: Vec<bool> = trials.iter().map(|t| t.label.unwrap_or(false)).collect();
            let mut feature_names = names;
            feature_names.extend(qmf_names);
            check_unique(&feature_names)?;
            let model = FusionModel::fit(
                feature_names,
                &score_rows,
                &qmf_rows,
                &labels,
                lambda,
                &FitOptions { max_iters, tol },
            )?;
            model.to_file().write(&path)?;
        }
        Command::FuseApply {
            model,
            scores,
            qmf,
            probability,
            out: path,
        } => {
            let model = FusionModel::from_file(FusionModelFile::read(&model)?)?;
            let (keys, qmf_table) = match qmf.as_deref() {
                Some(p) => {
                    let t = read_qmf_csv(p)?;
                    (t.trials.clone(), Some(t))
                }
                None => {
                    let first = read_scores(&scores[0])?;
                    (first.into_iter().map(|s| (s.enroll_id, s.test_id)).collect(), None)
                }
            };
            let (mut names, score_rows) = score_matrix(&scores, &keys)?;
            let qmf_rows = match &qmf_table {
                Some(t) => {
                    names.extend(t.names.iter().cloned());
                    t.rows.clone()
                }
                None => vec![Vec::new(); keys.len()],
            };
            model.check_features(&names)?;
            let values = score_rows
                .iter()
                .zip(&qmf_rows)
                .map(|(s, q)| {
                    if probability {
                        model.probability(s, q)
                    } else {
                        model.logit(s, q)
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            let trials: Vec<Trial> = keys.into_iter().map(|(e, t)| Trial::new(e, t, None)).collect();
            write_scores(&trials, &values, &path)?;
        }
        Command::Eval {
            scores,
            trials,
            p_target,
        } => {
            let p_target = if p_target.is_empty() { vec![0.05, 0.01] } else { p_target };
            let params = p_target
                .iter()
                .map(|&p| DcfParams::with_prior(p))
                .collect::<Result<Vec<_>>>()
                .or_else(|e| usage(e.to_string()))?;
            let trials = read_trials(&trials, true)?;
            let keys: Vec<(String, String)> =
                trials.iter().map(|t| (t.enroll_id.clone(), t.test_id.clone())).collect();
            let values = scores_for(&read_scores(&scores)?, &keys, &scores)?;
            let labels: Vec<bool> = trials.iter().map(|t| t.label.unwrap_or(false)).collect();
            let report = evaluate(&values, &labels, &params)?;
            writeln!(out, "{report}").map_err(|e| Error::io("<stdout>", e))?;
        }
        Command::Ddf {
            source_emb,
            source_spk,
            target_emb,
            target_spk,
            top_k,
            dedup,
            out: path,
        } => {
            let cfg = DdfConfig {
                top_k,
                dedup_threshold: dedup,
            };
            cfg.validate().or_else(|e| usage(e.to_string()))?;
            let source = profiles_from_store(&read_embeddings(&source_emb)?, &read_speaker_map(&source_spk)?)?;
            let target = profiles_from_store(&read_embeddings(&target_emb)?, &read_speaker_map(&target_spk)?)?;
            let selected = ddf_select(&source, &target, &cfg)?;
            atomic_write(&path, |w| {
                writeln!(w, "speaker_id,max_similarity,nearest_target")?;
                for s in &selected {
                    writeln!(w, "{},{},{}", s.speaker_id, fmt_f64(s.max_similarity), s.nearest_target)?;
                }
                Ok(())
            })?;
        }
        Command::Schedule {
            name,
            spec,
            max_lr,
            epochs,
        } => {
            let table = schedule_table(name, spec.as_deref(), max_lr, epochs)?;
            out.write_all(table.as_bytes()).map_err(|e| Error::io("<stdout>", e))?;
        }
        Command::Synth { config, out: dir } => {
            let text = std::fs::read_to_string(&config).map_err(|e| Error::Io {
                path: config.clone(),
                source: e,
            })?;
            let job: SynthJob = serde_json::from_str(&text).map_err(|e| Error::Parse {
                path: config.clone(),
                line: e.line(),
                msg: e.to_string(),
            })?;
            write_synth_job(&job, &dir)?;
        }
    }
    Ok(())
}

fn schedule_table(
    name: ScheduleName,
    spec: Option<&str>,
    max_lr: Option<f64>,
    epochs: u32,
) -> std::result::Result<String, CliError> {
    let mut s = String::new();
    match name {
        ScheduleName::Base | ScheduleName::Finetune => {
            if spec.is_some() || max_lr.is_some() {
                return usage("--spec and --max-lr apply to the staircase schedule only");
            }
            s.push_str("epoch,lr,margin\n");
            let (lr, margin): (fn(f64) -> Result<f64>, fn(f64) -> Result<f64>) = match name {
                ScheduleName::Base => (base_lr, base_margin),
                _ => (finetune_lr, finetune_margin),
            };
            for e in 0..epochs {
                let e = f64::from(e);
                let (l, m) = (lr(e).or_else(|x| usage(x.to_string()))?, margin(e)?);
                s.push_str(&format!("{e},{},{}\n", fmt_f64(l), fmt_f64(m)));
            }
        }
        ScheduleName::Staircase => {
            let Some(spec) = spec else {
                return usage("--spec gamma,warmup,plateau,epochs_per is required for the staircase schedule");
            };
            let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
            let [g, w, p, e] = parts.as_slice() else {
                return usage(format!("--spec expects 4 comma-separated values, got {spec:?}"));
            };
            let parsed = (g.parse::<f64>(), w.parse::<u32>(), p.parse::<u32>(), e.parse::<u32>());
            let (Ok(g), Ok(w), Ok(p), Ok(e)) = parsed else {
                return usage(format!("cannot parse --spec {spec:?}"));
            };
            let st = StaircaseSpec::new(g, w, p, e, max_lr.unwrap_or(1.0)).or_else(|x| usage(x.to_string()))?;
            s.push_str("epoch,lr\n");
            for epoch in 0..epochs {
                s.push_str(&format!("{epoch},{}\n", fmt_f64(staircase_lr(&st, epoch))));
            }
        }
    }
    Ok(s)
}

fn index_store(store: &[ChunkEmbeddings]) -> HashMap<&str, &ChunkEmbeddings> {
    store.iter().map(|e| (e.utt_id(), e)).collect()
}

fn lookup<'a>(index: &HashMap<&str, &'a ChunkEmbeddings>, id: &str) -> Result<&'a ChunkEmbeddings> {
    index.get(id).copied().ok_or_else(|| Error::UnknownUtterance(id.to_string()))
}

/// Scores for `keys` looked up by trial pair.
fn scores_for(scored: &[ScoredTrial], keys: &[(String, String)], source: &Path) -> Result<Vec<f64>> {
    let map: HashMap<(&str, &str), f64> = scored
        .iter()
        .map(|s| ((s.enroll_id.as_str(), s.test_id.as_str()), s.score))
        .collect();
    keys.iter()
        .map(|(e, t)| {
            map.get(&(e.as_str(), t.as_str())).copied().ok_or_else(|| {
                Error::invalid(format!("{}: no score for trial {e} {t}", source.display()))
            })
        })
        .collect()
}

fn feature_name(path: &Path) -> Result<String> {
    path.file_stem()
        .and_then(|s| s.to_str())
        .map(str::to_string)
        .ok_or_else(|| Error::invalid(format!("cannot derive a feature name from {}", path.display())))
}

/// Per-trial score rows (one column per system) and the system names.
fn score_matrix(paths: &[PathBuf], keys: &[(String, String)]) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut names = Vec::with_capacity(paths.len());
    let mut rows = vec![Vec::with_capacity(paths.len()); keys.len()];
    for p in paths {
        names.push(feature_name(p)?);
        let values = scores_for(&read_scores(p)?, keys, p)?;
        for (row, v) in rows.iter_mut().zip(values) {
            row.push(v);
        }
    }
    Ok((names, rows))
}

fn qmf_matrix(path: Option<&Path>, keys: &[(String, String)]) -> Result<(Vec<String>, Vec<Vec<Option<f64>>>)> {
    let Some(path) = path else {
        return Ok((Vec::new(), vec![Vec::new(); keys.len()]));
    };
    let QmfTable { names, trials, rows } = read_qmf_csv(path)?;
    let map: HashMap<&(String, String), &Vec<Option<f64>>> = trials.iter().zip(&rows).collect();
    let aligned = keys
        .iter()
        .map(|k| {
            map.get(k)
                .map(|r| (*r).clone())
                .ok_or_else(|| Error::invalid(format!("{}: no QMF row for trial {} {}", path.display(), k.0, k.1)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((names, aligned))
}

fn check_unique(names: &[String]) -> Result<()> {
    for (i, n) in names.iter().enumerate() {
        if names[..i].contains(n) {
            return Err(Error::invalid(format!("duplicate feature name {n:?}")));
        }
    }
    Ok(())
}
