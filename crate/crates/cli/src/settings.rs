//! Flag, environment and config-file resolution.
//!
//! Precedence, highest first: command-line flag, `EBM_*` environment
//! variable, `--config` TOML file, built-in default.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Deserialize;

use gamma_rbm::dsp::DEFAULT_SILENCE_DB;
use gamma_rbm::models::ModelKind;
use gamma_rbm::training::TrainConfig;

#[derive(Debug, Args)]
pub struct Flags {
    /// Model family: gamma, gauss or bern.
    #[arg(long, global = true, env = "EBM_MODEL")]
    model: Option<ModelKind>,
    /// Hidden units; repeat (or comma-separate) for a sweep.
    #[arg(long, global = true, env = "EBM_HIDDEN", value_delimiter = ',')]
    hidden: Vec<usize>,
    #[arg(long, global = true, env = "EBM_LR")]
    lr: Option<f64>,
    #[arg(long, global = true, env = "EBM_BATCH")]
    batch: Option<usize>,
    #[arg(long, global = true, env = "EBM_EPOCHS")]
    epochs: Option<usize>,
    #[arg(long, global = true, env = "EBM_CD_K")]
    cd_k: Option<usize>,
    /// Shape shift ε of the gamma model.
    #[arg(long, global = true, env = "EBM_EPS")]
    eps: Option<f64>,
    #[arg(long, global = true, env = "EBM_ADAM_EPS")]
    adam_eps: Option<f64>,
    #[arg(long, global = true, env = "EBM_WIN")]
    win: Option<usize>,
    #[arg(long, global = true, env = "EBM_HOP")]
    hop: Option<usize>,
    /// Frames this far below the loudest frame (dB) are dropped.
    #[arg(long, global = true, env = "EBM_SILENCE_DB", allow_hyphen_values = true)]
    silence_db: Option<f64>,
    #[arg(long, global = true, env = "EBM_SEED")]
    seed: Option<u64>,
    /// TOML file with any of the settings above (snake_case keys).
    #[arg(long, global = true, env = "EBM_CONFIG")]
    config: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    model: Option<String>,
    hidden: Option<OneOrMany>,
    lr: Option<f64>,
    batch: Option<usize>,
    epochs: Option<usize>,
    cd_k: Option<usize>,
    eps: Option<f64>,
    adam_beta1: Option<f64>,
    adam_beta2: Option<f64>,
    adam_eps: Option<f64>,
    win: Option<usize>,
    hop: Option<usize>,
    silence_db: Option<f64>,
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(usize),
    Many(Vec<usize>),
}

#[derive(Debug, Clone)]
pub struct Settings {
    pub model: ModelKind,
    pub hidden: Vec<usize>,
    /// Template config; `hidden_units` and `stream` are filled per sweep entry.
    pub train: TrainConfig,
    pub win: usize,
    pub hop: usize,
    pub silence_db: f64,
}

impl Settings {
    pub fn resolve(flags: &Flags) -> Result<Self> {
        let file = match &flags.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                toml::from_str::<FileConfig>(&text).with_context(|| format!("parsing {}", path.display()))?
            }
            None => FileConfig::default(),
        };
        let model = match (flags.model, &file.model) {
            (Some(m), _) => m,
            (None, Some(name)) => name.parse().with_context(|| format!("model {name:?} in config file"))?,
            (None, None) => ModelKind::Gamma,
        };
        let hidden = if !flags.hidden.is_empty() {
            flags.hidden.clone()
        } else {
            match file.hidden {
                Some(OneOrMany::One(j)) => vec![j],
                Some(OneOrMany::Many(js)) => js,
                None => vec![TrainConfig::default().hidden_units],
            }
        };
        if hidden.is_empty() {
            bail!("at least one hidden size is required");
        }
        let d = TrainConfig::default();
        let train = TrainConfig {
            batch_size: flags.batch.or(file.batch).unwrap_or(d.batch_size),
            learning_rate: flags.lr.or(file.lr).unwrap_or(d.learning_rate),
            epochs: flags.epochs.or(file.epochs).unwrap_or(d.epochs),
            cd_k: flags.cd_k.or(file.cd_k).unwrap_or(d.cd_k),
            hidden_units: hidden[0],
            adam_beta1: file.adam_beta1.unwrap_or(d.adam_beta1),
            adam_beta2: file.adam_beta2.unwrap_or(d.adam_beta2),
            adam_eps: flags.adam_eps.or(file.adam_eps).unwrap_or(d.adam_eps),
            seed: flags.seed.or(file.seed).unwrap_or(d.seed),
            epsilon: flags.eps.or(file.eps).unwrap_or(d.epsilon),
            stream: 0,
        };
        if train.epochs == 0 {
            bail!("--epochs must be positive");
        }
        for &j in &hidden {
            TrainConfig {
                hidden_units: j,
                ..train.clone()
            }
            .validate()?;
        }
        let win = flags.win.or(file.win).unwrap_or(256);
        let hop = flags.hop.or(file.hop).unwrap_or(64);
        if win < 2 || !win.is_multiple_of(2) {
            bail!("--win must be even and at least 2, got {win}");
        }
        if hop == 0 || hop > win {
            bail!("--hop must lie in 1..={win}, got {hop}");
        }
        let silence_db = flags.silence_db.or(file.silence_db).unwrap_or(DEFAULT_SILENCE_DB);
        if silence_db.is_nan() || silence_db > 0.0 {
            bail!("--silence-db must be ≤ 0, got {silence_db}");
        }
        Ok(Self {
            model,
            hidden,
            train,
            win,
            hop,
            silence_db,
        })
    }

    /// Config for the `index`-th sweep entry.
    pub fn train_config(&self, index: usize) -> TrainConfig {
        TrainConfig {
            hidden_units: self.hidden[index],
            stream: index as u64,
            ..self.train.clone()
        }
    }
}

/// `key=value` pairs echoed into metric file headers.
pub fn describe(model: ModelKind, cfg: &TrainConfig) -> Vec<(String, String)> {
    [
        ("model", model.to_string()),
        ("hidden_units", cfg.hidden_units.to_string()),
        ("learning_rate", cfg.learning_rate.to_string()),
        ("batch_size", cfg.batch_size.to_string()),
        ("epochs", cfg.epochs.to_string()),
        ("cd_k", cfg.cd_k.to_string()),
        ("epsilon", cfg.epsilon.to_string()),
        ("adam_beta1", cfg.adam_beta1.to_string()),
        ("adam_beta2", cfg.adam_beta2.to_string()),
        ("adam_eps", cfg.adam_eps.to_string()),
        ("seed", cfg.seed.to_string()),
        ("stream", cfg.stream.to_string()),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}
