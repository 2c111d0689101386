//! Scenario configuration: a JSON file with the `ScenarioConfig` field names,
//! overridden field by field from the command line.

use std::fs;
use std::path::Path;

use clap::{Args, ValueEnum};
use mirror_core::scenarios::{DbConvention, LossMode, NoiseModel, ScenarioConfig};
use mirror_core::statistics::ObservedStatistics;

use crate::{Result, ToolError};

/// `--model` values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    /// `Q_X = Q_Z`.
    Dependent,
    /// `Q_X = 2 Q_Z (1 - Q_Z)`.
    Independent,
    /// `Q_X` from `--qx`.
    Explicit,
}

/// `--loss-mode` values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum LossArg {
    /// No loss.
    None,
    /// `--p-loss-forward` / `--p-loss-reverse`.
    Explicit,
    /// From `--alpha` and `--length-km`.
    Fiber,
}

/// `--db-convention` values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DbArg {
    /// `1 - 10^(-alpha l)`.
    Paper,
    /// `1 - 10^(-alpha l / 10)`.
    Db10,
}

/// Scenario flags; each one set replaces the file value.
#[derive(Clone, Debug, Default, Args)]
pub struct ScenarioOverrides {
    /// Noise model.
    #[arg(long, value_enum)]
    pub model: Option<ModelArg>,
    /// Computational-basis error rate.
    #[arg(long)]
    pub qz: Option<f64>,
    /// Hadamard-basis error rate (explicit model only).
    #[arg(long)]
    pub qx: Option<f64>,
    /// Loss source.
    #[arg(long, value_enum)]
    pub loss_mode: Option<LossArg>,
    /// Forward loss probability (explicit loss mode).
    #[arg(long)]
    pub p_loss_forward: Option<f64>,
    /// Reverse loss probability (explicit loss mode).
    #[arg(long)]
    pub p_loss_reverse: Option<f64>,
    /// Fiber loss coefficient in dB/km.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Fiber length in km.
    #[arg(long)]
    pub length_km: Option<f64>,
    /// Fiber loss formula.
    #[arg(long, value_enum)]
    pub db_convention: Option<DbArg>,
}

impl ScenarioOverrides {
    /// Applies the flags that were given.
    pub fn apply(&self, mut cfg: ScenarioConfig) -> ScenarioConfig {
        if let Some(m) = self.model {
            cfg.model = match m {
                ModelArg::Dependent => NoiseModel::Dependent,
                ModelArg::Independent => NoiseModel::Independent,
                ModelArg::Explicit => NoiseModel::Explicit,
            };
        }
        if let Some(l) = self.loss_mode {
            cfg.loss_mode = match l {
                LossArg::None => LossMode::None,
                LossArg::Explicit => LossMode::Explicit,
                LossArg::Fiber => LossMode::Fiber,
            };
        }
        if let Some(d) = self.db_convention {
            cfg.db_convention = match d {
                DbArg::Paper => DbConvention::PaperLiteral,
                DbArg::Db10 => DbConvention::DbPer10,
            };
        }
        let fields = [
            (self.qz, &mut cfg.qz),
            (self.qx, &mut cfg.qx),
            (self.p_loss_forward, &mut cfg.p_loss_forward),
            (self.p_loss_reverse, &mut cfg.p_loss_reverse),
            (self.alpha, &mut cfg.alpha),
            (self.length_km, &mut cfg.length_km),
        ];
        for (flag, slot) in fields {
            if let Some(v) = flag {
                *slot = v;
            }
        }
        cfg
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|source| ToolError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| ToolError::Json {
        path: path.to_path_buf(),
        source,
    })
}

/// File config (or defaults) with overrides applied, validated.
pub fn resolve(path: Option<&Path>, overrides: &ScenarioOverrides) -> Result<ScenarioConfig> {
    let base = match path {
        Some(p) => read_json(p)?,
        None => ScenarioConfig::default(),
    };
    let cfg = overrides.apply(base);
    cfg.validate()?;
    Ok(cfg)
}

/// Reads and validates an explicit statistics document.
pub fn load_statistics(path: &Path) -> Result<ObservedStatistics> {
    let stats: ObservedStatistics = read_json(path)?;
    stats.validate()?;
    Ok(stats)
}
