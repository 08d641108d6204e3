//! Experiment configuration in a flat `key = value` format.
//!
//! ```text
//! # free gas in a 1-D box
//! model = free_gas
//! L = 10
//! beta = 1
//! mu = -0.5
//! seed = 42
//! n_samples = 100000
//! ```
//!
//! Required keys: `model`, `L`, `beta`, `mu`, `seed`, `n_samples`. Every
//! other key has a default; see [`ExperimentConfig`].

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::IntegratorConfig;
use crate::error::Error;
use crate::mh::MhConfig;
use crate::rbm::RbmScaling;
use crate::system::{Boundary, SystemParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` given twice")]
    Duplicate { line: usize, key: String },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("line {line}: `{key}`: {message}")]
    Value {
        line: usize,
        key: String,
        message: String,
    },
    #[error("`{key}`{}: {message}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Invalid {
        key: String,
        line: Option<usize>,
        message: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    FreeGas,
    Cosine,
    LennardJones,
    ConfinedGaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    Dhmc,
    Mh,
    Both,
}

/// Fully resolved experiment settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    pub sampler: SamplerKind,
    pub system: SystemParams,
    pub integrator: IntegratorConfig,
    pub mh: MhConfig,
    /// Lennard-Jones cutoff radius, default 2.5.
    pub cutoff: f64,
    /// DHMC proposals (or MH steps when `sampler = mh`).
    pub n_samples: u64,
    /// MH steps of a `both` run; defaults to `n_samples`.
    pub mh_samples: u64,
    pub burn_in: u64,
    /// Default 100 for Lennard-Jones, 1 otherwise.
    pub record_every: u64,
    pub seed: u64,
    /// Particles in the initial configuration, default 0.
    pub initial_n: usize,
    /// Independent DHMC chains averaged in the weak-error curve, default 10.
    pub weak_error_repeats: usize,
    /// Record wall-clock time; traces are no longer reproducible byte for byte.
    pub timing: bool,
    pub output_dir: PathBuf,
}

const KEYS: &[&str] = &[
    "model",
    "sampler",
    "L",
    "beta",
    "mu",
    "d",
    "m",
    "m_n",
    "seed",
    "n_samples",
    "mh_samples",
    "burn_in",
    "record_every",
    "dt_min",
    "dt_max",
    "steps_per_proposal",
    "use_rbm",
    "p",
    "rbm_scaling",
    "jumps",
    "r_c",
    "insert_prob",
    "delete_prob",
    "displace_fraction",
    "initial_n",
    "weak_error_repeats",
    "timing",
    "output_dir",
];

/// Raw `key -> (value, line)` entries.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: HashMap<String, (String, usize)>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((k, v)) = content.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line,
                    text: raw.trim().to_string(),
                });
            };
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || v.is_empty() {
                return Err(ConfigError::Syntax {
                    line,
                    text: raw.trim().to_string(),
                });
            }
            if !KEYS.contains(&k) {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: k.into(),
                });
            }
            if entries
                .insert(k.to_string(), (v.to_string(), line))
                .is_some()
            {
                return Err(ConfigError::Duplicate {
                    line,
                    key: k.into(),
                });
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::parse(&text)
    }

    /// Set or replace a value, e.g. from a sweep or an environment override.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        if !KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey {
                line: 0,
                key: key.into(),
            });
        }
        let line = self.entries.get(key).map_or(0, |e| e.1);
        self.entries
            .insert(key.to_string(), (value.to_string(), line));
        Ok(())
    }

    pub fn line_of(&self, key: &str) -> Option<usize> {
        self.entries.get(key).map(|e| e.1).filter(|&l| l > 0)
    }

    fn get<T: std::str::FromStr>(&self, key: &'static str) -> Result<Option<T>, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        match self.entries.get(key) {
            None => Ok(None),
            Some((v, line)) => v.parse::<T>().map(Some).map_err(|e| ConfigError::Value {
                line: *line,
                key: key.into(),
                message: format!("cannot parse `{v}`: {e}"),
            }),
        }
    }

    fn require<T: std::str::FromStr>(&self, key: &'static str) -> Result<T, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)?.ok_or(ConfigError::Missing(key))
    }

    fn choice<T: for<'de> Deserialize<'de>>(
        &self,
        key: &'static str,
    ) -> Result<Option<T>, ConfigError> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((v, line)) => serde_json::from_value(serde_json::Value::String(v.clone()))
                .map(Some)
                .map_err(|_| ConfigError::Value {
                    line: *line,
                    key: key.into(),
                    message: format!("unrecognized value `{v}`"),
                }),
        }
    }

    /// Resolve defaults and check every invariant.
    pub fn resolve(&self) -> Result<ExperimentConfig, ConfigError> {
        let model: ModelKind = self.choice("model")?.ok_or(ConfigError::Missing("model"))?;
        let lj = model == ModelKind::LennardJones;
        let box_length: f64 = self.require("L")?;
        let beta: f64 = self.require("beta")?;
        let mu: f64 = self.require("mu")?;
        let seed: u64 = self.require("seed")?;
        let n_samples: u64 = self.require("n_samples")?;

        let system = SystemParams {
            beta,
            mu,
            mass: self.get("m")?.unwrap_or(1.0),
            indicator_mass: self.get("m_n")?.unwrap_or(1.0),
            box_length,
            dim: self.get("d")?.unwrap_or(if lj { 3 } else { 1 }),
            boundary: if model == ModelKind::ConfinedGaussian {
                Boundary::Confined
            } else {
                Boundary::Periodic
            },
        };
        let defaults = IntegratorConfig::default();
        let integrator = IntegratorConfig {
            dt_min: self.get("dt_min")?.unwrap_or(defaults.dt_min),
            dt_max: self.get("dt_max")?.unwrap_or(defaults.dt_max),
            steps_per_proposal: self
                .get("steps_per_proposal")?
                .unwrap_or(defaults.steps_per_proposal),
            use_rbm: self.get("use_rbm")?.unwrap_or(lj),
            batch_size: self.get("p")?.unwrap_or(defaults.batch_size),
            rbm_scaling: self.choice("rbm_scaling")?.unwrap_or(RbmScaling::Corrected),
            jumps: self.get("jumps")?.unwrap_or(true),
        };
        let mh_defaults = MhConfig::default();
        let mh = MhConfig {
            insert_prob: self.get("insert_prob")?.unwrap_or(mh_defaults.insert_prob),
            delete_prob: self.get("delete_prob")?.unwrap_or(mh_defaults.delete_prob),
            displace_fraction: self
                .get("displace_fraction")?
                .unwrap_or(mh_defaults.displace_fraction),
        };
        let cfg = ExperimentConfig {
            model,
            sampler: self.choice("sampler")?.unwrap_or(SamplerKind::Dhmc),
            system,
            integrator,
            mh,
            cutoff: self.get("r_c")?.unwrap_or(2.5),
            n_samples,
            mh_samples: self.get("mh_samples")?.unwrap_or(n_samples),
            burn_in: self.get("burn_in")?.unwrap_or(0),
            record_every: self
                .get("record_every")?
                .unwrap_or(if lj { 100 } else { 1 }),
            seed,
            initial_n: self.get("initial_n")?.unwrap_or(0),
            weak_error_repeats: self.get("weak_error_repeats")?.unwrap_or(10),
            timing: self.get("timing")?.unwrap_or(false),
            output_dir: self
                .get::<String>("output_dir")?
                .map_or_else(|| PathBuf::from("out"), PathBuf::from),
        };
        self.check(&cfg)?;
        Ok(cfg)
    }

    fn invalid(&self, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError::Invalid {
            key: key.into(),
            line: self.line_of(key),
            message: message.into(),
        }
    }

    fn check(&self, cfg: &ExperimentConfig) -> Result<(), ConfigError> {
        let from_lib = |e: Error| match e {
            Error::InvalidParameter { name, reason } => self.invalid(name, reason),
            other => self.invalid("config", other.to_string()),
        };
        cfg.system.validate().map_err(from_lib)?;
        cfg.integrator.validate().map_err(from_lib)?;
        cfg.mh.validate().map_err(from_lib)?;
        if cfg.record_every == 0 {
            return Err(self.invalid("record_every", "must be >= 1"));
        }
        if cfg.burn_in > cfg.n_samples {
            return Err(self.invalid("burn_in", "exceeds n_samples"));
        }
        if cfg.sampler == SamplerKind::Both && cfg.burn_in > cfg.mh_samples {
            return Err(self.invalid("burn_in", "exceeds mh_samples"));
        }
        if cfg.weak_error_repeats == 0 {
            return Err(self.invalid("weak_error_repeats", "must be >= 1"));
        }
        match cfg.model {
            ModelKind::Cosine if cfg.system.dim != 1 => {
                return Err(self.invalid("d", "the cosine model is one-dimensional"));
            }
            ModelKind::LennardJones
                if !(cfg.cutoff > 0.0 && cfg.cutoff <= cfg.system.box_length / 2.0) =>
            {
                return Err(self.invalid("r_c", "need 0 < r_c <= L / 2"));
            }
            _ => {}
        }
        Ok(())
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        RawConfig::parse(text)?.resolve()
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        RawConfig::load(path)?.resolve()
    }
}
