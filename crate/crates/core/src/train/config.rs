//! Training configuration: defaults, presets, validation, and the flat
//! `key = value` config-file format.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::filter::FilterParams;
use crate::nn::NetworkConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub network: NetworkConfig,
    pub filter: FilterParams,
    pub lr_max: f64,
    pub lr_min: f64,
    pub total_steps: u32,
    pub batch: usize,
    pub crop: usize,
    /// Knee of the hybrid loss: quadratic inside ±c, absolute outside.
    pub loss_c: f64,
    pub seed: u64,
    pub checkpoint_path: PathBuf,
    pub log_interval: u32,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            network: NetworkConfig::default(),
            filter: FilterParams::default(),
            lr_max: 1e-4,
            lr_min: 1e-6,
            total_steps: 1000,
            batch: 16,
            crop: 128,
            loss_c: 2.0 / 255.0,
            seed: 0,
            checkpoint_path: PathBuf::from("model.ckpt"),
            log_interval: 100,
        }
    }
}

impl TrainConfig {
    /// Small configuration that trains in minutes on one CPU core:
    /// 1 group of 2 attention blocks at 16 channels on 64 px crops.
    /// The stronger smoothing (larger lambda) pushes streak energy into
    /// the high-frequency layer so the guide branch has signal to use.
    pub fn desk() -> Self {
        Self {
            network: NetworkConfig {
                n_rrg: 1,
                n_dab_per_rrg: 2,
                channels: 16,
                ca_reduction: 4,
                sa_kernel: 7,
                use_rsgb: true,
            },
            filter: FilterParams {
                zeta: 8,
                lambda: 1e-2,
                epsilon: 1e-6,
                eta: 1e-3,
            },
            crop: 64,
            ..Self::default()
        }
    }

    /// Full-scale configuration (4 groups of 8 blocks at 64 channels on
    /// 128 px crops). Provided for completeness; training it to the
    /// published quality level needs a GPU-class compute budget.
    pub fn full_scale() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |m: String| Err(ConfigError::Constraint(m));
        let lr_min_ok = self.lr_min.is_finite() && self.lr_min > 0.0;
        if !lr_min_ok {
            return fail(format!("lr_min must be positive, got {}", self.lr_min));
        }
        let lr_max_ok = self.lr_max.is_finite() && self.lr_max >= self.lr_min;
        if !lr_max_ok {
            return fail(format!(
                "lr_max must be at least lr_min ({}), got {}",
                self.lr_min, self.lr_max
            ));
        }
        if self.batch < 1 {
            return fail("batch must be at least 1".into());
        }
        if self.crop < 16 {
            return fail(format!("crop must be at least 16, got {}", self.crop));
        }
        let loss_c_ok = self.loss_c.is_finite() && self.loss_c > 0.0;
        if !loss_c_ok {
            return fail(format!("loss_c must be positive, got {}", self.loss_c));
        }
        if self.log_interval < 1 {
            return fail("log_interval must be at least 1".into());
        }
        self.network
            .validate()
            .map_err(|m| ConfigError::Constraint(format!("network: {m}")))?;
        self.filter
            .validate()
            .map_err(|e| ConfigError::Constraint(format!("filter: {e}")))?;
        Ok(())
    }

    fn set_kv(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
            value
                .parse()
                .map_err(|_| format!("cannot parse {value:?} as a value for {key}"))
        }
        match key {
            "lr_max" => self.lr_max = num(key, value)?,
            "lr_min" => self.lr_min = num(key, value)?,
            "total_steps" => self.total_steps = num(key, value)?,
            "batch" => self.batch = num(key, value)?,
            "crop" => self.crop = num(key, value)?,
            "loss_c" => self.loss_c = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "checkpoint_path" => self.checkpoint_path = PathBuf::from(value),
            "log_interval" => self.log_interval = num(key, value)?,
            "network.n_rrg" => self.network.n_rrg = num(key, value)?,
            "network.n_dab_per_rrg" => self.network.n_dab_per_rrg = num(key, value)?,
            "network.channels" => self.network.channels = num(key, value)?,
            "network.ca_reduction" => self.network.ca_reduction = num(key, value)?,
            "network.sa_kernel" => self.network.sa_kernel = num(key, value)?,
            "network.use_rsgb" => {
                self.network.use_rsgb = match value {
                    "true" | "1" | "on" => true,
                    "false" | "0" | "off" => false,
                    _ => return Err(format!("cannot parse {value:?} as a boolean for {key}")),
                }
            }
            "filter.zeta" => self.filter.zeta = num(key, value)?,
            "filter.lambda" => self.filter.lambda = num(key, value)?,
            "filter.epsilon" => self.filter.epsilon = num(key, value)?,
            "filter.eta" => self.filter.eta = num(key, value)?,
            _ => return Err(format!("unknown configuration key {key:?}")),
        }
        Ok(())
    }

    /// Applies one `key = value` override (e.g. a CLI flag).
    pub fn apply_kv(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        self.set_kv(key, value)
            .map_err(|message| ConfigError::Value {
                key: key.to_string(),
                message,
            })
    }

    /// Applies a flat `key = value` config file on top of `self`.
    /// Blank lines and `#` comments are skipped.
    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let stripped = raw.trim();
            if stripped.is_empty() || stripped.starts_with('#') {
                continue;
            }
            let (key, value) = stripped.split_once('=').ok_or_else(|| ConfigError::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("expected key = value, got {stripped:?}"),
            })?;
            self.set_kv(key.trim(), value.trim())
                .map_err(|message| ConfigError::Parse {
                    path: path.to_path_buf(),
                    line,
                    message,
                })?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config file {path} line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("config override {key}: {message}")]
    Value { key: String, message: String },
    #[error("invalid configuration: {0}")]
    Constraint(String),
}
