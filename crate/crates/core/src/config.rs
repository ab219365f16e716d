//! Run configuration: command-line flags override a flat `key = value` file,
//! which overrides the built-in defaults.
//!
//! ```text
//! # comments start with '#'
//! tol = 1e-10
//! max_iter = 1000000
//! band_multiplier = 10
//! residual_tol = 1e-8
//! cross_tol = 1e-7
//! n_max = 16
//! p_max = 5
//! q_max = 5
//! samples = 200
//! sample_max_n = 8
//! seed = 20240601
//! workers = 4
//! jsonl = out/certificates.jsonl
//! csv = out/summary.csv
//! ```

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::enumerate::default_workers;
use crate::spectral::SolverConfig;
use crate::verify::{Grid, SampleConfig, VerifyConfig};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Syntax {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("tolerance must be positive, got {0}")]
    Tolerance(f64),
    #[error("band multiplier must be at least 1, got {0}")]
    Multiplier(f64),
    #[error("max_iter must be positive")]
    MaxIter,
}

/// Settings that may come from a file or from flags; `None` means unset.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub band_multiplier: Option<f64>,
    pub residual_tol: Option<f64>,
    pub cross_tol: Option<f64>,
    pub n_max: Option<usize>,
    pub p_max: Option<usize>,
    pub q_max: Option<usize>,
    pub samples: Option<usize>,
    pub sample_max_n: Option<usize>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub jsonl: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

impl Overrides {
    /// Fill every unset field from `lower`.
    pub fn or(self, lower: Overrides) -> Overrides {
        Overrides {
            tol: self.tol.or(lower.tol),
            max_iter: self.max_iter.or(lower.max_iter),
            band_multiplier: self.band_multiplier.or(lower.band_multiplier),
            residual_tol: self.residual_tol.or(lower.residual_tol),
            cross_tol: self.cross_tol.or(lower.cross_tol),
            n_max: self.n_max.or(lower.n_max),
            p_max: self.p_max.or(lower.p_max),
            q_max: self.q_max.or(lower.q_max),
            samples: self.samples.or(lower.samples),
            sample_max_n: self.sample_max_n.or(lower.sample_max_n),
            seed: self.seed.or(lower.seed),
            workers: self.workers.or(lower.workers),
            jsonl: self.jsonl.or(lower.jsonl),
            csv: self.csv.or(lower.csv),
        }
    }

    pub fn parse_file(path: &Path) -> Result<Overrides, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse_str(&text, path)
    }

    pub fn parse_str(text: &str, origin: &Path) -> Result<Overrides, ConfigError> {
        let mut o = Overrides::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| ConfigError::Syntax {
                path: origin.to_path_buf(),
                line: idx + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key = value, got '{line}'")))?;
            let (key, value) = (key.trim(), value.trim());
            fn num<T: std::str::FromStr>(v: &str) -> Result<T, String> {
                v.parse().map_err(|_| format!("invalid number '{v}'"))
            }
            let bad = |m: String| err(format!("{key}: {m}"));
            match key {
                "tol" => o.tol = Some(num(value).map_err(bad)?),
                "max_iter" => o.max_iter = Some(num(value).map_err(bad)?),
                "band_multiplier" => o.band_multiplier = Some(num(value).map_err(bad)?),
                "residual_tol" => o.residual_tol = Some(num(value).map_err(bad)?),
                "cross_tol" => o.cross_tol = Some(num(value).map_err(bad)?),
                "n_max" => o.n_max = Some(num(value).map_err(bad)?),
                "p_max" => o.p_max = Some(num(value).map_err(bad)?),
                "q_max" => o.q_max = Some(num(value).map_err(bad)?),
                "samples" => o.samples = Some(num(value).map_err(bad)?),
                "sample_max_n" => o.sample_max_n = Some(num(value).map_err(bad)?),
                "seed" => o.seed = Some(num(value).map_err(bad)?),
                "workers" => o.workers = Some(num(value).map_err(bad)?),
                "jsonl" => o.jsonl = Some(PathBuf::from(value)),
                "csv" => o.csv = Some(PathBuf::from(value)),
                other => return Err(err(format!("unknown key '{other}'"))),
            }
        }
        Ok(o)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub verify: VerifyConfig,
    pub grid: Grid,
    pub samples: SampleConfig,
    pub workers: usize,
    pub jsonl: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            verify: VerifyConfig::default(),
            grid: Grid::default(),
            samples: SampleConfig::default(),
            workers: default_workers(),
            jsonl: None,
            csv: None,
        }
    }
}

impl RunConfig {
    /// Apply overrides on top of the defaults and validate.
    pub fn resolve(o: Overrides) -> Result<RunConfig, ConfigError> {
        let d = RunConfig::default();
        let solver = SolverConfig::new(
            o.tol.unwrap_or(d.verify.solver.tol),
            o.max_iter.unwrap_or(d.verify.solver.max_iter),
        );
        let verify = VerifyConfig {
            solver,
            band_multiplier: o.band_multiplier.unwrap_or(d.verify.band_multiplier),
            residual_tol: o.residual_tol.unwrap_or(d.verify.residual_tol),
            cross_tol: o.cross_tol.unwrap_or(d.verify.cross_tol),
            timestamp: false,
        };
        let cfg = RunConfig {
            verify,
            grid: Grid {
                n_max: o.n_max.unwrap_or(d.grid.n_max),
                p_max: o.p_max.unwrap_or(d.grid.p_max),
                q_max: o.q_max.unwrap_or(d.grid.q_max),
            },
            samples: SampleConfig {
                samples: o.samples.unwrap_or(d.samples.samples),
                max_n: o.sample_max_n.unwrap_or(d.samples.max_n),
                seed: o.seed.unwrap_or(d.samples.seed),
                ..d.samples
            },
            workers: o.workers.unwrap_or(d.workers).max(1),
            jsonl: o.jsonl,
            csv: o.csv,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let tol = self.verify.solver.tol;
        if !(tol > 0.0) {
            return Err(ConfigError::Tolerance(tol));
        }
        if !(self.verify.band_multiplier >= 1.0) {
            return Err(ConfigError::Multiplier(self.verify.band_multiplier));
        }
        if self.verify.solver.max_iter == 0 {
            return Err(ConfigError::MaxIter);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_beat_file_beat_defaults() {
        let file = Overrides::parse_str("tol = 1e-9\nseed = 7 # trailing\n\nn_max=10\n", Path::new("x")).unwrap();
        let flags = Overrides {
            tol: Some(1e-11),
            ..Default::default()
        };
        let cfg = RunConfig::resolve(flags.or(file)).unwrap();
        assert_eq!(cfg.verify.solver.tol, 1e-11);
        assert_eq!(cfg.samples.seed, 7);
        assert_eq!(cfg.grid.n_max, 10);
        assert_eq!(cfg.grid.p_max, 5);
        assert!((cfg.verify.band() - 1e-10).abs() < 1e-20);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(Overrides::parse_str("tol 1e-9", Path::new("x")).is_err());
        assert!(Overrides::parse_str("colour = red", Path::new("x")).is_err());
        assert!(Overrides::parse_str("tol = abc", Path::new("x")).is_err());
        let bad_tol = Overrides {
            tol: Some(0.0),
            ..Default::default()
        };
        assert!(matches!(RunConfig::resolve(bad_tol), Err(ConfigError::Tolerance(_))));
        let bad_mult = Overrides {
            band_multiplier: Some(0.5),
            ..Default::default()
        };
        assert!(matches!(RunConfig::resolve(bad_mult), Err(ConfigError::Multiplier(_))));
    }
}
