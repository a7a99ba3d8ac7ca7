use std::path::Path;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Environment variable naming the default configuration file.
pub const CONFIG_ENV: &str = "NCPHI4_CONFIG";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Machine,
}

/// Settings that may come from the configuration file or from flags.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    pub theta: Option<f64>,
    pub omega: Option<f64>,
    pub mu2: Option<f64>,
    pub s: Option<f64>,
    pub rel: Option<f64>,
    pub cutoff: Option<usize>,
    pub dimension: Option<f64>,
    pub seed: Option<u64>,
    pub format: Option<Format>,
}

impl Settings {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    /// Fields set in `other` replace ours.
    pub fn overridden_by(self, other: &Settings) -> Settings {
        Settings {
            theta: other.theta.or(self.theta),
            omega: other.omega.or(self.omega),
            mu2: other.mu2.or(self.mu2),
            s: other.s.or(self.s),
            rel: other.rel.or(self.rel),
            cutoff: other.cutoff.or(self.cutoff),
            dimension: other.dimension.or(self.dimension),
            seed: other.seed.or(self.seed),
            format: other.format.or(self.format),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub theta: f64,
    pub omega: f64,
    pub mu2: f64,
    /// `s = 1/Ω`.
    pub s: f64,
    /// Relative quadrature tolerance.
    pub rel: f64,
    /// Matrix-base cutoff.
    pub cutoff: usize,
    pub dimension: f64,
    pub seed: u64,
    pub format: Format,
}

pub const DEFAULT_SEED: u64 = 20071;

impl RunConfig {
    pub fn resolve(s: &Settings) -> Result<Self, CliError> {
        let omega = s.omega.unwrap_or(0.5);
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(CliError::Usage(format!("Omega must be positive, got {omega}")));
        }
        let theta = s.theta.unwrap_or(1.0);
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(CliError::Usage(format!("theta must be positive, got {theta}")));
        }
        let rel = s.rel.unwrap_or(1e-8);
        if !(rel > 0.0 && rel < 1.0) {
            return Err(CliError::Usage(format!("tolerance must lie in (0, 1), got {rel}")));
        }
        if let Some(sv) = s.s {
            if (sv * omega - 1.0).abs() > 1e-12 {
                return Err(CliError::Usage(format!("s·Ω ≠ 1 (s = {sv}, Ω = {omega})")));
            }
        }
        Ok(RunConfig {
            theta,
            omega,
            mu2: s.mu2.unwrap_or(1.0),
            s: 1.0 / omega,
            rel,
            cutoff: s.cutoff.unwrap_or(12),
            dimension: s.dimension.unwrap_or(3.0),
            seed: s.seed.unwrap_or(DEFAULT_SEED),
            format: s.format.unwrap_or(Format::Text),
        })
    }
}
