//! Run configuration: a TOML file plus command-line overrides.
//!
//! Every section and key is optional; missing values fall back to the
//! defaults below. Rates and volatilities are read in annual units and
//! converted to daily units once, in [`RunConfig::resolve`].
//!
//! ```toml
//! [model]
//! m = 0.01          # normal volatility level, day^-1/2
//! alpha = 8e-3      # log-vol reversion, day^-1
//! k = 0.11          # vol-of-vol, day^-1/2
//! rho = -0.4
//!
//! [risk_aversion]
//! lambda0 = 1e-3
//! lambda1 = 1e-3
//!
//! [market]
//! spot = 100.0
//! rate_annual = 0.0
//! z0 = 0.0            # initial martingale log-vol state, or
//! # sigma0_annual = 0.1655   # annual vol index level, giving y0 = ln(sigma0 / m)
//!
//! [grid]
//! moneyness_min = 0.8
//! moneyness_max = 1.2
//! points = 101
//! maturity_days = 20.0
//!
//! [sim]
//! n_paths = 200000
//! dt = 0.1
//! seed = 1
//! antithetic = false
//!
//! [output]
//! path = "out.csv"   # standard output when absent
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use expou_core::calibration::y0_from_vol_index;
use expou_core::risk_neutral::to_martingale;
use expou_core::units::annual_rate_to_daily;
use expou_core::{MartingaleParams, ModelParams, RiskAversion};
use serde::Deserialize;

/// Environment variable naming the default configuration file.
pub const CONFIG_ENV: &str = "EXPOU_CONFIG";

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub risk_aversion: RiskSection,
    #[serde(default)]
    pub market: MarketSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub sim: SimSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub m: f64,
    pub alpha: f64,
    pub k: f64,
    pub rho: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            m: 0.01,
            alpha: 8e-3,
            k: 0.11,
            rho: -0.4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RiskSection {
    pub lambda0: f64,
    pub lambda1: f64,
}

impl Default for RiskSection {
    fn default() -> Self {
        Self {
            lambda0: 1e-3,
            lambda1: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MarketSection {
    pub spot: f64,
    pub rate_annual: f64,
    pub sigma0_annual: Option<f64>,
    pub z0: Option<f64>,
}

impl Default for MarketSection {
    fn default() -> Self {
        Self {
            spot: 100.0,
            rate_annual: 0.0,
            sigma0_annual: None,
            z0: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub moneyness_min: f64,
    pub moneyness_max: f64,
    /// A single point sits at `moneyness_min`.
    pub points: usize,
    pub maturity_days: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            moneyness_min: 0.8,
            moneyness_max: 1.2,
            points: 101,
            maturity_days: 20.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimSection {
    pub n_paths: usize,
    pub dt: f64,
    pub seed: u64,
    pub antithetic: bool,
}

impl Default for SimSection {
    fn default() -> Self {
        Self {
            n_paths: 200_000,
            dt: 0.1,
            seed: 1,
            antithetic: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub path: Option<PathBuf>,
}

/// One invalid configuration field.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldError {
    /// Dotted key, e.g. `model.k`.
    pub field: String,
    pub message: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse config file {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: Box<toml::de::Error>,
    },
    #[error("invalid configuration:\n{}", list(.0))]
    Invalid(Vec<FieldError>),
}

fn list(errors: &[FieldError]) -> String {
    errors.iter().map(|e| format!("  {e}")).collect::<Vec<_>>().join("\n")
}

/// Where the initial log-volatility comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Start {
    /// Physical log-vol `y0`, e.g. from a vol index level.
    LogVol(f64),
    /// Martingale state `z0` given directly.
    MartingaleState(f64),
}

/// Grid of moneyness values and the common maturity (days).
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub moneyness: Vec<f64>,
    pub maturity: f64,
}

/// Simulation settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sim {
    pub n_paths: usize,
    pub dt: f64,
    pub seed: u64,
    pub antithetic: bool,
}

/// A validated configuration in daily units.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub params: ModelParams,
    pub risk_aversion: RiskAversion,
    pub spot: f64,
    /// day^-1
    pub rate: f64,
    pub start: Start,
    pub grid: Grid,
    pub sim: Sim,
    pub output: Option<PathBuf>,
    /// Non-fatal notes produced while resolving.
    pub warnings: Vec<String>,
}

impl Resolved {
    /// Martingale parameters for the configured risk aversion and start.
    pub fn martingale(&self) -> expou_core::Result<MartingaleParams> {
        match self.start {
            Start::LogVol(y0) => to_martingale(&self.params, self.risk_aversion, y0),
            Start::MartingaleState(z0) => Ok(to_martingale(&self.params, self.risk_aversion, 0.0)?.with_z0(z0)),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str, path: &Path) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: path.to_owned(),
            source: Box::new(e),
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_toml(&text, path)
    }

    /// Validates every field and converts to daily units. All invalid
    /// fields are reported together.
    pub fn resolve(&self) -> Result<Resolved, ConfigError> {
        let mut errors = Vec::new();
        let mut bad = |field: &str, message: String| {
            errors.push(FieldError {
                field: field.to_owned(),
                message,
            })
        };
        let positive = |v: f64| v.is_finite() && v > 0.0;

        let md = &self.model;
        for (name, v) in [("model.m", md.m), ("model.alpha", md.alpha), ("model.k", md.k)] {
            if !positive(v) {
                bad(name, format!("must be positive, got {v}"));
            }
        }
        if !(md.rho.abs() <= 1.0) {
            bad("model.rho", format!("must lie in [-1, 1], got {}", md.rho));
        }
        let ra = &self.risk_aversion;
        for (name, v) in [("risk_aversion.lambda0", ra.lambda0), ("risk_aversion.lambda1", ra.lambda1)] {
            if !v.is_finite() {
                bad(name, format!("must be finite, got {v}"));
            }
        }
        let alpha_bar = md.alpha + md.k * ra.lambda1;
        if !(alpha_bar > 0.0) {
            bad(
                "risk_aversion.lambda1",
                format!("makes the risk-neutral reversion alpha + k * lambda1 = {alpha_bar} non-positive"),
            );
        }
        let mk = &self.market;
        if !positive(mk.spot) {
            bad("market.spot", format!("must be positive, got {}", mk.spot));
        }
        if !mk.rate_annual.is_finite() {
            bad("market.rate_annual", format!("must be finite, got {}", mk.rate_annual));
        }
        let mut warnings = Vec::new();
        let start = match (mk.z0, mk.sigma0_annual) {
            (Some(z0), sigma0) => {
                if sigma0.is_some() {
                    warnings.push("both market.z0 and market.sigma0_annual are set; using z0".to_owned());
                }
                if !z0.is_finite() {
                    bad("market.z0", format!("must be finite, got {z0}"));
                }
                Start::MartingaleState(z0)
            }
            (None, Some(sigma0)) => match y0_from_vol_index(sigma0, md.m) {
                Ok(y0) => Start::LogVol(y0),
                Err(_) => {
                    bad("market.sigma0_annual", format!("must be positive, got {sigma0}"));
                    Start::LogVol(0.0)
                }
            },
            (None, None) => Start::MartingaleState(0.0),
        };
        let g = &self.grid;
        if !(positive(g.moneyness_min) && g.moneyness_max.is_finite() && g.moneyness_max >= g.moneyness_min) {
            bad(
                "grid.moneyness_min",
                format!("need 0 < moneyness_min <= moneyness_max, got [{}, {}]", g.moneyness_min, g.moneyness_max),
            );
        }
        if g.points == 0 {
            bad("grid.points", "must be at least 1".to_owned());
        }
        if !positive(g.maturity_days) {
            bad("grid.maturity_days", format!("must be positive, got {}", g.maturity_days));
        }
        let s = &self.sim;
        if s.n_paths == 0 {
            bad("sim.n_paths", "must be at least 1".to_owned());
        }
        if s.antithetic && s.n_paths % 2 == 1 {
            bad("sim.n_paths", format!("must be even with antithetic pairs, got {}", s.n_paths));
        }
        if !positive(s.dt) {
            bad("sim.dt", format!("must be positive, got {}", s.dt));
        }

        let params = ModelParams::new(md.m, md.alpha, md.k, md.rho);
        if !errors.is_empty() {
            return Err(ConfigError::Invalid(errors));
        }
        let params = params.map_err(|e| ConfigError::Invalid(vec![FieldError {
            field: "model".to_owned(),
            message: e.to_string(),
        }]))?;
        Ok(Resolved {
            params,
            risk_aversion: RiskAversion::new(ra.lambda0, ra.lambda1),
            spot: mk.spot,
            rate: annual_rate_to_daily(mk.rate_annual),
            start,
            grid: Grid {
                moneyness: linspace(g.moneyness_min, g.moneyness_max, g.points),
                maturity: g.maturity_days,
            },
            sim: Sim {
                n_paths: s.n_paths,
                dt: s.dt,
                seed: s.seed,
                antithetic: s.antithetic,
            },
            output: self.output.path.clone(),
            warnings,
        })
    }
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (n - 1) as f64;
            (0..n).map(|i| if i == n - 1 { hi } else { lo + step * i as f64 }).collect()
        }
    }
}
