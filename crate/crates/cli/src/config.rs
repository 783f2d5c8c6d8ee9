//! Run configuration: defaults, then a flat `key = value` file, then flags.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use fcbio::data::DataFormat;
use fcbio::driver::BudgetPolicy;
use fcbio::problems::Level;
use fcbio::Setting;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    MinNorm,
    Logistic,
    HardSmooth,
    HardLipschitz,
    LowerBound,
    Custom,
}

impl FromStr for Experiment {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.replace('-', "_").as_str() {
            "min_norm" => Ok(Experiment::MinNorm),
            "logistic" => Ok(Experiment::Logistic),
            "hard_smooth" => Ok(Experiment::HardSmooth),
            "hard_lipschitz" => Ok(Experiment::HardLipschitz),
            "lower_bound" => Ok(Experiment::LowerBound),
            "custom" => Ok(Experiment::Custom),
            other => Err(format!(
                "unknown experiment '{other}' (expected min_norm, logistic, hard_smooth, hard_lipschitz, lower_bound, custom)"
            )),
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Experiment::MinNorm => "min_norm",
            Experiment::Logistic => "logistic",
            Experiment::HardSmooth => "hard_smooth",
            Experiment::HardLipschitz => "hard_lipschitz",
            Experiment::LowerBound => "lower_bound",
            Experiment::Custom => "custom",
        })
    }
}

/// `certified`, a total budget `T`, or `per-round:K`.
pub fn parse_budget(s: &str) -> Result<BudgetPolicy, String> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("certified") {
        return Ok(BudgetPolicy::Certified);
    }
    let positive = |v: &str| match v.trim().parse::<u64>() {
        Ok(k) if k > 0 => Ok(k),
        _ => Err(format!("expected a positive integer, got '{v}'")),
    };
    if let Some(k) = s.strip_prefix("per-round:").or_else(|| s.strip_prefix("per_round:")) {
        return positive(k).map(BudgetPolicy::PerRound);
    }
    positive(s).map(BudgetPolicy::FixedTotal)
}

fn parse_setting(s: &str) -> Result<Setting, String> {
    match s {
        "smooth" => Ok(Setting::Smooth),
        "lipschitz" => Ok(Setting::Lipschitz),
        other => Err(format!("expected smooth or lipschitz, got '{other}'")),
    }
}

fn parse_level(s: &str) -> Result<Level, String> {
    match s {
        "upper" => Ok(Level::Upper),
        "lower" => Ok(Level::Lower),
        other => Err(format!("expected upper or lower, got '{other}'")),
    }
}

fn parse_positive(s: &str) -> Result<f64, String> {
    match s.trim().parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("expected a positive number, got '{s}'")),
    }
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => Err(format!("expected true or false, got '{other}'")),
    }
}

fn parse_count(s: &str) -> Result<usize, String> {
    match s.trim().parse::<usize>() {
        Ok(v) if v > 0 => Ok(v),
        _ => Err(format!("expected a positive integer, got '{s}'")),
    }
}

/// Everything a `solve` run depends on.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub eps_f: Option<f64>,
    pub eps_g: Option<f64>,
    pub budget: BudgetPolicy,
    pub seed: u64,
    pub data: Option<PathBuf>,
    pub format: DataFormat,
    pub out: PathBuf,
    pub radius: Option<f64>,
    pub dims: Option<(usize, usize)>,
    pub nonneg_f: bool,
    pub horizon: usize,
    pub setting: Setting,
    pub level: Level,
    pub trace_every: u64,
    /// Budget multiplier of the logistic reference run; 0 skips it.
    pub reference_factor: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            experiment: Experiment::MinNorm,
            eps_f: None,
            eps_g: None,
            budget: BudgetPolicy::Certified,
            seed: 7,
            data: None,
            format: DataFormat::Csv,
            out: PathBuf::from("trace.csv"),
            radius: None,
            dims: None,
            nonneg_f: false,
            horizon: 50,
            setting: Setting::Smooth,
            level: Level::Upper,
            trace_every: 0,
            reference_factor: 100,
        }
    }
}

impl RunConfig {
    /// Sets one field from its textual form. Keys accept `-` or `_`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        let field = |r: Result<(), String>| r.map_err(|msg| CliError::Config { field: key.clone(), message: msg });
        field(match key.as_str() {
            "experiment" => value.parse().map(|e| self.experiment = e),
            "eps_f" => parse_positive(value).map(|v| self.eps_f = Some(v)),
            "eps_g" => parse_positive(value).map(|v| self.eps_g = Some(v)),
            "eps" => parse_positive(value).map(|v| {
                self.eps_f = Some(v);
                self.eps_g = Some(v);
            }),
            "budget" => parse_budget(value).map(|b| self.budget = b),
            "seed" => value.parse().map(|s| self.seed = s).map_err(|_| format!("expected an unsigned integer, got '{value}'")),
            "data" => {
                self.data = Some(PathBuf::from(value));
                Ok(())
            }
            "format" => value.parse().map(|f| self.format = f).map_err(|e: fcbio::Error| e.to_string()),
            "out" => {
                self.out = PathBuf::from(value);
                Ok(())
            }
            "radius" => parse_positive(value).map(|r| self.radius = Some(r)),
            "dims" => {
                let parts: Vec<&str> = value.split(|c: char| c == ',' || c == 'x' || c.is_whitespace()).filter(|p| !p.is_empty()).collect();
                match parts.as_slice() {
                    [m, n] => parse_count(m).and_then(|m| parse_count(n).map(|n| self.dims = Some((m, n)))),
                    _ => Err(format!("expected two dimensions 'm n', got '{value}'")),
                }
            }
            "nonneg_f" => parse_bool(value).map(|b| self.nonneg_f = b),
            "horizon" => parse_count(value).map(|t| self.horizon = t),
            "setting" => parse_setting(value).map(|s| self.setting = s),
            "level" => parse_level(value).map(|l| self.level = l),
            "trace_every" => value.parse().map(|k| self.trace_every = k).map_err(|_| format!("expected an unsigned integer, got '{value}'")),
            "reference_factor" => value.parse().map(|k| self.reference_factor = k).map_err(|_| format!("expected an unsigned integer, got '{value}'")),
            _ => Err("unknown configuration key".to_string()),
        })
    }

    /// Applies a `key = value` file; `#` starts a comment.
    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.apply_text(&text)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Config {
                    field: format!("line {}", i + 1),
                    message: format!("expected key = value, got '{line}'"),
                });
            };
            self.set(key, value)?;
        }
        Ok(())
    }

    /// Default accuracy per experiment.
    pub fn tolerances(&self) -> (f64, f64) {
        let default = match self.experiment {
            Experiment::MinNorm | Experiment::Custom => 1e-6,
            Experiment::Logistic => 1e-3,
            Experiment::HardSmooth => 1e-3,
            Experiment::HardLipschitz | Experiment::LowerBound => 0.05,
        };
        let f = self.eps_f.or(self.eps_g).unwrap_or(default);
        let g = self.eps_g.or(self.eps_f).unwrap_or(default);
        (f, g)
    }

    pub fn radius_or_default(&self) -> f64 {
        self.radius.unwrap_or(match self.experiment {
            Experiment::Logistic => 10.0,
            Experiment::LowerBound => 1.0,
            _ => 2.0,
        })
    }

    pub fn dims_or_default(&self) -> (usize, usize) {
        self.dims.unwrap_or(match self.experiment {
            Experiment::Logistic => (200, 50),
            _ => (40, 80),
        })
    }
}
