use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use adiagrover::bounds::kappa_max;
use adiagrover::experiments::FigureConfig;
use adiagrover::schedules::{rc_runtime, ScheduleKind};
use adiagrover::GroverInstance;
use clap::ValueEnum;
use serde::Deserialize;

use crate::UsageError;

/// A number or a named value such as `gmin`, `0.1gmin`, `rc` or `max`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(try_from = "RawParam")]
pub enum Param {
    Value(f64),
    Named { scale: f64, name: String },
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawParam {
    Num(f64),
    Str(String),
}

impl TryFrom<RawParam> for Param {
    type Error = String;

    fn try_from(raw: RawParam) -> Result<Self, String> {
        match raw {
            RawParam::Num(v) => Ok(Param::Value(v)),
            RawParam::Str(s) => s.parse(),
        }
    }
}

impl FromStr for Param {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim().to_ascii_lowercase();
        if let Ok(v) = s.parse::<f64>() {
            return Ok(Param::Value(v));
        }
        let split = s
            .find(|c: char| c.is_ascii_alphabetic())
            .ok_or_else(|| format!("cannot parse '{s}'"))?;
        let (prefix, name) = s.split_at(split);
        let prefix = prefix.trim_end_matches('*');
        let scale = if prefix.is_empty() {
            1.0
        } else {
            prefix
                .parse::<f64>()
                .map_err(|_| format!("cannot parse '{s}'"))?
        };
        Ok(Param::Named {
            scale,
            name: name.to_string(),
        })
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Param::Value(v) => write!(f, "{v}"),
            Param::Named { scale, name } if *scale == 1.0 => write!(f, "{name}"),
            Param::Named { scale, name } => write!(f, "{scale}{name}"),
        }
    }
}

impl Param {
    fn resolve(
        &self,
        what: &str,
        names: &[(&str, &dyn Fn() -> anyhow::Result<f64>)],
    ) -> anyhow::Result<f64> {
        match self {
            Param::Value(v) => Ok(*v),
            Param::Named { scale, name } => {
                let (_, f) = names.iter().find(|(n, _)| n == name).ok_or_else(|| {
                    let known: Vec<&str> = names.iter().map(|(n, _)| *n).collect();
                    UsageError(format!(
                        "unknown {what} '{name}', expected a number or one of {known:?}"
                    ))
                })?;
                Ok(scale * f()?)
            }
        }
    }

    /// Rate; `gmin` is `1/sqrt(N)`.
    pub fn gamma(&self, inst: &GroverInstance) -> anyhow::Result<f64> {
        self.resolve("rate", &[("gmin", &|| Ok(inst.g_min()))])
    }

    /// Gap-tracking coefficient; `max` is the tolerance-limited ceiling.
    pub fn kappa(&self) -> anyhow::Result<f64> {
        self.resolve("kappa", &[("max", &|| Ok(kappa_max()))])
    }

    /// Total time; `rc` is the Roland-Cerf runtime at adiabaticity `c`.
    pub fn time(&self, inst: &GroverInstance, c: f64) -> anyhow::Result<f64> {
        self.resolve("time", &[("rc", &|| Ok(rc_runtime(inst, c)?))])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum KindArg {
    Linear,
    #[serde(alias = "roland-cerf")]
    #[value(alias = "roland-cerf")]
    Rc,
    Optimal,
    #[serde(alias = "optimal-closed")]
    #[value(alias = "optimal-closed")]
    OptimalClosed,
    OptimalNumeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    #[default]
    Closed,
    Numeric,
}

impl KindArg {
    pub fn resolve(self, method: MethodArg) -> ScheduleKind {
        match (self, method) {
            (KindArg::Linear, _) => ScheduleKind::Linear,
            (KindArg::Rc, _) => ScheduleKind::RolandCerf,
            (KindArg::Optimal, MethodArg::Closed) | (KindArg::OptimalClosed, _) => {
                ScheduleKind::OptimalClosed
            }
            (KindArg::Optimal, MethodArg::Numeric) | (KindArg::OptimalNumeric, _) => {
                ScheduleKind::OptimalNumeric
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum DephasingKind {
    #[default]
    Constant,
    GapTracking,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub problem: ProblemSection,
    #[serde(default)]
    pub dephasing: DephasingSection,
    #[serde(default)]
    pub schedule: ScheduleSection,
    #[serde(default)]
    pub sim: SimSection,
    #[serde(default)]
    pub output: OutputSection,
    pub figure: Option<FigureConfig>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub n_qubits: Option<u32>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DephasingSection {
    pub kind: Option<DephasingKind>,
    pub gamma: Option<Param>,
    pub kappa: Option<Param>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    pub kind: Option<KindArg>,
    pub method: Option<MethodArg>,
    /// Rate the optimal schedule is built for, when it differs from the bath.
    pub gamma: Option<Param>,
    pub c: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    #[serde(rename = "T")]
    pub total_time: Option<Param>,
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub n_samples: Option<usize>,
    pub full: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    pub format: Option<Format>,
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| UsageError(format!("invalid config {}: {e}", path.display())).into())
    }
}
