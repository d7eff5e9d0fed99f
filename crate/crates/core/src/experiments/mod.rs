//! Figure-level experiments: minimal-time searches, analytic sweeps and
//! scaling fits.

mod figures;
mod min_time;

pub use figures::{figure_bundle, FigureConfig, FigureName};
pub use min_time::{
    find_min_time, MinTimeEvaluation, MinTimeQuery, MinTimeResult, Protocol, SearchRange,
};

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{
    adiabatic_constant_c, asymptotic_tmin, min_infidelity, RateRule, Regime, SuperNorm,
};
use crate::error::{domain, Result};
use crate::grover_model::GroverInstance;
use crate::numeric::{linear_fit, LinearFit};
use crate::schedules::{Schedule, ScheduleKind};

/// R^2 threshold below which a slope fit is flagged as not meaningful.
pub const FIT_R2_GATE: f64 = 0.98;

/// Number formatting shared by all CSV writers: shortest round-trip form,
/// scientific notation outside `[1e-5, 1e16)`.
pub fn fmt_num(v: f64) -> String {
    if v == 0.0 || (v.abs() >= 1e-5 && v.abs() < 1e16) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn logspace(lo_exp: f64, hi_exp: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![10f64.powf(lo_exp)];
    }
    (0..n)
        .map(|i| 10f64.powf(lo_exp + (hi_exp - lo_exp) * i as f64 / (n - 1) as f64))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Axis {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    pub name: String,
    pub data: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedFit {
    pub label: String,
    pub fit: LinearFit,
    pub accepted: bool,
}

impl NamedFit {
    fn new(label: impl Into<String>, fit: LinearFit) -> Self {
        Self {
            label: label.into(),
            accepted: fit.r_squared > FIT_R2_GATE,
            fit,
        }
    }
}

/// Values on the product of the axes, row-major (first axis slowest).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub axes: Vec<Axis>,
    pub series: Vec<Series>,
    pub fits: Vec<NamedFit>,
    pub metadata: serde_json::Map<String, serde_json::Value>,
    pub wall_time_s: f64,
}

impl SweepResult {
    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.values.len()).collect()
    }

    pub fn len(&self) -> usize {
        self.shape().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn series(&self, name: &str) -> Option<&[f64]> {
        self.series
            .iter()
            .find(|s| s.name == name)
            .map(|s| s.data.as_slice())
    }

    pub fn all_finite(&self) -> bool {
        self.series
            .iter()
            .all(|s| s.data.iter().all(|v| v.is_finite()))
    }

    /// Axis coordinates of flat index `k`.
    pub fn coords(&self, mut k: usize) -> Vec<f64> {
        let shape = self.shape();
        let mut idx = vec![0; shape.len()];
        for d in (0..shape.len()).rev() {
            idx[d] = k % shape[d];
            k /= shape[d];
        }
        idx.iter()
            .zip(&self.axes)
            .map(|(&i, a)| a.values[i])
            .collect()
    }

    /// Long-format CSV: one column per axis followed by one per series.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let header: Vec<&str> = self
            .axes
            .iter()
            .map(|a| a.name.as_str())
            .chain(self.series.iter().map(|s| s.name.as_str()))
            .collect();
        writeln!(w, "{}", header.join(","))?;
        for k in 0..self.len() {
            let row: Vec<String> = self
                .coords(k)
                .into_iter()
                .chain(self.series.iter().map(|s| s.data[k]))
                .map(fmt_num)
                .collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn write_fits_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "label,slope,intercept,r_squared,accepted")?;
        for f in &self.fits {
            writeln!(
                w,
                "{},{},{},{},{}",
                f.label,
                fmt_num(f.fit.slope),
                fmt_num(f.fit.intercept),
                fmt_num(f.fit.r_squared),
                f.accepted
            )?;
        }
        Ok(())
    }
}

fn meta(pairs: &[(&str, serde_json::Value)]) -> serde_json::Map<String, serde_json::Value> {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), v.clone()))
        .collect()
}

/// Minimal leakage on an `(n, gamma)` grid at fixed `T` (analytic).
pub fn contour_min_infidelity(
    n_range: &[u32],
    gamma_grid: &[f64],
    total_time: f64,
) -> Result<SweepResult> {
    let start = Instant::now();
    let mut data = Vec::with_capacity(n_range.len() * gamma_grid.len());
    for &n in n_range {
        let inst = GroverInstance::new(n)?;
        for &g in gamma_grid {
            data.push(min_infidelity(&inst, g, total_time)?);
        }
    }
    Ok(SweepResult {
        axes: vec![
            Axis {
                name: "n_qubits".into(),
                values: n_range.iter().map(|&n| n as f64).collect(),
            },
            Axis {
                name: "gamma".into(),
                values: gamma_grid.to_vec(),
            },
        ],
        series: vec![Series {
            name: "min_infidelity".into(),
            data,
        }],
        fits: vec![],
        metadata: meta(&[("total_time", total_time.into())]),
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Exact minimal runtime against `gamma` together with the three
/// asymptotic forms. The target infidelity is `1 - target_fidelity`.
pub fn tmin_vs_gamma_curve(
    n_qubits: u32,
    target_fidelity: f64,
    gamma_grid: &[f64],
) -> Result<SweepResult> {
    let start = Instant::now();
    if !(target_fidelity > 0.0 && target_fidelity < 1.0) {
        return Err(domain(format!(
            "target fidelity must lie in (0, 1), got {target_fidelity}"
        )));
    }
    let inst = GroverInstance::new(n_qubits)?;
    let target = 1.0 - target_fidelity;
    let mut cols: [Vec<f64>; 5] = Default::default();
    for &g in gamma_grid {
        let weak = asymptotic_tmin(&inst, g, target, Some(Regime::Weak))?;
        let moderate = asymptotic_tmin(&inst, g, target, Some(Regime::Moderate))?;
        let strong = asymptotic_tmin(&inst, g, target, Some(Regime::Strong))?;
        cols[0].push(weak.alpha);
        cols[1].push(weak.exact_tmin);
        cols[2].push(weak.asymptotic_tmin);
        cols[3].push(moderate.asymptotic_tmin);
        cols[4].push(strong.asymptotic_tmin);
    }
    let names = [
        "alpha",
        "t_min",
        "t_min_weak",
        "t_min_moderate",
        "t_min_strong",
    ];
    Ok(SweepResult {
        axes: vec![Axis {
            name: "gamma".into(),
            values: gamma_grid.to_vec(),
        }],
        series: names
            .iter()
            .zip(cols)
            .map(|(n, d)| Series {
                name: n.to_string(),
                data: d,
            })
            .collect(),
        fits: vec![],
        metadata: meta(&[
            ("n_qubits", n_qubits.into()),
            ("target_fidelity", target_fidelity.into()),
            ("target_infidelity", target.into()),
        ]),
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// `C(n)` for `gamma = N^(-a/2)` with slope fits of `log2 C` against `n`.
pub fn c_scaling_experiment(
    a_values: &[f64],
    n_range: &[u32],
    kind: ScheduleKind,
    norm: SuperNorm,
) -> Result<SweepResult> {
    let start = Instant::now();
    if n_range.len() < 2 {
        return Err(domain("scaling fits need at least two sizes"));
    }
    let tasks: Vec<(f64, u32)> = a_values
        .iter()
        .flat_map(|&a| n_range.iter().map(move |&n| (a, n)))
        .collect();
    let results: Vec<Result<(f64, f64)>> = tasks
        .par_iter()
        .map(|&(a, n)| {
            let inst = GroverInstance::new(n)?;
            let rule = RateRule::PowerLaw { gamma0: 1.0, a };
            let gamma = rule.rate(&inst);
            let sched = match kind {
                ScheduleKind::Linear | ScheduleKind::RolandCerf => {
                    Schedule::build(kind, &inst, None)?
                }
                ScheduleKind::OptimalClosed | ScheduleKind::OptimalNumeric => {
                    Schedule::build(kind, &inst, Some(gamma))?
                }
            };
            let c = adiabatic_constant_c(&inst, &sched, rule, 1.0, norm)?;
            Ok((gamma, c.value))
        })
        .collect();
    let mut gammas = Vec::with_capacity(tasks.len());
    let mut cs = Vec::with_capacity(tasks.len());
    for r in results {
        let (g, c) = r?;
        gammas.push(g);
        cs.push(c);
    }
    let xs: Vec<f64> = n_range.iter().map(|&n| n as f64).collect();
    let mut fits = Vec::new();
    for (i, a) in a_values.iter().enumerate() {
        let ys: Vec<f64> = cs[i * n_range.len()..(i + 1) * n_range.len()]
            .iter()
            .map(|c| c.log2())
            .collect();
        if let Some(fit) = linear_fit(&xs, &ys) {
            fits.push(NamedFit::new(format!("{}:a={a}", kind.label()), fit));
        }
    }
    Ok(SweepResult {
        axes: vec![
            Axis {
                name: "a".into(),
                values: a_values.to_vec(),
            },
            Axis {
                name: "n_qubits".into(),
                values: xs,
            },
        ],
        series: vec![
            Series {
                name: "gamma".into(),
                data: gammas,
            },
            Series {
                name: "c".into(),
                data: cs,
            },
        ],
        fits,
        metadata: meta(&[
            ("schedule", kind.label().into()),
            ("norm", serde_json::to_value(norm).unwrap_or_default()),
        ]),
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Fit of `log2 y` against `n`, gated on R^2.
pub fn log2_slope_fit(label: &str, n: &[u32], y: &[f64]) -> Option<NamedFit> {
    let xs: Vec<f64> = n.iter().map(|&v| v as f64).collect();
    let ys: Vec<f64> = y.iter().map(|v| v.log2()).collect();
    linear_fit(&xs, &ys).map(|f| NamedFit::new(label, f))
}
