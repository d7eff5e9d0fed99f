use serde::{Deserialize, Serialize};

use crate::bounds::{deffner_lutz_qsl, RateRule};
use crate::error::{config, Error, Result};
use crate::grover_model::GroverInstance;
use crate::lindblad_sim::{integrate, DephasingModel, Diagnostics, SimConfig};
use crate::schedules::Schedule;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Protocol {
    /// Roland-Cerf schedule without dephasing.
    UnitaryRc,
    /// Optimal schedule for the rule's rate, dephased at that rate.
    DephasingConstant { rule: RateRule },
    /// Rate `kappa * g(q)`; the schedule is the optimal one for `gamma = g_min`.
    DephasingGapTracking { kappa: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchRange {
    pub t_low: f64,
    pub t_high: f64,
    /// Relative width of the final bracket.
    pub tolerance: f64,
}

impl Default for SearchRange {
    fn default() -> Self {
        Self {
            t_low: 1.0,
            t_high: 1e5,
            tolerance: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinTimeQuery {
    pub protocol: Protocol,
    pub target_fidelity: f64,
    pub n_qubits: u32,
    pub search: SearchRange,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub n_samples: usize,
}

impl MinTimeQuery {
    pub fn new(protocol: Protocol, target_fidelity: f64, n_qubits: u32) -> Self {
        Self {
            protocol,
            target_fidelity,
            n_qubits,
            search: SearchRange::default(),
            rel_tol: 1e-11,
            abs_tol: 1e-14,
            n_samples: 257,
        }
    }

    fn validate(&self) -> Result<()> {
        let s = &self.search;
        if !(self.target_fidelity > 0.0 && self.target_fidelity < 1.0) {
            return Err(config(format!(
                "target fidelity must lie in (0, 1), got {}",
                self.target_fidelity
            )));
        }
        if !(s.t_low > 0.0 && s.t_low < s.t_high && s.t_high.is_finite()) {
            return Err(config(format!(
                "invalid search range [{}, {}]",
                s.t_low, s.t_high
            )));
        }
        if !(s.tolerance > 0.0 && s.tolerance < 1.0) {
            return Err(config(format!(
                "search tolerance must lie in (0, 1), got {}",
                s.tolerance
            )));
        }
        Ok(())
    }
}

/// One simulated run of the search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinTimeEvaluation {
    pub total_time: f64,
    pub final_fidelity: f64,
    pub diagnostics: Diagnostics,
    /// Deffner-Lutz bound of this trajectory.
    pub deffner_lutz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinTimeResult {
    pub t_min: f64,
    pub final_fidelity: f64,
    pub evaluations: Vec<MinTimeEvaluation>,
    pub monotonicity_violations: usize,
    pub used_scan: bool,
}

struct Runner {
    inst: GroverInstance,
    schedule: Schedule,
    model: DephasingModel,
    query: MinTimeQuery,
    log: Vec<MinTimeEvaluation>,
}

impl Runner {
    fn new(query: &MinTimeQuery) -> Result<Self> {
        let inst = GroverInstance::new(query.n_qubits)?;
        let (schedule, model) = match query.protocol {
            Protocol::UnitaryRc => (
                Schedule::roland_cerf(&inst),
                DephasingModel::Constant { gamma: 0.0 },
            ),
            Protocol::DephasingConstant { rule } => {
                let gamma = rule.rate(&inst);
                (
                    Schedule::optimal_closed(&inst, gamma)?,
                    DephasingModel::Constant { gamma },
                )
            }
            Protocol::DephasingGapTracking { kappa } => (
                Schedule::optimal_closed(&inst, inst.g_min())?,
                DephasingModel::GapTracking { kappa },
            ),
        };
        Ok(Self {
            inst,
            schedule,
            model,
            query: *query,
            log: Vec::new(),
        })
    }

    fn fidelity(&mut self, t: f64) -> Result<f64> {
        let cfg = SimConfig::new(t)
            .with_tolerances(self.query.rel_tol, self.query.abs_tol)
            .with_samples(self.query.n_samples);
        let traj = integrate(&self.inst, &self.schedule, &self.model, &cfg)?;
        let f = traj.final_fidelity();
        self.log.push(MinTimeEvaluation {
            total_time: t,
            final_fidelity: f,
            diagnostics: traj.diagnostics,
            deffner_lutz: deffner_lutz_qsl(&traj, &self.inst, &self.model)?,
        });
        Ok(f)
    }

    /// Geometric bisection on `(lo, hi)` with `F(lo) < target <= F(hi)`.
    fn bisect(
        &mut self,
        mut lo: f64,
        mut hi: f64,
        mut f_lo: f64,
        mut f_hi: f64,
        check: bool,
        violations: &mut usize,
    ) -> Result<(f64, f64)> {
        let target = self.query.target_fidelity;
        while hi / lo > 1.0 + self.query.search.tolerance {
            let mid = (lo * hi).sqrt();
            let f = self.fidelity(mid)?;
            if check && (f < f_lo - 1e-12 || f > f_hi + 1e-12) {
                *violations += 1;
            }
            if f >= target {
                hi = mid;
                f_hi = f;
            } else {
                lo = mid;
                f_lo = f;
            }
        }
        Ok((hi, f_hi))
    }

    fn scan(&mut self, violations: &mut usize) -> Result<(f64, f64)> {
        let target = self.query.target_fidelity;
        let s = self.query.search;
        const RATIO: f64 = 1.05;
        let mut prev = (s.t_low, self.fidelity(s.t_low)?);
        if prev.1 >= target {
            return Ok(prev);
        }
        loop {
            let t = (prev.0 * RATIO).min(s.t_high);
            let f = self.fidelity(t)?;
            if f >= target {
                return self.bisect(prev.0, t, prev.1, f, false, violations);
            }
            if t >= s.t_high {
                return Err(Error::Constraint(format!(
                    "target fidelity {target} not reached by T = {}",
                    s.t_high
                )));
            }
            prev = (t, f);
        }
    }
}

/// Smallest `T` in the search range whose final fidelity reaches the target.
pub fn find_min_time(query: &MinTimeQuery) -> Result<MinTimeResult> {
    query.validate()?;
    let mut run = Runner::new(query)?;
    let target = query.target_fidelity;
    let s = query.search;
    let mut violations = 0;

    let (t_min, f_min, used_scan) = match query.protocol {
        Protocol::UnitaryRc => {
            let (t, f) = run.scan(&mut violations)?;
            (t, f, true)
        }
        _ => {
            let f_high = run.fidelity(s.t_high)?;
            if f_high < target {
                return Err(Error::Constraint(format!(
                    "target fidelity {target} not reached at T_high = {} (F = {f_high})",
                    s.t_high
                )));
            }
            let mut lo = s.t_low;
            let mut f_lo = run.fidelity(lo)?;
            if f_lo >= target {
                let evaluations = std::mem::take(&mut run.log);
                return Ok(MinTimeResult {
                    t_min: lo,
                    final_fidelity: f_lo,
                    evaluations,
                    monotonicity_violations: 0,
                    used_scan: false,
                });
            }
            let (mut hi, mut f_hi);
            loop {
                let t = (lo * 2.0).min(s.t_high);
                let f = if t == s.t_high {
                    f_high
                } else {
                    run.fidelity(t)?
                };
                if f < f_lo - 1e-12 {
                    violations += 1;
                }
                if f >= target {
                    hi = t;
                    f_hi = f;
                    break;
                }
                lo = t;
                f_lo = f;
            }
            let (t, f) = run.bisect(lo, hi, f_lo, f_hi, true, &mut violations)?;
            hi = t;
            f_hi = f;
            if violations > 0 {
                let (t, f) = run.scan(&mut violations)?;
                (t, f, true)
            } else {
                (hi, f_hi, false)
            }
        }
    };
    Ok(MinTimeResult {
        t_min,
        final_fidelity: f_min,
        evaluations: run.log,
        monotonicity_violations: violations,
        used_scan,
    })
}
