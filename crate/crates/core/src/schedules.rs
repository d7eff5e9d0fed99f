//! Interpolation schedules `q(s)` on `s in [0, 1]`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::grover_model::{gap_sq, GroverInstance};
use crate::numeric::{integrate, integrate_with_breaks, MonotoneCubic, QuadOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleKind {
    Linear,
    RolandCerf,
    OptimalClosed,
    OptimalNumeric,
}

impl ScheduleKind {
    pub fn label(&self) -> &'static str {
        match self {
            ScheduleKind::Linear => "linear",
            ScheduleKind::RolandCerf => "roland-cerf",
            ScheduleKind::OptimalClosed => "optimal-closed",
            ScheduleKind::OptimalNumeric => "optimal-numeric",
        }
    }
}

/// Anything that maps `s in [0, 1]` to `q in [0, 1]` with a derivative.
pub trait SchedulePath: Send + Sync {
    fn q(&self, s: f64) -> f64;
    fn dq_ds(&self, s: f64) -> f64;
}

#[derive(Debug, Clone)]
enum Repr {
    Linear,
    RolandCerf {
        root: f64,
        phi: f64,
    },
    Closed {
        theta0: f64,
        theta_max: f64,
        k2: f64,
        root: f64,
    },
    Numeric {
        curve: MonotoneCubic,
    },
}

#[derive(Debug, Clone)]
pub struct Schedule {
    kind: ScheduleKind,
    gamma: Option<f64>,
    tau: Option<f64>,
    repr: Repr,
}

/// Thermodynamic-length constant of the optimal schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TauConstant {
    /// Adaptive-quadrature value of the integral of `sqrt(M)` over `q`.
    pub value: f64,
    pub quadrature_error: f64,
    /// `Theta0 / sqrt(gamma)`.
    pub closed_form: f64,
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma.is_finite() && gamma > 0.0 {
        Ok(())
    } else {
        Err(domain(format!(
            "dephasing rate must be positive and finite, got {gamma}"
        )))
    }
}

fn check_s(s: f64) -> Result<()> {
    if (0.0..=1.0).contains(&s) {
        Ok(())
    } else {
        Err(domain(format!("schedule parameter s = {s} outside [0, 1]")))
    }
}

pub(crate) fn mass_raw(n: f64, gamma: f64, q: f64) -> f64 {
    let g2 = gap_sq(n, q);
    gamma * (n - 1.0) / (n * n * g2 * g2 * (g2 + gamma * gamma))
}

/// Metric `M(q)` whose length element gives the leading-order leakage.
pub fn mass(inst: &GroverInstance, gamma: f64, q: f64) -> Result<f64> {
    check_gamma(gamma)?;
    if !(0.0..=1.0).contains(&q) {
        return Err(domain(format!("q = {q} outside [0, 1]")));
    }
    Ok(mass_raw(inst.dim(), gamma, q))
}

/// Half-angle `Theta0` of the optimal path, `tau = Theta0 / sqrt(gamma)`.
pub fn theta0(inst: &GroverInstance, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    let n = inst.dim();
    Ok((gamma * (n - 1.0).sqrt()).atan2((1.0 + gamma * gamma).sqrt()))
}

pub fn tau_closed_form(inst: &GroverInstance, gamma: f64) -> Result<f64> {
    Ok(theta0(inst, gamma)? / gamma.sqrt())
}

pub fn tau(inst: &GroverInstance, gamma: f64) -> Result<TauConstant> {
    check_gamma(gamma)?;
    let n = inst.dim();
    let r = integrate_with_breaks(
        |q| mass_raw(n, gamma, q).sqrt(),
        &[0.0, 0.5, 1.0],
        QuadOptions::default(),
    )?;
    Ok(TauConstant {
        value: r.value,
        quadrature_error: r.error,
        closed_form: tau_closed_form(inst, gamma)?,
    })
}

/// Total time of the Roland-Cerf schedule at adiabaticity `c`.
pub fn rc_runtime(inst: &GroverInstance, c: f64) -> Result<f64> {
    if !(c.is_finite() && c > 0.0) {
        return Err(domain(format!(
            "adiabaticity parameter must be positive, got {c}"
        )));
    }
    let n = inst.dim();
    let root = (n - 1.0).sqrt();
    Ok(n * root.atan() / (c * root))
}

/// Landau-Zener excitation estimate `exp(-pi g_min^2 / (2 eps))` for the
/// linear schedule, whose sweep rate is `eps = 1/T`.
pub fn landau_zener_probability(inst: &GroverInstance, total_time: f64) -> Result<f64> {
    if !(total_time.is_finite() && total_time > 0.0) {
        return Err(domain(format!(
            "total time must be positive, got {total_time}"
        )));
    }
    let g = inst.g_min();
    Ok((-std::f64::consts::PI * g * g * total_time / 2.0).exp())
}

/// `2 * integral of M(q(s)) q'(s)^2 ds`; times `1/T` it is the first-order
/// leakage out of the ground state.
pub fn leading_order_tunneling(
    inst: &GroverInstance,
    gamma: f64,
    path: &dyn SchedulePath,
) -> Result<f64> {
    check_gamma(gamma)?;
    let n = inst.dim();
    let r = integrate_with_breaks(
        |s| {
            let q = path.q(s).clamp(0.0, 1.0);
            let v = path.dq_ds(s);
            mass_raw(n, gamma, q) * v * v
        },
        &[0.0, 0.5, 1.0],
        QuadOptions::with_rel_tol(1e-10),
    )?;
    Ok(2.0 * r.value)
}

impl Schedule {
    pub fn linear() -> Self {
        Self {
            kind: ScheduleKind::Linear,
            gamma: None,
            tau: None,
            repr: Repr::Linear,
        }
    }

    pub fn roland_cerf(inst: &GroverInstance) -> Self {
        let root = (inst.dim() - 1.0).sqrt();
        Self {
            kind: ScheduleKind::RolandCerf,
            gamma: None,
            tau: None,
            repr: Repr::RolandCerf {
                root,
                phi: root.atan(),
            },
        }
    }

    /// Closed-form optimal schedule for a constant dephasing rate.
    pub fn optimal_closed(inst: &GroverInstance, gamma: f64) -> Result<Self> {
        check_gamma(gamma)?;
        let n = inst.dim();
        let a = n * gamma * gamma;
        let theta0 = theta0(inst, gamma)?;
        let theta_max = (gamma * n.sqrt()).atan2(1.0);
        Ok(Self {
            kind: ScheduleKind::OptimalClosed,
            gamma: Some(gamma),
            tau: Some(theta0 / gamma.sqrt()),
            repr: Repr::Closed {
                theta0,
                theta_max,
                k2: a / (1.0 + a),
                root: (n - 1.0).sqrt(),
            },
        })
    }

    /// Optimal schedule obtained by integrating `dq/ds = tau / sqrt(M(q))`
    /// numerically and inverting `s(q)` with a monotone Hermite table.
    pub fn optimal_numeric(inst: &GroverInstance, gamma: f64) -> Result<Self> {
        check_gamma(gamma)?;
        let n = inst.dim();
        let tau = tau(inst, gamma)?.value;
        let root = (n - 1.0).sqrt();
        let phi0 = root.atan();
        let q_of = |phi: f64| (0.5 + phi.tan() / (2.0 * root)).clamp(0.0, 1.0);
        let slope = |q: f64| tau / mass_raw(n, gamma, q).sqrt();
        let seg = |qa: f64, qb: f64| -> Result<f64> {
            Ok(integrate(
                |q| mass_raw(n, gamma, q).sqrt(),
                qa,
                qb,
                QuadOptions::with_rel_tol(1e-13),
            )?
            .value)
        };

        const PANELS: usize = 64;
        const MAX_KNOTS: usize = 200_000;
        let mut phis = vec![-phi0];
        let mut qs = vec![0.0];
        let mut ss = vec![0.0];
        let mut acc = 0.0;
        for p in 0..PANELS {
            let phi_b = if p + 1 == PANELS {
                phi0
            } else {
                -phi0 + 2.0 * phi0 * (p + 1) as f64 / PANELS as f64
            };
            // depth-first refinement of [phi_a, phi_b]
            let mut stack = vec![(phis[phis.len() - 1], phi_b)];
            while let Some((pa, pb)) = stack.pop() {
                let qa = q_of(pa);
                let qb = if pb == phi0 { 1.0 } else { q_of(pb) };
                let pm = 0.5 * (pa + pb);
                let pq = 0.5 * (pa + pm);
                let (qq, qm) = (q_of(pq), q_of(pm));
                let i_aq = seg(qa, qq)?;
                let i_qm = seg(qq, qm)?;
                let i_mb = seg(qm, qb)?;
                let h = (i_aq + i_qm + i_mb) / tau;
                let (da, db) = (slope(qa), slope(qb));
                // The Hermite derivative error vanishes at the midpoint to
                // leading order, so the interior points are checked too.
                let ok = [(i_aq / tau, qq), ((i_aq + i_qm) / tau, qm)]
                    .iter()
                    .all(|&(ds, qx)| {
                        let u = ds / h;
                        let pred = (1.0 + 2.0 * u) * (1.0 - u).powi(2) * qa
                            + u * (1.0 - u).powi(2) * h * da
                            + u * u * (3.0 - 2.0 * u) * qb
                            + u * u * (u - 1.0) * h * db;
                        let dpred = 6.0 * u * (u - 1.0) / h * (qa - qb)
                            + (1.0 - u) * (1.0 - 3.0 * u) * da
                            + u * (3.0 * u - 2.0) * db;
                        let dx = slope(qx);
                        // tolerances carry a rounding floor from s and from (qb - qa) / h
                        (pred - qx).abs() <= 1e-11 + 1e-15 * dx
                            && (dpred - dx).abs() <= 1e-9 * dx + 8.0 * f64::EPSILON / h
                    });
                if ok || h < 1e-12 {
                    acc += i_aq + i_qm + i_mb;
                    phis.push(pb);
                    qs.push(qb);
                    ss.push(acc);
                    if qs.len() > MAX_KNOTS {
                        return Err(Error::Numerical(format!(
                            "optimal schedule grid exceeded {MAX_KNOTS} knots"
                        )));
                    }
                } else {
                    stack.push((pm, pb));
                    stack.push((pa, pm));
                }
            }
        }
        let total = acc;
        let s_knots: Vec<f64> = ss.iter().map(|v| v / total).collect();
        let slopes: Vec<f64> = qs
            .iter()
            .map(|&q| total / mass_raw(n, gamma, q).sqrt())
            .collect();
        let mut s_knots = s_knots;
        let last = s_knots.len() - 1;
        s_knots[last] = 1.0;
        let curve = MonotoneCubic::new(s_knots, qs, slopes)?;
        Ok(Self {
            kind: ScheduleKind::OptimalNumeric,
            gamma: Some(gamma),
            tau: Some(total),
            repr: Repr::Numeric { curve },
        })
    }

    /// Builds a schedule by kind; optimal kinds need `gamma`.
    pub fn build(kind: ScheduleKind, inst: &GroverInstance, gamma: Option<f64>) -> Result<Self> {
        let need = || {
            gamma.ok_or_else(|| domain(format!("{} schedule needs a dephasing rate", kind.label())))
        };
        match kind {
            ScheduleKind::Linear => Ok(Self::linear()),
            ScheduleKind::RolandCerf => Ok(Self::roland_cerf(inst)),
            ScheduleKind::OptimalClosed => Self::optimal_closed(inst, need()?),
            ScheduleKind::OptimalNumeric => Self::optimal_numeric(inst, need()?),
        }
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    pub fn gamma(&self) -> Option<f64> {
        self.gamma
    }

    /// `tau` for optimal schedules.
    pub fn tau(&self) -> Option<f64> {
        self.tau
    }

    /// Knot table of a numeric schedule.
    pub fn knots(&self) -> Option<&MonotoneCubic> {
        match &self.repr {
            Repr::Numeric { curve } => Some(curve),
            _ => None,
        }
    }

    pub fn eval(&self, s: f64) -> Result<f64> {
        check_s(s)?;
        Ok(self.q_unchecked(s))
    }

    pub fn deriv(&self, s: f64) -> Result<f64> {
        check_s(s)?;
        Ok(self.dq_unchecked(s))
    }

    /// `(s, q, dq/ds)` on `n` equally spaced points including both ends.
    pub fn sample(&self, n: usize) -> Result<Vec<[f64; 3]>> {
        if n < 2 {
            return Err(domain("need at least two sample points"));
        }
        Ok((0..n)
            .map(|i| {
                let s = i as f64 / (n - 1) as f64;
                [s, self.q_unchecked(s), self.dq_unchecked(s)]
            })
            .collect())
    }

    fn q_unchecked(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        if s >= 1.0 {
            return 1.0;
        }
        let q = match &self.repr {
            Repr::Linear => s,
            Repr::RolandCerf { root, phi } => 0.5 + ((2.0 * s - 1.0) * phi).tan() / (2.0 * root),
            Repr::Closed {
                theta0,
                theta_max,
                root,
                ..
            } => {
                let th = (2.0 * s - 1.0) * theta0;
                let x = th.sin() / ((theta_max - th).sin() * (theta_max + th).sin()).sqrt();
                0.5 + x / (2.0 * root)
            }
            Repr::Numeric { curve } => curve.eval(s),
        };
        q.clamp(0.0, 1.0)
    }

    fn dq_unchecked(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, 1.0);
        match &self.repr {
            Repr::Linear => 1.0,
            Repr::RolandCerf { root, phi } => phi / (root * ((2.0 * s - 1.0) * phi).cos().powi(2)),
            Repr::Closed {
                theta0,
                theta_max,
                k2,
                root,
            } => {
                let th = (2.0 * s - 1.0) * theta0;
                let d = (theta_max - th).sin() * (theta_max + th).sin();
                theta0 * k2 * th.cos() / (root * d * d.sqrt())
            }
            Repr::Numeric { curve } => curve.deriv(s),
        }
    }
}

impl SchedulePath for Schedule {
    fn q(&self, s: f64) -> f64 {
        self.q_unchecked(s)
    }

    fn dq_ds(&self, s: f64) -> f64 {
        self.dq_unchecked(s)
    }
}
