//! The open-system adiabatic constant built from the vectorised generator.
//!
//! Operators on the reduced space are vectorised column-major, so
//! `vec(rho)[i + 2 j] = rho[(i, j)]`.

use nalgebra::{DMatrix, Matrix2};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::grover_model::{ground_state_raw, reduced_entries, GroverInstance};
use crate::lindblad_sim::{reduced_generator, trace_norm_hermitian, C64};
use crate::numeric::{integrate_with_breaks, QuadOptions};
use crate::schedules::SchedulePath;

const FD_STEP: f64 = 1e-4;
const KERNEL_CUTOFF: f64 = 1e-10;

/// Norm used for superoperators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuperNorm {
    /// Largest singular value of the matrix representation.
    #[default]
    Spectral,
    Frobenius,
    /// Induced trace norm on Hermitian inputs, estimated by sampling.
    InducedTrace,
}

/// Dephasing rate as a function of the problem size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RateRule {
    Constant {
        gamma: f64,
    },
    /// `gamma0 * N^(-a/2)`.
    PowerLaw {
        gamma0: f64,
        a: f64,
    },
}

impl RateRule {
    pub fn rate(&self, inst: &GroverInstance) -> f64 {
        match *self {
            RateRule::Constant { gamma } => gamma,
            RateRule::PowerLaw { gamma0, a } => gamma0 * inst.dim().powf(-a / 2.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuperoperatorSample {
    pub s: f64,
    pub l_matrix: DMatrix<C64>,
    /// Projector onto the kernel of `L`.
    pub p_matrix: DMatrix<C64>,
    /// Reduced resolvent: inverse of `L` off the kernel, zero on it.
    pub s_matrix: DMatrix<C64>,
    pub kernel_dim: usize,
}

impl SuperoperatorSample {
    /// `||L S - (I - P)||` in the spectral norm.
    pub fn resolvent_residual(&self) -> f64 {
        let id = DMatrix::<C64>::identity(4, 4);
        spectral_norm(&(&self.l_matrix * &self.s_matrix - (id - &self.p_matrix)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdiabaticConstant {
    pub value: f64,
    pub boundary_start: f64,
    pub boundary_end: f64,
    pub integral: f64,
    pub gamma: f64,
}

fn generator_matrix(n: f64, q: f64, gamma: f64) -> DMatrix<C64> {
    let (a, b, d) = reduced_entries(n, q);
    let h = Matrix2::new(a, b, b, d);
    let g = ground_state_raw(n, q);
    let p0 = Matrix2::new(g[0] * g[0], g[0] * g[1], g[0] * g[1], g[1] * g[1]);
    let mut l = DMatrix::<C64>::zeros(4, 4);
    for col in 0..4 {
        let mut e = Matrix2::<C64>::zeros();
        e[(col % 2, col / 2)] = C64::new(1.0, 0.0);
        let out = reduced_generator(&h, &p0, gamma, &e);
        for row in 0..4 {
            l[(row, col)] = out[(row % 2, row / 2)];
        }
    }
    l
}

fn spectral_norm(m: &DMatrix<C64>) -> f64 {
    m.clone().svd(false, false).singular_values.max()
}

fn induced_trace_norm(m: &DMatrix<C64>) -> f64 {
    // Hermitian inputs a I + x X + y Y + z Z on a deterministic grid of the
    // unit 3-sphere in (a, x, y, z); trace norm of the input is known in
    // closed form.
    let mut best: f64 = 0.0;
    let steps = 24;
    for i in 0..=steps {
        let chi = std::f64::consts::PI * i as f64 / steps as f64;
        for j in 0..=steps {
            let theta = std::f64::consts::PI * j as f64 / steps as f64;
            for k in 0..(2 * steps) {
                let phi = std::f64::consts::PI * k as f64 / steps as f64;
                let a = chi.cos();
                let r = chi.sin();
                let (x, y, z) = (
                    r * theta.sin() * phi.cos(),
                    r * theta.sin() * phi.sin(),
                    r * theta.cos(),
                );
                let rho = [
                    C64::new(a + z, 0.0),
                    C64::new(x, y),
                    C64::new(x, -y),
                    C64::new(a - z, 0.0),
                ];
                let in_norm = (a + r).abs() + (a - r).abs();
                if in_norm < 1e-12 {
                    continue;
                }
                let mut out = DMatrix::<C64>::zeros(2, 2);
                for row in 0..4 {
                    let mut acc = C64::new(0.0, 0.0);
                    for (col, v) in rho.iter().enumerate() {
                        acc += m[(row, col)] * v;
                    }
                    out[(row % 2, row / 2)] = acc;
                }
                let herm = (&out + out.adjoint()).map(|z| z * 0.5);
                best = best.max(trace_norm_hermitian(&herm) / in_norm);
            }
        }
    }
    best
}

fn norm_of(m: &DMatrix<C64>, kind: SuperNorm) -> f64 {
    match kind {
        SuperNorm::Spectral => spectral_norm(m),
        SuperNorm::Frobenius => m.norm(),
        SuperNorm::InducedTrace => induced_trace_norm(m),
    }
}

fn kernel_and_resolvent(l: &DMatrix<C64>) -> Result<(DMatrix<C64>, DMatrix<C64>, usize)> {
    let svd = l.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let cutoff = KERNEL_CUTOFF * smax.max(f64::MIN_POSITIVE);
    let kernel_dim = svd.singular_values.iter().filter(|&&x| x <= cutoff).count();
    if kernel_dim != 2 {
        return Err(Error::Numerical(format!(
            "generator kernel has dimension {kernel_dim}, expected 2"
        )));
    }
    let pinv = svd
        .pseudo_inverse(cutoff)
        .map_err(|e| Error::Numerical(e.to_string()))?;
    let p = DMatrix::<C64>::identity(4, 4) - &pinv * l;
    Ok((p, pinv, kernel_dim))
}

/// `L`, `P` and `S` at schedule position `s` for rate `gamma`.
pub fn superoperator_sample(
    inst: &GroverInstance,
    path: &dyn SchedulePath,
    gamma: f64,
    s: f64,
) -> Result<SuperoperatorSample> {
    if !(gamma > 0.0) {
        return Err(domain(
            "the kernel analysis needs a positive dephasing rate",
        ));
    }
    if !(0.0..=1.0).contains(&s) {
        return Err(domain(format!("s = {s} outside [0, 1]")));
    }
    let q = path.q(s).clamp(0.0, 1.0);
    let l = generator_matrix(inst.dim(), q, gamma);
    let (p, sm, kernel_dim) = kernel_and_resolvent(&l)?;
    Ok(SuperoperatorSample {
        s,
        l_matrix: l,
        p_matrix: p,
        s_matrix: sm,
        kernel_dim,
    })
}

struct Derivs {
    s: DMatrix<C64>,
    dp: DMatrix<C64>,
    ddp: DMatrix<C64>,
    ds: DMatrix<C64>,
}

fn combine(coeffs: &[(f64, &DMatrix<C64>)], scale: f64) -> DMatrix<C64> {
    let mut out = DMatrix::<C64>::zeros(4, 4);
    for (c, m) in coeffs {
        out += *m * C64::new(*c, 0.0);
    }
    out * C64::new(scale, 0.0)
}

/// Finite-difference derivatives of `P` and `S`. Central stencils inside,
/// second-order one-sided stencils within one step of an end; one
/// Richardson step in both cases.
fn derivatives(
    inst: &GroverInstance,
    path: &dyn SchedulePath,
    gamma: f64,
    s: f64,
) -> Result<Derivs> {
    let h = FD_STEP;
    let at = |x: f64| superoperator_sample(inst, path, gamma, x).map(|v| (v.p_matrix, v.s_matrix));
    if s - h >= 0.0 && s + h <= 1.0 {
        let (p0, s0) = at(s)?;
        let (pp1, sp1) = at(s + h)?;
        let (pm1, sm1) = at(s - h)?;
        let (pp2, sp2) = at(s + h / 2.0)?;
        let (pm2, sm2) = at(s - h / 2.0)?;
        let d1 = |a: &DMatrix<C64>, b: &DMatrix<C64>, step: f64| {
            combine(&[(1.0, a), (-1.0, b)], 0.5 / step)
        };
        let d2 = |a: &DMatrix<C64>, c: &DMatrix<C64>, b: &DMatrix<C64>, step: f64| {
            combine(&[(1.0, a), (-2.0, c), (1.0, b)], 1.0 / (step * step))
        };
        let rich = |coarse: DMatrix<C64>, fine: DMatrix<C64>| {
            combine(&[(4.0, &fine), (-1.0, &coarse)], 1.0 / 3.0)
        };
        let dp = rich(d1(&pp1, &pm1, h), d1(&pp2, &pm2, h / 2.0));
        let ddp = rich(d2(&pp1, &p0, &pm1, h), d2(&pp2, &p0, &pm2, h / 2.0));
        let ds = rich(d1(&sp1, &sm1, h), d1(&sp2, &sm2, h / 2.0));
        return Ok(Derivs { s: s0, dp, ddp, ds });
    }
    let dir = if s - h < 0.0 { 1.0 } else { -1.0 };
    if s + dir * 3.0 * h < 0.0 || s + dir * 3.0 * h > 1.0 {
        return Err(Error::Numerical(
            "finite-difference stencil does not fit in [0, 1]".into(),
        ));
    }
    let one_sided = |step: f64| -> Result<(DMatrix<C64>, DMatrix<C64>, DMatrix<C64>)> {
        let pts: Vec<(DMatrix<C64>, DMatrix<C64>)> = (0..4)
            .map(|k| at(s + dir * k as f64 * step))
            .collect::<Result<_>>()?;
        let (ps, ss): (Vec<DMatrix<C64>>, Vec<DMatrix<C64>>) = pts.into_iter().unzip();
        let d1 = |f: &[DMatrix<C64>]| {
            combine(
                &[(-3.0, &f[0]), (4.0, &f[1]), (-1.0, &f[2])],
                dir * 0.5 / step,
            )
        };
        let d2 = |f: &[DMatrix<C64>]| {
            combine(
                &[(2.0, &f[0]), (-5.0, &f[1]), (4.0, &f[2]), (-1.0, &f[3])],
                1.0 / (step * step),
            )
        };
        Ok((d1(&ps), d2(&ps), d1(&ss)))
    };
    let (dp_c, ddp_c, ds_c) = one_sided(h)?;
    let (dp_f, ddp_f, ds_f) = one_sided(h / 2.0)?;
    let rich = |coarse: &DMatrix<C64>, fine: &DMatrix<C64>| {
        combine(&[(4.0, fine), (-1.0, coarse)], 1.0 / 3.0)
    };
    let (_, s0) = at(s)?;
    Ok(Derivs {
        s: s0,
        dp: rich(&dp_c, &dp_f),
        ddp: rich(&ddp_c, &ddp_f),
        ds: rich(&ds_c, &ds_f),
    })
}

/// `C = ||S|| ||P'|| at s_end + ||S|| ||P'|| at 0 + integral of ||S' P' + S P''||`
/// over `[0, s_end]`.
pub fn adiabatic_constant_c(
    inst: &GroverInstance,
    path: &dyn SchedulePath,
    rule: RateRule,
    s_end: f64,
    norm: SuperNorm,
) -> Result<AdiabaticConstant> {
    if !(s_end > 0.0 && s_end <= 1.0) {
        return Err(domain(format!("s_end must lie in (0, 1], got {s_end}")));
    }
    let gamma = rule.rate(inst);
    let start = derivatives(inst, path, gamma, 0.0)?;
    let end = derivatives(inst, path, gamma, s_end)?;
    let boundary_start = norm_of(&start.s, norm) * norm_of(&start.dp, norm);
    let boundary_end = norm_of(&end.s, norm) * norm_of(&end.dp, norm);
    let mut failure = None;
    let breaks: Vec<f64> = if s_end > 0.5 {
        vec![0.0, 0.5, s_end]
    } else {
        vec![0.0, s_end]
    };
    let integral = integrate_with_breaks(
        |x| match derivatives(inst, path, gamma, x) {
            Ok(d) => norm_of(&(&d.ds * &d.dp + &d.s * &d.ddp), norm),
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        &breaks,
        QuadOptions {
            rel_tol: 1e-6,
            abs_tol: 1e-12,
            max_intervals: 2000,
        },
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    let integral = integral.value;
    Ok(AdiabaticConstant {
        value: boundary_start + boundary_end + integral,
        boundary_start,
        boundary_end,
        integral,
        gamma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedules::Schedule;

    #[test]
    fn kernel_projector_and_resolvent() {
        let inst = GroverInstance::new(4).unwrap();
        let sched = Schedule::linear();
        for &s in &[0.0, 0.3, 0.5, 1.0] {
            let x = superoperator_sample(&inst, &sched, 0.25, s).unwrap();
            assert_eq!(x.kernel_dim, 2);
            assert!(x.resolvent_residual() < 1e-9);
            assert!((&x.l_matrix * &x.p_matrix).camax() < 1e-12);
            assert!((&x.s_matrix * &x.p_matrix).camax() < 1e-12);
        }
    }

    #[test]
    fn induced_norm_of_identity_is_one() {
        let id = DMatrix::<C64>::identity(4, 4);
        assert!((induced_trace_norm(&id) - 1.0).abs() < 1e-12);
    }
}
