use nalgebra::{DMatrix, Matrix2};

use crate::error::{domain, Result};
use crate::grover_model::{gap_sq, ground_state_raw, reduced_entries, GroverInstance};
use crate::lindblad_sim::{
    reduced_generator, trace_norm_hermitian, DensityMatrix, DephasingModel, Trajectory,
};
use crate::numeric::{integrate_with_breaks, QuadOptions};
use crate::schedules::rc_runtime;

/// Geometric Mandelstam-Tamm time along the adiabatic path,
/// `2 * integral_0^1 dq / g(q)^2`.
pub fn mt_path_qsl(inst: &GroverInstance) -> Result<f64> {
    let n = inst.dim();
    let r = integrate_with_breaks(
        |q| 1.0 / gap_sq(n, q),
        &[0.0, 0.5, 1.0],
        QuadOptions::with_rel_tol(1e-13),
    )?;
    Ok(2.0 * r.value)
}

/// `T_RC / T_QSL`, which equals `1 / (2 c)`.
pub fn rc_qsl_ratio(inst: &GroverInstance, c: f64) -> Result<f64> {
    Ok(rc_runtime(inst, c)? / mt_path_qsl(inst)?)
}

fn reduced_state(inst: &GroverInstance, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.dim() == 2 {
        Ok(rho.clone())
    } else {
        rho.restrict(&inst.reduced_basis_full()?)
    }
}

/// Deffner-Lutz bound `sin^2(Bures angle(rho(0), rho(1)))` over the time
/// average of `||L(rho)||_1`. Returns 0 when the endpoints coincide.
pub fn deffner_lutz_qsl(
    traj: &Trajectory,
    inst: &GroverInstance,
    model: &DephasingModel,
) -> Result<f64> {
    if traj.samples.len() < 2 || !traj.is_complete() {
        return Err(domain("speed limit needs a complete trajectory"));
    }
    let n = inst.dim();
    let first = reduced_state(inst, &traj.samples[0].rho)?;
    let last = reduced_state(inst, &traj.last().rho)?;
    if first.trace_distance(&last)? < 1e-14 {
        return Ok(0.0);
    }
    let fid = first.fidelity(&last)?;
    let angle = fid.sqrt().clamp(0.0, 1.0).acos();
    let numerator = angle.sin().powi(2);

    let mut rates = Vec::with_capacity(traj.samples.len());
    for x in &traj.samples {
        let rho = reduced_state(inst, &x.rho)?;
        let m = rho.matrix();
        let r = Matrix2::new(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
        let (a, b, d) = reduced_entries(n, x.q);
        let g = ground_state_raw(n, x.q);
        let p0 = Matrix2::new(g[0] * g[0], g[0] * g[1], g[0] * g[1], g[1] * g[1]);
        let out = reduced_generator(&Matrix2::new(a, b, b, d), &p0, model.rate(inst, x.q), &r);
        let herm = DMatrix::from_fn(2, 2, |i, j| 0.5 * (out[(i, j)] + out[(j, i)].conj()));
        rates.push((x.s, trace_norm_hermitian(&herm)));
    }
    // trapezoid rule in s gives the time average directly
    let avg: f64 = rates
        .windows(2)
        .map(|w| 0.5 * (w[1].1 + w[0].1) * (w[1].0 - w[0].0))
        .sum();
    if avg <= 0.0 {
        return Ok(0.0);
    }
    Ok(numerator / avg)
}
