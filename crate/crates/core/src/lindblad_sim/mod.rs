//! Dephasing Lindblad dynamics along a schedule.
//!
//! The equation solved is `(1/T) d rho/ds = L_{q(s)}(rho)` with dephasing
//! applied in the instantaneous eigenbasis of `H(q(s))`.

mod density;
mod generator;

use std::io::Write;

use nalgebra::{DMatrix, Matrix2, SymmetricEigen};
use serde::{Deserialize, Serialize};

pub(crate) use density::trace_norm_hermitian;
pub use density::{DensityMatrix, C64};
pub(crate) use generator::reduced_generator;
pub use generator::{build_general_dephasing, liouvillian_apply, GeneralDephasing};

use crate::error::{config, domain, Error, Result};
use crate::grover_model::{
    gap_raw, ground_state_raw, reduced_entries, GroverInstance, FULL_SPACE_CAP,
};
use crate::numeric::Dop853;
use crate::schedules::SchedulePath;

/// How the dephasing rate depends on the instantaneous spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DephasingModel {
    /// Fixed rate; zero gives unitary evolution.
    Constant { gamma: f64 },
    /// Rate `kappa * g(q)`.
    GapTracking { kappa: f64 },
}

impl DephasingModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DephasingModel::Constant { gamma } if gamma.is_finite() && gamma >= 0.0 => Ok(()),
            DephasingModel::GapTracking { kappa } if kappa.is_finite() && kappa > 0.0 => Ok(()),
            other => Err(config(format!("invalid dephasing model {other:?}"))),
        }
    }

    pub fn rate(&self, inst: &GroverInstance, q: f64) -> f64 {
        match *self {
            DephasingModel::Constant { gamma } => gamma,
            DephasingModel::GapTracking { kappa } => kappa * gap_raw(inst.dim(), q.clamp(0.0, 1.0)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Physical run time `T`.
    pub total_time: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub n_samples: usize,
}

impl SimConfig {
    pub fn new(total_time: f64) -> Self {
        Self {
            total_time,
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            n_samples: 513,
        }
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_samples(mut self, n_samples: usize) -> Self {
        self.n_samples = n_samples;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.total_time.is_finite() && self.total_time > 0.0) {
            return Err(config(format!(
                "total time must be positive, got {}",
                self.total_time
            )));
        }
        for (name, v) in [("rel_tol", self.rel_tol), ("abs_tol", self.abs_tol)] {
            if !(v > 0.0 && v < 1e-2) {
                return Err(config(format!("{name} must lie in (0, 1e-2), got {v}")));
            }
        }
        if self.n_samples < 2 {
            return Err(config("n_samples must be at least 2"));
        }
        Ok(())
    }

    fn grid(&self) -> Vec<f64> {
        let n = self.n_samples;
        (0..n)
            .map(|i| {
                if i + 1 == n {
                    1.0
                } else {
                    i as f64 / (n - 1) as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySample {
    pub s: f64,
    pub q: f64,
    pub rho: DensityMatrix,
    /// Population of the instantaneous ground state.
    pub fidelity: f64,
    /// Bloch vector of the state restricted to the two-level subspace.
    pub bloch: [f64; 3],
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    pub n_steps: usize,
    pub n_rejected: usize,
    pub n_evaluations: usize,
    pub max_trace_drift: f64,
    pub max_hermiticity_residual: f64,
    pub min_eigenvalue: f64,
}

impl Diagnostics {
    /// Worst-case combination of two reports.
    pub fn merge(&self, other: &Diagnostics) -> Diagnostics {
        Diagnostics {
            n_steps: self.n_steps + other.n_steps,
            n_rejected: self.n_rejected + other.n_rejected,
            n_evaluations: self.n_evaluations + other.n_evaluations,
            max_trace_drift: self.max_trace_drift.max(other.max_trace_drift),
            max_hermiticity_residual: self
                .max_hermiticity_residual
                .max(other.max_hermiticity_residual),
            min_eigenvalue: self.min_eigenvalue.min(other.min_eigenvalue),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub diagnostics: Diagnostics,
    pub total_time: f64,
}

impl Trajectory {
    pub fn last(&self) -> &TrajectorySample {
        self.samples.last().expect("trajectories are never empty")
    }

    pub fn final_fidelity(&self) -> f64 {
        self.last().fidelity
    }

    /// True when the trajectory reached `s = 1`.
    pub fn is_complete(&self) -> bool {
        self.samples.last().is_some_and(|x| x.s == 1.0)
    }

    /// Writes the trajectory CSV (reduced-space columns).
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "s,q,fidelity,rho_00_re,rho_01_re,rho_01_im,rho_11_re,bloch_x,bloch_y,bloch_z"
        )?;
        for x in &self.samples {
            let r = if x.rho.dim() == 2 {
                x.rho.clone()
            } else {
                restrict_to_subspace(&x.rho)?
            };
            let m = r.matrix();
            let cols = [
                x.s,
                x.q,
                x.fidelity,
                m[(0, 0)].re,
                m[(0, 1)].re,
                m[(0, 1)].im,
                m[(1, 1)].re,
                x.bloch[0],
                x.bloch[1],
                x.bloch[2],
            ];
            let line: Vec<String> = cols
                .iter()
                .map(|v| crate::experiments::fmt_num(*v))
                .collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    /// Bloch-only export, `s,bloch_x,bloch_y,bloch_z`.
    pub fn write_bloch_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "s,bloch_x,bloch_y,bloch_z")?;
        for x in &self.samples {
            let cols = [x.s, x.bloch[0], x.bloch[1], x.bloch[2]];
            let line: Vec<String> = cols
                .iter()
                .map(|v| crate::experiments::fmt_num(*v))
                .collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }
}

fn restrict_to_subspace(rho: &DensityMatrix) -> Result<DensityMatrix> {
    let d = rho.dim();
    let n_qubits = d.trailing_zeros();
    if d < 2 || !d.is_power_of_two() {
        return Err(domain("full-space state has a non power-of-two dimension"));
    }
    let inst = GroverInstance::new(n_qubits)?;
    rho.restrict(&inst.reduced_basis_full()?)
}

/// Ground-state population `<g(q)|rho|g(q)>` of a reduced state.
pub fn fidelity(rho: &DensityMatrix, inst: &GroverInstance, q: f64) -> Result<f64> {
    if rho.dim() != 2 {
        return Err(domain("fidelity expects a reduced 2 x 2 state"));
    }
    let g = inst.ground_state(q)?;
    Ok(rho.population(&[g[0], g[1]]))
}

/// Leakage `1 - fidelity` at `s = 1`.
pub fn tunneling_final(traj: &Trajectory) -> Result<f64> {
    if !traj.is_complete() {
        return Err(domain("trajectory does not reach s = 1"));
    }
    Ok(1.0 - traj.final_fidelity())
}

fn pack(m: &DMatrix<C64>, y: &mut [f64]) {
    for (k, z) in m.iter().enumerate() {
        y[2 * k] = z.re;
        y[2 * k + 1] = z.im;
    }
}

fn unpack(y: &[f64], d: usize) -> DMatrix<C64> {
    DMatrix::from_iterator(d, d, (0..d * d).map(|k| C64::new(y[2 * k], y[2 * k + 1])))
}

/// `(rho + rho^dagger)/2` on the packed column-major layout.
fn resymmetrize(y: &mut [f64], d: usize) -> bool {
    let mut changed = false;
    for j in 0..d {
        for i in 0..=j {
            let a = 2 * (i + d * j);
            let b = 2 * (j + d * i);
            if i == j {
                if y[a + 1] != 0.0 {
                    y[a + 1] = 0.0;
                    changed = true;
                }
                continue;
            }
            let re = 0.5 * (y[a] + y[b]);
            let im = 0.5 * (y[a + 1] - y[b + 1]);
            if y[a] != re || y[b] != re || y[a + 1] != im || y[b + 1] != -im {
                changed = true;
            }
            y[a] = re;
            y[b] = re;
            y[a + 1] = im;
            y[b + 1] = -im;
        }
    }
    changed
}

fn diagnostics_for(samples: &[TrajectorySample], stats: crate::numeric::OdeStats) -> Diagnostics {
    let mut d = Diagnostics {
        n_steps: stats.accepted,
        n_rejected: stats.rejected,
        n_evaluations: stats.evaluations,
        max_trace_drift: 0.0,
        max_hermiticity_residual: 0.0,
        min_eigenvalue: f64::INFINITY,
    };
    for x in samples {
        d.max_trace_drift = d.max_trace_drift.max((x.rho.trace() - 1.0).abs());
        d.max_hermiticity_residual = d.max_hermiticity_residual.max(x.rho.hermiticity_residual());
        d.min_eigenvalue = d.min_eigenvalue.min(x.rho.min_eigenvalue());
    }
    d
}

/// Integrates from the uniform superposition in the reduced space.
pub fn integrate(
    inst: &GroverInstance,
    path: &dyn SchedulePath,
    model: &DephasingModel,
    cfg: &SimConfig,
) -> Result<Trajectory> {
    let psi = inst.initial_state_reduced();
    let rho0 = DensityMatrix::pure_real(&[psi[0], psi[1]])?;
    integrate_from(inst, path, model, cfg, &rho0)
}

/// Reduced-space integration from an arbitrary initial state.
pub fn integrate_from(
    inst: &GroverInstance,
    path: &dyn SchedulePath,
    model: &DephasingModel,
    cfg: &SimConfig,
    rho0: &DensityMatrix,
) -> Result<Trajectory> {
    cfg.validate()?;
    model.validate()?;
    if rho0.dim() != 2 {
        return Err(domain("reduced integration needs a 2 x 2 initial state"));
    }
    let n = inst.dim();
    let t = cfg.total_time;
    let rhs = |s: f64, y: &[f64], dy: &mut [f64]| {
        let q = path.q(s).clamp(0.0, 1.0);
        let (a, b, d) = reduced_entries(n, q);
        let h = Matrix2::new(a, b, b, d);
        let g = ground_state_raw(n, q);
        let p0 = Matrix2::new(g[0] * g[0], g[0] * g[1], g[0] * g[1], g[1] * g[1]);
        let rho = Matrix2::new(
            C64::new(y[0], y[1]),
            C64::new(y[4], y[5]),
            C64::new(y[2], y[3]),
            C64::new(y[6], y[7]),
        );
        let out = reduced_generator(&h, &p0, model.rate(inst, q), &rho);
        // column-major: (0,0), (1,0), (0,1), (1,1)
        let order = [out[(0, 0)], out[(1, 0)], out[(0, 1)], out[(1, 1)]];
        for (k, z) in order.iter().enumerate() {
            dy[2 * k] = t * z.re;
            dy[2 * k + 1] = t * z.im;
        }
    };
    let mut y0 = vec![0.0; 8];
    pack(rho0.matrix(), &mut y0);
    let grid = cfg.grid();
    let solver = Dop853::with_tolerances(cfg.rel_tol, cfg.abs_tol);
    let (ys, stats) = solver
        .solve(rhs, 0.0, 1.0, &y0, &grid, |y: &mut [f64]| {
            resymmetrize(y, 2)
        })
        .map_err(|e| Error::Integration {
            s: e.t_last,
            reason: e.reason,
        })?;
    let samples: Vec<TrajectorySample> = grid
        .iter()
        .zip(ys)
        .map(|(&s, y)| {
            let q = path.q(s).clamp(0.0, 1.0);
            let rho = DensityMatrix::from_matrix_unchecked(unpack(&y, 2));
            let g = ground_state_raw(n, q);
            TrajectorySample {
                s,
                q,
                fidelity: rho.population(&g),
                bloch: rho.bloch().expect("2 x 2"),
                rho,
            }
        })
        .collect();
    let diagnostics = diagnostics_for(&samples, stats);
    Ok(Trajectory {
        samples,
        diagnostics,
        total_time: t,
    })
}

/// Full-space integration (oracle path) with projectors onto the ground
/// state, the excited state of the two-level block and the degenerate
/// complement.
pub fn integrate_full(
    inst: &GroverInstance,
    path: &dyn SchedulePath,
    model: &DephasingModel,
    cfg: &SimConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    model.validate()?;
    let dim = 1usize << inst.n_qubits();
    if dim > FULL_SPACE_CAP {
        return Err(Error::DimensionCap {
            dim,
            cap: FULL_SPACE_CAP,
        });
    }
    let n = inst.dim();
    let t = cfg.total_time;
    let basis = inst.reduced_basis_full()?;
    let basis_c = basis.map(|x| C64::new(x, 0.0));
    let p_sub = &basis_c * basis_c.transpose();
    let p_deg = DMatrix::<C64>::identity(dim, dim) - &p_sub;

    let ground_full = |q: f64| -> DMatrix<C64> {
        let h = inst.hamiltonian_full(q).expect("q clamped to [0, 1]");
        let eig = SymmetricEigen::new(h);
        let imin = eig.eigenvalues.imin();
        let v = eig.eigenvectors.column(imin).map(|x| C64::new(x, 0.0));
        &v * v.transpose()
    };

    let rhs = |s: f64, y: &[f64], dy: &mut [f64]| {
        let q = path.q(s).clamp(0.0, 1.0);
        let h = inst
            .hamiltonian_full(q)
            .expect("q clamped to [0, 1]")
            .map(|x| C64::new(x, 0.0));
        let rho = unpack(y, dim);
        let comm = &h * &rho - &rho * &h;
        let mut out = comm.map(|z| C64::new(z.im, -z.re));
        let rate = model.rate(inst, q);
        if rate != 0.0 {
            let p0 = ground_full(q);
            let p1 = &p_sub - &p0;
            let diag = &p0 * &rho * &p0 + &p1 * &rho * &p1 + &p_deg * &rho * &p_deg;
            out -= (rho - diag) * C64::new(rate, 0.0);
        }
        pack(&out.map(|z| z * t), dy);
    };

    let psi = DMatrix::from_element(dim, 1, C64::new(1.0 / n.sqrt(), 0.0));
    let rho0 = &psi * psi.adjoint();
    let mut y0 = vec![0.0; 2 * dim * dim];
    pack(&rho0, &mut y0);
    let grid = cfg.grid();
    let solver = Dop853::with_tolerances(cfg.rel_tol, cfg.abs_tol);
    let (ys, stats) = solver
        .solve(rhs, 0.0, 1.0, &y0, &grid, |y: &mut [f64]| {
            resymmetrize(y, dim)
        })
        .map_err(|e| Error::Integration {
            s: e.t_last,
            reason: e.reason,
        })?;
    let mut samples = Vec::with_capacity(grid.len());
    for (&s, y) in grid.iter().zip(ys) {
        let q = path.q(s).clamp(0.0, 1.0);
        let rho = DensityMatrix::from_matrix_unchecked(unpack(&y, dim));
        let reduced = rho.restrict(&basis)?;
        let g = ground_state_raw(n, q);
        let g_full: Vec<f64> = (0..dim)
            .map(|i| basis[(i, 0)] * g[0] + basis[(i, 1)] * g[1])
            .collect();
        samples.push(TrajectorySample {
            s,
            q,
            fidelity: rho.population(&g_full),
            bloch: reduced.bloch().expect("2 x 2"),
            rho,
        });
    }
    let diagnostics = diagnostics_for(&samples, stats);
    Ok(Trajectory {
        samples,
        diagnostics,
        total_time: t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedules::Schedule;

    #[test]
    fn config_validation() {
        assert!(SimConfig::new(0.0).validate().is_err());
        assert!(SimConfig::new(1.0)
            .with_tolerances(0.1, 1e-12)
            .validate()
            .is_err());
        assert!(SimConfig::new(1.0).with_samples(1).validate().is_err());
        assert!(DephasingModel::Constant { gamma: -1.0 }.validate().is_err());
        assert!(DephasingModel::GapTracking { kappa: 0.0 }
            .validate()
            .is_err());
    }

    #[test]
    fn starts_in_ground_state() {
        let inst = GroverInstance::new(4).unwrap();
        let traj = integrate(
            &inst,
            &Schedule::linear(),
            &DephasingModel::Constant { gamma: 0.1 },
            &SimConfig::new(5.0),
        )
        .unwrap();
        assert!((traj.samples[0].fidelity - 1.0).abs() < 1e-12);
        assert_eq!(traj.samples.len(), 513);
        assert_eq!(traj.last().s, 1.0);
        assert!(traj.samples.windows(2).all(|w| w[1].s > w[0].s));
    }

    #[test]
    fn resymmetrize_packed() {
        let mut y = vec![0.5, 1e-3, 0.1, 0.2, 0.3, 0.0, 0.5, 0.0];
        assert!(resymmetrize(&mut y, 2));
        let m = unpack(&y, 2);
        assert_eq!(m[(0, 0)].im, 0.0);
        assert_eq!(m[(0, 1)], m[(1, 0)].conj());
    }
}
