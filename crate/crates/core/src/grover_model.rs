//! Spectral data of the Grover interpolation Hamiltonian.
//!
//! Reduced objects live in the basis `(|m>, |m_perp>)`, where `|m_perp>` is
//! the normalised uniform superposition of unmarked items. Bloch vectors use
//! the frame `(|m>, -|m_perp>)`, in which the Hamiltonian's x-component is
//! non-negative.

use nalgebra::{DMatrix, Matrix2, Vector2};
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::lindblad_sim::DensityMatrix;

/// Largest Hilbert-space dimension accepted by full-space routines.
pub const FULL_SPACE_CAP: usize = 256;

const MAX_QUBITS: u32 = 48;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GroverInstance {
    n_qubits: u32,
    marked: usize,
}

/// Everything known in closed form at a single value of `q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralSample {
    pub q: f64,
    pub gap: f64,
    pub ground_energy: f64,
    pub excited_energy: f64,
    pub bloch: [f64; 3],
    pub ground_state: [f64; 2],
    /// `|g><g|`, row-major.
    pub ground_projector: [[f64; 2]; 2],
    pub angular_velocity: f64,
}

pub(crate) fn gap_sq(n: f64, q: f64) -> f64 {
    (1.0 - 2.0 * q).powi(2) + 4.0 * q * (1.0 - q) / n
}

pub(crate) fn gap_raw(n: f64, q: f64) -> f64 {
    gap_sq(n, q).sqrt()
}

/// `(a, b, d)` of the real symmetric reduced Hamiltonian `[[a, b], [b, d]]`.
pub(crate) fn reduced_entries(n: f64, q: f64) -> (f64, f64, f64) {
    let p = 1.0 - q;
    (p * (n - 1.0) / n, -p * (n - 1.0).sqrt() / n, q + p / n)
}

pub(crate) fn ground_state_raw(n: f64, q: f64) -> [f64; 2] {
    let (a, b, d) = reduced_entries(n, q);
    let g = gap_raw(n, q);
    // (d - E0, -b) never vanishes on [0, 1]; both entries are >= 0.
    let v0 = 0.5 * ((d - a) + g);
    let v1 = -b;
    let norm = v0.hypot(v1);
    [v0 / norm, v1 / norm]
}

pub(crate) fn bloch_raw(n: f64, q: f64) -> [f64; 3] {
    [
        2.0 * (1.0 - q) * (n - 1.0).sqrt() / n,
        0.0,
        (n - 2.0) / n - 2.0 * q * (n - 1.0) / n,
    ]
}

pub(crate) fn angular_velocity_raw(n: f64, q: f64) -> f64 {
    2.0 / gap_sq(n, q) * (1.0 / n - 1.0 / (n * n)).sqrt()
}

fn check_q(q: f64) -> Result<()> {
    if (0.0..=1.0).contains(&q) {
        Ok(())
    } else {
        Err(domain(format!(
            "interpolation parameter q = {q} outside [0, 1]"
        )))
    }
}

impl GroverInstance {
    /// Instance with the marked item at index 0.
    pub fn new(n_qubits: u32) -> Result<Self> {
        Self::with_marked(n_qubits, 0)
    }

    pub fn with_marked(n_qubits: u32, marked: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(domain(format!(
                "n_qubits must lie in 1..={MAX_QUBITS}, got {n_qubits}"
            )));
        }
        if (marked as u64) >= (1u64 << n_qubits) {
            return Err(domain(format!(
                "marked index {marked} out of range for {n_qubits} qubits"
            )));
        }
        Ok(Self { n_qubits, marked })
    }

    pub fn n_qubits(&self) -> u32 {
        self.n_qubits
    }

    /// Search-space size `N = 2^n` as a float.
    pub fn dim(&self) -> f64 {
        (1u64 << self.n_qubits) as f64
    }

    pub fn marked(&self) -> usize {
        self.marked
    }

    /// Minimum gap `1/sqrt(N)`, reached at `q = 1/2`.
    pub fn g_min(&self) -> f64 {
        1.0 / self.dim().sqrt()
    }

    pub fn gap(&self, q: f64) -> Result<f64> {
        check_q(q)?;
        Ok(gap_raw(self.dim(), q))
    }

    pub fn hamiltonian_reduced(&self, q: f64) -> Result<Matrix2<f64>> {
        check_q(q)?;
        let (a, b, d) = reduced_entries(self.dim(), q);
        Ok(Matrix2::new(a, b, b, d))
    }

    pub fn eigenvalues(&self, q: f64) -> Result<(f64, f64)> {
        let g = self.gap(q)?;
        Ok((0.5 * (1.0 - g), 0.5 * (1.0 + g)))
    }

    /// Ground state with non-negative components (first one strictly positive
    /// except where the state is `|m_perp>`).
    pub fn ground_state(&self, q: f64) -> Result<Vector2<f64>> {
        check_q(q)?;
        let v = ground_state_raw(self.dim(), q);
        Ok(Vector2::new(v[0], v[1]))
    }

    /// Excited state `(v1, -v0)`, continuous in `q`.
    pub fn excited_state(&self, q: f64) -> Result<Vector2<f64>> {
        let g = self.ground_state(q)?;
        Ok(Vector2::new(g[1], -g[0]))
    }

    pub fn ground_projector(&self, q: f64) -> Result<Matrix2<f64>> {
        let g = self.ground_state(q)?;
        Ok(g * g.transpose())
    }

    /// Bloch vector of the Hamiltonian, `H = (I + r.sigma)/2`; `|r| = g`.
    pub fn bloch_vector(&self, q: f64) -> Result<[f64; 3]> {
        check_q(q)?;
        Ok(bloch_raw(self.dim(), q))
    }

    /// Rate at which the unit Bloch vector turns, `|d r_hat / dq|`.
    pub fn angular_velocity(&self, q: f64) -> Result<f64> {
        check_q(q)?;
        Ok(angular_velocity_raw(self.dim(), q))
    }

    pub fn spectral(&self, q: f64) -> Result<SpectralSample> {
        check_q(q)?;
        let n = self.dim();
        let gap = gap_raw(n, q);
        let g = ground_state_raw(n, q);
        Ok(SpectralSample {
            q,
            gap,
            ground_energy: 0.5 * (1.0 - gap),
            excited_energy: 0.5 * (1.0 + gap),
            bloch: bloch_raw(n, q),
            ground_state: g,
            ground_projector: [[g[0] * g[0], g[0] * g[1]], [g[0] * g[1], g[1] * g[1]]],
            angular_velocity: angular_velocity_raw(n, q),
        })
    }

    /// The uniform superposition in the reduced basis.
    pub fn initial_state_reduced(&self) -> Vector2<f64> {
        let n = self.dim();
        Vector2::new(1.0 / n.sqrt(), ((n - 1.0) / n).sqrt())
    }

    fn full_dim(&self, cap: usize) -> Result<usize> {
        let dim = 1usize << self.n_qubits;
        if dim > cap {
            return Err(Error::DimensionCap { dim, cap });
        }
        Ok(dim)
    }

    /// Full `N x N` Hamiltonian in the computational basis.
    pub fn hamiltonian_full(&self, q: f64) -> Result<DMatrix<f64>> {
        self.hamiltonian_full_capped(q, FULL_SPACE_CAP)
    }

    pub fn hamiltonian_full_capped(&self, q: f64, cap: usize) -> Result<DMatrix<f64>> {
        check_q(q)?;
        let dim = self.full_dim(cap)?;
        let n = dim as f64;
        let mut h = DMatrix::from_element(dim, dim, -(1.0 - q) / n);
        for i in 0..dim {
            h[(i, i)] += 1.0;
        }
        h[(self.marked, self.marked)] -= q;
        Ok(h)
    }

    /// Columns `|m>` and `|m_perp>` embedded in the computational basis.
    pub fn reduced_basis_full(&self) -> Result<DMatrix<f64>> {
        let dim = self.full_dim(FULL_SPACE_CAP)?;
        let mut v = DMatrix::zeros(dim, 2);
        let c = 1.0 / ((dim - 1) as f64).sqrt();
        for i in 0..dim {
            if i == self.marked {
                v[(i, 0)] = 1.0;
            } else {
                v[(i, 1)] = c;
            }
        }
        Ok(v)
    }

    /// `<H^2> - <H>^2` for a reduced or full density matrix.
    pub fn energy_variance(&self, rho: &DensityMatrix, q: f64) -> Result<f64> {
        let h = if rho.dim() == 2 {
            let m = self.hamiltonian_reduced(q)?;
            DMatrix::from_fn(2, 2, |i, j| m[(i, j)])
        } else if rho.dim() == 1usize << self.n_qubits {
            self.hamiltonian_full(q)?
        } else {
            return Err(domain(format!(
                "density matrix of dimension {} does not fit this instance",
                rho.dim()
            )));
        };
        let hc = h.map(|x| nalgebra::Complex::new(x, 0.0));
        let e1 = rho.expectation(&hc);
        let e2 = rho.expectation(&(&hc * &hc));
        Ok((e2 - e1 * e1).max(0.0))
    }
}
