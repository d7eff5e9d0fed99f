use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};

use crate::error::{domain, Result};

pub type C64 = Complex<f64>;

/// A density matrix in the reduced (`2 x 2`) or full (`N x N`) space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: DMatrix<C64>,
}

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-9;
const POSITIVITY_TOL: f64 = 1e-9;

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(domain("density matrix must be square and non-empty"));
        }
        let rho = Self { m };
        let herm = rho.hermiticity_residual();
        if herm > HERMITIAN_TOL {
            return Err(domain(format!(
                "matrix is not Hermitian (residual {herm:e})"
            )));
        }
        let drift = (rho.trace() - 1.0).abs();
        if drift > TRACE_TOL {
            return Err(domain(format!("trace differs from 1 by {drift:e}")));
        }
        let min = rho.min_eigenvalue();
        if min < -POSITIVITY_TOL {
            return Err(domain(format!("matrix has negative eigenvalue {min:e}")));
        }
        Ok(rho)
    }

    pub(crate) fn from_matrix_unchecked(m: DMatrix<C64>) -> Self {
        Self { m }
    }

    /// `|v><v|` for a unit vector `v`.
    pub fn pure(v: &DVector<C64>) -> Result<Self> {
        let norm = v.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(domain(format!("state vector has norm {norm}")));
        }
        Ok(Self { m: v * v.adjoint() })
    }

    pub fn pure_real(v: &[f64]) -> Result<Self> {
        Self::pure(&DVector::from_iterator(
            v.len(),
            v.iter().map(|&x| C64::new(x, 0.0)),
        ))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            m: DMatrix::identity(dim, dim).map(|x: C64| x / dim as f64),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.m
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }

    pub fn purity(&self) -> f64 {
        self.m.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Largest entry of `|rho - rho^dagger|`.
    pub fn hermiticity_residual(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.m[(i, j)] - self.m[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        if self.dim() == 2 {
            let a = self.m[(0, 0)].re;
            let d = self.m[(1, 1)].re;
            let b = 0.5 * (self.m[(0, 1)] + self.m[(1, 0)].conj());
            let mean = 0.5 * (a + d);
            let r = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
            return vec![mean - r, mean + r];
        }
        let herm = (&self.m + self.m.adjoint()).map(|z| z * 0.5);
        let mut ev: Vec<f64> = SymmetricEigen::new(herm)
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// `Re tr(rho * op)`.
    pub fn expectation(&self, op: &DMatrix<C64>) -> f64 {
        let d = self.dim();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..d {
            for j in 0..d {
                acc += self.m[(i, j)] * op[(j, i)];
            }
        }
        acc.re
    }

    /// `<v|rho|v>` for a real vector.
    pub fn population(&self, v: &[f64]) -> f64 {
        let d = self.dim();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..d {
            if v[i] == 0.0 {
                continue;
            }
            for j in 0..d {
                acc += v[i] * self.m[(i, j)] * v[j];
            }
        }
        acc.re
    }

    /// Bloch vector of a `2 x 2` state in the frame `(|m>, -|m_perp>)`.
    pub fn bloch(&self) -> Option<[f64; 3]> {
        if self.dim() != 2 {
            return None;
        }
        let c = self.m[(0, 1)];
        Some([
            -2.0 * c.re,
            2.0 * c.im,
            self.m[(0, 0)].re - self.m[(1, 1)].re,
        ])
    }

    /// `V^T rho V` for a real isometry `V`.
    pub fn restrict(&self, basis: &DMatrix<f64>) -> Result<DensityMatrix> {
        if basis.nrows() != self.dim() {
            return Err(domain(
                "restriction basis does not match the state dimension",
            ));
        }
        let v = basis.map(|x| C64::new(x, 0.0));
        Ok(Self {
            m: v.transpose() * &self.m * v,
        })
    }

    /// `||rho - sigma||_1 / 2`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(domain(
                "trace distance between states of different dimension",
            ));
        }
        let diff = Self {
            m: &self.m - &other.m,
        };
        Ok(0.5 * diff.eigenvalues().iter().map(|x| x.abs()).sum::<f64>())
    }

    /// Uhlmann fidelity `(tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`.
    pub fn fidelity(&self, other: &DensityMatrix) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(domain("fidelity between states of different dimension"));
        }
        if self.dim() == 2 {
            let overlap: f64 = self.expectation(&other.m);
            // Determinants at rounding level are noise; their square root is not.
            let det = |m: &DMatrix<C64>| {
                let d = (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re;
                if d < 8.0 * f64::EPSILON {
                    0.0
                } else {
                    d
                }
            };
            return Ok((overlap + 2.0 * (det(&self.m) * det(&other.m)).sqrt()).clamp(0.0, 1.0));
        }
        let sqrt_rho = hermitian_sqrt(&self.m);
        let inner = &sqrt_rho * &other.m * &sqrt_rho;
        let ev = SymmetricEigen::new((&inner + inner.adjoint()).map(|z| z * 0.5)).eigenvalues;
        let floor = 8.0 * f64::EPSILON * self.dim() as f64 * ev.amax();
        let root: f64 = ev
            .iter()
            .map(|&x| if x > floor { x.sqrt() } else { 0.0 })
            .sum();
        Ok((root * root).clamp(0.0, 1.0))
    }
}

fn hermitian_sqrt(m: &DMatrix<C64>) -> DMatrix<C64> {
    let eig = SymmetricEigen::new((m + m.adjoint()).map(|z| z * 0.5));
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|x| C64::new(x.max(0.0).sqrt(), 0.0)));
    &eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub(crate) fn trace_norm_hermitian(m: &DMatrix<C64>) -> f64 {
    DensityMatrix::from_matrix_unchecked(m.clone())
        .eigenvalues()
        .iter()
        .map(|x| x.abs())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        let bad = DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(0.5, 0.0),
                C64::new(0.0, 0.1),
                C64::new(0.0, 0.1),
                C64::new(0.5, 0.0),
            ],
        );
        assert!(DensityMatrix::new(bad).is_err());
        let neg = DMatrix::from_diagonal(&DVector::from_vec(vec![
            C64::new(1.5, 0.0),
            C64::new(-0.5, 0.0),
        ]));
        assert!(DensityMatrix::new(neg).is_err());
        assert!(DensityMatrix::new(DensityMatrix::maximally_mixed(3).into_matrix()).is_ok());
    }

    #[test]
    fn fidelity_forms_agree() {
        let a = DensityMatrix::pure_real(&[0.6, 0.8]).unwrap();
        let b = DensityMatrix::maximally_mixed(2);
        let f2 = a.fidelity(&b).unwrap();
        assert!((f2 - 0.5).abs() < 1e-15);
        // Same states embedded in three dimensions use the general route.
        let a3 = DensityMatrix::pure_real(&[0.6, 0.8, 0.0]).unwrap();
        let mut m = DMatrix::zeros(3, 3);
        m[(0, 0)] = C64::new(0.5, 0.0);
        m[(1, 1)] = C64::new(0.5, 0.0);
        let b3 = DensityMatrix::new(m).unwrap();
        assert!((a3.fidelity(&b3).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn trace_distance_orthogonal() {
        let a = DensityMatrix::pure_real(&[1.0, 0.0]).unwrap();
        let b = DensityMatrix::pure_real(&[0.0, 1.0]).unwrap();
        assert!((a.trace_distance(&b).unwrap() - 1.0).abs() < 1e-15);
    }
}
