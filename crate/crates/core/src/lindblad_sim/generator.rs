//! Dephasing generators.

use nalgebra::{DMatrix, Matrix2, SymmetricEigen};

use super::density::{DensityMatrix, C64};
use crate::error::{config, domain, Result};
use crate::grover_model::GroverInstance;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// `-i[H, rho] - rate * (P0 rho P1 + P1 rho P0)` for real `H` and ground
/// projector `P0`.
pub(crate) fn reduced_generator(
    h: &Matrix2<f64>,
    p0: &Matrix2<f64>,
    rate: f64,
    rho: &Matrix2<C64>,
) -> Matrix2<C64> {
    let hc = h.map(c);
    let comm = hc * rho - rho * hc;
    let mut out = comm.map(|z| C64::new(z.im, -z.re));
    if rate != 0.0 {
        let pc = p0.map(c);
        let p_rho = pc * rho;
        let rho_p = rho * pc;
        let off = p_rho + rho_p - (p_rho * pc) * c(2.0);
        out -= off * c(rate);
    }
    out
}

/// Applies the reduced dephasing Lindbladian at interpolation point `q`.
///
/// The output is the time derivative before the `1/T` rescaling.
pub fn liouvillian_apply(
    inst: &GroverInstance,
    rho: &DensityMatrix,
    q: f64,
    rate: f64,
) -> Result<DMatrix<C64>> {
    if rho.dim() != 2 {
        return Err(domain("liouvillian_apply acts on the reduced 2 x 2 space"));
    }
    if !(rate >= 0.0 && rate.is_finite()) {
        return Err(domain(format!(
            "dephasing rate must be non-negative, got {rate}"
        )));
    }
    let h = inst.hamiltonian_reduced(q)?;
    let p0 = inst.ground_projector(q)?;
    let m = rho.matrix();
    let r = Matrix2::new(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let out = reduced_generator(&h, &p0, rate, &r);
    Ok(DMatrix::from_fn(2, 2, |i, j| out[(i, j)]))
}

/// `rho -> -i[H, rho] + 2 sum_ab g_ab P_a rho P_b - sum_a g_aa {P_a, rho}`.
#[derive(Debug, Clone)]
pub struct GeneralDephasing {
    h: DMatrix<C64>,
    projectors: Vec<DMatrix<C64>>,
    rates: DMatrix<C64>,
}

/// Validates the projector family and the rate matrix and builds the map.
pub fn build_general_dephasing(
    h: &DMatrix<f64>,
    projectors: &[DMatrix<f64>],
    rates: &DMatrix<C64>,
) -> Result<GeneralDephasing> {
    let d = h.nrows();
    if h.ncols() != d {
        return Err(config("Hamiltonian must be square"));
    }
    let k = projectors.len();
    if k == 0 || rates.nrows() != k || rates.ncols() != k {
        return Err(config(format!(
            "rate matrix must be {k} x {k} for {k} projectors"
        )));
    }
    const TOL: f64 = 1e-10;
    let mut sum = DMatrix::<f64>::zeros(d, d);
    for (a, pa) in projectors.iter().enumerate() {
        if pa.nrows() != d || pa.ncols() != d {
            return Err(config(format!("projector {a} has the wrong shape")));
        }
        if (pa * pa - pa).amax() > TOL || (pa - pa.transpose()).amax() > TOL {
            return Err(config(format!(
                "projector {a} is not an orthogonal projector"
            )));
        }
        for (b, pb) in projectors.iter().enumerate().skip(a + 1) {
            if (pa * pb).amax() > TOL {
                return Err(config(format!(
                    "projectors {a} and {b} are not mutually orthogonal"
                )));
            }
        }
        sum += pa;
    }
    if (sum - DMatrix::<f64>::identity(d, d)).amax() > TOL {
        return Err(config("projectors do not resolve the identity"));
    }
    if (rates - rates.adjoint()).iter().any(|z| z.norm() > TOL) {
        return Err(config("rate matrix is not Hermitian"));
    }
    let ev = SymmetricEigen::new(rates.clone()).eigenvalues;
    let scale = ev.amax().max(1.0);
    if ev.iter().any(|&x| x < -TOL * scale) {
        return Err(config("rate matrix is not positive semidefinite"));
    }
    Ok(GeneralDephasing {
        h: h.map(c),
        projectors: projectors.iter().map(|p| p.map(c)).collect(),
        rates: rates.clone(),
    })
}

impl GeneralDephasing {
    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    pub fn apply(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let comm = &self.h * rho - rho * &self.h;
        let mut out = comm.map(|z| C64::new(z.im, -z.re));
        let left: Vec<DMatrix<C64>> = self.projectors.iter().map(|p| p * rho).collect();
        for (a, pa_rho) in left.iter().enumerate() {
            for (b, pb) in self.projectors.iter().enumerate() {
                let g = self.rates[(a, b)];
                if g != c(0.0) {
                    out += pa_rho * pb * (g * 2.0);
                }
            }
            let gaa = self.rates[(a, a)];
            if gaa != c(0.0) {
                let pa = &self.projectors[a];
                out -= (pa_rho + rho * pa) * gaa;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ground_projector_is_stationary() {
        let inst = GroverInstance::new(4).unwrap();
        for &q in &[0.0, 0.3, 0.5, 1.0] {
            let g = inst.ground_state(q).unwrap();
            let rho = DensityMatrix::pure_real(&[g[0], g[1]]).unwrap();
            let out = liouvillian_apply(&inst, &rho, q, 0.7).unwrap();
            assert!(out.camax() < 1e-15, "q={q}");
        }
    }

    #[test]
    fn rejects_bad_projectors() {
        let h = DMatrix::<f64>::identity(2, 2);
        let p = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let rates = DMatrix::<C64>::identity(2, 2);
        assert!(build_general_dephasing(&h, &[p.clone(), p.clone()], &rates).is_err());
        let q = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]);
        assert!(build_general_dephasing(&h, &[p.clone(), q.clone()], &rates).is_ok());
        let neg = DMatrix::from_row_slice(2, 2, &[c(1.0), c(2.0), c(2.0), c(1.0)]);
        assert!(build_general_dephasing(&h, &[p, q], &neg).is_err());
    }
}
