//! Piecewise cubic Hermite interpolation with a Fritsch-Carlson limiter.

use crate::error::{domain, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl MonotoneCubic {
    /// Builds the interpolant from knots, values and slopes. Slopes that
    /// would break monotonicity on an interval are scaled back.
    pub fn new(x: Vec<f64>, y: Vec<f64>, mut d: Vec<f64>) -> Result<Self> {
        if x.len() < 2 || x.len() != y.len() || x.len() != d.len() {
            return Err(domain(
                "hermite interpolant needs matching arrays of length >= 2",
            ));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(domain("hermite knots must be strictly increasing"));
        }
        for i in 0..x.len() - 1 {
            let delta = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
            if delta == 0.0 {
                d[i] = 0.0;
                d[i + 1] = 0.0;
                continue;
            }
            let a = (d[i] / delta).max(0.0);
            let b = (d[i + 1] / delta).max(0.0);
            d[i] = a * delta;
            d[i + 1] = b * delta;
            let r2 = a * a + b * b;
            if r2 > 9.0 {
                let tau = 3.0 / r2.sqrt();
                d[i] = tau * a * delta;
                d[i + 1] = tau * b * delta;
            }
        }
        Ok(Self { x, y, d })
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    pub fn slopes(&self) -> &[f64] {
        &self.d
    }

    fn locate(&self, t: f64) -> usize {
        let n = self.x.len();
        let i = self.x.partition_point(|&k| k <= t);
        i.clamp(1, n - 1) - 1
    }

    /// Value at `t`; clamps to the end values outside the knot range.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        if t <= self.x[0] {
            return self.y[0];
        }
        if t >= self.x[n - 1] {
            return self.y[n - 1];
        }
        let i = self.locate(t);
        let h = self.x[i + 1] - self.x[i];
        let u = (t - self.x[i]) / h;
        let h00 = (1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u);
        let h10 = u * (1.0 - u) * (1.0 - u);
        let h01 = u * u * (3.0 - 2.0 * u);
        let h11 = u * u * (u - 1.0);
        h00 * self.y[i] + h10 * h * self.d[i] + h01 * self.y[i + 1] + h11 * h * self.d[i + 1]
    }

    pub fn deriv(&self, t: f64) -> f64 {
        let n = self.x.len();
        let t = t.clamp(self.x[0], self.x[n - 1]);
        let i = self.locate(t);
        let h = self.x[i + 1] - self.x[i];
        let u = (t - self.x[i]) / h;
        let d00 = 6.0 * u * (u - 1.0) / h;
        let d10 = (1.0 - u) * (1.0 - 3.0 * u);
        let d01 = -d00;
        let d11 = u * (3.0 * u - 2.0);
        d00 * self.y[i] + d10 * self.d[i] + d01 * self.y[i + 1] + d11 * self.d[i + 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_cubic_with_exact_slopes() {
        let x: Vec<f64> = (0..6).map(|i| i as f64 * 0.2).collect();
        let f = |t: f64| t * t * t + t;
        let df = |t: f64| 3.0 * t * t + 1.0;
        let p = MonotoneCubic::new(
            x.clone(),
            x.iter().map(|&t| f(t)).collect(),
            x.iter().map(|&t| df(t)).collect(),
        )
        .unwrap();
        for i in 0..=50 {
            let t = i as f64 / 50.0;
            assert!((p.eval(t) - f(t)).abs() < 1e-14);
            assert!((p.deriv(t) - df(t)).abs() < 1e-12);
        }
    }

    #[test]
    fn limiter_keeps_monotone() {
        let p = MonotoneCubic::new(
            vec![0.0, 1.0, 2.0],
            vec![0.0, 0.1, 1.0],
            vec![5.0, 5.0, 5.0],
        )
        .unwrap();
        let mut prev = p.eval(0.0);
        for i in 1..=200 {
            let v = p.eval(i as f64 / 100.0);
            assert!(v >= prev);
            prev = v;
        }
    }
}
