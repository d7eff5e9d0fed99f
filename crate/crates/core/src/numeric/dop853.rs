//! Dormand-Prince 8(5,3) integrator with 7th-order dense output.
//!
//! Step control follows Hairer's DOP853 with Lund (PI) stabilisation. An
//! optional projection hook runs after every accepted step.

use super::dop853_tableau::{A, B, C, D, E3, E5, STAGES};

#[derive(Debug, Clone, Copy)]
pub struct Dop853 {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub h_max: f64,
    pub max_steps: usize,
    pub safety: f64,
    pub fac_min: f64,
    pub fac_max: f64,
    pub beta: f64,
}

impl Default for Dop853 {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            h_max: f64::INFINITY,
            max_steps: 5_000_000,
            safety: 0.9,
            fac_min: 0.333,
            fac_max: 6.0,
            beta: 0.04,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdeFailure {
    pub t_last: f64,
    pub reason: String,
    pub stats: OdeStats,
}

struct Counted<F> {
    f: F,
    n: usize,
}

impl<F: FnMut(f64, &[f64], &mut [f64])> Counted<F> {
    fn call(&mut self, t: f64, y: &[f64], dy: &mut [f64]) {
        self.n += 1;
        (self.f)(t, y, dy);
    }
}

impl Dop853 {
    pub fn with_tolerances(rel_tol: f64, abs_tol: f64) -> Self {
        Self {
            rel_tol,
            abs_tol,
            ..Self::default()
        }
    }

    /// Integrates `y' = rhs(t, y)` from `t0` to `t1 > t0` and returns the
    /// state at each of `out_times` (ascending, inside `[t0, t1]`).
    ///
    /// `project` may modify an accepted state in place and must report
    /// whether it changed anything. It is also applied to every output.
    pub fn solve<F, P>(
        &self,
        rhs: F,
        t0: f64,
        t1: f64,
        y0: &[f64],
        out_times: &[f64],
        mut project: P,
    ) -> Result<(Vec<Vec<f64>>, OdeStats), OdeFailure>
    where
        F: FnMut(f64, &[f64], &mut [f64]),
        P: FnMut(&mut [f64]) -> bool,
    {
        let n = y0.len();
        let mut rhs = Counted { f: rhs, n: 0 };
        let mut stats = OdeStats::default();
        let fail = |t: f64, reason: String, stats: OdeStats| OdeFailure {
            t_last: t,
            reason,
            stats,
        };

        if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
            return Err(fail(t0, "invalid integration interval".into(), stats));
        }
        if out_times.windows(2).any(|w| w[1] < w[0]) || out_times.iter().any(|&t| t < t0 || t > t1)
        {
            return Err(fail(
                t0,
                "output times must be ascending and inside the interval".into(),
                stats,
            ));
        }

        let mut y = y0.to_vec();
        project(&mut y);
        let mut out = Vec::with_capacity(out_times.len());
        let mut next_out = 0;
        while next_out < out_times.len() && out_times[next_out] <= t0 {
            out.push(y.clone());
            next_out += 1;
        }

        let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 16];
        let mut f0 = vec![0.0; n];
        rhs.call(t0, &y, &mut f0);
        let mut h = self.initial_step(&mut rhs, t0, t1, &y, &f0);

        let mut t = t0;
        let mut y_stage = vec![0.0; n];
        let mut y_new = vec![0.0; n];
        let mut f_new = vec![0.0; n];
        let mut fac_old: f64 = 1e-4;
        let expo = 1.0 / 8.0 - self.beta * 0.2;
        let mut last_rejected = false;
        let mut interp = [
            vec![0.0; n],
            vec![0.0; n],
            vec![0.0; n],
            vec![0.0; n],
            vec![0.0; n],
            vec![0.0; n],
            vec![0.0; n],
        ];

        loop {
            if stats.accepted + stats.rejected >= self.max_steps {
                stats.evaluations = rhs.n;
                return Err(fail(
                    t,
                    format!("step budget of {} exhausted", self.max_steps),
                    stats,
                ));
            }
            if h.abs() <= 10.0 * f64::EPSILON * t.abs().max(1e-300) {
                stats.evaluations = rhs.n;
                return Err(fail(t, format!("step size underflow (h = {h:e})"), stats));
            }
            let mut last = false;
            if t + 1.01 * h >= t1 {
                h = t1 - t;
                last = true;
            }

            k[0].copy_from_slice(&f0);
            for s in 1..STAGES {
                for i in 0..n {
                    let mut acc = 0.0;
                    for j in 0..s {
                        acc += A[s][j] * k[j][i];
                    }
                    y_stage[i] = y[i] + h * acc;
                }
                let (done, rest) = k.split_at_mut(s);
                let _ = done;
                rhs.call(t + C[s] * h, &y_stage, &mut rest[0]);
            }
            for i in 0..n {
                let mut acc = 0.0;
                for j in 0..STAGES {
                    acc += B[j] * k[j][i];
                }
                y_new[i] = y[i] + h * acc;
            }
            rhs.call(t + h, &y_new, &mut f_new);
            k[STAGES].copy_from_slice(&f_new);

            let mut err5 = 0.0;
            let mut err3 = 0.0;
            for i in 0..n {
                let sk = self.abs_tol + self.rel_tol * y[i].abs().max(y_new[i].abs());
                let mut e5 = 0.0;
                let mut e3 = 0.0;
                for j in 0..=STAGES {
                    e5 += E5[j] * k[j][i];
                    e3 += E3[j] * k[j][i];
                }
                err5 += (e5 / sk).powi(2);
                err3 += (e3 / sk).powi(2);
            }
            let err = if err5 == 0.0 && err3 == 0.0 {
                0.0
            } else {
                h.abs() * err5 / ((err5 + 0.01 * err3) * n as f64).sqrt()
            };
            if !err.is_finite() {
                stats.rejected += 1;
                h *= 0.25;
                last_rejected = true;
                continue;
            }

            let fac11 = err.powf(expo);
            if err <= 1.0 {
                let mut fac = fac11 / fac_old.powf(self.beta);
                fac = (fac / self.safety).clamp(1.0 / self.fac_max, 1.0 / self.fac_min);
                let mut h_new = (h / fac).min(self.h_max);
                if last_rejected {
                    h_new = h_new.min(h);
                }
                fac_old = err.max(1e-4);
                stats.accepted += 1;
                last_rejected = false;
                let t_new = if last { t1 } else { t + h };

                if next_out < out_times.len() && out_times[next_out] <= t_new {
                    self.dense_coefficients(
                        &mut rhs,
                        t,
                        h,
                        &y,
                        &y_new,
                        &mut k,
                        &mut y_stage,
                        &mut interp,
                    );
                    while next_out < out_times.len() && out_times[next_out] <= t_new {
                        let x = ((out_times[next_out] - t) / h).clamp(0.0, 1.0);
                        let mut v = if x == 1.0 {
                            y_new.clone()
                        } else {
                            eval_dense(&interp, &y, x)
                        };
                        project(&mut v);
                        out.push(v);
                        next_out += 1;
                    }
                }

                std::mem::swap(&mut y, &mut y_new);
                if project(&mut y) {
                    rhs.call(t_new, &y, &mut f0);
                } else {
                    f0.copy_from_slice(&f_new);
                }
                t = t_new;
                if last {
                    stats.evaluations = rhs.n;
                    return Ok((out, stats));
                }
                h = h_new;
            } else {
                let h_new = h / (1.0 / self.fac_min).min(fac11 / self.safety);
                stats.rejected += 1;
                last_rejected = true;
                h = h_new;
            }
        }
    }

    fn initial_step<F: FnMut(f64, &[f64], &mut [f64])>(
        &self,
        rhs: &mut Counted<F>,
        t0: f64,
        t1: f64,
        y: &[f64],
        f0: &[f64],
    ) -> f64 {
        let n = y.len();
        let mut dnf = 0.0;
        let mut dny = 0.0;
        for i in 0..n {
            let sk = self.abs_tol + self.rel_tol * y[i].abs();
            dnf += (f0[i] / sk).powi(2);
            dny += (y[i] / sk).powi(2);
        }
        let span = t1 - t0;
        let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
            1e-6
        } else {
            0.01 * (dny / dnf).sqrt()
        };
        h = h.min(self.h_max).min(span);
        let y1: Vec<f64> = y.iter().zip(f0).map(|(a, b)| a + h * b).collect();
        let mut f1 = vec![0.0; n];
        rhs.call(t0 + h, &y1, &mut f1);
        let mut der2 = 0.0;
        for i in 0..n {
            let sk = self.abs_tol + self.rel_tol * y[i].abs();
            der2 += ((f1[i] - f0[i]) / sk).powi(2);
        }
        let der2 = der2.sqrt() / h;
        let der12 = der2.abs().max(dnf.sqrt());
        let h1 = if der12 <= 1e-15 {
            (h * 1e-3).max(1e-6)
        } else {
            (0.01 / der12).powf(1.0 / 8.0)
        };
        (100.0 * h).min(h1).min(self.h_max).min(span)
    }

    #[allow(clippy::too_many_arguments)]
    fn dense_coefficients<F: FnMut(f64, &[f64], &mut [f64])>(
        &self,
        rhs: &mut Counted<F>,
        t: f64,
        h: f64,
        y: &[f64],
        y_new: &[f64],
        k: &mut [Vec<f64>],
        y_stage: &mut [f64],
        interp: &mut [Vec<f64>; 7],
    ) {
        let n = y.len();
        for s in (STAGES + 1)..16 {
            for i in 0..n {
                let mut acc = 0.0;
                for j in 0..s {
                    acc += A[s][j] * k[j][i];
                }
                y_stage[i] = y[i] + h * acc;
            }
            let (_, rest) = k.split_at_mut(s);
            rhs.call(t + C[s] * h, y_stage, &mut rest[0]);
        }
        for i in 0..n {
            let dy = y_new[i] - y[i];
            interp[0][i] = dy;
            interp[1][i] = h * k[0][i] - dy;
            interp[2][i] = 2.0 * dy - h * (k[STAGES][i] + k[0][i]);
            for (row, d) in D.iter().enumerate() {
                let mut acc = 0.0;
                for j in 0..16 {
                    acc += d[j] * k[j][i];
                }
                interp[3 + row][i] = h * acc;
            }
        }
    }
}

fn eval_dense(interp: &[Vec<f64>; 7], y_old: &[f64], x: f64) -> Vec<f64> {
    let n = y_old.len();
    let mut v = vec![0.0; n];
    for i in 0..n {
        let mut acc = 0.0;
        for (idx, f) in interp.iter().rev().enumerate() {
            acc += f[i];
            acc *= if idx % 2 == 0 { x } else { 1.0 - x };
        }
        v[i] = acc + y_old[i];
    }
    v
}
