//! Levenberg–Marquardt for small dense least-squares problems.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::sqrt;

/// Residual vector and Jacobian (row-major m×n) at a parameter point.
pub(crate) trait LeastSquares {
    fn n_params(&self) -> usize;
    fn n_residuals(&self) -> usize;
    fn residuals(&self, x: &[f64], out: &mut [f64]);
    fn jacobian(&self, x: &[f64], out: &mut [f64]);
    /// Projects a trial point back into the admissible box.
    fn clamp(&self, _x: &mut [f64]) {}
}

#[derive(Debug, Clone)]
pub(crate) struct LmSettings {
    /// Stop once an accepted step improves the objective by less than this.
    pub min_improvement: f64,
    pub max_evaluations: usize,
    pub max_damping: f64,
}

impl Default for LmSettings {
    fn default() -> Self {
        Self { min_improvement: 1e-12, max_evaluations: 100_000, max_damping: 1e16 }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct LmOutcome {
    pub params: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after every accepted step, starting with the initial point.
    pub trace: Vec<f64>,
}

fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

/// Solves the SPD system `a x = b` in place (b becomes x). `a` is n×n
/// row-major and is overwritten by its Cholesky factor.
fn cholesky_solve(a: &mut [f64], b: &mut [f64], n: usize) -> bool {
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if !(d > 0.0) {
            return false;
        }
        let d = sqrt(d);
        a[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
    }
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= a[i * n + k] * b[k];
        }
        b[i] = s / a[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= a[k * n + i] * b[k];
        }
        b[i] = s / a[i * n + i];
    }
    true
}

pub(crate) fn minimize<P: LeastSquares>(problem: &P, x0: &[f64], settings: &LmSettings) -> LmOutcome {
    let n = problem.n_params();
    let m = problem.n_residuals();
    let mut x = x0.to_vec();
    problem.clamp(&mut x);
    let mut r = vec![0.0; m];
    let mut jac = vec![0.0; m * n];
    problem.residuals(&x, &mut r);
    let mut evaluations = 1;
    let mut objective = sum_sq(&r);
    let mut trace = vec![objective];
    let mut iterations = 0;
    let mut damping = 1e-3;

    let mut jtj = vec![0.0; n * n];
    let mut grad = vec![0.0; n];
    let mut system = vec![0.0; n * n];
    let mut step = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut r_trial = vec![0.0; m];

    let converged = 'outer: loop {
        problem.jacobian(&x, &mut jac);
        for a in 0..n {
            grad[a] = (0..m).map(|k| jac[k * n + a] * r[k]).sum();
            for b in 0..=a {
                let v: f64 = (0..m).map(|k| jac[k * n + a] * jac[k * n + b]).sum();
                jtj[a * n + b] = v;
                jtj[b * n + a] = v;
            }
        }
        loop {
            if evaluations >= settings.max_evaluations {
                break 'outer false;
            }
            system.copy_from_slice(&jtj);
            for a in 0..n {
                let diag = jtj[a * n + a];
                system[a * n + a] = diag + damping * diag.max(1e-12);
                step[a] = -grad[a];
            }
            if !cholesky_solve(&mut system, &mut step, n) {
                damping *= 10.0;
                if damping > settings.max_damping {
                    break 'outer true;
                }
                continue;
            }
            for a in 0..n {
                trial[a] = x[a] + step[a];
            }
            problem.clamp(&mut trial);
            problem.residuals(&trial, &mut r_trial);
            evaluations += 1;
            let candidate = sum_sq(&r_trial);
            if candidate.is_finite() && candidate < objective {
                let improvement = objective - candidate;
                core::mem::swap(&mut x, &mut trial);
                core::mem::swap(&mut r, &mut r_trial);
                objective = candidate;
                trace.push(objective);
                iterations += 1;
                damping = (damping * 0.3).max(1e-15);
                if improvement < settings.min_improvement {
                    break 'outer true;
                }
                continue 'outer;
            }
            damping *= 4.0;
            if damping > settings.max_damping {
                break 'outer true;
            }
        }
    };
    LmOutcome { params: x, objective, iterations, converged, trace }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Rosenbrock as residuals (1 − x, 10(y − x²)).
    struct Rosenbrock;
    impl LeastSquares for Rosenbrock {
        fn n_params(&self) -> usize {
            2
        }
        fn n_residuals(&self) -> usize {
            2
        }
        fn residuals(&self, x: &[f64], out: &mut [f64]) {
            out[0] = 1.0 - x[0];
            out[1] = 10.0 * (x[1] - x[0] * x[0]);
        }
        fn jacobian(&self, x: &[f64], out: &mut [f64]) {
            out.copy_from_slice(&[-1.0, 0.0, -20.0 * x[0], 10.0]);
        }
    }

    #[test]
    fn solves_rosenbrock() {
        let out = minimize(&Rosenbrock, &[-1.2, 1.0], &LmSettings::default());
        assert!(out.converged);
        assert!((out.params[0] - 1.0).abs() < 1e-6 && (out.params[1] - 1.0).abs() < 1e-6);
        assert!(out.trace.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn cholesky_solves_spd() {
        let mut a = [4.0, 2.0, 2.0, 3.0];
        let mut b = [2.0, 1.0];
        assert!(cholesky_solve(&mut a, &mut b, 2));
        // [4 2; 2 3] x = [2 1] → x = [0.5, 0]
        assert!((b[0] - 0.5).abs() < 1e-15 && b[1].abs() < 1e-15);
    }
}
