//! Projection of positive distributions onto parametrically divisible
//! classes.
//!
//! - [`fit_gamma_mle`]: Gamma by maximum likelihood,
//! - [`fit_gamma_shifted_moments`]: Gamma matching E[e^{−X}] and E[X e^{−X}],
//!   which exist even when ordinary moments do not,
//! - [`fit_gamma_convolution`]: finite Gamma convolution by least squares on
//!   the empirical log-Laplace transform.

mod ggc;
mod lm;

use alloc::format;
use alloc::vec::Vec;

pub use ggc::{fit_gamma_convolution, fit_gamma_convolution_with, relative_weights, GgcOptions, LaplaceGrid};

use crate::distributions::{Distribution, GammaParams};
use crate::math::{abs, exp, ln, ln_1p, ln_gamma, powf, sqrt};
use crate::special::{digamma, ln_minus_digamma, trigamma};
use crate::{Error, Result};

/// Result of any fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub fitted: Distribution,
    /// Method-specific, non-negative: the stationarity residual for MLE, the
    /// squared moment residuals for shifted moments, the weighted sum of
    /// squares for Gamma convolutions.
    pub objective_value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Transform evaluation points (empty when the method uses none).
    pub grid_used: Vec<f64>,
    /// Objective after every accepted iteration of the selected run.
    pub objective_trace: Vec<f64>,
}

/// The Gamma log-likelihood of one observation,
/// −ln Γ(α) − α ln s + (α − 1) ln x − x/s.
pub fn gamma_log_likelihood(params: &GammaParams, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("log-likelihood needs x > 0, got {x}")));
    }
    let (a, s) = (params.shape(), params.scale());
    Ok(-ln_gamma(a) - a * ln(s) + (a - 1.0) * ln(x) - x / s)
}

fn check_positive(sample: &[f64]) -> Result<()> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    match sample.iter().position(|&x| !(x > 0.0 && x.is_finite())) {
        Some(index) => Err(Error::NonPositiveSample { index, value: sample[index] }),
        None => Ok(()),
    }
}

/// Gamma by maximum likelihood.
///
/// Solves ln α − ψ(α) = ln(mean x) − mean(ln x) by safeguarded Newton
/// iteration, then sets s = mean(x)/α.
pub fn fit_gamma_mle(sample: &[f64]) -> Result<FitReport> {
    check_positive(sample)?;
    if sample.len() < 2 {
        return Err(Error::InsufficientData { got: sample.len(), needed: 2 });
    }
    if sample.iter().all(|&x| x == sample[0]) {
        return Err(Error::DegenerateSample("all observations are equal"));
    }
    let n = sample.len() as f64;
    let mean = sample.iter().sum::<f64>() / n;
    let mean_ln = sample.iter().map(|&x| ln(x)).sum::<f64>() / n;
    let rhs = ln(mean) - mean_ln;
    if !(rhs > 0.0) || !rhs.is_finite() {
        return Err(Error::DegenerateSample("ln(mean) - mean(ln x) is not positive"));
    }

    // Minka's closed-form start.
    let mut alpha = (3.0 - rhs + sqrt((rhs - 3.0) * (rhs - 3.0) + 24.0 * rhs)) / (12.0 * rhs);
    let (mut lo, mut hi) = (0.0_f64, f64::INFINITY);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < 200 {
        iterations += 1;
        // g is decreasing in α
        let g = ln_minus_digamma(alpha) - rhs;
        if g > 0.0 {
            lo = alpha;
        } else {
            hi = alpha;
        }
        let dg = 1.0 / alpha - trigamma(alpha);
        let mut next = alpha - g / dg;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * alpha };
        }
        let rel = abs(next - alpha) / alpha;
        alpha = next;
        if rel < 1e-10 {
            converged = true;
            break;
        }
    }
    let fitted = Distribution::gamma(alpha, mean / alpha)?;
    Ok(FitReport {
        fitted,
        objective_value: abs(ln_minus_digamma(alpha) - rhs),
        iterations,
        converged,
        grid_used: Vec::new(),
        objective_trace: Vec::new(),
    })
}

/// Gradient of the summed log-likelihood: (∂/∂α, s·∂/∂s) divided by n.
pub fn gamma_score(params: &GammaParams, sample: &[f64]) -> (f64, f64) {
    let n = sample.len() as f64;
    let (a, s) = (params.shape(), params.scale());
    let mean = sample.iter().sum::<f64>() / n;
    let mean_ln = sample.iter().map(|&x| ln(x)).sum::<f64>() / n;
    (-digamma(a) - ln(s) + mean_ln, -a + mean / s)
}

/// The shifted moments μ₀ = E[e^{−X}] and μ₁ = E[X e^{−X}].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftedMoments {
    mu0: f64,
    mu1: f64,
}

impl ShiftedMoments {
    pub fn new(mu0: f64, mu1: f64) -> Result<Self> {
        if !(mu0 > 0.0 && mu0 <= 1.0) {
            return Err(Error::Domain(format!("mu0 must lie in (0, 1], got {mu0}")));
        }
        if !(mu1 >= 0.0 && mu1.is_finite()) {
            return Err(Error::Domain(format!("mu1 must be >= 0, got {mu1}")));
        }
        Ok(Self { mu0, mu1 })
    }

    /// Moments of Gamma(α, s): ((1+s)^{−α}, αs(1+s)^{−α−1}).
    pub fn of_gamma(params: &GammaParams) -> Self {
        let (a, s) = (params.shape(), params.scale());
        let mu0 = exp(-a * ln_1p(s));
        Self { mu0, mu1: a * s * mu0 / (1.0 + s) }
    }

    pub fn mu0(&self) -> f64 {
        self.mu0
    }

    pub fn mu1(&self) -> f64 {
        self.mu1
    }
}

/// Plain empirical means of e^{−x} and x e^{−x}.
pub fn estimate_shifted_moments(sample: &[f64]) -> Result<ShiftedMoments> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    if let Some(index) = sample.iter().position(|&x| !(x >= 0.0)) {
        return Err(Error::NonPositiveSample { index, value: sample[index] });
    }
    let n = sample.len() as f64;
    let (s0, s1) = sample.iter().fold((0.0, 0.0), |(a, b), &x| {
        let e = exp(-x);
        (a + e, b + x * e)
    });
    ShiftedMoments::new(s0 / n, s1 / n)
}

/// s / ((1 + s) ln(1 + s)): decreasing from 1 (s → 0) to 0 (s → ∞).
fn shape_free_ratio(s: f64) -> f64 {
    s / ((1.0 + s) * ln_1p(s))
}

/// Gamma matching given shifted moments.
///
/// With α = −ln μ₀ / ln(1 + s) the system reduces to
/// s / ((1 + s) ln(1 + s)) = μ₁ / (μ₀ (−ln μ₀)), solved by geometric
/// bracketing (factor 10) and bisection in ln s.
pub fn fit_gamma_shifted_moments(m: &ShiftedMoments) -> Result<FitReport> {
    let (mu0, mu1) = (m.mu0(), m.mu1());
    if !(mu0 > 0.0 && mu0 < 1.0) {
        return Err(Error::Domain(format!("mu0 must lie in (0, 1), got {mu0}")));
    }
    if !(mu1 > 0.0) {
        return Err(Error::Domain(format!("mu1 must be > 0, got {mu1}")));
    }
    let neg_ln_mu0 = -ln(mu0);
    let target = mu1 / (mu0 * neg_ln_mu0);
    if !(target < 1.0) {
        return Err(Error::Infeasible(format!(
            "mu1/(mu0 ln(1/mu0)) = {target} must be below 1 for a Gamma"
        )));
    }
    const LIMIT: f64 = 1e12;
    let mut hi = 1.0;
    while shape_free_ratio(hi) >= target {
        hi *= 10.0;
        if hi > LIMIT {
            return Err(Error::Infeasible(format!("no scale below {LIMIT:e} matches the moments")));
        }
    }
    let mut lo = hi / 10.0;
    while shape_free_ratio(lo) < target {
        lo /= 10.0;
        if lo < 1.0 / LIMIT {
            return Err(Error::Infeasible(format!("no scale above {:e} matches the moments", 1.0 / LIMIT)));
        }
    }
    let mut iterations = 0;
    while hi / lo - 1.0 > 4.0 * f64::EPSILON && iterations < 2000 {
        let mid = sqrt(lo * hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if shape_free_ratio(mid) >= target {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let s = sqrt(lo * hi);
    let alpha = neg_ln_mu0 / ln_1p(s);
    let params = GammaParams::new(alpha, s)?;
    let fitted_moments = ShiftedMoments::of_gamma(&params);
    let r0 = powf(1.0 + s, -alpha) - mu0;
    let r1 = fitted_moments.mu1() - mu1;
    Ok(FitReport {
        fitted: Distribution::Gamma(params),
        objective_value: r0 * r0 + r1 * r1,
        iterations,
        converged: true,
        grid_used: Vec::new(),
        objective_trace: Vec::new(),
    })
}

/// ln(mean of e^{−t xᵢ}), shifted by the largest exponent for stability.
pub fn empirical_log_laplace(sample: &[f64], t: f64) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    if !(t > 0.0) {
        return Err(Error::Domain(format!("transform argument must be > 0, got {t}")));
    }
    let min = sample.iter().copied().fold(f64::INFINITY, f64::min);
    let shift = -t * min;
    let sum: f64 = sample.iter().map(|&x| exp(-t * x - shift)).sum();
    Ok(shift + ln(sum / sample.len() as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn log_likelihood_examples() {
        let p = |a, s| GammaParams::new(a, s).unwrap();
        assert_eq!(gamma_log_likelihood(&p(1.0, 1.0), 1.0).unwrap(), -1.0);
        assert_eq!(gamma_log_likelihood(&p(2.0, 1.0), 1.0).unwrap(), -1.0);
        let v = gamma_log_likelihood(&p(1.0, 2.0), 2.0).unwrap();
        assert!((v - (-(2f64.ln()) - 1.0)).abs() < 1e-15);
        assert!(matches!(gamma_log_likelihood(&p(1.0, 1.0), 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn mle_residual_on_small_sample() {
        let e = core::f64::consts::E;
        let x = [1.0, 1.0, 1.0, e];
        let rep = fit_gamma_mle(&x).unwrap();
        assert!(rep.converged);
        let Distribution::Gamma(g) = rep.fitted else { panic!() };
        let mean: f64 = (3.0 + e) / 4.0;
        let residual = g.shape().ln() - digamma(g.shape()) - (mean.ln() - 0.25);
        assert!(residual.abs() < 1e-8, "{residual}");
        assert!((g.shape() * g.scale() - mean).abs() < 1e-12);
    }

    #[test]
    fn mle_rejects_bad_samples() {
        assert!(matches!(fit_gamma_mle(&[]), Err(Error::EmptySample)));
        assert!(matches!(fit_gamma_mle(&[1.0]), Err(Error::InsufficientData { .. })));
        assert!(matches!(fit_gamma_mle(&[1.0, -2.0]), Err(Error::NonPositiveSample { index: 1, .. })));
        assert!(matches!(fit_gamma_mle(&[2.0, 2.0, 2.0]), Err(Error::DegenerateSample(_))));
    }

    #[test]
    fn shifted_moment_examples() {
        let rep = fit_gamma_shifted_moments(&ShiftedMoments::new(0.5, 0.25).unwrap()).unwrap();
        let Distribution::Gamma(g) = rep.fitted else { panic!() };
        assert!((g.shape() - 1.0).abs() < 1e-12 && (g.scale() - 1.0).abs() < 1e-12);

        let m = ShiftedMoments::new(3f64.powi(-3), 3.0 * 2.0 * 3f64.powi(-4)).unwrap();
        let Distribution::Gamma(g) = fit_gamma_shifted_moments(&m).unwrap().fitted else { panic!() };
        assert!((g.shape() - 3.0).abs() < 1e-10 && (g.scale() - 2.0).abs() < 1e-10);
    }

    #[test]
    fn shifted_moment_errors() {
        assert!(matches!(fit_gamma_shifted_moments(&ShiftedMoments::new(1.0, 0.0).unwrap()), Err(Error::Domain(_))));
        // a point mass at 1 has mu1/(mu0·(−ln mu0)) = 1: no Gamma attains it
        let e1 = (-1.0f64).exp();
        assert!(matches!(
            fit_gamma_shifted_moments(&ShiftedMoments::new(e1, e1).unwrap()),
            Err(Error::Infeasible(_))
        ));
        assert!(ShiftedMoments::new(0.0, 0.1).is_err());
        assert!(ShiftedMoments::new(0.5, -0.1).is_err());
    }

    #[test]
    fn shifted_moment_estimates() {
        let m = estimate_shifted_moments(&[0.0, 0.0, 0.0]).unwrap();
        assert_eq!((m.mu0(), m.mu1()), (1.0, 0.0));
        let m = estimate_shifted_moments(&[1.0]).unwrap();
        let e1 = (-1.0f64).exp();
        assert_eq!((m.mu0(), m.mu1()), (e1, e1));
        assert!(matches!(estimate_shifted_moments(&[]), Err(Error::EmptySample)));
    }

    #[test]
    fn empirical_log_laplace_examples() {
        assert_eq!(empirical_log_laplace(&[0.0, 0.0], 3.0).unwrap(), 0.0);
        assert_eq!(empirical_log_laplace(&[1.0], 1.0).unwrap(), -1.0);
        // stays finite where the naive mean underflows
        let far = vec![1e4, 1e4 + 1.0];
        let v = empirical_log_laplace(&far, 1.0).unwrap();
        let expect = -1e4 + ((1.0 + (-1.0f64).exp()) / 2.0).ln();
        assert!((v - expect).abs() < 1e-9);
        assert!(matches!(empirical_log_laplace(&[], 1.0), Err(Error::EmptySample)));
    }
}
