//! The parametric families every other module speaks.
//!
//! All transforms use the log-Laplace convention ψ(t) = ln E[e^{−tX}], t ≥ 0,
//! which exists for every positive variable. Under this convention the
//! β-piece of X is the law with transform β·ψ.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::distr::{Distribution as _, Open01};
use rand::Rng;
use rand_distr::{Gamma as GammaSampler, Poisson as PoissonSampler, StandardNormal};

use crate::math::{exp, exp_m1, floor, ln, ln_1p, ln_gamma, powf, sqrt};
use crate::quadrature::integrate_half_line;
use crate::special::{gamma_p, gamma_p_inv, ln_gamma_pq, normal_cdf, normal_quantile};
use crate::{Error, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const QUAD_REL_TOL: f64 = 1e-10;
const QUAD_MAX_INTERVALS: usize = 4000;

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")))
    }
}

fn finite(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidParameter(format!("{name} must be finite, got {v}")))
    }
}

/// Gamma law with density Γ(α)⁻¹ s^{−α} e^{−x/s} x^{α−1}.
///
/// Shape zero is not representable here; it is [`Distribution::DegenerateZero`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaParams {
    shape: f64,
    scale: f64,
}

impl GammaParams {
    pub fn new(shape: f64, scale: f64) -> Result<Self> {
        Ok(Self { shape: positive("gamma shape", shape)?, scale: positive("gamma scale", scale)? })
    }
    pub fn shape(&self) -> f64 {
        self.shape
    }
    pub fn scale(&self) -> f64 {
        self.scale
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianParams {
    mean: f64,
    variance: f64,
}

impl GaussianParams {
    pub fn new(mean: f64, variance: f64) -> Result<Self> {
        Ok(Self { mean: finite("gaussian mean", mean)?, variance: positive("gaussian variance", variance)? })
    }
    pub fn mean(&self) -> f64 {
        self.mean
    }
    pub fn variance(&self) -> f64 {
        self.variance
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonParams {
    rate: f64,
}

impl PoissonParams {
    pub fn new(rate: f64) -> Result<Self> {
        Ok(Self { rate: positive("poisson rate", rate)? })
    }
    pub fn rate(&self) -> f64 {
        self.rate
    }
}

/// Sum of a Poisson(rate) number of i.i.d. draws from `severity`.
///
/// The severity is shared between a law and all of its pieces.
#[derive(Debug, Clone, PartialEq)]
pub struct CompoundPoissonParams {
    rate: f64,
    severity: Arc<Distribution>,
}

impl CompoundPoissonParams {
    pub fn new(rate: f64, severity: impl Into<Arc<Distribution>>) -> Result<Self> {
        Ok(Self { rate: positive("compound poisson rate", rate)?, severity: severity.into() })
    }
    pub fn rate(&self) -> f64 {
        self.rate
    }
    pub fn severity(&self) -> &Arc<Distribution> {
        &self.severity
    }
}

/// Number of failures before the `size`-th success, success probability `prob`.
/// `size = 1` is the geometric law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NegativeBinomialParams {
    size: f64,
    prob: f64,
}

impl NegativeBinomialParams {
    pub fn new(size: f64, prob: f64) -> Result<Self> {
        if !(prob > 0.0 && prob < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "negative binomial prob must lie in (0, 1), got {prob}"
            )));
        }
        Ok(Self { size: positive("negative binomial size", size)?, prob })
    }
    pub fn size(&self) -> f64 {
        self.size
    }
    pub fn prob(&self) -> f64 {
        self.prob
    }
}

/// Shifted Pareto on [0, ∞) with density α(x + 1)^{−α−1}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParetoParams {
    shape: f64,
}

impl ParetoParams {
    pub fn new(shape: f64) -> Result<Self> {
        Ok(Self { shape: positive("pareto shape", shape)? })
    }
    pub fn shape(&self) -> f64 {
        self.shape
    }
}

/// ln X ~ N(log_mean, log_sd²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogNormalParams {
    log_mean: f64,
    log_sd: f64,
}

impl LogNormalParams {
    pub fn new(log_mean: f64, log_sd: f64) -> Result<Self> {
        Ok(Self {
            log_mean: finite("lognormal log_mean", log_mean)?,
            log_sd: positive("lognormal log_sd", log_sd)?,
        })
    }
    pub fn log_mean(&self) -> f64 {
        self.log_mean
    }
    pub fn log_sd(&self) -> f64 {
        self.log_sd
    }
}

/// Finitely atomic Thorin measure ν = Σ αᵢ δ_{sᵢ}: the law of a sum of
/// independent Gamma(αᵢ, sᵢ) variables.
///
/// Kept in canonical form: atoms sorted by scale, equal scales merged by
/// summing their shapes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ThorinAtomicMeasure {
    atoms: Vec<(f64, f64)>,
}

impl ThorinAtomicMeasure {
    /// Builds the canonical measure from `(shape, scale)` pairs.
    pub fn new(atoms: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (shape, scale) in atoms {
            positive("atom shape", shape)?;
            positive("atom scale", scale)?;
            out.push((shape, scale));
        }
        out.sort_by(|a, b| a.1.total_cmp(&b.1));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(out.len());
        for (shape, scale) in out {
            match merged.last_mut() {
                Some(last) if last.1 == scale => last.0 += shape,
                _ => merged.push((shape, scale)),
            }
        }
        Ok(Self { atoms: merged })
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Total mass Σ αᵢ.
    pub fn total_shape(&self) -> f64 {
        self.atoms.iter().map(|a| a.0).sum()
    }

    /// The measure β·ν. Atoms whose shape underflows to zero are dropped.
    pub fn scaled(&self, beta: f64) -> Self {
        let atoms = self
            .atoms
            .iter()
            .map(|&(a, s)| (a * beta, s))
            .filter(|&(a, _)| a > 0.0)
            .collect();
        Self { atoms }
    }

    /// Merges neighbouring atoms whose scales differ by less than `rel_gap`
    /// (relative). Shapes add; the merged scale is the shape-weighted
    /// geometric mean.
    pub fn merge_near(&self, rel_gap: f64) -> Self {
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(self.atoms.len());
        for &(a, s) in &self.atoms {
            match merged.last_mut() {
                Some(last) if (s - last.1) <= rel_gap * s => {
                    let total = last.0 + a;
                    let log_scale = (last.0 * ln(last.1) + a * ln(s)) / total;
                    *last = (total, exp(log_scale));
                }
                _ => merged.push((a, s)),
            }
        }
        Self { atoms: merged }
    }

    /// −Σ αᵢ ln(1 + sᵢ t)
    pub fn log_laplace(&self, t: f64) -> f64 {
        -self.atoms.iter().map(|&(a, s)| a * ln_1p(s * t)).sum::<f64>()
    }
}

/// One of the supported families.
#[derive(Debug, Clone, PartialEq)]
pub enum Distribution {
    /// Point mass at 0: the 0-piece of anything.
    DegenerateZero,
    Gamma(GammaParams),
    Gaussian(GaussianParams),
    Poisson(PoissonParams),
    CompoundPoisson(CompoundPoissonParams),
    NegativeBinomial(NegativeBinomialParams),
    Pareto(ParetoParams),
    LogNormal(LogNormalParams),
    /// Finite Gamma convolution described by its Thorin measure.
    GammaConvolution(ThorinAtomicMeasure),
}

impl Distribution {
    pub fn gamma(shape: f64, scale: f64) -> Result<Self> {
        GammaParams::new(shape, scale).map(Self::Gamma)
    }
    pub fn gaussian(mean: f64, variance: f64) -> Result<Self> {
        GaussianParams::new(mean, variance).map(Self::Gaussian)
    }
    pub fn poisson(rate: f64) -> Result<Self> {
        PoissonParams::new(rate).map(Self::Poisson)
    }
    pub fn compound_poisson(rate: f64, severity: impl Into<Arc<Distribution>>) -> Result<Self> {
        CompoundPoissonParams::new(rate, severity).map(Self::CompoundPoisson)
    }
    pub fn negative_binomial(size: f64, prob: f64) -> Result<Self> {
        NegativeBinomialParams::new(size, prob).map(Self::NegativeBinomial)
    }
    /// Geometric law, i.e. a negative binomial of size 1.
    pub fn geometric(prob: f64) -> Result<Self> {
        Self::negative_binomial(1.0, prob)
    }
    pub fn pareto(shape: f64) -> Result<Self> {
        ParetoParams::new(shape).map(Self::Pareto)
    }
    pub fn lognormal(log_mean: f64, log_sd: f64) -> Result<Self> {
        LogNormalParams::new(log_mean, log_sd).map(Self::LogNormal)
    }
    pub fn gamma_convolution(atoms: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        ThorinAtomicMeasure::new(atoms).map(Self::GammaConvolution)
    }

    /// Short family tag, matching the serialized `family` field.
    pub fn family(&self) -> &'static str {
        match self {
            Self::DegenerateZero => "zero",
            Self::Gamma(_) => "gamma",
            Self::Gaussian(_) => "gaussian",
            Self::Poisson(_) => "poisson",
            Self::CompoundPoisson(_) => "compound_poisson",
            Self::NegativeBinomial(_) => "negative_binomial",
            Self::Pareto(_) => "pareto",
            Self::LogNormal(_) => "lognormal",
            Self::GammaConvolution(_) => "ggc",
        }
    }

    /// ψ(t) = ln E[e^{−tX}] for t ≥ 0.
    ///
    /// Closed form for every family except Pareto and LogNormal, whose
    /// transforms are integrated numerically over [0, ∞).
    pub fn log_laplace(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("log-Laplace argument must be >= 0, got {t}")));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        let v = match self {
            Self::DegenerateZero => 0.0,
            Self::Gamma(g) => -g.shape * ln_1p(g.scale * t),
            Self::Gaussian(g) => -g.mean * t + 0.5 * g.variance * t * t,
            Self::Poisson(p) => p.rate * exp_m1(-t),
            Self::NegativeBinomial(nb) => {
                // (p / (1 − (1 − p) e^{−t}))^r
                nb.size * (ln(nb.prob) - ln_1p(-(1.0 - nb.prob) * exp(-t)))
            }
            Self::CompoundPoisson(cp) => {
                let inner = cp.severity.log_laplace(t)?;
                let v = cp.rate * exp_m1(inner);
                if !v.is_finite() {
                    return Err(Error::UnsupportedTransform(format!(
                        "severity transform is not finite at t = {t}"
                    )));
                }
                v
            }
            Self::Pareto(_) | Self::LogNormal(_) => {
                let r = integrate_half_line(
                    |x| {
                        let f = self.density(x).unwrap_or(0.0);
                        if f == 0.0 {
                            0.0
                        } else {
                            exp(-t * x) * f
                        }
                    },
                    QUAD_REL_TOL,
                    QUAD_MAX_INTERVALS,
                );
                ln(r.value)
            }
            Self::GammaConvolution(m) => m.log_laplace(t),
        };
        Ok(v)
    }

    /// Probability density at `x`; zero outside the support.
    pub fn density(&self, x: f64) -> Result<f64> {
        match self {
            Self::Gamma(g) => {
                if x < 0.0 {
                    return Ok(0.0);
                }
                if x == 0.0 {
                    return Ok(if g.shape < 1.0 {
                        f64::INFINITY
                    } else if g.shape == 1.0 {
                        1.0 / g.scale
                    } else {
                        0.0
                    });
                }
                let a = g.shape;
                Ok(exp(-x / g.scale + (a - 1.0) * ln(x) - a * ln(g.scale) - ln_gamma(a)))
            }
            Self::Gaussian(g) => {
                let z = (x - g.mean) / sqrt(g.variance);
                Ok(exp(-0.5 * z * z - LN_SQRT_2PI) / sqrt(g.variance))
            }
            Self::Pareto(p) => {
                if x < 0.0 {
                    return Ok(0.0);
                }
                Ok(p.shape * exp((-p.shape - 1.0) * ln_1p(x)))
            }
            Self::LogNormal(l) => {
                if x <= 0.0 {
                    return Ok(0.0);
                }
                let z = (ln(x) - l.log_mean) / l.log_sd;
                Ok(exp(-0.5 * z * z - LN_SQRT_2PI) / (x * l.log_sd))
            }
            other => Err(Error::UnsupportedDensity(other.family())),
        }
    }

    /// Probability mass at `k` for the integer-valued families.
    pub fn pmf(&self, k: f64) -> Result<f64> {
        let on_support = k >= 0.0 && floor(k) == k;
        match self {
            Self::DegenerateZero => Ok(if k == 0.0 { 1.0 } else { 0.0 }),
            Self::Poisson(p) => {
                if !on_support {
                    return Ok(0.0);
                }
                Ok(exp(k * ln(p.rate) - p.rate - ln_gamma(k + 1.0)))
            }
            Self::NegativeBinomial(nb) => {
                if !on_support {
                    return Ok(0.0);
                }
                let r = nb.size;
                Ok(exp(
                    ln_gamma(k + r) - ln_gamma(r) - ln_gamma(k + 1.0) + r * ln(nb.prob) + k * ln_1p(-nb.prob),
                ))
            }
            other => Err(Error::UnsupportedDensity(other.family())),
        }
    }

    /// P(X ≤ x).
    pub fn cdf(&self, x: f64) -> Result<f64> {
        match self {
            Self::DegenerateZero => Ok(if x < 0.0 { 0.0 } else { 1.0 }),
            Self::Gamma(g) => Ok(if x <= 0.0 { 0.0 } else { gamma_p(g.shape, x / g.scale) }),
            Self::Gaussian(g) => Ok(normal_cdf((x - g.mean) / sqrt(g.variance))),
            Self::Pareto(p) => Ok(if x <= 0.0 { 0.0 } else { -exp_m1(-p.shape * ln_1p(x)) }),
            Self::LogNormal(l) => Ok(if x <= 0.0 { 0.0 } else { normal_cdf((ln(x) - l.log_mean) / l.log_sd) }),
            Self::Poisson(p) => {
                if x < 0.0 {
                    return Ok(0.0);
                }
                // P(N ≤ k) = Q(k + 1, λ)
                Ok(exp(ln_gamma_pq(floor(x) + 1.0, p.rate).1))
            }
            Self::NegativeBinomial(nb) => {
                if x < 0.0 {
                    return Ok(0.0);
                }
                let k_max = floor(x);
                let q = 1.0 - nb.prob;
                let mut term = powf(nb.prob, nb.size);
                let mut total = term;
                let mut k = 0.0;
                while k < k_max {
                    term *= (k + nb.size) / (k + 1.0) * q;
                    total += term;
                    k += 1.0;
                    if term < 1e-18 * total && k > nb.size * q / nb.prob {
                        break;
                    }
                }
                Ok(total.min(1.0))
            }
            other => Err(Error::UnsupportedCdf(other.family())),
        }
    }

    /// P(X < x): the left limit of the cdf, which differs from it only at atoms.
    pub fn cdf_left(&self, x: f64) -> Result<f64> {
        match self {
            Self::DegenerateZero => Ok(if x <= 0.0 { 0.0 } else { 1.0 }),
            Self::Poisson(_) | Self::NegativeBinomial(_) => {
                let below = crate::math::ceil(x) - 1.0;
                if below < 0.0 {
                    Ok(0.0)
                } else {
                    self.cdf(below)
                }
            }
            _ => self.cdf(x),
        }
    }

    /// inf{x : F(x) ≥ p}. Unbounded families return +∞ at p = 1.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("probability must lie in [0, 1], got {p}")));
        }
        match self {
            Self::DegenerateZero => Ok(0.0),
            Self::Gamma(g) => Ok(g.scale * gamma_p_inv(g.shape, p)),
            Self::Gaussian(g) => Ok(g.mean + sqrt(g.variance) * normal_quantile(p)),
            Self::Pareto(par) => {
                if p == 1.0 {
                    return Ok(f64::INFINITY);
                }
                // (1 − p)^{−1/α} − 1
                Ok(exp_m1(-ln_1p(-p) / par.shape))
            }
            Self::LogNormal(l) => Ok(exp(l.log_mean + l.log_sd * normal_quantile(p))),
            other => Err(Error::UnsupportedQuantile(other.family())),
        }
    }

    pub fn has_quantile(&self) -> bool {
        matches!(
            self,
            Self::DegenerateZero | Self::Gamma(_) | Self::Gaussian(_) | Self::Pareto(_) | Self::LogNormal(_)
        )
    }

    /// A reusable sampler; cheaper than [`Distribution::sample`] in loops.
    pub fn sampler(&self) -> Sampler {
        match self {
            Self::DegenerateZero => Sampler::Zero,
            Self::Gamma(g) => Sampler::Gamma(gamma_sampler(g.shape, g.scale)),
            Self::Gaussian(g) => Sampler::Gaussian { mean: g.mean, sd: sqrt(g.variance) },
            Self::Poisson(p) => Sampler::Poisson(poisson_sampler(p.rate)),
            Self::CompoundPoisson(cp) => Sampler::Compound {
                count: poisson_sampler(cp.rate),
                severity: alloc::boxed::Box::new(cp.severity.sampler()),
            },
            Self::NegativeBinomial(nb) => {
                Sampler::NegativeBinomial(gamma_sampler(nb.size, (1.0 - nb.prob) / nb.prob))
            }
            Self::Pareto(p) => Sampler::Pareto { inv_shape: 1.0 / p.shape },
            Self::LogNormal(l) => Sampler::LogNormal { mu: l.log_mean, sigma: l.log_sd },
            Self::GammaConvolution(m) => {
                Sampler::Convolution(m.atoms.iter().map(|&(a, s)| gamma_sampler(a, s)).collect())
            }
        }
    }

    /// `n` i.i.d. draws.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        let sampler = self.sampler();
        (0..n).map(|_| sampler.draw(rng)).collect()
    }
}

fn gamma_sampler(shape: f64, scale: f64) -> GammaSampler<f64> {
    GammaSampler::new(shape, scale).expect("validated gamma parameters")
}

fn poisson_sampler(rate: f64) -> PoissonSampler<f64> {
    PoissonSampler::new(rate).expect("validated poisson rate")
}

/// Prepared sampler for a [`Distribution`].
#[derive(Debug, Clone)]
pub enum Sampler {
    Zero,
    Gamma(GammaSampler<f64>),
    Gaussian { mean: f64, sd: f64 },
    Poisson(PoissonSampler<f64>),
    Compound { count: PoissonSampler<f64>, severity: alloc::boxed::Box<Sampler> },
    /// Gamma–Poisson mixture: N | Λ ~ Poisson(Λ), Λ ~ Gamma(r, (1 − p)/p).
    NegativeBinomial(GammaSampler<f64>),
    Pareto { inv_shape: f64 },
    LogNormal { mu: f64, sigma: f64 },
    Convolution(Vec<GammaSampler<f64>>),
}

impl Sampler {
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Gamma(g) => g.sample(rng),
            Self::Gaussian { mean, sd } => {
                let z: f64 = rng.sample(StandardNormal);
                mean + sd * z
            }
            Self::Poisson(p) => p.sample(rng),
            Self::Compound { count, severity } => {
                let n = count.sample(rng) as u64;
                (0..n).map(|_| severity.draw(rng)).sum()
            }
            Self::NegativeBinomial(mix) => {
                let lambda = mix.sample(rng);
                if lambda > 0.0 {
                    poisson_sampler(lambda).sample(rng)
                } else {
                    0.0
                }
            }
            Self::Pareto { inv_shape } => {
                let u: f64 = rng.sample(Open01);
                exp_m1(-inv_shape * ln(u))
            }
            Self::LogNormal { mu, sigma } => {
                let z: f64 = rng.sample(StandardNormal);
                exp(mu + sigma * z)
            }
            Self::Convolution(parts) => parts.iter().map(|g| g.sample(rng)).sum(),
        }
    }
}

impl rand::distr::Distribution<f64> for Sampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.draw(rng)
    }
}

/// A uniform draw strictly inside (0, 1).
pub fn open_uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(Open01)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn log_laplace_examples() {
        let g = Distribution::gamma(1.0, 1.0).unwrap();
        assert!(close(g.log_laplace(1.0).unwrap(), -core::f64::consts::LN_2, 1e-15));
        let ggc = Distribution::gamma_convolution([(1.0, 1.0), (1.0, 1.0)]).unwrap();
        assert!(close(ggc.log_laplace(1.0).unwrap(), -2.0 * core::f64::consts::LN_2, 1e-15));
        assert_eq!(Distribution::poisson(2.0).unwrap().log_laplace(0.0).unwrap(), 0.0);
        assert!(matches!(g.log_laplace(-1.0), Err(Error::Domain(_))));
        assert!(matches!(g.log_laplace(f64::NAN), Err(Error::Domain(_))));
    }

    #[test]
    fn pareto_log_laplace_matches_frozen_quadrature() {
        // mpmath.quad(lambda x: exp(-x)*0.75*(x+1)**-1.75, [0, inf]) at 40 digits
        let expected = libm::log(0.330_608_069_835_746_5);
        let got = Distribution::pareto(0.75).unwrap().log_laplace(1.0).unwrap();
        assert!((got - expected).abs() < 1e-10, "{got} vs {expected}");
    }

    #[test]
    fn compound_poisson_transform_recurses() {
        let sev = Distribution::gamma(1.0, 1.0).unwrap();
        let cp = Distribution::compound_poisson(3.0, sev).unwrap();
        // λ (1/(1+t) − 1) at t = 1
        assert!(close(cp.log_laplace(1.0).unwrap(), -1.5, 1e-15));
        let wild = Distribution::compound_poisson(1.0, Distribution::gaussian(0.0, 1e6).unwrap()).unwrap();
        assert!(matches!(wild.log_laplace(10.0), Err(Error::UnsupportedTransform(_))));
    }

    #[test]
    fn density_examples() {
        let p = Distribution::pareto(0.75).unwrap();
        assert_eq!(p.density(0.0).unwrap(), 0.75);
        assert_eq!(p.density(-1.0).unwrap(), 0.0);
        let g = Distribution::gamma(1.0, 2.0).unwrap();
        assert!(close(g.density(0.0).unwrap(), 0.5, 1e-15));
        assert!(close(g.density(1e-300).unwrap(), 0.5, 1e-12));
        let ln = Distribution::lognormal(0.0, 2.0).unwrap();
        let expect = 1.0 / (2.0 * (2.0 * core::f64::consts::PI).sqrt());
        assert!(close(ln.density(1.0).unwrap(), expect, 1e-14));
        for d in [
            Distribution::poisson(1.0).unwrap(),
            Distribution::DegenerateZero,
            Distribution::gamma_convolution([(1.0, 1.0)]).unwrap(),
        ] {
            assert!(matches!(d.density(1.0), Err(Error::UnsupportedDensity(_))));
        }
    }

    #[test]
    fn quantile_examples() {
        let p = Distribution::pareto(0.75).unwrap();
        assert!(close(p.quantile(0.5).unwrap(), 2f64.powf(4.0 / 3.0) - 1.0, 1e-14));
        assert_eq!(p.quantile(1.0).unwrap(), f64::INFINITY);
        assert_eq!(p.quantile(0.0).unwrap(), 0.0);
        let g = Distribution::gamma(1.0, 1.0).unwrap();
        let p_e = 1.0 - (-1.0f64).exp();
        assert!(close(g.quantile(p_e).unwrap(), 1.0, 1e-12));
        assert_eq!(g.quantile(1.0).unwrap(), f64::INFINITY);
        assert_eq!(Distribution::DegenerateZero.quantile(0.3).unwrap(), 0.0);
        assert!(matches!(g.quantile(1.5), Err(Error::Domain(_))));
        let ggc = Distribution::gamma_convolution([(1.0, 1.0)]).unwrap();
        assert!(matches!(ggc.quantile(0.5), Err(Error::UnsupportedQuantile(_))));
        let gauss = Distribution::gaussian(1.0, 4.0).unwrap();
        assert_eq!(gauss.quantile(0.0).unwrap(), f64::NEG_INFINITY);
        assert!(close(gauss.quantile(0.5).unwrap(), 1.0, 1e-15));
    }

    #[test]
    fn cdf_examples() {
        assert_eq!(Distribution::pareto(0.75).unwrap().cdf(0.0).unwrap(), 0.0);
        let g = Distribution::gamma(1.0, 1.0).unwrap();
        assert!(close(g.cdf(core::f64::consts::LN_2).unwrap(), 0.5, 1e-15));
        let p = Distribution::poisson(1.0).unwrap();
        assert!(close(p.cdf(0.0).unwrap(), (-1.0f64).exp(), 1e-14));
        assert!(close(p.cdf(0.5).unwrap(), (-1.0f64).exp(), 1e-14));
        assert_eq!(p.cdf_left(0.0).unwrap(), 0.0);
        let nb = Distribution::negative_binomial(2.5, 0.3).unwrap();
        let mut acc = 0.0;
        for k in 0..30 {
            acc += nb.pmf(k as f64).unwrap();
            assert!(close(nb.cdf(k as f64).unwrap(), acc, 1e-12));
        }
        let ggc = Distribution::gamma_convolution([(1.0, 1.0)]).unwrap();
        assert!(matches!(ggc.cdf(1.0), Err(Error::UnsupportedCdf(_))));
    }

    #[test]
    fn canonical_measure_merges_equal_scales() {
        let m = ThorinAtomicMeasure::new([(1.0, 5.0), (0.5, 1.0), (2.0, 5.0)]).unwrap();
        assert_eq!(m.atoms(), &[(0.5, 1.0), (3.0, 5.0)]);
        assert!(ThorinAtomicMeasure::new([(0.0, 1.0)]).is_err());
        assert!(ThorinAtomicMeasure::new([(1.0, -1.0)]).is_err());
        let near = ThorinAtomicMeasure::new([(1.0, 1.0), (1.0, 1.0 + 1e-9), (1.0, 2.0)]).unwrap();
        assert_eq!(near.merge_near(1e-6).len(), 2);
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(Distribution::gamma(0.0, 1.0).is_err());
        assert!(Distribution::gamma(1.0, 0.0).is_err());
        assert!(Distribution::gaussian(0.0, 0.0).is_err());
        assert!(Distribution::poisson(-1.0).is_err());
        assert!(Distribution::negative_binomial(1.0, 1.0).is_err());
        assert!(Distribution::pareto(f64::INFINITY).is_err());
        assert!(Distribution::lognormal(f64::NAN, 1.0).is_err());
        // tiny shapes are legal
        assert!(Distribution::gamma(1e-8, 1.0).is_ok());
    }

    #[test]
    fn sampling_is_deterministic_and_zero_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(Distribution::DegenerateZero.sample(&mut rng, 5), [0.0; 5]);
        let g = Distribution::gamma(2.0, 3.0).unwrap();
        let a = g.sample(&mut ChaCha8Rng::seed_from_u64(9), 100);
        let b = g.sample(&mut ChaCha8Rng::seed_from_u64(9), 100);
        assert_eq!(a, b);
        let tiny = Distribution::gamma(1e-8, 1.0).unwrap().sample(&mut rng, 1000);
        assert!(tiny.iter().all(|x| x.is_finite() && *x >= 0.0));
    }
}
