//! Special functions: digamma, incomplete gamma and its inverse, normal
//! distribution function and quantile.
//!
//! Log-space variants are provided wherever a tail can underflow, since
//! pieces of pieces push Gamma shapes towards zero.

use crate::math::{abs, erfc, exp, ln, ln_1p, ln_gamma, sqrt};

const SQRT_2: f64 = core::f64::consts::SQRT_2;

/// Natural log of the Gamma function for positive arguments.
pub fn ln_gamma_fn(x: f64) -> f64 {
    ln_gamma(x)
}

/// The digamma function ψ(x) = d/dx ln Γ(x), for x > 0.
pub fn digamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let mut x = x;
    let mut acc = 0.0;
    while x < 10.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    acc + ln(x) - ln_minus_digamma_asymptotic(x)
}

/// ln(x) − ψ(x) for x > 0, evaluated without the cancellation of the naive
/// difference at large x.
pub fn ln_minus_digamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x >= 10.0 {
        return ln_minus_digamma_asymptotic(x);
    }
    // ln x − ψ(x) = ln(x / (x + k)) + Σ_{i<k} 1/(x + i) + [ln(x + k) − ψ(x + k)]
    let mut y = x;
    let mut sum = 0.0;
    while y < 10.0 {
        sum += 1.0 / y;
        y += 1.0;
    }
    ln(x / y) + sum + ln_minus_digamma_asymptotic(y)
}

fn ln_minus_digamma_asymptotic(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // 1/(2x) + Σ B_{2k} / (2k x^{2k})
    0.5 * inv
        + inv2
            * (1.0 / 12.0
                - inv2
                    * (1.0 / 120.0
                        - inv2
                            * (1.0 / 252.0
                                - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0 - inv2 * 691.0 / 32760.0)))))
}

/// The trigamma function ψ'(x), for x > 0.
pub fn trigamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let mut x = x;
    let mut acc = 0.0;
    while x < 10.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    acc + inv
        + inv2
            * (0.5
                + inv
                    * (1.0 / 6.0
                        - inv2 * (1.0 / 30.0 - inv2 * (1.0 / 42.0 - inv2 * (1.0 / 30.0 - inv2 * 5.0 / 66.0)))))
}

const MAX_ITER: usize = 100_000;
const EPS: f64 = 1e-17;
const FPMIN: f64 = 1e-300;

/// ln Σ_{n≥0} x^n / ((a+1)…(a+n)), the series part of P(a, x).
fn ln_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut del = 1.0;
    let mut sum = 1.0;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del < sum * EPS {
            break;
        }
    }
    ln(sum)
}

/// ln of the Lentz continued fraction for Q(a, x), valid for x ≥ a + 1.
fn ln_cont_frac(a: f64, x: f64) -> f64 {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / FPMIN;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if abs(d) < FPMIN {
            d = FPMIN;
        }
        c = b + an / c;
        if abs(c) < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if abs(del - 1.0) < EPS {
            break;
        }
    }
    ln(h)
}

/// (ln P(a, x), ln Q(a, x)) for the regularized incomplete gamma functions.
pub fn ln_gamma_pq(a: f64, x: f64) -> (f64, f64) {
    debug_assert!(a > 0.0);
    if x <= 0.0 {
        return (f64::NEG_INFINITY, 0.0);
    }
    if x == f64::INFINITY {
        return (0.0, f64::NEG_INFINITY);
    }
    ln_gamma_pq_at_log(a, ln(x))
}

/// Same as [`ln_gamma_pq`] with the argument given as y = ln x, so that
/// arguments below the smallest positive double stay representable.
fn ln_gamma_pq_at_log(a: f64, y: f64) -> (f64, f64) {
    let x = exp(y);
    if x < a + 1.0 {
        // e^{−x} x^a / Γ(a + 1) · series
        let ln_p = (-x + a * y - ln_gamma(a + 1.0) + ln_series(a, x)).min(0.0);
        (ln_p, ln_1p(-exp(ln_p)))
    } else {
        let ln_q = (-x + a * y - ln_gamma(a) + ln_cont_frac(a, x)).min(0.0);
        (ln_1p(-exp(ln_q)), ln_q)
    }
}

/// Regularized lower incomplete gamma P(a, x).
pub fn gamma_p(a: f64, x: f64) -> f64 {
    exp(ln_gamma_pq(a, x).0)
}

/// Regularized upper incomplete gamma Q(a, x) = 1 − P(a, x).
pub fn gamma_q(a: f64, x: f64) -> f64 {
    exp(ln_gamma_pq(a, x).1)
}

/// Inverse of the regularized lower incomplete gamma: the x ≥ 0 with
/// P(a, x) = p. Returns 0 at p = 0 and +∞ at p = 1.
///
/// Newton iteration in ln x on whichever tail is smaller, safeguarded by a
/// bracket; relative accuracy ~1e-14 in x.
pub fn gamma_p_inv(a: f64, p: f64) -> f64 {
    debug_assert!(a > 0.0);
    if p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let lower = p <= 0.5;
    let target = if lower { ln(p) } else { ln_1p(-p) };

    // Increasing function of y = ln x whose root is the quantile.
    let residual = |y: f64| -> (f64, f64) {
        let (lp, lq) = ln_gamma_pq_at_log(a, y);
        let l_tail = if lower { lp } else { lq };
        // d/dy ln P = x f(x) / P, and d/dy of −ln Q = x f(x) / Q
        let dens = exp(-exp(y) + a * y - ln_gamma(a) - l_tail);
        if lower {
            (l_tail - target, dens)
        } else {
            (target - l_tail, dens)
        }
    };

    let mut y = initial_guess_ln(a, p);
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for _ in 0..200 {
        let (f, df) = residual(y);
        if f == 0.0 {
            break;
        }
        if f < 0.0 {
            lo = y;
        } else {
            hi = y;
        }
        let mut step = if df.is_finite() && df > 0.0 { f / df } else { f64::NAN };
        if !step.is_finite() {
            step = if f < 0.0 { -1.0 } else { 1.0 };
        }
        step = step.clamp(-2.0, 2.0);
        let mut next = y - step;
        if next <= lo || next >= hi {
            next = match (lo.is_finite(), hi.is_finite()) {
                (true, true) => 0.5 * (lo + hi),
                (true, false) => lo + 1.0,
                (false, true) => hi - 1.0,
                (false, false) => next,
            };
        }
        let converged = abs(next - y) <= 1e-15 * (1.0 + abs(y));
        y = next;
        if converged || (hi - lo) <= 1e-15 * (1.0 + abs(y)) {
            break;
        }
    }
    exp(y)
}

fn initial_guess_ln(a: f64, p: f64) -> f64 {
    if a > 1.0 {
        // Wilson–Hilferty
        let z = normal_quantile(p);
        let t = 1.0 - 1.0 / (9.0 * a) + z / (3.0 * sqrt(a));
        let x = a * t * t * t;
        if x > 0.0 {
            return ln(x);
        }
        return ln(a) - 3.0;
    }
    let t = 1.0 - a * (0.253 + a * 0.12);
    if p < t {
        // P(a, x) ≈ x^a / Γ(a + 1) near zero
        (ln(p) + ln_gamma(a + 1.0)) / a
    } else {
        ln(1.0 - ln(1.0 - (p - t) / (1.0 - t)))
    }
}

/// Standard normal distribution function Φ.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Standard normal quantile Φ⁻¹(p). ±∞ at the endpoints.
///
/// Acklam's rational approximation followed by one Halley step against `erfc`.
pub fn normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;
    let x = if p < P_LOW {
        let q = sqrt(-2.0 * ln(p));
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = sqrt(-2.0 * ln(1.0 - p));
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    // Halley refinement; work on the smaller tail to keep relative accuracy.
    let e = if x < 0.0 {
        0.5 * erfc(-x / SQRT_2) - p
    } else {
        (1.0 - p) - 0.5 * erfc(x / SQRT_2)
    };
    let u = e * sqrt(2.0 * core::f64::consts::PI) * exp(0.5 * x * x);
    x - u / (1.0 + 0.5 * x * u)
}

/// ln k! for integer k ≥ 0 stored as f64.
pub fn ln_factorial(k: f64) -> f64 {
    ln_gamma(k + 1.0)
}
