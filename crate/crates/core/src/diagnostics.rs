//! Sample diagnostics: QQ tables, Gaussian kernel densities,
//! pseudo-observations, Kolmogorov–Smirnov statistics and Kendall's τ.

use alloc::format;
use alloc::vec::Vec;

use crate::distributions::Distribution;
use crate::math::{exp, floor, powf, sqrt};
use crate::riskfactor::{ranks_of, SampleMatrix};
use crate::{Error, Result};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Empirical quantile of an ascending sample: linear interpolation between
/// order statistics at position p(N + 1), clamped to the extreme values.
pub fn empirical_quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    debug_assert!(n > 0);
    let h = p * (n as f64 + 1.0);
    if h <= 1.0 {
        return sorted[0];
    }
    if h >= n as f64 {
        return sorted[n - 1];
    }
    let lo = floor(h);
    let frac = h - lo;
    let i = lo as usize - 1;
    sorted[i] + frac * (sorted[i + 1] - sorted[i])
}

/// Ascending copy of `sample`.
pub fn sorted_copy(sample: &[f64]) -> Vec<f64> {
    let mut v = sample.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QqRow {
    pub p: f64,
    pub empirical: f64,
    pub model: f64,
}

/// Rows `(p, empirical quantile, model quantile)`, p strictly increasing.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct QqTable {
    pub rows: Vec<QqRow>,
}

/// Compares the empirical quantiles of `sample` with the quantiles of `d`.
pub fn qq_against_analytic(sample: &[f64], d: &Distribution, levels: &[f64]) -> Result<QqTable> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    if !d.has_quantile() {
        return Err(Error::UnsupportedQuantile(d.family()));
    }
    for w in levels.windows(2) {
        if !(w[0] < w[1]) {
            return Err(Error::Domain(format!("levels must be strictly increasing ({} then {})", w[0], w[1])));
        }
    }
    let sorted = sorted_copy(sample);
    let rows = levels
        .iter()
        .map(|&p| {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::Domain(format!("QQ level {p} is outside (0, 1)")));
            }
            Ok(QqRow { p, empirical: empirical_quantile_sorted(&sorted, p), model: d.quantile(p)? })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(QqTable { rows })
}

/// Levels k / (m + 1), k = 1..m.
pub fn uniform_levels(m: usize) -> Vec<f64> {
    (1..=m).map(|k| k as f64 / (m as f64 + 1.0)).collect()
}

/// Gaussian kernel density estimate on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct KdeCurve {
    pub points: Vec<(f64, f64)>,
    pub bandwidth: f64,
}

fn mean_and_sd(sample: &[f64]) -> (f64, f64) {
    let n = sample.len() as f64;
    let mean = sample.iter().sum::<f64>() / n;
    let var = sample.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, sqrt(var))
}

/// Silverman's rule 0.9·min(sd, IQR/1.34)·N^{−1/5}; falls back to the sd
/// alone when the IQR is zero.
pub fn silverman_bandwidth(sample: &[f64]) -> Result<f64> {
    if sample.len() < 2 {
        return Err(Error::InsufficientData { got: sample.len(), needed: 2 });
    }
    let (_, sd) = mean_and_sd(sample);
    if !(sd > 0.0) {
        return Err(Error::DegenerateSample("zero standard deviation"));
    }
    let sorted = sorted_copy(sample);
    let iqr = empirical_quantile_sorted(&sorted, 0.75) - empirical_quantile_sorted(&sorted, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    Ok(0.9 * spread * powf(sample.len() as f64, -0.2))
}

/// Kernel density estimate of `sample` at every grid point.
///
/// Kernel contributions beyond 10 bandwidths are dropped (below 2e−22
/// relative to the peak).
pub fn kde(sample: &[f64], grid: &[f64], bandwidth: Option<f64>) -> Result<KdeCurve> {
    if sample.len() < 2 {
        return Err(Error::InsufficientData { got: sample.len(), needed: 2 });
    }
    let h = match bandwidth {
        Some(h) if h > 0.0 && h.is_finite() => h,
        Some(h) => return Err(Error::Domain(format!("bandwidth must be positive, got {h}"))),
        None => silverman_bandwidth(sample)?,
    };
    for w in grid.windows(2) {
        if !(w[0] < w[1]) {
            return Err(Error::Domain("KDE grid must be strictly increasing".into()));
        }
    }
    let sorted = sorted_copy(sample);
    let norm = INV_SQRT_2PI / (h * sorted.len() as f64);
    let reach = 10.0 * h;
    let points = grid
        .iter()
        .map(|&x| {
            let start = sorted.partition_point(|&v| v < x - reach);
            let end = sorted.partition_point(|&v| v <= x + reach);
            let s: f64 = sorted[start..end]
                .iter()
                .map(|&v| {
                    let z = (x - v) / h;
                    exp(-0.5 * z * z)
                })
                .sum();
            (x, s * norm)
        })
        .collect();
    Ok(KdeCurve { points, bandwidth: h })
}

/// Column-wise ranks divided by N + 1, ties broken by position.
pub fn pseudo_observations(s: &SampleMatrix) -> SampleMatrix {
    let denom = s.n_rows() as f64 + 1.0;
    let columns: Vec<Vec<f64>> = s
        .columns()
        .iter()
        .map(|c| ranks_of(c).into_iter().map(|r| (r + 1) as f64 / denom).collect())
        .collect();
    SampleMatrix::from_columns(s.column_names().to_vec(), &columns).expect("same shape as input")
}

/// Two-sample Kolmogorov–Smirnov statistic sup |F̂_a − F̂_b|.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    let a = sorted_copy(a);
    let b = sorted_copy(b);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// One-sample KS statistic of `sample` against the cdf of `d`, exact at
/// the atoms of discrete laws.
pub fn ks_one_sample(sample: &[f64], d: &Distribution) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let sorted = sorted_copy(sample);
    let n = sorted.len() as f64;
    let mut d_max: f64 = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let x = sorted[i];
        let before = i as f64 / n;
        while i < sorted.len() && sorted[i] == x {
            i += 1;
        }
        let after = i as f64 / n;
        d_max = d_max.max((after - d.cdf(x)?).abs()).max((d.cdf_left(x)? - before).abs());
    }
    Ok(d_max)
}

/// Asymptotic 1% critical value c·√((n + m)/(n·m)) of the two-sample KS
/// statistic, with c = 1.63.
pub fn ks_critical_two_sample(n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    1.63 * sqrt((n + m) / (n * m))
}

/// Asymptotic 1% critical value 1.63/√n of the one-sample KS statistic.
pub fn ks_critical_one_sample(n: usize) -> f64 {
    1.63 / sqrt(n as f64)
}

/// Kendall's τ-b in O(N log N) (Knight's merge-sort count).
pub fn kendall_tau(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { left: a.len(), right: b.len() });
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::InsufficientData { got: n, needed: 2 });
    }
    let mut pairs: Vec<(f64, f64)> = a.iter().copied().zip(b.iter().copied()).collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));

    let tie_pairs = |run: u64| run * (run - 1) / 2;
    let mut ties_a = 0u64;
    let mut ties_joint = 0u64;
    let (mut run_a, mut run_joint) = (1u64, 1u64);
    for k in 1..n {
        if pairs[k].0 == pairs[k - 1].0 {
            run_a += 1;
            if pairs[k].1 == pairs[k - 1].1 {
                run_joint += 1;
            } else {
                ties_joint += tie_pairs(run_joint);
                run_joint = 1;
            }
        } else {
            ties_a += tie_pairs(run_a);
            ties_joint += tie_pairs(run_joint);
            run_a = 1;
            run_joint = 1;
        }
    }
    ties_a += tie_pairs(run_a);
    ties_joint += tie_pairs(run_joint);

    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let mut buf = ys.clone();
    let swaps = merge_count(&mut ys, &mut buf);

    let mut ties_b = 0u64;
    let mut run_b = 1u64;
    for k in 1..n {
        if ys[k] == ys[k - 1] {
            run_b += 1;
        } else {
            ties_b += tie_pairs(run_b);
            run_b = 1;
        }
    }
    ties_b += tie_pairs(run_b);

    let total = tie_pairs(n as u64);
    let denom = sqrt((total - ties_a) as f64 * (total - ties_b) as f64);
    if denom == 0.0 {
        return Err(Error::DegenerateSample("constant column in Kendall's tau"));
    }
    let numer = total as f64 - ties_a as f64 - ties_b as f64 + ties_joint as f64 - 2.0 * swaps as f64;
    Ok((numer / denom).clamp(-1.0, 1.0))
}

/// Sorts `v` ascending, returning the number of strict inversions.
fn merge_count(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = {
        let (l, r) = v.split_at_mut(mid);
        let (bl, br) = buf.split_at_mut(mid);
        merge_count(l, bl) + merge_count(r, br)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[j] < v[i] {
            buf[k] = v[j];
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buf[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    swaps
}
