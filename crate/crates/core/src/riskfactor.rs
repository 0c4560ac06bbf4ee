//! Additive risk factor model and its sampler.
//!
//! Marginal i is split into pieces Y_{i,j}, the β_{i,j}-pieces of X_i, and
//! X_i = Σ_j Y_{i,j}. All pieces attached to factor j are driven by the same
//! uniform U_j, so they are comonotone; distinct factors are independent.
//!
//! Pieces with a quantile function are evaluated at the shared uniforms.
//! The others (Gamma convolutions, counts, compound laws) get an auxiliary
//! i.i.d. sample whose order statistics are placed according to the ranks
//! of the uniforms, which gives the same comonotone coupling with an exact
//! marginal.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::distributions::{open_uniform, Distribution};
use crate::divisibility::{is_parametrically_divisible, piece, PieceWeight};
use crate::{Error, Result};

/// d×n matrix of piece weights; every row sums to one.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl BetaMatrix {
    pub const ROW_SUM_TOLERANCE: f64 = 1e-12;

    pub fn new(rows: &[Vec<f64>]) -> Result<Self> {
        let n_rows = rows.len();
        if n_rows == 0 {
            return Err(Error::DimensionMismatch("beta matrix has no rows".into()));
        }
        let n_cols = rows[0].len();
        if n_cols == 0 {
            return Err(Error::DimensionMismatch("beta matrix has no columns".into()));
        }
        let mut entries = Vec::with_capacity(n_rows * n_cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n_cols {
                return Err(Error::DimensionMismatch(format!(
                    "beta row {} has {} entries, expected {n_cols}",
                    i + 1,
                    row.len()
                )));
            }
            for (j, &b) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&b) {
                    return Err(Error::Domain(format!("beta[{}][{}] = {b} is outside [0, 1]", i + 1, j + 1)));
                }
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > Self::ROW_SUM_TOLERANCE {
                return Err(Error::RowSumViolation { row: i, sum });
            }
            entries.extend_from_slice(row);
        }
        Ok(Self { rows: n_rows, cols: n_cols, entries })
    }

    /// Number of marginals d.
    pub fn n_marginals(&self) -> usize {
        self.rows
    }

    /// Number of factors n.
    pub fn n_factors(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }
}

/// N×d table of scenarios, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    n_rows: usize,
    column_names: Vec<String>,
    values: Vec<f64>,
}

impl SampleMatrix {
    pub fn from_columns(column_names: Vec<String>, columns: &[Vec<f64>]) -> Result<Self> {
        if column_names.len() != columns.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} names for {} columns",
                column_names.len(),
                columns.len()
            )));
        }
        let n_rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != n_rows) {
            return Err(Error::DimensionMismatch("columns have different lengths".into()));
        }
        if columns.iter().flatten().any(|v| v.is_nan()) {
            return Err(Error::Domain("sample matrix contains NaN".into()));
        }
        let d = columns.len();
        let mut values = vec![0.0; n_rows * d];
        for (j, col) in columns.iter().enumerate() {
            for (k, &v) in col.iter().enumerate() {
                values[k * d + j] = v;
            }
        }
        Ok(Self { n_rows, column_names, values })
    }

    /// Column names `x1, …, xd`.
    pub fn default_names(d: usize) -> Vec<String> {
        (1..=d).map(|i| format!("x{i}")).collect()
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.column_names.len()
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.n_cols() + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        let d = self.n_cols();
        &self.values[row * d..(row + 1) * d]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.n_rows).map(|r| self.get(r, col)).collect()
    }

    pub fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.n_cols()).map(|c| self.column(c)).collect()
    }
}

/// Validated risk factor model with its pieces precomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskFactorModel {
    marginals: Vec<Distribution>,
    beta: BetaMatrix,
    pieces: Vec<Distribution>,
}

impl RiskFactorModel {
    pub fn new(marginals: Vec<Distribution>, beta: BetaMatrix) -> Result<Self> {
        if marginals.len() != beta.n_marginals() {
            return Err(Error::DimensionMismatch(format!(
                "{} marginals but beta has {} rows",
                marginals.len(),
                beta.n_marginals()
            )));
        }
        for (index, m) in marginals.iter().enumerate() {
            if !is_parametrically_divisible(m) {
                return Err(Error::MarginalNotDivisible { index, family: m.family() });
            }
        }
        let mut pieces = Vec::with_capacity(beta.entries.len());
        for (i, m) in marginals.iter().enumerate() {
            for &b in beta.row(i) {
                pieces.push(piece(m, PieceWeight::new(b)?)?);
            }
        }
        Ok(Self { marginals, beta, pieces })
    }

    pub fn marginals(&self) -> &[Distribution] {
        &self.marginals
    }

    pub fn beta(&self) -> &BetaMatrix {
        &self.beta
    }

    /// The β_{i,j}-piece of marginal i.
    pub fn piece(&self, i: usize, j: usize) -> &Distribution {
        &self.pieces[i * self.beta.n_factors() + j]
    }

    /// N scenarios of the model; see [`RiskFactorModel::sample_detailed`].
    pub fn sample<R: RngCore + ?Sized>(&self, n: usize, rng: &mut R) -> SampleMatrix {
        self.sample_detailed(n, rng).totals
    }

    /// N scenarios together with every non-zero piece sample.
    ///
    /// One 64-bit seed is taken from `rng`; the uniforms of factor j and the
    /// auxiliary sample of piece (i, j) come from ChaCha streams indexed by
    /// j and (i, j), so the output does not depend on evaluation order.
    pub fn sample_detailed<R: RngCore + ?Sized>(&self, n: usize, rng: &mut R) -> ModelSample {
        let master = rng.next_u64();
        let d = self.beta.n_marginals();
        let n_factors = self.beta.n_factors();
        let mut totals = vec![vec![0.0; n]; d];
        let mut pieces = Vec::new();

        for j in 0..n_factors {
            let mut stream = ChaCha8Rng::seed_from_u64(master);
            stream.set_stream(j as u64);
            let uniforms: Vec<f64> = (0..n).map(|_| open_uniform(&mut stream)).collect();
            let mut ranks: Option<Vec<usize>> = None;

            for (i, total) in totals.iter_mut().enumerate() {
                if self.beta.get(i, j) == 0.0 {
                    continue;
                }
                let dist = self.piece(i, j);
                let values: Vec<f64> = if dist.has_quantile() {
                    uniforms.iter().map(|&u| dist.quantile(u).expect("quantile on (0,1)")).collect()
                } else {
                    let ranks = ranks.get_or_insert_with(|| ranks_of(&uniforms));
                    let mut aux_rng = ChaCha8Rng::seed_from_u64(master);
                    aux_rng.set_stream(((i as u64 + 1) << 32) | j as u64);
                    let mut aux = dist.sample(&mut aux_rng, n);
                    aux.sort_by(f64::total_cmp);
                    ranks.iter().map(|&r| aux[r]).collect()
                };
                for (t, v) in total.iter_mut().zip(&values) {
                    *t += v;
                }
                pieces.push(PieceSample { marginal: i, factor: j, values });
            }
        }
        let totals = SampleMatrix::from_columns(SampleMatrix::default_names(d), &totals)
            .expect("sampler produces consistent columns");
        ModelSample { totals, pieces }
    }
}

/// Zero-based ranks, ties broken by position.
pub(crate) fn ranks_of(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut ranks = vec![0; values.len()];
    for (r, &k) in order.iter().enumerate() {
        ranks[k] = r;
    }
    ranks
}

/// Samples of one piece Y_{i,j}.
#[derive(Debug, Clone, PartialEq)]
pub struct PieceSample {
    pub marginal: usize,
    pub factor: usize,
    pub values: Vec<f64>,
}

/// Output of [`RiskFactorModel::sample_detailed`].
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSample {
    pub totals: SampleMatrix,
    pub pieces: Vec<PieceSample>,
}

impl ModelSample {
    pub fn piece(&self, marginal: usize, factor: usize) -> Option<&[f64]> {
        self.pieces
            .iter()
            .find(|p| p.marginal == marginal && p.factor == factor)
            .map(|p| p.values.as_slice())
    }
}

/// Target marginals whose quantiles replace sampled values rank by rank.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MarginalReinjection {
    targets: Vec<Option<Distribution>>,
}

impl MarginalReinjection {
    pub fn new(targets: Vec<Option<Distribution>>) -> Result<Self> {
        for t in targets.iter().flatten() {
            if !t.has_quantile() {
                return Err(Error::UnsupportedQuantile(t.family()));
            }
        }
        Ok(Self { targets })
    }

    pub fn targets(&self) -> &[Option<Distribution>] {
        &self.targets
    }

    pub fn is_empty(&self) -> bool {
        self.targets.iter().all(Option::is_none)
    }
}

/// Replaces the value of rank k (1-based) in each targeted column by
/// `quantile(target, k / (N + 1))`.
pub fn reinject_marginals(s: &SampleMatrix, r: &MarginalReinjection) -> Result<SampleMatrix> {
    if r.is_empty() {
        return Ok(s.clone());
    }
    if r.targets.len() != s.n_cols() {
        return Err(Error::DimensionMismatch(format!(
            "{} reinjection targets for {} columns",
            r.targets.len(),
            s.n_cols()
        )));
    }
    let n = s.n_rows();
    let denom = n as f64 + 1.0;
    let mut columns = s.columns();
    for (col, target) in columns.iter_mut().zip(&r.targets) {
        let Some(target) = target else { continue };
        let ranks = ranks_of(col);
        for (v, &rank) in col.iter_mut().zip(&ranks) {
            *v = target.quantile((rank + 1) as f64 / denom)?;
        }
    }
    SampleMatrix::from_columns(s.column_names().to_vec(), &columns)
}

/// Row sums: the total loss per scenario.
pub fn aggregate(s: &SampleMatrix) -> Vec<f64> {
    (0..s.n_rows()).map(|r| s.row(r).iter().sum()).collect()
}
