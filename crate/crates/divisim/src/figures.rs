//! Data behind the four figures: heavy-tailed marginals and their
//! approximants, and the crossed 20%/80% two-risk model.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use divisim_core::diagnostics::{
    empirical_quantile_sorted, kde, kendall_tau, ks_critical_two_sample, ks_statistic, pseudo_observations,
    qq_against_analytic, silverman_bandwidth, sorted_copy, uniform_levels,
};
use divisim_core::fitting::{fit_gamma_convolution_with, fit_gamma_mle};
use divisim_core::riskfactor::{aggregate, reinject_marginals};
use divisim_core::{
    BetaMatrix, Distribution, FitReport, GgcOptions, MarginalReinjection, ModelSample, RiskFactorModel, SampleMatrix,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::io::{kde_csv, kde_wide_csv, qq_csv, sample_matrix_csv, write_atomic};
use crate::record::{parse_distribution, FitReportRecord, ModelSpec};
use crate::Error;

pub const FIT_SIZE: usize = 1_000_000;
pub const PLOT_SIZE: usize = 10_000;
pub const GGC_ATOMS: usize = 20;
pub const KDE_POINTS: usize = 401;
/// Levels reported in the quantile summaries.
pub const SUMMARY_LEVELS: [f64; 4] = [0.5, 0.9, 0.99, 0.999];

const PARETO_GGC: &str = include_str!("../fixtures/pareto_ggc20.json");
const PARETO_GAMMA: &str = include_str!("../fixtures/pareto_gamma_mle.json");
const LOGNORMAL_GGC: &str = include_str!("../fixtures/lognormal_ggc20.json");
const LOGNORMAL_GAMMA: &str = include_str!("../fixtures/lognormal_gamma_mle.json");

/// Seed of the fits stored as fixtures.
pub const FIXTURE_SEED: u64 = 42;

/// The two heavy-tailed laws without parametric pieces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    /// Pareto with shape 3/4 on [0, ∞): infinite mean.
    Pareto,
    /// LogNormal(0, σ = 2).
    LogNormal,
}

impl Target {
    pub fn distribution(self) -> Distribution {
        match self {
            Self::Pareto => Distribution::pareto(0.75).expect("valid shape"),
            Self::LogNormal => Distribution::lognormal(0.0, 2.0).expect("valid parameters"),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Pareto => "pareto",
            Self::LogNormal => "lognormal",
        }
    }
}

/// Sample sizes after applying `--budget`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sizes {
    pub fit: usize,
    pub plot: usize,
}

impl Sizes {
    pub fn scaled(budget: f64) -> Result<Self, Error> {
        if !(budget > 0.0 && budget.is_finite()) {
            return Err(Error::Parse(format!("budget must be a positive number, got {budget}")));
        }
        let scale = |n: usize| ((n as f64 * budget).round() as usize).max(2);
        Ok(Self { fit: scale(FIT_SIZE), plot: scale(PLOT_SIZE) })
    }
}

/// Independent ChaCha stream `k` of a run seed.
pub fn stream(seed: u64, k: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k);
    rng
}

/// A target sample with its Gamma (maximum likelihood) and GGC-20 fits.
#[derive(Debug, Clone)]
pub struct Approximants {
    pub target: Target,
    pub sample: Vec<f64>,
    pub gamma: FitReport,
    pub ggc: FitReport,
}

pub fn fit_approximants(target: Target, seed: u64, n: usize, log: &mut dyn Write) -> Result<Approximants, Error> {
    let sample = target.distribution().sample(&mut stream(seed, 0), n);
    let _ = writeln!(log, "{}: Gamma maximum likelihood on {n} draws", target.label());
    let gamma = fit_gamma_mle(&sample)?;
    let _ = writeln!(log, "{}: {GGC_ATOMS}-atom Gamma convolution on {n} draws", target.label());
    let opts = GgcOptions::heavy_tailed(&sample, GGC_ATOMS, seed)?;
    let ggc = fit_gamma_convolution_with(&sample, &opts)?;
    let _ = writeln!(
        log,
        "{}: objective {:.3e} after {} iterations, converged={}",
        target.label(),
        ggc.objective_value,
        ggc.iterations,
        ggc.converged
    );
    Ok(Approximants { target, sample, gamma, ggc })
}

/// `(p, target quantile, empirical quantile, relative error)` rows.
pub fn quantile_errors(target: &Distribution, sorted_draws: &[f64], levels: &[f64]) -> Result<Vec<[f64; 4]>, Error> {
    levels
        .iter()
        .map(|&p| {
            let q = target.quantile(p)?;
            let e = empirical_quantile_sorted(sorted_draws, p);
            Ok([p, q, e, (e - q) / q])
        })
        .collect()
}

fn fixture(text: &str, name: &str) -> Distribution {
    parse_distribution(text).unwrap_or_else(|e| panic!("bundled fixture {name} is invalid: {e}"))
}

/// Bundled approximants `(gamma, ggc)` fitted at [`FIXTURE_SEED`] on
/// [`FIT_SIZE`] draws.
pub fn fixture_approximants(target: Target) -> (Distribution, Distribution) {
    match target {
        Target::Pareto => (fixture(PARETO_GAMMA, "pareto_gamma_mle"), fixture(PARETO_GGC, "pareto_ggc20")),
        Target::LogNormal => (fixture(LOGNORMAL_GAMMA, "lognormal_gamma_mle"), fixture(LOGNORMAL_GGC, "lognormal_ggc20")),
    }
}

/// β of the crossed model: X = X₀.₂ + X₀.₈ and Y = Y₀.₂ + Y₀.₈ with X₀.₈ and
/// Y₀.₂ driven by the shared middle factor.
pub fn crossed_beta() -> BetaMatrix {
    BetaMatrix::new(&[vec![0.2, 0.8, 0.0], vec![0.0, 0.2, 0.8]]).expect("rows sum to one")
}

/// The crossed model with the given approximants of X (Pareto) and Y
/// (LogNormal), reinjecting the true marginals.
pub fn crossed_model(x: Distribution, y: Distribution) -> Result<ModelSpec, Error> {
    let model = RiskFactorModel::new(vec![x, y], crossed_beta())?;
    let reinjection =
        MarginalReinjection::new(vec![Some(Target::Pareto.distribution()), Some(Target::LogNormal.distribution())])?;
    Ok(ModelSpec { model, reinjection })
}

/// The `paper-4b` preset: bundled GGC-20 approximants.
pub fn crossed_preset() -> ModelSpec {
    let (_, x) = fixture_approximants(Target::Pareto);
    let (_, y) = fixture_approximants(Target::LogNormal);
    crossed_model(x, y).expect("fixtures are valid approximants")
}

/// Approximant pairs `[("gamma", …), ("ggc", …)]` of the crossed model.
pub fn crossed_variants(seed: u64, sizes: Sizes, refit: bool, log: &mut dyn Write) -> Result<Vec<(&'static str, ModelSpec)>, Error> {
    let (gx, cx, gy, cy) = if refit {
        let x = fit_approximants(Target::Pareto, seed, sizes.fit, log)?;
        let y = fit_approximants(Target::LogNormal, seed, sizes.fit, log)?;
        (x.gamma.fitted, x.ggc.fitted, y.gamma.fitted, y.ggc.fitted)
    } else {
        let (gx, cx) = fixture_approximants(Target::Pareto);
        let (gy, cy) = fixture_approximants(Target::LogNormal);
        (gx, cx, gy, cy)
    };
    Ok(vec![("gamma", crossed_model(gx, gy)?), ("ggc", crossed_model(cx, cy)?)])
}

/// Samples a crossed-model variant. Both variants of one seed share their
/// factor uniforms, so they differ only through the approximants.
pub fn sample_variant(spec: &ModelSpec, n: usize, seed: u64) -> ModelSample {
    let mut sample = spec.model.sample_detailed(n, &mut stream(seed, 10));
    sample.totals = rename_xy(&sample.totals);
    sample
}

fn rename_xy(s: &SampleMatrix) -> SampleMatrix {
    SampleMatrix::from_columns(vec!["x".into(), "y".into()], &s.columns()).expect("two columns")
}

/// X + Y after reinjecting the true marginals.
pub fn reinjected_sum(spec: &ModelSpec, sample: &ModelSample) -> Result<Vec<f64>, Error> {
    Ok(aggregate(&reinject_marginals(&sample.totals, &spec.reinjection)?))
}

/// Options of `reproduce`.
#[derive(Debug, Clone)]
pub struct ReproduceOptions {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub budget: f64,
    pub refit: bool,
}

/// Files written by a figure pipeline and its summary lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Reproduced {
    pub files: Vec<PathBuf>,
    pub summary: Vec<String>,
}

/// Runs one figure pipeline. Files already written are removed when a
/// later step fails.
pub fn reproduce(figure: &str, opts: &ReproduceOptions, log: &mut dyn Write) -> Result<Reproduced, Error> {
    let sizes = Sizes::scaled(opts.budget)?;
    let mut out = Reproduced::default();
    let result = match figure {
        "fig1" => marginal_figure(1, Target::Pareto, opts, sizes, &mut out, log),
        "fig2" => marginal_figure(2, Target::LogNormal, opts, sizes, &mut out, log),
        "fig3" => copula_figure(opts, sizes, &mut out, log),
        "fig4" => sum_figure(opts, sizes, &mut out, log),
        other => Err(Error::UnknownFigure(other.to_string())),
    };
    match result {
        Ok(()) => Ok(out),
        Err(e) => {
            for path in &out.files {
                let _ = std::fs::remove_file(path);
            }
            Err(e)
        }
    }
}

fn emit(dir: &Path, name: &str, bytes: &[u8], out: &mut Reproduced) -> Result<(), Error> {
    let path = dir.join(name);
    write_atomic(&path, bytes)?;
    out.files.push(path);
    Ok(())
}

fn fit_json(report: &FitReport) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(&FitReportRecord::from(report)).expect("records always serialize");
    s.push('\n');
    s.into_bytes()
}

/// `m` evenly spaced points on [lo, hi].
fn linear_grid(lo: f64, hi: f64, m: usize) -> Vec<f64> {
    (0..m).map(|k| lo + (hi - lo) * k as f64 / (m - 1) as f64).collect()
}

fn marginal_figure(
    number: u32,
    target: Target,
    opts: &ReproduceOptions,
    sizes: Sizes,
    out: &mut Reproduced,
    log: &mut dyn Write,
) -> Result<(), Error> {
    let dir = &opts.out_dir;
    let fig = format!("fig{number}");
    let truth = target.distribution();
    let fits = fit_approximants(target, opts.seed, sizes.fit, log)?;
    emit(dir, &format!("{fig}_fit_gamma.json"), &fit_json(&fits.gamma), out)?;
    emit(dir, &format!("{fig}_fit_ggc.json"), &fit_json(&fits.ggc), out)?;

    let gamma_draws = fits.gamma.fitted.sample(&mut stream(opts.seed, 1), sizes.fit);
    let ggc_draws = fits.ggc.fitted.sample(&mut stream(opts.seed, 2), sizes.fit);

    let grid = linear_grid(0.0, truth.quantile(0.95)?, KDE_POINTS);
    let density = |sample: &[f64]| -> Result<Vec<f64>, Error> {
        Ok(kde(sample, &grid, None)?.points.into_iter().map(|p| p.1).collect())
    };
    let exact = grid.iter().map(|&x| truth.density(x)).collect::<Result<Vec<_>, _>>()?;
    let columns = [
        ("density_sample", density(&fits.sample)?),
        ("density_exact", exact),
        ("density_gamma", density(&gamma_draws)?),
        ("density_ggc", density(&ggc_draws)?),
    ];
    emit(dir, &format!("{fig}_kde.csv"), &kde_wide_csv(&grid, &columns), out)?;

    let levels = uniform_levels(sizes.plot);
    for (name, fitted, k) in [("gamma", &fits.gamma.fitted, 3), ("ggc", &fits.ggc.fitted, 4)] {
        let draws = fitted.sample(&mut stream(opts.seed, k), sizes.plot);
        let table = qq_against_analytic(&draws, &truth, &levels)?;
        emit(dir, &format!("{fig}_qq_{name}.csv"), &qq_csv(&table), out)?;
    }

    for (name, draws) in [("gamma", gamma_draws), ("ggc", ggc_draws)] {
        let rows = quantile_errors(&truth, &sorted_copy(&draws), &SUMMARY_LEVELS)?;
        let mut line = format!("{fig} {name}:");
        for [p, q, e, rel] in rows {
            let _ = write!(line, " q({p}) = {e:.4} vs {q:.4} ({:+.1}%)", 100.0 * rel);
        }
        out.summary.push(line);
    }
    Ok(())
}

fn copula_figure(opts: &ReproduceOptions, sizes: Sizes, out: &mut Reproduced, log: &mut dyn Write) -> Result<(), Error> {
    let dir = &opts.out_dir;
    for (name, spec) in crossed_variants(opts.seed, sizes, opts.refit, log)? {
        let sample = sample_variant(&spec, sizes.plot, opts.seed);
        let reinjected = reinject_marginals(&sample.totals, &spec.reinjection)?;
        emit(dir, &format!("fig3_raw_{name}.csv"), &sample_matrix_csv(&sample.totals), out)?;
        emit(dir, &format!("fig3_pseudo_{name}.csv"), &sample_matrix_csv(&pseudo_observations(&sample.totals)), out)?;
        emit(dir, &format!("fig3_reinjected_{name}.csv"), &sample_matrix_csv(&reinjected), out)?;
        let tau = kendall_tau(&sample.totals.column(0), &sample.totals.column(1))?;
        let shared = match (sample.piece(0, 1), sample.piece(1, 1)) {
            (Some(a), Some(b)) => kendall_tau(a, b)?,
            _ => f64::NAN,
        };
        out.summary.push(format!("fig3 {name}: tau(X, Y) = {tau:.4}, tau(X_0.8, Y_0.2) = {shared}"));
    }
    Ok(())
}

fn sum_figure(opts: &ReproduceOptions, sizes: Sizes, out: &mut Reproduced, log: &mut dyn Write) -> Result<(), Error> {
    let dir = &opts.out_dir;
    let mut sums = Vec::new();
    for (name, spec) in crossed_variants(opts.seed, sizes, opts.refit, log)? {
        let sample = sample_variant(&spec, sizes.plot, opts.seed);
        sums.push((name, reinjected_sum(&spec, &sample)?));
    }
    let pooled = sorted_copy(&sums.iter().flat_map(|s| s.1.iter().copied()).collect::<Vec<_>>());
    let grid = linear_grid(0.0, empirical_quantile_sorted(&pooled, 0.95), KDE_POINTS);
    for (name, sum) in &sums {
        let curve = kde(sum, &grid, Some(silverman_bandwidth(sum)?))?;
        emit(dir, &format!("fig4_kde_{name}.csv"), &kde_csv(&curve), out)?;
    }
    let ks = ks_statistic(&sums[0].1, &sums[1].1)?;
    let n = sums[0].1.len();
    out.summary.push(format!(
        "fig4: KS(X+Y gamma, X+Y ggc) = {ks:.4} (N = {n}, 1% critical value {:.4})",
        ks_critical_two_sample(n, n)
    ));
    Ok(())
}
