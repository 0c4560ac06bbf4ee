//! Command line surface.
//!
//! Exit codes: 0 success, 1 input or validation error, 2 unsupported
//! operation, 3 fit reported without convergence.

use std::ffi::OsString;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use divisim_core::divisibility::{partition, piece};
use divisim_core::fitting::{
    fit_gamma_convolution, fit_gamma_convolution_with, fit_gamma_mle, fit_gamma_shifted_moments,
    estimate_shifted_moments,
};
use divisim_core::riskfactor::reinject_marginals;
use divisim_core::{GgcOptions, LaplaceGrid, PiecePartition, PieceWeight, SampleMatrix};

use crate::figures::{self, crossed_preset, stream, ReproduceOptions};
use crate::io::{read_sample_csv, read_text, sample_matrix_csv, write_atomic};
use crate::record::{parse_distribution, DistributionRecord, FitReportRecord, ModelRecord, ModelSpec};
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_CONVERGED: i32 = 3;

/// Name of the built-in crossed 20%/80% model.
pub const CROSSED_MODEL: &str = "paper-4b";

#[derive(Debug, Parser)]
#[command(name = "divisim", version, about = "Divisible approximants and risk factor sampling")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    /// Gamma by maximum likelihood.
    GammaMle,
    /// Gamma matching E[e^-X] and E[X e^-X].
    GammaShifted,
    /// Finite Gamma convolution fitted to the empirical log-Laplace transform.
    Ggc,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit an approximant to a one-column CSV sample.
    Fit {
        #[arg(long, value_enum)]
        family: Family,
        /// Number of Gamma atoms (ggc only).
        #[arg(long, default_value_t = 20)]
        atoms: usize,
        #[arg(long, env = "DIVISIM_SEED", default_value_t = 42)]
        seed: u64,
        /// Transform grid reaching 1/q(0.9999) with relative weights (ggc only).
        #[arg(long)]
        tail: bool,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        input: PathBuf,
    },
    /// Split a distribution into pieces.
    Divide {
        /// One weight, or a comma list summing to one.
        #[arg(long, value_delimiter = ',', required = true)]
        beta: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Inline JSON record or a path to one.
        dist: String,
    },
    /// Sample a risk factor model to CSV.
    Sample {
        /// Model file, or `paper-4b` for the built-in crossed model.
        #[arg(long)]
        model: String,
        #[arg(long)]
        n: usize,
        #[arg(long, env = "DIVISIM_SEED", default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Replace the marginals by the model's reinjection targets, rank by rank.
        #[arg(long)]
        reinject: bool,
    },
    /// Write the data behind one figure as CSV.
    Reproduce {
        /// fig1, fig2, fig3 or fig4.
        figure: String,
        #[arg(long, env = "DIVISIM_SEED", default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        /// Scales every sample size.
        #[arg(long, default_value_t = 1.0)]
        budget: f64,
        /// Refit the approximants of fig3 and fig4 instead of using the bundled ones.
        #[arg(long)]
        refit: bool,
    },
    /// Check a model file and print its normalized form.
    Validate {
        /// Model file, or `paper-4b`.
        model: String,
    },
}

/// Parses `args` (program name first) and runs the command.
pub fn run_from<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                return 1;
            }
            let _ = write!(stdout, "{}", e.render());
            return EXIT_OK;
        }
    };
    match run(cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, Error> {
    match command {
        Command::Fit { family, atoms, seed, tail, out, input } => {
            let sample = read_sample_csv(&input)?;
            let report = match family {
                Family::GammaMle => fit_gamma_mle(&sample)?,
                Family::GammaShifted => fit_gamma_shifted_moments(&estimate_shifted_moments(&sample)?)?,
                Family::Ggc if tail => fit_gamma_convolution_with(&sample, &GgcOptions::heavy_tailed(&sample, atoms, seed)?)?,
                Family::Ggc => fit_gamma_convolution(&sample, atoms, &LaplaceGrid::default_for(&sample, atoms)?, seed)?,
            };
            let mut text = serde_json::to_string_pretty(&FitReportRecord::from(&report)).expect("records serialize");
            text.push('\n');
            emit(out.as_deref(), text.as_bytes(), stdout)?;
            if report.converged {
                Ok(EXIT_OK)
            } else {
                let _ = writeln!(stderr, "warning: NotConverged: fit reported at the iteration cap");
                Ok(EXIT_NOT_CONVERGED)
            }
        }
        Command::Divide { beta, out, dist } => {
            let text = if dist.trim_start().starts_with('{') { dist } else { read_text(Path::new(&dist))? };
            let d = parse_distribution(&text)?;
            let hint = |e: divisim_core::Error| match e {
                divisim_core::Error::NotParametricallyDivisible(_) => Error::from(e).context("fit an approximant first"),
                other => other.into(),
            };
            let text = if beta.len() == 1 {
                let p = piece(&d, PieceWeight::new(beta[0])?).map_err(hint)?;
                serde_json::to_string(&DistributionRecord::from(&p))
            } else {
                let parts = partition(&d, &PiecePartition::new(beta)?).map_err(hint)?;
                serde_json::to_string(&parts.iter().map(DistributionRecord::from).collect::<Vec<_>>())
            };
            let mut text = text.expect("records serialize");
            text.push('\n');
            emit(out.as_deref(), text.as_bytes(), stdout)?;
            Ok(EXIT_OK)
        }
        Command::Sample { model, n, seed, out, reinject } => {
            let spec = load_model(&model)?;
            let sample = spec.model.sample(n, &mut stream(seed, 10));
            let sample = if reinject { reinject_marginals(&sample, &spec.reinjection)? } else { sample };
            let names = column_names(&model, sample.n_cols());
            let sample = SampleMatrix::from_columns(names, &sample.columns())?;
            emit(out.as_deref(), &sample_matrix_csv(&sample), stdout)?;
            Ok(EXIT_OK)
        }
        Command::Reproduce { figure, seed, out, budget, refit } => {
            let opts = ReproduceOptions { seed, out_dir: out, budget, refit };
            let done = figures::reproduce(&figure, &opts, stderr)?;
            for path in &done.files {
                let _ = writeln!(stderr, "wrote {}", path.display());
            }
            for line in &done.summary {
                let _ = writeln!(stdout, "{line}");
            }
            Ok(EXIT_OK)
        }
        Command::Validate { model } => {
            let spec = load_model(&model)?;
            let mut text = serde_json::to_string_pretty(&ModelRecord::from(&spec)).expect("records serialize");
            text.push('\n');
            stdout.write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e))?;
            Ok(EXIT_OK)
        }
    }
}

fn load_model(name: &str) -> Result<ModelSpec, Error> {
    if name == CROSSED_MODEL {
        return Ok(crossed_preset());
    }
    let text = read_text(Path::new(name))?;
    ModelRecord::parse(&text).and_then(|r| r.build()).map_err(|e| e.context(name.to_string()))
}

fn column_names(model: &str, d: usize) -> Vec<String> {
    if model == CROSSED_MODEL {
        vec!["x".into(), "y".into()]
    } else {
        SampleMatrix::default_names(d)
    }
}

fn emit(out: Option<&Path>, bytes: &[u8], stdout: &mut dyn Write) -> Result<(), Error> {
    match out {
        Some(path) => write_atomic(path, bytes),
        None => stdout.write_all(bytes).map_err(|e| Error::io("<stdout>", e)),
    }
}

/// Entry point of the binary.
pub fn main() -> i32 {
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_from(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}
