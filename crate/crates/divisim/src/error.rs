use std::path::PathBuf;

/// Errors of the file and command layer. Exit codes: 1 for input and
/// validation problems, 2 for operations the distribution does not support.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] divisim_core::Error),
    #[error("{context}: {source}")]
    Context { context: String, source: Box<Error> },
    #[error("ParseError: {0}")]
    Parse(String),
    #[error("IoError: {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("CsvError: {0}")]
    Csv(String),
    #[error("UnknownFigure: unknown figure {0:?} (expected fig1, fig2, fig3 or fig4)")]
    UnknownFigure(String),
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Self::Context { context: context.into(), source: Box::new(self) }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        use divisim_core::Error as E;
        match self {
            Self::Core(
                E::NotParametricallyDivisible(_)
                | E::UnsupportedTransform(_)
                | E::UnsupportedDensity(_)
                | E::UnsupportedCdf(_)
                | E::UnsupportedQuantile(_),
            ) => 2,
            Self::Context { source, .. } => source.exit_code(),
            _ => 1,
        }
    }
}
