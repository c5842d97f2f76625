use beppo::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{}", format_config(.path, .line, .message))]
    Config {
        path: String,
        line: Option<usize>,
        message: String,
    },

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("{0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("plot: column `{column}` missing from {csv}")]
    MissingColumn { csv: String, column: String },
}

fn format_config(path: &str, line: &Option<usize>, message: &str) -> String {
    match line {
        Some(l) => format!("{path}:{l}: {message}"),
        None => format!("{path}: {message}"),
    }
}

impl RunError {
    /// 1 config/usage, 2 ellipticity, 3 inadmissible rhs, 4 nonconvergence.
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Core(e) => match e {
                CoreError::LegendreHadamard { .. }
                | CoreError::SingularSymbol { .. }
                | CoreError::NotCertified { .. } => 2,
                CoreError::NonzeroMean { .. } => 3,
                CoreError::IterationCap { .. } => 4,
                _ => 1,
            },
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, RunError>;
