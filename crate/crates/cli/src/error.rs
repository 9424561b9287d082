use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("{0}")]
    Usage(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error(transparent)]
    Core(#[from] besov_inflate::Error),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),

    #[error("json output: {0}")]
    Json(#[from] serde_json::Error),

    #[error("thread pool: {0}")]
    Threads(String),
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Machine-readable form printed on failure.
#[derive(Debug, Serialize)]
pub struct ErrorRecord {
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn kind(&self) -> &'static str {
        use besov_inflate::Error as E;
        match self {
            CliError::Config { .. } => "config",
            CliError::Usage(_) => "usage",
            CliError::Precondition(_) => "precondition",
            CliError::Io { .. } => "io",
            CliError::Csv(_) | CliError::Json(_) => "output",
            CliError::Threads(_) => "threads",
            CliError::Core(e) => match e {
                E::InvalidGrid(_) | E::GridMismatch => "grid",
                E::UnresolvedBlock { .. } | E::Resolution { .. } => "resolution",
                E::InvalidExponent(_) | E::InvalidBesovIndex(_) => "exponent",
                E::InvalidScale(_) => "scale",
                E::Coverage { .. } => "coverage",
                E::QuadratureBudget { .. } => "quadrature_budget",
                E::BlowUp { .. } => "blow_up",
                E::Cfl { .. } => "cfl",
                E::JacobianBound { .. } => "jacobian_bound",
                E::TrajectoryMismatch(_) => "trajectory_mismatch",
                E::InvalidSolverConfig(_) => "solver_config",
                E::Precondition(_) => "precondition",
            },
        }
    }

    pub fn record(&self) -> ErrorRecord {
        ErrorRecord {
            kind: self.kind(),
            message: self.to_string(),
        }
    }

    /// One-line JSON, `{"error":{"kind":..,"message":..}}`.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Wrapper {
            error: ErrorRecord,
        }
        serde_json::to_string(&Wrapper {
            error: self.record(),
        })
        .unwrap_or_else(|_| format!("{{\"error\":{{\"kind\":\"{}\"}}}}", self.kind()))
    }
}
