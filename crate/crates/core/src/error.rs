use thiserror::Error;

/// Errors raised across the library. Each variant maps to one failure class
/// of the pipeline; the CLI turns them into exit codes via [`Error::exit_code`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("certificate failed: {0}")]
    Certificate(String),

    #[error("width error: {0}")]
    Width(String),

    #[error("no root in [{lo}, {hi}]: {reason}")]
    NoRoot { lo: f64, hi: f64, reason: String },

    #[error("mean-curvature mismatch at junction {junction}: {left} vs {right}")]
    Match { junction: usize, left: f64, right: f64 },

    #[error("sigma = {sigma} violates the admissibility threshold {threshold}")]
    Threshold { sigma: f64, threshold: f64 },

    #[error("sigma = {sigma} is within rounding of the threshold {threshold}; ell diverges")]
    Divergent { sigma: f64, threshold: f64 },

    #[error("hypothesis bullet {bullet} violated: {detail}")]
    Hypothesis { bullet: u8, detail: String },

    #[error("barrier condition fails (margins: minus {minus}, plus {plus})")]
    Barrier { minus: f64, plus: f64 },

    #[error("discrete minimizer sits in a collar at {position}")]
    BoundaryMinimizer { position: f64 },

    #[error("set is not admissible: {0}")]
    Admissibility(String),

    #[error("brute force budget exceeded: {cells} interior cells > {budget}")]
    Budget { cells: usize, budget: usize },
}

impl Error {
    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) => 65,
            Error::Certificate(_) => 66,
            Error::Width(_) => 67,
            Error::NoRoot { .. } => 68,
            Error::Match { .. } => 69,
            Error::Threshold { .. } | Error::Divergent { .. } => 70,
            Error::Hypothesis { .. } => 2,
            Error::Barrier { .. } | Error::BoundaryMinimizer { .. } => 71,
            Error::Admissibility(_) => 72,
            Error::Budget { .. } => 73,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
