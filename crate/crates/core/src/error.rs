use thiserror::Error;

use crate::synthesis::SynthesisReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Inconsistent matrix shapes, reported against the offending item.
    #[error("configuration error: {what} has shape {found}, expected {expected}")]
    Dimension {
        what: String,
        expected: String,
        found: String,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("input error: {0}")]
    Input(String),

    /// Mode indices in this message are 1-based.
    #[error("precondition error: mode {mode} is not Schur stable (spectral radius {radius:.6})")]
    NotSchurStable { mode: usize, radius: f64 },

    #[error("precondition error: {0}")]
    Precondition(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error(
        "synthesis error: stability constraint unsatisfiable at step {jump_time} \
         even with the horizon extended by {max_growth} steps"
    )]
    ConstraintUnsatisfiable {
        jump_time: usize,
        max_growth: usize,
        partial: Box<SynthesisReport>,
    },

    #[error(
        "input error: exhaustive search over {modes}^{steps} sequences exceeds the enumeration cap \
         (steps * log2(modes) <= 24); use the receding_horizon strategy instead"
    )]
    EnumerationCap { modes: usize, steps: usize },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn dimension(what: impl Into<String>, expected: (usize, usize), found: (usize, usize)) -> Self {
        Error::Dimension {
            what: what.into(),
            expected: format!("{}x{}", expected.0, expected.1),
            found: format!("{}x{}", found.0, found.1),
        }
    }

    /// Short tag naming the subsystem that raised the error.
    pub fn module(&self) -> &'static str {
        match self {
            Error::Dimension { .. } | Error::Config(_) | Error::Parse(_) => "config",
            Error::Input(_) | Error::EnumerationCap { .. } | Error::ConstraintUnsatisfiable { .. } => "synthesis",
            Error::NotSchurStable { .. } | Error::Numerical(_) => "analysis",
            Error::Precondition(_) | Error::Domain(_) => "quadrotor",
            Error::Io(_) => "io",
        }
    }
}
