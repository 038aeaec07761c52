use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A constructor or operation received an out-of-range argument.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The battery reached zero charge; the control metric is undefined
    /// there (its low-battery penalty divides by the charge fraction).
    #[error("battery fully drained: control metric undefined at zero charge")]
    BatteryDrained,

    /// All training irradiance values are identical, so no slope can be
    /// identified.
    #[error("singular design: all training irradiance values are equal")]
    SingularDesign,

    /// The train fraction left no holdout samples.
    #[error("empty holdout: train fraction leaves no test samples")]
    EmptyHoldout,

    #[error("not enough samples: need at least {needed}, got {got}")]
    NotEnoughSamples { needed: usize, got: usize },

    /// A data file failed to parse; `line` is 1-based and counts the header.
    #[error("{}:{line}: {msg}", path.display())]
    Malformed {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Exhaustive search found no parameter tuple feasible on every
    /// training trace.
    #[error("no feasible parameters in the search grid")]
    NoFeasibleParameters,

    /// The trace cannot keep the battery above its floor even at the
    /// minimum sampling rate.
    #[error("trace cannot sustain minimum rate")]
    UnsustainableTrace,

    /// An accessor was called on a solution that is not optimal.
    #[error("no optimal solution available: {0}")]
    NotOptimal(String),

    /// The LP solver gave up (iteration cap); indicates a numerically
    /// hostile instance rather than infeasibility.
    #[error("linear program solver exceeded {0} iterations")]
    SolverStalled(usize),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn malformed(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Malformed {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }
}
