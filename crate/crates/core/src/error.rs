use crate::cubes::CubeId;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("lattice depth {requested} exceeds sampling resolution; deepest valid level is {deepest}")]
    ResolutionExceeded { requested: usize, deepest: usize },

    #[error("pole is not inside the domain")]
    PoleOutsideDomain,

    #[error("pole lies inside the inflated ball M*B_Q0")]
    PoleTooClose,

    #[error("no interior point found in ball after {attempts} rejections")]
    NoInteriorPoint { attempts: usize },

    #[error("neither corkscrew candidate is interior at top cube {0}")]
    CorkscrewFailure(CubeId),

    #[error("no Whitney cubes meet the region around cube {0}")]
    EmptyWhitneyRegion(CubeId),

    #[error("classification of word {word} is indeterminate at {walkers} walkers")]
    IndeterminateClassification { word: String, walkers: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit status: 3 for numerical failures, 1 for everything the
    /// caller can fix by changing the input.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NoInteriorPoint { .. }
            | Error::CorkscrewFailure(_)
            | Error::EmptyWhitneyRegion(_)
            | Error::IndeterminateClassification { .. } => 3,
            _ => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
