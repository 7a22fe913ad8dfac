//! String-kernel dialect and topic identification toolkit.
//!
//! The pipeline is: load a labelled corpus ([`corpus`]), turn every document
//! into sets of character n-gram fingerprints ([`kernel`]), build Gram
//! matrices with the presence-bits (or histogram intersection) kernel, fit
//! kernel ridge regression in the dual ([`krr`]) and score the five
//! benchmark tasks ([`eval`]).
//!
//! Numeric code is generic over [`Scalar`]; the `*64` / `*32` aliases below
//! pick a concrete precision.

pub mod cache;
pub mod cli;
pub mod corpus;
pub mod eval;
pub mod kernel;
pub mod krr;
pub mod linalg;
pub mod scalar;
pub mod synthetic;

pub use scalar::Scalar;

pub type GramMatrix64 = kernel::GramMatrix<f64>;
pub type GramMatrix32 = kernel::GramMatrix<f32>;
pub type DualModel64 = krr::DualModel<f64>;
pub type DualModel32 = krr::DualModel<f32>;
pub type PrimalWeights64 = krr::PrimalWeights<f64>;
pub type PrimalWeights32 = krr::PrimalWeights<f32>;
pub type Matrix64 = linalg::Matrix<f64>;
pub type Matrix32 = linalg::Matrix<f32>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("missing subset file: {0}")]
    MissingSubset(String),
    #[error("{file}:{row}: {message}")]
    Row { file: String, row: usize, message: String },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("factorization failed at index {index}: pivot {pivot:e}")]
    Factorization { pivot: f64, index: usize },
    #[error("consistency check failed: {0}")]
    Mismatch(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io { path: path.as_ref().display().to_string(), source }
    }

    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Factorization { .. } => 3,
            Error::Mismatch(_) => 4,
            _ => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::MissingSubset(_) => "missing_subset",
            Error::Row { .. } => "row",
            Error::Invalid(_) => "invalid",
            Error::Dimension(_) => "dimension",
            Error::Factorization { .. } => "factorization",
            Error::Mismatch(_) => "mismatch",
            Error::Unsupported(_) => "unsupported",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
