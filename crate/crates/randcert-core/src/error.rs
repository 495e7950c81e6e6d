use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid behavior: {0}")]
    InvalidBehavior(String),

    #[error("non-physical correlators: reconstructed probability {value:.3e} at cell {cell}")]
    NonPhysical { cell: usize, value: f64 },

    #[error("witness value {value} outside [{lo}, {hi}] for {what}")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("{model} is valid for witness values in ({lo}, {hi}], got {value}")]
    Domain {
        model: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("{0} does not pair with this witness")]
    Pairing(&'static str),

    #[error("weights must be non-negative and sum to one")]
    BadWeights,

    #[error("length mismatch: {0} behaviors, {1} weights")]
    LengthMismatch(usize, usize),

    #[error("problem is infeasible")]
    Infeasible,

    #[error("iteration cap reached")]
    MaxIter,

    #[error("{0}")]
    Invalid(String),
}
