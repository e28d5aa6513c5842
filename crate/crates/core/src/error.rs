use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("masses sum to {0}, expected 1")]
    MassTotal(String),
    #[error("negative mass {0}")]
    NegativeMass(String),
    #[error("value {value}/{lattice} lies outside [0, 1]")]
    OutOfRange { value: u64, lattice: u64 },
    #[error("duplicate support value {0}")]
    DuplicateSupport(u64),
    #[error("support and masses differ in length ({support} vs {masses})")]
    LengthMismatch { support: usize, masses: usize },
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("lattice mismatch: {0} vs {1}")]
    LatticeMismatch(u64, u64),
    #[error("lattice {lattice} cannot represent {what}")]
    IncompatibleLattice { lattice: u64, what: String },
    #[error("expected {expected} items, got {got}")]
    ItemCount { expected: usize, got: usize },
    #[error("search space of {0} candidates exceeds the limit of {1}")]
    SearchSpaceTooLarge(u128, u128),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unknown lemma {0:?}")]
    UnknownLemma(String),
    #[error("instance format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
