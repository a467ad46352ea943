use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("lattice `{0}` is not supported by this operation")]
    UnsupportedLattice(&'static str),

    #[error("invalid lattice parameters: {0}")]
    InvalidLattice(String),

    #[error("coset index {index} out of range ({count} cosets)")]
    CosetIndexOutOfRange { index: usize, count: usize },

    #[error("matrix must be square and non-empty")]
    NonSquareMatrix,

    #[error("codebook with {size} cosets exceeds the supported maximum of {max}")]
    CodebookTooLarge { size: usize, max: usize },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("band capacity exceeded: {needed} coefficients requested, band holds {available}")]
    CapacityExceeded { needed: usize, available: usize },

    #[error("image dimensions {width}x{height} are not multiples of 8")]
    NotBlockAligned { width: usize, height: usize },

    #[error("insufficient bits: need {needed}, got {got}")]
    InsufficientBits { needed: usize, got: usize },

    #[error("message symbol {value} out of range for alpha={alpha}")]
    SymbolOutOfRange { value: u8, alpha: u32 },

    #[error("alpha={0} is not a power of two; bit packing undefined")]
    AlphaNotPowerOfTwo(u32),

    #[error("a codebook key is required for this scheme")]
    MissingKey,

    #[error("invalid key file: {0}")]
    InvalidKey(String),

    #[error("invalid PGM: {0}")]
    InvalidPgm(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
