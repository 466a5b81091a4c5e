use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(
        "candidate cluster of waveguide {waveguide} spans x = [{x_min:.3}, {x_max:.3}] m, outside [0, {side}] m"
    )]
    ClusterOutOfBounds {
        waveguide: usize,
        x_min: f64,
        x_max: f64,
        side: f64,
    },

    #[error("correlation matrix is not positive semidefinite (eigenvalue {eigenvalue:e})")]
    NotPositiveSemidefinite { eigenvalue: f64 },

    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("signal set of {eta} bits exceeds the enumeration cap of {cap} bits")]
    EnumerationCap { eta: u32, cap: u32 },

    #[error("spectral efficiency is zero: the signal set has a single element")]
    SingleSignal,

    #[error("expected {expected} bits, found {found}")]
    BitCount { expected: usize, found: usize },

    #[error("bit value {0} is not 0 or 1")]
    NotABit(u8),

    #[error("activation pattern rank {rank} outside the {count} legitimate patterns")]
    InvalidRank { rank: u64, count: u64 },

    #[error("index set is not a legitimate activation pattern")]
    IllegalPattern,

    #[error("modulation order {0} is not a power of two >= 2")]
    InvalidModOrder(u32),

    #[error("matrix is singular")]
    Singular,

    #[error("resolvent I - s C Q is singular at s = {s}")]
    SingularResolvent { s: f64 },

    #[error("retraction undefined: w + step is the zero vector")]
    RetractionUndefined,
}
