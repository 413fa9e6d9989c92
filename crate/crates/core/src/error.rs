//! Error type shared by the library.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("flavor index {index} out of range for {dim} flavors")]
    FlavorIndex { index: usize, dim: usize },

    #[error("matrix is not unitary (max |U†U - I| entry = {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("mixing matrix dimension must be 2 or 3, got {dim}")]
    BadDimension { dim: usize },

    #[error("operator is not Hermitian (max |H - H†| entry = {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("massless zero-momentum state has no energy eigenbasis")]
    DegenerateSpinor,

    #[error("momentum grid too narrow: half-width {half_width} < 4 sigma = {min}")]
    GridTooNarrow { half_width: f64, min: f64 },

    #[error("encoding mismatch: operator couples encoded and leftover subspaces")]
    EncodingMismatch,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("state is not normalized (|ψ|² = {norm_sq})")]
    NotNormalized { norm_sq: f64 },

    #[error("kinetic energy must be positive in the ultrarelativistic formula")]
    NonPositiveEnergy,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
