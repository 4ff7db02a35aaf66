use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("invalid domain: {0}")]
    Domain(String),
    #[error("mesh {0} too coarse: {1}")]
    MeshTooCoarse(f64, String),
    #[error("operation needs a {0} lattice")]
    WrongLattice(&'static str),
    #[error("site index {0} out of range")]
    Site(usize),
    #[error("points violate the counterclockwise order x₁, …, xₙ, yₙ, …, y₁")]
    Ordering,
    #[error("sample {0}: blue and yellow connectivities are not complementary")]
    Inconsistent(u64),
    #[error("linear solve stalled at relative residual {0:e}")]
    NotConverged(f64),
    #[error("n_samples must be positive")]
    NoSamples,
}

pub type Result<T> = std::result::Result<T, LatticeError>;
