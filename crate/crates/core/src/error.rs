use thiserror::Error;

/// Errors raised by trajectory assembly, spectral tracking and the
/// thermodynamic functionals.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("non-finite parameter `{name}`")]
    NonFiniteParameter { name: &'static str },

    #[error("matrix is not Hermitian: relative defect {defect:.3e} exceeds {tol:.3e}")]
    NotHermitian { defect: f64, tol: f64 },

    #[error("matrix is not unitary: |U^H U - I| = {defect:.3e} exceeds {tol:.3e}")]
    NotUnitary { defect: f64, tol: f64 },

    #[error("trace deviates from 1 by {deviation:.3e} (tolerance {tol:.3e})")]
    TraceDeviation { deviation: f64, tol: f64 },

    #[error("negative eigenvalue {eigenvalue:.3e} beyond tolerance {tol:.3e}")]
    NegativeEigenvalue { eigenvalue: f64, tol: f64 },

    #[error("eigendecomposition residual {residual:.3e} exceeds {tol:.3e}")]
    EigenResidual { residual: f64, tol: f64 },

    #[error("cluster tolerance must be positive, got {tol:.3e}")]
    NonPositiveTolerance { tol: f64 },

    #[error(
        "eigenframe overlap near-singular (smallest singular value {sigma_min:.3e} < 0.1); \
         refine the time grid"
    )]
    FrameOverlapSingular { sigma_min: f64 },

    #[error(
        "eigenframe discontinuity at grid index {index} (smallest overlap singular value \
         {sigma_min:.3e} < 0.1); refine the time grid"
    )]
    FrameDiscontinuity { index: usize, sigma_min: f64 },

    #[error("grid too small: need at least {required} points, got {actual}")]
    GridTooSmall { required: usize, actual: usize },

    #[error("grid index {index} out of range for {len} points")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("inconsistent degeneracy structure: {reason}")]
    StructureMismatch { reason: String },

    #[error("matrix is not block-diagonal: off-block norm {norm:.3e} exceeds {tol:.3e}")]
    NotBlockDiagonal { norm: f64, tol: f64 },

    #[error("unknown functional handle `{name}`")]
    UnknownFunctional { name: String },

    #[error("invalid Hamiltonian family: {reason}")]
    InvalidFamily { reason: String },

    #[error(
        "first-law residual {residual:.3e} exceeds tolerance {tol:.3e}; \
         the time grid is numerically inconsistent (too coarse)"
    )]
    FirstLawResidual { residual: f64, tol: f64 },

    #[error("evaluation point {t} (step {h}) leaves the curve domain [{lo}, {hi}]")]
    OutsideDomain { t: f64, h: f64, lo: f64, hi: f64 },
}

impl Error {
    /// Attach a grid index to a frame-overlap failure; other errors pass through.
    pub fn at_grid_index(self, index: usize) -> Self {
        match self {
            Error::FrameOverlapSingular { sigma_min } => {
                Error::FrameDiscontinuity { index, sigma_min }
            }
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
