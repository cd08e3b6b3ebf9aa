use thiserror::Error;

/// Every failure mode of the index computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum IndexError {
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension {0} is odd; symplectic objects live in even dimension")]
    OddDimension(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),
    #[error("input is not symmetric (defect {defect:.3e})")]
    AsymmetricInput { defect: f64 },
    #[error("input is not Hermitian (defect {defect:.3e})")]
    NonHermitianInput { defect: f64 },
    #[error("matrix is not symplectic (defect {defect:.3e})")]
    NotSymplectic { defect: f64 },
    #[error("matrix is not Hamiltonian (defect {defect:.3e})")]
    NotHamiltonian { defect: f64 },
    #[error("form matrix is not antisymmetric and invertible")]
    InvalidForm,
    #[error("frame is not Lagrangian: {0}")]
    NotLagrangian(String),
    #[error("subspace is not isotropic (defect {defect:.3e})")]
    NotIsotropic { defect: f64 },
    #[error("frames live in different symplectic spaces")]
    SpaceMismatch,
    #[error("eigenvalue {re}+{im}i is not on the unit circle")]
    NotOnUnitCircle { re: f64, im: f64 },
    #[error("{re}+{im}i is not an eigenvalue")]
    NotAnEigenvalue { re: f64, im: f64 },
    #[error("Krein form is degenerate on the eigenspace of {re}+{im}i")]
    DegenerateForm { re: f64, im: f64 },
    #[error("matrix is not semisimple")]
    NotSemisimple,
    #[error("spectrum does not split into normal-form blocks: {0}")]
    UnclassifiableSpectrum(String),
    #[error("grid with {0} intervals is below the minimum of 64")]
    GridTooSmall(usize),
    #[error("crossing at t = {t} is not regular (degenerate crossing form)")]
    NonRegularCrossing { t: f64 },
    #[error("two crossings inside one cell of a {grid_n}-interval grid")]
    GridTooCoarse { grid_n: usize },
    #[error("kernel is empty at t = {t}")]
    EmptyKernel { t: f64 },
    #[error("no Lagrangian complement found at t = {t}")]
    ComplementFailure { t: f64 },
    #[error("matrix A is singular")]
    SingularA,
    #[error("K is not contained in L1∩L2 + L2∩L3 + L3∩L1")]
    KNotAdmissible,
    #[error("transversality condition psi(1)L0 ∩ L0 = 0 fails")]
    TransversalityViolated,
    #[error("correction matrix is not symmetric (defect {defect:.3e})")]
    SymmetryDefect { defect: f64 },
    #[error("psi(1) - I is singular")]
    DegenerateEndpoint,
    #[error("internal mismatch: {0}")]
    InternalMismatch(String),
    #[error("sign calibration failed: {0}")]
    CalibrationFailure(String),
}

pub type Result<T> = std::result::Result<T, IndexError>;
