use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("half-dimension n = {0} is outside the supported range 1..={1}")]
    UnsupportedDim(usize, usize),

    #[error("coefficient array has length {got}, expected {expected}")]
    BadLength { got: usize, expected: usize },

    #[error("expected a homogeneous 2-form (largest off-degree coefficient {0:.3e})")]
    NotDegreeTwo(f64),

    #[error("expected real coefficients (largest imaginary part {0:.3e})")]
    NotReal(f64),

    #[error("zero form has no annihilator structure")]
    ZeroForm,

    #[error("matrix condition violated: {0}")]
    BadMatrix(String),

    #[error("spinor is not pure and nondegenerate: {0}")]
    NotPureSpinor(String),

    #[error("U^k index {k} outside [-{n}, {n}]")]
    BadEigenIndex { k: i64, n: usize },

    #[error("structures do not commute (defect {0:.3e})")]
    NotCommuting(f64),

    #[error("generalized metric is not positive definite (smallest eigenvalue {0:.3e})")]
    NotPositive(f64),

    #[error("grid error: {0}")]
    Grid(String),

    #[error("rank mismatch: {left} vs {right}")]
    RankMismatch { left: usize, right: usize },

    #[error("field is not skew-Hermitian (defect {0:.3e})")]
    NotSkewHermitian(f64),

    #[error("psi not d-closed (|d psi| = {0:.3e})")]
    NotClosed(f64),

    #[error("degenerate spinor pairing at grid point {0:?}")]
    DegeneratePoint(Vec<usize>),

    #[error("least-squares residual {0:.3e} too large: form is not eta.phi")]
    NotIntegrable(f64),

    #[error("density ratio is not positive at grid point {0:?}")]
    NonPositiveDensity(Vec<usize>),

    #[error("zero covector has no symbol")]
    ZeroCovector,

    #[error("non-abelian rank {0}: the solver only handles line bundles (non-abelian solving is a non-goal)")]
    NonAbelian(usize),

    #[error("step size collapsed below {0:.1e}")]
    StepCollapse(f64),

    #[error("invalid input: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;
