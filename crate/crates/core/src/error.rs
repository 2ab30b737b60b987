use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failures of the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid spin chain: {0}")]
    InvalidChain(String),
    #[error("site {site} out of range 1..={n_spins}")]
    SiteOutOfRange { site: usize, n_spins: usize },
    #[error("operator is not Hermitian (max |A - A†| = {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("eigensolver failed: {0}")]
    Eigensolver(String),
    #[error("free energy difference is undefined at beta = 0")]
    UndefinedFreeEnergy,
    #[error("protocol evaluated at negative time {0}")]
    NegativeTime(f64),
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error("propagation produced a non-physical state (trace drift {drift:e})")]
    NonPhysicalState { drift: f64 },
    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),
    #[error("propagator is not unitary (max |U†U - I| = {deviation:e})")]
    NonUnitary { deviation: f64 },
    #[error("trace has an imaginary residue {residue:e}; inputs are not Hermitian")]
    ImaginaryTrace { residue: f64 },
    #[error("population mismatch: {0}")]
    PopulationMismatch(String),
    #[error("expected {expected} coefficients, found {found}")]
    CoefficientCount { expected: usize, found: usize },
    #[error(
        "protocol runs {found_f0} -> {found_f_final}, expected {expected_f0} -> {expected_f_final}"
    )]
    EndpointMismatch {
        expected_f0: f64,
        expected_f_final: f64,
        found_f0: f64,
        found_f_final: f64,
    },
    #[error("invalid optimizer parameters: {0}")]
    InvalidParams(String),
}
