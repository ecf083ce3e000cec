use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid lattice size k = {k} (need k >= 2)")]
    InvalidLattice { k: usize },

    #[error("invalid resolution: fine grid of {fine_n} points cannot hold a lattice of {k} sites")]
    InvalidResolution { fine_n: usize, k: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("power iteration did not converge after {iterations} iterations (last residual {residual:e})")]
    IterationLimit { iterations: usize, residual: f64 },

    #[error("non-positive eigenvector entry at site {site}: irreducibility violated or entry underflowed")]
    IrreducibilityViolation { site: usize },

    #[error("inconsistent eigen-data: stationarity residual {residual:e}")]
    InconsistentEigendata { residual: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("range error: argument {value} exceeds the representable range")]
    Range { value: f64 },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("value iteration did not converge after {iterations} sweeps (last sup-norm change {change:e}, c estimate {c_estimate})")]
    NonConvergence { iterations: usize, change: f64, c_estimate: f64 },

    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(String),

    #[error("interval [{a}, {b}] contains no lattice site")]
    UndefinedInterval { a: f64, b: f64 },

    #[error("potential specification: {0}")]
    PotentialSpec(String),
}
