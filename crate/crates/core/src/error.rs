use thiserror::Error;

/// Errors raised by the numerical layers of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max deviation {deviation:.3e} > tol {tol:.3e})")]
    NonHermitianInput { deviation: f64, tol: f64 },
    #[error("iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("state became non-finite at t = {t}")]
    NonFiniteState { t: f64 },
    #[error("grid is not uniform (step {index} deviates from {expected:.6e})")]
    NonUniformGrid { index: usize, expected: f64 },
    #[error("matrix is not diagonalizable (eigenvector condition number {condition:.3e})")]
    NotDiagonalizable { condition: f64 },
    #[error("bath correlation for pair ({i}, {j}) is not absolutely integrable")]
    NotIntegrable { i: usize, j: usize },
    #[error("frequency window too narrow: kernel reproduction error {error:.3e} exceeds {tol:.3e}")]
    WindowTooNarrow { error: f64, tol: f64 },
    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFiniteEntry { row: usize, col: usize },
    #[error("generator is singular at t = {t} (amplitude {amplitude:.3e})")]
    SingularGenerator { t: f64, amplitude: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
