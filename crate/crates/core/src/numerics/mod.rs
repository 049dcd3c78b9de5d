//! Dense linear algebra and root finding used by the Bloch solvers:
//! Hermitian eigendecomposition, log-scaled determinants, complex Newton
//! iteration and Laurent least-squares fits.

mod eigh;
mod laurent;
mod lu;
mod newton;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

pub use eigh::{eigh, EigenSelection, HermitianSpectrum};
pub use laurent::{fit_laurent, LaurentFit};
pub use lu::{diagonal_logdet, kernel_vector, logdet, KernelVector, LogDet, LuFactor};
pub use newton::{newton_zero, NewtonOptions, NewtonRoot};

pub type CMatrix = DMatrix<Complex64>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (relative defect {defect:e})")]
    NotHermitian { defect: f64 },
    #[error("tridiagonal QL iteration did not converge")]
    EigenNoConvergence,
    #[error("Newton iteration did not converge after {iterations} steps (|f| = {residual:e})")]
    NewtonNoConvergence { iterations: usize, residual: f64 },
    #[error("Newton derivative vanished or overflowed at z = {z}")]
    DerivativeUnderflow { z: Complex64 },
    #[error("function is not finite at z = {z}")]
    NonFiniteValue { z: Complex64 },
    #[error("least-squares system is rank deficient (condition {condition:e})")]
    RankDeficient { condition: f64 },
    #[error("need at least {required} samples for {unknowns} coefficients, got {actual}")]
    TooFewSamples {
        required: usize,
        unknowns: usize,
        actual: usize,
    },
    #[error("sample abscissae must be distinct and nonzero")]
    DegenerateSamples,
    #[error("matrix is singular")]
    Singular,
}

/// Frobenius norm.
pub fn frobenius(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `‖A - A*‖_F / ‖A‖_F` (zero for the zero matrix).
pub fn hermitian_defect(a: &CMatrix) -> f64 {
    let norm = frobenius(a);
    if norm == 0.0 {
        return 0.0;
    }
    frobenius(&(a - a.adjoint())) / norm
}
