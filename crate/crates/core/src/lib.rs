//! Finite-dimensional toolkit for perturbations of faithful states.
//!
//! Everything here works on dense Hermitian matrices over `Complex<f64>`.
//! The building blocks are [`operator::HermitianOperator`] (exact storage
//! symmetry), [`spectral`] (verified eigendecompositions, matrix functions,
//! Loewner order), and [`weight::FiniteWeight`] / [`weight::DensityState`]
//! (strictly positive weights and unit-trace states). On top of those sit
//! operator norms tied to a base weight ([`norms`]), the perturbation
//! calculus `rho_X = exp(log rho - X)` with its expansion and two-sided
//! bounds ([`expansional`]), and entropy/geodesic machinery ([`geometry`]).
//! [`sampling`] generates seeded random instances, [`audit`] runs ensemble
//! checks over them, and [`oracles`] holds slow reference implementations
//! used by tests to cross-check the fast paths.

#![forbid(unsafe_code)]

pub mod audit;
pub mod expansional;
pub mod geometry;
pub mod norms;
pub mod operator;
pub mod oracles;
pub mod sampling;
pub mod spectral;
pub mod weight;

use thiserror::Error;

/// Complex scalar used throughout.
pub type C64 = nalgebra::Complex<f64>;
/// Dense complex matrix used throughout.
pub type CMat = nalgebra::DMatrix<C64>;

/// Largest supported matrix dimension.
pub const MAX_DIM: usize = 1024;
/// Largest supported expansion truncation order.
pub const MAX_ORDER: usize = 30;

/// Eigendecomposition accuracy constant: reconstruction and orthonormality
/// residuals must stay below `TOL_EIG * n` times the matrix scale.
pub const TOL_EIG: f64 = 1e-12;
/// Default slack for Loewner comparisons, relative to the operand scale.
pub const DEFAULT_LOEWNER_TOL: f64 = 1e-10;
/// A density state's trace may deviate from 1 by at most this.
pub const TRACE_TOL: f64 = 1e-9;
/// Faithfulness gate: a weight's smallest eigenvalue must exceed
/// `n * POSITIVITY_FACTOR` times its largest.
pub const POSITIVITY_FACTOR: f64 = 1e-14;
/// A parsed matrix may deviate from Hermitian symmetry by at most this,
/// relative to its Frobenius norm.
pub const HERMITICITY_TOL: f64 = 1e-8;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: symmetrization residual {residual:.3e} exceeds {bound:.3e}")]
    NotHermitian { residual: f64, bound: f64 },
    #[error("eigendecomposition did not converge for a {dim}x{dim} matrix with Frobenius norm {norm:.3e}")]
    EigenConvergence { dim: usize, norm: f64 },
    #[error("eigendecomposition failed the {check} check: residual {residual:.3e} exceeds {bound:.3e}")]
    EigenVerification {
        check: &'static str,
        residual: f64,
        bound: f64,
    },
    #[error("weight is not strictly positive: smallest eigenvalue {min_eigenvalue:.6e} is below the faithfulness gate {gate:.6e}")]
    NotFaithful { min_eigenvalue: f64, gate: f64 },
    #[error("trace {trace:.12} is not 1 within {tol:.1e}")]
    NotNormalized { trace: f64, tol: f64 },
    #[error("scalar function produced a non-finite value at eigenvalue {eigenvalue:.6e}")]
    FunctionDomain { eigenvalue: f64 },
    #[error("dimension mismatch: {left}x{left} vs {right}x{right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("dimension {dim} is outside the supported range 1..={max}")]
    DimensionRange { dim: usize, max: usize },
    #[error("truncation order {order} exceeds the supported maximum {max}")]
    OrderRange { order: usize, max: usize },
    #[error("invalid certificate: {reason}")]
    InvalidCertificate { reason: String },
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("cannot parse matrix document: {0}")]
    Parse(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dims_match(left: usize, right: usize) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { left, right })
    }
}

pub(crate) fn check_dim_range(dim: usize) -> Result<()> {
    if dim >= 1 && dim <= MAX_DIM {
        Ok(())
    } else {
        Err(Error::DimensionRange { dim, max: MAX_DIM })
    }
}
