//! Strictly positive weights, unit-trace states, and the two-sided
//! nearby relation between them.

use crate::operator::HermitianOperator;
use crate::spectral::{self, SpectralDecomposition};
use crate::{CMat, Error, Result, POSITIVITY_FACTOR, TRACE_TOL};
use nalgebra::DVector;

/// A strictly positive Hermitian matrix carrying its eigendecomposition.
///
/// Faithfulness gate: the smallest eigenvalue must exceed
/// `n * POSITIVITY_FACTOR * ||rho||`. Inputs below the gate are rejected,
/// never regularized.
#[derive(Debug, Clone)]
pub struct FiniteWeight {
    op: HermitianOperator,
    spectral: SpectralDecomposition,
}

impl FiniteWeight {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        let spectral = spectral::eig(&op)?;
        Self::gate(&spectral)?;
        Ok(Self { op, spectral })
    }

    /// Assembles a weight directly from verified spectral data, skipping the
    /// redundant re-decomposition. `eigenvectors` must come from [`spectral::eig`]
    /// (or be exactly unitary); `eigenvalues` must be ascending.
    pub(crate) fn from_spectral(eigenvectors: CMat, eigenvalues: DVector<f64>) -> Result<Self> {
        let spectral = SpectralDecomposition::from_parts(eigenvalues, eigenvectors);
        Self::gate(&spectral)?;
        let op = HermitianOperator::from_nearly_hermitian(spectral.assemble(spectral.eigenvalues()));
        Ok(Self { op, spectral })
    }

    fn gate(spectral: &SpectralDecomposition) -> Result<()> {
        let min = spectral.min_eigenvalue();
        let gate = spectral.dim() as f64 * POSITIVITY_FACTOR * spectral.operator_norm();
        if !(min > gate) || min <= 0.0 {
            return Err(Error::NotFaithful { min_eigenvalue: min, gate });
        }
        Ok(())
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn spectral(&self) -> &SpectralDecomposition {
        &self.spectral
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn trace(&self) -> f64 {
        self.spectral.eigenvalues().iter().sum()
    }

    /// Largest eigenvalue; equals the operator norm for a positive matrix.
    pub fn operator_norm(&self) -> f64 {
        self.spectral.max_eigenvalue()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.spectral.min_eigenvalue()
    }

    /// `rho^t`, defined for every real `t` because the spectrum is positive.
    pub fn power(&self, t: f64) -> HermitianOperator {
        self.spectral
            .apply(|x| x.powf(t))
            .expect("positive spectrum stays finite under powf")
    }

    /// `log rho`.
    pub fn log(&self) -> HermitianOperator {
        self.spectral
            .apply(f64::ln)
            .expect("positive spectrum stays finite under ln")
    }

    /// Expectation `tr(normalized(rho) x)`; real for Hermitian `x`.
    pub fn expectation(&self, x: &HermitianOperator) -> Result<f64> {
        Ok(self.op.trace_product(x)? / self.trace())
    }

    /// The state `rho / tr(rho)`, reusing the existing decomposition.
    pub fn normalized(&self) -> DensityState {
        let tr = self.trace();
        let eigenvalues = self.spectral.eigenvalues() / tr;
        let weight = Self::from_spectral(self.spectral.eigenvectors().clone(), eigenvalues)
            .expect("scaling preserves faithfulness");
        DensityState { weight }
    }
}

/// A faithful weight with unit trace.
#[derive(Debug, Clone)]
pub struct DensityState {
    weight: FiniteWeight,
}

impl DensityState {
    /// Requires `|tr(rho) - 1| <= TRACE_TOL`; never rescales.
    pub fn new(weight: FiniteWeight) -> Result<Self> {
        let trace = weight.trace();
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::NotNormalized { trace, tol: TRACE_TOL });
        }
        Ok(Self { weight })
    }

    pub fn from_operator(op: HermitianOperator) -> Result<Self> {
        Self::new(FiniteWeight::new(op)?)
    }

    pub fn weight(&self) -> &FiniteWeight {
        &self.weight
    }

    pub fn op(&self) -> &HermitianOperator {
        self.weight.op()
    }

    pub fn spectral(&self) -> &SpectralDecomposition {
        self.weight.spectral()
    }

    pub fn dim(&self) -> usize {
        self.weight.dim()
    }

    /// Exactly 1 up to construction roundoff.
    pub fn trace(&self) -> f64 {
        self.weight.trace()
    }

    pub fn power(&self, t: f64) -> HermitianOperator {
        self.weight.power(t)
    }

    pub fn log(&self) -> HermitianOperator {
        self.weight.log()
    }

    pub fn expectation(&self, x: &HermitianOperator) -> Result<f64> {
        self.weight.expectation(x)
    }
}

/// `(1 - lambda) a + lambda b` as a state; positivity is closed under
/// convex combination, the trace stays exactly 1 up to roundoff.
pub fn mixture(lambda: f64, a: &DensityState, b: &DensityState) -> Result<DensityState> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParameter {
            name: "lambda",
            reason: format!("must lie in [0, 1], got {lambda}"),
        });
    }
    let combined = a.op().scale(1.0 - lambda).add(&b.op().scale(lambda))?;
    DensityState::from_operator(combined)
}

/// Claimed two-sided comparison `C^-1 rho^(1+p) <= sigma <= C rho^(1-p)`.
///
/// `C` must be strictly above 1 and `p` must lie in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearbyCertificate {
    constant: f64,
    exponent: f64,
}

impl NearbyCertificate {
    pub fn new(constant: f64, exponent: f64) -> Result<Self> {
        if !constant.is_finite() || constant <= 1.0 {
            return Err(Error::InvalidCertificate {
                reason: format!("constant must be finite and strictly above 1, got {constant}"),
            });
        }
        if !exponent.is_finite() || !(0.0..1.0).contains(&exponent) {
            return Err(Error::InvalidCertificate {
                reason: format!("exponent must lie in [0, 1), got {exponent}"),
            });
        }
        Ok(Self { constant, exponent })
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }
}

/// Certificate constant derived from a measured minimal constant: padded by
/// a relative 1e-9 slack against eigenvalue noise and floored just above the
/// open bound `constant > 1`. Audits and reports share this policy so a
/// dumped failure replays with the same certificate.
pub fn certified_constant(c_star: f64) -> f64 {
    (c_star * (1.0 + 1e-9)).max(1.0 + 1e-12)
}

/// Smallest `C` with `C^-1 rho <= sigma <= C rho`, i.e. the larger of the
/// top eigenvalues of `rho^-1/2 sigma rho^-1/2` and `sigma^-1/2 rho sigma^-1/2`.
/// Equals 1 exactly when the states coincide, so the result is not itself
/// a valid [`NearbyCertificate`] constant without a margin.
pub fn nearby_constant(rho: &DensityState, sigma: &DensityState) -> Result<f64> {
    crate::check_dims_match(rho.dim(), sigma.dim())?;
    let top = |a: &DensityState, b: &DensityState| -> Result<f64> {
        let half = a.power(-0.5);
        let m = half.matrix() * b.op().matrix() * half.matrix();
        let conjugated = HermitianOperator::from_nearly_hermitian(m);
        Ok(spectral::eig(&conjugated)?.max_eigenvalue())
    };
    Ok(top(rho, sigma)?.max(top(sigma, rho)?))
}

/// Worst relative Loewner slack of `C^-1 rho^(1+p) <= sigma <= C rho^(1-p)`;
/// nonnegative exactly when both sides hold.
pub fn p_nearby_margin(
    rho: &DensityState,
    sigma: &DensityState,
    cert: &NearbyCertificate,
) -> Result<f64> {
    crate::check_dims_match(rho.dim(), sigma.dim())?;
    let c = cert.constant();
    let p = cert.exponent();
    let lower = rho.power(1.0 + p).scale(1.0 / c);
    let upper = rho.power(1.0 - p).scale(c);
    let low = spectral::loewner_margin(&lower, sigma.op())?;
    let high = spectral::loewner_margin(sigma.op(), &upper)?;
    Ok(low.min(high))
}

/// Checks `C^-1 rho^(1+p) <= sigma <= C rho^(1-p)` at the given Loewner
/// tolerance.
pub fn p_nearby_check(
    rho: &DensityState,
    sigma: &DensityState,
    cert: &NearbyCertificate,
    tol: f64,
) -> Result<bool> {
    if !tol.is_finite() || tol < 0.0 {
        return Err(Error::InvalidParameter {
            name: "tol",
            reason: format!("must be finite and nonnegative, got {tol}"),
        });
    }
    Ok(p_nearby_margin(rho, sigma, cert)? >= -tol)
}
