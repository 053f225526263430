//! Operator norms, with and without a reference weight: Schatten and trace
//! norms, the epsilon norm against a shifted modular Hamiltonian, the Araki
//! conjugation norm, and the BKM inner product.

use crate::operator::HermitianOperator;
use crate::spectral::{self};
use crate::weight::{DensityState, FiniteWeight};
use crate::{C64, CMat, Error, Result};

/// Largest eigenvalue magnitude.
pub fn operator_norm(x: &HermitianOperator) -> Result<f64> {
    Ok(spectral::eig(x)?.operator_norm())
}

/// `(sum |lambda_i|^p)^(1/p)` for finite `p > 0`. A quasinorm for `p < 1`.
/// The `p = infinity` convention is handled by [`operator_norm`] instead.
pub fn schatten_p_norm(x: &HermitianOperator, p: f64) -> Result<f64> {
    if !p.is_finite() || p <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "p",
            reason: format!("must be finite and positive, got {p}; the limit p -> infinity is operator_norm"),
        });
    }
    let dec = spectral::eig(x)?;
    let sum: f64 = dec.eigenvalues().iter().map(|l| l.abs().powf(p)).sum();
    Ok(sum.powf(1.0 / p))
}

/// Sum of eigenvalue magnitudes; for a Hermitian matrix these are the
/// singular values.
pub fn trace_norm(x: &HermitianOperator) -> Result<f64> {
    Ok(spectral::eig(x)?.eigenvalues().iter().map(|l| l.abs()).sum())
}

/// Operator norm of a general complex matrix: square root of the top
/// eigenvalue of `m^* m`.
pub(crate) fn complex_operator_norm(m: &CMat) -> Result<f64> {
    let gram = HermitianOperator::from_nearly_hermitian(m.adjoint() * m);
    Ok(spectral::eig(&gram)?.max_eigenvalue().max(0.0).sqrt())
}

/// Weight and exponent for the epsilon norm. `epsilon` must lie in `[0, 1/2]`.
#[derive(Debug, Clone)]
pub struct EpsilonNormParams<'a> {
    base: &'a FiniteWeight,
    epsilon: f64,
}

impl<'a> EpsilonNormParams<'a> {
    pub fn new(base: &'a FiniteWeight, epsilon: f64) -> Result<Self> {
        if !epsilon.is_finite() || !(0.0..=0.5).contains(&epsilon) {
            return Err(Error::InvalidParameter {
                name: "epsilon",
                reason: format!("must lie in [0, 1/2], got {epsilon}"),
            });
        }
        Ok(Self { base, epsilon })
    }

    pub fn base(&self) -> &FiniteWeight {
        self.base
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

/// `||(H + I)^(epsilon - 1) X (H + I)^(-epsilon)||` where `H` is the
/// negative log of the base weight shifted so its smallest eigenvalue is 0.
///
/// At `epsilon = 0` this weighs only the left side; for a base proportional
/// to the identity, `H = 0` and the norm collapses to `||X||`.
pub fn epsilon_norm(x: &HermitianOperator, params: &EpsilonNormParams) -> Result<f64> {
    let base = params.base;
    crate::check_dims_match(x.dim(), base.dim())?;
    let eps = params.epsilon;
    let dec = base.spectral();
    let n = base.dim();
    let lmax = dec.max_eigenvalue();
    // h_i = log(lmax) - log(lambda_i) >= 0, so h + 1 >= 1 and all powers
    // below are finite.
    let h: Vec<f64> = dec
        .eigenvalues()
        .iter()
        .map(|l| (lmax.ln() - l.ln()).max(0.0))
        .collect();
    let xt = dec.to_eigenbasis(x.matrix());
    let mut m = CMat::zeros(n, n);
    for i in 0..n {
        let left = (h[i] + 1.0).powf(eps - 1.0);
        for j in 0..n {
            let right = (h[j] + 1.0).powf(-eps);
            m[(i, j)] = xt[(i, j)] * C64::new(left * right, 0.0);
        }
    }
    complex_operator_norm(&m)
}

/// Conjugation norm `max(||rho^1/2 X rho^-1/2||, ||rho^-1/2 X rho^1/2||)`.
///
/// The supremum of `||rho^t X rho^-t||` over `|t| <= 1/2` is attained at the
/// endpoints because the map is convex in `t`, so the two endpoint values
/// are the whole story. For Hermitian `X` they coincide.
pub fn araki_norm(x: &HermitianOperator, base: &FiniteWeight) -> Result<f64> {
    crate::check_dims_match(x.dim(), base.dim())?;
    let a = conjugated_norm(x, base, 0.5)?;
    let b = conjugated_norm(x, base, -0.5)?;
    Ok(a.max(b))
}

/// `||rho^t X rho^-t||` evaluated in the eigenbasis of the base.
fn conjugated_norm(x: &HermitianOperator, base: &FiniteWeight, t: f64) -> Result<f64> {
    let dec = base.spectral();
    let n = base.dim();
    let logs: Vec<f64> = dec.eigenvalues().iter().map(|l| l.ln()).collect();
    let xt = dec.to_eigenbasis(x.matrix());
    let mut m = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let w = (t * (logs[i] - logs[j])).exp();
            m[(i, j)] = xt[(i, j)] * C64::new(w, 0.0);
        }
    }
    complex_operator_norm(&m)
}

/// Grid-scan evaluation of the conjugation norm: the maximum of
/// `||rho^t X rho^-t||` over `grid_points` evenly spaced `t` in `[-1/2, 1/2]`
/// (endpoints included). Nondecreasing under refinement and never above
/// [`araki_norm`] beyond roundoff.
pub fn araki_norm_scan(
    x: &HermitianOperator,
    base: &FiniteWeight,
    grid_points: usize,
) -> Result<f64> {
    crate::check_dims_match(x.dim(), base.dim())?;
    if grid_points < 2 {
        return Err(Error::InvalidParameter {
            name: "grid_points",
            reason: format!("need at least 2 grid points, got {grid_points}"),
        });
    }
    let dec = base.spectral();
    let n = base.dim();
    let logs: Vec<f64> = dec.eigenvalues().iter().map(|l| l.ln()).collect();
    let xt = dec.to_eigenbasis(x.matrix());
    let mut worst = 0.0f64;
    let mut m = CMat::zeros(n, n);
    for k in 0..grid_points {
        let t = -0.5 + k as f64 / (grid_points - 1) as f64;
        for i in 0..n {
            for j in 0..n {
                let w = (t * (logs[i] - logs[j])).exp();
                m[(i, j)] = xt[(i, j)] * C64::new(w, 0.0);
            }
        }
        worst = worst.max(complex_operator_norm(&m)?);
    }
    Ok(worst)
}

/// Logarithmic mean `(a - b) / (log a - log b)` for positive arguments,
/// continued by `a` on the diagonal.
///
/// The log-spacing is computed as `ln_1p((a - b) / b)`, which keeps full
/// precision for nearby arguments; below `|d| < 1e-8` the quotient itself
/// is replaced by `sqrt(ab) * sinh(d/2)/(d/2)` via the series
/// `1 + d^2/24 + d^4/1920`, which agrees to machine precision there.
pub fn log_mean(a: f64, b: f64) -> f64 {
    debug_assert!(a > 0.0 && b > 0.0);
    if a == b {
        return a;
    }
    let d = ((a - b) / b).ln_1p();
    if d.abs() < 1e-8 {
        let d2 = d * d;
        (a * b).sqrt() * (1.0 + d2 / 24.0 + d2 * d2 / 1920.0)
    } else {
        (a - b) / d
    }
}

/// BKM inner product `sum_ij conj(X_ij) Y_ij L(lambda_i, lambda_j)` in the
/// eigenbasis of the state, with `L` the logarithmic mean. Real for
/// Hermitian arguments.
pub fn bkm_inner(
    x: &HermitianOperator,
    y: &HermitianOperator,
    rho: &DensityState,
) -> Result<f64> {
    crate::check_dims_match(x.dim(), rho.dim())?;
    crate::check_dims_match(y.dim(), rho.dim())?;
    let dec = rho.spectral();
    let n = rho.dim();
    let xt = dec.to_eigenbasis(x.matrix());
    let yt = dec.to_eigenbasis(y.matrix());
    let lam = dec.eigenvalues();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            let kernel = log_mean(lam[i], lam[j]);
            let prod = xt[(i, j)].conj() * yt[(i, j)];
            acc += kernel * prod.re;
        }
    }
    Ok(acc)
}

/// `sqrt(bkm_inner(x, x, rho))`; the inner product of a vector with itself
/// is a sum of nonnegative terms.
pub fn bkm_norm(x: &HermitianOperator, rho: &DensityState) -> Result<f64> {
    Ok(bkm_inner(x, x, rho)?.max(0.0).sqrt())
}

/// All norms of one matrix against one base weight, as a flat list of
/// key/value rows. BKM is taken against the normalized base.
#[derive(Debug, Clone)]
pub struct NormReport {
    pub operator_norm: f64,
    pub trace_norm: f64,
    pub schatten_exponent: f64,
    pub schatten_norm: f64,
    pub epsilon: f64,
    pub epsilon_norm: f64,
    pub araki_norm: f64,
    pub bkm_norm: f64,
}

impl NormReport {
    pub fn compute(
        x: &HermitianOperator,
        base: &FiniteWeight,
        epsilon: f64,
        p: f64,
    ) -> Result<Self> {
        let params = EpsilonNormParams::new(base, epsilon)?;
        Ok(Self {
            operator_norm: operator_norm(x)?,
            trace_norm: trace_norm(x)?,
            schatten_exponent: p,
            schatten_norm: schatten_p_norm(x, p)?,
            epsilon,
            epsilon_norm: epsilon_norm(x, &params)?,
            araki_norm: araki_norm(x, base)?,
            bkm_norm: bkm_norm(x, &base.normalized())?,
        })
    }

    /// Stable key/value ordering for serialization.
    pub fn rows(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("operator_norm", self.operator_norm),
            ("trace_norm", self.trace_norm),
            ("schatten_exponent", self.schatten_exponent),
            ("schatten_norm", self.schatten_norm),
            ("epsilon", self.epsilon),
            ("epsilon_norm", self.epsilon_norm),
            ("araki_norm", self.araki_norm),
            ("bkm_norm", self.bkm_norm),
        ]
    }
}
