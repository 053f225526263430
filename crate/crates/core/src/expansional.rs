//! Perturbation calculus around a faithful weight: `rho_X = exp(log rho - X)`,
//! its free energy, its expansion in conjugated powers of `X`, and the
//! two-sided comparison bounds the expansion certifies.

use crate::norms::araki_norm;
use crate::operator::HermitianOperator;
use crate::spectral::{self, loewner_margin};
use crate::weight::{DensityState, FiniteWeight, NearbyCertificate};
use crate::{C64, CMat, Error, Result, MAX_ORDER};
use nalgebra::DVector;

/// A base weight together with a Hermitian perturbation direction.
#[derive(Debug, Clone)]
pub struct Perturbation {
    base: FiniteWeight,
    x: HermitianOperator,
}

impl Perturbation {
    pub fn new(base: FiniteWeight, x: HermitianOperator) -> Result<Self> {
        crate::check_dims_match(base.dim(), x.dim())?;
        Ok(Self { base, x })
    }

    pub fn base(&self) -> &FiniteWeight {
        &self.base
    }

    pub fn x(&self) -> &HermitianOperator {
        &self.x
    }
}

/// Log partition value `psi = log tr exp(log rho - X)` and `z = exp(psi)`.
#[derive(Debug, Clone, Copy)]
pub struct FreeEnergy {
    pub psi: f64,
    pub z: f64,
}

/// Truncated expansion of a perturbed object, with the tail bound
/// `remainder_bound = scale * sum_{n > order} M^n / n!` where `M` is the
/// conjugation norm of the perturbation.
#[derive(Debug, Clone)]
pub struct ExpansionResult {
    pub truncation_order: usize,
    pub partial_sum: HermitianOperator,
    pub remainder_bound: f64,
    pub araki_m: f64,
}

/// Two-sided comparison `lower * rho <= rho_X <= upper * rho` with
/// `lower = exp(-M)`, `upper = exp(M)`, `M` the conjugation norm of `X`.
#[derive(Debug, Clone, Copy)]
pub struct SandwichBounds {
    pub lower: f64,
    pub upper: f64,
    /// Loewner slack of `lower * rho <= rho_X`, relative to operand scale.
    pub lower_margin: f64,
    /// Loewner slack of `rho_X <= upper * rho`, relative to operand scale.
    pub upper_margin: f64,
    pub holds: bool,
}

/// Shifts `x` by a multiple of the identity so its expectation in the
/// normalized base vanishes.
pub fn center(pert: &Perturbation) -> Result<Perturbation> {
    let mean = pert.base.expectation(&pert.x)?;
    Perturbation::new(pert.base.clone(), pert.x.shift(-mean))
}

/// `exp(log rho - X)` assembled spectrally. Fails if the result overflows
/// the floating point range.
pub fn perturbed_weight(pert: &Perturbation) -> Result<FiniteWeight> {
    let a = pert.base.log().sub(&pert.x)?;
    let dec = spectral::eig(&a)?;
    let mut vals = DVector::zeros(dec.dim());
    for i in 0..dec.dim() {
        let v = dec.eigenvalues()[i].exp();
        if !v.is_finite() {
            return Err(Error::FunctionDomain { eigenvalue: dec.eigenvalues()[i] });
        }
        vals[i] = v;
    }
    FiniteWeight::from_spectral(dec.eigenvectors().clone(), vals)
}

/// Normalized perturbed state plus its free energy.
///
/// `psi` is evaluated by shifting out the top exponent before summing, so
/// it stays finite wherever the inputs do; the state's eigenvalues
/// `exp(mu_i - psi)` sum to 1 by construction.
pub fn perturbed_state(pert: &Perturbation) -> Result<(DensityState, FreeEnergy)> {
    let a = pert.base.log().sub(&pert.x)?;
    let dec = spectral::eig(&a)?;
    let n = dec.dim();
    let top = dec.max_eigenvalue();
    let mut z_shifted = 0.0;
    for i in 0..n {
        z_shifted += (dec.eigenvalues()[i] - top).exp();
    }
    let psi = top + z_shifted.ln();
    let mut vals = DVector::zeros(n);
    for i in 0..n {
        vals[i] = (dec.eigenvalues()[i] - psi).exp();
    }
    let weight = FiniteWeight::from_spectral(dec.eigenvectors().clone(), vals)?;
    let state = DensityState::new(weight)?;
    Ok((state, FreeEnergy { psi, z: psi.exp() }))
}

/// Terms of `exp(K + E)` graded by the number of `E` factors, for `K` real
/// diagonal. Returned as grades `0..=order` in the basis of `K`.
///
/// Scaling and squaring: the graded Taylor sum is evaluated at `2^-s` where
/// the spectral scale is at most 1/4, then squared `s` times through the
/// Cauchy product, which respects the grading. This evaluates every
/// simplex-integral coefficient (a divided difference of the exponential
/// over eigenvalue tuples) in closed form, uniformly in how clustered the
/// eigenvalues are.
fn graded_exp_terms(k: &[f64], e: &CMat, order: usize) -> Vec<CMat> {
    let n = e.nrows();
    let scale = k.iter().fold(0.0f64, |m, v| m.max(v.abs())) + e.norm();
    let s = if scale <= 0.25 {
        0
    } else {
        ((scale / 0.25).log2().ceil() as i32).clamp(0, 60) as u32
    };
    let halving = 0.5f64.powi(s as i32);
    let ks: Vec<f64> = k.iter().map(|v| v * halving).collect();
    let es = e.map(|z| z * C64::new(halving, 0.0));

    // Graded Taylor sum at the scaled argument. 25 terms leave a tail far
    // below roundoff for arguments bounded by 1/4.
    const TAYLOR_TERMS: usize = 25;
    let mut terms: Vec<CMat> = (0..=order)
        .map(|j| {
            if j == 0 {
                CMat::identity(n, n)
            } else {
                CMat::zeros(n, n)
            }
        })
        .collect();
    // rows[j] = sum over words of length m with j factors of E.
    let mut rows: Vec<CMat> = terms.clone();
    let mut inv_fact = 1.0;
    for m in 1..=TAYLOR_TERMS {
        inv_fact /= m as f64;
        let top = order.min(m);
        let mut next: Vec<CMat> = Vec::with_capacity(top + 1);
        for j in 0..=top {
            let mut acc = CMat::zeros(n, n);
            if j < rows.len() {
                // K_s * rows[j]: diagonal left-scaling by rows of K_s.
                for r in 0..n {
                    let kr = C64::new(ks[r], 0.0);
                    for c in 0..n {
                        acc[(r, c)] = kr * rows[j][(r, c)];
                    }
                }
            }
            if j >= 1 && j - 1 < rows.len() {
                acc += &es * &rows[j - 1];
            }
            next.push(acc);
        }
        for (j, row) in next.iter().enumerate() {
            terms[j] += row * C64::new(inv_fact, 0.0);
        }
        rows = next;
    }

    // Squaring step: grades combine by Cauchy product.
    for _ in 0..s {
        let mut squared: Vec<CMat> = Vec::with_capacity(order + 1);
        for j in 0..=order {
            let mut acc = CMat::zeros(n, n);
            for i in 0..=j {
                acc += &terms[i] * &terms[j - i];
            }
            squared.push(acc);
        }
        terms = squared;
    }
    terms
}

fn check_order(order: usize) -> Result<()> {
    if order > MAX_ORDER {
        return Err(Error::OrderRange { order, max: MAX_ORDER });
    }
    Ok(())
}

/// `sum_{n > order} m^n / n!`, summed forward from the first tail term.
fn exp_tail(m: f64, order: usize) -> f64 {
    debug_assert!(m >= 0.0);
    let mut term = 1.0;
    for i in 1..=(order + 1) {
        term *= m / i as f64;
    }
    let mut sum = 0.0;
    let mut i = order + 2;
    while term > 1e-300 && i < order + 500 {
        sum += term;
        term *= m / i as f64;
        i += 1;
    }
    sum
}

/// Expansion terms of `rho_X` in the perturbation: grade `n` carries `n`
/// factors of `X` and the sign `(-1)^n`, summing to `exp(log rho - X)`.
pub fn dyson_terms(pert: &Perturbation, order: usize) -> Result<Vec<HermitianOperator>> {
    check_order(order)?;
    let dec = pert.base.spectral();
    let k: Vec<f64> = dec.eigenvalues().iter().map(|l| l.ln()).collect();
    let e = -dec.to_eigenbasis(pert.x.matrix());
    let graded = graded_exp_terms(&k, &e, order);
    Ok(graded
        .into_iter()
        .map(|t| HermitianOperator::from_nearly_hermitian(dec.from_eigenbasis(&t)))
        .collect())
}

/// Partial sum of the expansion of `rho_X` through the given order, with
/// the tail bound `||rho|| * sum_{n > order} M^n / n!`.
pub fn dyson_series(pert: &Perturbation, order: usize) -> Result<ExpansionResult> {
    let terms = dyson_terms(pert, order)?;
    let mut sum = HermitianOperator::zeros(pert.base.dim())?;
    for t in &terms {
        sum = sum.add(t)?;
    }
    let m = araki_norm(&pert.x, &pert.base)?;
    Ok(ExpansionResult {
        truncation_order: order,
        partial_sum: sum,
        remainder_bound: pert.base.operator_norm() * exp_tail(m, order),
        araki_m: m,
    })
}

/// Partial sum of `rho^1/2 rho_X^-1 rho^1/2` expanded in conjugated
/// `X`-factors; each grade-`n` term has norm at most `M^n / n!`, so the
/// tail bound here carries scale 1.
pub fn inverse_sandwich_series(pert: &Perturbation, order: usize) -> Result<ExpansionResult> {
    check_order(order)?;
    let dec = pert.base.spectral();
    let n = pert.base.dim();
    let k: Vec<f64> = dec.eigenvalues().iter().map(|l| -l.ln()).collect();
    let e = dec.to_eigenbasis(pert.x.matrix());
    let graded = graded_exp_terms(&k, &e, order);
    let sqrt: Vec<f64> = dec.eigenvalues().iter().map(|l| l.sqrt()).collect();
    let mut sum = CMat::zeros(n, n);
    for t in &graded {
        for i in 0..n {
            for j in 0..n {
                sum[(i, j)] += t[(i, j)] * C64::new(sqrt[i] * sqrt[j], 0.0);
            }
        }
    }
    let m = araki_norm(&pert.x, &pert.base)?;
    Ok(ExpansionResult {
        truncation_order: order,
        partial_sum: HermitianOperator::from_nearly_hermitian(dec.from_eigenbasis(&sum)),
        remainder_bound: exp_tail(m, order),
        araki_m: m,
    })
}

/// Evaluates the two-sided comparison `exp(-M) rho <= rho_X <= exp(M) rho`
/// at the given Loewner tolerance.
pub fn sandwich_bounds(pert: &Perturbation, tol: f64) -> Result<SandwichBounds> {
    if !tol.is_finite() || tol < 0.0 {
        return Err(Error::InvalidParameter {
            name: "tol",
            reason: format!("must be finite and nonnegative, got {tol}"),
        });
    }
    let m = araki_norm(&pert.x, &pert.base)?;
    let lower = (-m).exp();
    let upper = m.exp();
    let rho_x = perturbed_weight(pert)?;
    let lower_margin = loewner_margin(&pert.base.op().scale(lower), rho_x.op())?;
    let upper_margin = loewner_margin(rho_x.op(), &pert.base.op().scale(upper))?;
    Ok(SandwichBounds {
        lower,
        upper,
        lower_margin,
        upper_margin,
        holds: lower_margin >= -tol && upper_margin >= -tol,
    })
}

/// `log rho - log sigma`.
pub fn relative_hamiltonian(
    rho: &FiniteWeight,
    sigma: &FiniteWeight,
) -> Result<HermitianOperator> {
    crate::check_dims_match(rho.dim(), sigma.dim())?;
    rho.log().sub(&sigma.log())
}

/// Worst relative Loewner slack of the two form bounds
/// `(log C) I + p H -+ X >= 0` with `X = log rho - log sigma` and
/// `H = -log rho`; nonnegative exactly when both hold.
///
/// `H` is used unshifted: renormalizing its smallest eigenvalue to zero is
/// compensated exactly by the scalar constant, so the two forms of the
/// check coincide. For a unit-trace state `H` is itself positive.
pub fn form_bound_margin(
    rho: &DensityState,
    sigma: &DensityState,
    cert: &NearbyCertificate,
) -> Result<f64> {
    crate::check_dims_match(rho.dim(), sigma.dim())?;
    let x = relative_hamiltonian(rho.weight(), sigma.weight())?;
    let h = rho.log().scale(-1.0);
    let core = h.scale(cert.exponent()).shift(cert.constant().ln());
    let zero = HermitianOperator::zeros(rho.dim())?;
    let minus = loewner_margin(&zero, &core.sub(&x)?)?;
    let plus = loewner_margin(&zero, &core.add(&x)?)?;
    Ok(minus.min(plus))
}

/// Form-bound consequence of a two-sided comparison, as a verdict at the
/// given Loewner tolerance.
pub fn form_bound_check(
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
    Ok(form_bound_margin(rho, sigma, cert)? >= -tol)
}
