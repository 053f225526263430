//! Relative entropy, the log-mean metric it generates, the two flat
//! geodesic families, trace-norm and entropy inequalities, cocycle
//! conjugation between base points, and the entropy/trace-distance
//! separation demo.

use crate::expansional::{center, perturbed_state, relative_hamiltonian, Perturbation};
use crate::norms::{araki_norm, bkm_inner, complex_operator_norm, log_mean, operator_norm, trace_norm};
use crate::operator::HermitianOperator;
use crate::weight::{DensityState, FiniteWeight};
use crate::{C64, CMat, Error, Result};

/// Slack added to one-sided inequality verdicts to absorb roundoff.
const INEQ_SLACK: f64 = 1e-10;

/// `Tr rho (log rho - log sigma)`; nonnegative, zero only for equal states.
pub fn relative_entropy(rho: &DensityState, sigma: &DensityState) -> Result<f64> {
    let x = relative_hamiltonian(rho.weight(), sigma.weight())?;
    rho.op().trace_product(&x)
}

/// A displacement in both coordinate systems: the exponential-coordinate
/// direction `X` (centered) and its lowered mixture-coordinate image.
#[derive(Debug, Clone)]
pub struct TangentPair {
    pub exp_component: HermitianOperator,
    pub mix_component: HermitianOperator,
}

impl TangentPair {
    /// Centers `x` at `rho` and lowers it; the mixture component is then
    /// traceless, as a tangent to the unit-trace surface must be.
    pub fn from_displacement(x: &HermitianOperator, rho: &DensityState) -> Result<Self> {
        let mean = rho.expectation(x)?;
        let centered = x.shift(-mean);
        let mix = lower_index(&centered, rho)?;
        Ok(Self { exp_component: centered, mix_component: mix })
    }
}

/// Lowered displacement `int_0^1 rho^t X rho^(1-t) dt`, evaluated entrywise
/// in the eigenbasis with the logarithmic-mean kernel. Satisfies
/// `Tr(Y * lower_index(X, rho)) = bkm_inner(Y, X, rho)` for Hermitian `Y`.
pub fn lower_index(x: &HermitianOperator, rho: &DensityState) -> Result<HermitianOperator> {
    crate::check_dims_match(x.dim(), rho.dim())?;
    let dec = rho.spectral();
    let n = rho.dim();
    let xt = dec.to_eigenbasis(x.matrix());
    let lam = dec.eigenvalues();
    let mut out = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = xt[(i, j)] * C64::new(log_mean(lam[i], lam[j]), 0.0);
        }
    }
    Ok(HermitianOperator::from_nearly_hermitian(dec.from_eigenbasis(&out)))
}

/// Both sides of `S(rho0|sigma) + S(sigma|rho0) = Tr((rho0 - sigma) X)`
/// where `sigma` is the normalized perturbed state of `pert`; the identity
/// is invariant to scalar shifts of `X`. The perturbation's base must
/// describe the same state as `rho0` up to normalization.
pub fn symmetrized_entropy_identity(
    rho0: &DensityState,
    pert: &Perturbation,
) -> Result<(f64, f64)> {
    crate::check_dims_match(rho0.dim(), pert.base().dim())?;
    let (sigma, _) = perturbed_state(pert)?;
    let lhs = relative_entropy(rho0, &sigma)? + relative_entropy(&sigma, rho0)?;
    let rhs = rho0.op().sub(sigma.op())?.trace_product(pert.x())?;
    Ok((lhs, rhs))
}

/// Finite-difference second derivative of `s -> S(rho0 | rho_{sX})` at 0
/// against the closed-form metric value `bkm_inner(X, X, rho0)`.
#[derive(Debug, Clone, Copy)]
pub struct HessianCheck {
    /// Second central difference with step `h`.
    pub fd_value: f64,
    /// Second central difference with step `h/2`, for error estimation.
    pub fd_half: f64,
    /// `bkm_inner(X, X, rho0)` with `X` centered.
    pub closed_form: f64,
}

/// Compares the entropy Hessian along `X` with the metric's closed form.
///
/// `X` is centered internally (the curve of states is invariant to scalar
/// shifts, the closed form is not). Steps below 1e-4 are rejected: the
/// quotient loses more digits to cancellation than discretization saves.
pub fn bkm_hessian_check(
    rho0: &DensityState,
    x: &HermitianOperator,
    h: f64,
) -> Result<HessianCheck> {
    crate::check_dims_match(rho0.dim(), x.dim())?;
    if !h.is_finite() || h < 1e-4 || h > 1.0 {
        return Err(Error::InvalidParameter {
            name: "h",
            reason: format!("finite-difference step must lie in [1e-4, 1], got {h}"),
        });
    }
    let mean = rho0.expectation(x)?;
    let xc = x.shift(-mean);
    let entropy_at = |s: f64| -> Result<f64> {
        let pert = Perturbation::new(rho0.weight().clone(), xc.scale(s))?;
        let (sigma, _) = perturbed_state(&pert)?;
        relative_entropy(rho0, &sigma)
    };
    let s0 = entropy_at(0.0)?;
    let fd = |step: f64| -> Result<f64> {
        Ok((entropy_at(step)? + entropy_at(-step)? - 2.0 * s0) / (step * step))
    };
    Ok(HessianCheck {
        fd_value: fd(h)?,
        fd_half: fd(h / 2.0)?,
        closed_form: bkm_inner(&xc, &xc, rho0)?,
    })
}

/// The two flat affine structures on faithful states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connection {
    /// Exponential coordinates: affine in the relative Hamiltonian.
    Plus,
    /// Mixture coordinates: affine in the density itself.
    Minus,
}

/// A point specification on the geodesic between two faithful states.
#[derive(Debug, Clone, Copy)]
pub struct GeodesicSpec<'a> {
    rho0: &'a DensityState,
    rho1: &'a DensityState,
    connection: Connection,
    lambda: f64,
}

impl<'a> GeodesicSpec<'a> {
    pub fn new(
        rho0: &'a DensityState,
        rho1: &'a DensityState,
        connection: Connection,
        lambda: f64,
    ) -> Result<Self> {
        crate::check_dims_match(rho0.dim(), rho1.dim())?;
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidParameter {
                name: "lambda",
                reason: format!("must lie in [0, 1], got {lambda}"),
            });
        }
        Ok(Self { rho0, rho1, connection, lambda })
    }
}

/// Evaluates the geodesic: minus-connection is the convex combination,
/// plus-connection scales the relative Hamiltonian and renormalizes, which
/// makes the exponential coordinate affine in `lambda` by construction.
pub fn geodesic(spec: &GeodesicSpec<'_>) -> Result<DensityState> {
    match spec.connection {
        Connection::Minus => crate::weight::mixture(spec.lambda, spec.rho0, spec.rho1),
        Connection::Plus => {
            let x1 = relative_hamiltonian(spec.rho0.weight(), spec.rho1.weight())?;
            let pert = Perturbation::new(spec.rho0.weight().clone(), x1.scale(spec.lambda))?;
            Ok(perturbed_state(&pert)?.0)
        }
    }
}

/// The same pairing along two evaluation paths.
#[derive(Debug, Clone, Copy)]
pub struct DualityPairing {
    /// `bkm_inner(x, y, rho)`.
    pub direct: f64,
    /// `Tr(x * lower_index(y, rho))`.
    pub mixed: f64,
}

/// Evaluates the metric pairing directly and through the lowered index;
/// the two must agree, which is the coordinate form of the duality of the
/// plus and minus structures.
pub fn duality_pairing_check(
    rho: &DensityState,
    x: &HermitianOperator,
    y: &HermitianOperator,
) -> Result<DualityPairing> {
    let direct = bkm_inner(x, y, rho)?;
    let mixed = x.trace_product(&lower_index(y, rho)?)?;
    Ok(DualityPairing { direct, mixed })
}

/// An inequality with both sides evaluated and a verdict with fixed slack.
#[derive(Debug, Clone, Copy)]
pub struct BoundCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `||rho - sigma||_1 <= ||X||` for `sigma` the perturbed state of `pert`;
/// `X` is centered internally, which both tightens the right side and is
/// invisible to `sigma`.
pub fn trace_norm_bound_check(rho: &DensityState, pert: &Perturbation) -> Result<BoundCheck> {
    crate::check_dims_match(rho.dim(), pert.base().dim())?;
    let centered = center(pert)?;
    let (sigma, _) = perturbed_state(&centered)?;
    let lhs = trace_norm(&rho.op().sub(sigma.op())?)?;
    let rhs = operator_norm(centered.x())?;
    Ok(BoundCheck { lhs, rhs, holds: lhs <= rhs + INEQ_SLACK })
}

/// `||rho - sigma||_1^2 <= S(rho|sigma) + S(sigma|rho)`.
pub fn kullback_inequality_check(rho: &DensityState, sigma: &DensityState) -> Result<BoundCheck> {
    let dist = trace_norm(&rho.op().sub(sigma.op())?)?;
    let lhs = dist * dist;
    let rhs = relative_entropy(rho, sigma)? + relative_entropy(sigma, rho)?;
    Ok(BoundCheck { lhs, rhs, holds: lhs <= rhs + INEQ_SLACK })
}

/// The (generally non-Hermitian) cocycle `rho0^t rho1^-t` that conjugates
/// conjugation norms between base points; `|t| <= 1/2`.
pub fn connes_cocycle(rho0: &FiniteWeight, rho1: &FiniteWeight, t: f64) -> Result<CMat> {
    crate::check_dims_match(rho0.dim(), rho1.dim())?;
    if !t.is_finite() || t.abs() > 0.5 {
        return Err(Error::InvalidParameter {
            name: "t",
            reason: format!("must satisfy |t| <= 1/2, got {t}"),
        });
    }
    Ok(rho0.power(t).matrix() * rho1.power(-t).matrix())
}

/// Norm-equivalence certificate between two base points.
#[derive(Debug, Clone, Copy)]
pub struct NormEquivalence {
    /// `araki_norm(x, rho1) / araki_norm(x, rho0)`, 1 for `x = 0`.
    pub ratio: f64,
    /// Grid maximum of `||rho1^t rho0^-t|| * ||rho0^t rho1^-t||`.
    pub k: f64,
    pub holds: bool,
}

/// Checks `K^-1 <= ratio <= K` where `K` bounds the cocycle conjugation
/// cost over a 101-point grid on [-1/2, 1/2] (endpoints and 0 included;
/// the grid maximum sits at an endpoint by log-convexity, so the grid is
/// an upper envelope, not an approximation).
pub fn hood_norm_equivalence(
    rho0: &FiniteWeight,
    rho1: &FiniteWeight,
    x: &HermitianOperator,
) -> Result<NormEquivalence> {
    crate::check_dims_match(rho0.dim(), rho1.dim())?;
    crate::check_dims_match(rho0.dim(), x.dim())?;
    let mut k: f64 = 1.0;
    for step in 0..=100 {
        let t = -0.5 + step as f64 / 100.0;
        let forward = complex_operator_norm(&(rho1.power(t).matrix() * rho0.power(-t).matrix()))?;
        let backward = complex_operator_norm(&(rho0.power(t).matrix() * rho1.power(-t).matrix()))?;
        k = k.max(forward * backward);
    }
    let base = araki_norm(x, rho0)?;
    if base == 0.0 {
        return Ok(NormEquivalence { ratio: 1.0, k, holds: true });
    }
    let ratio = araki_norm(x, rho1)? / base;
    let holds = ratio <= k * (1.0 + INEQ_SLACK) && ratio * k >= 1.0 - INEQ_SLACK;
    Ok(NormEquivalence { ratio, k, holds })
}

/// One row of the separation table.
#[derive(Debug, Clone, Copy)]
pub struct SeparationPoint {
    pub n: usize,
    pub trace_dist: f64,
    pub rel_entropy: f64,
}

/// Separation of trace distance from relative entropy on a geometric
/// spectrum: for `rho_n = diag(2^-i)/Z` and
/// `sigma_n = (1-delta) rho_n + delta |e_n><e_n|` with `delta = n^-1/2`,
/// the trace distance falls like `2 delta` while `S(sigma|rho)` grows like
/// `delta n log 2`. Returns rows for n = 4, 8, ..., up to `n_max`.
pub fn separation_demo(n_max: usize) -> Result<Vec<SeparationPoint>> {
    if n_max < 4 {
        return Err(Error::InvalidParameter {
            name: "n_max",
            reason: format!("need n_max >= 4, got {n_max}"),
        });
    }
    let mut rows = Vec::new();
    let mut n = 4;
    while n <= n_max {
        rows.push(separation_point(n, (n as f64).powf(-0.5))?);
        n *= 2;
    }
    Ok(rows)
}

/// The spectrum reaches 2^-n, far below any faithfulness gate a general
/// eigensolver could honor at n = 1024, so the entropy side is evaluated
/// by exact scalar sums on the diagonal model; the trace distance goes
/// through the general dense path on the assembled difference.
fn separation_point(n: usize, delta: f64) -> Result<SeparationPoint> {
    let z: f64 = 1.0 - 0.5f64.powi(n as i32);
    let r = |i: usize| 0.5f64.powi(i as i32) / z;
    let s = |i: usize| (1.0 - delta) * r(i) + if i == n { delta } else { 0.0 };

    let mut rel_entropy = 0.0;
    for i in 1..=n {
        let si = s(i);
        rel_entropy += si * (si.ln() - r(i).ln());
    }

    let diffs: Vec<f64> = (1..=n).map(|i| s(i) - r(i)).collect();
    let diff_op = HermitianOperator::from_diagonal(&diffs)?;
    let trace_dist = trace_norm(&diff_op)?;
    Ok(SeparationPoint { n, trace_dist, rel_entropy })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight::nearby_constant;

    fn state(entries: &[f64]) -> DensityState {
        DensityState::from_operator(HermitianOperator::from_diagonal(entries).unwrap()).unwrap()
    }

    fn herm(entries: &[&[(f64, f64)]]) -> HermitianOperator {
        let n = entries.len();
        let raw = CMat::from_fn(n, n, |i, j| C64::new(entries[i][j].0, entries[i][j].1));
        HermitianOperator::new(raw).unwrap()
    }

    fn skew_state() -> DensityState {
        DensityState::from_operator(herm(&[
            &[(0.55, 0.0), (0.1, 0.07)],
            &[(0.1, -0.07), (0.45, 0.0)],
        ]))
        .unwrap()
    }

    #[test]
    fn relative_entropy_matches_the_classical_diagonal_value() {
        let s = relative_entropy(&state(&[0.8, 0.2]), &state(&[0.5, 0.5])).unwrap();
        let expected = 0.8 * (0.8f64 / 0.5).ln() + 0.2 * (0.2f64 / 0.5).ln();
        assert!((s - expected).abs() < 1e-14);
        assert!((expected - 0.19274).abs() < 1e-5);
    }

    #[test]
    fn relative_entropy_is_zero_only_on_the_diagonal() {
        let rho = skew_state();
        assert_eq!(relative_entropy(&rho, &rho).unwrap(), 0.0);
        let sigma = state(&[0.6, 0.4]);
        assert!(relative_entropy(&rho, &sigma).unwrap() > 1e-4);
    }

    #[test]
    fn relative_entropy_agrees_with_split_evaluation() {
        let rho = skew_state();
        let sigma = state(&[0.7, 0.3]);
        let direct = relative_entropy(&rho, &sigma).unwrap();
        let split = rho.expectation(&rho.log()).unwrap() - rho.expectation(&sigma.log()).unwrap();
        assert!((direct - split).abs() < 1e-10);
    }

    #[test]
    fn lower_index_special_cases() {
        let x = herm(&[&[(0.3, 0.0), (0.2, -0.5)], &[(0.2, 0.5), (-0.1, 0.0)]]);
        let maximally_mixed = state(&[0.5, 0.5]);
        let lowered = lower_index(&x, &maximally_mixed).unwrap();
        assert!((lowered.matrix() - x.scale(0.5).matrix()).norm() < 1e-14);

        let rho = state(&[0.8, 0.2]);
        let diag_x = HermitianOperator::from_diagonal(&[1.5, -0.4]).unwrap();
        let lowered = lower_index(&diag_x, &rho).unwrap();
        let expected = HermitianOperator::from_diagonal(&[0.8 * 1.5, 0.2 * -0.4]).unwrap();
        assert!((lowered.matrix() - expected.matrix()).norm() < 1e-14);
    }

    #[test]
    fn pairing_agrees_along_both_paths() {
        let rho = skew_state();
        let x = herm(&[&[(0.4, 0.0), (-0.3, 0.2)], &[(-0.3, -0.2), (0.9, 0.0)]]);
        let y = herm(&[&[(-0.7, 0.0), (0.15, 0.6)], &[(0.15, -0.6), (0.2, 0.0)]]);
        let pair = duality_pairing_check(&rho, &x, &y).unwrap();
        assert!((pair.direct - pair.mixed).abs() <= 1e-12 * pair.direct.abs().max(1.0));

        let mixed = state(&[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]);
        let a = HermitianOperator::from_diagonal(&[1.0, 2.0, -0.5]).unwrap();
        let b = HermitianOperator::from_diagonal(&[0.3, -1.0, 2.0]).unwrap();
        let pair = duality_pairing_check(&mixed, &a, &b).unwrap();
        let expected = a.trace_product(&b).unwrap() / 3.0;
        assert!((pair.direct - expected).abs() < 1e-13);
        assert!((pair.mixed - expected).abs() < 1e-13);
    }

    #[test]
    fn symmetrized_identity_on_diagonal_and_shifted_inputs() {
        let rho = state(&[0.7, 0.3]);
        let x = HermitianOperator::from_diagonal(&[0.5, -0.2]).unwrap();
        let pert = Perturbation::new(rho.weight().clone(), x.clone()).unwrap();
        let (lhs, rhs) = symmetrized_entropy_identity(&rho, &pert).unwrap();
        assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1.0));

        // Scalar shifts of X change neither side.
        let shifted = Perturbation::new(rho.weight().clone(), x.shift(2.3)).unwrap();
        let (lhs2, rhs2) = symmetrized_entropy_identity(&rho, &shifted).unwrap();
        assert!((lhs - lhs2).abs() < 1e-12);
        assert!((rhs - rhs2).abs() < 1e-10);

        let zero = Perturbation::new(rho.weight().clone(), HermitianOperator::zeros(2).unwrap())
            .unwrap();
        let (lhs0, rhs0) = symmetrized_entropy_identity(&rho, &zero).unwrap();
        assert_eq!((lhs0, rhs0), (0.0, 0.0));
    }

    #[test]
    fn hessian_check_matches_the_commuting_variance() {
        let rho = state(&[0.6, 0.3, 0.1]);
        let x = HermitianOperator::from_diagonal(&[1.0, -0.5, 0.25]).unwrap();
        let out = bkm_hessian_check(&rho, &x, 1e-3).unwrap();
        let mean: f64 = 0.6 * 1.0 + 0.3 * -0.5 + 0.1 * 0.25;
        let variance = 0.6 * (1.0 - mean).powi(2)
            + 0.3 * (-0.5 - mean).powi(2)
            + 0.1 * (0.25 - mean).powi(2);
        assert!((out.closed_form - variance).abs() < 1e-12);
        assert!((out.fd_value - out.closed_form).abs() < 1e-4 * variance);
        assert!((out.fd_half - out.closed_form).abs() < (out.fd_value - out.closed_form).abs());
    }

    #[test]
    fn hessian_check_rejects_cancellation_prone_steps() {
        let rho = state(&[0.6, 0.4]);
        let x = HermitianOperator::from_diagonal(&[1.0, -1.0]).unwrap();
        assert!(bkm_hessian_check(&rho, &x, 1e-5).is_err());
        let out = bkm_hessian_check(&rho, &HermitianOperator::zeros(2).unwrap(), 1e-3).unwrap();
        assert_eq!((out.fd_value, out.closed_form), (0.0, 0.0));
    }

    #[test]
    fn geodesics_recover_their_endpoints() {
        let rho0 = skew_state();
        let rho1 = state(&[0.25, 0.75]);
        for connection in [Connection::Plus, Connection::Minus] {
            let start = geodesic(&GeodesicSpec::new(&rho0, &rho1, connection, 0.0).unwrap())
                .unwrap();
            let end = geodesic(&GeodesicSpec::new(&rho0, &rho1, connection, 1.0).unwrap())
                .unwrap();
            assert!((start.op().matrix() - rho0.op().matrix()).norm() < 1e-11);
            assert!((end.op().matrix() - rho1.op().matrix()).norm() < 1e-11);
        }
    }

    #[test]
    fn geodesic_midpoints_match_scalar_oracles() {
        let rho0 = state(&[0.8, 0.2]);
        let rho1 = state(&[0.2, 0.8]);
        let minus_mid =
            geodesic(&GeodesicSpec::new(&rho0, &rho1, Connection::Minus, 0.5).unwrap()).unwrap();
        assert!((minus_mid.op().matrix() - state(&[0.5, 0.5]).op().matrix()).norm() < 1e-14);

        let plus_mid =
            geodesic(&GeodesicSpec::new(&rho0, &rho1, Connection::Plus, 0.5).unwrap()).unwrap();
        let g: Vec<f64> = [0.8f64 * 0.2, 0.2 * 0.8].iter().map(|p| p.sqrt()).collect();
        let z: f64 = g.iter().sum();
        let expected = state(&[g[0] / z, g[1] / z]);
        assert!((plus_mid.op().matrix() - expected.op().matrix()).norm() < 1e-12);
    }

    #[test]
    fn geodesic_rejects_lambda_outside_the_segment() {
        let rho0 = state(&[0.5, 0.5]);
        assert!(GeodesicSpec::new(&rho0, &rho0, Connection::Plus, 1.5).is_err());
        assert!(GeodesicSpec::new(&rho0, &rho0, Connection::Minus, -0.1).is_err());
    }

    #[test]
    fn tangent_pair_mix_component_is_traceless() {
        let rho = skew_state();
        let x = herm(&[&[(1.2, 0.0), (0.4, -0.3)], &[(0.4, 0.3), (0.1, 0.0)]]);
        let pair = TangentPair::from_displacement(&x, &rho).unwrap();
        assert!(pair.mix_component.trace().abs() < 1e-12);
        assert!(rho.expectation(&pair.exp_component).unwrap().abs() < 1e-14);
    }

    #[test]
    fn trace_norm_bound_examples() {
        let rho = state(&[0.7, 0.3]);
        let zero = Perturbation::new(rho.weight().clone(), HermitianOperator::zeros(2).unwrap())
            .unwrap();
        let out = trace_norm_bound_check(&rho, &zero).unwrap();
        assert!(out.holds);
        assert!(out.lhs.abs() < 1e-14 && out.rhs.abs() < 1e-14);

        let small = Perturbation::new(
            rho.weight().clone(),
            HermitianOperator::from_diagonal(&[0.05, -0.05]).unwrap(),
        )
        .unwrap();
        let out = trace_norm_bound_check(&rho, &small).unwrap();
        assert!(out.holds && out.lhs < out.rhs);
    }

    #[test]
    fn kullback_worked_values() {
        let rho = state(&[0.8, 0.2]);
        let sigma = state(&[0.5, 0.5]);
        let out = kullback_inequality_check(&rho, &sigma).unwrap();
        assert!((out.lhs - 0.36).abs() < 1e-12);
        let s_forward = 0.8 * (0.8f64 / 0.5).ln() + 0.2 * (0.2f64 / 0.5).ln();
        let s_backward = 0.5 * (0.5f64 / 0.8).ln() + 0.5 * (0.5f64 / 0.2).ln();
        assert!((out.rhs - (s_forward + s_backward)).abs() < 1e-12);
        assert!(out.holds);

        let same = kullback_inequality_check(&rho, &rho).unwrap();
        assert_eq!((same.lhs, same.rhs), (0.0, 0.0));
        assert!(same.holds);
    }

    #[test]
    fn cocycle_special_cases() {
        let rho0 = FiniteWeight::new(HermitianOperator::from_diagonal(&[0.8, 0.2]).unwrap())
            .unwrap();
        let rho1 = FiniteWeight::new(HermitianOperator::from_diagonal(&[0.4, 0.6]).unwrap())
            .unwrap();
        let id = connes_cocycle(&rho0, &rho0, 0.3).unwrap();
        assert!((id - CMat::identity(2, 2)).norm() < 1e-13);
        let at_zero = connes_cocycle(&rho0, &rho1, 0.0).unwrap();
        assert!((at_zero - CMat::identity(2, 2)).norm() < 1e-13);
        let mixed = connes_cocycle(&rho0, &rho1, 0.5).unwrap();
        for (i, expected) in [(0.8f64 / 0.4), (0.2 / 0.6)].iter().enumerate() {
            assert!((mixed[(i, i)].re - expected.powf(0.5)).abs() < 1e-13);
        }
        assert!(connes_cocycle(&rho0, &rho1, 0.6).is_err());
    }

    #[test]
    fn hood_equivalence_on_identical_and_zero_inputs() {
        let rho = FiniteWeight::new(herm(&[
            &[(0.9, 0.0), (0.2, 0.1)],
            &[(0.2, -0.1), (0.5, 0.0)],
        ]))
        .unwrap();
        let x = herm(&[&[(0.0, 0.0), (1.0, 0.0)], &[(1.0, 0.0), (0.0, 0.0)]]);
        let same = hood_norm_equivalence(&rho, &rho, &x).unwrap();
        assert!((same.ratio - 1.0).abs() < 1e-12);
        assert!((same.k - 1.0).abs() < 1e-10);
        assert!(same.holds);

        let other = FiniteWeight::new(HermitianOperator::from_diagonal(&[1.5, 0.25]).unwrap())
            .unwrap();
        let zero = hood_norm_equivalence(&rho, &other, &HermitianOperator::zeros(2).unwrap())
            .unwrap();
        assert!(zero.holds);
        assert_eq!(zero.ratio, 1.0);
    }

    #[test]
    fn hood_equivalence_holds_on_a_skewed_pair() {
        let rho0 = FiniteWeight::new(HermitianOperator::from_diagonal(&[1.0, 0.05]).unwrap())
            .unwrap();
        let rho1 = FiniteWeight::new(herm(&[
            &[(0.9, 0.0), (0.1, 0.02)],
            &[(0.1, -0.02), (0.08, 0.0)],
        ]))
        .unwrap();
        let x = herm(&[&[(0.3, 0.0), (0.7, -0.2)], &[(0.7, 0.2), (-0.5, 0.0)]]);
        let out = hood_norm_equivalence(&rho0, &rho1, &x).unwrap();
        assert!(out.holds, "ratio {} outside [{}, {}]", out.ratio, 1.0 / out.k, out.k);
        assert!(out.k >= 1.0);
    }

    #[test]
    fn separation_degenerate_delta_vanishes() {
        let point = separation_point(16, 0.0).unwrap();
        assert_eq!(point.trace_dist, 0.0);
        assert!(point.rel_entropy.abs() < 1e-15);
    }

    #[test]
    fn separation_small_sizes_match_the_general_path() {
        for n in [4usize, 8, 16, 32] {
            let delta = (n as f64).powf(-0.5);
            let point = separation_point(n, delta).unwrap();
            let z: f64 = 1.0 - 0.5f64.powi(n as i32);
            let r: Vec<f64> = (1..=n).map(|i| 0.5f64.powi(i as i32) / z).collect();
            let s: Vec<f64> = (1..=n)
                .map(|i| (1.0 - delta) * r[i - 1] + if i == n { delta } else { 0.0 })
                .collect();
            let rho = state(&r);
            let sigma = state(&s);
            let general = relative_entropy(&sigma, &rho).unwrap();
            assert!(
                (point.rel_entropy - general).abs() <= 1e-10 * general.max(1.0),
                "n = {n}: scalar {} vs general {general}",
                point.rel_entropy
            );
            let expected_dist = 2.0 * delta * (1.0 - r[n - 1]);
            assert!((point.trace_dist - expected_dist).abs() < 1e-12);
        }
    }

    #[test]
    fn separation_table_shows_the_expected_monotonicity() {
        let rows = separation_demo(64).unwrap();
        assert_eq!(rows.len(), 5);
        assert_eq!(rows[0].n, 4);
        assert_eq!(rows[4].n, 64);
        assert!((rows[0].trace_dist - 14.0 / 15.0).abs() < 1e-12);
        for pair in rows.windows(2) {
            assert!(pair[1].trace_dist < pair[0].trace_dist);
            assert!(pair[1].rel_entropy > pair[0].rel_entropy);
        }
        assert!(separation_demo(3).is_err());
    }

    #[test]
    fn nearby_pairs_bound_the_relative_hamiltonian_norm() {
        let rho = state(&[0.8, 0.2]);
        let sigma = state(&[0.5, 0.5]);
        let c_star = nearby_constant(&rho, &sigma).unwrap();
        let x = relative_hamiltonian(rho.weight(), sigma.weight()).unwrap();
        assert!(operator_norm(&x).unwrap() <= c_star.ln() + 1e-9);
    }
}
