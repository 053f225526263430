//! Independent reference evaluations used by tests and audits: adaptive
//! quadrature for the metric and for low-order expansion terms, divided
//! differences of the exponential, and the classical divergence on
//! diagonals. Nothing here shares code with the closed-form paths it
//! checks.

use crate::expansional::Perturbation;
use crate::operator::HermitianOperator;
use crate::weight::DensityState;
use crate::{C64, CMat, Error, Result};

/// Adaptive Simpson quadrature with Richardson correction; `tol` is the
/// absolute error target for the whole interval.
pub fn adaptive_simpson<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let mid = 0.5 * (a + b);
    let fm = f(mid);
    let fb = f(b);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    refine(&mut f, a, b, fa, fm, fb, whole, tol, 40)
}

#[allow(clippy::too_many_arguments)]
fn refine<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let mid = 0.5 * (a + b);
    let lm = 0.5 * (a + mid);
    let rm = 0.5 * (mid + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (mid - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - mid) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    refine(f, a, mid, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + refine(f, mid, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// `int_0^1 Tr(rho^t X rho^(1-t) Y) dt` by quadrature on the real part of
/// the integrand (the imaginary part integrates to zero by the t -> 1-t
/// symmetry).
pub fn bkm_inner_quadrature(
    x: &HermitianOperator,
    y: &HermitianOperator,
    rho: &DensityState,
    tol: f64,
) -> Result<f64> {
    crate::check_dims_match(x.dim(), rho.dim())?;
    crate::check_dims_match(y.dim(), rho.dim())?;
    let dec = rho.spectral();
    let n = rho.dim();
    let xt = dec.to_eigenbasis(x.matrix());
    let yt = dec.to_eigenbasis(y.matrix());
    let lam = dec.eigenvalues();
    let mut weights = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            weights[i][j] = (xt[(i, j)] * yt[(i, j)].conj()).re;
        }
    }
    let integrand = |t: f64| {
        let mut total = 0.0;
        for i in 0..n {
            let li = lam[i].powf(t);
            for j in 0..n {
                total += li * lam[j].powf(1.0 - t) * weights[i][j];
            }
        }
        total
    };
    Ok(adaptive_simpson(integrand, 0.0, 1.0, tol))
}

/// Scalar antiderivative of the innermost simplex layer:
/// `int_0^s a^(s-u) b^u du` through the exponent gap `d = ln b - ln a`.
fn inner_layer(a: f64, b: f64, s: f64) -> f64 {
    let d = b.ln() - a.ln();
    if d.abs() > 1e-6 {
        (b.powf(s) - a.powf(s)) / d
    } else {
        let sd = s * d;
        s * a.powf(s) * (1.0 + sd / 2.0 + sd * sd / 6.0 + sd * sd * sd / 24.0)
    }
}

/// Expansion terms of orders 1 and 2 by direct simplex quadrature (the
/// innermost layer in closed scalar form, the outer layer adaptive), in
/// the original basis. Deliberately slow and structurally unrelated to the
/// production evaluation.
pub fn expansion_term_quadrature(pert: &Perturbation, order: usize) -> Result<HermitianOperator> {
    if !(1..=2).contains(&order) {
        return Err(Error::InvalidParameter {
            name: "order",
            reason: format!("quadrature oracle covers orders 1 and 2, got {order}"),
        });
    }
    let dec = pert.base().spectral();
    let n = pert.base().dim();
    let e = -dec.to_eigenbasis(pert.x().matrix());
    let lam = dec.eigenvalues();
    let quad_tol = 1e-13;
    let mut out = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if order == 1 {
                let value = adaptive_simpson(
                    |s| lam[i].powf(1.0 - s) * lam[j].powf(s),
                    0.0,
                    1.0,
                    quad_tol,
                );
                out[(i, j)] = e[(i, j)] * C64::new(value, 0.0);
            } else {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..n {
                    let value = adaptive_simpson(
                        |s| lam[i].powf(1.0 - s) * inner_layer(lam[k], lam[j], s),
                        0.0,
                        1.0,
                        quad_tol,
                    );
                    acc += e[(i, k)] * e[(k, j)] * C64::new(value, 0.0);
                }
                out[(i, j)] = acc;
            }
        }
    }
    Ok(HermitianOperator::from_nearly_hermitian(dec.from_eigenbasis(&out)))
}

/// Divided difference of `exp` over the given nodes (order = nodes - 1),
/// by the standard recursive table with a Taylor fallback when a cluster
/// of nodes is too close for stable differencing.
pub fn dd_exp(nodes: &[f64]) -> f64 {
    debug_assert!(!nodes.is_empty());
    let mut sorted = nodes.to_vec();
    sorted.sort_by(f64::total_cmp);
    dd_sorted(&sorted)
}

fn dd_sorted(y: &[f64]) -> f64 {
    let m = y.len() - 1;
    if m == 0 {
        return y[0].exp();
    }
    let spread = y[m] - y[0];
    if spread < 1e-6 {
        return dd_taylor(y);
    }
    (dd_sorted(&y[1..]) - dd_sorted(&y[..m])) / spread
}

/// `exp[y_0..y_m] = e^mean * sum_k h_k(deltas) / (m+k)!` where `h_k` are
/// the complete homogeneous symmetric polynomials of the centered nodes,
/// generated through Newton's identity from power sums.
fn dd_taylor(y: &[f64]) -> f64 {
    let m = y.len() - 1;
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let deltas: Vec<f64> = y.iter().map(|v| v - mean).collect();
    const KMAX: usize = 24;
    let mut power_sums = [0.0; KMAX + 1];
    for (k, slot) in power_sums.iter_mut().enumerate().skip(1) {
        *slot = deltas.iter().map(|d| d.powi(k as i32)).sum();
    }
    let mut h = [0.0; KMAX + 1];
    h[0] = 1.0;
    for k in 1..=KMAX {
        let mut acc = 0.0;
        for j in 1..=k {
            acc += h[k - j] * power_sums[j];
        }
        h[k] = acc / k as f64;
    }
    let mut inv_fact = 1.0;
    for i in 1..=m {
        inv_fact /= i as f64;
    }
    let mut sum = 0.0;
    for (k, hk) in h.iter().enumerate() {
        if k > 0 {
            inv_fact /= (m + k) as f64;
        }
        sum += hk * inv_fact;
    }
    mean.exp() * sum
}

/// Expansion term of the given order by the divided-difference path-sum
/// form: entry (i,j) sums over index paths the product of perturbation
/// entries times the exp divided difference over the path's log
/// eigenvalues. Exponential in the order; capped at order 4 and dim 4.
pub fn expansion_term_dd(pert: &Perturbation, order: usize) -> Result<HermitianOperator> {
    let n = pert.base().dim();
    if !(1..=4).contains(&order) || n > 4 {
        return Err(Error::InvalidParameter {
            name: "order",
            reason: format!(
                "path-sum oracle covers orders 1..=4 at dim <= 4, got order {order}, dim {n}"
            ),
        });
    }
    let dec = pert.base().spectral();
    let e = -dec.to_eigenbasis(pert.x().matrix());
    let logs: Vec<f64> = dec.eigenvalues().iter().map(|l| l.ln()).collect();
    let mut nodes = vec![0.0; order + 1];
    let mut out = CMat::zeros(n, n);
    for i in 0..n {
        nodes[0] = logs[i];
        for j in 0..n {
            out[(i, j)] = path_sum(&e, &logs, &mut nodes, 1, i, j, order);
        }
    }
    Ok(HermitianOperator::from_nearly_hermitian(dec.from_eigenbasis(&out)))
}

fn path_sum(
    e: &CMat,
    logs: &[f64],
    nodes: &mut [f64],
    depth: usize,
    prev: usize,
    last: usize,
    order: usize,
) -> C64 {
    if depth == order {
        nodes[order] = logs[last];
        return e[(prev, last)] * C64::new(dd_exp(nodes), 0.0);
    }
    let mut acc = C64::new(0.0, 0.0);
    for k in 0..logs.len() {
        nodes[depth] = logs[k];
        acc += e[(prev, k)] * path_sum(e, logs, nodes, depth + 1, k, last, order);
    }
    acc
}

/// Classical divergence `sum p_i (ln p_i - ln q_i)` on strictly positive
/// diagonals.
pub fn kl_diagonal(p: &[f64], q: &[f64]) -> f64 {
    debug_assert_eq!(p.len(), q.len());
    p.iter().zip(q).map(|(pi, qi)| pi * (pi.ln() - qi.ln())).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expansional::dyson_terms;
    use crate::norms::bkm_inner;
    use crate::weight::FiniteWeight;

    fn herm(entries: &[&[(f64, f64)]]) -> HermitianOperator {
        let n = entries.len();
        let raw = CMat::from_fn(n, n, |i, j| C64::new(entries[i][j].0, entries[i][j].1));
        HermitianOperator::new(raw).unwrap()
    }

    fn test_perturbation() -> Perturbation {
        let rho = FiniteWeight::new(herm(&[
            &[(0.7, 0.0), (0.15, 0.1)],
            &[(0.15, -0.1), (0.35, 0.0)],
        ]))
        .unwrap();
        let x = herm(&[&[(0.3, 0.0), (0.25, -0.2)], &[(0.25, 0.2), (-0.5, 0.0)]]);
        Perturbation::new(rho, x).unwrap()
    }

    #[test]
    fn simpson_integrates_smooth_functions() {
        assert!((adaptive_simpson(|x| x * x * x, 0.0, 1.0, 1e-12) - 0.25).abs() < 1e-14);
        let e = adaptive_simpson(f64::exp, 0.0, 1.0, 1e-13);
        assert!((e - (1f64.exp() - 1.0)).abs() < 1e-12);
        let pi = adaptive_simpson(|x| 4.0 / (1.0 + x * x), 0.0, 1.0, 1e-12);
        assert!((pi - std::f64::consts::PI).abs() < 1e-11);
    }

    #[test]
    fn divided_differences_of_exp() {
        let two = dd_exp(&[0.0, 1.0]);
        assert!((two - (1f64.exp() - 1.0)).abs() < 1e-14);
        let clustered = dd_exp(&[0.5, 0.5 + 1e-9]);
        assert!((clustered - (0.5f64 + 0.5e-9).exp()).abs() < 1e-13);
        let repeated = dd_exp(&[0.3, 0.3, 0.3]);
        assert!((repeated - 0.3f64.exp() / 2.0).abs() < 1e-14);
        let manual = ((3f64.exp() - 1f64.exp()) / 2.0 - (1f64.exp() - 1.0)) / 3.0;
        assert!((dd_exp(&[0.0, 1.0, 3.0]) - manual).abs() < 1e-13);
        assert_eq!(dd_exp(&[3.0, 0.0, 1.0]), dd_exp(&[0.0, 1.0, 3.0]));
    }

    #[test]
    fn metric_quadrature_matches_the_closed_form() {
        let rho = DensityState::from_operator(
            HermitianOperator::from_diagonal(&[0.8, 0.2]).unwrap(),
        )
        .unwrap();
        let flip = herm(&[&[(0.0, 0.0), (1.0, 0.0)], &[(1.0, 0.0), (0.0, 0.0)]]);
        let quad = bkm_inner_quadrature(&flip, &flip, &rho, 1e-12).unwrap();
        assert!((quad - 1.2 / 4f64.ln()).abs() < 1e-10);

        let skew = DensityState::from_operator(herm(&[
            &[(0.5, 0.0), (0.1, 0.05), (0.0, 0.1)],
            &[(0.1, -0.05), (0.3, 0.0), (0.05, 0.0)],
            &[(0.0, -0.1), (0.05, 0.0), (0.2, 0.0)],
        ]))
        .unwrap();
        let x = herm(&[
            &[(0.4, 0.0), (0.2, -0.3), (0.0, 0.1)],
            &[(0.2, 0.3), (-0.1, 0.0), (0.25, 0.0)],
            &[(0.0, -0.1), (0.25, 0.0), (0.6, 0.0)],
        ]);
        let y = herm(&[
            &[(-0.2, 0.0), (0.1, 0.15), (0.3, 0.0)],
            &[(0.1, -0.15), (0.5, 0.0), (0.0, -0.2)],
            &[(0.3, 0.0), (0.0, 0.2), (0.1, 0.0)],
        ]);
        let quad = bkm_inner_quadrature(&x, &y, &skew, 1e-12).unwrap();
        let closed = bkm_inner(&x, &y, &skew).unwrap();
        assert!((quad - closed).abs() < 1e-9 * closed.abs().max(1.0));
    }

    #[test]
    fn quadrature_terms_match_the_production_expansion() {
        let pert = test_perturbation();
        let terms = dyson_terms(&pert, 2).unwrap();
        for order in [1usize, 2] {
            let oracle = expansion_term_quadrature(&pert, order).unwrap();
            let diff = (oracle.matrix() - terms[order].matrix()).norm();
            assert!(diff < 1e-10, "order {order}: {diff}");
        }
        assert!(expansion_term_quadrature(&pert, 3).is_err());
    }

    #[test]
    fn path_sum_terms_match_the_production_expansion() {
        let pert = test_perturbation();
        let terms = dyson_terms(&pert, 4).unwrap();
        for order in [1usize, 2, 3, 4] {
            let oracle = expansion_term_dd(&pert, order).unwrap();
            let diff = (oracle.matrix() - terms[order].matrix()).norm();
            assert!(diff < 1e-11, "order {order}: {diff}");
        }
        assert!(expansion_term_dd(&pert, 5).is_err());
    }

    #[test]
    fn classical_divergence_worked_value() {
        let kl = kl_diagonal(&[0.8, 0.2], &[0.5, 0.5]);
        let expected = 0.8 * (0.8f64 / 0.5).ln() + 0.2 * (0.2f64 / 0.5).ln();
        assert!((kl - expected).abs() < 1e-15);
        assert_eq!(kl_diagonal(&[0.3, 0.7], &[0.3, 0.7]), 0.0);
    }
}
