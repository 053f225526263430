//! Verified eigendecompositions, matrix functions, and the Loewner order.

use crate::operator::HermitianOperator;
use crate::{C64, CMat, Error, Result, TOL_EIG};
use nalgebra::DVector;

/// Eigendecomposition `A = V diag(lambda) V^*` with eigenvalues ascending
/// and a deterministic phase convention on eigenvectors.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: DVector<f64>,
    eigenvectors: CMat,
}

impl SpectralDecomposition {
    /// Assembles from parts already known to be valid: ascending eigenvalues
    /// and a unitary eigenvector matrix produced by [`eig`].
    pub(crate) fn from_parts(eigenvalues: DVector<f64>, eigenvectors: CMat) -> Self {
        debug_assert_eq!(eigenvalues.len(), eigenvectors.nrows());
        debug_assert!(eigenvalues.as_slice().windows(2).all(|w| w[0] <= w[1]));
        Self { eigenvalues, eigenvectors }
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    /// Unitary matrix whose columns are the eigenvectors, ordered to match
    /// [`Self::eigenvalues`].
    pub fn eigenvectors(&self) -> &CMat {
        &self.eigenvectors
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[self.dim() - 1]
    }

    /// Largest eigenvalue magnitude.
    pub fn operator_norm(&self) -> f64 {
        self.min_eigenvalue().abs().max(self.max_eigenvalue().abs())
    }

    /// `V^* X V`: coordinates of `X` in the eigenbasis.
    pub fn to_eigenbasis(&self, x: &CMat) -> CMat {
        self.eigenvectors.adjoint() * x * &self.eigenvectors
    }

    /// `V X V^*`: back from eigenbasis coordinates.
    pub fn from_eigenbasis(&self, x: &CMat) -> CMat {
        &self.eigenvectors * x * self.eigenvectors.adjoint()
    }

    /// `V f(diag) V^*` for a scalar function applied to the eigenvalues.
    /// Rejects `f` values that are not finite, naming the offending
    /// eigenvalue.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> Result<HermitianOperator> {
        let n = self.dim();
        let mut mapped = DVector::zeros(n);
        for i in 0..n {
            let v = f(self.eigenvalues[i]);
            if !v.is_finite() {
                return Err(Error::FunctionDomain { eigenvalue: self.eigenvalues[i] });
            }
            mapped[i] = v;
        }
        Ok(HermitianOperator::from_nearly_hermitian(
            self.assemble(&mapped),
        ))
    }

    /// `V diag(values) V^*` without a domain check.
    pub(crate) fn assemble(&self, values: &DVector<f64>) -> CMat {
        let mut scaled = self.eigenvectors.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            let v = C64::new(values[k], 0.0);
            for z in col.iter_mut() {
                *z *= v;
            }
        }
        scaled * self.eigenvectors.adjoint()
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Ordering is ascending with ties broken deterministically; each
/// eigenvector is scaled so its largest-magnitude entry is real positive.
/// Reconstruction `A V = V diag` and orthonormality `V^* V = I` are checked
/// against `TOL_EIG * n * max(scale, 1)` before returning.
pub fn eig(op: &HermitianOperator) -> Result<SpectralDecomposition> {
    let n = op.dim();
    let mat = op.matrix().clone();
    let scale = mat.norm();
    let se = nalgebra::linalg::SymmetricEigen::try_new(mat, f64::EPSILON, 100_000 + 100 * n)
        .ok_or(Error::EigenConvergence { dim: n, norm: scale })?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        se.eigenvalues[a]
            .partial_cmp(&se.eigenvalues[b])
            .expect("finite eigenvalues")
            .then(a.cmp(&b))
    });

    let mut eigenvalues = DVector::zeros(n);
    let mut eigenvectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvalues[dst] = se.eigenvalues[src];
        let col = se.eigenvectors.column(src);
        // Phase convention: rotate so the largest-magnitude entry is real
        // positive (first such entry on ties).
        let mut pivot = 0;
        let mut best = -1.0;
        for (i, z) in col.iter().enumerate() {
            let m = z.norm_sqr();
            if m > best + 1e-300 {
                best = m;
                pivot = i;
            }
        }
        let z = col[pivot];
        let r = z.norm();
        let phase = if r > 0.0 { z.conj() / C64::new(r, 0.0) } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            eigenvectors[(i, dst)] = col[i] * phase;
        }
    }

    let dec = SpectralDecomposition { eigenvalues, eigenvectors };
    verify(op, &dec, scale)?;
    Ok(dec)
}

fn verify(op: &HermitianOperator, dec: &SpectralDecomposition, scale: f64) -> Result<()> {
    let n = op.dim();
    let bound = TOL_EIG * n as f64 * scale.max(1.0);

    // ||A V - V diag||_F equals the reconstruction residual when V is
    // unitary; unitarity is checked right after.
    let mut av = op.matrix() * &dec.eigenvectors;
    for (k, mut col) in av.column_iter_mut().enumerate() {
        let v = C64::new(dec.eigenvalues[k], 0.0);
        for (i, z) in col.iter_mut().enumerate() {
            *z -= dec.eigenvectors[(i, k)] * v;
        }
    }
    let recon = av.norm();
    if recon > bound {
        return Err(Error::EigenVerification { check: "reconstruction", residual: recon, bound });
    }

    let mut gram = dec.eigenvectors.adjoint() * &dec.eigenvectors;
    for i in 0..n {
        gram[(i, i)] -= C64::new(1.0, 0.0);
    }
    let ortho = gram.norm();
    let ortho_bound = TOL_EIG * n as f64;
    if ortho > ortho_bound {
        return Err(Error::EigenVerification {
            check: "orthonormality",
            residual: ortho,
            bound: ortho_bound,
        });
    }
    Ok(())
}

/// `V f(diag) V^*`: applies a scalar function through the spectrum.
pub fn matfun(op: &HermitianOperator, f: impl Fn(f64) -> f64) -> Result<HermitianOperator> {
    eig(op)?.apply(f)
}

/// Signed Loewner slack: the smallest eigenvalue of `b - a`, divided by
/// `max(||a||, ||b||, 1)` in operator norm. Nonnegative when `a <= b`.
pub fn loewner_margin(a: &HermitianOperator, b: &HermitianOperator) -> Result<f64> {
    crate::check_dims_match(a.dim(), b.dim())?;
    let scale = eig(a)?
        .operator_norm()
        .max(eig(b)?.operator_norm())
        .max(1.0);
    let diff = b.sub(a)?;
    Ok(eig(&diff)?.min_eigenvalue() / scale)
}

/// Whether `a <= b` in the Loewner order, allowing the smallest eigenvalue
/// of `b - a` to dip `tol` below zero relative to the operand scale.
pub fn loewner_leq(a: &HermitianOperator, b: &HermitianOperator, tol: f64) -> Result<bool> {
    if !tol.is_finite() || tol < 0.0 {
        return Err(Error::InvalidParameter {
            name: "tol",
            reason: format!("must be finite and nonnegative, got {tol}"),
        });
    }
    Ok(loewner_margin(a, b)? >= -tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::HermitianOperator;

    fn herm(entries: &[&[(f64, f64)]]) -> HermitianOperator {
        let n = entries.len();
        let raw = CMat::from_fn(n, n, |i, j| C64::new(entries[i][j].0, entries[i][j].1));
        HermitianOperator::new(raw).unwrap()
    }

    #[test]
    fn eigenvalues_come_out_ascending() {
        let op = herm(&[
            &[(2.0, 0.0), (0.0, 1.0), (0.3, 0.0)],
            &[(0.0, -1.0), (-1.0, 0.0), (0.0, 0.0)],
            &[(0.3, 0.0), (0.0, 0.0), (0.5, 0.0)],
        ]);
        let dec = eig(&op).unwrap();
        for w in dec.eigenvalues().as_slice().windows(2) {
            assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn reconstruction_residual_is_small() {
        let op = herm(&[
            &[(1.0, 0.0), (0.5, 0.25)],
            &[(0.5, -0.25), (-2.0, 0.0)],
        ]);
        let dec = eig(&op).unwrap();
        let rebuilt = dec.assemble(&dec.eigenvalues().clone());
        assert!((op.matrix() - rebuilt).norm() < 1e-14);
    }

    #[test]
    fn repeated_calls_are_bitwise_identical() {
        let op = herm(&[
            &[(0.4, 0.0), (0.1, 0.7)],
            &[(0.1, -0.7), (0.9, 0.0)],
        ]);
        let a = eig(&op).unwrap();
        let b = eig(&op).unwrap();
        assert_eq!(a.eigenvalues(), b.eigenvalues());
        assert_eq!(a.eigenvectors(), b.eigenvectors());
    }

    #[test]
    fn matfun_square_matches_matrix_product() {
        let op = herm(&[
            &[(1.0, 0.0), (0.2, -0.4)],
            &[(0.2, 0.4), (3.0, 0.0)],
        ]);
        let sq = matfun(&op, |x| x * x).unwrap();
        let direct = op.mul(&op).unwrap();
        assert!((sq.matrix() - direct).norm() < 1e-13);
    }

    #[test]
    fn matfun_log_rejects_indefinite_input() {
        let op = herm(&[&[(1.0, 0.0), (0.0, 0.0)], &[(0.0, 0.0), (-1.0, 0.0)]]);
        match matfun(&op, f64::ln) {
            Err(Error::FunctionDomain { eigenvalue }) => assert!(eigenvalue < 0.0),
            other => panic!("expected FunctionDomain, got {other:?}"),
        }
    }

    #[test]
    fn loewner_accepts_ordered_and_rejects_unordered_pairs() {
        let a = HermitianOperator::from_diagonal(&[1.0, 2.0]).unwrap();
        let b = HermitianOperator::from_diagonal(&[1.5, 2.5]).unwrap();
        assert!(loewner_leq(&a, &b, 0.0).unwrap());
        assert!(!loewner_leq(&b, &a, 1e-10).unwrap());
    }

    #[test]
    fn loewner_tolerance_is_relative_to_scale() {
        // An absolute violation of 1e-7 on operands of norm 1e3 is 1e-10
        // relative: inside tol 1e-9, outside tol 1e-11.
        let a = HermitianOperator::from_diagonal(&[1e3, 1.0]).unwrap();
        let b = HermitianOperator::from_diagonal(&[1e3 - 1e-7, 1.0]).unwrap();
        assert!(loewner_leq(&a, &b, 1e-9).unwrap());
        assert!(!loewner_leq(&a, &b, 1e-11).unwrap());
    }

    #[test]
    fn loewner_rejects_negative_tolerance() {
        let a = HermitianOperator::from_diagonal(&[1.0]).unwrap();
        assert!(matches!(
            loewner_leq(&a, &a, -1.0),
            Err(Error::InvalidParameter { .. })
        ));
    }

    #[test]
    fn degenerate_spectrum_still_verifies() {
        let op = herm(&[
            &[(1.0, 0.0), (0.0, 0.0), (0.0, 0.0)],
            &[(0.0, 0.0), (1.0, 0.0), (0.0, 0.0)],
            &[(0.0, 0.0), (0.0, 0.0), (1.0, 0.0)],
        ]);
        let dec = eig(&op).unwrap();
        assert_eq!(dec.eigenvalues().len(), 3);
        assert!((dec.min_eigenvalue() - 1.0).abs() < 1e-14);
    }
}
