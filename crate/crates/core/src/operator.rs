//! Hermitian matrices with exact storage symmetry, plus the text
//! interchange format used to pass them between tools.

use crate::{check_dim_range, C64, CMat, Error, Result, HERMITICITY_TOL};
use serde::{Deserialize, Serialize};

/// A square complex matrix whose stored entries satisfy
/// `a[(i, j)] == conj(a[(j, i)])` exactly, with exactly real diagonal.
///
/// Construction symmetrizes, so the guarantee is bit-level, not approximate.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    mat: CMat,
}

impl HermitianOperator {
    /// Symmetrizes `raw` to `(raw + raw^*)/2` and reports the Frobenius norm
    /// of the discarded anti-Hermitian part.
    pub fn from_matrix(raw: CMat) -> Result<(Self, f64)> {
        if raw.nrows() != raw.ncols() {
            return Err(Error::DimensionMismatch {
                left: raw.nrows(),
                right: raw.ncols(),
            });
        }
        check_dim_range(raw.nrows())?;
        for z in raw.iter() {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::Parse("matrix entry is not finite".into()));
            }
        }
        let n = raw.nrows();
        let mut mat = CMat::zeros(n, n);
        let mut residual_sq = 0.0;
        for i in 0..n {
            mat[(i, i)] = C64::new(raw[(i, i)].re, 0.0);
            residual_sq += raw[(i, i)].im * raw[(i, i)].im;
            for j in (i + 1)..n {
                // (x + conj(y))/2 and its conjugate, so the two slots are
                // exact conjugates by construction.
                let re = (raw[(i, j)].re + raw[(j, i)].re) / 2.0;
                let im = (raw[(i, j)].im - raw[(j, i)].im) / 2.0;
                mat[(i, j)] = C64::new(re, im);
                mat[(j, i)] = C64::new(re, -im);
                let dre = raw[(i, j)].re - re;
                let dim = raw[(i, j)].im - im;
                residual_sq += 2.0 * (dre * dre + dim * dim);
            }
        }
        Ok((Self { mat }, residual_sq.sqrt()))
    }

    /// Symmetrizes a matrix that is already Hermitian up to roundoff.
    /// Panics only on shape errors, so it is reserved for internal results
    /// of structurally Hermitian computations.
    pub(crate) fn from_nearly_hermitian(raw: CMat) -> Self {
        let (op, _residual) = Self::from_matrix(raw).expect("square finite matrix");
        op
    }

    /// Builds from a raw matrix, rejecting inputs whose anti-Hermitian part
    /// exceeds `HERMITICITY_TOL` relative to the Frobenius norm.
    pub fn new(raw: CMat) -> Result<Self> {
        let scale = raw.norm();
        let (op, residual) = Self::from_matrix(raw)?;
        let bound = HERMITICITY_TOL * scale.max(1e-300);
        if residual > bound {
            return Err(Error::NotHermitian { residual, bound });
        }
        Ok(op)
    }

    pub fn zeros(n: usize) -> Result<Self> {
        check_dim_range(n)?;
        Ok(Self { mat: CMat::zeros(n, n) })
    }

    pub fn identity(n: usize) -> Result<Self> {
        check_dim_range(n)?;
        Ok(Self { mat: CMat::identity(n, n) })
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        check_dim_range(diag.len())?;
        let n = diag.len();
        let mut mat = CMat::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            if !d.is_finite() {
                return Err(Error::Parse("diagonal entry is not finite".into()));
            }
            mat[(i, i)] = C64::new(d, 0.0);
        }
        Ok(Self { mat })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn into_matrix(self) -> CMat {
        self.mat
    }

    /// Trace; exactly real because stored diagonals carry no imaginary part.
    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.mat[(i, i)].re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.norm()
    }

    /// `self + other`, exact symmetry preserved entrywise.
    pub fn add(&self, other: &Self) -> Result<Self> {
        crate::check_dims_match(self.dim(), other.dim())?;
        Ok(Self { mat: &self.mat + &other.mat })
    }

    /// `self - other`, exact symmetry preserved entrywise.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        crate::check_dims_match(self.dim(), other.dim())?;
        Ok(Self { mat: &self.mat - &other.mat })
    }

    /// `c * self` for real `c`.
    pub fn scale(&self, c: f64) -> Self {
        Self { mat: self.mat.map(|z| C64::new(z.re * c, z.im * c)) }
    }

    /// `self + c * I`.
    pub fn shift(&self, c: f64) -> Self {
        let mut mat = self.mat.clone();
        for i in 0..self.dim() {
            mat[(i, i)] += C64::new(c, 0.0);
        }
        Self { mat }
    }

    /// Plain matrix product; not Hermitian in general.
    pub fn mul(&self, other: &Self) -> Result<CMat> {
        crate::check_dims_match(self.dim(), other.dim())?;
        Ok(&self.mat * &other.mat)
    }

    /// `Re tr(self * other)`; the trace of a product of two Hermitian
    /// matrices is real, so the imaginary part is pure roundoff.
    pub fn trace_product(&self, other: &Self) -> Result<f64> {
        crate::check_dims_match(self.dim(), other.dim())?;
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let a = self.mat[(i, j)];
                let b = other.mat[(j, i)];
                acc += a.re * b.re - a.im * b.im;
            }
        }
        Ok(acc)
    }
}

/// Serialized form of a matrix: dimension, real part, optional imaginary
/// part (defaults to zero).
#[derive(Debug, Serialize, Deserialize)]
struct MatrixDocument {
    n: usize,
    re: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    im: Option<Vec<Vec<f64>>>,
}

fn rows_to_matrix(n: usize, re: &[Vec<f64>], im: Option<&Vec<Vec<f64>>>) -> Result<CMat> {
    let shape_err = |what: &str| Error::Parse(format!("field {what} is not a {n}x{n} array"));
    if re.len() != n {
        return Err(shape_err("re"));
    }
    if let Some(im) = im {
        if im.len() != n {
            return Err(shape_err("im"));
        }
    }
    let mut mat = CMat::zeros(n, n);
    for i in 0..n {
        if re[i].len() != n {
            return Err(shape_err("re"));
        }
        for j in 0..n {
            let im_val = match im {
                Some(rows) => {
                    if rows[i].len() != n {
                        return Err(shape_err("im"));
                    }
                    rows[i][j]
                }
                None => 0.0,
            };
            mat[(i, j)] = C64::new(re[i][j], im_val);
        }
    }
    Ok(mat)
}

/// Parses the interchange text format and enforces Hermiticity.
///
/// The document must symmetrize with a residual at most `HERMITICITY_TOL`
/// relative to the Frobenius norm of the raw matrix.
pub fn parse_matrix(text: &str) -> Result<HermitianOperator> {
    let doc: MatrixDocument =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    check_dim_range(doc.n)?;
    let raw = rows_to_matrix(doc.n, &doc.re, doc.im.as_ref())?;
    HermitianOperator::new(raw)
}

/// Writes the interchange text format. Exact round trip: the emitted
/// decimals parse back to the same floats.
pub fn write_matrix(op: &HermitianOperator) -> String {
    let n = op.dim();
    let mat = op.matrix();
    let re: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| mat[(i, j)].re).collect())
        .collect();
    let any_im = mat.iter().any(|z| z.im != 0.0);
    let im = any_im.then(|| {
        (0..n)
            .map(|i| (0..n).map(|j| mat[(i, j)].im).collect())
            .collect()
    });
    let doc = MatrixDocument { n, re, im };
    serde_json::to_string(&doc).expect("document serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw2(entries: [[(f64, f64); 2]; 2]) -> CMat {
        CMat::from_fn(2, 2, |i, j| C64::new(entries[i][j].0, entries[i][j].1))
    }

    #[test]
    fn symmetrization_is_exact() {
        let raw = raw2([[(1.0, 0.3), (2.0, 1.0)], [(2.2, -0.9), (4.0, -0.1)]]);
        let (op, residual) = HermitianOperator::from_matrix(raw).unwrap();
        assert!(residual > 0.0);
        let m = op.matrix();
        for i in 0..2 {
            assert_eq!(m[(i, i)].im, 0.0);
            for j in 0..2 {
                assert_eq!(m[(i, j)].re, m[(j, i)].re);
                assert_eq!(m[(i, j)].im, -m[(j, i)].im);
            }
        }
    }

    #[test]
    fn new_rejects_a_clearly_non_hermitian_matrix() {
        let raw = raw2([[(1.0, 0.0), (5.0, 0.0)], [(-5.0, 0.0), (1.0, 0.0)]]);
        match HermitianOperator::new(raw) {
            Err(Error::NotHermitian { residual, .. }) => assert!(residual > 1.0),
            other => panic!("expected NotHermitian, got {other:?}"),
        }
    }

    #[test]
    fn trace_is_real_sum_of_diagonal() {
        let op = HermitianOperator::from_diagonal(&[0.5, -1.5, 2.0]).unwrap();
        assert_eq!(op.trace(), 1.0);
    }

    #[test]
    fn parse_accepts_real_document_without_im() {
        let op = parse_matrix(r#"{"n":2,"re":[[0.8,0.0],[0.0,0.2]]}"#).unwrap();
        assert_eq!(op.dim(), 2);
        assert_eq!(op.matrix()[(0, 0)].re, 0.8);
        assert_eq!(op.matrix()[(1, 1)].re, 0.2);
    }

    #[test]
    fn parse_rejects_shape_mismatch() {
        let err = parse_matrix(r#"{"n":2,"re":[[1.0,0.0]]}"#).unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
    }

    #[test]
    fn parse_rejects_hermiticity_violation() {
        let err = parse_matrix(r#"{"n":2,"re":[[1.0,1.0],[-1.0,1.0]]}"#).unwrap_err();
        assert!(matches!(err, Error::NotHermitian { .. }));
    }

    #[test]
    fn parse_rejects_oversized_dimension() {
        let err = parse_matrix(r#"{"n":2000,"re":[]}"#).unwrap_err();
        assert!(matches!(err, Error::DimensionRange { .. }));
    }

    #[test]
    fn write_then_parse_round_trips_exactly() {
        let raw = raw2([[(0.7, 0.0), (0.1, 0.2)], [(0.1, -0.2), (0.3, 0.0)]]);
        let op = HermitianOperator::new(raw).unwrap();
        let back = parse_matrix(&write_matrix(&op)).unwrap();
        assert_eq!(op.matrix(), back.matrix());
    }

    #[test]
    fn trace_product_matches_direct_evaluation() {
        let a = HermitianOperator::new(raw2([[(1.0, 0.0), (0.0, 1.0)], [(0.0, -1.0), (2.0, 0.0)]]))
            .unwrap();
        let b = HermitianOperator::new(raw2([[(0.5, 0.0), (1.0, 0.0)], [(1.0, 0.0), (-0.5, 0.0)]]))
            .unwrap();
        let prod = a.mul(&b).unwrap();
        let tr: C64 = (0..2).map(|i| prod[(i, i)]).sum();
        assert!((a.trace_product(&b).unwrap() - tr.re).abs() < 1e-15);
        assert!(tr.im.abs() < 1e-15);
    }
}
