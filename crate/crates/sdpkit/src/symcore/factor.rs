//! Factorizations and determinant-based PSD criteria.

use super::eigen::{eig_decompose, frobenius_norm, DEFAULT_TOL};
use super::matrix::{Mat, SymMatrix};
use crate::error::{Error, Result};

/// Cholesky factor `A = L Lᵀ` with `L` lower triangular.
#[derive(Debug, Clone)]
pub struct CholFactor {
    pub lower: Mat,
    /// Number of strictly positive pivots; equals the rank of the input.
    pub rank: usize,
}

impl CholFactor {
    pub fn reconstruct(&self) -> SymMatrix {
        self.lower.gram_rows()
    }
}

/// Cholesky factorization of a positive definite matrix.
///
/// The factor with strictly positive diagonal is unique; any nonpositive
/// pivot aborts with [`Error::NotPositiveDefinite`].
pub fn chol_pd(a: &SymMatrix) -> Result<CholFactor> {
    let n = a.order();
    let mut l = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k);
            }
            if i == j {
                if s <= 0.0 {
                    return Err(Error::NotPositiveDefinite);
                }
                l.set(i, i, s.sqrt());
            } else {
                l.set(i, j, s / l.get(j, j));
            }
        }
    }
    Ok(CholFactor { lower: l, rank: n })
}

/// Cholesky factorization of a positive semidefinite matrix.
///
/// Row `k` is obtained by forward substitution against the leading factor;
/// a zero pivot zeroes the corresponding coordinate, which keeps the factor
/// equal to the one built by induction from the minimum-norm solution of
/// the bordered system. The pivot rule makes zero-pivot columns identically
/// zero, so `rank` equals the count of strictly positive pivots.
pub fn chol_psd(a: &SymMatrix, tol: f64) -> Result<CholFactor> {
    let n = a.order();
    let scale = frobenius_norm(a).max(1.0);
    let pivot_floor = tol.max(1e-14) * scale;
    let mut l = Mat::zeros(n, n);
    let mut rank = 0usize;
    for i in 0..n {
        for j in 0..i {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k);
            }
            let piv = l.get(j, j);
            if piv > pivot_floor {
                l.set(i, j, s / piv);
            } else {
                // Zero pivot: the entry must already be consistent, else the
                // input was not PSD.
                if s.abs() > pivot_floor.max(tol * scale) * 10.0 {
                    return Err(Error::NotPsd(format!(
                        "inconsistent row {i} against zero pivot {j} (residual {s:.3e})"
                    )));
                }
                l.set(i, j, 0.0);
            }
        }
        let mut d = a.get(i, i);
        for k in 0..i {
            d -= l.get(i, k) * l.get(i, k);
        }
        if d < -tol * scale {
            return Err(Error::NotPsd(format!("negative pivot {d:.3e} at row {i}")));
        }
        let d = d.max(0.0);
        let r = d.sqrt();
        if r > pivot_floor {
            l.set(i, i, r);
            rank += 1;
        } else {
            l.set(i, i, 0.0);
        }
    }
    Ok(CholFactor { lower: l, rank })
}

/// Sylvester criterion: positive definite iff every leading principal minor
/// has a strictly positive determinant.
pub fn sylvester_pd(a: &SymMatrix) -> bool {
    let n = a.order();
    (1..=n).all(|k| {
        let idx: Vec<usize> = (0..k).collect();
        det(&a.principal_minor(&idx)) > 0.0
    })
}

/// Exhaustive principal-minor criterion for semidefiniteness: PSD iff every
/// principal minor (all 2ⁿ - 1 of them) has nonnegative determinant.
///
/// Capped at order 14.
pub fn all_principal_minors_nonneg(a: &SymMatrix) -> Result<bool> {
    let n = a.order();
    if n > 14 {
        return Err(Error::UnsupportedSize(format!(
            "principal-minor enumeration needs 2^{n} determinants"
        )));
    }
    let scale = frobenius_norm(a).max(1.0);
    for mask in 1u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let k = idx.len() as i32;
        if det(&a.principal_minor(&idx)) < -1e-10 * scale.powi(k) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn det(a: &SymMatrix) -> f64 {
    let n = a.order();
    let mut m = a.to_mat();
    let mut d = 1.0;
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if m.get(r, col).abs() > m.get(piv, col).abs() {
                piv = r;
            }
        }
        let p = m.get(piv, col);
        if p == 0.0 {
            return 0.0;
        }
        if piv != col {
            for j in 0..n {
                let t = m.get(col, j);
                m.set(col, j, m.get(piv, j));
                m.set(piv, j, t);
            }
            d = -d;
        }
        d *= p;
        for r in col + 1..n {
            let f = m.get(r, col) / p;
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                let v = m.get(r, j) - f * m.get(col, j);
                m.set(r, j, v);
            }
        }
    }
    d
}

/// Gram-Schmidt QR of a rectangular matrix: `A = Q R` with `Q` having
/// `p = rank(A)` orthonormal columns and `R` upper triangular (p×m).
///
/// A column whose residual after projection is below `tol * ‖column‖` is
/// treated as dependent and produces no new `Q` column.
pub fn gram_schmidt_qr(a: &Mat) -> (Mat, Mat) {
    let n = a.rows;
    let m = a.cols;
    let tol = 1e-10;
    let mut q_cols: Vec<Vec<f64>> = Vec::new();
    let mut r_rows: Vec<Vec<f64>> = Vec::new();
    for j in 0..m {
        let mut v = a.col(j);
        let full = super::matrix::norm2(&v);
        let mut coeffs = vec![0.0; q_cols.len()];
        // Re-orthogonalize once for stability.
        for _ in 0..2 {
            for (k, q) in q_cols.iter().enumerate() {
                let c = super::matrix::dot(q, &v);
                coeffs[k] += c;
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= c * qi;
                }
            }
        }
        let res = super::matrix::norm2(&v);
        for (k, c) in coeffs.iter().enumerate() {
            r_rows[k].push(*c);
        }
        if res > tol * full.max(1e-300) && full > 0.0 {
            for vi in v.iter_mut() {
                *vi /= res;
            }
            q_cols.push(v);
            let mut row = vec![0.0; j];
            row.push(res);
            r_rows.push(row);
        }
    }
    let p = q_cols.len();
    let mut q = Mat::zeros(n, p);
    for (k, col) in q_cols.iter().enumerate() {
        for i in 0..n {
            q.set(i, k, col[i]);
        }
    }
    let mut r = Mat::zeros(p, m);
    for (k, row) in r_rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            r.set(k, j, *v);
        }
    }
    (q, r)
}

/// Principal square root: the unique PSD `K` with `K K = A`, built as
/// `U sqrt(Λ) Uᵀ`.
pub fn principal_sqrt(a: &SymMatrix) -> Result<SymMatrix> {
    let scale = frobenius_norm(a).max(1.0);
    let eig = eig_decompose(a, DEFAULT_TOL)?;
    if eig.values[0] < -1e-8 * scale {
        return Err(Error::NotPsd(format!("min eigenvalue {:.3e}", eig.values[0])));
    }
    let n = a.order();
    let roots: Vec<f64> = eig.values.iter().map(|l| l.max(0.0).sqrt()).collect();
    Ok(SymMatrix::from_fn(n, |i, j| {
        (0..n)
            .map(|k| roots[k] * eig.vectors.get(i, k) * eig.vectors.get(j, k))
            .sum()
    }))
}

/// Schur complement `C - B A⁻¹ Bᵀ` of the leading `split`×`split` block `A`
/// in `M = [[A, Bᵀ], [B, C]]`. The whole matrix is PSD iff the complement is
/// (for positive definite `A`).
pub fn schur_complement(m: &SymMatrix, split: usize) -> Result<SymMatrix> {
    let n = m.order();
    if split == 0 || split >= n {
        return Err(Error::DimensionMismatch(format!(
            "split {split} must lie strictly inside order {n}"
        )));
    }
    let lead: Vec<usize> = (0..split).collect();
    let a = m.principal_minor(&lead);
    let chol = chol_pd(&a).map_err(|_| Error::LeadingBlockNotPd)?;
    let k = n - split;
    // Columns of Bᵀ, i.e. rows of B.
    let mut x = Mat::zeros(split, k);
    for c in 0..k {
        let rhs: Vec<f64> = (0..split).map(|r| m.get(r, split + c)).collect();
        let sol = chol_solve(&chol.lower, &rhs);
        for r in 0..split {
            x.set(r, c, sol[r]);
        }
    }
    Ok(SymMatrix::from_fn(k, |i, j| {
        let mut s = m.get(split + i, split + j);
        for r in 0..split {
            s -= m.get(split + i, r) * x.get(r, j);
        }
        s
    }))
}

/// Solves `L Lᵀ x = b` given the Cholesky factor `L`.
pub(crate) fn chol_solve(l: &Mat, b: &[f64]) -> Vec<f64> {
    let n = l.rows;
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            y[i] -= l.get(i, k) * y[k];
        }
        y[i] /= l.get(i, i);
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            y[i] -= l.get(k, i) * y[k];
        }
        y[i] /= l.get(i, i);
    }
    y
}

/// Which factorization backs a Gram factor `A = V Vᵀ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GramMethod {
    Cholesky,
    Eigen,
    Sqrt,
}

/// Gram factorization `A = V Vᵀ` of a PSD matrix by the requested method.
///
/// The factors differ across methods (they are related by rotation) but all
/// reproduce the same Gram matrix. The eigen route drops zero-eigenvalue
/// columns, so its `V` has `rank(A)` columns.
pub fn gram_factor(a: &SymMatrix, method: GramMethod) -> Result<Mat> {
    let scale = frobenius_norm(a).max(1.0);
    match method {
        GramMethod::Cholesky => {
            let f = chol_psd(a, DEFAULT_TOL)?;
            Ok(f.lower)
        }
        GramMethod::Sqrt => Ok(principal_sqrt(a)?.to_mat()),
        GramMethod::Eigen => {
            let eig = eig_decompose(a, DEFAULT_TOL)?;
            if eig.values[0] < -1e-8 * scale {
                return Err(Error::NotPsd(format!("min eigenvalue {:.3e}", eig.values[0])));
            }
            let n = a.order();
            let kept: Vec<usize> = (0..n).filter(|&k| eig.values[k] > 1e-12 * scale).collect();
            let mut v = Mat::zeros(n, kept.len().max(1));
            for (c, &k) in kept.iter().enumerate() {
                let s = eig.values[k].sqrt();
                for r in 0..n {
                    v.set(r, c, s * eig.vectors.get(r, k));
                }
            }
            Ok(v)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chol_pd_hand_example() {
        let a = SymMatrix::new(2, vec![4.0, 2.0, 2.0, 5.0]).unwrap();
        let f = chol_pd(&a).unwrap();
        assert!((f.lower.get(0, 0) - 2.0).abs() < 1e-12);
        assert!((f.lower.get(1, 0) - 1.0).abs() < 1e-12);
        assert!((f.lower.get(1, 1) - 2.0).abs() < 1e-12);
        assert_eq!(f.rank, 2);
    }

    #[test]
    fn chol_pd_identity_and_singular() {
        let f = chol_pd(&SymMatrix::identity(2)).unwrap();
        assert_eq!(f.lower, Mat::identity(2));
        let sing = SymMatrix::ones(2);
        assert!(matches!(chol_pd(&sing), Err(Error::NotPositiveDefinite)));
    }

    #[test]
    fn chol_psd_rank_one() {
        let a = SymMatrix::ones(2);
        let f = chol_psd(&a, 1e-9).unwrap();
        assert_eq!(f.rank, 1);
        assert_eq!(f.lower.row(0), &[1.0, 0.0]);
        assert_eq!(f.lower.row(1), &[1.0, 0.0]);
    }

    #[test]
    fn chol_psd_induction_factor() {
        // The non-unique case: the induction construction picks this factor.
        let a = SymMatrix::new(
            3,
            vec![1.0, 1.0, 2.0, 1.0, 1.0, 2.0, 2.0, 2.0, 13.0],
        )
        .unwrap();
        let f = chol_psd(&a, 1e-9).unwrap();
        assert_eq!(f.lower.row(0), &[1.0, 0.0, 0.0]);
        assert_eq!(f.lower.row(1), &[1.0, 0.0, 0.0]);
        assert_eq!(f.lower.row(2), &[2.0, 0.0, 3.0]);
        assert_eq!(f.rank, 2);
        let diff = f.reconstruct().sub(&a);
        assert!(diff.max_abs() < 1e-12);
    }

    #[test]
    fn chol_psd_zero_and_indefinite() {
        let f = chol_psd(&SymMatrix::zeros(3), 1e-9).unwrap();
        assert_eq!(f.rank, 0);
        assert!(f.lower.max_abs() == 0.0);
        let ind = SymMatrix::new(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        assert!(matches!(chol_psd(&ind, 1e-9), Err(Error::NotPsd(_))));
    }

    #[test]
    fn sylvester_examples() {
        assert!(sylvester_pd(&SymMatrix::new(2, vec![2.0, 1.0, 1.0, 2.0]).unwrap()));
        assert!(!sylvester_pd(&SymMatrix::ones(2)));
        assert!(!sylvester_pd(&SymMatrix::new(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap()));
    }

    #[test]
    fn minor_criterion_examples() {
        assert!(all_principal_minors_nonneg(&SymMatrix::ones(2)).unwrap());
        let x = SymMatrix::new(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        assert!(!all_principal_minors_nonneg(&x).unwrap());
        assert!(all_principal_minors_nonneg(&SymMatrix::all_ones_gap(3, 2.0)).unwrap());
        assert!(all_principal_minors_nonneg(&SymMatrix::identity(15)).is_err());
    }

    #[test]
    fn qr_examples() {
        let (q, r) = gram_schmidt_qr(&Mat::identity(2));
        assert_eq!(q, Mat::identity(2));
        assert_eq!(r, Mat::identity(2));

        let a = Mat::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        let (q, r) = gram_schmidt_qr(&a);
        assert_eq!(q.cols, 1);
        let s = 1.0 / 2f64.sqrt();
        assert!((q.get(0, 0) - s).abs() < 1e-12 && (q.get(1, 0) - s).abs() < 1e-12);
        assert!((r.get(0, 0) - 2f64.sqrt()).abs() < 1e-12);
        assert!((r.get(0, 1) - 2f64.sqrt()).abs() < 1e-12);

        let a = Mat::from_rows(&[vec![3.0, 0.0], vec![4.0, 0.0]]);
        let (q, r) = gram_schmidt_qr(&a);
        assert_eq!(q.cols, 1);
        assert!((q.get(0, 0) - 0.6).abs() < 1e-12 && (q.get(1, 0) - 0.8).abs() < 1e-12);
        assert!((r.get(0, 0) - 5.0).abs() < 1e-12 && r.get(0, 1).abs() < 1e-12);
    }

    #[test]
    fn sqrt_examples() {
        let k = principal_sqrt(&SymMatrix::identity(3)).unwrap();
        assert!(k.sub(&SymMatrix::identity(3)).max_abs() < 1e-10);
        let k = principal_sqrt(&SymMatrix::diag(&[4.0, 9.0])).unwrap();
        assert!(k.sub(&SymMatrix::diag(&[2.0, 3.0])).max_abs() < 1e-10);
        // sqrt(ones_2) = ones_2 / sqrt(2).
        let k = principal_sqrt(&SymMatrix::ones(2)).unwrap();
        assert!(k.sub(&SymMatrix::ones(2).scale(1.0 / 2f64.sqrt())).max_abs() < 1e-10);
        assert!(principal_sqrt(&SymMatrix::new(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap()).is_err());
    }

    #[test]
    fn schur_examples() {
        let m = SymMatrix::new(2, vec![1.0, 1.0, 1.0, 2.0]).unwrap();
        let s = schur_complement(&m, 1).unwrap();
        assert!((s.get(0, 0) - 1.0).abs() < 1e-12);

        let s = schur_complement(&SymMatrix::identity(4), 2).unwrap();
        assert!(s.sub(&SymMatrix::identity(2)).max_abs() < 1e-12);

        let m = SymMatrix::new(3, vec![2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0]).unwrap();
        let s = schur_complement(&m, 1).unwrap();
        let expect = SymMatrix::new(2, vec![1.5, 1.0, 1.0, 2.0]).unwrap();
        assert!(s.sub(&expect).max_abs() < 1e-12);

        let bad = SymMatrix::new(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        assert!(matches!(schur_complement(&bad, 1), Err(Error::LeadingBlockNotPd)));
    }

    #[test]
    fn gram_factor_examples() {
        for m in [GramMethod::Cholesky, GramMethod::Eigen, GramMethod::Sqrt] {
            let v = gram_factor(&SymMatrix::identity(2), m).unwrap();
            assert!(v.gram_rows().sub(&SymMatrix::identity(2)).max_abs() < 1e-9);
        }
        let v = gram_factor(&SymMatrix::ones(2), GramMethod::Eigen).unwrap();
        assert_eq!(v.cols, 1);
        assert!(v.gram_rows().sub(&SymMatrix::ones(2)).max_abs() < 1e-9);
    }
}
