//! Crate-internal dense solves shared by the model conversions and the
//! interior-point solver.

use crate::error::Result;
use crate::symcore::{eig_decompose, Mat, SymMatrix, DEFAULT_TOL};

/// LU factorization with partial pivoting.
pub(crate) struct Lu {
    lu: Mat,
    perm: Vec<usize>,
    singular: bool,
}

pub(crate) fn lu_factor(a: &Mat) -> Lu {
    assert_eq!(a.rows, a.cols);
    let n = a.rows;
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut singular = false;
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if lu.get(r, col).abs() > lu.get(piv, col).abs() {
                piv = r;
            }
        }
        if lu.get(piv, col).abs() < 1e-300 {
            singular = true;
            continue;
        }
        if piv != col {
            for j in 0..n {
                let t = lu.get(col, j);
                lu.set(col, j, lu.get(piv, j));
                lu.set(piv, j, t);
            }
            perm.swap(col, piv);
        }
        let p = lu.get(col, col);
        for r in col + 1..n {
            let f = lu.get(r, col) / p;
            lu.set(r, col, f);
            if f == 0.0 {
                continue;
            }
            for j in col + 1..n {
                let v = lu.get(r, j) - f * lu.get(col, j);
                lu.set(r, j, v);
            }
        }
    }
    Lu { lu, perm, singular }
}

impl Lu {
    pub(crate) fn is_singular(&self) -> bool {
        self.singular
    }

    pub(crate) fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lu.rows;
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for k in 0..i {
                y[i] -= self.lu.get(i, k) * y[k];
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                y[i] -= self.lu.get(i, k) * y[k];
            }
            y[i] /= self.lu.get(i, i);
        }
        y
    }
}

/// Minimum-norm least-squares solution of `G x = c` where `G` is given by
/// its rows. Returns the solution together with the residual norm.
///
/// Uses the eigen-pseudoinverse of the row Gram matrix; eigenvalues below
/// `1e-13 * λ_max` count as zero.
pub(crate) fn min_norm_solve(rows: &[Vec<f64>], c: &[f64]) -> Result<(Vec<f64>, f64)> {
    let m = rows.len();
    assert_eq!(m, c.len());
    if m == 0 {
        return Ok((Vec::new(), 0.0));
    }
    let dim = rows[0].len();
    let gram = SymMatrix::from_fn(m, |i, j| crate::symcore::dot(&rows[i], &rows[j]));
    let eig = eig_decompose(&gram, DEFAULT_TOL)?;
    let lmax = eig.values.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let cutoff = 1e-13 * lmax.max(1e-300);
    // alpha = pinv(G Gᵀ) c, then x = Gᵀ alpha.
    let mut alpha = vec![0.0; m];
    for k in 0..m {
        let lk = eig.values[k];
        if lk <= cutoff {
            continue;
        }
        let uk = eig.vectors.col(k);
        let proj = crate::symcore::dot(&uk, c) / lk;
        for i in 0..m {
            alpha[i] += proj * uk[i];
        }
    }
    let mut x = vec![0.0; dim];
    for (i, row) in rows.iter().enumerate() {
        let ai = alpha[i];
        if ai == 0.0 {
            continue;
        }
        for (xj, rj) in x.iter_mut().zip(row) {
            *xj += ai * rj;
        }
    }
    let mut res = 0.0f64;
    for (row, &ci) in rows.iter().zip(c) {
        let r = crate::symcore::dot(row, &x) - ci;
        res += r * r;
    }
    Ok((x, res.sqrt()))
}

/// Orthonormal basis of the orthogonal complement of `span(rows)` inside
/// `R^dim`, by Gram-Schmidt over the rows followed by the canonical basis.
pub(crate) fn complement_basis(rows: &[Vec<f64>], dim: usize) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut complement: Vec<Vec<f64>> = Vec::new();
    let feed = |v: &[f64], into_complement: bool, basis: &mut Vec<Vec<f64>>, complement: &mut Vec<Vec<f64>>| {
        let mut w = v.to_vec();
        for _ in 0..2 {
            for q in basis.iter() {
                let c = crate::symcore::dot(q, &w);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
        let norm = crate::symcore::norm2(&w);
        if norm > 1e-10 * crate::symcore::norm2(v).max(1.0) {
            for wi in w.iter_mut() {
                *wi /= norm;
            }
            if into_complement {
                complement.push(w.clone());
            }
            basis.push(w);
        }
    };
    for row in rows {
        feed(row, false, &mut basis, &mut complement);
    }
    for k in 0..dim {
        let mut e = vec![0.0; dim];
        e[k] = 1.0;
        feed(&e, true, &mut basis, &mut complement);
        if basis.len() == dim {
            break;
        }
    }
    complement
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_solves() {
        let a = Mat::from_rows(&[vec![2.0, 1.0], vec![1.0, 3.0]]);
        let lu = lu_factor(&a);
        assert!(!lu.is_singular());
        let x = lu.solve(&[5.0, 10.0]);
        assert!((x[0] - 1.0).abs() < 1e-12);
        assert!((x[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn min_norm_underdetermined() {
        // y1 + y2 = 10: minimum-norm solution is (5, 5).
        let (x, res) = min_norm_solve(&[vec![1.0, 1.0]], &[10.0]).unwrap();
        assert!(res < 1e-9);
        assert!((x[0] - 5.0).abs() < 1e-9 && (x[1] - 5.0).abs() < 1e-9);
    }

    #[test]
    fn min_norm_flags_inconsistency() {
        let (_, res) = min_norm_solve(&[vec![1.0, 0.0], vec![1.0, 0.0]], &[0.0, 1.0]).unwrap();
        assert!(res > 0.5);
    }

    #[test]
    fn complement_dimensions() {
        let basis = complement_basis(&[vec![1.0, 0.0, 0.0]], 3);
        assert_eq!(basis.len(), 2);
        for b in &basis {
            assert!(b[0].abs() < 1e-12);
        }
        assert_eq!(complement_basis(&[], 2).len(), 2);
    }
}
