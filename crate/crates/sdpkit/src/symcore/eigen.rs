//! Jacobi eigendecomposition and the spectral tests built on it.

use super::matrix::{Mat, SymMatrix};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Default relative tolerance used by the spectral verdicts.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Maximum number of full Jacobi sweeps before giving up.
const MAX_SWEEPS: usize = 100;

/// Eigendecomposition `A = U diag(λ) Uᵀ` with unit eigenvector columns and
/// eigenvalues sorted ascending.
#[derive(Debug, Clone)]
pub struct EigenDecomp {
    /// Columns are unit eigenvectors, same order as `values`.
    pub vectors: Mat,
    /// Eigenvalues sorted ascending.
    pub values: Vec<f64>,
}

impl EigenDecomp {
    /// Reconstructs `U diag(λ) Uᵀ`.
    pub fn reconstruct(&self) -> SymMatrix {
        let n = self.values.len();
        SymMatrix::from_fn(n, |i, j| {
            (0..n)
                .map(|k| self.values[k] * self.vectors.get(i, k) * self.vectors.get(j, k))
                .sum()
        })
    }

    /// The eigenvector column `k`.
    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.vectors.col(k)
    }
}

/// Verdict of the eigenvalue PSD criterion.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PsdVerdict {
    pub is_psd: bool,
    pub is_pd: bool,
    pub min_eigenvalue: f64,
    /// Unit vector attaining the minimum Rayleigh quotient.
    pub witness: Option<Vec<f64>>,
}

/// Cyclic Jacobi eigendecomposition.
///
/// Each sweep annihilates every off-diagonal position once; the iteration
/// stops when the off-diagonal Frobenius norm drops below `tol * ‖A‖_F`.
pub fn eig_decompose(a: &SymMatrix, tol: f64) -> Result<EigenDecomp> {
    if tol <= 0.0 {
        return Err(Error::DomainError("tolerance must be positive".into()));
    }
    let n = a.order();
    let norm = frobenius_norm(a);
    let mut m = a.to_mat();
    let mut u = Mat::identity(n);
    if n > 1 && norm > 0.0 {
        let target = tol * norm;
        let mut converged = false;
        for _ in 0..MAX_SWEEPS {
            if off_diag_norm(&m) <= target {
                converged = true;
                break;
            }
            for p in 0..n - 1 {
                for q in p + 1..n {
                    rotate(&mut m, &mut u, p, q);
                }
            }
        }
        if !converged && off_diag_norm(&m) > target {
            return Err(Error::NumericalTrouble(format!(
                "Jacobi iteration did not converge in {MAX_SWEEPS} sweeps"
            )));
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m.get(i, i).partial_cmp(&m.get(j, j)).unwrap());
    let values: Vec<f64> = order.iter().map(|&k| m.get(k, k)).collect();
    let mut vectors = Mat::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        for r in 0..n {
            vectors.set(r, new, u.get(r, old));
        }
    }
    Ok(EigenDecomp { vectors, values })
}

/// One Jacobi rotation annihilating position `(p, q)`.
fn rotate(m: &mut Mat, u: &mut Mat, p: usize, q: usize) {
    let apq = m.get(p, q);
    if apq == 0.0 {
        return;
    }
    let app = m.get(p, p);
    let aqq = m.get(q, q);
    let theta = (aqq - app) / (2.0 * apq);
    // Smaller root of t^2 + 2 theta t - 1 = 0 keeps the rotation angle <= pi/4.
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let n = m.rows;
    for k in 0..n {
        let mkp = m.get(k, p);
        let mkq = m.get(k, q);
        m.set(k, p, c * mkp - s * mkq);
        m.set(k, q, s * mkp + c * mkq);
    }
    for k in 0..n {
        let mpk = m.get(p, k);
        let mqk = m.get(q, k);
        m.set(p, k, c * mpk - s * mqk);
        m.set(q, k, s * mpk + c * mqk);
    }
    m.set(p, q, 0.0);
    m.set(q, p, 0.0);
    for k in 0..n {
        let ukp = u.get(k, p);
        let ukq = u.get(k, q);
        u.set(k, p, c * ukp - s * ukq);
        u.set(k, q, s * ukp + c * ukq);
    }
}

fn off_diag_norm(m: &Mat) -> f64 {
    let n = m.rows;
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += m.get(i, j) * m.get(i, j);
            }
        }
    }
    s.sqrt()
}

/// Eigenvalue criterion: PSD iff every eigenvalue is nonnegative.
///
/// The verdict uses the relative threshold `tol * max(1, ‖A‖_F)`:
/// `is_psd ⇔ λ_min >= -threshold` and `is_pd ⇔ λ_min > threshold`.
pub fn psd_check(a: &SymMatrix, tol: f64) -> Result<PsdVerdict> {
    if tol < 0.0 {
        return Err(Error::DomainError("tolerance must be nonnegative".into()));
    }
    let eig = eig_decompose(a, DEFAULT_TOL.min(tol.max(1e-14)))?;
    let min_eigenvalue = eig.values[0];
    let threshold = tol * frobenius_norm(a).max(1.0);
    Ok(PsdVerdict {
        is_psd: min_eigenvalue >= -threshold,
        is_pd: min_eigenvalue > threshold,
        min_eigenvalue,
        witness: Some(eig.vector(0)),
    })
}

/// Gershgorin disk bounds: every eigenvalue lies in `[lo, hi]` with
/// `lo = min_i (a_ii - r_i)` and `hi = max_i (a_ii + r_i)`, `r_i` being the
/// absolute off-diagonal row sum.
pub fn gershgorin_interval(a: &SymMatrix) -> (f64, f64) {
    let n = a.order();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r: f64 = (0..n).filter(|&j| j != i).map(|j| a.get(i, j).abs()).sum();
        lo = lo.min(a.get(i, i) - r);
        hi = hi.max(a.get(i, i) + r);
    }
    (lo, hi)
}

/// Frobenius norm `sqrt(Σ A_ij²) = sqrt(Σ λ_i²)`.
pub fn frobenius_norm(a: &SymMatrix) -> f64 {
    a.entries().iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Number of eigenvalues with `|λ| > tol` (absolute threshold).
pub fn rank_of(a: &SymMatrix, tol: f64) -> Result<usize> {
    if tol <= 0.0 {
        return Err(Error::DomainError("tolerance must be positive".into()));
    }
    let eig = eig_decompose(a, DEFAULT_TOL)?;
    Ok(eig.values.iter().filter(|l| l.abs() > tol).count())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_eigenvalues() {
        let eig = eig_decompose(&SymMatrix::identity(3), 1e-12).unwrap();
        for v in &eig.values {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn all_ones_gap_matrix_spectrum() {
        // A_3(2) = 3 I - ones has eigenvalues {0, 3, 3}.
        let a = SymMatrix::all_ones_gap(3, 2.0);
        let eig = eig_decompose(&a, 1e-12).unwrap();
        assert!((eig.values[0] - 0.0).abs() < 1e-10);
        assert!((eig.values[1] - 3.0).abs() < 1e-10);
        assert!((eig.values[2] - 3.0).abs() < 1e-10);
    }

    #[test]
    fn exchange_matrix_spectrum() {
        // [[0,1],[1,0]] has characteristic polynomial x^2 - 1.
        let a = SymMatrix::new(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let eig = eig_decompose(&a, 1e-12).unwrap();
        assert!((eig.values[0] + 1.0).abs() < 1e-12);
        assert!((eig.values[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn psd_check_all_ones_gap() {
        let v = psd_check(&SymMatrix::all_ones_gap(3, 2.0), 1e-9).unwrap();
        assert!(v.is_psd && !v.is_pd);
        let v = psd_check(&SymMatrix::all_ones_gap(3, 1.9), 1e-9).unwrap();
        assert!(!v.is_psd);
        // Witness is the normalized all-ones direction.
        let w = v.witness.unwrap();
        let s = 1.0 / 3f64.sqrt();
        assert!(w.iter().all(|x| (x.abs() - s).abs() < 1e-6));
    }

    #[test]
    fn psd_check_zero_matrix() {
        let v = psd_check(&SymMatrix::zeros(2), 1e-9).unwrap();
        assert!(v.is_psd && !v.is_pd);
        assert!(v.min_eigenvalue.abs() < 1e-12);
    }

    #[test]
    fn gershgorin_examples() {
        assert_eq!(gershgorin_interval(&SymMatrix::all_ones_gap(3, 2.0)), (0.0, 4.0));
        assert_eq!(gershgorin_interval(&SymMatrix::identity(5)), (1.0, 1.0));
        assert_eq!(gershgorin_interval(&SymMatrix::diag(&[1.0, 5.0])), (1.0, 5.0));
    }

    #[test]
    fn frobenius_examples() {
        assert_eq!(frobenius_norm(&SymMatrix::zeros(3)), 0.0);
        assert_eq!(frobenius_norm(&SymMatrix::identity(4)), 2.0);
        // A_3(0) has six off-diagonal entries of magnitude one.
        let a = SymMatrix::all_ones_gap(3, 0.0);
        assert!((frobenius_norm(&a) - 6f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank_of(&SymMatrix::ones(3), 1e-9).unwrap(), 1);
        assert_eq!(rank_of(&SymMatrix::identity(3), 1e-9).unwrap(), 3);
        assert_eq!(rank_of(&SymMatrix::zeros(2), 1e-9).unwrap(), 0);
    }
}
