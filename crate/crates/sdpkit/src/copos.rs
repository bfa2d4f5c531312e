//! Copositive and completely positive cone machinery: membership
//! hierarchies, stable-set formulations and the Horn-matrix fixtures.
//!
//! Exact copositivity checks are NP-hard, so every verdict names the cone
//! actually tested: the inner chain `S⁺∩N ⊂ S⁺ ⊂ S⁺+N = K⁽⁰⁾ ⊂ K⁽¹⁾ ⊂ …`
//! and the outer chain `P⁽ʳ⁾` of integer-vector tests.

use crate::error::{Error, Result};
use crate::sdpmodel::{BlockMatrix, PrimalSdp};
use crate::sdpsolve::{self, SolveOptions, SolveStatus};
use crate::sos::{self, HomPoly, SosResult};
use crate::symcore::{psd_check, SymMatrix};
use crate::theta::Graph;
use serde::{Deserialize, Serialize};

/// Which cone a verdict refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cone {
    /// Doubly nonnegative: PSD with nonnegative entries.
    SplusCapN,
    /// `S⁺ + N`: PSD plus entrywise-nonnegative split (equals K⁽⁰⁾).
    SplusPlusN,
    /// Inner SOS hierarchy member `K⁽ʳ⁾`.
    KR,
    /// Outer hierarchy `P⁽ʳ⁾`: nonnegativity on small integer vectors.
    POuter,
}

/// Evidence attached to a membership verdict.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Certificate {
    /// Decomposition `M = S + N` with `S ⪰ 0`, `N >= 0`, `diag(N) = 0`.
    Split { s: SymMatrix, n: SymMatrix },
    /// Integer vector `z >= 0` with `zᵀ M z < 0` (refutes copositivity).
    Violation { z: Vec<u64>, value: f64 },
}

/// Outcome of a cone-membership test.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConeVerdict {
    pub cone: Cone,
    pub member: bool,
    pub r: Option<usize>,
    pub certificate: Option<Certificate>,
}

/// Doubly nonnegative test: PSD and entrywise `>= -1e-9`.
pub fn in_dnn(m: &SymMatrix) -> Result<ConeVerdict> {
    let psd = psd_check(m, crate::symcore::DEFAULT_TOL)?.is_psd;
    let nonneg = m.entries().iter().all(|&v| v >= -1e-9);
    Ok(ConeVerdict {
        cone: Cone::SplusCapN,
        member: psd && nonneg,
        r: None,
        certificate: None,
    })
}

/// Membership in `S⁺ + N` (the hierarchy level K⁽⁰⁾), by maximizing the
/// spectral margin of `M - N` over nonnegative `N` with zero diagonal.
///
/// `M ∈ S⁺+N` iff the margin is nonnegative; a certified split is returned
/// for members.
pub fn in_splus_plus_n(m: &SymMatrix) -> Result<ConeVerdict> {
    let n = m.order();
    if n > 30 {
        return Err(Error::UnsupportedSize("S⁺+N test capped at order 30".into()));
    }
    // Variables: t then nu_{ij} for i < j; maximize t with
    // M - Σ nu E_ij - t I ⪰ 0, nu >= 0 (min form: c = (-1, 0, ...)).
    let mut a = vec![BlockMatrix::dense(SymMatrix::identity(n).scale(-1.0))];
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let mut e = SymMatrix::zeros(n);
            e.set(i, j, -1.0);
            a.push(BlockMatrix::dense(e));
            pairs.push((i, j));
        }
    }
    let mut c = vec![-1.0];
    c.extend(std::iter::repeat(0.0).take(pairs.len()));
    let nvars = c.len();
    let p = PrimalSdp::new(c, a, BlockMatrix::dense(m.scale(-1.0)))?.with_nonneg(1..nvars);
    let rep = sdpsolve::solve(&p, &SolveOptions::default())?;
    if !matches!(rep.status, SolveStatus::Optimal | SolveStatus::NearOptimal) {
        return Err(Error::NumericalTrouble(format!(
            "margin solve stopped with {:?}",
            rep.status
        )));
    }
    let margin = -rep.pobj;
    if margin < -1e-6 {
        return Ok(ConeVerdict {
            cone: Cone::SplusPlusN,
            member: false,
            r: Some(0),
            certificate: None,
        });
    }
    let mut nn = SymMatrix::zeros(n);
    for (k, &(i, j)) in pairs.iter().enumerate() {
        nn.set(i, j, rep.x[k + 1].max(0.0));
    }
    let s = m.sub(&nn);
    Ok(ConeVerdict {
        cone: Cone::SplusPlusN,
        member: true,
        r: Some(0),
        certificate: Some(Certificate::Split { s, n: nn }),
    })
}

/// The quartic form `p_M(x) = Σ M_ij x_i² x_j²` associated with a symmetric
/// matrix; `M` is copositive iff `p_M` is nonnegative.
pub fn p_m_poly(m: &SymMatrix) -> HomPoly {
    let n = m.order();
    let mut terms = Vec::new();
    for i in 0..n {
        for j in i..n {
            let v = m.get(i, j);
            if v == 0.0 {
                continue;
            }
            let mut e = vec![0u32; n];
            e[i] += 2;
            e[j] += 2;
            terms.push((e, if i == j { v } else { 2.0 * v }));
        }
    }
    HomPoly::new(n, 4, terms).unwrap()
}

/// Inner-hierarchy membership `M ∈ K⁽ʳ⁾`: is `(Σ x_i²)^r · p_M(x)` a sum of
/// squares? Level 0 coincides with [`in_splus_plus_n`].
pub fn k_r_member(m: &SymMatrix, r: usize) -> Result<ConeVerdict> {
    if r > 1 {
        return Err(Error::UnsupportedSize("K^(r) implemented for r in {0, 1}".into()));
    }
    if r == 1 && m.order() > 8 {
        return Err(Error::UnsupportedSize("K^(1) capped at order 8".into()));
    }
    let p = p_m_poly(m).multiply_norm_power(r);
    let out = sos::sos_decompose(&p)?;
    Ok(ConeVerdict {
        cone: Cone::KR,
        member: out.is_sos(),
        r: Some(r),
        certificate: None,
    })
}

/// Same as [`k_r_member`] but also returning the SOS outcome so callers can
/// inspect or re-verify the certificate.
pub fn k_r_member_with_certificate(m: &SymMatrix, r: usize) -> Result<(ConeVerdict, SosResult)> {
    if r > 1 {
        return Err(Error::UnsupportedSize("K^(r) implemented for r in {0, 1}".into()));
    }
    let p = p_m_poly(m).multiply_norm_power(r);
    let out = sos::sos_decompose(&p)?;
    let verdict = ConeVerdict {
        cone: Cone::KR,
        member: out.is_sos(),
        r: Some(r),
        certificate: None,
    };
    Ok((verdict, out))
}

/// Outer-hierarchy test `M ∈ P⁽ʳ⁾`: `zᵀ M z >= 0` for every integer vector
/// `z >= 0` with `Σ z_i <= r`. Violations are reported with the
/// lexicographically first offending vector.
pub fn p_r_outer(m: &SymMatrix, r: usize) -> Result<ConeVerdict> {
    let n = m.order();
    let count = count_vectors(n, r);
    if count > 2_000_000 {
        return Err(Error::UnsupportedSize(format!(
            "outer test would enumerate {count} vectors"
        )));
    }
    let mut z = vec![0u64; n];
    let violation = first_violation(m, &mut z, 0, r as u64);
    match violation {
        Some((z, value)) => Ok(ConeVerdict {
            cone: Cone::POuter,
            member: false,
            r: Some(r),
            certificate: Some(Certificate::Violation { z, value }),
        }),
        None => Ok(ConeVerdict {
            cone: Cone::POuter,
            member: true,
            r: Some(r),
            certificate: None,
        }),
    }
}

fn count_vectors(n: usize, r: usize) -> usize {
    // C(n + r, r)
    let mut c: u128 = 1;
    for i in 0..r {
        c = c * (n + r - i) as u128 / (i + 1) as u128;
    }
    c.min(usize::MAX as u128) as usize
}

fn first_violation(m: &SymMatrix, z: &mut Vec<u64>, var: usize, left: u64) -> Option<(Vec<u64>, f64)> {
    if var == z.len() {
        if z.iter().all(|&v| v == 0) {
            return None;
        }
        let zf: Vec<f64> = z.iter().map(|&v| v as f64).collect();
        let val = m.quad_form(&zf);
        if val < -1e-9 {
            return Some((z.clone(), val));
        }
        return None;
    }
    for take in 0..=left {
        z[var] = take;
        if let Some(hit) = first_violation(m, z, var + 1, left - take) {
            z[var] = 0;
            return Some(hit);
        }
    }
    z[var] = 0;
    None
}

/// Solves `1/α(G) = min{(A + I) ⊙ xxᵀ : Σx = 1, x >= 0}` by the
/// support-reduction local search: supported edges are eliminated one at a
/// time through the linear-in-t exchange argument, the support is then
/// maximized and equalized. Restarts from one near-uniform seed per vertex.
///
/// Returns the optimal value `1/α(G)` and the uniform witness on a maximum
/// stable set.
pub fn stable_via_qp(g: &Graph) -> Result<(f64, Vec<f64>)> {
    let n = g.order();
    if n > 20 {
        return Err(Error::UnsupportedSize("stable_via_qp capped at 20 vertices".into()));
    }
    let mut best: Option<Vec<usize>> = None;
    for seed in 0..=n {
        // Seed 0 is uniform; seed v boosts vertex v - 1.
        let mut x = vec![1.0; n];
        if seed > 0 {
            x[seed - 1] += 1.0;
        }
        let total: f64 = x.iter().sum();
        for v in x.iter_mut() {
            *v /= total;
        }
        let support = local_search(g, x);
        let better = match &best {
            None => true,
            Some(b) => support.len() > b.len(),
        };
        if better {
            best = Some(support);
        }
    }
    let support = best.unwrap();
    let alpha = support.len();
    let mut x = vec![0.0; n];
    for &v in &support {
        x[v] = 1.0 / alpha as f64;
    }
    Ok((1.0 / alpha as f64, x))
}

/// One pass of the proof's edge-elimination argument followed by greedy
/// support maximization; returns the resulting stable support.
fn local_search(g: &Graph, mut x: Vec<f64>) -> Vec<usize> {
    let n = g.order();
    let a = g.adjacency();
    loop {
        // First supported edge in lexicographic order.
        let supported = g.edges().find(|&(i, j)| x[i] > 0.0 && x[j] > 0.0);
        let (i, j) = match supported {
            Some(e) => e,
            None => break,
        };
        // Contribution val(x_i, x_j) = (x_i + x_j)^2 + z_i x_i + z_j x_j;
        // moving all mass to the endpoint with the smaller slope never
        // increases the objective. Ties go to the lower-indexed vertex.
        let zi: f64 = (0..n)
            .filter(|&k| k != i && k != j)
            .map(|k| 2.0 * a.get(k, i) * x[k])
            .sum();
        let zj: f64 = (0..n)
            .filter(|&k| k != i && k != j)
            .map(|k| 2.0 * a.get(k, j) * x[k])
            .sum();
        let mass = x[i] + x[j];
        if zi < zj || (zi == zj && i < j) {
            x[i] = mass;
            x[j] = 0.0;
        } else {
            x[j] = mass;
            x[i] = 0.0;
        }
    }
    let mut support: Vec<usize> = (0..n).filter(|&v| x[v] > 0.0).collect();
    // Growing the stable support strictly improves 1/|S|.
    for v in 0..n {
        if !support.contains(&v) && support.iter().all(|&u| !g.has_edge(u, v)) {
            support.push(v);
        }
    }
    support.sort_unstable();
    support
}

/// The strengthened theta-like relaxation
/// `α⁰(G) = max{𝟙𝟙ᵀ ⊙ X : trace X = 1, X_ij = 0 on edges, X ⪰ 0, X >= 0}`,
/// sandwiched between α(G) and ϑ(G).
pub fn alpha0(g: &Graph) -> Result<f64> {
    let n = g.order();
    if n > 20 {
        return Err(Error::UnsupportedSize("alpha0 capped at 20 vertices".into()));
    }
    let mut d = crate::theta::build_theta_dual(g);
    // Entrywise nonnegativity on non-edge pairs (edges are pinned to zero
    // and the diagonal is nonnegative by PSD-ness): -2 X_ij <= 0.
    let base = d.a.len();
    for (k, (i, j)) in g.non_edges().into_iter().enumerate() {
        let mut e = SymMatrix::zeros(n);
        e.set(i, j, -1.0);
        d.a.push(BlockMatrix::dense(e));
        d.c.push(0.0);
        d.inequality_rows.insert(base + k);
    }
    let out = sdpsolve::solve_dual(&d, &SolveOptions::default())?;
    sdpsolve::require_converged(&out.report)?;
    Ok(out.objective)
}

/// The 5x5 Horn matrix: copositive but outside `S⁵⁺ + N⁵`.
pub fn horn_matrix() -> SymMatrix {
    SymMatrix::new(
        5,
        vec![
            1.0, -1.0, 1.0, 1.0, -1.0, //
            -1.0, 1.0, -1.0, 1.0, 1.0, //
            1.0, -1.0, 1.0, -1.0, 1.0, //
            1.0, 1.0, -1.0, 1.0, -1.0, //
            -1.0, 1.0, 1.0, -1.0, 1.0,
        ],
    )
    .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horn_matrix_shape() {
        let h = horn_matrix();
        assert_eq!(h.get(0, 1), -1.0);
        assert_eq!(h.get(0, 2), 1.0);
        assert_eq!(h.get(0, 4), -1.0);
        for i in 0..5 {
            assert_eq!(h.get(i, i), 1.0);
            let row_sum: f64 = (0..5).map(|j| h.get(i, j)).sum();
            assert_eq!(row_sum, 1.0);
        }
    }

    #[test]
    fn dnn_examples() {
        assert!(in_dnn(&SymMatrix::ones(3)).unwrap().member);
        let neg = SymMatrix::new(2, vec![1.0, -1.0, -1.0, 1.0]).unwrap();
        assert!(!in_dnn(&neg).unwrap().member);
        let flip = SymMatrix::new(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        assert!(!in_dnn(&flip).unwrap().member);
    }

    #[test]
    fn splus_plus_n_examples() {
        // The exchange matrix is N-part only.
        let flip = SymMatrix::new(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let v = in_splus_plus_n(&flip).unwrap();
        assert!(v.member);
        match v.certificate.unwrap() {
            Certificate::Split { s, n } => {
                assert!(psd_check(&s, 1e-7).unwrap().min_eigenvalue >= -1e-6);
                assert!(n.entries().iter().all(|&x| x >= -1e-9));
                assert!((n.get(0, 0)).abs() < 1e-9 && (n.get(1, 1)).abs() < 1e-9);
                assert!(s.add(&n).sub(&flip).max_abs() < 1e-6);
            }
            _ => panic!("expected split"),
        }
        // Any PSD matrix is a member with N = 0.
        assert!(in_splus_plus_n(&SymMatrix::identity(3)).unwrap().member);
        // The Horn matrix is not.
        assert!(!in_splus_plus_n(&horn_matrix()).unwrap().member);
    }

    #[test]
    fn k_r_horn() {
        let h = horn_matrix();
        assert!(!k_r_member(&h, 0).unwrap().member);
        assert!(k_r_member(&h, 1).unwrap().member);
        assert!(k_r_member(&SymMatrix::identity(2), 0).unwrap().member);
    }

    #[test]
    fn outer_hierarchy_examples() {
        let h = horn_matrix();
        for r in 1..=5 {
            assert!(p_r_outer(&h, r).unwrap().member, "Horn violates P^({r})");
        }
        let neg = SymMatrix::diag(&[-1.0]);
        let v = p_r_outer(&neg, 1).unwrap();
        assert!(!v.member);
        match v.certificate.unwrap() {
            Certificate::Violation { z, value } => {
                assert_eq!(z, vec![1]);
                assert!(value < 0.0);
            }
            _ => panic!("expected violation"),
        }
        let m = SymMatrix::new(2, vec![1.0, -2.0, -2.0, 1.0]).unwrap();
        let v = p_r_outer(&m, 2).unwrap();
        assert!(!v.member);
        match v.certificate.unwrap() {
            Certificate::Violation { z, value } => {
                assert_eq!(z, vec![1, 1]);
                assert!((value + 2.0).abs() < 1e-12);
            }
            _ => panic!("expected violation"),
        }
    }

    #[test]
    fn stable_via_qp_examples() {
        let (v, x) = stable_via_qp(&Graph::complete(3)).unwrap();
        assert_eq!(v, 1.0);
        assert_eq!(x.iter().filter(|&&t| t > 0.0).count(), 1);

        let (v, x) = stable_via_qp(&Graph::cycle(5)).unwrap();
        assert_eq!(v, 0.5);
        let support: Vec<usize> = (0..5).filter(|&i| x[i] > 0.0).collect();
        assert_eq!(support.len(), 2);
        for &s in &support {
            assert!((x[s] - 0.5).abs() < 1e-12);
        }

        let (v, x) = stable_via_qp(&Graph::empty(4)).unwrap();
        assert_eq!(v, 0.25);
        assert!(x.iter().all(|&t| (t - 0.25).abs() < 1e-12));

        let (v, _) = stable_via_qp(&Graph::petersen()).unwrap();
        assert_eq!(v, 0.25);
    }

    #[test]
    fn alpha0_examples() {
        assert!((alpha0(&Graph::complete(4)).unwrap() - 1.0).abs() < 1e-3);
        // On C5 the nonnegativity constraints are inactive: alpha0 = theta.
        let v = alpha0(&Graph::cycle(5)).unwrap();
        assert!(v >= 2.0 - 1e-6 && v <= 5f64.sqrt() + 1e-3, "alpha0(C5) = {v}");
        assert!((v - 5f64.sqrt()).abs() < 1e-3);
        // On Petersen the sandwich pinches: alpha = theta = 4.
        let v = alpha0(&Graph::petersen()).unwrap();
        assert!((v - 4.0).abs() < 1e-3, "alpha0(Petersen) = {v}");
    }
}
