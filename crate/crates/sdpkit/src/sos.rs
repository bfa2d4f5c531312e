//! Sum-of-squares decomposition of homogeneous polynomials via Gram-matrix
//! SDP feasibility.

use crate::error::{Error, Result};
use crate::sdpmodel::{BlockMatrix, PrimalSdp};
use crate::sdpsolve::{self, SolveOptions, SolveStatus};
use crate::symcore::{chol_psd, SymMatrix};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Homogeneous polynomial: coefficient map keyed by exponent vectors whose
/// entries sum to `degree`. Zero coefficients are dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomPoly {
    pub nvars: usize,
    pub degree: usize,
    pub coeffs: BTreeMap<Vec<u32>, f64>,
}

impl HomPoly {
    pub fn new(nvars: usize, degree: usize, terms: impl IntoIterator<Item = (Vec<u32>, f64)>) -> Result<Self> {
        let mut coeffs = BTreeMap::new();
        for (e, c) in terms {
            if e.len() != nvars {
                return Err(Error::DimensionMismatch(format!(
                    "exponent vector length {} vs {} variables",
                    e.len(),
                    nvars
                )));
            }
            if e.iter().map(|&x| x as usize).sum::<usize>() != degree {
                return Err(Error::DimensionMismatch(format!(
                    "exponent vector {e:?} does not sum to degree {degree}"
                )));
            }
            if c != 0.0 {
                *coeffs.entry(e).or_insert(0.0) += c;
            }
        }
        coeffs.retain(|_, c| *c != 0.0);
        Ok(HomPoly { nvars, degree, coeffs })
    }

    pub fn zero(nvars: usize, degree: usize) -> Self {
        HomPoly {
            nvars,
            degree,
            coeffs: BTreeMap::new(),
        }
    }

    /// Evaluates `Σ coeff · Π x_i^{e_i}`.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.nvars {
            return Err(Error::DimensionMismatch(format!(
                "point has {} coordinates, polynomial has {} variables",
                x.len(),
                self.nvars
            )));
        }
        let mut s = 0.0;
        for (e, c) in &self.coeffs {
            let mut term = *c;
            for (xi, &ei) in x.iter().zip(e) {
                term *= xi.powi(ei as i32);
            }
            s += term;
        }
        Ok(s)
    }

    /// Exact product with `(Σ x_i²)^r`; degree grows by `2r`.
    pub fn multiply_norm_power(&self, r: usize) -> HomPoly {
        let mut cur = self.clone();
        for _ in 0..r {
            let mut next: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
            for (e, c) in &cur.coeffs {
                for v in 0..self.nvars {
                    let mut e2 = e.clone();
                    e2[v] += 2;
                    *next.entry(e2).or_insert(0.0) += c;
                }
            }
            next.retain(|_, c| *c != 0.0);
            cur = HomPoly {
                nvars: self.nvars,
                degree: cur.degree + 2,
                coeffs: next,
            };
        }
        cur
    }
}

/// Exponent vectors of the monomials in `nvars` variables of degree exactly
/// `d` (`exact = true`, count C(n+d-1, d)) or at most `d` (count C(n+d, d)),
/// lexicographically sorted.
pub fn monomial_basis(nvars: usize, d: usize, exact: bool) -> Result<Vec<Vec<u32>>> {
    let count = if exact {
        binomial(nvars + d - 1, d)
    } else {
        binomial(nvars + d, d)
    };
    if count > 5000 {
        return Err(Error::UnsupportedSize(format!("{count} monomials requested")));
    }
    let mut out = Vec::with_capacity(count);
    let mut cur = vec![0u32; nvars];
    fn rec(out: &mut Vec<Vec<u32>>, cur: &mut Vec<u32>, var: usize, left: usize, exact: bool) {
        if var + 1 == cur.len() {
            cur[var] = left as u32;
            out.push(cur.clone());
            if !exact {
                for rest in (0..left).rev() {
                    cur[var] = rest as u32;
                    out.push(cur.clone());
                }
            }
            cur[var] = 0;
            return;
        }
        for take in (0..=left).rev() {
            cur[var] = take as u32;
            rec(out, cur, var + 1, left - take, exact);
        }
        cur[var] = 0;
    }
    if nvars == 0 {
        return Ok(out);
    }
    rec(&mut out, &mut cur, 0, d, exact);
    out.sort();
    out.dedup();
    Ok(out)
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r as usize
}

/// A certified decomposition `p = Σ (square_k · monomials)²`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SosCertificate {
    /// Exponent vectors of the degree-d monomial basis.
    pub basis: Vec<Vec<u32>>,
    /// Positive semidefinite Gram matrix over the basis.
    pub gram: SymMatrix,
    /// Coefficient vectors of the squared forms over the basis.
    pub squares: Vec<Vec<f64>>,
}

impl SosCertificate {
    /// Expands `Σ (square · basis)²` back into a coefficient map.
    pub fn expand(&self, nvars: usize, degree: usize) -> HomPoly {
        let mut coeffs: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        for sq in &self.squares {
            for (i, ci) in sq.iter().enumerate() {
                for (j, cj) in sq.iter().enumerate() {
                    let c = ci * cj;
                    if c == 0.0 {
                        continue;
                    }
                    let e: Vec<u32> = self.basis[i]
                        .iter()
                        .zip(&self.basis[j])
                        .map(|(a, b)| a + b)
                        .collect();
                    *coeffs.entry(e).or_insert(0.0) += c;
                }
            }
        }
        coeffs.retain(|_, c| c.abs() > 0.0);
        HomPoly { nvars, degree, coeffs }
    }
}

/// Outcome of [`sos_decompose`].
#[derive(Debug, Clone)]
pub enum SosResult {
    Certificate(SosCertificate),
    /// No PSD Gram matrix exists; `margin` is the best achievable smallest
    /// eigenvalue over all Gram parameterizations (negative).
    Infeasible { margin: f64 },
}

impl SosResult {
    pub fn is_sos(&self) -> bool {
        matches!(self, SosResult::Certificate(_))
    }

    pub fn certificate(&self) -> Option<&SosCertificate> {
        match self {
            SosResult::Certificate(c) => Some(c),
            SosResult::Infeasible { .. } => None,
        }
    }
}

/// Decides whether a homogeneous polynomial of even degree `2d` is a sum
/// of squares, producing a certificate when it is.
///
/// The Gram matrices representing `p` over the degree-d basis form an
/// affine set: a particular matrix plus the span of exchange directions
/// that move weight between products with equal monomial sum. Feasibility
/// is decided by maximizing the smallest eigenvalue over that set; the
/// polynomial is SOS exactly when the maximum is nonnegative.
pub fn sos_decompose(p: &HomPoly) -> Result<SosResult> {
    if p.degree % 2 != 0 {
        return Err(Error::DomainError("degree must be even for an SOS test".into()));
    }
    let d = p.degree / 2;
    let basis = monomial_basis(p.nvars, d, true)?;
    let nb = basis.len();
    if nb > 60 {
        return Err(Error::UnsupportedSize(format!("Gram basis of size {nb} exceeds 60")));
    }

    // Group the Gram positions (i <= j) by their monomial sum.
    let mut groups: BTreeMap<Vec<u32>, Vec<(usize, usize)>> = BTreeMap::new();
    for i in 0..nb {
        for j in i..nb {
            let m: Vec<u32> = basis[i].iter().zip(&basis[j]).map(|(a, b)| a + b).collect();
            groups.entry(m).or_default().push((i, j));
        }
    }
    // Every coefficient of p must be reachable.
    for m in p.coeffs.keys() {
        if !groups.contains_key(m) {
            return Ok(SosResult::Infeasible { margin: f64::NEG_INFINITY });
        }
    }

    // Particular Gram matrix: place each coefficient on one position
    // (prefer the diagonal), accounting for the symmetric double count.
    let mut g0 = SymMatrix::zeros(nb);
    for (m, positions) in &groups {
        let coeff = p.coeffs.get(m).copied().unwrap_or(0.0);
        if coeff == 0.0 {
            continue;
        }
        let (i, j) = positions
            .iter()
            .copied()
            .find(|&(i, j)| i == j)
            .unwrap_or(positions[0]);
        g0.set(i, j, if i == j { coeff } else { coeff / 2.0 });
    }

    // Exchange directions: within a group, moving weight between two
    // positions keeps the represented polynomial fixed.
    let mut moves: Vec<SymMatrix> = Vec::new();
    for positions in groups.values() {
        for w in 1..positions.len() {
            let (i0, j0) = positions[0];
            let (i1, j1) = positions[w];
            let mut e = SymMatrix::zeros(nb);
            e.set(i0, j0, if i0 == j0 { 1.0 } else { 0.5 });
            e.set(i1, j1, if i1 == j1 { -1.0 } else { -0.5 });
            moves.push(e);
        }
    }

    // Margin program: max t s.t. G0 + Σ z_k E_k - t I ⪰ 0, solved as
    // min -t in the primal form.
    let mut a = vec![BlockMatrix::dense(SymMatrix::identity(nb).scale(-1.0))];
    a.extend(moves.iter().cloned().map(BlockMatrix::dense));
    let mut c = vec![-1.0];
    c.extend(std::iter::repeat(0.0).take(moves.len()));
    let prob = PrimalSdp::new(c, a, BlockMatrix::dense(g0.scale(-1.0)))?;
    let opts = SolveOptions::default();
    let rep = sdpsolve::solve(&prob, &opts)?;
    if !matches!(rep.status, SolveStatus::Optimal | SolveStatus::NearOptimal) {
        return Err(Error::NumericalTrouble(format!(
            "Gram margin solve stopped with {:?}",
            rep.status
        )));
    }
    let margin = -rep.pobj; // pobj = -t*, so the margin is t*.
    // Boundary calls within 1e-6 are accepted as SOS with clipping; the
    // honest margin is attached either way.
    if margin < -1e-6 {
        return Ok(SosResult::Infeasible { margin });
    }

    let mut gram = g0;
    for (k, e) in moves.iter().enumerate() {
        gram.axpy(rep.x[k + 1], e);
    }
    // Shift by the certified margin when it is positive; clip roundoff.
    let chol = chol_psd(&clip_psd(&gram), 1e-7)
        .map_err(|e| Error::FactorizationFailure(e.to_string()))?;
    let squares: Vec<Vec<f64>> = (0..nb)
        .filter(|&k| chol.lower.col(k).iter().any(|&v| v != 0.0))
        .map(|k| chol.lower.col(k))
        .collect();
    Ok(SosResult::Certificate(SosCertificate {
        basis,
        gram,
        squares,
    }))
}

fn clip_psd(m: &SymMatrix) -> SymMatrix {
    use crate::symcore::{eig_decompose, DEFAULT_TOL};
    let n = m.order();
    match eig_decompose(m, DEFAULT_TOL) {
        Ok(eig) if eig.values[0] < 0.0 => SymMatrix::from_fn(n, |i, j| {
            (0..n)
                .map(|k| eig.values[k].max(0.0) * eig.vectors.get(i, k) * eig.vectors.get(j, k))
                .sum()
        }),
        _ => m.clone(),
    }
}

/// Parses the polynomial text format: one term per line, `coeff e1 ... en`.
pub fn parse_poly_text(text: &str) -> Result<HomPoly> {
    let mut terms: Vec<(Vec<u32>, f64)> = Vec::new();
    let mut nvars = None;
    for (ln0, raw) in text.lines().enumerate() {
        let ln = ln0 + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() < 2 {
            return Err(Error::parse(ln, "expected `coeff e1 ... en`"));
        }
        let c: f64 = f[0].parse().map_err(|_| Error::parse(ln, "bad coefficient"))?;
        let e: Vec<u32> = f[1..]
            .iter()
            .map(|t| t.parse::<u32>().map_err(|_| Error::parse(ln, "bad exponent")))
            .collect::<Result<_>>()?;
        match nvars {
            None => nvars = Some(e.len()),
            Some(n) if n != e.len() => {
                return Err(Error::parse(ln, "inconsistent variable count"));
            }
            _ => {}
        }
        terms.push((e, c));
    }
    let nvars = nvars.ok_or_else(|| Error::parse(1, "empty polynomial file"))?;
    let degree = terms
        .first()
        .map(|(e, _)| e.iter().map(|&x| x as usize).sum())
        .unwrap_or(0);
    HomPoly::new(nvars, degree, terms)
}

pub fn write_poly_text(p: &HomPoly) -> String {
    let mut out = String::new();
    for (e, c) in &p.coeffs {
        let exps: Vec<String> = e.iter().map(|x| x.to_string()).collect();
        out.push_str(&format!("{} {}\n", crate::symcore::fmt_f64(*c), exps.join(" ")));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(nvars: usize, degree: usize, terms: &[(&[u32], f64)]) -> HomPoly {
        HomPoly::new(
            nvars,
            degree,
            terms.iter().map(|(e, c)| (e.to_vec(), *c)),
        )
        .unwrap()
    }

    #[test]
    fn monomial_counts() {
        // n=2, d=2 exact: x1^2, x1 x2, x2^2.
        let b = monomial_basis(2, 2, true).unwrap();
        assert_eq!(b.len(), 3);
        assert!(b.contains(&vec![1, 1]));
        assert_eq!(monomial_basis(1, 3, true).unwrap(), vec![vec![3]]);
        assert_eq!(monomial_basis(3, 2, true).unwrap().len(), 6);
        // "at most" count is C(n+d, d).
        assert_eq!(monomial_basis(2, 2, false).unwrap().len(), 6);
        assert_eq!(monomial_basis(3, 4, false).unwrap().len(), 35);
    }

    #[test]
    fn eval_examples() {
        let p = poly(2, 3, &[(&[2, 1], 1.0)]);
        assert_eq!(p.eval(&[2.0, 3.0]).unwrap(), 12.0);
        let z = HomPoly::zero(2, 4);
        assert_eq!(z.eval(&[1.0, 1.0]).unwrap(), 0.0);
        assert!(p.eval(&[1.0]).is_err());
    }

    #[test]
    fn norm_power_examples() {
        // x1^2 * (x1^2 + x2^2) = x1^4 + x1^2 x2^2.
        let p = poly(2, 2, &[(&[2, 0], 1.0)]);
        let q = p.multiply_norm_power(1);
        assert_eq!(q.degree, 4);
        assert_eq!(q.coeffs.get(&vec![4, 0]), Some(&1.0));
        assert_eq!(q.coeffs.get(&vec![2, 2]), Some(&1.0));
        assert_eq!(q.coeffs.len(), 2);
        // r = 0 is the identity.
        assert_eq!(p.multiply_norm_power(0), p);
        // (x1^4 + x2^4)(x1^2 + x2^2) expands to four terms.
        let p = poly(2, 4, &[(&[4, 0], 1.0), (&[0, 4], 1.0)]);
        let q = p.multiply_norm_power(1);
        assert_eq!(q.coeffs.len(), 4);
        // Spot-check evaluation agreement at a few points.
        for pt in [[0.3, -1.2], [1.0, 1.0], [-0.5, 2.5]] {
            let direct = q.eval(&pt).unwrap();
            let expect = p.eval(&pt).unwrap() * (pt[0] * pt[0] + pt[1] * pt[1]);
            assert!((direct - expect).abs() <= 1e-9 * expect.abs().max(1.0));
        }
    }

    #[test]
    fn decompose_classic_example() {
        // x1^4 + x2^4 + 3 x1^2 x2^2 is SOS; the certificate must expand
        // back to the input coefficients exactly.
        let p = poly(2, 4, &[(&[4, 0], 1.0), (&[0, 4], 1.0), (&[2, 2], 3.0)]);
        let r = sos_decompose(&p).unwrap();
        let cert = r.certificate().expect("should be SOS");
        let back = cert.expand(2, 4);
        for (e, c) in &p.coeffs {
            let got = back.coeffs.get(e).copied().unwrap_or(0.0);
            assert!((got - c).abs() < 1e-6, "coeff {e:?}: {got} vs {c}");
        }
        for (e, c) in &back.coeffs {
            let want = p.coeffs.get(e).copied().unwrap_or(0.0);
            assert!((c - want).abs() < 1e-6, "extra {e:?}: {c}");
        }
    }

    #[test]
    fn lambda_one_gram_is_feasible() {
        // The explicit Gram [[1,1,0],[1,1,0],[0,0,1]] represents the classic
        // example with lambda_12 = 1 and is PSD.
        let g = SymMatrix::new(3, vec![1.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        assert!(crate::symcore::psd_check(&g, 1e-9).unwrap().is_psd);
        // basis order is lexicographic: [0,2], [1,1], [2,0].
        let basis = monomial_basis(2, 2, true).unwrap();
        assert_eq!(basis, vec![vec![0, 2], vec![1, 1], vec![2, 0]]);
    }

    #[test]
    fn decompose_single_square() {
        let p = poly(1, 2, &[(&[2], 1.0)]);
        let r = sos_decompose(&p).unwrap();
        let cert = r.certificate().unwrap();
        assert_eq!(cert.squares.len(), 1);
    }

    #[test]
    fn motzkin_like_rejection() {
        // x1^2 x2^2 (x1^2 + x2^2 - 3) + 1 ... the Motzkin polynomial is
        // nonnegative but not SOS; its homogenized form uses 3 variables.
        let motzkin = poly(
            3,
            6,
            &[
                (&[4, 2, 0], 1.0),
                (&[2, 4, 0], 1.0),
                (&[0, 0, 6], 1.0),
                (&[2, 2, 2], -3.0),
            ],
        );
        let r = sos_decompose(&motzkin).unwrap();
        match r {
            SosResult::Infeasible { margin } => assert!(margin < -1e-4, "margin {margin}"),
            SosResult::Certificate(_) => panic!("Motzkin polynomial is not SOS"),
        }
    }

    #[test]
    fn negative_polynomial_rejected() {
        let p = poly(2, 2, &[(&[2, 0], -1.0), (&[0, 2], -1.0)]);
        assert!(!sos_decompose(&p).unwrap().is_sos());
    }

    #[test]
    fn poly_text_roundtrip() {
        let p = poly(2, 4, &[(&[4, 0], 1.0), (&[2, 2], 3.0), (&[0, 4], 1.0)]);
        let text = write_poly_text(&p);
        let q = parse_poly_text(&text).unwrap();
        assert_eq!(p, q);
        assert!(parse_poly_text("1.0 2 x\n").is_err());
    }
}
