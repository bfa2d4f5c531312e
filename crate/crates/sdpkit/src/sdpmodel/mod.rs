//! Primal- and dual-form SDPs over block-diagonal symmetric matrices.
//!
//! The primal form is `min cᵀx s.t. Σ A_i x_i ⪰ B` (variables may be
//! restricted to be nonnegative), the dual form is `max B ⊙ Y s.t.
//! A_i ⊙ Y = c_i, Y ⪰ 0` (rows listed in `inequality_rows` use `≤`).

mod convert;
mod sdpa;

pub use convert::{dual_to_primal_form, dualize, nullspace_basis, primal_to_dual_form, DualToPrimal};
pub use sdpa::{parse_sdpa, write_sdpa};

use crate::error::{Error, Result};
use crate::symcore::{psd_check, SymMatrix};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Block-diagonal symmetric matrix; a block of order 1 encodes a scalar
/// (linear) constraint row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockMatrix {
    pub blocks: Vec<SymMatrix>,
}

impl BlockMatrix {
    pub fn new(blocks: Vec<SymMatrix>) -> Self {
        BlockMatrix { blocks }
    }

    /// Single-block matrix.
    pub fn dense(m: SymMatrix) -> Self {
        BlockMatrix { blocks: vec![m] }
    }

    pub fn zeros_like(&self) -> Self {
        BlockMatrix {
            blocks: self.blocks.iter().map(|b| SymMatrix::zeros(b.order())).collect(),
        }
    }

    pub fn identity_like(&self) -> Self {
        BlockMatrix {
            blocks: self.blocks.iter().map(|b| SymMatrix::identity(b.order())).collect(),
        }
    }

    /// Sum of block orders.
    pub fn total_order(&self) -> usize {
        self.blocks.iter().map(|b| b.order()).sum()
    }

    pub fn same_structure(&self, other: &BlockMatrix) -> bool {
        self.blocks.len() == other.blocks.len()
            && self
                .blocks
                .iter()
                .zip(&other.blocks)
                .all(|(a, b)| a.order() == b.order())
    }

    /// Trace inner product summed over blocks.
    pub fn dot(&self, other: &BlockMatrix) -> f64 {
        debug_assert!(self.same_structure(other));
        self.blocks.iter().zip(&other.blocks).map(|(a, b)| a.dot(b)).sum()
    }

    pub fn add(&self, other: &BlockMatrix) -> BlockMatrix {
        BlockMatrix {
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn sub(&self, other: &BlockMatrix) -> BlockMatrix {
        BlockMatrix {
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a.sub(b)).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> BlockMatrix {
        BlockMatrix {
            blocks: self.blocks.iter().map(|b| b.scale(s)).collect(),
        }
    }

    pub fn axpy(&mut self, s: f64, other: &BlockMatrix) {
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            a.axpy(s, b);
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks.iter().fold(0.0, |m, b| m.max(b.max_abs()))
    }

    /// Frobenius norm over all blocks.
    pub fn norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.entries().iter().map(|x| x * x).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }

    /// Smallest eigenvalue over all blocks.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let mut lo = f64::INFINITY;
        for b in &self.blocks {
            lo = lo.min(psd_check(b, 0.0)?.min_eigenvalue);
        }
        Ok(lo)
    }
}

/// Primal-form SDP: `min cᵀx s.t. Σ A_i x_i ⪰ B`, optionally with some
/// variables constrained nonnegative.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PrimalSdp {
    pub c: Vec<f64>,
    pub a: Vec<BlockMatrix>,
    pub b: BlockMatrix,
    /// Indices (0-based) of variables constrained to `x_i >= 0`.
    pub nonneg_vars: BTreeSet<usize>,
}

impl PrimalSdp {
    pub fn new(c: Vec<f64>, a: Vec<BlockMatrix>, b: BlockMatrix) -> Result<Self> {
        let p = PrimalSdp {
            c,
            a,
            b,
            nonneg_vars: BTreeSet::new(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_nonneg(mut self, vars: impl IntoIterator<Item = usize>) -> Self {
        self.nonneg_vars.extend(vars);
        self
    }

    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    fn validate(&self) -> Result<()> {
        if self.c.len() != self.a.len() {
            return Err(Error::VariableCountMismatch(format!(
                "{} objective coefficients vs {} constraint matrices",
                self.c.len(),
                self.a.len()
            )));
        }
        for m in &self.a {
            if !m.same_structure(&self.b) {
                return Err(Error::DimensionMismatch(
                    "constraint matrices must share one block structure".into(),
                ));
            }
        }
        Ok(())
    }

    /// Slack matrix `Σ A_i x_i - B` at the point `x`.
    pub fn slack(&self, x: &[f64]) -> BlockMatrix {
        let mut s = self.b.scale(-1.0);
        for (ai, &xi) in self.a.iter().zip(x) {
            s.axpy(xi, ai);
        }
        s
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        crate::symcore::dot(&self.c, x)
    }

    /// Rewrites the `x_i >= 0` restrictions as extra order-1 diagonal blocks
    /// of the LMI, leaving every variable free.
    pub fn fold_nonneg(&self) -> PrimalSdp {
        if self.nonneg_vars.is_empty() {
            return self.clone();
        }
        let extra: Vec<usize> = self.nonneg_vars.iter().copied().collect();
        let mut a = Vec::with_capacity(self.a.len());
        for (i, ai) in self.a.iter().enumerate() {
            let mut blocks = ai.blocks.clone();
            for &v in &extra {
                let mut blk = SymMatrix::zeros(1);
                if v == i {
                    blk.set(0, 0, 1.0);
                }
                blocks.push(blk);
            }
            a.push(BlockMatrix::new(blocks));
        }
        let mut b_blocks = self.b.blocks.clone();
        for _ in &extra {
            b_blocks.push(SymMatrix::zeros(1));
        }
        PrimalSdp {
            c: self.c.clone(),
            a,
            b: BlockMatrix::new(b_blocks),
            nonneg_vars: BTreeSet::new(),
        }
    }
}

/// Dual-form SDP: `max B ⊙ Y s.t. A_i ⊙ Y = c_i, Y ⪰ 0`; rows listed in
/// `inequality_rows` are relaxed to `A_i ⊙ Y <= c_i`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DualSdp {
    pub b: BlockMatrix,
    pub a: Vec<BlockMatrix>,
    pub c: Vec<f64>,
    pub inequality_rows: BTreeSet<usize>,
}

impl DualSdp {
    pub fn new(b: BlockMatrix, a: Vec<BlockMatrix>, c: Vec<f64>) -> Result<Self> {
        if a.len() != c.len() {
            return Err(Error::VariableCountMismatch(format!(
                "{} row matrices vs {} right-hand sides",
                a.len(),
                c.len()
            )));
        }
        for m in &a {
            if !m.same_structure(&b) {
                return Err(Error::DimensionMismatch(
                    "row matrices must share the objective's block structure".into(),
                ));
            }
        }
        Ok(DualSdp {
            b,
            a,
            c,
            inequality_rows: BTreeSet::new(),
        })
    }

    pub fn with_inequalities(mut self, rows: impl IntoIterator<Item = usize>) -> Self {
        self.inequality_rows.extend(rows);
        self
    }

    pub fn objective(&self, y: &BlockMatrix) -> f64 {
        self.b.dot(y)
    }

    /// Largest violation of the rows at `y` (equality residual, one-sided
    /// for inequality rows).
    pub fn row_violation(&self, y: &BlockMatrix) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, (ai, &ci)) in self.a.iter().zip(&self.c).enumerate() {
            let r = ai.dot(y) - ci;
            let v = if self.inequality_rows.contains(&i) { r.max(0.0) } else { r.abs() };
            worst = worst.max(v);
        }
        worst
    }
}

/// A (possibly partial) primal/dual solution pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SdpSolution {
    pub x: Option<Vec<f64>>,
    pub y: Option<BlockMatrix>,
    pub pobj: Option<f64>,
    pub dobj: Option<f64>,
}

/// Stacks several `(A-list, B)` constraints into the block-diagonal pieces
/// of a single linear matrix inequality.
pub fn aggregate(constraints: &[(Vec<SymMatrix>, SymMatrix)]) -> Result<(Vec<BlockMatrix>, BlockMatrix)> {
    if constraints.is_empty() {
        return Err(Error::VariableCountMismatch("no constraints to aggregate".into()));
    }
    let nvars = constraints[0].0.len();
    for (k, (a, _)) in constraints.iter().enumerate() {
        if a.len() != nvars {
            return Err(Error::VariableCountMismatch(format!(
                "constraint {k} has {} variables, expected {nvars}",
                a.len()
            )));
        }
    }
    let b = BlockMatrix::new(constraints.iter().map(|(_, bk)| bk.clone()).collect());
    let a = (0..nvars)
        .map(|i| BlockMatrix::new(constraints.iter().map(|(ak, _)| ak[i].clone()).collect()))
        .collect();
    Ok((a, b))
}

/// Feasibility tolerance used by [`duality_gap`].
const GAP_FEAS_TOL: f64 = 1e-7;

/// Duality gap via the complementary-slackness identity
/// `pobj - dobj = Y ⊙ (Σ A_i x_i - B)`.
///
/// Both points must be feasible within `1e-7` (relative to problem scale).
pub fn duality_gap(p: &PrimalSdp, x: &[f64], y: &BlockMatrix) -> Result<f64> {
    if x.len() != p.num_vars() {
        return Err(Error::DimensionMismatch("x length".into()));
    }
    let scale = 1.0 + p.b.norm().max(crate::symcore::norm2(&p.c));
    let slack = p.slack(x);
    let tol = GAP_FEAS_TOL * scale;
    if slack.min_eigenvalue()? < -tol {
        return Err(Error::InfeasibleArgument("x is not primal-feasible".into()));
    }
    for &v in &p.nonneg_vars {
        if x[v] < -tol {
            return Err(Error::InfeasibleArgument(format!("x[{v}] violates nonnegativity")));
        }
    }
    if y.min_eigenvalue()? < -tol {
        return Err(Error::InfeasibleArgument("Y is not positive semidefinite".into()));
    }
    let d = dualize(p);
    if d.row_violation(y) > tol {
        return Err(Error::InfeasibleArgument("Y violates the dual rows".into()));
    }
    Ok(y.dot(&slack))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_block(v: f64) -> BlockMatrix {
        let mut m = SymMatrix::zeros(1);
        m.set(0, 0, v);
        BlockMatrix::dense(m)
    }

    #[test]
    fn aggregate_scalar_lp() {
        // x >= 1 and -x >= -3 as one two-block LMI.
        let a1 = vec![SymMatrix::diag(&[1.0])];
        let a2 = vec![SymMatrix::diag(&[-1.0])];
        let (a, b) = aggregate(&[
            (a1, SymMatrix::diag(&[1.0])),
            (a2, SymMatrix::diag(&[-3.0])),
        ])
        .unwrap();
        assert_eq!(a.len(), 1);
        assert_eq!(a[0].blocks.len(), 2);
        assert_eq!(b.total_order(), 2);
        let p = PrimalSdp::new(vec![1.0], a, b).unwrap();
        // x = 2 is feasible, x = 0 is not.
        assert!(p.slack(&[2.0]).min_eigenvalue().unwrap() > 0.0);
        assert!(p.slack(&[0.0]).min_eigenvalue().unwrap() < 0.0);
    }

    #[test]
    fn aggregate_rejects_mismatch() {
        let c1 = (vec![SymMatrix::diag(&[1.0])], SymMatrix::diag(&[1.0]));
        let c2 = (
            vec![SymMatrix::diag(&[1.0]), SymMatrix::diag(&[2.0])],
            SymMatrix::diag(&[1.0]),
        );
        assert!(matches!(
            aggregate(&[c1, c2]),
            Err(Error::VariableCountMismatch(_))
        ));
    }

    #[test]
    fn duality_gap_trivial_lp() {
        // min x s.t. x >= 1; dual max y s.t. y = 1, y >= 0.
        let p = PrimalSdp::new(
            vec![1.0],
            vec![scalar_block(1.0)],
            scalar_block(1.0),
        )
        .unwrap();
        let y = scalar_block(1.0);
        let gap = duality_gap(&p, &[1.0], &y).unwrap();
        assert!(gap.abs() < 1e-12);
        assert!(duality_gap(&p, &[0.5], &y).is_err());
    }
}
