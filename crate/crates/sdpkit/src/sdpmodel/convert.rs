//! Conversions between the primal and dual SDP forms.

use super::{BlockMatrix, DualSdp, PrimalSdp};
use crate::error::{Error, Result};
use crate::linalg;
use crate::symcore::SymMatrix;

/// Lagrangian dual of a primal-form SDP.
///
/// Free primal variables produce equality rows `A_i ⊙ Y = c_i`; nonnegative
/// variables produce `A_i ⊙ Y <= c_i`.
pub fn dualize(p: &PrimalSdp) -> DualSdp {
    DualSdp {
        b: p.b.clone(),
        a: p.a.clone(),
        c: p.c.clone(),
        inequality_rows: p.nonneg_vars.clone(),
    }
}

/// Entry positions `(block, i, j)` with `i <= j` of a block structure.
fn positions(structure: &BlockMatrix) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for (b, blk) in structure.blocks.iter().enumerate() {
        for i in 0..blk.order() {
            for j in i..blk.order() {
                out.push((b, i, j));
            }
        }
    }
    out
}

/// Same positions with the diagonal listed first. Used to pick the free
/// entries in `primal_to_dual_form` deterministically (diagonal entries are
/// preferred as free coordinates).
fn positions_diag_first(structure: &BlockMatrix) -> Vec<(usize, usize, usize)> {
    let mut diag = Vec::new();
    let mut off = Vec::new();
    for (b, blk) in structure.blocks.iter().enumerate() {
        for i in 0..blk.order() {
            for j in i..blk.order() {
                if i == j {
                    diag.push((b, i, j));
                } else {
                    off.push((b, i, j));
                }
            }
        }
    }
    diag.extend(off);
    diag
}

/// Isometric vectorization: off-diagonal entries scaled by sqrt(2) so the
/// Euclidean dot product of vectors equals the trace product of matrices.
fn iso_vec(m: &BlockMatrix, pos: &[(usize, usize, usize)]) -> Vec<f64> {
    let s2 = 2f64.sqrt();
    pos.iter()
        .map(|&(b, i, j)| {
            let v = m.blocks[b].get(i, j);
            if i == j {
                v
            } else {
                s2 * v
            }
        })
        .collect()
}

fn iso_devec(v: &[f64], structure: &BlockMatrix, pos: &[(usize, usize, usize)]) -> BlockMatrix {
    let s2 = 2f64.sqrt();
    let mut out = structure.zeros_like();
    for (&(b, i, j), &val) in pos.iter().zip(v) {
        let e = if i == j { val } else { val / s2 };
        out.blocks[b].set(i, j, e);
    }
    out
}

/// Basis of the orthogonal complement (under the trace product) of the span
/// of `mats` inside the space of symmetric block matrices with the given
/// structure.
pub fn nullspace_basis(mats: &[BlockMatrix], structure: &BlockMatrix) -> Vec<BlockMatrix> {
    let pos = positions(structure);
    let rows: Vec<Vec<f64>> = mats.iter().map(|m| iso_vec(m, &pos)).collect();
    linalg::complement_basis(&rows, pos.len())
        .into_iter()
        .map(|v| iso_devec(&v, structure, &pos))
        .collect()
}

/// Result of rewriting a dual-form SDP in the primal form.
///
/// Feasible points correspond via `Y = particular + Σ x_j basis_j`, and
/// objective values via `dual objective = shift - primal objective`.
/// Inequality rows of the dual are absorbed into extra order-1 slack blocks
/// appended after the original blocks.
#[derive(Debug, Clone)]
pub struct DualToPrimal {
    pub primal: PrimalSdp,
    /// `shift = B ⊙ particular`; `OPT(dual) = shift - OPT(primal)`.
    pub shift: f64,
    pub particular: BlockMatrix,
    pub basis: Vec<BlockMatrix>,
    /// Number of slack blocks appended for inequality rows.
    pub slack_blocks: usize,
}

impl DualToPrimal {
    /// Maps a primal point back to the dual matrix variable (original
    /// blocks only, slack blocks dropped).
    pub fn reconstruct_y(&self, x: &[f64]) -> BlockMatrix {
        let mut y = self.particular.clone();
        for (bj, &xj) in self.basis.iter().zip(x) {
            y.axpy(xj, bj);
        }
        let keep = y.blocks.len() - self.slack_blocks;
        BlockMatrix::new(y.blocks[..keep].to_vec())
    }
}

/// Writes a dual-form SDP in the primal form via the null-space
/// parameterization of the row system, using the minimum-norm particular
/// solution as origin.
///
/// An infeasible row system yields the canonical infeasible primal
/// `min {0 : 0 ⪰ I_1}` instead of an error, with shift 0.
pub fn dual_to_primal_form(d: &DualSdp) -> Result<DualToPrimal> {
    // Absorb inequality rows through nonnegative slacks on extra blocks.
    let slack_blocks = d.inequality_rows.len();
    let (b_ext, rows_ext) = extend_with_slacks(d);

    let pos = positions(&b_ext);
    let vec_rows: Vec<Vec<f64>> = rows_ext.iter().map(|m| iso_vec(m, &pos)).collect();
    let scale = vec_rows
        .iter()
        .map(|r| crate::symcore::norm2(r))
        .fold(crate::symcore::norm2(&d.c), f64::max)
        .max(1.0);
    let (y0_vec, residual) = linalg::min_norm_solve(&vec_rows, &d.c)?;
    if residual > 1e-8 * scale {
        let infeasible = PrimalSdp::new(
            Vec::new(),
            Vec::new(),
            BlockMatrix::dense(SymMatrix::identity(1)),
        )?;
        return Ok(DualToPrimal {
            primal: infeasible,
            shift: 0.0,
            particular: BlockMatrix::dense(SymMatrix::zeros(1)),
            basis: Vec::new(),
            slack_blocks: 0,
        });
    }
    let particular = iso_devec(&y0_vec, &b_ext, &pos);
    let basis: Vec<BlockMatrix> = linalg::complement_basis(&vec_rows, pos.len())
        .into_iter()
        .map(|v| iso_devec(&v, &b_ext, &pos))
        .collect();

    let shift = b_ext.dot(&particular);
    let c: Vec<f64> = basis.iter().map(|aj| -b_ext.dot(aj)).collect();
    let b_primal = particular.scale(-1.0);
    let primal = PrimalSdp::new(c, basis.clone(), b_primal)?;
    Ok(DualToPrimal {
        primal,
        shift,
        particular,
        basis,
        slack_blocks,
    })
}

/// Appends one order-1 slack block per inequality row: `A_i ⊙ Y <= c_i`
/// becomes `A_i ⊙ Y + s_i = c_i` with `s_i >= 0` kept PSD as a block of `Y`.
fn extend_with_slacks(d: &DualSdp) -> (BlockMatrix, Vec<BlockMatrix>) {
    let extra = d.inequality_rows.len();
    let extend = |m: &BlockMatrix, slack_at: Option<usize>| {
        let mut blocks = m.blocks.clone();
        for k in 0..extra {
            let mut blk = SymMatrix::zeros(1);
            if slack_at == Some(k) {
                blk.set(0, 0, 1.0);
            }
            blocks.push(blk);
        }
        BlockMatrix::new(blocks)
    };
    let b_ext = extend(&d.b, None);
    let ineq: Vec<usize> = d.inequality_rows.iter().copied().collect();
    let rows_ext: Vec<BlockMatrix> = d
        .a
        .iter()
        .enumerate()
        .map(|(i, ai)| extend(ai, ineq.iter().position(|&r| r == i)))
        .collect();
    (b_ext, rows_ext)
}

/// Writes a primal-form SDP in the dual form.
///
/// Requires linearly independent constraint matrices. Feasible points
/// correspond bijectively with `primal objective = shift - dual objective`.
/// Nonnegative primal variables are first folded into order-1 LMI blocks.
pub fn primal_to_dual_form(p: &PrimalSdp) -> Result<(DualSdp, f64)> {
    let p = p.fold_nonneg();
    let n = p.num_vars();
    let pos = positions_diag_first(&p.b);

    // Rows of the vectorized system, indexed by matrix position: the
    // position row holds the coefficients of x in that entry of Σ A_i x_i.
    let entry_row = |t: &(usize, usize, usize)| -> Vec<f64> {
        (0..n).map(|v| p.a[v].blocks[t.0].get(t.1, t.2)).collect()
    };

    // Greedy selection of n independent positions, diagonal entries first.
    let mut selected: Vec<usize> = Vec::new();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for (idx, t) in pos.iter().enumerate() {
        if selected.len() == n {
            break;
        }
        let row = entry_row(t);
        let mut w = row.clone();
        for q in &basis {
            let c = crate::symcore::dot(q, &w);
            for (wi, qi) in w.iter_mut().zip(q) {
                *wi -= c * qi;
            }
        }
        let norm = crate::symcore::norm2(&w);
        if norm > 1e-10 * crate::symcore::norm2(&row).max(1.0) {
            for wi in w.iter_mut() {
                *wi /= norm;
            }
            basis.push(w);
            selected.push(idx);
        }
    }
    if selected.len() < n {
        return Err(Error::DependentConstraintMatrices);
    }

    // Invert the selected square block: columns of sel_mat are the selected
    // rows of the vectorized system.
    let sel_rows: Vec<Vec<f64>> = selected.iter().map(|&q| entry_row(&pos[q])).collect();
    let sel_mat = crate::symcore::Mat::from_rows(&sel_rows);
    let lu = crate::linalg::lu_factor(&sel_mat.transpose());
    if lu.is_singular() {
        return Err(Error::DependentConstraintMatrices);
    }
    // w solves sel_matᵀ w = c, i.e. wᵀ [Ā]_R = cᵀ.
    let w = lu.solve(&p.c);

    let b_entry = |t: &(usize, usize, usize)| p.b.blocks[t.0].get(t.1, t.2);
    let shift: f64 = selected
        .iter()
        .zip(&w)
        .map(|(&q, &wk)| wk * b_entry(&pos[q]))
        .sum();

    // Dual objective matrix: max form carries -w on the selected entries.
    let mut b_dual = p.b.zeros_like();
    for (&q, &wk) in selected.iter().zip(&w) {
        add_entry_coeff(&mut b_dual, &pos[q], -wk);
    }

    // One equality row per unselected position q:
    //   Y_q - Σ_k m_k Y_{R_k} = -B_q + Σ_k m_k B_{R_k},   m = [Ā]_R⁻ᵀ ā_q.
    let lu_sel = crate::linalg::lu_factor(&sel_mat);
    let mut rows: Vec<BlockMatrix> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    for (idx, t) in pos.iter().enumerate() {
        if selected.contains(&idx) {
            continue;
        }
        let m = lu_sel.solve(&entry_row(t));
        let mut a_row = p.b.zeros_like();
        add_entry_coeff(&mut a_row, t, 1.0);
        let mut c_row = -b_entry(t);
        for (k, &q) in selected.iter().enumerate() {
            if m[k] != 0.0 {
                add_entry_coeff(&mut a_row, &pos[q], -m[k]);
                c_row += m[k] * b_entry(&pos[q]);
            }
        }
        // Normalize the leading coefficient (diagonal-first order) to +1.
        let lead = pos
            .iter()
            .map(|u| entry_coeff(&a_row, u))
            .find(|v| v.abs() > 1e-12)
            .unwrap_or(1.0);
        rows.push(a_row.scale(1.0 / lead));
        rhs.push(c_row / lead);
    }

    Ok((DualSdp::new(b_dual, rows, rhs)?, shift))
}

/// Adds `coeff * (per-entry functional at position t)` to a symmetric
/// matrix: a diagonal position contributes `coeff`, an off-diagonal
/// position contributes `coeff/2` to both mirrored entries so that the
/// trace product recovers `coeff * Y_t`.
fn add_entry_coeff(m: &mut BlockMatrix, t: &(usize, usize, usize), coeff: f64) {
    let &(b, i, j) = t;
    let blk = &mut m.blocks[b];
    if i == j {
        blk.set(i, j, blk.get(i, j) + coeff);
    } else {
        blk.set(i, j, blk.get(i, j) + 0.5 * coeff);
    }
}

fn entry_coeff(m: &BlockMatrix, t: &(usize, usize, usize)) -> f64 {
    let &(b, i, j) = t;
    let v = m.blocks[b].get(i, j);
    if i == j {
        v
    } else {
        2.0 * v
    }
}
