//! Dense primal-dual interior-point solver for desk-scale SDPs.
//!
//! Solves the primal form `min cᵀx s.t. Σ A_i x_i ⪰ B` (block diagonal)
//! together with its dual `max B ⊙ Y s.t. A_i ⊙ Y = c_i, Y ⪰ 0` by path
//! following with an HKM-style direction. The slack `S = Σ A_i x_i - B` is
//! kept exactly consistent with `x`; dual row residuals are driven to zero
//! by the Newton step (infeasible start on the dual side).

use crate::error::{Error, Result};
use crate::sdpmodel::{dual_to_primal_form, BlockMatrix, DualSdp, PrimalSdp, SdpSolution};
use crate::symcore::{chol_pd, eig_decompose, Mat, SymMatrix, DEFAULT_TOL};
use serde::{Deserialize, Serialize};

/// Options for [`solve`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Duality-gap target (absolute).
    pub tol: f64,
    pub max_iter: usize,
    /// Feasibility target for the dual rows and reported slacks.
    pub feas_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-7,
            max_iter: 200,
            feas_tol: 1e-8,
        }
    }
}

/// Outcome classification of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    /// Gap below `tol` and dual rows satisfied within `feas_tol`.
    Optimal,
    /// Close to the targets (within a factor of 1000) but stalled.
    NearOptimal,
    /// Phase-1 could not produce a strictly feasible point.
    PrimalInfeasibleSuspected,
    /// Primal objective appears unbounded below (dual infeasible).
    DualInfeasibleSuspected,
    IterationLimit,
}

/// Solver outcome: status, final iterates and objective pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub x: Vec<f64>,
    pub y: BlockMatrix,
    pub pobj: f64,
    pub dobj: f64,
    pub gap: f64,
    pub iters: usize,
    /// Gap after each iteration (diagnostic, not serialized).
    #[serde(skip)]
    pub gap_history: Vec<f64>,
}

impl SolveReport {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    pub fn solution(&self) -> SdpSolution {
        SdpSolution {
            x: Some(self.x.clone()),
            y: Some(self.y.clone()),
            pobj: Some(self.pobj),
            dobj: Some(self.dobj),
        }
    }
}

/// Fraction-to-boundary step damping.
const STEP_FRACTION: f64 = 0.95;
/// Ceiling for the adaptive centering parameter.
const SIGMA_MAX: f64 = 0.9;
/// Iterate norms beyond this trigger the divergence heuristics.
const DIVERGE_NORM: f64 = 1e8;

/// Sparse view of one constraint matrix: upper-triangle triplets per block.
struct Triplets {
    blocks: Vec<Vec<(usize, usize, f64)>>,
}

impl Triplets {
    fn of(m: &BlockMatrix) -> Self {
        Triplets {
            blocks: m
                .blocks
                .iter()
                .map(|blk| {
                    let mut t = Vec::new();
                    for i in 0..blk.order() {
                        for j in i..blk.order() {
                            let v = blk.get(i, j);
                            if v != 0.0 {
                                t.push((i, j, v));
                            }
                        }
                    }
                    t
                })
                .collect(),
        }
    }

    /// Trace product against a dense block matrix.
    fn dot(&self, dense: &BlockMatrix) -> f64 {
        let mut s = 0.0;
        for (t, d) in self.blocks.iter().zip(&dense.blocks) {
            for &(i, j, v) in t {
                s += if i == j { v * d.get(i, i) } else { 2.0 * v * d.get(i, j) };
            }
        }
        s
    }
}

/// Solves a primal-form SDP.
///
/// Nonnegative variables are folded into extra order-1 LMI blocks first;
/// the reported `y` is restricted to the original block structure (its
/// dropped slack entries are exactly the duals of the sign restrictions).
pub fn solve(p: &PrimalSdp, opts: &SolveOptions) -> Result<SolveReport> {
    let orig_blocks = p.b.blocks.len();
    let folded = p.fold_nonneg();
    let mut report = solve_folded(&folded, opts, None)?;
    report.y = BlockMatrix::new(report.y.blocks[..orig_blocks].to_vec());
    Ok(report)
}

/// Phase-1: minimizes `t` such that `Σ A_i x_i + t I - B ⪰ 0`, stopping as
/// soon as `t` is safely negative.
///
/// Returns `(x0, margin)`: a negative margin certifies that `x0` is strictly
/// feasible with slack eigenvalues above `|margin|/2`; a margin that stays
/// nonnegative (in particular above `feas_tol`) means no interior point was
/// found and primal infeasibility is suspected.
pub fn phase1(p: &PrimalSdp) -> Result<(Vec<f64>, f64)> {
    let folded = p.fold_nonneg();
    phase1_folded(&folded, &SolveOptions::default())
}

fn phase1_folded(p: &PrimalSdp, opts: &SolveOptions) -> Result<(Vec<f64>, f64)> {
    let n = p.num_vars();
    let mut a = p.a.clone();
    a.push(p.b.identity_like());
    let mut c = vec![0.0; n];
    c.push(1.0);
    let aug = PrimalSdp::new(c, a, p.b.clone())?;

    let scale = 1.0 + p.b.max_abs();
    let t0 = p.b.norm() + 1.0;
    let mut x0 = vec![0.0; n + 1];
    x0[n] = t0;
    let stop_at = -0.05 * scale;
    let report = solve_folded(&aug, opts, Some((x0, stop_at)))?;
    let t = report.x[n];
    Ok((report.x[..n].to_vec(), t))
}

/// Core path-following loop on a problem with free variables only.
///
/// `start` optionally provides a strictly feasible point together with an
/// early-exit threshold on the objective (used by phase-1).
fn solve_folded(
    p: &PrimalSdp,
    opts: &SolveOptions,
    start: Option<(Vec<f64>, f64)>,
) -> Result<SolveReport> {
    debug_assert!(p.nonneg_vars.is_empty());
    let n = p.num_vars();
    let total_order = p.b.total_order();
    let scale = 1.0 + p.b.max_abs();

    if n == 0 {
        // Fully determined: feasibility of -B decides everything.
        let feasible = p.b.scale(-1.0).min_eigenvalue()? >= -opts.feas_tol * scale;
        return Ok(SolveReport {
            status: if feasible {
                SolveStatus::Optimal
            } else {
                SolveStatus::PrimalInfeasibleSuspected
            },
            x: Vec::new(),
            y: p.b.zeros_like(),
            pobj: 0.0,
            dobj: 0.0,
            gap: 0.0,
            iters: 0,
            gap_history: Vec::new(),
        });
    }

    let (mut x, early_exit) = match start {
        Some((x0, stop)) => (x0, Some(stop)),
        None => {
            let margin = p.slack(&vec![0.0; n]).min_eigenvalue()?;
            if margin > 1e-4 * scale {
                (vec![0.0; n], None)
            } else {
                let (x0, t) = phase1_folded(p, opts)?;
                if t >= -opts.feas_tol * scale {
                    return Ok(SolveReport {
                        status: SolveStatus::PrimalInfeasibleSuspected,
                        x: x0,
                        y: p.b.zeros_like(),
                        pobj: f64::INFINITY,
                        dobj: t,
                        gap: f64::INFINITY,
                        iters: 0,
                        gap_history: Vec::new(),
                    });
                }
                (x0, None)
            }
        }
    };

    let trip: Vec<Triplets> = p.a.iter().map(Triplets::of).collect();
    let mut s = p.slack(&x);
    let xi = 1.0 + crate::symcore::norm2(&p.c);
    let mut y = p.b.identity_like().scale(xi);

    let mut status = SolveStatus::IterationLimit;
    let mut iters = 0;
    let mut gap_history = Vec::new();
    let mut stalls = 0usize;

    for iter in 0..opts.max_iter {
        iters = iter + 1;

        let s_inv = match block_inverses(&s) {
            Some(v) => v,
            None => {
                status = SolveStatus::NearOptimal;
                break;
            }
        };
        let mu = s.dot(&y) / total_order as f64;

        // Normal matrix M_ij = A_i ⊙ sym(S⁻¹ A_j Y); the right-hand side
        // targets exact dual-row feasibility after a full step and depends
        // on the centering parameter only through sigma * mu.
        let t_syms: Vec<BlockMatrix> = (0..n).map(|j| sym_sinv_a_y(&trip[j], &s_inv, &y)).collect();
        let mut m = SymMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                m.set(i, j, trip[i].dot(&t_syms[j]));
            }
        }
        let m_chol = match normal_factor(&m) {
            Some(v) => v,
            None => {
                status = SolveStatus::NearOptimal;
                break;
            }
        };
        let s_inv_block = BlockMatrix::new(s_inv.clone());
        let v_cent: Vec<f64> = (0..n).map(|i| trip[i].dot(&s_inv_block)).collect();

        // Newton direction for the target S dY + dS Y = sigma mu I - SY - C,
        // where C is an optional second-order correction term.
        let direction = |sigma_mu: f64,
                         corr: Option<&[SymMatrix]>|
         -> (Vec<f64>, BlockMatrix, BlockMatrix) {
            let rhs: Vec<f64> = (0..n)
                .map(|i| {
                    let mut r = sigma_mu * v_cent[i] - p.c[i];
                    if let Some(cs) = corr {
                        r -= trip[i]
                            .blocks
                            .iter()
                            .zip(cs)
                            .map(|(tb, cb)| {
                                tb.iter()
                                    .map(|&(a, b, v)| {
                                        if a == b { v * cb.get(a, a) } else { 2.0 * v * cb.get(a, b) }
                                    })
                                    .sum::<f64>()
                            })
                            .sum::<f64>();
                    }
                    r
                })
                .collect();
            let dx = crate::symcore::chol_solve(&m_chol.lower, &rhs);
            let mut ds = p.b.zeros_like();
            for (j, t) in trip.iter().enumerate() {
                if dx[j] != 0.0 {
                    for (bi, tb) in t.blocks.iter().enumerate() {
                        let blk = &mut ds.blocks[bi];
                        for &(a, b, v) in tb {
                            blk.set(a, b, blk.get(a, b) + dx[j] * v);
                        }
                    }
                }
            }
            let mut dy = p.b.zeros_like();
            for (bi, si) in s_inv.iter().enumerate() {
                let k = si.order();
                let ds_y = ds.blocks[bi].mul_mat(&y.blocks[bi]);
                let si_ds_y = si.to_mat().mul(&ds_y);
                let dyb = &mut dy.blocks[bi];
                for a in 0..k {
                    for b in a..k {
                        let mut v = sigma_mu * si.get(a, b)
                            - y.blocks[bi].get(a, b)
                            - 0.5 * (si_ds_y.get(a, b) + si_ds_y.get(b, a));
                        if let Some(cs) = corr {
                            v -= cs[bi].get(a, b);
                        }
                        dyb.set(a, b, v);
                    }
                }
            }
            (dx, ds, dy)
        };

        // Predictor: measure how far the pure affine direction gets, then
        // center adaptively; degenerate problems where the affine step is
        // long get an aggressive mu reduction.
        let (_, ds_aff, dy_aff) = direction(0.0, None);
        let ap_aff = (STEP_FRACTION * max_step(&s, &ds_aff)).min(1.0);
        let ad_aff = (STEP_FRACTION * max_step(&y, &dy_aff)).min(1.0);
        let mut s_aff = s.clone();
        s_aff.axpy(ap_aff, &ds_aff);
        let mut y_aff = y.clone();
        y_aff.axpy(ad_aff, &dy_aff);
        let mu_aff = (s_aff.dot(&y_aff) / total_order as f64).max(0.0);
        let mut sigma = ((mu_aff / mu).powi(3)).clamp(1e-6, SIGMA_MAX);

        // While the dual rows are violated, keep enough centering that
        // complementarity cannot run ahead of feasibility.
        let mut row_res_pre: f64 = 0.0;
        for (t, &ci) in trip.iter().zip(&p.c) {
            row_res_pre = row_res_pre.max((t.dot(&y) - ci).abs());
        }
        let dual_infeasible = row_res_pre > opts.feas_tol.max(opts.tol);
        if dual_infeasible {
            sigma = sigma.max(0.2);
        }

        // Second-order correction sym(S⁻¹ dS_aff dY_aff) per block.
        let corr: Vec<SymMatrix> = s_inv
            .iter()
            .enumerate()
            .map(|(bi, si)| {
                let prod = ds_aff.blocks[bi].mul_mat(&dy_aff.blocks[bi]);
                si.to_mat().mul(&prod).into_sym()
            })
            .collect();

        let (dx, ds, dy) = direction(sigma * mu, Some(&corr));

        let mut alpha_p = (STEP_FRACTION * max_step(&s, &ds)).min(1.0);
        let mut alpha_d = (STEP_FRACTION * max_step(&y, &dy)).min(1.0);
        if dual_infeasible {
            // Common step length preserves the infeasible-path neighborhood
            // (residuals shrink at least as fast as complementarity).
            let a = alpha_p.min(alpha_d);
            alpha_p = a;
            alpha_d = a;
        }

        // Keep the early-exit landing point moderate: stop just past the
        // threshold instead of following an unbounded Newton ray.
        if let Some(stop) = early_exit {
            let pobj_now = p.objective(&x);
            let ddir = crate::symcore::dot(&p.c, &dx);
            if ddir < 0.0 && pobj_now + alpha_p * ddir < 2.0 * stop {
                alpha_p = (2.0 * stop - pobj_now) / ddir;
            }
        }
        // Trust-region style cap against pathological Newton blowups; true
        // divergence is still caught by the norm heuristics over iterations.
        let dxnorm = dx.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let xnorm_now = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if dxnorm * alpha_p > 1e4 * (1.0 + xnorm_now) {
            alpha_p = 1e4 * (1.0 + xnorm_now) / dxnorm;
        }

        for (xj, dj) in x.iter_mut().zip(&dx) {
            *xj += alpha_p * dj;
        }
        s = p.slack(&x);
        y.axpy(alpha_d, &dy);

        let pobj = p.objective(&x);
        let dobj = p.b.dot(&y);
        let gap = pobj - dobj;
        gap_history.push(gap);

        let mut row_res: f64 = 0.0;
        for (t, &ci) in trip.iter().zip(&p.c) {
            row_res = row_res.max((t.dot(&y) - ci).abs());
        }

        if std::env::var_os("SDPKIT_DEBUG").is_some() {
            eprintln!(
                "it {iter} mu {mu:.3e} sigma {sigma:.3e} ap {alpha_p:.3e} ad {alpha_d:.3e} pobj {pobj:.6e} dobj {dobj:.6e} res {row_res:.3e} ymin {:.3e} smin {:.3e}",
                y.min_eigenvalue().unwrap_or(f64::NAN),
                s.min_eigenvalue().unwrap_or(f64::NAN),
            );
        }

        if let Some(stop) = early_exit {
            if pobj <= stop {
                status = SolveStatus::Optimal;
                break;
            }
        }
        // Complementarity is checked alongside the gap: with a slightly
        // infeasible Y the measured gap can undershoot true suboptimality
        // by residual * |x|.
        let comp = s.dot(&y);
        if gap.abs() <= opts.tol && comp <= opts.tol && row_res <= opts.feas_tol.max(opts.tol) {
            status = SolveStatus::Optimal;
            break;
        }
        let xnorm = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if xnorm > DIVERGE_NORM || pobj < -DIVERGE_NORM {
            status = SolveStatus::DualInfeasibleSuspected;
            break;
        }
        if y.max_abs() > DIVERGE_NORM || dobj > DIVERGE_NORM {
            status = SolveStatus::PrimalInfeasibleSuspected;
            break;
        }
        if alpha_p < 1e-8 && alpha_d < 1e-8 {
            stalls += 1;
            if stalls >= 3 {
                break;
            }
        } else {
            stalls = 0;
        }
    }

    let pobj = p.objective(&x);
    let dobj = p.b.dot(&y);
    let gap = pobj - dobj;
    if status == SolveStatus::IterationLimit {
        let mut row_res: f64 = 0.0;
        for (t, &ci) in trip.iter().zip(&p.c) {
            row_res = row_res.max((t.dot(&y) - ci).abs());
        }
        if gap.abs() <= 1e3 * opts.tol && row_res <= 1e3 * opts.feas_tol.max(opts.tol) {
            status = SolveStatus::NearOptimal;
        }
    }
    Ok(SolveReport {
        status,
        x,
        y,
        pobj,
        dobj,
        gap,
        iters,
        gap_history,
    })
}

/// Per-block inverse of a strictly positive definite block matrix.
fn block_inverses(s: &BlockMatrix) -> Option<Vec<SymMatrix>> {
    let mut out = Vec::with_capacity(s.blocks.len());
    for blk in &s.blocks {
        let chol = chol_pd(blk).ok()?;
        let k = blk.order();
        let mut cols: Vec<Vec<f64>> = Vec::with_capacity(k);
        for col in 0..k {
            let mut e = vec![0.0; k];
            e[col] = 1.0;
            cols.push(crate::symcore::chol_solve(&chol.lower, &e));
        }
        out.push(SymMatrix::from_fn(k, |i, j| 0.5 * (cols[j][i] + cols[i][j])));
    }
    Some(out)
}

/// `sym(S⁻¹ A Y)` per block, exploiting sparsity of `A`.
fn sym_sinv_a_y(a: &Triplets, s_inv: &[SymMatrix], y: &BlockMatrix) -> BlockMatrix {
    let mut out = Vec::with_capacity(s_inv.len());
    for (bi, tb) in a.blocks.iter().enumerate() {
        let si = &s_inv[bi];
        let yb = &y.blocks[bi];
        let k = si.order();
        let mut t = Mat::zeros(k, k);
        // A Y has nonzero rows only where A has entries; accumulate
        // S⁻¹[:, r] ⊗ (A Y)[r, :] over those rows.
        let mut rows: Vec<usize> = Vec::new();
        for &(i, j, _) in tb {
            if !rows.contains(&i) {
                rows.push(i);
            }
            if !rows.contains(&j) {
                rows.push(j);
            }
        }
        for &r in &rows {
            let mut ay_row = vec![0.0; k];
            for &(i, j, v) in tb {
                if i == r {
                    for (c, slot) in ay_row.iter_mut().enumerate() {
                        *slot += v * yb.get(j, c);
                    }
                }
                if j == r && i != j {
                    for (c, slot) in ay_row.iter_mut().enumerate() {
                        *slot += v * yb.get(i, c);
                    }
                }
            }
            for p in 0..k {
                let spr = si.get(p, r);
                if spr == 0.0 {
                    continue;
                }
                for (q, &ayq) in ay_row.iter().enumerate() {
                    let val = t.get(p, q) + spr * ayq;
                    t.set(p, q, val);
                }
            }
        }
        out.push(t.into_sym());
    }
    BlockMatrix::new(out)
}

/// Largest `alpha` with `P + alpha D ⪰ 0` given `P ≻ 0` (capped far above 1).
fn max_step(p: &BlockMatrix, d: &BlockMatrix) -> f64 {
    let mut alpha: f64 = 1e6;
    for (pb, db) in p.blocks.iter().zip(&d.blocks) {
        let k = pb.order();
        let chol = match chol_pd(pb) {
            Ok(c) => c,
            Err(_) => return 0.0,
        };
        // T = L⁻¹ D L⁻ᵀ: forward-substitute columns, transpose, repeat.
        let mut t = Mat::zeros(k, k);
        for col in 0..k {
            let rhs: Vec<f64> = (0..k).map(|r| db.get(r, col)).collect();
            let sol = forward_sub(&chol.lower, &rhs);
            for r in 0..k {
                t.set(r, col, sol[r]);
            }
        }
        let tt = t.transpose();
        let mut t2 = Mat::zeros(k, k);
        for col in 0..k {
            let rhs: Vec<f64> = (0..k).map(|r| tt.get(r, col)).collect();
            let sol = forward_sub(&chol.lower, &rhs);
            for r in 0..k {
                t2.set(r, col, sol[r]);
            }
        }
        match eig_decompose(&t2.into_sym(), DEFAULT_TOL) {
            Ok(eig) => {
                let lmin = eig.values[0];
                if lmin < 0.0 {
                    alpha = alpha.min(-1.0 / lmin);
                }
            }
            Err(_) => return 0.0,
        }
    }
    alpha
}

fn forward_sub(l: &Mat, b: &[f64]) -> Vec<f64> {
    let n = l.rows;
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            y[i] -= l.get(i, k) * y[k];
        }
        y[i] /= l.get(i, i);
    }
    y
}

/// Factors the (positive definite) normal matrix, with a ridge fallback
/// when the factorization hits roundoff.
fn normal_factor(m: &SymMatrix) -> Option<crate::symcore::CholFactor> {
    let n = m.order();
    if let Ok(chol) = chol_pd(m) {
        return Some(chol);
    }
    let ridge = 1e-12 * (1.0 + m.trace().abs() / n as f64);
    let mut m2 = m.clone();
    for i in 0..n {
        m2.set(i, i, m2.get(i, i) + ridge);
    }
    chol_pd(&m2).ok()
}

/// Outcome of solving a dual-form SDP through the primal-form conversion.
#[derive(Debug, Clone)]
pub struct DualSolve {
    /// Status of the converted primal-form solve.
    pub status: SolveStatus,
    /// Optimal value of the dual-form problem (`shift - pobj`).
    pub objective: f64,
    /// Reconstructed dual matrix variable.
    pub y: BlockMatrix,
    /// Full report of the converted solve.
    pub report: SolveReport,
}

/// Solves a dual-form SDP by rewriting it in the primal form.
pub fn solve_dual(d: &DualSdp, opts: &SolveOptions) -> Result<DualSolve> {
    let conv = dual_to_primal_form(d)?;
    let report = solve(&conv.primal, opts)?;
    let y = if conv.particular.same_structure(&conv.primal.b) {
        conv.reconstruct_y(&report.x)
    } else {
        // Canonical infeasible conversion carries no reconstruction data.
        d.b.zeros_like()
    };
    let objective = conv.shift - report.pobj;
    Ok(DualSolve {
        status: report.status,
        objective,
        y,
        report,
    })
}

/// Cap for the eigenvalue-via-SDP helpers.
const EIGEN_SDP_MAX_ORDER: usize = 40;

/// Smallest eigenvalue through the SDP `max{t : X - t I ⪰ 0}`.
pub fn min_eigen_via_sdp(x: &SymMatrix) -> Result<f64> {
    if x.order() > EIGEN_SDP_MAX_ORDER {
        return Err(Error::UnsupportedSize(format!(
            "order {} exceeds {EIGEN_SDP_MAX_ORDER}",
            x.order()
        )));
    }
    let p = PrimalSdp::new(
        vec![-1.0],
        vec![BlockMatrix::dense(SymMatrix::identity(x.order()).scale(-1.0))],
        BlockMatrix::dense(x.scale(-1.0)),
    )?;
    let r = solve(&p, &SolveOptions::default())?;
    require_converged(&r)?;
    Ok(r.x[0])
}

/// Largest eigenvalue through the SDP `min{t : t I - X ⪰ 0}`.
pub fn max_eigen_via_sdp(x: &SymMatrix) -> Result<f64> {
    if x.order() > EIGEN_SDP_MAX_ORDER {
        return Err(Error::UnsupportedSize(format!(
            "order {} exceeds {EIGEN_SDP_MAX_ORDER}",
            x.order()
        )));
    }
    let p = PrimalSdp::new(
        vec![1.0],
        vec![BlockMatrix::dense(SymMatrix::identity(x.order()))],
        BlockMatrix::dense(x.clone()),
    )?;
    let r = solve(&p, &SolveOptions::default())?;
    require_converged(&r)?;
    Ok(r.x[0])
}

pub(crate) fn require_converged(r: &SolveReport) -> Result<()> {
    match r.status {
        SolveStatus::Optimal | SolveStatus::NearOptimal => Ok(()),
        other => Err(Error::NumericalTrouble(format!("solver stopped with {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(v: f64) -> BlockMatrix {
        BlockMatrix::dense(SymMatrix::diag(&[v]))
    }

    #[test]
    fn sqrt_two_fixture() {
        // max{y12 : [[1, y12], [y12, 2]] ⪰ 0} = sqrt(2).
        let mut a = SymMatrix::zeros(2);
        a.set(0, 1, 1.0);
        let b = SymMatrix::diag(&[-1.0, -2.0]);
        let p = PrimalSdp::new(
            vec![-1.0],
            vec![BlockMatrix::dense(a)],
            BlockMatrix::dense(b),
        )
        .unwrap();
        let r = solve(&p, &SolveOptions::default()).unwrap();
        assert!(r.is_optimal(), "status {:?}", r.status);
        assert!(((-r.pobj) - 2f64.sqrt()).abs() < 1e-5, "got {}", -r.pobj);
    }

    #[test]
    fn determinant_fixture() {
        // min{t : [[t,1],[1,3]] ⪰ 0} = 1/3.
        let mut b = SymMatrix::zeros(2);
        b.set(0, 1, -1.0);
        b.set(1, 1, -3.0);
        let mut a = SymMatrix::zeros(2);
        a.set(0, 0, 1.0);
        let p = PrimalSdp::new(
            vec![1.0],
            vec![BlockMatrix::dense(a)],
            BlockMatrix::dense(b),
        )
        .unwrap();
        let r = solve(&p, &SolveOptions::default()).unwrap();
        assert!(r.is_optimal());
        assert!((r.pobj - 1.0 / 3.0).abs() < 1e-5, "got {}", r.pobj);
    }

    #[test]
    fn cubic_root_fixture() {
        // min{x : [[x,1,3],[1,x+2,0],[3,0,x+1]] ⪰ 0} ≈ 2.6679286.
        let b = SymMatrix::new(
            3,
            vec![0.0, -1.0, -3.0, -1.0, -2.0, 0.0, -3.0, 0.0, -1.0],
        )
        .unwrap();
        let p = PrimalSdp::new(
            vec![1.0],
            vec![BlockMatrix::dense(SymMatrix::identity(3))],
            BlockMatrix::dense(b),
        )
        .unwrap();
        let r = solve(&p, &SolveOptions::default()).unwrap();
        assert!(r.is_optimal());
        assert!((r.pobj - 2.6679286).abs() < 1e-4, "got {}", r.pobj);
    }

    #[test]
    fn phase1_feasible_and_infeasible() {
        // x >= 1 is feasible.
        let p = PrimalSdp::new(vec![1.0], vec![scalar(1.0)], scalar(1.0)).unwrap();
        let (x0, margin) = phase1(&p).unwrap();
        assert!(margin < 0.0);
        assert!(x0[0] >= 1.0 - margin.abs());
        // x >= 1 and -x >= 0 is infeasible.
        let p = PrimalSdp::new(
            vec![1.0],
            vec![BlockMatrix::new(vec![SymMatrix::diag(&[1.0]), SymMatrix::diag(&[-1.0])])],
            BlockMatrix::new(vec![SymMatrix::diag(&[1.0]), SymMatrix::diag(&[0.0])]),
        )
        .unwrap();
        let (_, margin) = phase1(&p).unwrap();
        assert!(margin > 0.0, "margin {margin}");
    }

    #[test]
    fn infeasible_primal_is_flagged() {
        let p = PrimalSdp::new(
            vec![1.0],
            vec![BlockMatrix::new(vec![SymMatrix::diag(&[1.0]), SymMatrix::diag(&[-1.0])])],
            BlockMatrix::new(vec![SymMatrix::diag(&[1.0]), SymMatrix::diag(&[0.0])]),
        )
        .unwrap();
        let r = solve(&p, &SolveOptions::default()).unwrap();
        assert_eq!(r.status, SolveStatus::PrimalInfeasibleSuspected);
    }

    #[test]
    fn eigen_via_sdp_matches_jacobi() {
        let ones = SymMatrix::ones(3);
        assert!((min_eigen_via_sdp(&ones).unwrap() - 0.0).abs() < 1e-5);
        assert!((max_eigen_via_sdp(&ones).unwrap() - 3.0).abs() < 1e-5);
        let i2 = SymMatrix::identity(2);
        assert!((min_eigen_via_sdp(&i2).unwrap() - 1.0).abs() < 1e-5);
        assert!((max_eigen_via_sdp(&i2).unwrap() - 1.0).abs() < 1e-5);
        let flip = SymMatrix::new(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        assert!((min_eigen_via_sdp(&flip).unwrap() + 1.0).abs() < 1e-5);
        assert!((max_eigen_via_sdp(&flip).unwrap() - 1.0).abs() < 1e-5);
    }

    #[test]
    fn non_attained_optimum_shrinks_to_zero() {
        // min{t : [[t,1],[1,t']] ⪰ 0}: infimum 0, never attained. The solver
        // must converge toward zero and must not claim infeasibility.
        let mut a1 = SymMatrix::zeros(2);
        a1.set(0, 0, 1.0);
        let mut a2 = SymMatrix::zeros(2);
        a2.set(1, 1, 1.0);
        let mut b = SymMatrix::zeros(2);
        b.set(0, 1, -1.0);
        let p = PrimalSdp::new(
            vec![1.0, 0.0],
            vec![BlockMatrix::dense(a1), BlockMatrix::dense(a2)],
            BlockMatrix::dense(b),
        )
        .unwrap();
        let r = solve(&p, &SolveOptions::default()).unwrap();
        assert!(
            matches!(r.status, SolveStatus::Optimal | SolveStatus::NearOptimal),
            "status {:?}",
            r.status
        );
        assert!(r.pobj >= -1e-9 && r.pobj <= 1e-6, "pobj {}", r.pobj);
    }

    #[test]
    fn solve_dual_scalar_lp() {
        // max{y : y = 1, y >= 0} = 1 via conversion.
        let d = DualSdp::new(scalar(1.0), vec![scalar(1.0)], vec![1.0]).unwrap();
        let out = solve_dual(&d, &SolveOptions::default()).unwrap();
        assert!((out.objective - 1.0).abs() < 1e-6);
        assert!((out.y.blocks[0].get(0, 0) - 1.0).abs() < 1e-5);
    }
}
