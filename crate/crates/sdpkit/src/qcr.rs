//! Quadratic convex reformulation (QCR) of equality-constrained 0-1
//! quadratic programs, with an exact branch-and-bound on the convexified
//! problem.
//!
//! The pipeline: lift the program to its SDP relaxation, solve the dual
//! (the total Lagrangian, written in primal SDP form), read the optimal
//! multipliers of the binary rows and of a redundant-constraint scheme,
//! and perturb the objective so its Hessian becomes PSD while every
//! feasible binary point keeps its value.

use crate::error::{Error, Result};
use crate::linalg;
use crate::sdpmodel::{BlockMatrix, PrimalSdp, SdpSolution};
use crate::sdpsolve::{self, SolveOptions, SolveReport};
use crate::symcore::{eig_decompose, gram_schmidt_qr, Mat, SymMatrix, DEFAULT_TOL};
use serde::{Deserialize, Serialize};

/// Equality-constrained binary quadratic program:
/// `min xᵀQx + cᵀx  s.t.  Ax = b, x ∈ {0,1}ⁿ` with `A` of full row rank.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BinQp {
    pub q: SymMatrix,
    pub c: Vec<f64>,
    pub a: Mat,
    pub b: Vec<f64>,
}

impl BinQp {
    pub fn new(q: SymMatrix, c: Vec<f64>, a: Mat, b: Vec<f64>) -> Result<Self> {
        let n = q.order();
        if c.len() != n {
            return Err(Error::DimensionMismatch("c length vs Q order".into()));
        }
        if a.rows != b.len() {
            return Err(Error::DimensionMismatch("A rows vs b length".into()));
        }
        if a.rows > 0 && a.cols != n {
            return Err(Error::DimensionMismatch("A columns vs Q order".into()));
        }
        if a.rows > 0 {
            let (qf, _) = gram_schmidt_qr(&a.transpose());
            if qf.cols < a.rows {
                return Err(Error::DimensionMismatch(
                    "constraint matrix A must have full row rank".into(),
                ));
            }
        }
        Ok(BinQp { q, c, a, b })
    }

    /// Without linear constraints.
    pub fn unconstrained(q: SymMatrix, c: Vec<f64>) -> Result<Self> {
        let n = q.order();
        Self::new(q, c, Mat::zeros(0, n), Vec::new())
    }

    pub fn nvars(&self) -> usize {
        self.q.order()
    }

    pub fn nconstraints(&self) -> usize {
        self.a.rows
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.q.quad_form(x) + crate::symcore::dot(&self.c, x)
    }

    fn satisfies_equalities(&self, x: &[f64], tol: f64) -> bool {
        if self.a.rows == 0 {
            return true;
        }
        self.a
            .mul_vec(x)
            .iter()
            .zip(&self.b)
            .all(|(l, r)| (l - r).abs() <= tol)
    }
}

/// A quadratic constraint `B̄ ⊙ xxᵀ + d̄ᵀx = ē` that vanishes on the
/// affine set `{Ax = b}`.
#[derive(Debug, Clone)]
pub struct RedundantConstraint {
    pub quad: SymMatrix,
    pub lin: Vec<f64>,
    pub rhs: f64,
}

impl RedundantConstraint {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.quad.quad_form(x) + crate::symcore::dot(&self.lin, x) - self.rhs
    }
}

/// The single aggregated redundant constraint `|Ax - b|² = 0`:
/// `AᵀA ⊙ xxᵀ - 2bᵀAx + bᵀb = 0`.
pub fn redundant_r1(a: &Mat, b: &[f64]) -> RedundantConstraint {
    let quad = a.gram_cols();
    let lin: Vec<f64> = a.tr_mul_vec(b).iter().map(|v| -2.0 * v).collect();
    let rhs = -crate::symcore::dot(b, b);
    RedundantConstraint { quad, lin, rhs }
}

/// The n·p redundant constraints `x_j A_i x = x_j b_i`; a linear
/// combination of them reproduces [`redundant_r1`].
pub fn redundant_r2(a: &Mat, b: &[f64], n: usize) -> Vec<RedundantConstraint> {
    let mut out = Vec::with_capacity(a.rows * n);
    for i in 0..a.rows {
        for j in 0..n {
            let mut quad = SymMatrix::zeros(n);
            for k in 0..n {
                let v = a.get(i, k);
                if v != 0.0 {
                    quad.set(j, k, quad.get(j, k) + 0.5 * v);
                    if j == k {
                        // Diagonal position takes the full coefficient.
                        quad.set(j, j, quad.get(j, j) + 0.5 * v);
                    }
                }
            }
            let mut lin = vec![0.0; n];
            lin[j] = -b[i];
            out.push(RedundantConstraint { quad, lin, rhs: 0.0 });
        }
    }
    out
}

/// Which redundant-constraint family strengthens the relaxation. `Plain`
/// lifts no redundant rows (the bare relaxation of the lifted program);
/// `R1` and `R2` are provably equivalent in the 0-1 case and at least as
/// tight as `Plain`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    Plain,
    R1,
    R2,
}

fn scheme_constraints(q: &BinQp, scheme: Scheme) -> Vec<RedundantConstraint> {
    if q.a.rows == 0 {
        return Vec::new();
    }
    match scheme {
        Scheme::Plain => Vec::new(),
        Scheme::R1 => vec![redundant_r1(&q.a, &q.b)],
        Scheme::R2 => redundant_r2(&q.a, &q.b, q.nvars()),
    }
}

/// Builds the dual of the SDP relaxation of the lifted program, written in
/// the primal SDP form over the `(n+1) x (n+1)` bordered matrix.
///
/// Variables, in order: `t`, the equality multipliers `β` (p), the binary
/// multipliers `μ` (n), the scheme multipliers `μ̄`. Solving it yields the
/// relaxation value as `-pobj` and the relaxation matrix `[[1, xᵀ],[x, X]]`
/// as the solver's dual variable.
pub fn build_qcr_sdp(q: &BinQp, scheme: Scheme) -> Result<PrimalSdp> {
    let n = q.nvars();
    if n + 1 > 40 {
        return Err(Error::UnsupportedSize("QCR relaxation capped at 39 variables".into()));
    }
    let p = q.nconstraints();
    let reds = scheme_constraints(q, scheme);
    let m = n + 1;

    let mut mats: Vec<BlockMatrix> = Vec::with_capacity(1 + p + n + reds.len());
    let mut cvec: Vec<f64> = Vec::with_capacity(mats.capacity());

    // t: the (0,0) slot carries -t.
    let mut at = SymMatrix::zeros(m);
    at.set(0, 0, -1.0);
    mats.push(BlockMatrix::dense(at));
    cvec.push(-1.0);

    // β_i: half the constraint row in the border.
    for i in 0..p {
        let mut ab = SymMatrix::zeros(m);
        for k in 0..n {
            let v = q.a.get(i, k);
            if v != 0.0 {
                ab.set(0, k + 1, 0.5 * v);
            }
        }
        mats.push(BlockMatrix::dense(ab));
        cvec.push(q.b[i]);
    }

    // μ_i: the binary row x_i² = x_i contributes e_i e_iᵀ - e_i/2 border.
    for i in 0..n {
        let mut am = SymMatrix::zeros(m);
        am.set(i + 1, i + 1, 1.0);
        am.set(0, i + 1, -0.5);
        mats.push(BlockMatrix::dense(am));
        cvec.push(0.0);
    }

    // μ̄_j: the redundant constraint's quadratic part plus its half-border.
    for rc in &reds {
        let mut ar = SymMatrix::zeros(m);
        for i in 0..n {
            for j in i..n {
                let v = rc.quad.get(i, j);
                if v != 0.0 {
                    ar.set(i + 1, j + 1, v);
                }
            }
            let l = rc.lin[i];
            if l != 0.0 {
                ar.set(0, i + 1, ar.get(0, i + 1) + 0.5 * l);
            }
        }
        mats.push(BlockMatrix::dense(ar));
        cvec.push(rc.rhs);
    }

    // Constant part: [[0, cᵀ/2], [c/2, Q]] enters with a minus sign in B.
    let mut b0 = SymMatrix::zeros(m);
    for i in 0..n {
        for j in i..n {
            b0.set(i + 1, j + 1, -q.q.get(i, j));
        }
        b0.set(0, i + 1, -0.5 * q.c[i]);
    }
    PrimalSdp::new(cvec, mats, BlockMatrix::dense(b0))
}

/// Solves the QCR dual SDP; returns the report and the relaxation value
/// `OPT(SDP) = -pobj`.
pub fn solve_qcr_sdp(q: &BinQp, scheme: Scheme, opts: &SolveOptions) -> Result<(SolveReport, f64)> {
    let prob = build_qcr_sdp(q, scheme)?;
    let rep = sdpsolve::solve(&prob, opts)?;
    sdpsolve::require_converged(&rep)?;
    let bound = -rep.pobj;
    Ok((rep, bound))
}

/// Convexified objective data: `x ↦ xᵀ Qc x + ccᵀ x + k` agrees with the
/// original objective on every binary point of `{Ax = b}` and has a PSD
/// Hessian.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvexifiedQp {
    pub qc: SymMatrix,
    pub cc: Vec<f64>,
    pub k: f64,
    /// Multipliers of the binary rows.
    pub mu: Vec<f64>,
    /// Multipliers of the redundant constraints (R1: single entry; R2: one
    /// per (row, variable) pair in row-major order).
    pub lam: Vec<f64>,
    pub scheme: Scheme,
}

impl ConvexifiedQp {
    pub fn value(&self, x: &[f64]) -> f64 {
        self.qc.quad_form(x) + crate::symcore::dot(&self.cc, x) + self.k
    }
}

/// Reads the optimal multipliers out of a near-optimal dual solution and
/// assembles the convexified objective.
///
/// The solution must come from [`build_qcr_sdp`] with the same scheme and a
/// duality gap below `1e-5`; small negative Hessian eigenvalues are floored
/// by a diagonal shift absorbed through `x_i² = x_i`.
pub fn extract_convexification(q: &BinQp, scheme: Scheme, sol: &SdpSolution) -> Result<ConvexifiedQp> {
    let n = q.nvars();
    let p = q.nconstraints();
    let reds = scheme_constraints(q, scheme);
    let x = sol
        .x
        .as_ref()
        .ok_or_else(|| Error::NotConvexified("dual solution carries no multipliers".into()))?;
    if x.len() != 1 + p + n + reds.len() {
        return Err(Error::NotConvexified(format!(
            "expected {} multipliers, got {}",
            1 + p + n + reds.len(),
            x.len()
        )));
    }
    if let (Some(pobj), Some(dobj)) = (sol.pobj, sol.dobj) {
        if (pobj - dobj).abs() > 1e-5 {
            return Err(Error::NotConvexified(format!(
                "duality gap {:.3e} exceeds 1e-5",
                (pobj - dobj).abs()
            )));
        }
    }
    let mu = x[1 + p..1 + p + n].to_vec();
    let lam = x[1 + p + n..].to_vec();

    let mut qc = q.q.clone();
    for i in 0..n {
        qc.set(i, i, qc.get(i, i) + mu[i]);
    }
    let mut cc = q.c.clone();
    for i in 0..n {
        cc[i] -= mu[i];
    }
    let mut k = 0.0;
    for (rc, &l) in reds.iter().zip(&lam) {
        if l != 0.0 {
            qc.axpy(l, &rc.quad);
            for (ci, li) in cc.iter_mut().zip(&rc.lin) {
                *ci += l * li;
            }
            k -= l * rc.rhs;
        }
    }

    // Floor tiny negative curvature through the binary identity.
    let scale = crate::symcore::frobenius_norm(&qc).max(1.0);
    let lmin = eig_decompose(&qc, DEFAULT_TOL)?.values[0];
    if lmin < -1e-5 * scale {
        return Err(Error::NotConvexified(format!(
            "Hessian eigenvalue {lmin:.3e} too negative; tighten the solver tolerance"
        )));
    }
    if lmin < 0.0 {
        let shift = 1e-7 * scale + lmin.abs();
        for i in 0..n {
            qc.set(i, i, qc.get(i, i) + shift);
            cc[i] -= shift;
        }
    }
    Ok(ConvexifiedQp {
        qc,
        cc,
        k,
        mu,
        lam,
        scheme,
    })
}

/// Exact minimum of the convexified objective over an affine set
/// `{A x = b, x_F = pinned}` through the KKT system.
///
/// Returns `None` when the node is continuously infeasible, and
/// `-infinity` when the convex objective is unbounded on the set.
fn affine_min(
    conv: &ConvexifiedQp,
    a: &Mat,
    b: &[f64],
    pinned: &[Option<u8>],
) -> Option<(f64, Vec<f64>)> {
    let n = conv.cc.len();
    let free: Vec<usize> = (0..n).filter(|&i| pinned[i].is_none()).collect();
    let nf = free.len();
    let fixed_val = |i: usize| pinned[i].map(|v| v as f64).unwrap_or(0.0);

    // Constant and linear data restricted to the free coordinates.
    let mut konst = conv.k;
    for i in 0..n {
        if pinned[i].is_some() {
            konst += conv.cc[i] * fixed_val(i);
            for j in 0..n {
                if pinned[j].is_some() {
                    konst += conv.qc.get(i, j) * fixed_val(i) * fixed_val(j);
                }
            }
        }
    }
    let lin: Vec<f64> = free
        .iter()
        .map(|&i| {
            let mut l = conv.cc[i];
            for j in 0..n {
                if pinned[j].is_some() {
                    l += 2.0 * conv.qc.get(i, j) * fixed_val(j);
                }
            }
            l
        })
        .collect();
    let rhs: Vec<f64> = (0..a.rows)
        .map(|r| {
            let mut v = b[r];
            for j in 0..n {
                if pinned[j].is_some() {
                    v -= a.get(r, j) * fixed_val(j);
                }
            }
            v
        })
        .collect();

    if nf == 0 {
        let feasible = rhs.iter().all(|v| v.abs() <= 1e-9);
        return feasible.then_some((konst, Vec::new()));
    }

    // Check affine feasibility on the free coordinates first.
    if a.rows > 0 {
        let rows: Vec<Vec<f64>> = (0..a.rows)
            .map(|r| free.iter().map(|&j| a.get(r, j)).collect())
            .collect();
        let (_, res) = linalg::min_norm_solve(&rows, &rhs).ok()?;
        if res > 1e-8 * (1.0 + crate::symcore::norm2(&rhs)) {
            return None;
        }
    }

    // KKT: [[2Q_ff, A_fᵀ], [A_f, 0]] [x; nu] = [-lin; rhs].
    let dim = nf + a.rows;
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(dim);
    for (ri, &i) in free.iter().enumerate() {
        let mut row = vec![0.0; dim];
        for (rj, &j) in free.iter().enumerate() {
            row[rj] = 2.0 * conv.qc.get(i, j);
        }
        for r in 0..a.rows {
            row[nf + r] = a.get(r, i);
        }
        let _ = ri;
        rows.push(row);
    }
    for r in 0..a.rows {
        let mut row = vec![0.0; dim];
        for (rj, &j) in free.iter().enumerate() {
            row[rj] = a.get(r, j);
        }
        rows.push(row);
    }
    let mut target: Vec<f64> = lin.iter().map(|v| -v).collect();
    target.extend_from_slice(&rhs);
    let (sol, res) = linalg::min_norm_solve(&rows, &target).ok()?;
    let scale = 1.0 + crate::symcore::norm2(&target);
    if res > 1e-6 * scale {
        // No stationary point: the convex objective is unbounded below on
        // the affine set.
        return Some((f64::NEG_INFINITY, Vec::new()));
    }
    let xf = &sol[..nf];
    let mut x = vec![0.0; n];
    for (k, &i) in free.iter().enumerate() {
        x[i] = xf[k];
    }
    for i in 0..n {
        if let Some(v) = pinned[i] {
            x[i] = v as f64;
        }
    }
    let mut quad = 0.0;
    for (ki, &i) in free.iter().enumerate() {
        for (kj, &j) in free.iter().enumerate() {
            quad += conv.qc.get(i, j) * xf[ki] * xf[kj];
        }
    }
    let value = quad + crate::symcore::dot(&lin, xf) + konst;
    Some((value, x))
}

/// Approximate minimizer of the convexified objective over the node's box,
/// affine and pinned constraints, by projected gradient with Nesterov-style
/// momentum (momentum restarts whenever the objective increases). Used for
/// branching decisions and incumbent rounding, not for pruning.
fn boxed_min_point(conv: &ConvexifiedQp, a: &Mat, b: &[f64], pinned: &[Option<u8>]) -> Vec<f64> {
    let n = conv.cc.len();
    let project = |x: &mut Vec<f64>| {
        // Alternating projections onto the box and the affine subspace.
        for _ in 0..25 {
            for i in 0..n {
                match pinned[i] {
                    Some(v) => x[i] = v as f64,
                    None => x[i] = x[i].clamp(0.0, 1.0),
                }
            }
            if a.rows > 0 {
                // Orthogonal projection onto {Ax = b}: x -= Aᵀ(AAᵀ)⁻¹(Ax - b).
                let viol: Vec<f64> = a
                    .mul_vec(x)
                    .iter()
                    .zip(b)
                    .map(|(l, r)| l - r)
                    .collect();
                let rows: Vec<Vec<f64>> = (0..a.rows).map(|r| a.row(r).to_vec()).collect();
                if let Ok((corr, _)) = linalg::min_norm_solve(&rows, &viol) {
                    for (xi, ci) in x.iter_mut().zip(&corr) {
                        *xi -= ci;
                    }
                }
            }
        }
        for i in 0..n {
            match pinned[i] {
                Some(v) => x[i] = v as f64,
                None => x[i] = x[i].clamp(0.0, 1.0),
            }
        }
    };

    // Lipschitz-style step from the largest Hessian row sum.
    let lip = (0..n)
        .map(|i| (0..n).map(|j| conv.qc.get(i, j).abs()).sum::<f64>())
        .fold(1.0f64, f64::max)
        * 2.0;
    let step = 1.0 / lip;

    let mut x = vec![0.5; n];
    project(&mut x);
    let mut vprev = x.clone();
    let mut fbest = conv.value(&x);
    let mut xbest = x.clone();
    let mut theta = 1.0f64;
    for _ in 0..500 {
        // Nesterov extrapolation.
        let theta_next = 0.5 * (1.0 + (1.0 + 4.0 * theta * theta).sqrt());
        let beta = (theta - 1.0) / theta_next;
        let mut ypt: Vec<f64> = x
            .iter()
            .zip(&vprev)
            .map(|(xi, vi)| xi + beta * (xi - vi))
            .collect();
        let g: Vec<f64> = {
            let qx = conv.qc.mul_vec(&ypt);
            qx.iter().zip(&conv.cc).map(|(q, c)| 2.0 * q + c).collect()
        };
        for (yi, gi) in ypt.iter_mut().zip(&g) {
            *yi -= step * gi;
        }
        project(&mut ypt);
        let fnew = conv.value(&ypt);
        vprev = x;
        x = ypt;
        theta = theta_next;
        if fnew < fbest - 1e-14 {
            fbest = fnew;
            xbest = x.clone();
        } else {
            // Restart momentum on non-monotone progress.
            theta = 1.0;
            vprev = x.clone();
        }
    }
    xbest
}

/// Smallest `λ >= 0` (within a 1e-6 bracket) making `Q + λ AᵀSA` PSD, for
/// `S ≻ 0` and `Q` strictly positive on `null(A)`.
pub fn convexify_lambda(q: &SymMatrix, a: &Mat, _b: &[f64], s: &SymMatrix) -> Result<f64> {
    let n = q.order();
    let rows: Vec<Vec<f64>> = (0..a.rows).map(|r| a.row(r).to_vec()).collect();
    let null = linalg::complement_basis(&rows, n);
    let scale = crate::symcore::frobenius_norm(q).max(1.0);
    if !null.is_empty() {
        let basis = mat_from_cols(&null);
        let proj = q.congruence(&basis);
        let lmin = eig_decompose(&proj, DEFAULT_TOL)?.values[0];
        if lmin <= 1e-9 * scale {
            return Err(Error::NotPositiveOnNullspace);
        }
    }
    // B = AᵀSA.
    let sa = s.to_mat().mul(a);
    let bmat = a.transpose().mul(&sa).into_sym();
    let is_ok = |lam: f64| -> bool {
        let mut m = q.clone();
        m.axpy(lam, &bmat);
        match eig_decompose(&m, DEFAULT_TOL) {
            Ok(e) => e.values[0] >= -1e-8 * scale,
            Err(_) => false,
        }
    };
    if is_ok(0.0) {
        return Ok(0.0);
    }
    let mut hi = 1.0;
    let mut guard = 0;
    while !is_ok(hi) {
        hi *= 2.0;
        guard += 1;
        if guard > 60 {
            return Err(Error::NumericalTrouble("no convexifying lambda found".into()));
        }
    }
    let mut lo = hi / 2.0f64.min(hi);
    if lo == hi {
        lo = 0.0;
    }
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if is_ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Constructive convexifier: a matrix `W` (n×p) with
/// `Q + AᵀWᵀ + WA ⪰ 0`, existing whenever `Q` is PSD on `null(A)`.
///
/// Follows the inductive construction: orthonormalize the rows of `A`,
/// then peel one row at a time with `w_i = -(Q + P_iᵀ) u_i + z u_i`,
/// `z = u_iᵀ Q u_i / 2`, and map back through the triangular factor.
pub fn convexify_w(q: &SymMatrix, a: &Mat) -> Result<Mat> {
    let n = q.order();
    let p = a.rows;
    if p == 0 {
        return Ok(Mat::zeros(n, 0));
    }
    let scale = crate::symcore::frobenius_norm(q).max(1.0);
    // A = Rᵀ U with U having orthonormal rows.
    let (qf, rf) = gram_schmidt_qr(&a.transpose());
    if qf.cols < p {
        return Err(Error::DimensionMismatch("A must have full row rank".into()));
    }
    let u_rows: Vec<Vec<f64>> = (0..p).map(|i| qf.col(i)).collect();
    let null = linalg::complement_basis(&u_rows, n);
    if !null.is_empty() {
        let basis = mat_from_cols(&null);
        let proj = q.congruence(&basis);
        let lmin = eig_decompose(&proj, DEFAULT_TOL)?.values[0];
        if lmin < -1e-9 * scale {
            return Err(Error::NotPsdOnNullspace);
        }
    }

    // Frame [u_{i+1}, ..., u_p, B] columns for the P_i accumulator.
    let mut w_cols: Vec<Vec<f64>> = vec![vec![0.0; n]; p];
    for i in (0..p).rev() {
        // P_i = [w_{i+1}, ..., w_p, 0] [u_{i+1}, ..., u_p, B]ᵀ.
        let mut p_i = Mat::zeros(n, n);
        for j in i + 1..p {
            for r in 0..n {
                let wr = w_cols[j][r];
                if wr == 0.0 {
                    continue;
                }
                for c in 0..n {
                    p_i.set(r, c, p_i.get(r, c) + wr * u_rows[j][c]);
                }
            }
        }
        let ui = &u_rows[i];
        let qu = q.mul_vec(ui);
        let ptu = p_i.transpose().mul_vec(ui);
        let z = 0.5 * crate::symcore::dot(ui, &qu);
        let wi: Vec<f64> = (0..n).map(|r| -(qu[r] + ptu[r]) + z * ui[r]).collect();
        w_cols[i] = wi;
    }
    // W̄ = W (Rᵀ)⁻¹, i.e. solve R W̄ᵀ = Wᵀ with R upper triangular.
    let mut wbar = Mat::zeros(n, p);
    for r in 0..n {
        let wrow: Vec<f64> = (0..p).map(|c| w_cols[c][r]).collect();
        // Back substitution on R y = wrow.
        let mut y = wrow;
        for c in (0..p).rev() {
            for k in c + 1..p {
                y[c] -= rf.get(c, k) * y[k];
            }
            y[c] /= rf.get(c, c);
        }
        for c in 0..p {
            wbar.set(r, c, y[c]);
        }
    }
    // Postcondition check.
    let wa = wbar.mul(a);
    let m = SymMatrix::from_fn(n, |i, j| q.get(i, j) + wa.get(i, j) + wa.get(j, i));
    let lmin = eig_decompose(&m, DEFAULT_TOL)?.values[0];
    if lmin < -1e-7 * scale {
        return Err(Error::FactorizationFailure(format!(
            "convexifier failed the PSD check ({lmin:.3e})"
        )));
    }
    Ok(wbar)
}

fn mat_from_cols(cols: &[Vec<f64>]) -> Mat {
    let n = cols[0].len();
    let mut m = Mat::zeros(n, cols.len());
    for (c, col) in cols.iter().enumerate() {
        for r in 0..n {
            m.set(r, c, col[r]);
        }
    }
    m
}

/// Options for [`branch_and_bound`].
#[derive(Debug, Clone)]
pub struct BnbOptions {
    pub max_nodes: usize,
    /// Pruning slack: a node survives unless its certified lower bound
    /// exceeds `incumbent - prune_tol`.
    pub prune_tol: f64,
}

impl Default for BnbOptions {
    fn default() -> Self {
        BnbOptions {
            max_nodes: 1_000_000,
            prune_tol: 1e-9,
        }
    }
}

/// Branch-and-bound outcome.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BnbReport {
    pub best_x: Vec<u8>,
    pub best_obj: f64,
    pub nodes: usize,
    pub root_bound: f64,
}

/// Exact solver for the binary program using convex continuous bounds.
///
/// Depth-first search branching on the most fractional coordinate of the
/// node's projected-gradient point; node pruning uses the exact affine
/// (unboxed) convex minimum, which is a certified lower bound for the
/// boxed node relaxation, so the search is exact regardless of how tight
/// the convexification is.
pub fn branch_and_bound(q: &BinQp, conv: &ConvexifiedQp, opts: &BnbOptions) -> Result<BnbReport> {
    let n = q.nvars();
    if n > 25 {
        return Err(Error::UnsupportedSize("branch and bound capped at 25 variables".into()));
    }
    let mut pinned: Vec<Option<u8>> = vec![None; n];
    let root_bound = affine_min(conv, &q.a, &q.b, &pinned)
        .map(|(v, _)| v)
        .unwrap_or(f64::INFINITY);

    let mut best_obj = f64::INFINITY;
    let mut best_x: Option<Vec<u8>> = None;
    let mut nodes = 0usize;

    fn descend(
        q: &BinQp,
        conv: &ConvexifiedQp,
        opts: &BnbOptions,
        pinned: &mut Vec<Option<u8>>,
        best_obj: &mut f64,
        best_x: &mut Option<Vec<u8>>,
        nodes: &mut usize,
    ) {
        if *nodes >= opts.max_nodes {
            return;
        }
        *nodes += 1;
        let bound = match affine_min(conv, &q.a, &q.b, pinned) {
            None => return, // continuously infeasible node
            Some((v, _)) => v,
        };
        if bound > *best_obj - opts.prune_tol {
            return;
        }
        let free: Vec<usize> = (0..pinned.len()).filter(|&i| pinned[i].is_none()).collect();
        if free.is_empty() {
            let x: Vec<f64> = pinned.iter().map(|v| v.unwrap() as f64).collect();
            if q.satisfies_equalities(&x, 1e-9) {
                let val = q.objective(&x);
                if val < *best_obj {
                    *best_obj = val;
                    *best_x = Some(pinned.iter().map(|v| v.unwrap()).collect());
                }
            }
            return;
        }

        // Branching point: projected-gradient minimizer over the node box.
        let xhat = boxed_min_point(conv, &q.a, &q.b, pinned);
        // Opportunistic incumbent from rounding.
        let rounded: Vec<f64> = (0..pinned.len())
            .map(|i| match pinned[i] {
                Some(v) => v as f64,
                None => {
                    if xhat[i] >= 0.5 {
                        1.0
                    } else {
                        0.0
                    }
                }
            })
            .collect();
        if q.satisfies_equalities(&rounded, 1e-9) {
            let val = q.objective(&rounded);
            if val < *best_obj {
                *best_obj = val;
                *best_x = Some(rounded.iter().map(|&v| v as u8).collect());
            }
        }

        let branch = free
            .iter()
            .copied()
            .max_by(|&a, &b| {
                let fa = (xhat[a].min(1.0 - xhat[a]), std::cmp::Reverse(a));
                let fb = (xhat[b].min(1.0 - xhat[b]), std::cmp::Reverse(b));
                fa.partial_cmp(&fb).unwrap()
            })
            .unwrap();
        // Explore the branch suggested by the relaxation first.
        let first: u8 = if xhat[branch] >= 0.5 { 1 } else { 0 };
        for v in [first, 1 - first] {
            pinned[branch] = Some(v);
            descend(q, conv, opts, pinned, best_obj, best_x, nodes);
            pinned[branch] = None;
        }
    }

    descend(q, conv, opts, &mut pinned, &mut best_obj, &mut best_x, &mut nodes);
    match best_x {
        Some(best_x) => Ok(BnbReport {
            best_x,
            best_obj,
            nodes,
            root_bound,
        }),
        None => Err(Error::InfeasibleModel),
    }
}

/// Exact optimum by enumerating all binary points satisfying `Ax = b`.
pub fn brute_force(q: &BinQp) -> Result<(Vec<u8>, f64)> {
    let n = q.nvars();
    if n > 22 {
        return Err(Error::UnsupportedSize("brute force capped at 22 variables".into()));
    }
    let mut best: Option<(Vec<u8>, f64)> = None;
    let mut x = vec![0.0; n];
    for mask in 0u64..(1 << n) {
        for (i, xi) in x.iter_mut().enumerate() {
            *xi = ((mask >> i) & 1) as f64;
        }
        if !q.satisfies_equalities(&x, 1e-9) {
            continue;
        }
        let val = q.objective(&x);
        if best.as_ref().map(|(_, b)| val < *b).unwrap_or(true) {
            best = Some((x.iter().map(|&v| v as u8).collect(), val));
        }
    }
    best.ok_or(Error::InfeasibleModel)
}

/// The whole pipeline: solve the dual SDP, extract the convexification and
/// run the exact branch-and-bound.
pub fn qcr_solve(q: &BinQp, scheme: Scheme) -> Result<(BnbReport, ConvexifiedQp, f64)> {
    let mut opts = SolveOptions::default();
    opts.tol = 1e-8;
    let (rep, bound) = solve_qcr_sdp(q, scheme, &opts)?;
    let conv = extract_convexification(q, scheme, &rep.solution())?;
    let bnb = branch_and_bound(q, &conv, &BnbOptions::default())?;
    Ok((bnb, conv, bound))
}

/// Parses the BinQp text format: `n p`, then `n` rows of `Q`, one row `c`,
/// `p` rows of `A` and one row `b` (the last two omitted when `p = 0`).
pub fn parse_binqp_text(text: &str) -> Result<BinQp> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hl, header) = lines.next().ok_or_else(|| Error::parse(1, "empty file"))?;
    let hp: Vec<&str> = header.split_whitespace().collect();
    if hp.len() != 2 {
        return Err(Error::parse(hl, "expected header `n p`"));
    }
    let n: usize = hp[0].parse().map_err(|_| Error::parse(hl, "bad n"))?;
    let p: usize = hp[1].parse().map_err(|_| Error::parse(hl, "bad p"))?;
    let mut take_row = |what: &str, len: usize| -> Result<Vec<f64>> {
        let (ln, line) = lines
            .next()
            .ok_or_else(|| Error::parse(hl, format!("missing {what} row")))?;
        let row: std::result::Result<Vec<f64>, _> =
            line.split_whitespace().map(str::parse::<f64>).collect();
        let row = row.map_err(|_| Error::parse(ln, format!("bad number in {what}")))?;
        if row.len() != len {
            return Err(Error::parse(ln, format!("expected {len} entries in {what}")));
        }
        Ok(row)
    };
    let mut qe = Vec::with_capacity(n * n);
    for _ in 0..n {
        qe.extend(take_row("Q", n)?);
    }
    let q = SymMatrix::new(n, qe)?;
    let c = take_row("c", n)?;
    let mut arows = Vec::new();
    for _ in 0..p {
        arows.push(take_row("A", n)?);
    }
    let a = if p == 0 { Mat::zeros(0, n) } else { Mat::from_rows(&arows) };
    let b = if p == 0 { Vec::new() } else { take_row("b", p)? };
    BinQp::new(q, c, a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paper_example() -> BinQp {
        // min -2 x1 x2 s.t. x1 + x2 = 1, binary; optimum 0.
        let q = SymMatrix::new(2, vec![0.0, -1.0, -1.0, 0.0]).unwrap();
        BinQp::new(q, vec![0.0, 0.0], Mat::from_rows(&[vec![1.0, 1.0]]), vec![1.0]).unwrap()
    }

    #[test]
    fn redundant_r1_examples() {
        let rc = redundant_r1(&Mat::from_rows(&[vec![1.0, 1.0]]), &[1.0]);
        assert_eq!(rc.quad, SymMatrix::ones(2));
        assert_eq!(rc.lin, vec![-2.0, -2.0]);
        assert_eq!(rc.rhs, -1.0);
        for x in [[1.0, 0.0], [0.25, 0.75], [-3.0, 4.0]] {
            assert!(rc.eval(&x).abs() < 1e-12, "vanishes on Ax=b");
        }
        let rc = redundant_r1(&Mat::identity(2), &[0.0, 0.0]);
        assert_eq!(rc.quad, SymMatrix::identity(2));
        assert_eq!(rc.rhs, 0.0);
        let rc = redundant_r1(&Mat::from_rows(&[vec![0.0, 1.0]]), &[0.0]);
        assert_eq!(rc.quad, SymMatrix::diag(&[0.0, 1.0]));
    }

    #[test]
    fn redundant_r2_examples() {
        // A = (0,1), b = 0 generates x1 x2 = 0 and x2^2 = 0.
        let rcs = redundant_r2(&Mat::from_rows(&[vec![0.0, 1.0]]), &[0.0], 2);
        assert_eq!(rcs.len(), 2);
        let x = [2.0, 3.0];
        assert!((rcs[0].quad.quad_form(&x) - 6.0).abs() < 1e-12); // x1 x2
        assert!((rcs[1].quad.quad_form(&x) - 9.0).abs() < 1e-12); // x2^2
        // Empty constraint set.
        assert!(redundant_r2(&Mat::zeros(0, 3), &[], 3).is_empty());
        // A = (1,1), b = 1: {x1^2 + x1 x2 = x1, x1 x2 + x2^2 = x2}.
        let a = Mat::from_rows(&[vec![1.0, 1.0]]);
        let rcs = redundant_r2(&a, &[1.0], 2);
        for rc in &rcs {
            for x in [[1.0, 0.0], [0.5, 0.5], [-1.0, 2.0]] {
                assert!(rc.eval(&x).abs() < 1e-12);
            }
        }
        // The stated linear combination reproduces R1: sum_j A_ij * rc_ij
        // plus b_i times the linear row.
        let r1 = redundant_r1(&a, &[1.0]);
        let mut quad = SymMatrix::zeros(2);
        let mut lin = vec![0.0; 2];
        let mut rhs = 0.0;
        for j in 0..2 {
            let coeff = a.get(0, j);
            quad.axpy(coeff, &rcs[j].quad);
            for k in 0..2 {
                lin[k] += coeff * rcs[j].lin[k];
            }
            rhs += coeff * rcs[j].rhs;
        }
        // b_i * (-A_i x + b_i) = 0 contributes -b A to lin and -b^2 to rhs.
        for k in 0..2 {
            lin[k] -= 1.0 * a.get(0, k);
        }
        rhs -= 1.0;
        assert!(quad.sub(&r1.quad).max_abs() < 1e-12);
        assert_eq!(lin, r1.lin);
        assert!((rhs - r1.rhs).abs() < 1e-12);
    }

    #[test]
    fn qcr_sdp_paper_example() {
        let q = paper_example();
        // The bare relaxation admits x = (1/2, 1/2), X = xxᵀ + I/4 with
        // value -0.5, strictly below the binary optimum 0.
        let (_, plain) = solve_qcr_sdp(&q, Scheme::Plain, &SolveOptions::default()).unwrap();
        assert!(plain <= -0.5 + 1e-3, "plain bound {plain}");
        // The lifted redundant rows force X_12 = 0 here, so both schemes
        // close the gap completely and agree with each other.
        let (_, bound) = solve_qcr_sdp(&q, Scheme::R1, &SolveOptions::default()).unwrap();
        let (_, bound2) = solve_qcr_sdp(&q, Scheme::R2, &SolveOptions::default()).unwrap();
        assert!((bound - bound2).abs() < 1e-4, "schemes {bound} vs {bound2}");
        assert!(bound.abs() < 1e-4, "lifted bound {bound}");
    }

    #[test]
    fn extraction_reproduces_bound() {
        // Extraction from the bare dual reproduces the -0.5 bound (the
        // partial Lagrangian at the naive multipliers would give 0).
        let q = paper_example();
        let mut opts = SolveOptions::default();
        opts.tol = 1e-8;
        let (rep, bound) = solve_qcr_sdp(&q, Scheme::Plain, &opts).unwrap();
        let conv = extract_convexification(&q, Scheme::Plain, &rep.solution()).unwrap();
        // PSD Hessian.
        let lmin = eig_decompose(&conv.qc, DEFAULT_TOL).unwrap().values[0];
        assert!(lmin >= -1e-7, "lmin {lmin}");
        // Objective invariance on feasible binaries.
        for x in [[1.0, 0.0], [0.0, 1.0]] {
            assert!((conv.value(&x) - q.objective(&x)).abs() < 1e-6);
        }
        // The continuous affine minimum reproduces the SDP bound.
        let (cmin, _) = affine_min(&conv, &q.a, &q.b, &vec![None; 2]).unwrap();
        assert!((cmin - bound).abs() < 1e-3, "cmin {cmin} vs bound {bound}");
    }

    #[test]
    fn convexify_lambda_examples() {
        // Q strictly positive on null(A) = span{e1} fails for this Q.
        let q = SymMatrix::new(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let a = Mat::from_rows(&[vec![0.0, 1.0]]);
        assert!(matches!(
            convexify_lambda(&q, &a, &[0.0], &SymMatrix::identity(1)),
            Err(Error::NotPositiveOnNullspace)
        ));
        // Q = I needs no shift.
        let lam = convexify_lambda(&SymMatrix::identity(2), &a, &[0.0], &SymMatrix::identity(1)).unwrap();
        assert_eq!(lam, 0.0);
        // Q = diag(1, -1) with A = (0,1): lambda = 1.
        let q = SymMatrix::diag(&[1.0, -1.0]);
        let lam = convexify_lambda(&q, &a, &[0.0], &SymMatrix::identity(1)).unwrap();
        assert!((lam - 1.0).abs() < 1e-5, "lambda {lam}");
    }

    #[test]
    fn convexify_w_examples() {
        // Zero on the null space is allowed here.
        let q = SymMatrix::new(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let a = Mat::from_rows(&[vec![0.0, 1.0]]);
        let w = convexify_w(&q, &a).unwrap();
        let wa = w.mul(&a);
        let m = SymMatrix::from_fn(2, |i, j| q.get(i, j) + wa.get(i, j) + wa.get(j, i));
        assert!(eig_decompose(&m, DEFAULT_TOL).unwrap().values[0] >= -1e-7);
        // PSD Q accepts W (not necessarily zero, but valid).
        let w = convexify_w(&SymMatrix::identity(3), &Mat::from_rows(&[vec![1.0, 1.0, 1.0]])).unwrap();
        let a3 = Mat::from_rows(&[vec![1.0, 1.0, 1.0]]);
        let wa = w.mul(&a3);
        let m = SymMatrix::from_fn(3, |i, j| {
            SymMatrix::identity(3).get(i, j) + wa.get(i, j) + wa.get(j, i)
        });
        assert!(eig_decompose(&m, DEFAULT_TOL).unwrap().values[0] >= -1e-7);
    }

    #[test]
    fn bnb_paper_example() {
        let q = paper_example();
        let (bnb, _, bound) = qcr_solve(&q, Scheme::Plain).unwrap();
        assert_eq!(bnb.best_obj, 0.0);
        assert!(bnb.root_bound <= -0.5 + 1e-3, "root {}", bnb.root_bound);
        assert!(bound <= -0.5 + 1e-3);
        let sum: u8 = bnb.best_x.iter().sum();
        assert_eq!(sum, 1);
        // Brute force agrees, and so does the scheme pipeline.
        let (_, bf) = brute_force(&q).unwrap();
        assert_eq!(bf, 0.0);
        let (bnb_r1, _, _) = qcr_solve(&q, Scheme::R1).unwrap();
        assert_eq!(bnb_r1.best_obj, 0.0);
    }

    #[test]
    fn bnb_unconstrained_trivial() {
        // Q = 0, c = 1: optimum 0 at x = 0.
        let q = BinQp::unconstrained(SymMatrix::zeros(3), vec![1.0, 1.0, 1.0]).unwrap();
        let (bnb, _, _) = qcr_solve(&q, Scheme::R1).unwrap();
        assert_eq!(bnb.best_obj, 0.0);
        assert_eq!(bnb.best_x, vec![0, 0, 0]);
    }

    #[test]
    fn brute_force_examples() {
        let (x, v) = brute_force(&paper_example()).unwrap();
        assert_eq!(v, 0.0);
        assert_eq!(x.iter().map(|&b| b as i32).sum::<i32>(), 1);
        // Infeasible: x1 + x2 = 3 over two binaries.
        let infeasible = BinQp::new(
            SymMatrix::zeros(2),
            vec![0.0, 0.0],
            Mat::from_rows(&[vec![1.0, 1.0]]),
            vec![3.0],
        )
        .unwrap();
        assert!(matches!(brute_force(&infeasible), Err(Error::InfeasibleModel)));
        // Q = -I unconstrained: optimum -n at the all-ones point.
        let q = BinQp::unconstrained(SymMatrix::identity(4).scale(-1.0), vec![0.0; 4]).unwrap();
        let (x, v) = brute_force(&q).unwrap();
        assert_eq!(v, -4.0);
        assert_eq!(x, vec![1, 1, 1, 1]);
    }

    #[test]
    fn bnb_infeasible_model() {
        let infeasible = BinQp::new(
            SymMatrix::zeros(2),
            vec![0.0, 0.0],
            Mat::from_rows(&[vec![1.0, 1.0]]),
            vec![3.0],
        )
        .unwrap();
        let conv = ConvexifiedQp {
            qc: SymMatrix::zeros(2),
            cc: vec![0.0, 0.0],
            k: 0.0,
            mu: vec![0.0, 0.0],
            lam: vec![0.0],
            scheme: Scheme::R1,
        };
        assert!(matches!(
            branch_and_bound(&infeasible, &conv, &BnbOptions::default()),
            Err(Error::InfeasibleModel)
        ));
    }

    #[test]
    fn binqp_text_roundtrip() {
        let text = "2 1\n0 -1\n-1 0\n0 0\n1 1\n1\n";
        let q = parse_binqp_text(text).unwrap();
        assert_eq!(q.nvars(), 2);
        assert_eq!(q.nconstraints(), 1);
        assert_eq!(q.b, vec![1.0]);
        let unconstrained = parse_binqp_text("2 0\n1 0\n0 1\n-1 -1\n").unwrap();
        assert_eq!(unconstrained.nconstraints(), 0);
    }
}
