//! Lovász theta number: builders for the equivalent formulations, the ψ
//! moment hierarchy, the fractional chromatic LP and combinatorial oracles
//! for the sandwich inequality α(G) ≤ ϑ(G) ≤ χ(Ḡ).

use crate::error::{Error, Result};
use crate::sdpmodel::{BlockMatrix, DualSdp, PrimalSdp};
use crate::sdpsolve::{self, SolveOptions};
use crate::symcore::{eig_decompose, gram_factor, GramMethod, SymMatrix, DEFAULT_TOL};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Simple undirected graph on vertices `0..n` (serialized 1-based).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::DimensionMismatch("graph needs at least one vertex".into()));
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::DimensionMismatch(format!("edge ({a},{b}) out of range")));
            }
            if a == b {
                return Err(Error::DimensionMismatch(format!("loop at vertex {a}")));
            }
            set.insert((a.min(b), a.max(b)));
        }
        Ok(Graph { n, edges: set })
    }

    pub fn complete(n: usize) -> Self {
        let mut edges = BTreeSet::new();
        for i in 0..n {
            for j in i + 1..n {
                edges.insert((i, j));
            }
        }
        Graph { n, edges }
    }

    pub fn empty(n: usize) -> Self {
        Graph { n, edges: BTreeSet::new() }
    }

    pub fn cycle(n: usize) -> Self {
        Graph::new(n, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
    }

    /// The Petersen graph (outer 5-cycle, inner pentagram, spokes).
    pub fn petersen() -> Self {
        let mut e = Vec::new();
        for i in 0..5 {
            e.push((i, (i + 1) % 5));
            e.push((5 + i, 5 + (i + 2) % 5));
            e.push((i, 5 + i));
        }
        Graph::new(10, e).unwrap()
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn non_edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in i + 1..self.n {
                if !self.has_edge(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn complement(&self) -> Graph {
        Graph {
            n: self.n,
            edges: self.non_edges().into_iter().collect(),
        }
    }

    pub fn adjacency(&self) -> SymMatrix {
        let mut a = SymMatrix::zeros(self.n);
        for &(i, j) in &self.edges {
            a.set(i, j, 1.0);
        }
        a
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        (0..self.n).filter(|&u| u != v && self.has_edge(u, v)).collect()
    }

    fn is_clique(&self, set: &[usize]) -> bool {
        for (k, &a) in set.iter().enumerate() {
            for &b in &set[k + 1..] {
                if !self.has_edge(a, b) {
                    return false;
                }
            }
        }
        true
    }
}

/// Parses a DIMACS-like edge list: a header `p <n> <m>` followed by `m`
/// lines `e i j` (1-based). Comment lines start with `c`.
pub fn parse_graph_dimacs(text: &str) -> Result<Graph> {
    let mut n = None;
    let mut edges = Vec::new();
    for (ln0, raw) in text.lines().enumerate() {
        let ln = ln0 + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        match f[0] {
            "p" => {
                if f.len() < 2 {
                    return Err(Error::parse(ln, "expected `p <n> [m]`"));
                }
                // Accept both `p n m` and `p edge n m`.
                let idx = if f[1].chars().all(|c| c.is_ascii_digit()) { 1 } else { 2 };
                if f.len() <= idx {
                    return Err(Error::parse(ln, "missing vertex count"));
                }
                n = Some(
                    f[idx]
                        .parse::<usize>()
                        .map_err(|_| Error::parse(ln, "bad vertex count"))?,
                );
            }
            "e" => {
                if f.len() != 3 {
                    return Err(Error::parse(ln, "expected `e i j`"));
                }
                let i: usize = f[1].parse().map_err(|_| Error::parse(ln, "bad endpoint"))?;
                let j: usize = f[2].parse().map_err(|_| Error::parse(ln, "bad endpoint"))?;
                if i == 0 || j == 0 {
                    return Err(Error::parse(ln, "vertices are 1-based"));
                }
                edges.push((i - 1, j - 1, ln));
            }
            other => return Err(Error::parse(ln, format!("unknown record `{other}`"))),
        }
    }
    let n = n.ok_or_else(|| Error::parse(1, "missing `p` header"))?;
    let mut list = Vec::new();
    for (i, j, ln) in edges {
        if i >= n || j >= n {
            return Err(Error::parse(ln, "edge endpoint out of range"));
        }
        if i == j {
            return Err(Error::parse(ln, "loops are not allowed"));
        }
        list.push((i, j));
    }
    Graph::new(n, list)
}

/// Parses the compact form `n;i-j,i-j,...` (1-based, empty edge list allowed).
pub fn parse_graph_compact(text: &str) -> Result<Graph> {
    let text = text.trim();
    let (head, tail) = match text.split_once(';') {
        Some(p) => p,
        None => (text, ""),
    };
    let n: usize = head
        .trim()
        .parse()
        .map_err(|_| Error::parse(1, "bad vertex count in compact graph"))?;
    let mut edges = Vec::new();
    for part in tail.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (a, b) = part
            .split_once('-')
            .ok_or_else(|| Error::parse(1, format!("bad edge `{part}`")))?;
        let i: usize = a.trim().parse().map_err(|_| Error::parse(1, "bad endpoint"))?;
        let j: usize = b.trim().parse().map_err(|_| Error::parse(1, "bad endpoint"))?;
        if i == 0 || j == 0 {
            return Err(Error::parse(1, "vertices are 1-based"));
        }
        edges.push((i - 1, j - 1));
    }
    Graph::new(n, edges)
}

pub fn write_graph_dimacs(g: &Graph) -> String {
    let mut out = format!("p {} {}\n", g.order(), g.num_edges());
    for (i, j) in g.edges() {
        out.push_str(&format!("e {} {}\n", i + 1, j + 1));
    }
    out
}

/// The primal theta program: `min t` with `Z̄_ii = t - 1`, `Z̄_ij = -1` on
/// non-edges and `Z̄ ⪰ 0`; variables are `t` and one entry per edge.
pub fn build_theta_primal(g: &Graph) -> PrimalSdp {
    let n = g.order();
    // Z̄(t, z) = t * I + Σ_e z_e E_e - (ones matrix); B = ones.
    let mut a = vec![BlockMatrix::dense(SymMatrix::identity(n))];
    for (i, j) in g.edges() {
        let mut e = SymMatrix::zeros(n);
        e.set(i, j, 1.0);
        a.push(BlockMatrix::dense(e));
    }
    let mut c = vec![1.0];
    c.extend(std::iter::repeat(0.0).take(g.num_edges()));
    PrimalSdp::new(c, a, BlockMatrix::dense(SymMatrix::ones(n))).unwrap()
}

/// The dual theta program: `max 𝟙 ⊙ Y` with `trace(Y) = 1`, `Y_ij = 0` on
/// edges and `Y ⪰ 0`.
pub fn build_theta_dual(g: &Graph) -> DualSdp {
    let n = g.order();
    let mut rows = vec![BlockMatrix::dense(SymMatrix::identity(n))];
    let mut rhs = vec![1.0];
    for (i, j) in g.edges() {
        let mut e = SymMatrix::zeros(n);
        e.set(i, j, 1.0);
        rows.push(BlockMatrix::dense(e));
        rhs.push(0.0);
    }
    DualSdp::new(BlockMatrix::dense(SymMatrix::ones(n)), rows, rhs).unwrap()
}

/// The moment-style formulation over an `(n+1) x (n+1)` matrix indexed by
/// `{0} ∪ V`: `max Σ y_0i` with `y_00 = 1`, `y_ij = 0` on edges and
/// `y_ii = y_0i`.
pub fn build_theta_prime(g: &Graph) -> DualSdp {
    let n = g.order();
    let m = n + 1;
    let mut b = SymMatrix::zeros(m);
    for i in 1..m {
        b.set(0, i, 0.5);
    }
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    let mut e00 = SymMatrix::zeros(m);
    e00.set(0, 0, 1.0);
    rows.push(BlockMatrix::dense(e00));
    rhs.push(1.0);
    for (i, j) in g.edges() {
        let mut e = SymMatrix::zeros(m);
        e.set(i + 1, j + 1, 1.0);
        rows.push(BlockMatrix::dense(e));
        rhs.push(0.0);
    }
    for i in 0..n {
        let mut e = SymMatrix::zeros(m);
        e.set(i + 1, i + 1, 1.0);
        e.set(0, i + 1, -0.5);
        rows.push(BlockMatrix::dense(e));
        rhs.push(0.0);
    }
    DualSdp::new(BlockMatrix::dense(b), rows, rhs).unwrap()
}

fn default_opts() -> SolveOptions {
    SolveOptions::default()
}

/// Solves the primal formulation; returns `(theta, Z̄_opt)`.
pub fn theta_primal_value(g: &Graph) -> Result<(f64, SymMatrix)> {
    let p = build_theta_primal(g);
    let r = sdpsolve::solve(&p, &default_opts())?;
    sdpsolve::require_converged(&r)?;
    let zbar = p.slack(&r.x).blocks[0].clone();
    Ok((r.x[0], zbar))
}

/// Solves the dual formulation; returns `(theta, Y_opt)`.
pub fn theta_dual_value(g: &Graph) -> Result<(f64, SymMatrix)> {
    let d = build_theta_dual(g);
    let out = sdpsolve::solve_dual(&d, &default_opts())?;
    sdpsolve::require_converged(&out.report)?;
    Ok((out.objective, out.y.blocks[0].clone()))
}

/// Solves the moment formulation; returns `(theta, Y_opt)` with `Y` of
/// order `n + 1`.
pub fn theta_prime_value(g: &Graph) -> Result<(f64, SymMatrix)> {
    let d = build_theta_prime(g);
    let out = sdpsolve::solve_dual(&d, &default_opts())?;
    sdpsolve::require_converged(&out.report)?;
    Ok((out.objective, out.y.blocks[0].clone()))
}

/// Evaluates the two eigenvalue formulations from an optimal dual matrix.
///
/// Scales rows and columns of `Y` by `1/sqrt(Y_ii)` to build `Z` with unit
/// diagonal and zero entries on edges, then reports `λ_max(Z)` and
/// `1 - λ_max(X)/λ_min(X)` for `X = Z - I` (with the all-zero convention
/// mapping to 1). Both values equal ϑ(G) for optimal input.
pub fn lambda_formulation_values(g: &Graph, y_opt: &SymMatrix) -> Result<(f64, f64)> {
    let n = g.order();
    if y_opt.order() != n {
        return Err(Error::DimensionMismatch("Y order vs graph".into()));
    }
    let mut xs = vec![0.0; n];
    for i in 0..n {
        let d = y_opt.get(i, i);
        if d < -1e-9 {
            return Err(Error::DegenerateInput(format!("negative diagonal {d:.3e}")));
        }
        xs[i] = d.max(0.0).sqrt();
    }
    // Division guard: zero-diagonal vertices fall back to an identity row.
    let z = SymMatrix::from_fn(n, |i, j| {
        if i == j {
            1.0
        } else if xs[i] < 1e-9 || xs[j] < 1e-9 {
            0.0
        } else {
            y_opt.get(i, j) / (xs[i] * xs[j])
        }
    });
    let eig_z = eig_decompose(&z, DEFAULT_TOL)?;
    let theta_lambda_max = eig_z.values[n - 1];

    let x = SymMatrix::from_fn(n, |i, j| if i == j { 0.0 } else { z.get(i, j) });
    let eig_x = eig_decompose(&x, DEFAULT_TOL)?;
    let (lmin, lmax) = (eig_x.values[0], eig_x.values[n - 1]);
    let theta_lambda_ratio = if lmax.abs() < 1e-9 && lmin.abs() < 1e-9 {
        // Convention: lambda_max/lambda_min = 0 when X = 0 (cliques).
        1.0
    } else {
        1.0 - lmax / lmin
    };
    Ok((theta_lambda_max, theta_lambda_ratio))
}

/// Builds an orthonormal representation of `G` from an optimal primal
/// matrix `Z̄`: unit vectors with `u_i · u_j = 0` on non-edges whose value
/// `max_i 1/(u_i)_1²` equals ϑ(G).
pub fn orthonormal_representation(g: &Graph, zbar_opt: &SymMatrix) -> Result<(Vec<Vec<f64>>, f64)> {
    let n = g.order();
    if zbar_opt.order() != n {
        return Err(Error::DimensionMismatch("Z̄ order vs graph".into()));
    }
    let theta = zbar_opt.get(0, 0) + 1.0;
    if theta <= 0.0 {
        return Err(Error::DegenerateInput("nonpositive theta in Z̄".into()));
    }
    // Clip solver roundoff below zero before factorizing.
    let v = gram_factor(&psd_clip(zbar_opt), GramMethod::Eigen)
        .map_err(|e| Error::FactorizationFailure(e.to_string()))?;
    let s = 1.0 / theta.sqrt();
    let mut us = Vec::with_capacity(n);
    for i in 0..n {
        let mut u = vec![s];
        u.extend(v.row(i).iter().map(|&x| s * x));
        us.push(u);
    }
    let value = us
        .iter()
        .map(|u| 1.0 / (u[0] * u[0]))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok((us, value))
}

/// Builds an orthonormal representation of the complement graph from a
/// feasible moment matrix of [`build_theta_prime`] and returns it together
/// with its leaning `Σ (e_1 · u_i)²`, which equals the matrix's objective
/// value (ϑ(G) at the optimum).
pub fn leaning_representation(g: &Graph, y_prime: &SymMatrix) -> Result<(Vec<Vec<f64>>, f64)> {
    let n = g.order();
    if y_prime.order() != n + 1 {
        return Err(Error::DimensionMismatch("Y order must be n + 1".into()));
    }
    let v = gram_factor(&psd_clip(y_prime), GramMethod::Eigen)
        .map_err(|e| Error::FactorizationFailure(e.to_string()))?;
    let dim = v.cols;
    let c: Vec<f64> = v.row(0).to_vec();
    let cnorm = crate::symcore::norm2(&c);
    if cnorm < 1e-9 {
        return Err(Error::DegenerateInput("zero anchor row in moment matrix".into()));
    }
    // Householder reflection sending c/|c| to e_1 (orthonormal, so all dot
    // products are preserved).
    let mut w = c.clone();
    for x in w.iter_mut() {
        *x /= cnorm;
    }
    w[0] -= 1.0;
    let wn = crate::symcore::norm2(&w);
    let reflect = |v: &[f64]| -> Vec<f64> {
        if wn < 1e-12 {
            return v.to_vec();
        }
        let k = 2.0 * crate::symcore::dot(&w, v) / (wn * wn);
        v.iter().zip(&w).map(|(x, wi)| x - k * wi).collect()
    };

    let zeros = (0..n)
        .filter(|&i| y_prime.get(i + 1, i + 1) < 1e-9)
        .count();
    let mut us = Vec::with_capacity(n);
    let mut zero_axis = 0usize;
    for i in 0..n {
        let d2 = y_prime.get(i + 1, i + 1);
        let mut u: Vec<f64>;
        if d2 < 1e-9 {
            // Zero-diagonal vertices get a fresh axis each.
            u = vec![0.0; dim + zeros];
            u[dim + zero_axis] = 1.0;
            zero_axis += 1;
        } else {
            let vi = reflect(v.row(i + 1));
            let d = d2.sqrt();
            u = vi.iter().map(|x| x / d).collect();
            u.extend(std::iter::repeat(0.0).take(zeros));
        }
        us.push(u);
    }
    let leaning: f64 = us.iter().map(|u| u[0] * u[0]).sum();
    Ok((us, leaning))
}

fn psd_clip(m: &SymMatrix) -> SymMatrix {
    let n = m.order();
    match eig_decompose(m, DEFAULT_TOL) {
        Ok(eig) => SymMatrix::from_fn(n, |i, j| {
            (0..n)
                .map(|k| eig.values[k].max(0.0) * eig.vectors.get(i, k) * eig.vectors.get(j, k))
                .sum()
        }),
        Err(_) => m.clone(),
    }
}

/// The moment relaxation ψ^r(G): `min y_∅` over moment matrices indexed by
/// clique subsets of size at most `r`, with `y_{i} = 1` and `y_{ij} = 0`
/// on non-edges. ψ¹ equals ϑ(G); ψ^r increases toward χ*(Ḡ).
///
/// Index sets containing a non-edge are fixed to zero up front (positive
/// semidefiniteness forces their rows to vanish), which also makes the
/// reduced program strictly feasible.
pub fn psi_r(g: &Graph, r: usize) -> Result<f64> {
    if !(1..=2).contains(&r) {
        return Err(Error::UnsupportedSize("psi_r supports r in {1, 2}".into()));
    }
    if r == 2 && g.order() > 10 {
        return Err(Error::UnsupportedSize("psi^2 is capped at 10 vertices".into()));
    }
    let n = g.order();

    // Row/column index sets: clique subsets of size <= r (including the
    // empty set), in lexicographic order.
    let mut index_sets: Vec<Vec<usize>> = vec![vec![]];
    for v in 0..n {
        index_sets.push(vec![v]);
    }
    if r >= 2 {
        for (i, j) in g.edges() {
            index_sets.push(vec![i, j]);
        }
    }
    let m = index_sets.len();

    // Union keying: one shared variable per clique union of size >= 2 that
    // is not a single vertex; y_∅ is the objective variable.
    let mut unions: Vec<Vec<usize>> = Vec::new();
    let mut pattern: Vec<Vec<(usize, usize)>> = Vec::new(); // positions per union variable
    let mut fixed = SymMatrix::zeros(m);
    for a in 0..m {
        for b in a..m {
            let mut u: Vec<usize> = index_sets[a].iter().chain(&index_sets[b]).copied().collect();
            u.sort_unstable();
            u.dedup();
            match u.len() {
                0 => {} // y_∅: objective variable, handled separately
                1 => fixed.set(a, b, 1.0),
                _ => {
                    if g.is_clique(&u) {
                        match unions.iter().position(|s| *s == u) {
                            Some(k) => pattern[k].push((a, b)),
                            None => {
                                unions.push(u);
                                pattern.push(vec![(a, b)]);
                            }
                        }
                    }
                    // Non-clique unions stay zero.
                }
            }
        }
    }

    // Primal form: min y_∅ s.t. y_∅ E_00 + Σ_u y_u E_u + fixed ⪰ 0.
    let mut a_mats = Vec::with_capacity(1 + unions.len());
    let mut e00 = SymMatrix::zeros(m);
    e00.set(0, 0, 1.0);
    a_mats.push(BlockMatrix::dense(e00));
    for pos in &pattern {
        let mut e = SymMatrix::zeros(m);
        for &(a, b) in pos {
            e.set(a, b, 1.0);
        }
        a_mats.push(BlockMatrix::dense(e));
    }
    let mut c = vec![1.0];
    c.extend(std::iter::repeat(0.0).take(unions.len()));
    let p = PrimalSdp::new(c, a_mats, BlockMatrix::dense(fixed.scale(-1.0)))?;
    let rep = sdpsolve::solve(&p, &default_opts())?;
    sdpsolve::require_converged(&rep)?;
    Ok(rep.x[0])
}

/// Fractional chromatic number χ*(H) of a graph, via the covering LP over
/// the independent sets of `H` (maximal ones plus singletons suffice),
/// solved as a diagonal-block SDP.
pub fn fractional_chromatic(h: &Graph) -> Result<f64> {
    let n = h.order();
    if n > 12 {
        return Err(Error::UnsupportedSize("fractional chromatic capped at 12 vertices".into()));
    }
    // Columns: maximal independent sets of H plus all singletons.
    let mut cols: Vec<Vec<usize>> = maximal_independent_sets(h);
    for v in 0..n {
        let single = vec![v];
        if !cols.contains(&single) {
            cols.push(single);
        }
    }
    // LP dual: max Σ x_v s.t. Σ_{v in S} x_v <= 1 per column S, x >= 0.
    // As a primal-form SDP: min Σ (-x_v) with diagonal slack blocks.
    let nblocks = cols.len();
    let mut a = Vec::with_capacity(n);
    for v in 0..n {
        let blocks: Vec<SymMatrix> = cols
            .iter()
            .map(|s| SymMatrix::diag(&[if s.contains(&v) { -1.0 } else { 0.0 }]))
            .collect();
        a.push(BlockMatrix::new(blocks));
    }
    let b = BlockMatrix::new(vec![SymMatrix::diag(&[-1.0]); nblocks]);
    let p = PrimalSdp::new(vec![-1.0; n], a, b)?.with_nonneg(0..n);
    let rep = sdpsolve::solve(&p, &default_opts())?;
    sdpsolve::require_converged(&rep)?;
    Ok(-rep.pobj)
}

/// All maximal independent sets (sorted vertex lists) by depth-first
/// enumeration with candidate pruning; fine at desk scale.
fn maximal_independent_sets(g: &Graph) -> Vec<Vec<usize>> {
    let n = g.order();
    let mut out: Vec<Vec<usize>> = Vec::new();
    // Bron-Kerbosch style recursion on the complement relation.
    fn extend(
        g: &Graph,
        current: &mut Vec<usize>,
        candidates: Vec<usize>,
        excluded: Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if candidates.is_empty() && excluded.is_empty() {
            out.push(current.clone());
            return;
        }
        let mut cands = candidates.clone();
        let mut excl = excluded;
        while let Some(&v) = cands.first() {
            let next_c: Vec<usize> = cands
                .iter()
                .copied()
                .filter(|&u| u != v && !g.has_edge(u, v))
                .collect();
            let next_e: Vec<usize> = excl.iter().copied().filter(|&u| !g.has_edge(u, v)).collect();
            current.push(v);
            extend(g, current, next_c, next_e, out);
            current.pop();
            cands.retain(|&u| u != v);
            excl.push(v);
        }
    }
    extend(g, &mut Vec::new(), (0..n).collect(), Vec::new(), &mut out);
    for s in out.iter_mut() {
        s.sort_unstable();
    }
    out.sort();
    out
}

/// Exact maximum stable set size by recursive branching (vertex in/out).
pub fn alpha_bruteforce(g: &Graph) -> Result<usize> {
    if g.order() > 20 {
        return Err(Error::UnsupportedSize("alpha brute force capped at 20 vertices".into()));
    }
    fn best(g: &Graph, avail: &[usize], current: usize, incumbent: &mut usize) {
        if current + avail.len() <= *incumbent {
            return;
        }
        match avail.first() {
            None => {
                *incumbent = (*incumbent).max(current);
            }
            Some(&v) => {
                // Take v.
                let rest: Vec<usize> = avail[1..]
                    .iter()
                    .copied()
                    .filter(|&u| !g.has_edge(u, v))
                    .collect();
                best(g, &rest, current + 1, incumbent);
                // Skip v.
                best(g, &avail[1..], current, incumbent);
            }
        }
    }
    let mut incumbent = 0;
    let verts: Vec<usize> = (0..g.order()).collect();
    best(g, &verts, 0, &mut incumbent);
    Ok(incumbent)
}

/// One maximum stable set (lexicographically smallest among optima).
pub fn max_stable_set(g: &Graph) -> Result<Vec<usize>> {
    let alpha = alpha_bruteforce(g)?;
    fn search(g: &Graph, avail: &[usize], current: &mut Vec<usize>, target: usize) -> Option<Vec<usize>> {
        if current.len() == target {
            return Some(current.clone());
        }
        if current.len() + avail.len() < target {
            return None;
        }
        let v = *avail.first()?;
        let rest: Vec<usize> = avail[1..]
            .iter()
            .copied()
            .filter(|&u| !g.has_edge(u, v))
            .collect();
        current.push(v);
        if let Some(s) = search(g, &rest, current, target) {
            return Some(s);
        }
        current.pop();
        search(g, &avail[1..], current, target)
    }
    let verts: Vec<usize> = (0..g.order()).collect();
    search(g, &verts, &mut Vec::new(), alpha)
        .ok_or_else(|| Error::NumericalTrouble("stable set reconstruction failed".into()))
}

/// Exact minimum clique cover (chromatic number of the complement) by
/// branch-and-bound coloring.
pub fn clique_cover_bruteforce(g: &Graph) -> Result<usize> {
    if g.order() > 12 {
        return Err(Error::UnsupportedSize("clique cover capped at 12 vertices".into()));
    }
    let h = g.complement();
    Ok(chromatic_number(&h))
}

/// Exact chromatic number by iterative deepening on k.
fn chromatic_number(g: &Graph) -> usize {
    let n = g.order();
    if g.num_edges() == 0 {
        return if n == 0 { 0 } else { 1 };
    }
    fn colorable(g: &Graph, k: usize, colors: &mut [usize], v: usize) -> bool {
        if v == g.order() {
            return true;
        }
        // Symmetry breaking: vertex v may only open one new color.
        let used = colors[..v].iter().copied().max().unwrap_or(0);
        for c in 1..=(used + 1).min(k) {
            if g.neighbors(v).iter().all(|&u| u >= v || colors[u] != c) {
                colors[v] = c;
                if colorable(g, k, colors, v + 1) {
                    return true;
                }
                colors[v] = 0;
            }
        }
        false
    }
    for k in 1..=n {
        let mut colors = vec![0; n];
        if colorable(g, k, &mut colors, 0) {
            return k;
        }
    }
    n
}

/// All theta formulations and the combinatorial sandwich data for a graph.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThetaReport {
    pub theta_primal: f64,
    pub theta_dual: f64,
    pub theta_prime: f64,
    pub theta_lambda_max: f64,
    pub theta_lambda_ratio: f64,
    pub theta_orthonormal: f64,
    pub alpha: usize,
    pub clique_cover: usize,
    pub chi_star: f64,
}

/// Computes every formulation and oracle; caps follow the slowest member
/// (clique cover at 12 vertices).
pub fn theta_report(g: &Graph) -> Result<ThetaReport> {
    let (theta_primal, zbar) = theta_primal_value(g)?;
    let (theta_dual, y) = theta_dual_value(g)?;
    let (theta_prime, _) = theta_prime_value(g)?;
    let (theta_lambda_max, theta_lambda_ratio) = lambda_formulation_values(g, &y)?;
    let (_, theta_orthonormal) = orthonormal_representation(g, &zbar)?;
    let alpha = alpha_bruteforce(g)?;
    let clique_cover = clique_cover_bruteforce(g)?;
    let chi_star = fractional_chromatic(&g.complement())?;
    Ok(ThetaReport {
        theta_primal,
        theta_dual,
        theta_prime,
        theta_lambda_max,
        theta_lambda_ratio,
        theta_orthonormal,
        alpha,
        clique_cover,
        chi_star,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_parsing() {
        let g = parse_graph_dimacs("p 5 5\ne 1 2\ne 2 3\ne 3 4\ne 4 5\ne 5 1\n").unwrap();
        assert_eq!(g, Graph::cycle(5));
        let g2 = parse_graph_compact("5;1-2,2-3,3-4,4-5,5-1").unwrap();
        assert_eq!(g2, Graph::cycle(5));
        assert!(parse_graph_dimacs("p 3 1\ne 1 9\n").is_err());
        let round = parse_graph_dimacs(&write_graph_dimacs(&g)).unwrap();
        assert_eq!(round, g);
    }

    #[test]
    fn theta_complete_and_empty() {
        // Complete graphs have theta 1, empty graphs theta n.
        let (t, _) = theta_primal_value(&Graph::complete(4)).unwrap();
        assert!((t - 1.0).abs() < 1e-4, "K4 theta {t}");
        let (t, _) = theta_primal_value(&Graph::empty(3)).unwrap();
        assert!((t - 3.0).abs() < 1e-4, "empty theta {t}");
    }

    #[test]
    fn theta_c5_is_sqrt5() {
        let g = Graph::cycle(5);
        let (tp, _) = theta_primal_value(&g).unwrap();
        let (td, _) = theta_dual_value(&g).unwrap();
        let s5 = 5f64.sqrt();
        assert!((tp - s5).abs() < 1e-4, "primal {tp}");
        assert!((td - s5).abs() < 1e-4, "dual {td}");
    }

    #[test]
    fn theta_dual_stable_witness() {
        // Uniform weight on a maximum stable set is dual-feasible with
        // objective |S|.
        let g = Graph::cycle(5);
        let s = max_stable_set(&g).unwrap();
        assert_eq!(s.len(), 2);
        let mut y = SymMatrix::zeros(5);
        for &i in &s {
            for &j in &s {
                y.set(i, j, 1.0 / s.len() as f64);
            }
        }
        let d = build_theta_dual(&g);
        assert!(d.row_violation(&BlockMatrix::dense(y.clone())).abs() < 1e-12);
        assert!((d.objective(&BlockMatrix::dense(y)) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn theta_prime_values() {
        let (t, _) = theta_prime_value(&Graph::empty(1)).unwrap();
        assert!((t - 1.0).abs() < 1e-4);
        let (t, _) = theta_prime_value(&Graph::empty(3)).unwrap();
        assert!((t - 3.0).abs() < 1e-4);
        let (t, _) = theta_prime_value(&Graph::cycle(5)).unwrap();
        assert!((t - 5f64.sqrt()).abs() < 1e-3);
    }

    #[test]
    fn lambda_values_on_clique_and_empty() {
        let k3 = Graph::complete(3);
        let (_, y) = theta_dual_value(&k3).unwrap();
        let (lm, lr) = lambda_formulation_values(&k3, &y).unwrap();
        assert!((lm - 1.0).abs() < 1e-3, "lambda_max {lm}");
        assert!((lr - 1.0).abs() < 1e-3, "lambda_ratio {lr}");

        let e3 = Graph::empty(3);
        let (_, y) = theta_dual_value(&e3).unwrap();
        let (lm, lr) = lambda_formulation_values(&e3, &y).unwrap();
        assert!((lm - 3.0).abs() < 1e-3);
        assert!((lr - 3.0).abs() < 1e-3);
    }

    #[test]
    fn orthonormal_representation_c5() {
        let g = Graph::cycle(5);
        let (theta, zbar) = theta_primal_value(&g).unwrap();
        let (us, value) = orthonormal_representation(&g, &zbar).unwrap();
        assert!((value - theta).abs() < 1e-3);
        for (i, u) in us.iter().enumerate() {
            assert!((crate::symcore::norm2(u) - 1.0).abs() < 1e-6, "unit {i}");
        }
        for i in 0..5 {
            for j in i + 1..5 {
                if !g.has_edge(i, j) {
                    assert!(crate::symcore::dot(&us[i], &us[j]).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn leaning_representation_matches_theta_prime() {
        let g = Graph::cycle(5);
        let (theta, y) = theta_prime_value(&g).unwrap();
        let (us, leaning) = leaning_representation(&g, &y).unwrap();
        assert!((leaning - theta).abs() < 1e-3, "leaning {leaning} vs {theta}");
        for u in &us {
            assert!((crate::symcore::norm2(u) - 1.0).abs() < 1e-5);
        }
        for (i, j) in g.edges() {
            assert!(crate::symcore::dot(&us[i], &us[j]).abs() < 1e-5);
        }
    }

    #[test]
    fn psi_one_equals_theta() {
        let g = Graph::cycle(5);
        let p1 = psi_r(&g, 1).unwrap();
        assert!((p1 - 5f64.sqrt()).abs() < 1e-3, "psi1 {p1}");
        let kn = Graph::complete(4);
        assert!((psi_r(&kn, 1).unwrap() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn psi_two_between_theta_and_chi_star() {
        let g = Graph::cycle(5);
        let p1 = psi_r(&g, 1).unwrap();
        let p2 = psi_r(&g, 2).unwrap();
        let chi = fractional_chromatic(&g.complement()).unwrap();
        assert!((chi - 2.5).abs() < 1e-4, "chi* {chi}");
        assert!(p2 >= p1 - 1e-4, "monotone {p1} {p2}");
        assert!(p2 <= chi + 1e-4, "bounded {p2} {chi}");
    }

    #[test]
    fn fractional_chromatic_values() {
        assert!((fractional_chromatic(&Graph::complete(4)).unwrap() - 4.0).abs() < 1e-4);
        assert!((fractional_chromatic(&Graph::cycle(5)).unwrap() - 2.5).abs() < 1e-4);
        // Complete bipartite K_{2,2} = C4 has chromatic number 2.
        let k22 = Graph::new(4, [(0, 2), (0, 3), (1, 2), (1, 3)]).unwrap();
        assert!((fractional_chromatic(&k22).unwrap() - 2.0).abs() < 1e-4);
    }

    #[test]
    fn brute_force_oracles() {
        assert_eq!(alpha_bruteforce(&Graph::cycle(5)).unwrap(), 2);
        assert_eq!(clique_cover_bruteforce(&Graph::cycle(5)).unwrap(), 3);
        assert_eq!(alpha_bruteforce(&Graph::complete(6)).unwrap(), 1);
        assert_eq!(clique_cover_bruteforce(&Graph::complete(6)).unwrap(), 1);
        let p = Graph::petersen();
        assert_eq!(alpha_bruteforce(&p).unwrap(), 4);
        assert_eq!(clique_cover_bruteforce(&p).unwrap(), 5);
    }

    #[test]
    fn petersen_theta_is_four() {
        let p = Graph::petersen();
        let (t, _) = theta_prime_value(&p).unwrap();
        assert!((t - 4.0).abs() < 1e-3, "petersen {t}");
    }
}
