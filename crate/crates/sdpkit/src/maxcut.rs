//! Goemans-Williamson Max-Cut: the SDP relaxation `max Σ w_ij (1 - X_ij)/2`
//! over correlation matrices, and randomized hyperplane rounding with the
//! 0.8785 guarantee.

use crate::error::{Error, Result};
use crate::sdpmodel::{BlockMatrix, DualSdp};
use crate::sdpsolve::{self, SolveOptions};
use crate::symcore::{gram_factor, GramMethod, SymMatrix};
use crate::theta::Graph;
use serde::{Deserialize, Serialize};

/// Weighted graph: symmetric nonnegative weights with zero diagonal
/// (`w_ij = 0` for non-edges).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightedGraph {
    n: usize,
    w: SymMatrix,
}

impl WeightedGraph {
    pub fn new(w: SymMatrix) -> Result<Self> {
        let n = w.order();
        for i in 0..n {
            if w.get(i, i) != 0.0 {
                return Err(Error::DimensionMismatch("weight diagonal must be zero".into()));
            }
            for j in 0..n {
                if w.get(i, j) < 0.0 {
                    return Err(Error::DomainError(format!(
                        "negative weight at ({i},{j})"
                    )));
                }
            }
        }
        Ok(WeightedGraph { n, w })
    }

    /// Unit weights on the edges of a simple graph.
    pub fn unit(g: &Graph) -> Self {
        WeightedGraph {
            n: g.order(),
            w: g.adjacency(),
        }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn weights(&self) -> &SymMatrix {
        &self.w
    }

    pub fn total_weight(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in i + 1..self.n {
                s += self.w.get(i, j);
            }
        }
        s
    }

    /// Cut value of a ±1 assignment.
    pub fn cut_value(&self, z: &[i8]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in i + 1..self.n {
                if z[i] != z[j] {
                    s += self.w.get(i, j);
                }
            }
        }
        s
    }
}

/// The relaxation `max Σ_{i<j} w_ij (1 - X_ij)/2, diag(X) = 1, X ⪰ 0`,
/// returned as a dual-form SDP plus the constant `Σ w_ij / 2` so the bound
/// is `objective + constant`.
pub fn build_gw_sdp(g: &WeightedGraph) -> (DualSdp, f64) {
    let n = g.order();
    let b = g.weights().scale(-0.25);
    let mut rows = Vec::with_capacity(n);
    let mut rhs = Vec::with_capacity(n);
    for i in 0..n {
        let mut e = SymMatrix::zeros(n);
        e.set(i, i, 1.0);
        rows.push(BlockMatrix::dense(e));
        rhs.push(1.0);
    }
    let d = DualSdp::new(BlockMatrix::dense(b), rows, rhs).unwrap();
    (d, g.total_weight() / 2.0)
}

/// Solves the relaxation; returns `(sdp_bound, X_opt)`.
pub fn gw_bound(g: &WeightedGraph) -> Result<(f64, SymMatrix)> {
    if g.order() > 40 {
        return Err(Error::UnsupportedSize("GW relaxation capped at order 40".into()));
    }
    let (d, offset) = build_gw_sdp(g);
    let out = sdpsolve::solve_dual(&d, &SolveOptions::default())?;
    sdpsolve::require_converged(&out.report)?;
    Ok((out.objective + offset, out.y.blocks[0].clone()))
}

/// Outcome of randomized hyperplane rounding.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CutResult {
    /// Best assignment found (±1 per vertex).
    pub assignment: Vec<i8>,
    /// Cut value of `assignment`, recomputed exactly.
    pub value: f64,
    pub sdp_bound: f64,
    pub trials: u32,
    pub best_over_trials: f64,
    pub mean_over_trials: f64,
    /// Population variance of the per-trial cut values.
    pub var_over_trials: f64,
}

/// Counter-based generator: every (seed, trial, slot) triple maps to one
/// value, so parallel chunking reproduces the serial stream exactly.
#[derive(Clone, Copy)]
struct CounterRng {
    seed: u64,
}

impl CounterRng {
    fn new(seed: u64) -> Self {
        CounterRng { seed }
    }

    /// SplitMix64 output for one counter value.
    fn raw(&self, counter: u64) -> u64 {
        let mut z = self
            .seed
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(counter.wrapping_mul(0xBF58_476D_1CE4_E5B9))
            .wrapping_add(0x94D0_49BB_1331_11EB);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    fn uniform(&self, counter: u64) -> f64 {
        // 53 significant bits in (0, 1].
        (((self.raw(counter) >> 11) as f64) + 1.0) / (1u64 << 53) as f64
    }

    /// Standard normal via Box-Muller on two counter slots.
    fn normal(&self, counter: u64) -> f64 {
        let u1 = self.uniform(2 * counter);
        let u2 = self.uniform(2 * counter + 1);
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }
}

/// Rounds a PSD correlation matrix to ±1 cuts by random hyperplanes.
///
/// `X` is Gram-factorized through its eigendecomposition (tolerant of rank
/// deficiency), each trial draws a standard-normal direction from the
/// counter RNG keyed by `(seed, trial)`, and vertices are signed by the
/// side of the hyperplane. Reports the best and mean cut; everything is
/// reproducible for a given seed regardless of `threads`.
pub fn round_hyperplane(
    x: &SymMatrix,
    g: &WeightedGraph,
    seed: u64,
    trials: u32,
    threads: usize,
) -> Result<CutResult> {
    let n = g.order();
    if x.order() != n {
        return Err(Error::DimensionMismatch("X order vs graph".into()));
    }
    for i in 0..n {
        if (x.get(i, i) - 1.0).abs() > 1e-6 {
            return Err(Error::DomainError(format!("X diagonal at {i} is not 1")));
        }
    }
    if trials == 0 {
        return Err(Error::DomainError("at least one trial required".into()));
    }
    let v = gram_factor(x, GramMethod::Eigen)
        .map_err(|e| Error::FactorizationFailure(e.to_string()))?;
    let dim = v.cols;
    let rng = CounterRng::new(seed);

    // One trial: embed, draw the direction, sign, and score.
    let run_trial = |t: u32| -> (f64, Vec<i8>) {
        let base = t as u64 * dim as u64;
        let dir: Vec<f64> = (0..dim).map(|k| rng.normal(base + k as u64)).collect();
        let z: Vec<i8> = (0..n)
            .map(|i| {
                let dot = crate::symcore::dot(v.row(i), &dir);
                if dot <= 0.0 {
                    -1
                } else {
                    1
                }
            })
            .collect();
        (g.cut_value(&z), z)
    };

    // Deterministic reduction: max by (value, lower trial index wins ties).
    let reduce = |range: std::ops::Range<u32>| -> (f64, u32, Vec<i8>, f64, f64) {
        let mut best_val = f64::NEG_INFINITY;
        let mut best_t = 0u32;
        let mut best_z: Vec<i8> = Vec::new();
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for t in range {
            let (val, z) = run_trial(t);
            sum += val;
            sumsq += val * val;
            if val > best_val {
                best_val = val;
                best_t = t;
                best_z = z;
            }
        }
        (best_val, best_t, best_z, sum, sumsq)
    };

    let threads = threads.max(1).min(trials as usize);
    let (best_val, _, best_z, sum, sumsq) = if threads == 1 {
        reduce(0..trials)
    } else {
        let chunk = trials.div_ceil(threads as u32);
        let results: Vec<(f64, u32, Vec<i8>, f64, f64)> = std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for k in 0..threads as u32 {
                let lo = k * chunk;
                let hi = ((k + 1) * chunk).min(trials);
                if lo < hi {
                    handles.push(scope.spawn(move || reduce(lo..hi)));
                }
            }
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        });
        let mut total = 0.0;
        let mut totalsq = 0.0;
        let mut best: Option<(f64, u32, Vec<i8>)> = None;
        for (val, t, z, sum, sumsq) in results {
            total += sum;
            totalsq += sumsq;
            let better = match &best {
                None => true,
                Some((bv, bt, _)) => val > *bv || (val == *bv && t < *bt),
            };
            if better {
                best = Some((val, t, z));
            }
        }
        let (val, t, z) = best.unwrap();
        (val, t, z, total, totalsq)
    };

    let (sdp_bound, _) = gw_bound(g)?;
    let mean = sum / trials as f64;
    Ok(CutResult {
        value: g.cut_value(&best_z),
        assignment: best_z,
        sdp_bound,
        trials,
        best_over_trials: best_val,
        mean_over_trials: mean,
        var_over_trials: (sumsq / trials as f64 - mean * mean).max(0.0),
    })
}

/// Closed-form expected cut of hyperplane rounding:
/// `Σ_{i<j} w_ij arccos(X_ij) / π`.
pub fn expected_cut(x: &SymMatrix, g: &WeightedGraph) -> f64 {
    let n = g.order();
    let mut s = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let w = g.weights().get(i, j);
            if w != 0.0 {
                s += w * x.get(i, j).clamp(-1.0, 1.0).acos() / std::f64::consts::PI;
            }
        }
    }
    s
}

/// Exact maximum cut by enumerating the 2^(n-1) bipartitions.
pub fn maxcut_bruteforce(g: &WeightedGraph) -> Result<f64> {
    let n = g.order();
    if n > 22 {
        return Err(Error::UnsupportedSize("max-cut brute force capped at 22 vertices".into()));
    }
    if n == 1 {
        return Ok(0.0);
    }
    let mut best = 0.0f64;
    let mut z = vec![1i8; n];
    for mask in 0u64..(1 << (n - 1)) {
        for i in 0..n - 1 {
            z[i + 1] = if (mask >> i) & 1 == 1 { -1 } else { 1 };
        }
        best = best.max(g.cut_value(&z));
    }
    Ok(best)
}

/// The rounding-ratio function `f(α) = (2/π) α / (1 - cos α)` on `(0, π]`;
/// its minimum (≈ 0.87856 near α ≈ 2.3311) is the GW guarantee.
pub fn gw_ratio_function(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= std::f64::consts::PI) {
        return Err(Error::DomainError(format!("alpha {alpha} outside (0, pi]")));
    }
    Ok(2.0 / std::f64::consts::PI * alpha / (1.0 - alpha.cos()))
}

/// Parses a weighted graph: `p <n> <m>` header then `e i j w` lines.
pub fn parse_weighted_graph(text: &str) -> Result<WeightedGraph> {
    let mut n = None;
    let mut entries: Vec<(usize, usize, f64, usize)> = Vec::new();
    for (ln0, raw) in text.lines().enumerate() {
        let ln = ln0 + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        match f[0] {
            "p" => {
                let idx = if f.len() > 1 && f[1].chars().all(|c| c.is_ascii_digit()) { 1 } else { 2 };
                if f.len() <= idx {
                    return Err(Error::parse(ln, "missing vertex count"));
                }
                n = Some(f[idx].parse::<usize>().map_err(|_| Error::parse(ln, "bad vertex count"))?);
            }
            "e" => {
                if f.len() != 4 {
                    return Err(Error::parse(ln, "expected `e i j w`"));
                }
                let i: usize = f[1].parse().map_err(|_| Error::parse(ln, "bad endpoint"))?;
                let j: usize = f[2].parse().map_err(|_| Error::parse(ln, "bad endpoint"))?;
                let w: f64 = f[3].parse().map_err(|_| Error::parse(ln, "bad weight"))?;
                if i == 0 || j == 0 {
                    return Err(Error::parse(ln, "vertices are 1-based"));
                }
                entries.push((i - 1, j - 1, w, ln));
            }
            other => return Err(Error::parse(ln, format!("unknown record `{other}`"))),
        }
    }
    let n = n.ok_or_else(|| Error::parse(1, "missing `p` header"))?;
    let mut w = SymMatrix::zeros(n);
    for (i, j, val, ln) in entries {
        if i >= n || j >= n {
            return Err(Error::parse(ln, "edge endpoint out of range"));
        }
        if i == j {
            return Err(Error::parse(ln, "loops are not allowed"));
        }
        if val < 0.0 {
            return Err(Error::parse(ln, "weights must be nonnegative"));
        }
        w.set(i, j, val);
    }
    WeightedGraph::new(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_function_values() {
        assert!((gw_ratio_function(std::f64::consts::PI).unwrap() - 1.0).abs() < 1e-12);
        let v = gw_ratio_function(2.3311).unwrap();
        assert!(v > 0.878567 && v < 0.8787, "f(2.3311) = {v}");
        let v = gw_ratio_function(0.1).unwrap();
        assert!((v - 2.0 / std::f64::consts::PI * 0.1 / (1.0 - 0.1f64.cos())).abs() < 1e-12);
        assert!((v - 12.743).abs() < 0.001, "f(0.1) = {v}");
        assert!(gw_ratio_function(0.0).is_err());
        assert!(gw_ratio_function(3.5).is_err());
        // Grid minimum stays above the guarantee and sits near 2.3311.
        let mut best = (f64::INFINITY, 0.0);
        let mut a = 1e-4;
        while a <= std::f64::consts::PI {
            let v = gw_ratio_function(a).unwrap();
            if v < best.0 {
                best = (v, a);
            }
            a += 1e-4;
        }
        assert!(best.0 > 0.878567, "grid min {}", best.0);
        assert!((best.1 - 2.3311).abs() < 1e-2, "argmin {}", best.1);
    }

    #[test]
    fn brute_force_examples() {
        let k2 = WeightedGraph::unit(&Graph::complete(2));
        assert_eq!(maxcut_bruteforce(&k2).unwrap(), 1.0);
        let c5 = WeightedGraph::unit(&Graph::cycle(5));
        assert_eq!(maxcut_bruteforce(&c5).unwrap(), 4.0);
        let k4 = WeightedGraph::unit(&Graph::complete(4));
        assert_eq!(maxcut_bruteforce(&k4).unwrap(), 4.0);
    }

    #[test]
    fn gw_bound_examples() {
        let k2 = WeightedGraph::unit(&Graph::complete(2));
        let (bound, x) = gw_bound(&k2).unwrap();
        assert!((bound - 1.0).abs() < 1e-5, "K2 bound {bound}");
        assert!((x.get(0, 1) + 1.0).abs() < 1e-4);

        // K3: X_ij = -1/2 achieves 9/4.
        let k3 = WeightedGraph::unit(&Graph::complete(3));
        let (bound, x) = gw_bound(&k3).unwrap();
        assert!((bound - 2.25).abs() < 1e-4, "K3 bound {bound}");
        assert!((x.get(0, 1) + 0.5).abs() < 1e-3);

        // C5: known value (5/2)(1 + cos(pi/5)).
        let c5 = WeightedGraph::unit(&Graph::cycle(5));
        let (bound, _) = gw_bound(&c5).unwrap();
        let expect = 2.5 * (1.0 + (std::f64::consts::PI / 5.0).cos());
        assert!((bound - expect).abs() < 1e-3, "C5 bound {bound} vs {expect}");
        assert!(bound >= 4.0);
    }

    #[test]
    fn rounding_identity_and_ones() {
        // X = I: orthogonal vectors, each edge cut with probability 1/2.
        let k2 = WeightedGraph::unit(&Graph::complete(2));
        let r = round_hyperplane(&SymMatrix::identity(2), &k2, 7, 20_000, 1).unwrap();
        assert!((r.mean_over_trials - 0.5).abs() < 0.01, "mean {}", r.mean_over_trials);
        // X = ones: all vectors identical, every cut is empty.
        let r = round_hyperplane(&SymMatrix::ones(2), &k2, 7, 100, 1).unwrap();
        assert_eq!(r.best_over_trials, 0.0);
        assert_eq!(r.mean_over_trials, 0.0);
    }

    #[test]
    fn rounding_c5_guarantee() {
        let c5 = WeightedGraph::unit(&Graph::cycle(5));
        let (bound, x) = gw_bound(&c5).unwrap();
        let r = round_hyperplane(&x, &c5, 42, 20_000, 1).unwrap();
        assert!(r.best_over_trials <= bound + 1e-5);
        assert_eq!(r.best_over_trials, 4.0);
        assert!(r.mean_over_trials >= 0.8785 * bound - 0.02, "mean {}", r.mean_over_trials);
        // Mean matches the closed-form expectation.
        let expect = expected_cut(&x, &c5);
        assert!((r.mean_over_trials - expect).abs() < 0.05, "{} vs {expect}", r.mean_over_trials);
    }

    #[test]
    fn rounding_is_deterministic_across_threads() {
        let c5 = WeightedGraph::unit(&Graph::cycle(5));
        let (_, x) = gw_bound(&c5).unwrap();
        let a = round_hyperplane(&x, &c5, 3, 501, 1).unwrap();
        let b = round_hyperplane(&x, &c5, 3, 501, 4).unwrap();
        assert_eq!(a.assignment, b.assignment);
        assert_eq!(a.best_over_trials, b.best_over_trials);
        assert!((a.mean_over_trials - b.mean_over_trials).abs() < 1e-12);
        let c = round_hyperplane(&x, &c5, 4, 501, 1).unwrap();
        assert!(c.assignment != a.assignment || c.mean_over_trials != a.mean_over_trials);
    }

    #[test]
    fn weighted_graph_parsing() {
        let g = parse_weighted_graph("p 3 2\ne 1 2 1.5\ne 2 3 2\n").unwrap();
        assert_eq!(g.order(), 3);
        assert_eq!(g.weights().get(0, 1), 1.5);
        assert_eq!(g.total_weight(), 3.5);
        assert!(parse_weighted_graph("p 2 1\ne 1 2 -1\n").is_err());
    }
}
