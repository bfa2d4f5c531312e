//! Dense symmetric matrices and the plain rectangular helper type.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Relative asymmetry above which a would-be symmetric input is rejected
/// instead of being silently averaged.
pub const ASYMMETRY_TOL: f64 = 1e-12;

/// Dense real symmetric matrix, row-major storage of all `n * n` entries.
///
/// Construction symmetrizes by averaging `(A + Aᵀ)/2`; inputs whose relative
/// asymmetry exceeds [`ASYMMETRY_TOL`] are rejected so caller bugs surface
/// early.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix {
    n: usize,
    a: Vec<f64>,
}

impl SymMatrix {
    /// Builds a matrix from row-major entries, averaging tiny asymmetry.
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::DimensionMismatch("order must be >= 1".into()));
        }
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for order {}, got {}",
                n * n,
                n,
                entries.len()
            )));
        }
        let mut scale: f64 = 0.0;
        let mut skew: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let x = entries[i * n + j];
                let y = entries[j * n + i];
                skew = skew.max((x - y).abs());
                scale = scale.max(x.abs().max(y.abs()));
            }
        }
        if skew > ASYMMETRY_TOL * scale.max(1.0) {
            return Err(Error::NotSymmetric(skew / scale.max(1.0)));
        }
        let mut a = entries;
        for i in 0..n {
            for j in (i + 1)..n {
                let m = 0.5 * (a[i * n + j] + a[j * n + i]);
                a[i * n + j] = m;
                a[j * n + i] = m;
            }
        }
        Ok(SymMatrix { n, a })
    }

    /// Builds from a callback; only the upper triangle `i <= j` is sampled.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                a[i * n + j] = v;
                a[j * n + i] = v;
            }
        }
        SymMatrix { n, a }
    }

    pub fn zeros(n: usize) -> Self {
        SymMatrix { n, a: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    /// All-ones matrix 𝟙.
    pub fn ones(n: usize) -> Self {
        SymMatrix { n, a: vec![1.0; n * n] }
    }

    pub fn diag(d: &[f64]) -> Self {
        Self::from_fn(d.len(), |i, j| if i == j { d[i] } else { 0.0 })
    }

    /// The matrix with `z` on the diagonal and `-1` everywhere else,
    /// positive semidefinite exactly for `z >= n - 1`.
    pub fn all_ones_gap(n: usize, z: f64) -> Self {
        Self::from_fn(n, |i, j| if i == j { z } else { -1.0 })
    }

    /// Rank-one matrix `v vᵀ`.
    pub fn rank_one(v: &[f64]) -> Self {
        Self::from_fn(v.len(), |i, j| v[i] * v[j])
    }

    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    /// Sets the `(i, j)` and `(j, i)` entries.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] = v;
        self.a[j * self.n + i] = v;
    }

    pub fn entries(&self) -> &[f64] {
        &self.a
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.a[i * self.n..(i + 1) * self.n]
    }

    /// Trace inner product `A ⊙ B = Σᵢⱼ AᵢⱼBᵢⱼ = trace(AB)`.
    pub fn dot(&self, other: &SymMatrix) -> f64 {
        debug_assert_eq!(self.n, other.n);
        self.a.iter().zip(other.a.iter()).map(|(x, y)| x * y).sum()
    }

    /// Quadratic form `xᵀ A x`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            let row = self.row(i);
            let mut ri = 0.0;
            for j in 0..self.n {
                ri += row[j] * x[j];
            }
            s += x[i] * ri;
        }
        s
    }

    /// Matrix-vector product `A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn scale(&self, s: f64) -> SymMatrix {
        SymMatrix {
            n: self.n,
            a: self.a.iter().map(|x| x * s).collect(),
        }
    }

    pub fn add(&self, other: &SymMatrix) -> SymMatrix {
        debug_assert_eq!(self.n, other.n);
        SymMatrix {
            n: self.n,
            a: self.a.iter().zip(&other.a).map(|(x, y)| x + y).collect(),
        }
    }

    pub fn sub(&self, other: &SymMatrix) -> SymMatrix {
        debug_assert_eq!(self.n, other.n);
        SymMatrix {
            n: self.n,
            a: self.a.iter().zip(&other.a).map(|(x, y)| x - y).collect(),
        }
    }

    /// Adds `s * other` in place.
    pub fn axpy(&mut self, s: f64, other: &SymMatrix) {
        debug_assert_eq!(self.n, other.n);
        for (x, y) in self.a.iter_mut().zip(&other.a) {
            *x += s * y;
        }
    }

    /// Principal minor on index set `idx` (rows and columns).
    pub fn principal_minor(&self, idx: &[usize]) -> SymMatrix {
        SymMatrix::from_fn(idx.len(), |i, j| self.get(idx[i], idx[j]))
    }

    /// Symmetric product `A * B` as a plain (generally asymmetric) matrix.
    pub fn mul_mat(&self, other: &SymMatrix) -> Mat {
        let n = self.n;
        let mut out = Mat::zeros(n, n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.get(i, k);
                if aik == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.a[i * n + j] += aik * other.get(k, j);
                }
            }
        }
        out
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.a.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn to_mat(&self) -> Mat {
        Mat {
            rows: self.n,
            cols: self.n,
            a: self.a.clone(),
        }
    }

    /// Congruence transform `Qᵀ A Q` for rectangular `Q` (n×k).
    pub fn congruence(&self, q: &Mat) -> SymMatrix {
        debug_assert_eq!(q.rows, self.n);
        let aq = self.to_mat().mul(q);
        let mut out = SymMatrix::zeros(q.cols);
        for i in 0..q.cols {
            for j in i..q.cols {
                let mut s = 0.0;
                for r in 0..self.n {
                    s += q.get(r, i) * aq.get(r, j);
                }
                out.set(i, j, s);
            }
        }
        out
    }
}

/// Plain dense rectangular matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub(crate) a: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            a: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut a = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            a.extend_from_slice(row);
        }
        Mat { rows: r, cols: c, a }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.a[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "matmul shape");
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let v = self.get(i, k);
                if v == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.a[i * other.cols + j] += v * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len(), "matvec shape");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `Aᵀ x` without forming the transpose.
    pub fn tr_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.rows, x.len(), "matvec shape");
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let xi = x[i];
            if xi == 0.0 {
                continue;
            }
            for j in 0..self.cols {
                out[j] += self.get(i, j) * xi;
            }
        }
        out
    }

    /// `M Mᵀ` as a symmetric matrix.
    pub fn gram_rows(&self) -> SymMatrix {
        SymMatrix::from_fn(self.rows, |i, j| {
            self.row(i).iter().zip(self.row(j)).map(|(a, b)| a * b).sum()
        })
    }

    /// `Mᵀ M` as a symmetric matrix.
    pub fn gram_cols(&self) -> SymMatrix {
        SymMatrix::from_fn(self.cols, |i, j| {
            (0..self.rows).map(|r| self.get(r, i) * self.get(r, j)).sum()
        })
    }

    /// Forces exact symmetry and converts; the input must already be
    /// symmetric up to roundoff.
    pub fn into_sym(self) -> SymMatrix {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        SymMatrix::from_fn(n, |i, j| 0.5 * (self.get(i, j) + self.get(j, i)))
    }

    pub fn max_abs(&self) -> f64 {
        self.a.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// Euclidean norm of a vector.
pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Dot product of two vectors.
pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Parses the matrix text format: a header line `n` (or `n sparse`)
/// followed either by `n` dense rows or by 1-indexed upper-triangle
/// triplets `i j value`.
pub fn parse_matrix_text(text: &str) -> Result<SymMatrix> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "empty matrix file"))?;
    let mut hparts = header.split_whitespace();
    let n: usize = hparts
        .next()
        .unwrap()
        .parse()
        .map_err(|_| Error::parse(hline, "bad matrix order"))?;
    if n == 0 {
        return Err(Error::parse(hline, "order must be >= 1"));
    }
    let sparse = match hparts.next() {
        None => false,
        Some("sparse") => true,
        Some(other) => return Err(Error::parse(hline, format!("unexpected token `{other}`"))),
    };

    if sparse {
        let mut m = SymMatrix::zeros(n);
        for (ln, line) in lines {
            let p: Vec<&str> = line.split_whitespace().collect();
            if p.len() != 3 {
                return Err(Error::parse(ln, "expected `i j value`"));
            }
            let i: usize = p[0].parse().map_err(|_| Error::parse(ln, "bad row index"))?;
            let j: usize = p[1].parse().map_err(|_| Error::parse(ln, "bad column index"))?;
            let v: f64 = p[2].parse().map_err(|_| Error::parse(ln, "bad value"))?;
            if i == 0 || j == 0 || i > n || j > n {
                return Err(Error::parse(ln, "index out of range"));
            }
            if i > j {
                return Err(Error::parse(ln, "triplets must address the upper triangle (i <= j)"));
            }
            m.set(i - 1, j - 1, v);
        }
        Ok(m)
    } else {
        let mut entries = Vec::with_capacity(n * n);
        let mut row_count = 0usize;
        let mut last_line = hline;
        for (ln, line) in lines {
            if row_count == n {
                return Err(Error::parse(ln, "trailing content after matrix rows"));
            }
            let row: std::result::Result<Vec<f64>, _> =
                line.split_whitespace().map(str::parse::<f64>).collect();
            let row = row.map_err(|_| Error::parse(ln, "bad number in matrix row"))?;
            if row.len() != n {
                return Err(Error::parse(ln, format!("expected {} entries in row", n)));
            }
            entries.extend(row);
            row_count += 1;
            last_line = ln;
        }
        if row_count != n {
            return Err(Error::parse(last_line, format!("expected {} rows, got {}", n, row_count)));
        }
        SymMatrix::new(n, entries).map_err(|e| match e {
            Error::NotSymmetric(s) => Error::parse(hline, format!("matrix entries are asymmetric ({s:.3e})")),
            other => other,
        })
    }
}

/// Writes the dense matrix text format accepted by [`parse_matrix_text`].
pub fn write_matrix_text(m: &SymMatrix) -> String {
    let n = m.order();
    let mut out = format!("{n}\n");
    for i in 0..n {
        let row: Vec<String> = (0..n).map(|j| fmt_f64(m.get(i, j))).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub(crate) fn fmt_f64(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetrizes_tiny_asymmetry() {
        let m = SymMatrix::new(2, vec![1.0, 2.0 + 1e-14, 2.0, 3.0]).unwrap();
        assert_eq!(m.get(0, 1), m.get(1, 0));
    }

    #[test]
    fn rejects_gross_asymmetry() {
        let err = SymMatrix::new(2, vec![1.0, 2.0, 2.5, 3.0]).unwrap_err();
        assert!(matches!(err, Error::NotSymmetric(_)));
    }

    #[test]
    fn parse_dense_roundtrip() {
        let text = "2\n4 2\n2 5\n";
        let m = parse_matrix_text(text).unwrap();
        assert_eq!(m.get(0, 1), 2.0);
        assert_eq!(write_matrix_text(&m), text);
    }

    #[test]
    fn parse_sparse_upper_triangle() {
        let m = parse_matrix_text("3 sparse\n1 1 2\n1 3 -1\n").unwrap();
        assert_eq!(m.get(0, 0), 2.0);
        assert_eq!(m.get(2, 0), -1.0);
        assert_eq!(m.get(1, 1), 0.0);
        assert!(parse_matrix_text("3 sparse\n3 1 1\n").is_err());
    }

    #[test]
    fn parse_reports_line_numbers() {
        let err = parse_matrix_text("2\n1 0\n0 x\n").unwrap_err();
        match err {
            Error::ParseError { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }
}
