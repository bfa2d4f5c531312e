//! SDPA-sparse-style text format for primal-form problems.
//!
//! Layout: a line with the variable count `m`, a line with the number of
//! blocks, a line of block sizes (negative size = diagonal block), a line
//! with the objective vector, then one entry per line as
//! `matno blkno i j value` with 1-based indices; `matno 0` addresses the
//! constant matrix `B`, `matno k` the constraint matrix `A_k`.

use super::{BlockMatrix, PrimalSdp};
use crate::error::{Error, Result};
use crate::symcore::SymMatrix;

pub fn parse_sdpa(text: &str) -> Result<PrimalSdp> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| {
            !l.is_empty() && !l.starts_with('"') && !l.starts_with('*') && !l.starts_with('#')
        });

    let (ln_m, line_m) = lines.next().ok_or_else(|| Error::parse(1, "missing variable count"))?;
    let m: usize = first_token(line_m).parse().map_err(|_| Error::parse(ln_m, "bad variable count"))?;

    let (ln_nb, line_nb) = lines.next().ok_or_else(|| Error::parse(ln_m, "missing block count"))?;
    let nblocks: usize = first_token(line_nb)
        .parse()
        .map_err(|_| Error::parse(ln_nb, "bad block count"))?;

    let (ln_bs, line_bs) = lines.next().ok_or_else(|| Error::parse(ln_nb, "missing block sizes"))?;
    let sizes: Vec<i64> = line_bs
        .split(|c: char| c.is_whitespace() || c == ',' || c == '(' || c == ')' || c == '{' || c == '}')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<i64>().map_err(|_| Error::parse(ln_bs, "bad block size")))
        .collect::<Result<_>>()?;
    if sizes.len() != nblocks {
        return Err(Error::parse(ln_bs, format!("expected {nblocks} block sizes")));
    }
    if sizes.iter().any(|&s| s == 0) {
        return Err(Error::parse(ln_bs, "block size cannot be 0"));
    }

    let (ln_c, line_c) = lines.next().ok_or_else(|| Error::parse(ln_bs, "missing objective vector"))?;
    let c: Vec<f64> = line_c
        .split(|ch: char| ch.is_whitespace() || ch == ',')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| Error::parse(ln_c, "bad objective coefficient")))
        .collect::<Result<_>>()?;
    if c.len() != m {
        return Err(Error::parse(ln_c, format!("expected {m} objective coefficients")));
    }

    let zero = BlockMatrix::new(sizes.iter().map(|&s| SymMatrix::zeros(s.unsigned_abs() as usize)).collect());
    let mut b = zero.clone();
    let mut a: Vec<BlockMatrix> = vec![zero; m];

    for (ln, line) in lines {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 5 {
            return Err(Error::parse(ln, "expected `matno blkno i j value`"));
        }
        let matno: usize = f[0].parse().map_err(|_| Error::parse(ln, "bad matrix number"))?;
        let blkno: usize = f[1].parse().map_err(|_| Error::parse(ln, "bad block number"))?;
        let i: usize = f[2].parse().map_err(|_| Error::parse(ln, "bad row index"))?;
        let j: usize = f[3].parse().map_err(|_| Error::parse(ln, "bad column index"))?;
        let v: f64 = f[4].parse().map_err(|_| Error::parse(ln, "bad value"))?;
        if matno > m {
            return Err(Error::parse(ln, "matrix number out of range"));
        }
        if blkno == 0 || blkno > nblocks {
            return Err(Error::parse(ln, "block number out of range"));
        }
        let size = sizes[blkno - 1];
        let order = size.unsigned_abs() as usize;
        if i == 0 || j == 0 || i > order || j > order {
            return Err(Error::parse(ln, "entry index out of range"));
        }
        if i > j {
            return Err(Error::parse(ln, "entries must address the upper triangle (i <= j)"));
        }
        if size < 0 && i != j {
            return Err(Error::parse(ln, "off-diagonal entry in a diagonal block"));
        }
        let target = if matno == 0 { &mut b } else { &mut a[matno - 1] };
        target.blocks[blkno - 1].set(i - 1, j - 1, v);
    }

    PrimalSdp::new(c, a, b)
}

/// Canonical writer for the format accepted by [`parse_sdpa`].
///
/// A block whose entries are diagonal in `B` and every `A_i` is emitted
/// with a negative size, so `write(parse(write(p))) == write(p)`.
pub fn write_sdpa(p: &PrimalSdp) -> String {
    let m = p.num_vars();
    let nblocks = p.b.blocks.len();
    let diag: Vec<bool> = (0..nblocks)
        .map(|bi| {
            std::iter::once(&p.b)
                .chain(p.a.iter())
                .all(|mat| is_diagonal(&mat.blocks[bi]))
        })
        .collect();

    let mut out = String::new();
    out.push_str(&format!("{m}\n{nblocks}\n"));
    let sizes: Vec<String> = p
        .b
        .blocks
        .iter()
        .zip(&diag)
        .map(|(blk, &d)| {
            let n = blk.order() as i64;
            format!("{}", if d && blk.order() > 1 { -n } else { n })
        })
        .collect();
    out.push_str(&sizes.join(" "));
    out.push('\n');
    let cs: Vec<String> = p.c.iter().map(|&v| crate::symcore::fmt_f64(v)).collect();
    out.push_str(&cs.join(" "));
    out.push('\n');

    let emit = |matno: usize, mat: &BlockMatrix, out: &mut String| {
        for (bi, blk) in mat.blocks.iter().enumerate() {
            for i in 0..blk.order() {
                for j in i..blk.order() {
                    let v = blk.get(i, j);
                    if v != 0.0 {
                        out.push_str(&format!(
                            "{matno} {} {} {} {}\n",
                            bi + 1,
                            i + 1,
                            j + 1,
                            crate::symcore::fmt_f64(v)
                        ));
                    }
                }
            }
        }
    };
    emit(0, &p.b, &mut out);
    for (k, ak) in p.a.iter().enumerate() {
        emit(k + 1, ak, &mut out);
    }
    out
}

fn is_diagonal(m: &SymMatrix) -> bool {
    let n = m.order();
    for i in 0..n {
        for j in i + 1..n {
            if m.get(i, j) != 0.0 {
                return false;
            }
        }
    }
    true
}

fn first_token(line: &str) -> &str {
    line.split_whitespace().next().unwrap_or("")
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "1\n2\n2 -2\n1\n0 1 1 1 -1\n0 2 1 1 -1\n0 2 2 2 -2\n1 1 1 2 1\n1 2 1 1 1\n1 2 2 2 1\n";

    #[test]
    fn parse_two_blocks() {
        let p = parse_sdpa(SAMPLE).unwrap();
        assert_eq!(p.num_vars(), 1);
        assert_eq!(p.b.blocks.len(), 2);
        assert_eq!(p.b.blocks[0].get(0, 0), -1.0);
        assert_eq!(p.a[0].blocks[0].get(0, 1), 1.0);
    }

    #[test]
    fn writer_is_canonical() {
        let p = parse_sdpa(SAMPLE).unwrap();
        let text = write_sdpa(&p);
        let p2 = parse_sdpa(&text).unwrap();
        assert_eq!(write_sdpa(&p2), text);
        assert_eq!(text, SAMPLE);
    }

    #[test]
    fn rejects_offdiagonal_in_diag_block() {
        let bad = "1\n1\n-2\n1\n1 1 1 2 5\n";
        assert!(parse_sdpa(bad).is_err());
    }
}
