//! Coordinate-format text export and import (MatrixMarket style, 1-based).

use std::io::{BufRead, Write};

use crate::{CsrMatrix, SparseError};

pub fn write_matrix_market<W: Write>(a: &CsrMatrix, mut w: W) -> std::io::Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", a.n(), a.n(), a.nnz())?;
    for i in 0..a.n() {
        let (cols, vals) = a.row(i);
        for (j, v) in cols.iter().zip(vals) {
            writeln!(w, "{} {} {:e}", i + 1, j + 1, v)?;
        }
    }
    Ok(())
}

pub fn read_matrix_market<R: BufRead>(r: R) -> Result<CsrMatrix, SparseError> {
    let perr = |line: usize, msg: &str| SparseError::Parse { line, msg: msg.to_string() };
    let mut lines = r.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| perr(1, "empty input"))?;
    let header = header.map_err(|e| perr(1, &e.to_string()))?;
    if !header.starts_with("%%MatrixMarket") || !header.contains("coordinate") {
        return Err(perr(1, "expected coordinate header"));
    }
    let mut size: Option<(usize, usize)> = None;
    let mut trip = Vec::new();
    for (no, line) in lines {
        let line = line.map_err(|e| perr(no + 1, &e.to_string()))?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let f: Vec<&str> = t.split_whitespace().collect();
        if size.is_none() {
            if f.len() != 3 {
                return Err(perr(no + 1, "expected `rows cols nnz`"));
            }
            let rows: usize = f[0].parse().map_err(|_| perr(no + 1, "bad row count"))?;
            let cols: usize = f[1].parse().map_err(|_| perr(no + 1, "bad column count"))?;
            if rows != cols {
                return Err(perr(no + 1, "matrix must be square"));
            }
            let nnz: usize = f[2].parse().map_err(|_| perr(no + 1, "bad nnz"))?;
            size = Some((rows, nnz));
            continue;
        }
        if f.len() != 3 {
            return Err(perr(no + 1, "expected `i j value`"));
        }
        let i: usize = f[0].parse().map_err(|_| perr(no + 1, "bad row index"))?;
        let j: usize = f[1].parse().map_err(|_| perr(no + 1, "bad column index"))?;
        let v: f64 = f[2].parse().map_err(|_| perr(no + 1, "bad value"))?;
        let n = size.unwrap().0;
        if i == 0 || j == 0 || i > n || j > n {
            return Err(perr(no + 1, "index out of range"));
        }
        trip.push((i - 1, j - 1, v));
    }
    let (n, _) = size.ok_or_else(|| perr(1, "missing size line"))?;
    CsrMatrix::from_triplets(n, &trip)
}
