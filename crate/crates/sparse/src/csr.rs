//! Compressed sparse row storage.

use crate::{Exec, SparseError};

/// Square matrix in CSR form with sorted, duplicate-free column indices.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a zero-valued matrix from per-row column lists (sorted and deduplicated here).
    pub fn from_pattern(n: usize, mut rows: Vec<Vec<usize>>) -> Result<Self, SparseError> {
        if rows.len() != n {
            return Err(SparseError::Dimension { expected: n, found: rows.len() });
        }
        let mut indptr = Vec::with_capacity(n + 1);
        indptr.push(0);
        let mut indices = Vec::new();
        for row in rows.iter_mut() {
            row.sort_unstable();
            row.dedup();
            if let Some(&c) = row.last() {
                if c >= n {
                    return Err(SparseError::IndexOutOfRange { index: c, n });
                }
            }
            indices.extend_from_slice(row);
            indptr.push(indices.len());
        }
        let data = vec![0.0; indices.len()];
        Ok(Self { n, indptr, indices, data })
    }

    /// Sums duplicate triplets.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self, SparseError> {
        let mut rows = vec![Vec::new(); n];
        for &(i, j, _) in triplets {
            if i >= n || j >= n {
                return Err(SparseError::IndexOutOfRange { index: i.max(j), n });
            }
            rows[i].push(j);
        }
        let mut m = Self::from_pattern(n, rows)?;
        for &(i, j, v) in triplets {
            m.add(i, j, v)?;
        }
        Ok(m)
    }

    pub fn from_dense(n: usize, a: &[f64]) -> Self {
        let mut trip = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if a[i * n + j] != 0.0 || i == j {
                    trip.push((i, j, a[i * n + j]));
                }
            }
        }
        Self::from_triplets(n, &trip).expect("indices in range")
    }

    pub fn identity(n: usize) -> Self {
        let trip: Vec<_> = (0..n).map(|i| (i, i, 1.0)).collect();
        Self::from_triplets(n, &trip).expect("indices in range")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn indptr(&self) -> &[usize] {
        &self.indptr
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.indptr[i]..self.indptr[i + 1];
        (&self.indices[r.clone()], &self.data[r])
    }

    /// Position of entry (i, j) in the value array.
    pub fn position(&self, i: usize, j: usize) -> Option<usize> {
        let lo = self.indptr[i];
        let cols = &self.indices[lo..self.indptr[i + 1]];
        cols.binary_search(&j).ok().map(|p| lo + p)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j).map_or(0.0, |p| self.data[p])
    }

    /// Adds into an existing structural entry.
    pub fn add(&mut self, i: usize, j: usize, v: f64) -> Result<(), SparseError> {
        match self.position(i, j) {
            Some(p) => {
                self.data[p] += v;
                Ok(())
            }
            None => Err(SparseError::NotInPattern { row: i, col: j }),
        }
    }

    /// Adds a dense block `vals` (row-major, rows.len() x cols.len()); entries outside the pattern are skipped.
    pub fn add_block(&mut self, rows: &[usize], cols: &[usize], vals: &[f64]) {
        let nc = cols.len();
        for (a, &i) in rows.iter().enumerate() {
            let lo = self.indptr[i];
            let hi = self.indptr[i + 1];
            let rc = &self.indices[lo..hi];
            for (b, &j) in cols.iter().enumerate() {
                if let Ok(p) = rc.binary_search(&j) {
                    self.data[lo + p] += vals[a * nc + b];
                }
            }
        }
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        self.matvec_with(Exec::default(), x, y)
    }

    pub fn matvec_with(&self, exec: Exec, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        let row_dot = |i: usize| {
            let mut s = 0.0;
            for p in self.indptr[i]..self.indptr[i + 1] {
                s += self.data[p] * x[self.indices[p]];
            }
            s
        };
        match exec {
            #[cfg(feature = "parallel")]
            Exec::Par => {
                use rayon::prelude::*;
                y.par_chunks_mut(1024).enumerate().for_each(|(c, chunk)| {
                    let base = c * 1024;
                    for (o, yi) in chunk.iter_mut().enumerate() {
                        *yi = row_dot(base + o);
                    }
                });
            }
            _ => {
                for (i, yi) in y.iter_mut().enumerate() {
                    *yi = row_dot(i);
                }
            }
        }
    }

    /// y = b - A x
    pub fn residual(&self, b: &[f64], x: &[f64], r: &mut [f64]) {
        self.matvec(x, r);
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut count = vec![0usize; n + 1];
        for &j in &self.indices {
            count[j + 1] += 1;
        }
        for i in 0..n {
            count[i + 1] += count[i];
        }
        let indptr = count.clone();
        let mut next = count;
        let mut indices = vec![0; self.nnz()];
        let mut data = vec![0.0; self.nnz()];
        for i in 0..n {
            for p in self.indptr[i]..self.indptr[i + 1] {
                let j = self.indices[p];
                let q = next[j];
                next[j] += 1;
                indices[q] = i;
                data[q] = self.data[p];
            }
        }
        Self { n, indptr, indices, data }
    }

    pub fn is_structurally_symmetric(&self) -> bool {
        let t = self.transpose();
        t.indptr == self.indptr && t.indices == self.indices
    }

    /// Principal submatrix A[map, map]; `map[c]` is the fine index of coarse index c.
    pub fn extract(&self, map: &[usize]) -> Self {
        let mut inv = vec![usize::MAX; self.n];
        for (c, &f) in map.iter().enumerate() {
            inv[f] = c;
        }
        let mut indptr = Vec::with_capacity(map.len() + 1);
        indptr.push(0);
        let mut indices = Vec::new();
        let mut data = Vec::new();
        let mut buf: Vec<(usize, f64)> = Vec::new();
        for &f in map {
            buf.clear();
            for p in self.indptr[f]..self.indptr[f + 1] {
                let c = inv[self.indices[p]];
                if c != usize::MAX {
                    buf.push((c, self.data[p]));
                }
            }
            buf.sort_unstable_by_key(|e| e.0);
            for &(c, v) in &buf {
                indices.push(c);
                data.push(v);
            }
            indptr.push(indices.len());
        }
        Self { n: map.len(), indptr, indices, data }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.n;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for p in self.indptr[i]..self.indptr[i + 1] {
                a[i * n + self.indices[p]] = self.data[p];
            }
        }
        a
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Symmetric adjacency lists (diagonal removed) of the pattern of A + Aᵀ.
    pub fn symmetric_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for i in 0..self.n {
            for &j in &self.indices[self.indptr[i]..self.indptr[i + 1]] {
                if i != j {
                    adj[i].push(j);
                    adj[j].push(i);
                }
            }
        }
        for a in adj.iter_mut() {
            a.sort_unstable();
            a.dedup();
        }
        adj
    }
}
