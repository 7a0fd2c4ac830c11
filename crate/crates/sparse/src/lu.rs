//! Left-looking sparse LU (Gilbert–Peierls) with threshold partial pivoting.
//!
//! Columns are processed in a fill-reducing order; within each column the
//! diagonal entry of the symmetrically permuted matrix is kept as pivot
//! whenever it is within `PIVOT_TOL` of the column maximum. Otherwise the
//! acceptable row whose column comes next in the order is taken, so rows
//! with a zero diagonal (mean-pressure rows of condensed saddle-point
//! systems) are pivoted locally instead of being shifted.

use crate::{CsrMatrix, Ordering, SparseError};

const PIVOT_TOL: f64 = 1e-3;
const WEAK_DIAG: f64 = 1e-10;

/// For every row with a negligible diagonal, the columns that couple to it
/// with a non-negligible value; empty for all other rows.
fn weak_diagonal_release(a: &CsrMatrix) -> Vec<Vec<usize>> {
    let (ip, idx, val) = (a.indptr(), a.indices(), a.data());
    (0..a.n())
        .map(|i| {
            let row = ip[i]..ip[i + 1];
            let m = row.clone().map(|p| val[p].abs()).fold(0.0, f64::max);
            let d = row.clone().find(|&p| idx[p] == i).map(|p| val[p].abs()).unwrap_or(0.0);
            if d > WEAK_DIAG * m {
                return Vec::new();
            }
            row.filter(|&p| idx[p] != i && val[p].abs() > WEAK_DIAG * m).map(|p| idx[p]).collect()
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct SparseLu {
    n: usize,
    /// column permutation: step k eliminates column q[k]
    q: Vec<usize>,
    /// row permutation: original row i becomes pivot step pinv[i]
    pinv: Vec<usize>,
    l_ptr: Vec<usize>,
    l_idx: Vec<usize>,
    l_val: Vec<f64>,
    u_ptr: Vec<usize>,
    u_idx: Vec<usize>,
    u_val: Vec<f64>,
}

impl SparseLu {
    pub fn new(a: &CsrMatrix, ordering: Ordering) -> Result<Self, SparseError> {
        let adj = a.symmetric_adjacency();
        let q = match ordering {
            Ordering::MinimumDegree => {
                crate::mindeg::minimum_degree_delayed(&adj, &weak_diagonal_release(a))
            }
            o => o.permutation(&adj),
        };
        Self::with_permutation(a, q)
    }

    pub fn with_permutation(a: &CsrMatrix, q: Vec<usize>) -> Result<Self, SparseError> {
        let n = a.n();
        if q.len() != n {
            return Err(SparseError::Dimension { expected: n, found: q.len() });
        }
        // CSC of A is the CSR of Aᵀ
        let at = a.transpose();
        let (cp, ci, cv) = (at.indptr(), at.indices(), at.data());

        const NONE: usize = usize::MAX;
        let mut pinv = vec![NONE; n];
        let mut l_ptr = vec![0usize];
        let mut l_idx: Vec<usize> = Vec::new();
        let mut l_val: Vec<f64> = Vec::new();
        let mut u_ptr = vec![0usize];
        let mut u_idx: Vec<usize> = Vec::new();
        let mut u_val: Vec<f64> = Vec::new();

        let mut qinv = vec![0usize; n];
        for (k, &c) in q.iter().enumerate() {
            qinv[c] = k;
        }
        let mut x = vec![0.0; n];
        let mut mark = vec![false; n];
        let mut post: Vec<usize> = Vec::with_capacity(n);
        let mut stack: Vec<(usize, usize)> = Vec::new();

        for k in 0..n {
            let col = q[k];
            // symbolic: reach of A(:,col) in the graph of L
            post.clear();
            for &start in &ci[cp[col]..cp[col + 1]] {
                if mark[start] {
                    continue;
                }
                mark[start] = true;
                let p0 = if pinv[start] == NONE { 0 } else { l_ptr[pinv[start]] };
                stack.push((start, p0));
                while let Some(&mut (j, ref mut p)) = stack.last_mut() {
                    let jn = pinv[j];
                    let end = if jn == NONE { 0 } else { l_ptr[jn + 1] };
                    let mut pushed = None;
                    while *p < end {
                        let i = l_idx[*p];
                        *p += 1;
                        if !mark[i] {
                            pushed = Some(i);
                            break;
                        }
                    }
                    match pushed {
                        Some(i) => {
                            mark[i] = true;
                            let pi = if pinv[i] == NONE { 0 } else { l_ptr[pinv[i]] };
                            stack.push((i, pi));
                        }
                        None => {
                            stack.pop();
                            post.push(j);
                        }
                    }
                }
            }
            // numeric: x = L \ A(:,col) in topological order
            for &i in &post {
                x[i] = 0.0;
            }
            for p in cp[col]..cp[col + 1] {
                x[ci[p]] = cv[p];
            }
            for &j in post.iter().rev() {
                let jn = pinv[j];
                if jn == NONE {
                    continue;
                }
                let xj = x[j];
                if xj != 0.0 {
                    for p in l_ptr[jn]..l_ptr[jn + 1] {
                        x[l_idx[p]] -= l_val[p] * xj;
                    }
                }
            }
            // pivot
            let mut ipiv = NONE;
            let mut amax = -1.0;
            for &i in &post {
                if pinv[i] == NONE && x[i].abs() > amax {
                    amax = x[i].abs();
                    ipiv = i;
                }
            }
            if ipiv == NONE || amax <= 0.0 {
                for &i in &post {
                    mark[i] = false;
                }
                return Err(SparseError::Singular { step: k });
            }
            if mark[col] && pinv[col] == NONE && x[col].abs() >= PIVOT_TOL * amax {
                ipiv = col;
            } else {
                // acceptable row whose own column is eliminated next: keeps
                // the swap local, like a 2x2 pivot with that column
                let mut best = usize::MAX;
                for &i in &post {
                    if pinv[i] == NONE && x[i].abs() >= PIVOT_TOL * amax && qinv[i] < best {
                        best = qinv[i];
                        ipiv = i;
                    }
                }
            }
            let pivot = x[ipiv];
            for &i in &post {
                if pinv[i] != NONE {
                    u_idx.push(pinv[i]);
                    u_val.push(x[i]);
                }
            }
            u_idx.push(k);
            u_val.push(pivot);
            u_ptr.push(u_idx.len());
            pinv[ipiv] = k;
            for &i in &post {
                if pinv[i] == NONE {
                    l_idx.push(i);
                    l_val.push(x[i] / pivot);
                }
            }
            l_ptr.push(l_idx.len());
            for &i in &post {
                mark[i] = false;
                x[i] = 0.0;
            }
        }
        for r in l_idx.iter_mut() {
            *r = pinv[*r];
        }
        Ok(Self { n, q, pinv, l_ptr, l_idx, l_val, u_ptr, u_idx, u_val })
    }

    /// Stored entries of L (strictly lower) plus U (with diagonal).
    pub fn fill(&self) -> usize {
        self.l_idx.len() + self.u_idx.len()
    }

    /// Column elimination order, `q[step] = column`.
    pub fn column_order(&self) -> &[usize] {
        &self.q
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64], x: &mut [f64]) {
        let n = self.n;
        let mut y = vec![0.0; n];
        for i in 0..n {
            y[self.pinv[i]] = b[i];
        }
        for k in 0..n {
            let yk = y[k];
            if yk != 0.0 {
                for p in self.l_ptr[k]..self.l_ptr[k + 1] {
                    y[self.l_idx[p]] -= self.l_val[p] * yk;
                }
            }
        }
        for k in (0..n).rev() {
            let d = self.u_ptr[k + 1] - 1;
            y[k] /= self.u_val[d];
            let yk = y[k];
            if yk != 0.0 {
                for p in self.u_ptr[k]..d {
                    y[self.u_idx[p]] -= self.u_val[p] * yk;
                }
            }
        }
        for k in 0..n {
            x[self.q[k]] = y[k];
        }
    }
}
