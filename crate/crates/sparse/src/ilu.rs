//! Zero-fill incomplete LU factorization.

use crate::{CsrMatrix, SparseError};

/// ILU(0) factors stored in a copy of A's pattern: strictly lower part holds
/// the unit-lower L multipliers, the rest holds U.
#[derive(Clone, Debug)]
pub struct Ilu0 {
    lu: CsrMatrix,
    diag: Vec<usize>,
}

impl Ilu0 {
    pub fn new(a: &CsrMatrix) -> Result<Self, SparseError> {
        let n = a.n();
        let mut lu = a.clone();
        let indptr = lu.indptr().to_vec();
        let indices = lu.indices().to_vec();
        let mut diag = vec![usize::MAX; n];
        for i in 0..n {
            for p in indptr[i]..indptr[i + 1] {
                if indices[p] == i {
                    diag[i] = p;
                }
            }
            if diag[i] == usize::MAX {
                return Err(SparseError::ZeroPivot { row: i });
            }
        }
        let mut marker = vec![usize::MAX; n];
        let vals = lu.data_mut();
        for i in 0..n {
            let (lo, hi) = (indptr[i], indptr[i + 1]);
            for p in lo..hi {
                marker[indices[p]] = p;
            }
            for p in lo..hi {
                let k = indices[p];
                if k >= i {
                    break;
                }
                let pivot = vals[diag[k]];
                if pivot == 0.0 {
                    return Err(SparseError::ZeroPivot { row: k });
                }
                let lik = vals[p] / pivot;
                vals[p] = lik;
                for q in diag[k] + 1..indptr[k + 1] {
                    let m = marker[indices[q]];
                    if m != usize::MAX {
                        vals[m] -= lik * vals[q];
                    }
                }
            }
            for p in lo..hi {
                marker[indices[p]] = usize::MAX;
            }
            if vals[diag[i]] == 0.0 {
                return Err(SparseError::ZeroPivot { row: i });
            }
        }
        Ok(Self { lu, diag })
    }

    pub fn factors(&self) -> &CsrMatrix {
        &self.lu
    }

    /// z = U⁻¹ L⁻¹ r
    pub fn solve(&self, r: &[f64], z: &mut [f64]) {
        let n = self.lu.n();
        let ip = self.lu.indptr();
        let ix = self.lu.indices();
        let v = self.lu.data();
        for i in 0..n {
            let mut s = r[i];
            for p in ip[i]..self.diag[i] {
                s -= v[p] * z[ix[p]];
            }
            z[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = z[i];
            for p in self.diag[i] + 1..ip[i + 1] {
                s -= v[p] * z[ix[p]];
            }
            z[i] = s / v[self.diag[i]];
        }
    }

    /// Product L·U restricted to dense form (test helper for small matrices).
    pub fn lu_product_dense(&self) -> Vec<f64> {
        let n = self.lu.n();
        let d = self.lu.to_dense();
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..=i.min(j) {
                    let l = if k == i { 1.0 } else { d[i * n + k] };
                    s += l * d[k * n + j];
                }
                out[i * n + j] = s;
            }
        }
        out
    }
}
