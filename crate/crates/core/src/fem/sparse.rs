//! Compressed sparse row storage with deterministic assembly.

use serde::Serialize;

use crate::numeric::CompensatedSum;

/// Anything that can apply itself to a vector.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

/// CSR matrix (square unless built with [`SparseOperator::from_triplets_rect`]).
/// Columns within each row are strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SparseOperator {
    n: usize,
    ncols: usize,
    symmetric: bool,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseOperator {
    /// Builds from triplets. Duplicates are summed with compensation in the
    /// order given, so the result depends only on the triplet sequence.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)], symmetric: bool) -> Self {
        Self::from_triplets_rect(n, n, triplets, symmetric)
    }

    pub fn from_triplets_rect(
        n: usize,
        ncols: usize,
        triplets: &[(usize, usize, f64)],
        symmetric: bool,
    ) -> Self {
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        order.sort_by_key(|&k| (triplets[k].0, triplets[k].1, k));
        let mut row_ptr = vec![0; n + 1];
        let mut col_idx = Vec::new();
        let mut vals = Vec::new();
        let mut k = 0;
        while k < order.len() {
            let (r, c, _) = triplets[order[k]];
            let mut acc = CompensatedSum::new();
            while k < order.len() && triplets[order[k]].0 == r && triplets[order[k]].1 == c {
                acc.add(triplets[order[k]].2);
                k += 1;
            }
            col_idx.push(c);
            vals.push(acc.value());
            row_ptr[r + 1] += 1;
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseOperator {
            n,
            ncols,
            symmetric,
            row_ptr,
            col_idx,
            vals,
        }
    }

    pub fn identity(n: usize) -> Self {
        let t: Vec<_> = (0..n).map(|i| (i, i, 1.0)).collect();
        Self::from_triplets(n, &t, true)
    }

    pub fn from_dense(a: &[Vec<f64>], symmetric: bool) -> Self {
        let mut t = Vec::new();
        for (i, row) in a.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    t.push((i, j, v));
                }
            }
        }
        Self::from_triplets(a.len(), &t, symmetric)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn is_symmetric_flag(&self) -> bool {
        self.symmetric
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.col_idx[a..b], &self.vals[a..b])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (c, v) = self.row(i);
        c.binary_search(&j).map(|k| v[k]).unwrap_or(0.0)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.apply(x, &mut y);
        y
    }

    /// `x^T A y`
    pub fn form(&self, x: &[f64], y: &[f64]) -> f64 {
        crate::numeric::dot(x, &self.matvec(y))
    }

    /// Largest `|a_ij - a_ji|` relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        let scale = self
            .vals
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(f64::MIN_POSITIVE);
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                worst = worst.max((a - self.get(j, i)).abs());
            }
        }
        worst / scale
    }

    /// Principal submatrix on the given (ascending) index set.
    pub fn restrict(&self, keep: &[usize]) -> SparseOperator {
        let mut map = vec![usize::MAX; self.n];
        for (k, &i) in keep.iter().enumerate() {
            map[i] = k;
        }
        let mut t = Vec::new();
        for (k, &i) in keep.iter().enumerate() {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                if map[j] != usize::MAX {
                    t.push((k, map[j], a));
                }
            }
        }
        Self::from_triplets(keep.len(), &t, self.symmetric)
    }

    /// Columns `cols` of the rows `rows` (a rectangular block, applied densely by callers).
    pub fn block_apply(&self, rows: &[usize], cols: &[usize], x: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.ncols];
        for (k, &j) in cols.iter().enumerate() {
            full[j] = x[k];
        }
        let y = self.matvec(&full);
        rows.iter().map(|&i| y[i]).collect()
    }

    /// `alpha * self + beta * other` on the same index space.
    pub fn add(&self, alpha: f64, other: &SparseOperator, beta: f64) -> SparseOperator {
        assert_eq!((self.n, self.ncols), (other.n, other.ncols));
        let mut t = Vec::with_capacity(self.nnz() + other.nnz());
        for (m, s) in [(self, alpha), (other, beta)] {
            for i in 0..m.n {
                let (c, v) = m.row(i);
                for (&j, &a) in c.iter().zip(v) {
                    t.push((i, j, s * a));
                }
            }
        }
        Self::from_triplets_rect(self.n, self.ncols, &t, self.symmetric && other.symmetric)
    }

    pub fn transpose(&self) -> SparseOperator {
        let mut t = Vec::with_capacity(self.nnz());
        for i in 0..self.n {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                t.push((j, i, a));
            }
        }
        Self::from_triplets_rect(self.ncols, self.n, &t, self.symmetric)
    }

    /// `D^T diag(w) D` for this (rectangular) `D`.
    pub fn weighted_gram(&self, w: &[f64]) -> SparseOperator {
        let mut t = Vec::new();
        for i in 0..self.n {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                for (&k, &b) in c.iter().zip(v) {
                    t.push((j, k, w[i] * a * b));
                }
            }
        }
        Self::from_triplets(self.ncols, &t, true)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols]; self.n];
        for (i, row) in d.iter_mut().enumerate() {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                row[j] = a;
            }
        }
        d
    }

    /// Coordinate text dump: one `i j value` line per stored entry (0-based).
    pub fn to_coo_string(&self) -> String {
        let mut s = format!("{} {} {}\n", self.n, self.ncols, self.nnz());
        for i in 0..self.n {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                s.push_str(&format!("{i} {j} {a:?}\n"));
            }
        }
        s
    }

    fn row_dot(&self, i: usize, x: &[f64]) -> f64 {
        let (c, v) = self.row(i);
        let mut acc = 0.0;
        for (&j, &a) in c.iter().zip(v) {
            acc += a * x[j];
        }
        acc
    }
}

impl LinearOperator for SparseOperator {
    fn dim(&self) -> usize {
        self.n
    }

    /// Row-wise product; each row is reduced in a fixed order, so parallel
    /// and serial runs agree bit for bit.
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        #[cfg(feature = "parallel")]
        if self.nnz() > 200_000 {
            use rayon::prelude::*;
            y.par_iter_mut()
                .enumerate()
                .for_each(|(i, yi)| *yi = self.row_dot(i, x));
            return;
        }
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row_dot(i, x);
        }
    }
}
