//! Compressed sparse row matrices.

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::dense::DenseMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    pub nrows: usize,
    pub ncols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<T>,
}

impl<T: Real> CsrMatrix<T> {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CsrMatrix { nrows, ncols, row_ptr: vec![0; nrows + 1], col_idx: Vec::new(), values: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![T::one(); n],
        }
    }

    /// Builds the matrix from `(row, col, value)` triplets. Duplicates are summed in
    /// insertion order, so a fixed triplet sequence always yields the same bits.
    pub fn from_triplets(nrows: usize, ncols: usize, mut triplets: Vec<(usize, usize, T)>) -> Self {
        debug_assert!(triplets.iter().all(|&(i, j, _)| i < nrows && j < ncols));
        triplets.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<T> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in triplets {
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix { nrows, ncols, row_ptr, col_idx, values }
    }

    pub fn from_dense(a: &DenseMatrix<T>) -> Self {
        let mut t = Vec::new();
        for i in 0..a.nrows {
            for j in 0..a.ncols {
                if a[(i, j)] != T::zero() {
                    t.push((i, j, a[(i, j)]));
                }
            }
        }
        Self::from_triplets(a.nrows, a.ncols, t)
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => T::zero(),
        }
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.nrows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = T::zero();
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[k] * x[self.col_idx[k]];
            }
            *yi = s;
        }
    }

    /// `y += alpha · A x`
    pub fn matvec_add(&self, alpha: T, x: &[T], y: &mut [T]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = T::zero();
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[k] * x[self.col_idx[k]];
            }
            *yi += alpha * s;
        }
    }

    pub fn transpose(&self) -> Self {
        let mut count = vec![0usize; self.ncols + 1];
        for &j in &self.col_idx {
            count[j + 1] += 1;
        }
        for j in 0..self.ncols {
            count[j + 1] += count[j];
        }
        let row_ptr = count.clone();
        let mut next = count;
        let mut col_idx = vec![0usize; self.nnz()];
        let mut values = vec![T::zero(); self.nnz()];
        for i in 0..self.nrows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                let dst = next[j];
                col_idx[dst] = i;
                values[dst] = self.values[k];
                next[j] += 1;
            }
        }
        CsrMatrix { nrows: self.ncols, ncols: self.nrows, row_ptr, col_idx, values }
    }

    pub fn scaled(&self, s: T) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// `max |X - Xᵀ|` over all entries.
    pub fn symmetry_defect(&self) -> T {
        let t = self.transpose();
        let mut worst = T::zero();
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                worst = worst.max((v - t.get(i, j)).abs());
            }
            for (j, v) in t.row(i) {
                worst = worst.max((v - self.get(i, j)).abs());
            }
        }
        worst
    }

    pub fn is_symmetric(&self, rel_tol: T) -> bool {
        self.nrows == self.ncols && self.symmetry_defect() <= rel_tol * self.max_abs()
    }

    pub fn to_dense(&self) -> DenseMatrix<T> {
        let mut d = DenseMatrix::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                d[(i, j)] += v;
            }
        }
        d
    }

    /// Rows `rows` and columns `cols` (both given as index lists) of the matrix.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut col_map = vec![usize::MAX; self.ncols];
        for (k, &c) in cols.iter().enumerate() {
            col_map[c] = k;
        }
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for &r in rows {
            let mut entries: Vec<(usize, T)> =
                self.row(r).filter(|(c, _)| col_map[*c] != usize::MAX).map(|(c, v)| (col_map[c], v)).collect();
            entries.sort_by_key(|e| e.0);
            for (c, v) in entries {
                col_idx.push(c);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix { nrows: rows.len(), ncols: cols.len(), row_ptr, col_idx, values }
    }

    /// `self + alpha · other` (same shape).
    pub fn add_scaled(&self, alpha: T, other: &Self) -> Result<Self> {
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return Err(Error::DimensionMismatch { expected: self.nrows, got: other.nrows });
        }
        let mut t = Vec::with_capacity(self.nnz() + other.nnz());
        for i in 0..self.nrows {
            t.extend(self.row(i).map(|(j, v)| (i, j, v)));
            t.extend(other.row(i).map(|(j, v)| (i, j, alpha * v)));
        }
        Ok(Self::from_triplets(self.nrows, self.ncols, t))
    }
}

/// A block of a [`block_matrix`]: position, matrix and scale factor.
pub struct Block<'a, T> {
    pub row: usize,
    pub col: usize,
    pub matrix: &'a CsrMatrix<T>,
    pub scale: T,
}

/// Assembles a monolithic matrix from scaled blocks laid out on the given block sizes.
pub fn block_matrix<T: Real>(row_sizes: &[usize], col_sizes: &[usize], blocks: &[Block<'_, T>]) -> Result<CsrMatrix<T>> {
    let offsets = |sizes: &[usize]| {
        let mut o = vec![0usize; sizes.len() + 1];
        for (k, s) in sizes.iter().enumerate() {
            o[k + 1] = o[k] + s;
        }
        o
    };
    let ro = offsets(row_sizes);
    let co = offsets(col_sizes);
    let mut t = Vec::new();
    for b in blocks {
        if b.matrix.nrows != row_sizes[b.row] {
            return Err(Error::DimensionMismatch { expected: row_sizes[b.row], got: b.matrix.nrows });
        }
        if b.matrix.ncols != col_sizes[b.col] {
            return Err(Error::DimensionMismatch { expected: col_sizes[b.col], got: b.matrix.ncols });
        }
        for i in 0..b.matrix.nrows {
            t.extend(b.matrix.row(i).map(|(j, v)| (ro[b.row] + i, co[b.col] + j, b.scale * v)));
        }
    }
    Ok(CsrMatrix::from_triplets(ro[row_sizes.len()], co[col_sizes.len()], t))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_duplicates_and_sort() {
        let a = CsrMatrix::<f64>::from_triplets(2, 3, vec![(1, 2, 1.0), (0, 1, 2.0), (1, 2, 3.0), (0, 0, 1.0)]);
        assert_eq!(a.row_ptr, vec![0, 2, 3]);
        assert_eq!(a.col_idx, vec![0, 1, 2]);
        assert_eq!(a.values, vec![1.0, 2.0, 4.0]);
        assert_eq!(a.get(1, 2), 4.0);
        assert_eq!(a.get(1, 0), 0.0);
    }

    #[test]
    fn transpose_and_matvec() {
        let a = CsrMatrix::<f64>::from_triplets(2, 3, vec![(0, 0, 1.0), (0, 2, 2.0), (1, 1, 3.0)]);
        assert_eq!(a.matvec(&[1.0, 1.0, 1.0]), vec![3.0, 3.0]);
        let t = a.transpose();
        assert_eq!(t.matvec(&[1.0, 2.0]), vec![1.0, 6.0, 2.0]);
        assert_eq!(t.transpose(), a);
    }

    #[test]
    fn blocks_and_submatrix() {
        let i2 = CsrMatrix::<f64>::identity(2);
        let m = block_matrix(
            &[2, 2],
            &[2, 2],
            &[Block { row: 0, col: 0, matrix: &i2, scale: 1.0 }, Block { row: 1, col: 0, matrix: &i2, scale: -2.0 }],
        )
        .unwrap();
        assert_eq!(m.get(2, 0), -2.0);
        assert_eq!(m.get(3, 1), -2.0);
        let s = m.submatrix(&[2, 3], &[0, 1]);
        assert_eq!(s.to_dense(), i2.scaled(-2.0).to_dense());
        assert!(!m.is_symmetric(1e-12));
        assert!(i2.is_symmetric(0.0));
    }
}
