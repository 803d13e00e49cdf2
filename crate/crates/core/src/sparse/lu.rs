//! Left-looking sparse LU with threshold partial pivoting.
//!
//! Columns are processed in a fill-reducing order. Each column is obtained by a
//! sparse triangular solve whose nonzero pattern comes from a depth-first reach
//! through the columns of `L` computed so far. The pivot is the diagonal entry of
//! the permuted matrix whenever it is within `threshold` of the largest candidate.

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::csr::CsrMatrix;
use super::ordering::{compute_ordering, Graph, OrderingKind};

pub const DEFAULT_PIVOT_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone)]
pub struct SparseLu<T> {
    n: usize,
    /// Column order: column `k` of the factor is column `q[k]` of the input.
    q: Vec<usize>,
    /// Row permutation: input row `i` became pivot row `pinv[i]`.
    pinv: Vec<usize>,
    l_ptr: Vec<usize>,
    l_idx: Vec<u32>,
    l_val: Vec<T>,
    u_ptr: Vec<usize>,
    u_idx: Vec<u32>,
    u_val: Vec<T>,
    u_diag: Vec<T>,
    off_diagonal_pivots: usize,
}

impl<T: Real> SparseLu<T> {
    /// Factorizes with graph nested dissection.
    pub fn factorize(a: &CsrMatrix<T>) -> Result<Self> {
        Self::factorize_with(a, OrderingKind::GraphDissection, None)
    }

    pub fn factorize_with(a: &CsrMatrix<T>, kind: OrderingKind, coords: Option<&[[f64; 2]]>) -> Result<Self> {
        if a.nrows != a.ncols {
            return Err(Error::DimensionMismatch { expected: a.nrows, got: a.ncols });
        }
        let graph = Graph::from_pattern(a);
        let q = compute_ordering(&graph, kind, coords);
        Self::factorize_with_ordering(a, q, T::lit(DEFAULT_PIVOT_THRESHOLD))
    }

    pub fn factorize_with_ordering(a: &CsrMatrix<T>, q: Vec<usize>, threshold: T) -> Result<Self> {
        let n = a.nrows;
        if q.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: q.len() });
        }
        // Column access to A: the CSR of the transpose.
        let at = a.transpose();
        const NONE: usize = usize::MAX;
        let mut pinv = vec![NONE; n];
        let mut l_ptr = vec![0usize; n + 1];
        let mut u_ptr = vec![0usize; n + 1];
        let guess = 4 * a.nnz() + n;
        let mut l_idx: Vec<u32> = Vec::with_capacity(guess);
        let mut l_val: Vec<T> = Vec::with_capacity(guess);
        let mut u_idx: Vec<u32> = Vec::with_capacity(guess);
        let mut u_val: Vec<T> = Vec::with_capacity(guess);
        let mut u_diag = vec![T::zero(); n];
        let mut off_diagonal_pivots = 0;

        let mut x = vec![T::zero(); n];
        let mut mark = vec![u32::MAX; n];
        let mut reach: Vec<usize> = Vec::with_capacity(n);
        let mut stack: Vec<(usize, usize)> = Vec::new();

        for k in 0..n {
            let col = q[k];
            let stamp = k as u32;
            // Pattern of L⁻¹ A(:,col) in topological order (reversed post-order).
            reach.clear();
            for p in at.row_ptr[col]..at.row_ptr[col + 1] {
                let start = at.col_idx[p];
                if mark[start] == stamp {
                    continue;
                }
                mark[start] = stamp;
                stack.push((start, pinv_first(&pinv, &l_ptr, start)));
                while let Some(&mut (j, ref mut pos)) = stack.last_mut() {
                    let end = if pinv[j] == NONE { 0 } else { l_ptr[pinv[j] + 1] };
                    let mut next = None;
                    while *pos < end {
                        let i = l_idx[*pos] as usize;
                        *pos += 1;
                        if mark[i] != stamp {
                            next = Some(i);
                            break;
                        }
                    }
                    match next {
                        Some(i) => {
                            mark[i] = stamp;
                            stack.push((i, pinv_first(&pinv, &l_ptr, i)));
                        }
                        None => {
                            stack.pop();
                            reach.push(j);
                        }
                    }
                }
            }
            for p in at.row_ptr[col]..at.row_ptr[col + 1] {
                x[at.col_idx[p]] = at.values[p];
            }
            for &j in reach.iter().rev() {
                let jk = pinv[j];
                if jk == NONE {
                    continue;
                }
                let xj = x[j];
                if xj == T::zero() {
                    continue;
                }
                for p in l_ptr[jk]..l_ptr[jk + 1] {
                    x[l_idx[p] as usize] -= l_val[p] * xj;
                }
            }
            // Split into U entries and pivot candidates.
            let mut ipiv = NONE;
            let mut amax = T::zero();
            for &i in reach.iter().rev() {
                if pinv[i] == NONE {
                    let v = x[i].abs();
                    if v > amax || ipiv == NONE {
                        amax = v;
                        ipiv = i;
                    }
                } else {
                    u_idx.push(pinv[i] as u32);
                    u_val.push(x[i]);
                }
            }
            if ipiv == NONE || amax == T::zero() || !amax.is_finite() {
                return Err(Error::SingularMatrix { column: col });
            }
            if pinv[col] == NONE && mark[col] == stamp && x[col].abs() >= threshold * amax {
                ipiv = col;
            }
            if ipiv != col {
                off_diagonal_pivots += 1;
            }
            let pivot = x[ipiv];
            u_diag[k] = pivot;
            pinv[ipiv] = k;
            for &i in reach.iter() {
                if pinv[i] == NONE {
                    l_idx.push(i as u32);
                    l_val.push(x[i] / pivot);
                }
                x[i] = T::zero();
            }
            l_ptr[k + 1] = l_idx.len();
            u_ptr[k + 1] = u_idx.len();
        }
        // Express L rows in pivot order.
        for r in l_idx.iter_mut() {
            *r = pinv[*r as usize] as u32;
        }
        Ok(SparseLu { n, q, pinv, l_ptr, l_idx, l_val, u_ptr, u_idx, u_val, u_diag, off_diagonal_pivots })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored entries of `L + U` including the diagonal.
    pub fn factor_nnz(&self) -> usize {
        self.l_idx.len() + self.u_idx.len() + self.n
    }

    /// Columns whose pivot was taken off the diagonal of the permuted matrix.
    pub fn off_diagonal_pivots(&self) -> usize {
        self.off_diagonal_pivots
    }

    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        let mut x = vec![T::zero(); self.n];
        let mut work = vec![T::zero(); self.n];
        self.solve_into(b, &mut x, &mut work)?;
        Ok(x)
    }

    /// Solves `A x = b` using caller-provided workspace of length `n`.
    pub fn solve_into(&self, b: &[T], x: &mut [T], work: &mut [T]) -> Result<()> {
        let n = self.n;
        if b.len() != n || x.len() != n || work.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: b.len().min(x.len()).min(work.len()) });
        }
        let y = work;
        for i in 0..n {
            y[self.pinv[i]] = b[i];
        }
        for k in 0..n {
            let yk = y[k];
            if yk != T::zero() {
                for p in self.l_ptr[k]..self.l_ptr[k + 1] {
                    y[self.l_idx[p] as usize] -= self.l_val[p] * yk;
                }
            }
        }
        for k in (0..n).rev() {
            let yk = y[k] / self.u_diag[k];
            y[k] = yk;
            if yk != T::zero() {
                for p in self.u_ptr[k]..self.u_ptr[k + 1] {
                    y[self.u_idx[p] as usize] -= self.u_val[p] * yk;
                }
            }
        }
        for k in 0..n {
            x[self.q[k]] = y[k];
        }
        Ok(())
    }
}

#[inline]
fn pinv_first(pinv: &[usize], l_ptr: &[usize], j: usize) -> usize {
    if pinv[j] == usize::MAX {
        0
    } else {
        l_ptr[pinv[j]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::dense::DenseMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sparse(n: usize, seed: u64, dominant: bool) -> CsrMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = Vec::new();
        for i in 0..n {
            let mut row_sum = 0.0;
            for _ in 0..4 {
                let j = rng.gen_range(0..n);
                if j != i {
                    let v: f64 = rng.gen_range(-1.0..1.0);
                    row_sum += v.abs();
                    t.push((i, j, v));
                }
            }
            let d = if dominant { row_sum + 1.0 } else { rng.gen_range(-1e-3..1e-3) };
            t.push((i, i, d));
        }
        CsrMatrix::from_triplets(n, n, t)
    }

    #[test]
    fn identity_and_permutation() {
        let id = CsrMatrix::<f64>::identity(5);
        let b = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(SparseLu::factorize(&id).unwrap().solve(&b).unwrap(), b);
        let swap = CsrMatrix::from_triplets(2, 2, vec![(0, 1, 1.0), (1, 0, 1.0)]);
        assert_eq!(SparseLu::factorize(&swap).unwrap().solve(&[1.0, 2.0]).unwrap(), vec![2.0, 1.0]);
    }

    #[test]
    fn matches_dense_solver() {
        for (seed, dominant) in [(1, true), (2, true), (3, false), (4, false)] {
            let a = random_sparse(50, seed, dominant);
            let b: Vec<f64> = (0..50).map(|i| (i as f64 * 0.37).sin()).collect();
            let dense = a.to_dense().solve(&b).unwrap();
            for kind in [OrderingKind::Natural, OrderingKind::GraphDissection] {
                let lu = SparseLu::factorize_with(&a, kind, None).unwrap();
                let x = lu.solve(&b).unwrap();
                let scale = dense.iter().fold(1.0f64, |m, v| m.max(v.abs()));
                for (u, v) in x.iter().zip(&dense) {
                    assert!((u - v).abs() <= 1e-10 * scale, "seed {seed} {kind:?}: {u} vs {v}");
                }
            }
        }
    }

    #[test]
    fn factor_is_reusable() {
        let a = random_sparse(40, 9, true);
        let lu = SparseLu::factorize(&a).unwrap();
        for s in 0..3 {
            let b: Vec<f64> = (0..40).map(|i| ((i + s) as f64).cos()).collect();
            let x1 = lu.solve(&b).unwrap();
            let x2 = SparseLu::factorize(&a).unwrap().solve(&b).unwrap();
            assert_eq!(x1, x2);
        }
        assert!(lu.solve(&vec![0.0; 40]).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn singular_is_reported() {
        let a = CsrMatrix::from_triplets(3, 3, vec![(0, 0, 1.0), (1, 1, 1.0), (2, 0, 1.0)]);
        assert!(matches!(SparseLu::factorize(&a), Err(Error::SingularMatrix { .. })));
        let d = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(SparseLu::factorize(&CsrMatrix::from_dense(&d)).is_err());
    }
}
