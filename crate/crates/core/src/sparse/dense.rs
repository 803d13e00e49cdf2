//! Small dense kernels: pivoted Gaussian elimination, Cholesky, and symmetric
//! eigenvalues via Householder tridiagonalization and implicit QL.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::csr::CsrMatrix;

/// Largest pencil converted to dense form by [`smallest_generalized_eigenvalue`].
pub const DENSE_LIMIT: usize = 2000;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    pub nrows: usize,
    pub ncols: usize,
    data: Vec<T>,
}

impl<T> Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.ncols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for DenseMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.ncols + j]
    }
}

impl<T: Real> DenseMatrix<T> {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        DenseMatrix { nrows, ncols, data: vec![T::zero(); nrows * ncols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        let data = rows.iter().flat_map(|r| r.iter().copied()).collect();
        DenseMatrix { nrows, ncols, data }
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        (0..self.nrows).map(|i| (0..self.ncols).map(|j| self[(i, j)] * x[j]).sum()).collect()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Solves `A x = b` by Gaussian elimination with partial pivoting.
    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        let n = self.nrows;
        if self.ncols != n {
            return Err(Error::DimensionMismatch { expected: n, got: self.ncols });
        }
        if b.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: b.len() });
        }
        let mut a = self.clone();
        let mut x = b.to_vec();
        for k in 0..n {
            let p = (k..n).max_by(|&i, &j| a[(i, k)].abs().partial_cmp(&a[(j, k)].abs()).unwrap()).unwrap();
            if a[(p, k)] == T::zero() {
                return Err(Error::SingularMatrix { column: k });
            }
            if p != k {
                for j in 0..n {
                    let tmp = a[(k, j)];
                    a[(k, j)] = a[(p, j)];
                    a[(p, j)] = tmp;
                }
                x.swap(k, p);
            }
            let pivot = a[(k, k)];
            for i in k + 1..n {
                let l = a[(i, k)] / pivot;
                if l == T::zero() {
                    continue;
                }
                for j in k..n {
                    let akj = a[(k, j)];
                    a[(i, j)] -= l * akj;
                }
                let xk = x[k];
                x[i] -= l * xk;
            }
        }
        for k in (0..n).rev() {
            let mut s = x[k];
            for j in k + 1..n {
                s -= a[(k, j)] * x[j];
            }
            x[k] = s / a[(k, k)];
        }
        Ok(x)
    }

    /// Lower Cholesky factor of a symmetric positive definite matrix.
    pub fn cholesky(&self) -> Result<DenseMatrix<T>> {
        let n = self.nrows;
        let mut l = Self::zeros(n, n);
        for j in 0..n {
            let mut d = self[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if d <= T::zero() || !d.is_finite() {
                return Err(Error::NotPositiveDefinite { row: j, pivot: d.to_f64_lossy() });
            }
            let d = d.sqrt();
            l[(j, j)] = d;
            for i in j + 1..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / d;
            }
        }
        Ok(l)
    }

    /// Eigenvalues of a symmetric matrix in ascending order.
    pub fn symmetric_eigenvalues(&self) -> Result<Vec<T>> {
        let n = self.nrows;
        if n == 0 {
            return Ok(Vec::new());
        }
        let mut a = self.clone();
        let (mut d, mut e) = tridiagonalize(&mut a);
        ql_implicit(&mut d, &mut e)?;
        d.sort_by(|x, y| x.partial_cmp(y).unwrap());
        Ok(d)
    }
}

/// Householder reduction to tridiagonal form (eigenvalues only): returns the
/// diagonal and the subdiagonal (`e[i]` couples rows `i-1` and `i`, `e[0] = 0`).
fn tridiagonalize<T: Real>(a: &mut DenseMatrix<T>) -> (Vec<T>, Vec<T>) {
    let n = a.nrows;
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = T::zero();
        if l > 0 {
            let scale: T = (0..=l).map(|k| a[(i, k)].abs()).sum();
            if scale == T::zero() {
                e[i] = a[(i, l)];
            } else {
                for k in 0..=l {
                    a[(i, k)] /= scale;
                    h += a[(i, k)] * a[(i, k)];
                }
                let f = a[(i, l)];
                let g = if f >= T::zero() { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                a[(i, l)] = f - g;
                let mut f = T::zero();
                for j in 0..=l {
                    let mut g = T::zero();
                    for k in 0..=j {
                        g += a[(j, k)] * a[(i, k)];
                    }
                    for k in j + 1..=l {
                        g += a[(k, j)] * a[(i, k)];
                    }
                    e[j] = g / h;
                    f += e[j] * a[(i, j)];
                }
                let hh = f / (h + h);
                for j in 0..=l {
                    let f = a[(i, j)];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        let v = f * e[k] + g * a[(i, k)];
                        a[(j, k)] -= v;
                    }
                }
            }
        } else {
            e[i] = a[(i, l)];
        }
        d[i] = h;
    }
    e[0] = T::zero();
    for (i, di) in d.iter_mut().enumerate() {
        *di = a[(i, i)];
    }
    (d, e)
}

/// Implicit QL with Wilkinson shifts on a symmetric tridiagonal matrix.
fn ql_implicit<T: Real>(d: &mut [T], e: &mut [T]) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();
    let two = T::lit(2.0);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= T::epsilon() * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 200 {
                return Err(Error::InvalidParameter("QL iteration did not converge".into()));
            }
            let mut g = (d[l + 1] - d[l]) / (two * e[l]);
            let mut r = g.hypot(T::one());
            g = d[m] - d[l] + e[l] / (g + if g >= T::zero() { r.abs() } else { -r.abs() });
            let (mut s, mut c, mut p) = (T::one(), T::one(), T::zero());
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] -= p;
                    e[m] = T::zero();
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + two * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = T::zero();
        }
    }
    Ok(())
}

/// Eigenvalues (ascending) of the symmetric-definite pencil `S x = λ M x`.
pub fn generalized_eigenvalues<T: Real>(s: &DenseMatrix<T>, m: &DenseMatrix<T>) -> Result<Vec<T>> {
    let n = s.nrows;
    if s.ncols != n || m.nrows != n || m.ncols != n {
        return Err(Error::DimensionMismatch { expected: n, got: m.nrows });
    }
    let l = m.cholesky()?;
    // C = L⁻¹ S L⁻ᵀ: first Y = L⁻¹ S (forward substitution by columns), then C = L⁻¹ Yᵀ.
    let forward = |rhs: &DenseMatrix<T>| {
        let mut y = DenseMatrix::zeros(n, n);
        for col in 0..n {
            for i in 0..n {
                let mut v = rhs[(i, col)];
                for k in 0..i {
                    v -= l[(i, k)] * y[(k, col)];
                }
                y[(i, col)] = v / l[(i, i)];
            }
        }
        y
    };
    let y = forward(s);
    let mut yt = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            yt[(i, j)] = y[(j, i)];
        }
    }
    let mut c = forward(&yt);
    let half = T::lit(0.5);
    for i in 0..n {
        for j in 0..i {
            let v = (c[(i, j)] + c[(j, i)]) * half;
            c[(i, j)] = v;
            c[(j, i)] = v;
        }
    }
    c.symmetric_eigenvalues()
}

/// Smallest `λ` with `S x = λ M x` for symmetric `S` and SPD `M`, through the dense path.
pub fn smallest_generalized_eigenvalue<T: Real>(s: &CsrMatrix<T>, m: &CsrMatrix<T>) -> Result<T> {
    if s.nrows > DENSE_LIMIT {
        return Err(Error::TooLarge { size: s.nrows, limit: DENSE_LIMIT });
    }
    let ev = generalized_eigenvalues(&s.to_dense(), &m.to_dense())?;
    ev.first().copied().ok_or(Error::DimensionMismatch { expected: 1, got: 0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_small_systems() {
        let a = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert_eq!(a.solve(&[1.0, 2.0]).unwrap(), vec![2.0, 1.0]);
        let singular = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(singular.solve(&[1.0, 1.0]).is_err());
    }

    #[test]
    fn eigenvalues_of_known_matrices() {
        let a = DenseMatrix::from_rows(&[vec![2.0, -1.0, 0.0], vec![-1.0, 2.0, -1.0], vec![0.0, -1.0, 2.0]]);
        let ev = a.symmetric_eigenvalues().unwrap();
        let s2 = 2f64.sqrt();
        for (got, want) in ev.iter().zip([2.0 - s2, 2.0, 2.0 + s2]) {
            assert!((got - want).abs() < 1e-14, "{got} vs {want}");
        }
        // Discrete Laplacian of size 12: 2 - 2cos(kπ/13)
        let n = 12;
        let mut l = DenseMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            l[(i, i)] = 2.0;
            if i + 1 < n {
                l[(i, i + 1)] = -1.0;
                l[(i + 1, i)] = -1.0;
            }
        }
        let ev = l.symmetric_eigenvalues().unwrap();
        for (k, got) in ev.iter().enumerate() {
            let want = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / 13.0).cos();
            assert!((got - want).abs() < 1e-13);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]);
        assert!(a.cholesky().is_err());
    }

    #[test]
    fn generalized_trivial_pairs() {
        let s = DenseMatrix::from_rows(&[vec![1.0f64, 0.0], vec![0.0, 2.0]]);
        let ev = generalized_eigenvalues(&s, &DenseMatrix::identity(2)).unwrap();
        assert!((ev[0] - 1.0).abs() < 1e-15);
        let ev = generalized_eigenvalues(&s, &s).unwrap();
        assert!(ev.iter().all(|v| (v - 1.0).abs() < 1e-14));
    }

    fn det4(a: [[f64; 4]; 4]) -> f64 {
        // Cofactor expansion along the first row.
        let minor = |r: usize, c: usize| -> f64 {
            let rows: Vec<usize> = (0..4).filter(|&i| i != r).collect();
            let cols: Vec<usize> = (0..4).filter(|&j| j != c).collect();
            let m = |i: usize, j: usize| a[rows[i]][cols[j]];
            m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
                + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0))
        };
        (0..4).map(|c| if c % 2 == 0 { 1.0 } else { -1.0 } * a[0][c] * minor(0, c)).sum()
    }

    #[test]
    fn smallest_eigenvalue_matches_characteristic_roots() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        for _ in 0..10 {
            let mut spd = |shift: f64| {
                let g: Vec<[f64; 4]> = (0..4).map(|_| [0; 4].map(|_| rng.gen_range(-1.0..1.0))).collect();
                let mut a = [[0.0; 4]; 4];
                for i in 0..4 {
                    for j in 0..4 {
                        a[i][j] = (0..4).map(|k| g[i][k] * g[j][k]).sum::<f64>() + if i == j { shift } else { 0.0 };
                    }
                }
                a
            };
            let (s, m) = (spd(0.1), spd(0.5));
            let pencil = |l: f64| {
                let mut a = [[0.0; 4]; 4];
                for i in 0..4 {
                    for j in 0..4 {
                        a[i][j] = s[i][j] - l * m[i][j];
                    }
                }
                det4(a)
            };
            // det(S - λM) > 0 at 0 and changes sign first at the smallest root,
            // which the Rayleigh quotient of e₀ bounds from above.
            let hi_bound = s[0][0] / m[0][0];
            let steps = 20_000;
            let (mut lo, mut hi) = (0.0, hi_bound);
            for k in 1..=steps {
                let l = hi_bound * k as f64 / steps as f64;
                if pencil(l) <= 0.0 {
                    hi = l;
                    lo = hi_bound * (k - 1) as f64 / steps as f64;
                    break;
                }
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if pencil(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let to_csr = |a: [[f64; 4]; 4]| {
                CsrMatrix::from_triplets(4, 4, (0..16).map(|k| (k / 4, k % 4, a[k / 4][k % 4])).collect())
            };
            let got = smallest_generalized_eigenvalue(&to_csr(s), &to_csr(m)).unwrap();
            assert!((got - lo).abs() <= 1e-8 * lo.max(1e-3), "{got} vs {lo}");
        }
    }

    #[test]
    fn dense_path_refuses_large_pencils() {
        let n = DENSE_LIMIT + 1;
        let i = CsrMatrix::<f64>::identity(n);
        assert!(matches!(smallest_generalized_eigenvalue(&i, &i), Err(Error::TooLarge { .. })));
    }
}
