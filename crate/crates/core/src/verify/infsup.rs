use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::sync::Arc;

use crate::assembly::{assemble_divergence, assemble_mass, assemble_vector_laplacian};
use crate::error::{Error, Result};
use crate::fem::{make_space, SpaceKind};
use crate::mesh::{BoundaryLayout, Mesh};
use crate::scalar::Real;
use crate::solver::ElementPair;
pub use crate::sparse::DENSE_LIMIT;
use crate::sparse::{generalized_eigenvalues, DenseMatrix, SparseLu};

use super::report::format_sci;

/// Eigenvalues below this fraction of the largest belong to the kernel of `Bᵀ`.
const KERNEL_TOL: f64 = 1e-10;

/// Displacement/stress pairs the estimator understands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InfSupPair {
    P2P0,
    P2P1,
    /// Equal-order P1 vector/P1 scalar; unstable, kept as a negative control.
    P1P1,
}

impl InfSupPair {
    fn spaces(self) -> (SpaceKind, SpaceKind) {
        match self {
            InfSupPair::P2P0 => (SpaceKind::P2Vector, SpaceKind::P0),
            InfSupPair::P2P1 => (SpaceKind::P2Vector, SpaceKind::P1Unconstrained),
            InfSupPair::P1P1 => (SpaceKind::P1Vector, SpaceKind::P1Unconstrained),
        }
    }
}

impl From<ElementPair> for InfSupPair {
    fn from(p: ElementPair) -> Self {
        match p {
            ElementPair::P2P0P1 => InfSupPair::P2P0,
            ElementPair::P2P1P1 => InfSupPair::P2P1,
        }
    }
}

impl FromStr for InfSupPair {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "p2-p0" | "p2-p0-p1" => Ok(InfSupPair::P2P0),
            "p2-p1" | "p2-p1-p1" => Ok(InfSupPair::P2P1),
            "p1-p1" => Ok(InfSupPair::P1P1),
            _ => Err(Error::Unknown { what: "inf-sup pair", name: s.to_string() }),
        }
    }
}

impl fmt::Display for InfSupPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InfSupPair::P2P0 => "p2-p0",
            InfSupPair::P2P1 => "p2-p1",
            InfSupPair::P1P1 => "p1-p1",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InfSupRow {
    pub n: usize,
    pub beta: f64,
    /// Dimension of the discrete kernel of `Bᵀ` (the constants for a stable pair).
    pub kernel: usize,
    pub stress_dofs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InfSupReport {
    pub pair: InfSupPair,
    pub rows: Vec<InfSupRow>,
}

impl InfSupReport {
    /// `min β / max β` over the sweep.
    pub fn min_over_max(&self) -> f64 {
        let betas = self.rows.iter().map(|r| r.beta);
        let max = betas.clone().fold(f64::NEG_INFINITY, f64::max);
        let min = betas.fold(f64::INFINITY, f64::min);
        min / max
    }

    /// `β(coarsest) / β(finest)`.
    pub fn decay(&self) -> f64 {
        match (self.rows.first(), self.rows.last()) {
            (Some(a), Some(b)) => a.beta / b.beta,
            _ => f64::NAN,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,beta,kernel,stress_dofs\n");
        for r in &self.rows {
            let _ = writeln!(s, "{},{},{},{}", r.n, format_sci(r.beta), r.kernel, r.stress_dofs);
        }
        s
    }

    pub fn to_markdown(&self) -> String {
        let mut s = format!("## Inf-sup estimate, {}\n\n| h | beta | kernel | stress dofs |\n|---|---:|---:|---:|\n", self.pair);
        for r in &self.rows {
            let _ = writeln!(s, "| 1/{} | {} | {} | {} |", r.n, format_sci(r.beta), r.kernel, r.stress_dofs);
        }
        let _ = writeln!(s, "\nmin/max = {:.4}, coarse/fine = {:.4}", self.min_over_max(), self.decay());
        s
    }
}

/// For each `n`, `β_h²` is the smallest nonzero eigenvalue of `B S⁻¹ Bᵀ x = β² M x`
/// on the unit square with the whole boundary clamped, `S` the vector Laplacian on
/// the free displacement dofs and `M` the stress mass matrix.
pub fn estimate_infsup<T: Real>(pair: InfSupPair, ns: &[usize]) -> Result<InfSupReport> {
    let (kind_u, kind_q) = pair.spaces();
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let mesh = Arc::new(Mesh::<T>::unit_square_with(n, BoundaryLayout::AllDirichlet)?);
        let su = make_space(&mesh, kind_u);
        let sq = make_space(&mesh, kind_q);
        let nq = sq.dof_count();
        if nq > DENSE_LIMIT {
            return Err(Error::TooLarge { size: nq, limit: DENSE_LIMIT });
        }
        let free: Vec<usize> = (0..su.dof_count()).filter(|&d| !su.is_dirichlet(d)).collect();
        let all_q: Vec<usize> = (0..nq).collect();
        let s = assemble_vector_laplacian(&su)?.submatrix(&free, &free);
        let b = assemble_divergence(&su, &sq)?.submatrix(&all_q, &free);
        let lu = SparseLu::factorize(&s)?;
        let mut schur = DenseMatrix::zeros(nq, nq);
        let mut rhs = vec![T::zero(); free.len()];
        for i in 0..nq {
            rhs.iter_mut().for_each(|v| *v = T::zero());
            // Column i of Bᵀ is row i of B.
            for (j, v) in b.row(i) {
                rhs[j] = v;
            }
            let x = lu.solve(&rhs)?;
            for (k, v) in b.matvec(&x).into_iter().enumerate() {
                schur[(k, i)] = v;
            }
        }
        let half = T::lit(0.5);
        for i in 0..nq {
            for j in 0..i {
                let m = (schur[(i, j)] + schur[(j, i)]) * half;
                schur[(i, j)] = m;
                schur[(j, i)] = m;
            }
        }
        let mass = assemble_mass(&sq, &sq)?.to_dense();
        let eig = generalized_eigenvalues(&schur, &mass)?;
        let max = eig.last().copied().unwrap_or(T::zero()).to_f64_lossy();
        let kernel = eig.iter().take_while(|&&l| l.to_f64_lossy() <= KERNEL_TOL * max).count();
        let beta = eig.get(kernel).map_or(0.0, |l| l.to_f64_lossy().sqrt());
        rows.push(InfSupRow { n, beta, kernel, stress_dofs: nq });
    }
    Ok(InfSupReport { pair, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_pairs() {
        assert_eq!("p2-p0-p1".parse::<InfSupPair>().unwrap(), InfSupPair::P2P0);
        assert_eq!("P1-P1".parse::<InfSupPair>().unwrap(), InfSupPair::P1P1);
        assert!("p3-p2".parse::<InfSupPair>().is_err());
        assert_eq!(InfSupPair::from(ElementPair::P2P1P1), InfSupPair::P2P1);
    }

    #[test]
    fn stable_pairs_have_only_constant_kernel() {
        for pair in [InfSupPair::P2P0, InfSupPair::P2P1] {
            let r = estimate_infsup::<f64>(pair, &[2, 4]).unwrap();
            for row in &r.rows {
                assert_eq!(row.kernel, 1, "{pair} n={}", row.n);
                assert!(row.beta > 0.1 && row.beta <= std::f64::consts::SQRT_2, "{pair}: {}", row.beta);
            }
        }
    }
}
