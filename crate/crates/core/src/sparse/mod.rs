//! Sparse and dense linear algebra used by the solver.

pub mod csr;
pub mod dense;
pub mod lu;
pub mod ordering;

pub use csr::{block_matrix, Block, CsrMatrix};
pub use dense::{generalized_eigenvalues, smallest_generalized_eigenvalue, DenseMatrix, DENSE_LIMIT};
pub use lu::SparseLu;
pub use ordering::{compute_ordering, delay_after, Graph, OrderingKind};
