//! Three-field (displacement, total stress, pressure) finite elements for Biot
//! consolidation on the unit square, with manufactured-solution verification.
//!
//! Everything numerical is generic over [`Real`]; the aliases below fix `f64`.

pub mod assembly;
pub mod error;
pub mod fem;
pub mod manufactured;
pub mod mesh;
pub mod scalar;
pub mod solver;
pub mod sparse;
pub mod verify;
pub mod vtk;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Mesh = mesh::Mesh<f64>;
pub type FESpace = fem::FESpace<f64>;
pub type CsrMatrix = sparse::CsrMatrix<f64>;
pub type SparseLu = sparse::SparseLu<f64>;
pub type Discretization = solver::Discretization<f64>;
pub type FieldState = solver::FieldState<f64>;
pub type PhysicalParams = assembly::PhysicalParams<f64>;
pub type ManufacturedCase = manufactured::ManufacturedCase<f64>;
