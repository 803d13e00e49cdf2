//! Reference elements, quadrature and global dof maps.

pub mod element;
pub mod quadrature;
pub mod space;

pub use element::{CellGeometry, ReferenceElement, Tabulation};
pub use quadrature::{edge_rule, triangle_rule, EdgeRule, TriangleRule};
pub use space::{make_space, BasisValues, FESpace, SpaceKind};

/// Quadrature degree for bilinear forms (exact for P2×P2 on affine cells).
pub const ASSEMBLY_DEGREE: usize = 6;
/// Quadrature degree for integrals against exact (non-polynomial) fields.
pub const EXACT_DEGREE: usize = 8;
