//! Global degree-of-freedom maps for the displacement, total-stress and pressure spaces.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use super::element::{CellGeometry, ReferenceElement, MAX_NODES};
use crate::error::{Error, Result};
use crate::mesh::{BoundaryTag, Mesh};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpaceKind {
    /// Continuous vector P2, essential conditions on Γ_D.
    P2Vector,
    /// Continuous vector P1, essential conditions on Γ_D (inf-sup diagnostics only).
    P1Vector,
    /// Continuous scalar P1, essential conditions on Γ_D (pressure).
    P1Continuous,
    /// Continuous scalar P1 without essential conditions (Taylor-Hood total stress).
    P1Unconstrained,
    /// Discontinuous piecewise constants (total stress).
    P0,
}

impl SpaceKind {
    pub fn degree(self) -> usize {
        match self {
            SpaceKind::P2Vector => 2,
            SpaceKind::P1Vector | SpaceKind::P1Continuous | SpaceKind::P1Unconstrained => 1,
            SpaceKind::P0 => 0,
        }
    }

    pub fn components(self) -> usize {
        match self {
            SpaceKind::P2Vector | SpaceKind::P1Vector => 2,
            _ => 1,
        }
    }

    pub fn constrained(self) -> bool {
        matches!(self, SpaceKind::P2Vector | SpaceKind::P1Vector | SpaceKind::P1Continuous)
    }
}

impl FromStr for SpaceKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "p2-vector" | "p2v" => Ok(SpaceKind::P2Vector),
            "p1-vector" | "p1v" => Ok(SpaceKind::P1Vector),
            "p1" | "p1-scalar-continuous" => Ok(SpaceKind::P1Continuous),
            "p1-unconstrained" | "p1-scalar-continuous-unconstrained" => Ok(SpaceKind::P1Unconstrained),
            "p0" | "p0-scalar" => Ok(SpaceKind::P0),
            _ => Err(Error::Unknown { what: "space kind", name: s.to_string() }),
        }
    }
}

impl fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SpaceKind::P2Vector => "p2-vector",
            SpaceKind::P1Vector => "p1-vector",
            SpaceKind::P1Continuous => "p1",
            SpaceKind::P1Unconstrained => "p1-unconstrained",
            SpaceKind::P0 => "p0",
        };
        f.write_str(s)
    }
}

/// A finite element space on a shared mesh.
///
/// Scalar nodes are numbered vertices first, then edge midpoints (P2); for P0 the
/// node is the cell. Vector dofs interleave components: `dof = 2·node + component`.
#[derive(Debug, Clone)]
pub struct FESpace<T> {
    pub kind: SpaceKind,
    pub mesh: Arc<Mesh<T>>,
    pub element: ReferenceElement,
    pub components: usize,
    pub num_nodes: usize,
    /// Scalar node indices per cell, `element.node_count()` entries each.
    pub cell_nodes: Vec<usize>,
    /// Coordinates of each scalar node.
    pub node_coords: Vec<[T; 2]>,
    /// Sorted dofs carrying essential boundary conditions.
    pub dirichlet_dofs: Vec<usize>,
}

impl<T: Real> FESpace<T> {
    pub fn new(mesh: Arc<Mesh<T>>, kind: SpaceKind) -> Self {
        let element = ReferenceElement::new(kind.degree()).expect("degree ≤ 2");
        let nv = mesh.num_vertices();
        let (num_nodes, cell_nodes, node_coords) = match kind.degree() {
            0 => {
                let third = T::one() / T::lit(3.0);
                let coords = (0..mesh.num_cells())
                    .map(|c| {
                        let v = mesh.cell_vertices(c);
                        [(v[0][0] + v[1][0] + v[2][0]) * third, (v[0][1] + v[1][1] + v[2][1]) * third]
                    })
                    .collect();
                (mesh.num_cells(), (0..mesh.num_cells()).collect(), coords)
            }
            1 => {
                let nodes = mesh.triangles.iter().flatten().copied().collect();
                (nv, nodes, mesh.vertices.clone())
            }
            _ => {
                let mut nodes = Vec::with_capacity(6 * mesh.num_cells());
                for (tri, edges) in mesh.triangles.iter().zip(&mesh.cell_edges) {
                    nodes.extend_from_slice(tri);
                    nodes.extend(edges.iter().map(|&e| nv + e));
                }
                let mut coords = mesh.vertices.clone();
                coords.extend((0..mesh.num_edges()).map(|e| mesh.edge_midpoint(e)));
                (nv + mesh.num_edges(), nodes, coords)
            }
        };

        let components = kind.components();
        let mut dirichlet_dofs = Vec::new();
        if kind.constrained() {
            let mut nodes: Vec<usize> = Vec::new();
            for e in mesh.boundary_edges_tagged(BoundaryTag::Dirichlet) {
                nodes.extend_from_slice(&mesh.edges[e]);
                if kind.degree() == 2 {
                    nodes.push(nv + e);
                }
            }
            nodes.sort_unstable();
            nodes.dedup();
            dirichlet_dofs = nodes.iter().flat_map(|&n| (0..components).map(move |c| components * n + c)).collect();
        }

        FESpace { kind, mesh, element, components, num_nodes, cell_nodes, node_coords, dirichlet_dofs }
    }

    pub fn dof_count(&self) -> usize {
        self.num_nodes * self.components
    }

    pub fn local_nodes(&self) -> usize {
        self.element.node_count()
    }

    pub fn local_dofs(&self) -> usize {
        self.local_nodes() * self.components
    }

    pub fn nodes_of(&self, cell: usize) -> &[usize] {
        let n = self.local_nodes();
        &self.cell_nodes[cell * n..(cell + 1) * n]
    }

    /// Global dofs of a cell, local ordering `a·components + c`.
    pub fn dofs_of(&self, cell: usize, out: &mut Vec<usize>) {
        out.clear();
        for &node in self.nodes_of(cell) {
            for c in 0..self.components {
                out.push(node * self.components + c);
            }
        }
    }

    /// Coordinates of every dof (vector components share their node's position).
    pub fn dof_coords(&self) -> Vec<[T; 2]> {
        self.node_coords.iter().flat_map(|&x| std::iter::repeat_n(x, self.components)).collect()
    }

    pub fn same_mesh(&self, other: &FESpace<T>) -> bool {
        Arc::ptr_eq(&self.mesh, &other.mesh)
    }

    pub fn is_dirichlet(&self, dof: usize) -> bool {
        self.dirichlet_dofs.binary_search(&dof).is_ok()
    }

    /// Nodal interpolation of a scalar field (per component for vector spaces:
    /// `f` returns the component value). P0 uses the centroid.
    pub fn interpolate(&self, f: impl Fn(T, T, usize) -> T) -> Vec<T> {
        let mut out = vec![T::zero(); self.dof_count()];
        for (node, x) in self.node_coords.iter().enumerate() {
            for c in 0..self.components {
                out[node * self.components + c] = f(x[0], x[1], c);
            }
        }
        out
    }

    /// Scalar basis values and physical gradients at barycentric points of a cell.
    /// Vector spaces replicate the scalar basis per component.
    pub fn eval_basis(&self, cell: usize, points: &[[T; 3]]) -> Result<BasisValues<T>> {
        let geo = CellGeometry::new(&self.mesh, cell)?;
        let n = self.local_nodes();
        let mut values = Vec::with_capacity(points.len());
        let mut gradients = Vec::with_capacity(points.len());
        for &p in points {
            let mut v = [T::zero(); MAX_NODES];
            let mut d = [[T::zero(); 3]; MAX_NODES];
            self.element.eval(p, &mut v, &mut d);
            values.push(v[..n].to_vec());
            gradients.push(d[..n].iter().map(|di| geo.gradient(di)).collect());
        }
        Ok(BasisValues { values, gradients })
    }
}

pub fn make_space<T: Real>(mesh: &Arc<Mesh<T>>, kind: SpaceKind) -> FESpace<T> {
    FESpace::new(Arc::clone(mesh), kind)
}

#[derive(Debug, Clone)]
pub struct BasisValues<T> {
    /// `values[point][node]`
    pub values: Vec<Vec<T>>,
    /// `gradients[point][node]`
    pub gradients: Vec<Vec<[T; 2]>>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::BoundaryLayout;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn mesh(n: usize) -> Arc<Mesh<f64>> {
        Arc::new(Mesh::unit_square_with(n, BoundaryLayout::AllDirichlet).unwrap())
    }

    #[test]
    fn dof_counts_n8() {
        let m = mesh(8);
        let u = make_space(&m, SpaceKind::P2Vector);
        assert_eq!(u.dof_count(), 578);
        assert_eq!(u.dof_count(), 2 * 17 * 17);
        let q = make_space(&m, SpaceKind::P0);
        assert_eq!(q.dof_count(), 128);
        assert!(q.dirichlet_dofs.is_empty());
        let p = make_space(&m, SpaceKind::P1Continuous);
        assert_eq!(p.dof_count(), 81);
        assert_eq!(p.dirichlet_dofs.len(), 32);
        let z = make_space(&m, SpaceKind::P1Unconstrained);
        assert_eq!(z.dof_count(), m.num_vertices());
        assert!(z.dirichlet_dofs.is_empty());
        // 2 components × (4·16 boundary P2 nodes)
        assert_eq!(u.dirichlet_dofs.len(), 2 * 64);
    }

    #[test]
    fn cell_dofs_cover_every_dof() {
        let m = mesh(4);
        for kind in [SpaceKind::P2Vector, SpaceKind::P1Continuous, SpaceKind::P0, SpaceKind::P1Vector] {
            let s = make_space(&m, kind);
            let mut seen = vec![0usize; s.dof_count()];
            let mut dofs = Vec::new();
            for c in 0..m.num_cells() {
                s.dofs_of(c, &mut dofs);
                for &d in &dofs {
                    seen[d] += 1;
                }
            }
            assert!(seen.iter().all(|&k| k >= 1), "{kind}");
            if kind == SpaceKind::P0 {
                assert!(seen.iter().all(|&k| k == 1));
            }
        }
    }

    #[test]
    fn dirichlet_dofs_lie_on_boundary() {
        let m = Arc::new(Mesh::<f64>::unit_square_with(6, BoundaryLayout::NeumannRight).unwrap());
        let s = make_space(&m, SpaceKind::P2Vector);
        let coords = s.dof_coords();
        for &d in &s.dirichlet_dofs {
            let [x, y] = coords[d];
            assert!(x == 0.0 || y == 0.0 || y == 1.0, "dof {d} at ({x},{y})");
        }
        // Interior points of x = 1 stay free.
        assert!(coords.iter().enumerate().any(|(d, c)| c[0] == 1.0 && c[1] == 0.5 && !s.is_dirichlet(d)));
    }

    #[test]
    fn construction_is_deterministic() {
        let m = mesh(5);
        let a = make_space(&m, SpaceKind::P2Vector);
        let b = make_space(&m, SpaceKind::P2Vector);
        assert_eq!(a.cell_nodes, b.cell_nodes);
        assert_eq!(a.dirichlet_dofs, b.dirichlet_dofs);
    }

    #[test]
    fn unknown_kind_rejected() {
        assert!("p3-vector".parse::<SpaceKind>().is_err());
        assert_eq!("p2-vector".parse::<SpaceKind>().unwrap(), SpaceKind::P2Vector);
    }

    #[test]
    fn gradients_of_partition_sum_to_zero() {
        let m = mesh(3);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for kind in [SpaceKind::P1Continuous, SpaceKind::P2Vector] {
            let s = make_space(&m, kind);
            for _ in 0..5 {
                let (a, b): (f64, f64) = (rng.gen(), rng.gen());
                let (a, b) = if a + b > 1.0 { (1.0 - a, 1.0 - b) } else { (a, b) };
                let cell = rng.gen_range(0..m.num_cells());
                let ev = s.eval_basis(cell, &[[1.0 - a - b, a, b]]).unwrap();
                let sum: f64 = ev.values[0].iter().sum();
                let g = ev.gradients[0].iter().fold([0.0, 0.0], |acc, g| [acc[0] + g[0], acc[1] + g[1]]);
                assert!((sum - 1.0).abs() < 1e-14);
                assert!(g[0].abs() < 1e-12 && g[1].abs() < 1e-12);
            }
        }
    }

    #[test]
    fn p1_gradients_constant_per_cell() {
        let m = mesh(2);
        let s = make_space(&m, SpaceKind::P1Continuous);
        let ev = s.eval_basis(3, &[[1.0, 0.0, 0.0], [0.2, 0.3, 0.5]]).unwrap();
        assert_eq!(ev.gradients[0], ev.gradients[1]);
        assert!(s.eval_basis(99, &[[1.0, 0.0, 0.0]]).is_err());
    }

    #[test]
    fn p2_reproduces_quadratics() {
        let m = mesh(4);
        let s = make_space(&m, SpaceKind::P2Vector);
        let f = |x: f64, y: f64| 1.0 - 2.0 * x + 0.5 * y + 3.0 * x * x - x * y + 0.7 * y * y;
        let coeffs = s.interpolate(|x, y, c| if c == 0 { f(x, y) } else { -f(y, x) });
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut dofs = Vec::new();
        for _ in 0..20 {
            let cell = rng.gen_range(0..m.num_cells());
            let (a, b): (f64, f64) = (rng.gen(), rng.gen());
            let (a, b) = if a + b > 1.0 { (1.0 - a, 1.0 - b) } else { (a, b) };
            let bary = [1.0 - a - b, a, b];
            let ev = s.eval_basis(cell, &[bary]).unwrap();
            s.dofs_of(cell, &mut dofs);
            let mut val = [0.0; 2];
            for (la, &phi) in ev.values[0].iter().enumerate() {
                for c in 0..2 {
                    val[c] += phi * coeffs[dofs[2 * la + c]];
                }
            }
            let geo = CellGeometry::new(&m, cell).unwrap();
            let [x, y] = geo.map(bary);
            assert!((val[0] - f(x, y)).abs() < 1e-13);
            assert!((val[1] + f(y, x)).abs() < 1e-13);
        }
    }
}
