//! Uniform triangulations of axis-aligned rectangles with tagged boundary edges.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Coordinate comparison tolerance used by boundary predicates.
pub const COORD_TOL: f64 = 1e-12;

/// Sentinel for "no neighbouring cell" in [`Mesh::edge_cells`].
pub const NO_CELL: usize = usize::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryTag {
    Dirichlet,
    Neumann,
}

/// Which part of the boundary of the unit square carries Neumann data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryLayout {
    /// Γ_D = ∂Ω.
    AllDirichlet,
    /// Γ_N = {x = 1}, Dirichlet elsewhere.
    NeumannRight,
}

impl BoundaryLayout {
    pub fn is_neumann<T: Real>(&self, x: T, _y: T) -> bool {
        match self {
            BoundaryLayout::AllDirichlet => false,
            BoundaryLayout::NeumannRight => (x - T::one()).abs() <= T::lit(COORD_TOL),
        }
    }

    pub fn has_neumann(&self) -> bool {
        !matches!(self, BoundaryLayout::AllDirichlet)
    }
}

#[derive(Debug, Clone)]
pub struct Mesh<T> {
    pub vertices: Vec<[T; 2]>,
    /// Counterclockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    /// Edges as (smaller, larger) vertex pairs.
    pub edges: Vec<[usize; 2]>,
    /// Cells adjacent to each edge; the second slot is [`NO_CELL`] on the boundary.
    pub edge_cells: Vec<[usize; 2]>,
    /// Local edges of every triangle, ordered (v0,v1), (v1,v2), (v2,v0).
    pub cell_edges: Vec<[usize; 3]>,
    /// Boundary edge indices with their tag, in edge order.
    pub boundary_edges: Vec<(usize, BoundaryTag)>,
    /// Max over triangles of the longest edge.
    pub h: T,
    /// Cells per side for lattice meshes.
    pub cells_per_side: usize,
}

impl<T: Real> Mesh<T> {
    /// Builds a mesh from vertices and counterclockwise triangles; boundary edges are
    /// tagged Neumann where `neumann` holds at the edge midpoint.
    pub fn from_triangles(
        vertices: Vec<[T; 2]>,
        triangles: Vec<[usize; 3]>,
        neumann: impl Fn(T, T) -> bool,
    ) -> Result<Self> {
        if triangles.is_empty() {
            return Err(Error::InvalidMesh("no triangles".into()));
        }
        for (c, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= vertices.len() {
                    return Err(Error::OutOfRange { index: v, len: vertices.len() });
                }
            }
            let area = signed_area(&vertices, tri);
            if area <= T::zero() {
                return Err(Error::DegenerateCell { cell: c, area: area.to_f64_lossy() });
            }
        }

        let mut lookup: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges = Vec::new();
        let mut edge_cells: Vec<[usize; 2]> = Vec::new();
        let mut cell_edges = Vec::with_capacity(triangles.len());
        for (c, tri) in triangles.iter().enumerate() {
            let mut local = [0usize; 3];
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                let e = *lookup.entry(key).or_insert_with(|| {
                    edges.push([key.0, key.1]);
                    edge_cells.push([NO_CELL, NO_CELL]);
                    edges.len() - 1
                });
                let slot = &mut edge_cells[e];
                if slot[0] == NO_CELL {
                    slot[0] = c;
                } else if slot[1] == NO_CELL {
                    slot[1] = c;
                } else {
                    return Err(Error::InvalidMesh(format!("edge {e} shared by more than two cells")));
                }
                local[k] = e;
            }
            cell_edges.push(local);
        }

        let half = T::lit(0.5);
        let boundary_edges = edges
            .iter()
            .enumerate()
            .filter(|(e, _)| edge_cells[*e][1] == NO_CELL)
            .map(|(e, &[a, b])| {
                let mx = (vertices[a][0] + vertices[b][0]) * half;
                let my = (vertices[a][1] + vertices[b][1]) * half;
                let tag = if neumann(mx, my) { BoundaryTag::Neumann } else { BoundaryTag::Dirichlet };
                (e, tag)
            })
            .collect::<Vec<_>>();
        if !boundary_edges.iter().any(|&(_, t)| t == BoundaryTag::Dirichlet) {
            return Err(Error::InvalidMesh("Dirichlet boundary is empty".into()));
        }

        let h = triangles
            .iter()
            .map(|tri| {
                (0..3)
                    .map(|k| dist(vertices[tri[k]], vertices[tri[(k + 1) % 3]]))
                    .fold(T::zero(), T::max)
            })
            .fold(T::zero(), T::max);

        Ok(Mesh { vertices, triangles, edges, edge_cells, cell_edges, boundary_edges, h, cells_per_side: 0 })
    }

    /// Uniform `nx × ny` lattice on `[x0,x1] × [y0,y1]`, each cell split by the
    /// south-west → north-east diagonal.
    pub fn rectangle(
        (x0, x1): (T, T),
        (y0, y1): (T, T),
        nx: usize,
        ny: usize,
        neumann: impl Fn(T, T) -> bool,
    ) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidMesh("cells per side must be positive".into()));
        }
        if !(x1 > x0 && y1 > y0) {
            return Err(Error::InvalidMesh("empty rectangle".into()));
        }
        let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            let y = y0 + (y1 - y0) * T::from_count(j) / T::from_count(ny);
            for i in 0..=nx {
                let x = x0 + (x1 - x0) * T::from_count(i) / T::from_count(nx);
                vertices.push([x, y]);
            }
        }
        let id = |i: usize, j: usize| j * (nx + 1) + i;
        let mut triangles = Vec::with_capacity(2 * nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                triangles.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                triangles.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        let mut mesh = Self::from_triangles(vertices, triangles, neumann)?;
        mesh.cells_per_side = nx.max(ny);
        Ok(mesh)
    }

    pub fn unit_square(n: usize, neumann: impl Fn(T, T) -> bool) -> Result<Self> {
        Self::rectangle((T::zero(), T::one()), (T::zero(), T::one()), n, n, neumann)
    }

    /// Unit-square mesh with boundary tags taken from a [`BoundaryLayout`].
    pub fn unit_square_with(n: usize, layout: BoundaryLayout) -> Result<Self> {
        Self::unit_square(n, |x, y| layout.is_neumann(x, y))
    }

    /// Lattice width 1/n, the mesh-size label used in convergence tables.
    pub fn cell_width(&self) -> T {
        T::one() / T::from_count(self.cells_per_side.max(1))
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_cells(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn cell_area(&self, cell: usize) -> T {
        signed_area(&self.vertices, &self.triangles[cell])
    }

    pub fn cell_vertices(&self, cell: usize) -> [[T; 2]; 3] {
        let t = self.triangles[cell];
        [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]]
    }

    pub fn edge_midpoint(&self, edge: usize) -> [T; 2] {
        let [a, b] = self.edges[edge];
        let half = T::lit(0.5);
        [
            (self.vertices[a][0] + self.vertices[b][0]) * half,
            (self.vertices[a][1] + self.vertices[b][1]) * half,
        ]
    }

    pub fn edge_length(&self, edge: usize) -> T {
        let [a, b] = self.edges[edge];
        dist(self.vertices[a], self.vertices[b])
    }

    pub fn boundary_edges_tagged(&self, tag: BoundaryTag) -> impl Iterator<Item = usize> + '_ {
        self.boundary_edges.iter().filter(move |(_, t)| *t == tag).map(|(e, _)| *e)
    }

    /// Outward unit normal of a boundary edge.
    pub fn outward_normal(&self, edge: usize) -> [T; 2] {
        let cell = self.edge_cells[edge][0];
        let tri = self.triangles[cell];
        let [a, b] = self.edges[edge];
        // Orient the edge as it appears counterclockwise in its cell.
        let (p, q) = if (0..3).any(|k| tri[k] == a && tri[(k + 1) % 3] == b) { (a, b) } else { (b, a) };
        let d = [self.vertices[q][0] - self.vertices[p][0], self.vertices[q][1] - self.vertices[p][1]];
        let len = (d[0] * d[0] + d[1] * d[1]).sqrt();
        [d[1] / len, -d[0] / len]
    }

    /// Vertices lying on an edge with the given tag (sorted, deduplicated).
    pub fn vertices_on(&self, tag: BoundaryTag) -> Vec<usize> {
        let mut v: Vec<usize> = self.boundary_edges_tagged(tag).flat_map(|e| self.edges[e]).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Checks the structural invariants; used by tests and after construction.
    pub fn check_invariants(&self) -> Result<()> {
        let v = self.num_vertices() as i64;
        let e = self.num_edges() as i64;
        let t = self.num_cells() as i64;
        if v - e + t != 1 {
            return Err(Error::InvalidMesh(format!("Euler relation V-E+T = {}", v - e + t)));
        }
        for c in 0..self.num_cells() {
            if self.cell_area(c) <= T::zero() {
                return Err(Error::DegenerateCell { cell: c, area: self.cell_area(c).to_f64_lossy() });
            }
        }
        let boundary = self.edge_cells.iter().filter(|c| c[1] == NO_CELL).count();
        if boundary != self.boundary_edges.len() {
            return Err(Error::InvalidMesh("boundary edge table out of sync".into()));
        }
        Ok(())
    }
}

/// Meshes with `n0, 2·n0, 4·n0, …` cells per side.
pub fn refine_sequence<T: Real>(n0: usize, levels: usize, layout: BoundaryLayout) -> Result<Vec<Mesh<T>>> {
    (0..levels).map(|k| Mesh::unit_square_with(n0 << k, layout)).collect()
}

fn signed_area<T: Real>(vertices: &[[T; 2]], tri: &[usize; 3]) -> T {
    let [a, b, c] = [vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]];
    ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])) * T::lit(0.5)
}

fn dist<T: Real>(a: [T; 2], b: [T; 2]) -> T {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_counts_n8() {
        let m = Mesh::<f64>::unit_square_with(8, BoundaryLayout::AllDirichlet).unwrap();
        assert_eq!(m.num_vertices(), 81);
        assert_eq!(m.num_cells(), 128);
        assert_eq!(m.boundary_edges.len(), 32);
        assert_eq!(m.num_edges(), 208);
        assert_eq!(81 - 208 + 128, 1);
        m.check_invariants().unwrap();
        assert!((m.h - 2f64.sqrt() / 8.0).abs() < 1e-15);
        assert_eq!(m.cell_width(), 0.125);
    }

    #[test]
    fn right_side_neumann_tags() {
        let m = Mesh::<f64>::unit_square_with(8, BoundaryLayout::NeumannRight).unwrap();
        assert_eq!(m.boundary_edges_tagged(BoundaryTag::Neumann).count(), 8);
        assert_eq!(m.boundary_edges_tagged(BoundaryTag::Dirichlet).count(), 24);
        for e in m.boundary_edges_tagged(BoundaryTag::Neumann) {
            assert_eq!(m.edge_midpoint(e)[0], 1.0);
            assert_eq!(m.outward_normal(e), [1.0, 0.0]);
        }
    }

    #[test]
    fn invariants_hold_for_several_sizes() {
        for n in 1..=9 {
            let m = Mesh::<f64>::unit_square_with(n, BoundaryLayout::AllDirichlet).unwrap();
            assert_eq!(m.num_cells(), 2 * n * n);
            assert_eq!(m.boundary_edges.len(), 4 * n);
            assert_eq!(m.num_vertices(), (n + 1) * (n + 1));
            m.check_invariants().unwrap();
            let expected = 1.0 / (2.0 * (n * n) as f64);
            for c in 0..m.num_cells() {
                assert!((m.cell_area(c) - expected).abs() <= 1e-15 * expected.max(1.0));
            }
            let interior = m.edge_cells.iter().filter(|c| c[1] != NO_CELL).count();
            assert_eq!(interior + m.boundary_edges.len(), m.num_edges());
        }
    }

    #[test]
    fn rejects_zero_cells_and_all_neumann() {
        assert!(Mesh::<f64>::unit_square(0, |_, _| false).is_err());
        assert!(Mesh::<f64>::unit_square(2, |_, _| true).is_err());
    }

    #[test]
    fn refinement_nests_vertices() {
        let ms = refine_sequence::<f64>(8, 4, BoundaryLayout::AllDirichlet).unwrap();
        let ns: Vec<_> = ms.iter().map(|m| m.cells_per_side).collect();
        assert_eq!(ns, vec![8, 16, 32, 64]);
        let fine: std::collections::HashSet<(u64, u64)> =
            ms[1].vertices.iter().map(|v| (v[0].to_bits(), v[1].to_bits())).collect();
        for v in &ms[0].vertices {
            assert!(fine.contains(&(v[0].to_bits(), v[1].to_bits())));
        }
        let single = refine_sequence::<f64>(1, 1, BoundaryLayout::AllDirichlet).unwrap();
        assert_eq!(single.len(), 1);
        assert_eq!(single[0].num_cells(), 2);
    }

    #[test]
    fn generic_over_f32() {
        let m = Mesh::<f32>::unit_square_with(4, BoundaryLayout::AllDirichlet).unwrap();
        m.check_invariants().unwrap();
        assert_eq!(m.num_cells(), 32);
    }
}
