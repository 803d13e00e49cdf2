//! Lagrange bases of degree 0, 1, 2 on triangles, written in barycentric coordinates.

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::scalar::Real;

/// Largest local node count (P2).
pub const MAX_NODES: usize = 6;

/// Local edges of the P2 element, matching [`Mesh::cell_edges`].
pub const P2_EDGES: [(usize, usize); 3] = [(0, 1), (1, 2), (2, 0)];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReferenceElement {
    pub degree: usize,
}

impl ReferenceElement {
    pub fn new(degree: usize) -> Result<Self> {
        if degree > 2 {
            return Err(Error::Unknown { what: "element degree", name: degree.to_string() });
        }
        Ok(ReferenceElement { degree })
    }

    pub fn node_count(&self) -> usize {
        match self.degree {
            0 => 1,
            1 => 3,
            _ => 6,
        }
    }

    /// Barycentric coordinates of the local nodes.
    pub fn nodes<T: Real>(&self) -> Vec<[T; 3]> {
        let (o, z, h) = (T::one(), T::zero(), T::lit(0.5));
        let third = T::one() / T::lit(3.0);
        match self.degree {
            0 => vec![[third; 3]],
            1 => vec![[o, z, z], [z, o, z], [z, z, o]],
            _ => vec![[o, z, z], [z, o, z], [z, z, o], [h, h, z], [z, h, h], [h, z, h]],
        }
    }

    /// Values and derivatives with respect to each barycentric coordinate (treated as
    /// independent variables) at `b`.
    pub fn eval<T: Real>(&self, b: [T; 3], values: &mut [T], dbary: &mut [[T; 3]]) {
        let z = T::zero();
        match self.degree {
            0 => {
                values[0] = T::one();
                dbary[0] = [z; 3];
            }
            1 => {
                for i in 0..3 {
                    values[i] = b[i];
                    let mut d = [z; 3];
                    d[i] = T::one();
                    dbary[i] = d;
                }
            }
            _ => {
                let (one, two, four) = (T::one(), T::lit(2.0), T::lit(4.0));
                for i in 0..3 {
                    values[i] = b[i] * (two * b[i] - one);
                    let mut d = [z; 3];
                    d[i] = four * b[i] - one;
                    dbary[i] = d;
                }
                for (k, &(i, j)) in P2_EDGES.iter().enumerate() {
                    values[3 + k] = four * b[i] * b[j];
                    let mut d = [z; 3];
                    d[i] = four * b[j];
                    d[j] = four * b[i];
                    dbary[3 + k] = d;
                }
            }
        }
    }
}

/// Affine geometry of one triangle.
#[derive(Debug, Clone, Copy)]
pub struct CellGeometry<T> {
    pub vertices: [[T; 2]; 3],
    pub area: T,
    /// Physical gradients of the barycentric coordinates (constant on the cell).
    pub grad_bary: [[T; 2]; 3],
}

impl<T: Real> CellGeometry<T> {
    pub fn new(mesh: &Mesh<T>, cell: usize) -> Result<Self> {
        if cell >= mesh.num_cells() {
            return Err(Error::OutOfRange { index: cell, len: mesh.num_cells() });
        }
        Self::from_vertices(mesh.cell_vertices(cell)).map_err(|_| Error::DegenerateCell {
            cell,
            area: mesh.cell_area(cell).to_f64_lossy(),
        })
    }

    pub fn from_vertices(v: [[T; 2]; 3]) -> Result<Self> {
        let j = [[v[1][0] - v[0][0], v[2][0] - v[0][0]], [v[1][1] - v[0][1], v[2][1] - v[0][1]]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det <= T::zero() {
            return Err(Error::DegenerateCell { cell: usize::MAX, area: (det * T::lit(0.5)).to_f64_lossy() });
        }
        // Rows of J^{-1} are the gradients of λ1 and λ2.
        let g1 = [j[1][1] / det, -j[0][1] / det];
        let g2 = [-j[1][0] / det, j[0][0] / det];
        let g0 = [-(g1[0] + g2[0]), -(g1[1] + g2[1])];
        Ok(CellGeometry { vertices: v, area: det * T::lit(0.5), grad_bary: [g0, g1, g2] })
    }

    pub fn map(&self, b: [T; 3]) -> [T; 2] {
        let v = &self.vertices;
        [
            b[0] * v[0][0] + b[1] * v[1][0] + b[2] * v[2][0],
            b[0] * v[0][1] + b[1] * v[1][1] + b[2] * v[2][1],
        ]
    }

    /// Chain rule from barycentric derivatives to a physical gradient.
    #[inline]
    pub fn gradient(&self, d: &[T; 3]) -> [T; 2] {
        let g = &self.grad_bary;
        [
            d[0] * g[0][0] + d[1] * g[1][0] + d[2] * g[2][0],
            d[0] * g[0][1] + d[1] * g[1][1] + d[2] * g[2][1],
        ]
    }
}

/// Reference basis values and barycentric derivatives tabulated at a set of points.
#[derive(Debug, Clone)]
pub struct Tabulation<T> {
    pub n: usize,
    pub values: Vec<[T; MAX_NODES]>,
    pub dbary: Vec<[[T; 3]; MAX_NODES]>,
}

impl<T: Real> Tabulation<T> {
    pub fn new(element: ReferenceElement, points: &[[T; 3]]) -> Self {
        let n = element.node_count();
        let mut values = Vec::with_capacity(points.len());
        let mut dbary = Vec::with_capacity(points.len());
        for &p in points {
            let mut v = [T::zero(); MAX_NODES];
            let mut d = [[T::zero(); 3]; MAX_NODES];
            element.eval(p, &mut v, &mut d);
            values.push(v);
            dbary.push(d);
        }
        Tabulation { n, values, dbary }
    }

    /// Physical gradients at point `q` on the given cell.
    pub fn gradients(&self, geo: &CellGeometry<T>, q: usize) -> [[T; 2]; MAX_NODES] {
        let mut g = [[T::zero(); 2]; MAX_NODES];
        for (a, ga) in g.iter_mut().enumerate().take(self.n) {
            *ga = geo.gradient(&self.dbary[q][a]);
        }
        g
    }
}
