//! Cell-by-cell assembly of the bilinear forms and load vectors, and elimination
//! of essential boundary conditions.

use crate::error::{Error, Result};
use crate::fem::element::{CellGeometry, Tabulation, MAX_NODES, P2_EDGES};
use crate::fem::{edge_rule, triangle_rule, FESpace, ASSEMBLY_DEGREE, EXACT_DEGREE};
use crate::manufactured::ManufacturedCase;
use crate::mesh::BoundaryTag;
use crate::scalar::Real;
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams<T> {
    pub mu: T,
    pub lambda: T,
    pub kappa: T,
}

impl<T: Real> PhysicalParams<T> {
    pub fn new(mu: T, lambda: T, kappa: T) -> Result<Self> {
        let p = PhysicalParams { mu, lambda, kappa };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("mu", self.mu), ("lambda", self.lambda), ("kappa", self.kappa)] {
            if !(v > T::zero() && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }
}

/// Integrands available to [`assemble_form`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BilinearForm<T> {
    /// `2μ (ε(u), ε(v))` on a vector space.
    Elasticity { two_mu: T },
    /// `(∇u, ∇v)` on a vector space.
    VectorLaplacian,
    /// `(∇·u, w)`: rows from a scalar space, columns from a vector space.
    Divergence,
    /// `(u, w)` between scalar spaces.
    Mass,
    /// `c (∇u, ∇w)` between scalar spaces.
    Stiffness { coef: T },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellOrder {
    Forward,
    Reverse,
}

/// Assembles `form` with test functions from `row` and trial functions from `col`.
pub fn assemble_form<T: Real>(
    row: &FESpace<T>,
    col: &FESpace<T>,
    form: BilinearForm<T>,
    order: CellOrder,
) -> Result<CsrMatrix<T>> {
    if !row.same_mesh(col) {
        return Err(Error::MeshMismatch);
    }
    let (want_row, want_col) = match form {
        BilinearForm::Elasticity { .. } | BilinearForm::VectorLaplacian => (2, 2),
        BilinearForm::Divergence => (1, 2),
        BilinearForm::Mass | BilinearForm::Stiffness { .. } => (1, 1),
    };
    if row.components != want_row {
        return Err(Error::DimensionMismatch { expected: want_row, got: row.components });
    }
    if col.components != want_col {
        return Err(Error::DimensionMismatch { expected: want_col, got: col.components });
    }
    let rule = triangle_rule::<T>(ASSEMBLY_DEGREE)?;
    let tr = Tabulation::new(row.element, &rule.points);
    let tc = Tabulation::new(col.element, &rule.points);
    let mesh = &row.mesh;
    let (nr, nc) = (row.local_dofs(), col.local_dofs());
    let (sr, sc) = (row.local_nodes(), col.local_nodes());
    let mut local = vec![T::zero(); nr * nc];
    let mut triplets = Vec::with_capacity(mesh.num_cells() * nr * nc);
    let (mut rdofs, mut cdofs) = (Vec::new(), Vec::new());
    let cells: Box<dyn Iterator<Item = usize>> = match order {
        CellOrder::Forward => Box::new(0..mesh.num_cells()),
        CellOrder::Reverse => Box::new((0..mesh.num_cells()).rev()),
    };
    let two = T::lit(2.0);
    for cell in cells {
        let geo = CellGeometry::new(mesh, cell)?;
        local.iter_mut().for_each(|v| *v = T::zero());
        for (q, &wq) in rule.weights.iter().enumerate() {
            let w = wq * two * geo.area;
            let gr = tr.gradients(&geo, q);
            let gc = tc.gradients(&geo, q);
            let (vr, vc) = (&tr.values[q], &tc.values[q]);
            match form {
                BilinearForm::Elasticity { two_mu } => {
                    let mu = two_mu / two;
                    for a in 0..sr {
                        for b in 0..sc {
                            let dot = gr[a][0] * gc[b][0] + gr[a][1] * gc[b][1];
                            for c in 0..2 {
                                for d in 0..2 {
                                    let diag = if c == d { dot } else { T::zero() };
                                    local[(2 * a + c) * nc + 2 * b + d] += w * mu * (diag + gr[a][d] * gc[b][c]);
                                }
                            }
                        }
                    }
                }
                BilinearForm::VectorLaplacian => {
                    for a in 0..sr {
                        for b in 0..sc {
                            let v = w * (gr[a][0] * gc[b][0] + gr[a][1] * gc[b][1]);
                            local[(2 * a) * nc + 2 * b] += v;
                            local[(2 * a + 1) * nc + 2 * b + 1] += v;
                        }
                    }
                }
                BilinearForm::Divergence => {
                    for a in 0..sr {
                        for b in 0..sc {
                            for d in 0..2 {
                                local[a * nc + 2 * b + d] += w * vr[a] * gc[b][d];
                            }
                        }
                    }
                }
                BilinearForm::Mass => {
                    for a in 0..sr {
                        for b in 0..sc {
                            local[a * nc + b] += w * vr[a] * vc[b];
                        }
                    }
                }
                BilinearForm::Stiffness { coef } => {
                    for a in 0..sr {
                        for b in 0..sc {
                            local[a * nc + b] += w * coef * (gr[a][0] * gc[b][0] + gr[a][1] * gc[b][1]);
                        }
                    }
                }
            }
        }
        row.dofs_of(cell, &mut rdofs);
        col.dofs_of(cell, &mut cdofs);
        for (i, &gi) in rdofs.iter().enumerate() {
            for (j, &gj) in cdofs.iter().enumerate() {
                triplets.push((gi, gj, local[i * nc + j]));
            }
        }
    }
    Ok(CsrMatrix::from_triplets(row.dof_count(), col.dof_count(), triplets))
}

/// `2μ (ε(u), ε(v))`.
pub fn assemble_elasticity<T: Real>(space_u: &FESpace<T>, params: &PhysicalParams<T>) -> Result<CsrMatrix<T>> {
    assemble_form(space_u, space_u, BilinearForm::Elasticity { two_mu: T::lit(2.0) * params.mu }, CellOrder::Forward)
}

/// `(∇·u, w_q)`, rows indexed by the stress space.
pub fn assemble_divergence<T: Real>(space_u: &FESpace<T>, space_q: &FESpace<T>) -> Result<CsrMatrix<T>> {
    assemble_form(space_q, space_u, BilinearForm::Divergence, CellOrder::Forward)
}

pub fn assemble_mass<T: Real>(space_row: &FESpace<T>, space_col: &FESpace<T>) -> Result<CsrMatrix<T>> {
    assemble_form(space_row, space_col, BilinearForm::Mass, CellOrder::Forward)
}

/// `κ (∇p, ∇w)`.
pub fn assemble_pressure_stiffness<T: Real>(space_p: &FESpace<T>, params: &PhysicalParams<T>) -> Result<CsrMatrix<T>> {
    assemble_form(space_p, space_p, BilinearForm::Stiffness { coef: params.kappa }, CellOrder::Forward)
}

/// `(∇u, ∇v)` on a vector space (the H¹ seminorm Gram matrix).
pub fn assemble_vector_laplacian<T: Real>(space_u: &FESpace<T>) -> Result<CsrMatrix<T>> {
    assemble_form(space_u, space_u, BilinearForm::VectorLaplacian, CellOrder::Forward)
}

/// Interior density: fills one value per component at `(x, y)`.
pub type Density<'a, T> = &'a dyn Fn(T, T, &mut [T]);
/// Boundary density: fills one value per component at `(x, y)` with outward normal `n`.
pub type BoundaryDensity<'a, T> = &'a dyn Fn(T, T, [T; 2], &mut [T]);

/// `(f, v) + ⟨h, v⟩_{Γ_N}` with degree-8 quadrature on cells and Neumann edges.
pub fn assemble_load<T: Real>(
    space: &FESpace<T>,
    interior: Option<Density<'_, T>>,
    boundary: Option<BoundaryDensity<'_, T>>,
) -> Result<Vec<T>> {
    let mesh = &space.mesh;
    let comps = space.components;
    let n = space.local_nodes();
    let mut out = vec![T::zero(); space.dof_count()];
    let mut val = [T::zero(); 2];
    let two = T::lit(2.0);
    if let Some(f) = interior {
        let rule = triangle_rule::<T>(EXACT_DEGREE)?;
        let tab = Tabulation::new(space.element, &rule.points);
        for cell in 0..mesh.num_cells() {
            let geo = CellGeometry::new(mesh, cell)?;
            let nodes = space.nodes_of(cell);
            for (q, &wq) in rule.weights.iter().enumerate() {
                let [x, y] = geo.map(rule.points[q]);
                f(x, y, &mut val[..comps]);
                let w = wq * two * geo.area;
                for a in 0..n {
                    let phi = tab.values[q][a] * w;
                    for c in 0..comps {
                        out[nodes[a] * comps + c] += phi * val[c];
                    }
                }
            }
        }
    }
    if let Some(h) = boundary {
        let rule = edge_rule::<T>(EXACT_DEGREE)?;
        let mut values = [T::zero(); MAX_NODES];
        let mut dbary = [[T::zero(); 3]; MAX_NODES];
        for e in mesh.boundary_edges_tagged(BoundaryTag::Neumann) {
            let cell = mesh.edge_cells[e][0];
            let k = mesh.cell_edges[cell].iter().position(|&ce| ce == e).expect("edge belongs to its cell");
            let (i, j) = P2_EDGES[k];
            let geo = CellGeometry::new(mesh, cell)?;
            let normal = mesh.outward_normal(e);
            let len = mesh.edge_length(e);
            let nodes = space.nodes_of(cell);
            for (s, &ws) in rule.points.iter().zip(&rule.weights) {
                let mut b = [T::zero(); 3];
                b[i] = T::one() - *s;
                b[j] = *s;
                space.element.eval(b, &mut values, &mut dbary);
                let [x, y] = geo.map(b);
                h(x, y, normal, &mut val[..comps]);
                let w = ws * len;
                for a in 0..n {
                    let phi = values[a] * w;
                    for c in 0..comps {
                        out[nodes[a] * comps + c] += phi * val[c];
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Flux density: fills, per component `c`, the vector paired with `∇v_c`.
pub type FluxDensity<'a, T> = &'a dyn Fn(T, T, &mut [[T; 2]]);

/// `Σ_c (G_c, ∇v_c)` with degree-8 quadrature.
pub fn assemble_flux_load<T: Real>(space: &FESpace<T>, flux: FluxDensity<'_, T>) -> Result<Vec<T>> {
    let mesh = &space.mesh;
    let comps = space.components;
    let n = space.local_nodes();
    let rule = triangle_rule::<T>(EXACT_DEGREE)?;
    let tab = Tabulation::new(space.element, &rule.points);
    let mut out = vec![T::zero(); space.dof_count()];
    let mut val = [[T::zero(); 2]; 2];
    let two = T::lit(2.0);
    for cell in 0..mesh.num_cells() {
        let geo = CellGeometry::new(mesh, cell)?;
        let nodes = space.nodes_of(cell);
        for (q, &wq) in rule.weights.iter().enumerate() {
            let [x, y] = geo.map(rule.points[q]);
            flux(x, y, &mut val[..comps]);
            let w = wq * two * geo.area;
            let grads = tab.gradients(&geo, q);
            for a in 0..n {
                for c in 0..comps {
                    out[nodes[a] * comps + c] += w * (val[c][0] * grads[a][0] + val[c][1] * grads[a][1]);
                }
            }
        }
    }
    Ok(out)
}

/// Right sides `(F_u, G_p)` of the step system at time `t` for a manufactured case.
pub fn assemble_loads<T: Real>(
    t: T,
    case: &ManufacturedCase<T>,
    space_u: &FESpace<T>,
    space_p: &FESpace<T>,
) -> Result<(Vec<T>, Vec<T>)> {
    let f = |x: T, y: T, out: &mut [T]| out.copy_from_slice(&case.f(x, y, t));
    let beta = |x: T, y: T, n: [T; 2], out: &mut [T]| out.copy_from_slice(&case.beta(x, y, t, n));
    let g = |x: T, y: T, out: &mut [T]| out[0] = case.g(x, y, t);
    let gamma = |x: T, y: T, n: [T; 2], out: &mut [T]| out[0] = case.gamma(x, y, t, n);
    let fu = assemble_load(space_u, Some(&f), Some(&beta))?;
    let gp = assemble_load(space_p, Some(&g), Some(&gamma))?;
    Ok((fu, gp))
}

/// Time-independent pieces of the loads: `F(t) = a(t) F_a + b(t) F_b`,
/// `G(t) = a'(t) G_da + b(t) G_b`.
#[derive(Debug, Clone)]
pub struct LoadModes<T> {
    pub f_a: Vec<T>,
    pub f_b: Vec<T>,
    pub g_da: Vec<T>,
    pub g_b: Vec<T>,
}

impl<T: Real> LoadModes<T> {
    pub fn assemble(case: &ManufacturedCase<T>, space_u: &FESpace<T>, space_p: &FESpace<T>) -> Result<Self> {
        let fa = |x: T, y: T, out: &mut [T]| out.copy_from_slice(&case.f_modes(x, y).0);
        let fb = |x: T, y: T, out: &mut [T]| out.copy_from_slice(&case.f_modes(x, y).1);
        let ba = |x: T, y: T, n: [T; 2], out: &mut [T]| out.copy_from_slice(&case.beta_modes(x, y, n).0);
        let bb = |x: T, y: T, n: [T; 2], out: &mut [T]| out.copy_from_slice(&case.beta_modes(x, y, n).1);
        let ga = |x: T, y: T, out: &mut [T]| out[0] = case.g_modes(x, y).0;
        let gb = |x: T, y: T, out: &mut [T]| out[0] = case.g_modes(x, y).1;
        let gm = |x: T, y: T, n: [T; 2], out: &mut [T]| out[0] = case.gamma_mode(x, y, n);
        Ok(LoadModes {
            f_a: assemble_load(space_u, Some(&fa), Some(&ba))?,
            f_b: assemble_load(space_u, Some(&fb), Some(&bb))?,
            g_da: assemble_load(space_p, Some(&ga), None)?,
            g_b: assemble_load(space_p, Some(&gb), Some(&gm))?,
        })
    }

    /// Writes `F(t)` and `G(t)` into the given buffers.
    pub fn combine(&self, case: &ManufacturedCase<T>, t: T, fu: &mut [T], gp: &mut [T]) {
        let tf = case.time_factors(t);
        for (o, (a, b)) in fu.iter_mut().zip(self.f_a.iter().zip(&self.f_b)) {
            *o = tf.a * *a + tf.b * *b;
        }
        for (o, (a, b)) in gp.iter_mut().zip(self.g_da.iter().zip(&self.g_b)) {
            *o = tf.da * *a + tf.b * *b;
        }
    }
}

/// A square matrix with some dofs eliminated symmetrically: their rows and columns
/// are zeroed with a unit diagonal, and right sides receive the lifting `-A[:, D] g`.
#[derive(Debug, Clone)]
pub struct DirichletSystem<T> {
    pub matrix: CsrMatrix<T>,
    pub dofs: Vec<usize>,
    /// Original columns of the constrained dofs, all rows.
    lifting: CsrMatrix<T>,
}

impl<T: Real> DirichletSystem<T> {
    pub fn new(a: &CsrMatrix<T>, dofs: &[usize]) -> Result<Self> {
        let n = a.nrows;
        let mut fixed = vec![false; n];
        for &d in dofs {
            if d >= n {
                return Err(Error::OutOfRange { index: d, len: n });
            }
            fixed[d] = true;
        }
        let mut t = Vec::with_capacity(a.nnz());
        let mut lift = Vec::new();
        let mut col_of = vec![usize::MAX; n];
        for (k, &d) in dofs.iter().enumerate() {
            col_of[d] = k;
        }
        for i in 0..n {
            for (j, v) in a.row(i) {
                if fixed[j] {
                    lift.push((i, col_of[j], v));
                }
                if !fixed[i] && !fixed[j] {
                    t.push((i, j, v));
                }
            }
            if fixed[i] {
                t.push((i, i, T::one()));
            }
        }
        Ok(DirichletSystem {
            matrix: CsrMatrix::from_triplets(n, n, t),
            dofs: dofs.to_vec(),
            lifting: CsrMatrix::from_triplets(n, dofs.len(), lift),
        })
    }

    /// Lifts `rhs` in place for boundary values `values[k]` at `dofs[k]`.
    pub fn lift(&self, rhs: &mut [T], values: &[T]) -> Result<()> {
        if values.len() != self.dofs.len() {
            let missing = self.dofs.get(values.len()).copied().unwrap_or(usize::MAX);
            return Err(Error::MissingBoundaryValue(missing));
        }
        self.lifting.matvec_add(-T::one(), values, rhs);
        for (&d, &v) in self.dofs.iter().zip(values) {
            rhs[d] = v;
        }
        Ok(())
    }
}

/// Eliminates `dofs` from `A x = b` with prescribed values; returns the constrained
/// matrix and the lifted right side.
pub fn apply_dirichlet<T: Real>(
    a: &CsrMatrix<T>,
    rhs: &[T],
    dofs: &[usize],
    values: &[T],
) -> Result<(CsrMatrix<T>, Vec<T>)> {
    let sys = DirichletSystem::new(a, dofs)?;
    let mut b = rhs.to_vec();
    sys.lift(&mut b, values)?;
    Ok((sys.matrix, b))
}

/// The blocks of the three-field operator before time discretization.
#[derive(Debug, Clone)]
pub struct BlockSystem<T> {
    /// `2μ (ε(u), ε(v))`
    pub a: CsrMatrix<T>,
    /// `(∇·u, w_q)`
    pub b: CsrMatrix<T>,
    pub m_qq: CsrMatrix<T>,
    /// `(p, w_q)`
    pub m_qp: CsrMatrix<T>,
    pub m_pp: CsrMatrix<T>,
    /// `κ (∇p, ∇w)`
    pub k: CsrMatrix<T>,
    pub dirichlet_u: Vec<usize>,
    pub dirichlet_p: Vec<usize>,
}

impl<T: Real> BlockSystem<T> {
    pub fn assemble(
        space_u: &FESpace<T>,
        space_q: &FESpace<T>,
        space_p: &FESpace<T>,
        params: &PhysicalParams<T>,
    ) -> Result<Self> {
        params.validate()?;
        if !space_u.same_mesh(space_q) || !space_u.same_mesh(space_p) {
            return Err(Error::MeshMismatch);
        }
        Ok(BlockSystem {
            a: assemble_elasticity(space_u, params)?,
            b: assemble_divergence(space_u, space_q)?,
            m_qq: assemble_mass(space_q, space_q)?,
            m_qp: assemble_mass(space_q, space_p)?,
            m_pp: assemble_mass(space_p, space_p)?,
            k: assemble_pressure_stiffness(space_p, params)?,
            dirichlet_u: space_u.dirichlet_dofs.clone(),
            dirichlet_p: space_p.dirichlet_dofs.clone(),
        })
    }
}
