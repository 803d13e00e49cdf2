//! Initial projections, the backward-Euler step operator and the time loop.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::assembly::{
    assemble_flux_load, assemble_form, assemble_load, BilinearForm, BlockSystem, CellOrder, DirichletSystem,
    LoadModes, PhysicalParams,
};
use crate::error::{Error, Result};
use crate::fem::{make_space, FESpace, SpaceKind};
use crate::manufactured::ManufacturedCase;
use crate::mesh::{BoundaryLayout, Mesh};
use crate::scalar::Real;
use crate::sparse::{block_matrix, compute_ordering, delay_after, Block, CsrMatrix, Graph, OrderingKind, SparseLu};

/// Relative pivot threshold. With the pressure row scaled by τ the step matrix is
/// positive real, so diagonal pivots exist and a loose threshold keeps the fill of
/// the symmetric ordering; off-diagonal pivoting at 0.1 more than doubled it.
const PIVOT_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElementPair {
    /// Continuous P2 displacement, discontinuous P0 total stress, P1 pressure.
    P2P0P1,
    /// Taylor-Hood displacement/stress pair with P1 pressure.
    P2P1P1,
}

impl ElementPair {
    pub const ALL: [ElementPair; 2] = [ElementPair::P2P0P1, ElementPair::P2P1P1];

    pub fn stress_kind(self) -> SpaceKind {
        match self {
            ElementPair::P2P0P1 => SpaceKind::P0,
            ElementPair::P2P1P1 => SpaceKind::P1Unconstrained,
        }
    }
}

impl FromStr for ElementPair {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "p2-p0-p1" => Ok(ElementPair::P2P0P1),
            "p2-p1-p1" => Ok(ElementPair::P2P1P1),
            _ => Err(Error::Unknown { what: "element pair", name: s.to_string() }),
        }
    }
}

impl fmt::Display for ElementPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ElementPair::P2P0P1 => "p2-p0-p1",
            ElementPair::P2P1P1 => "p2-p1-p1",
        })
    }
}

/// How the time step follows the mesh: `τ = h²`, `τ = h`, or a fixed value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TauRule {
    H2,
    H,
    Fixed(f64),
}

impl TauRule {
    pub fn tau<T: Real>(&self, n: usize) -> T {
        let h = T::one() / T::from_count(n);
        match *self {
            TauRule::H2 => h * h,
            TauRule::H => h,
            TauRule::Fixed(v) => T::lit(v),
        }
    }
}

impl FromStr for TauRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.to_ascii_lowercase().as_str() {
            "h2" => Ok(TauRule::H2),
            "h" => Ok(TauRule::H),
            other => {
                let value = other
                    .strip_prefix("fixed:")
                    .ok_or_else(|| Error::Unknown { what: "tau rule", name: s.to_string() })?;
                let v = parse_number(value).ok_or_else(|| Error::Unknown { what: "tau rule", name: s.to_string() })?;
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::InvalidParameter(format!("time step must be positive, got {v}")));
                }
                Ok(TauRule::Fixed(v))
            }
        }
    }
}

/// Parses `0.25` or a fraction such as `1/4`.
pub fn parse_number(s: &str) -> Option<f64> {
    match s.split_once('/') {
        Some((a, b)) => Some(a.trim().parse::<f64>().ok()? / b.trim().parse::<f64>().ok()?),
        None => s.trim().parse().ok(),
    }
}

impl fmt::Display for TauRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TauRule::H2 => f.write_str("h2"),
            TauRule::H => f.write_str("h"),
            TauRule::Fixed(v) => write!(f, "fixed:{v}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid<T> {
    pub tau: T,
    pub steps: usize,
    pub t_bar: T,
}

impl<T: Real> TimeGrid<T> {
    pub fn new(t_bar: T, tau: T) -> Result<Self> {
        if !(tau > T::zero()) {
            return Err(Error::InvalidParameter(format!("time step must be positive, got {tau}")));
        }
        let ratio = t_bar / tau;
        let steps = ratio.round();
        if steps < T::one() || (steps * tau - t_bar).abs() > T::lit(1e-12) * t_bar.max(T::one()) {
            return Err(Error::NonIntegralSteps { n: 0, rule: format!("tau={tau}"), ratio: ratio.to_f64_lossy() });
        }
        Ok(TimeGrid { tau, steps: steps.to_usize().unwrap_or(0), t_bar })
    }

    pub fn from_rule(n: usize, rule: TauRule, t_bar: T) -> Result<Self> {
        Self::new(t_bar, rule.tau(n)).map_err(|e| match e {
            Error::NonIntegralSteps { ratio, .. } => Error::NonIntegralSteps { n, rule: rule.to_string(), ratio },
            other => other,
        })
    }

    /// `t^k = k τ`.
    pub fn time(&self, k: usize) -> T {
        T::from_count(k) * self.tau
    }
}

/// Coefficient vectors at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState<T> {
    pub u: Vec<T>,
    pub q: Vec<T>,
    pub p: Vec<T>,
    pub t: T,
}

impl<T: Real> FieldState<T> {
    pub fn zeros(disc: &Discretization<T>, t: T) -> Self {
        FieldState {
            u: vec![T::zero(); disc.space_u.dof_count()],
            q: vec![T::zero(); disc.space_q.dof_count()],
            p: vec![T::zero(); disc.space_p.dof_count()],
            t,
        }
    }

    /// Largest absolute coefficient.
    pub fn max_abs(&self) -> T {
        self.u.iter().chain(&self.q).chain(&self.p).fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Largest absolute coefficient difference to another state.
    pub fn max_diff(&self, other: &Self) -> T {
        let d = |a: &[T], b: &[T]| a.iter().zip(b).fold(T::zero(), |m, (x, y)| m.max((*x - *y).abs()));
        d(&self.u, &other.u).max(d(&self.q, &other.q)).max(d(&self.p, &other.p))
    }
}

/// Mesh and the three spaces of one element pair.
#[derive(Debug, Clone)]
pub struct Discretization<T> {
    pub mesh: Arc<Mesh<T>>,
    pub pair: ElementPair,
    pub space_u: FESpace<T>,
    pub space_q: FESpace<T>,
    pub space_p: FESpace<T>,
}

impl<T: Real> Discretization<T> {
    pub fn new(n: usize, layout: BoundaryLayout, pair: ElementPair) -> Result<Self> {
        Ok(Self::on_mesh(Arc::new(Mesh::unit_square_with(n, layout)?), pair))
    }

    pub fn on_mesh(mesh: Arc<Mesh<T>>, pair: ElementPair) -> Self {
        Discretization {
            space_u: make_space(&mesh, SpaceKind::P2Vector),
            space_q: make_space(&mesh, pair.stress_kind()),
            space_p: make_space(&mesh, SpaceKind::P1Continuous),
            mesh,
            pair,
        }
    }

    pub fn sizes(&self) -> (usize, usize, usize) {
        (self.space_u.dof_count(), self.space_q.dof_count(), self.space_p.dof_count())
    }

    /// Dof coordinates of the monolithic `[u; q; p]` system, for ordering.
    pub fn monolithic_coords(&self) -> Vec<[f64; 2]> {
        let conv = |s: &FESpace<T>| -> Vec<[f64; 2]> {
            s.dof_coords().into_iter().map(|[x, y]| [x.to_f64_lossy(), y.to_f64_lossy()]).collect()
        };
        let mut c = conv(&self.space_u);
        c.extend(conv(&self.space_q));
        c.extend(conv(&self.space_p));
        c
    }

    /// Nodal interpolant of the exact solution at time `t` (P0 stress at centroids).
    pub fn interpolate_exact(&self, case: &ManufacturedCase<T>, t: T) -> FieldState<T> {
        FieldState {
            u: self.space_u.interpolate(|x, y, c| case.u_exact(x, y, t)[c]),
            q: self.space_q.interpolate(|x, y, _| case.q_exact(x, y, t)),
            p: self.space_p.interpolate(|x, y, _| case.p_exact(x, y, t)),
            t,
        }
    }

    fn has_neumann(&self) -> bool {
        self.mesh.boundary_edges.iter().any(|&(_, tag)| tag == crate::mesh::BoundaryTag::Neumann)
    }
}

/// Factorizes with a fill-reducing order of the first `n - trailing` unknowns and
/// the remaining `trailing` unknowns eliminated last. Unknowns in `delayed` (the
/// stress block) wait for their displacement neighbours.
fn factorize_ordered<T: Real>(
    a: &CsrMatrix<T>,
    coords: &[[f64; 2]],
    trailing: usize,
    delayed: std::ops::Range<usize>,
    kind: OrderingKind,
) -> Result<SparseLu<T>> {
    let n = a.nrows;
    let head = n - trailing;
    let keep: Vec<usize> = (0..head).collect();
    let sub = if trailing == 0 { a.clone() } else { a.submatrix(&keep, &keep) };
    let graph = Graph::from_pattern(&sub);
    let mut order = compute_ordering(&graph, kind, Some(&coords[..head]));
    if !delayed.is_empty() {
        let flags: Vec<bool> = (0..head).map(|i| delayed.contains(&i)).collect();
        order = delay_after(&graph, &order, &flags);
    }
    order.extend(head..n);
    SparseLu::factorize_with_ordering(a, order, T::lit(PIVOT_THRESHOLD))
}

/// Exact fields consumed by the Stokes projection.
pub struct StokesData<'a, T> {
    pub u: &'a dyn Fn(T, T) -> [T; 2],
    pub grad_u: &'a dyn Fn(T, T) -> [[T; 2]; 2],
    pub q: &'a dyn Fn(T, T) -> T,
}

/// Discrete pair `(u_h, q_h)` with
/// `2μ(ε(u_h),ε(v)) - (q_h,∇·v) = 2μ(ε(u),ε(v)) - (q,∇·v)` and `(w,∇·u_h) = (w,∇·u)`,
/// `u_h` interpolating `u` on Γ_D. Without a Neumann boundary the constants are in the
/// kernel of the adjoint divergence; a multiplier then fixes `∫q_h = ∫q`.
pub fn stokes_projection<T: Real>(
    disc: &Discretization<T>,
    blocks: &BlockSystem<T>,
    params: &PhysicalParams<T>,
    data: &StokesData<'_, T>,
) -> Result<(Vec<T>, Vec<T>)> {
    let (nu, nq, _) = disc.sizes();
    let mu = params.mu;
    let flux = |x: T, y: T, out: &mut [[T; 2]]| {
        let g = (data.grad_u)(x, y);
        let q = (data.q)(x, y);
        let shear = mu * (g[0][1] + g[1][0]);
        out[0] = [(mu + mu) * g[0][0] - q, shear];
        out[1] = [shear, (mu + mu) * g[1][1] - q];
    };
    let div = |x: T, y: T, out: &mut [T]| {
        let g = (data.grad_u)(x, y);
        out[0] = g[0][0] + g[1][1];
    };
    let mut rhs = assemble_flux_load(&disc.space_u, &flux)?;
    rhs.extend(assemble_load(&disc.space_q, Some(&div), None)?);

    let bt = blocks.b.transpose();
    let mut blocks_list = vec![
        Block { row: 0, col: 0, matrix: &blocks.a, scale: T::one() },
        Block { row: 0, col: 1, matrix: &bt, scale: -T::one() },
        Block { row: 1, col: 0, matrix: &blocks.b, scale: T::one() },
    ];
    let constrain_mean = !disc.has_neumann();
    let (m_col, m_row);
    let mut row_sizes = vec![nu, nq];
    if constrain_mean {
        // m_i = ∫ w_i
        let m = blocks.m_qq.matvec(&vec![T::one(); nq]);
        m_col = CsrMatrix::from_triplets(nq, 1, m.iter().enumerate().map(|(i, &v)| (i, 0, v)).collect());
        m_row = m_col.transpose();
        blocks_list.push(Block { row: 1, col: 2, matrix: &m_col, scale: T::one() });
        blocks_list.push(Block { row: 2, col: 1, matrix: &m_row, scale: T::one() });
        row_sizes.push(1);
        let q_ex = |x: T, y: T, out: &mut [T]| out[0] = (data.q)(x, y);
        let ones = assemble_load(&disc.space_p, Some(&q_ex), None)?;
        rhs.push(ones.iter().copied().sum());
    }
    let full = block_matrix(&row_sizes, &row_sizes, &blocks_list)?;
    let sys = DirichletSystem::new(&full, &disc.space_u.dirichlet_dofs)?;
    let values: Vec<T> = disc
        .space_u
        .dirichlet_dofs
        .iter()
        .map(|&d| {
            let [x, y] = disc.space_u.node_coords[d / 2];
            (data.u)(x, y)[d % 2]
        })
        .collect();
    sys.lift(&mut rhs, &values)?;
    let mut coords = disc.monolithic_coords();
    coords.truncate(nu + nq);
    coords.extend(std::iter::repeat_n([0.5, 0.5], row_sizes.len() - 2));
    let lu = factorize_ordered(&sys.matrix, &coords, usize::from(constrain_mean), nu..nu + nq, OrderingKind::CoordinateDissection)?;
    let x = lu.solve(&rhs)?;
    Ok((x[..nu].to_vec(), x[nu..nu + nq].to_vec()))
}

/// Ritz projection `(∇p_h, ∇w) = (∇p, ∇w)` with `p_h` interpolating `p` on Γ_D.
pub fn elliptic_projection<T: Real>(
    space_p: &FESpace<T>,
    p_exact: &dyn Fn(T, T) -> T,
    grad_p: &dyn Fn(T, T) -> [T; 2],
) -> Result<Vec<T>> {
    let k = assemble_form(space_p, space_p, BilinearForm::Stiffness { coef: T::one() }, CellOrder::Forward)?;
    let flux = |x: T, y: T, out: &mut [[T; 2]]| out[0] = grad_p(x, y);
    let mut rhs = assemble_flux_load(space_p, &flux)?;
    let sys = DirichletSystem::new(&k, &space_p.dirichlet_dofs)?;
    let values: Vec<T> = space_p
        .dirichlet_dofs
        .iter()
        .map(|&d| {
            let [x, y] = space_p.node_coords[d];
            p_exact(x, y)
        })
        .collect();
    sys.lift(&mut rhs, &values)?;
    let coords: Vec<[f64; 2]> =
        space_p.dof_coords().into_iter().map(|[x, y]| [x.to_f64_lossy(), y.to_f64_lossy()]).collect();
    let lu = factorize_ordered(&sys.matrix, &coords, 0, 0..0, OrderingKind::CoordinateDissection)?;
    lu.solve(&rhs)
}

/// Projected initial data: Stokes projection of `(φ, q₀)` and elliptic projection of `φ_p`.
pub fn initial_state<T: Real>(
    case: &ManufacturedCase<T>,
    disc: &Discretization<T>,
    blocks: &BlockSystem<T>,
) -> Result<FieldState<T>> {
    let z = T::zero();
    let u = |x: T, y: T| case.u_exact(x, y, z);
    let grad_u = |x: T, y: T| case.grad_u_exact(x, y, z);
    let q = |x: T, y: T| case.initial_total_stress(x, y);
    let (u0, q0) = stokes_projection(disc, blocks, &case.params, &StokesData { u: &u, grad_u: &grad_u, q: &q })?;
    let p = |x: T, y: T| case.p_exact(x, y, z);
    let gp = |x: T, y: T| case.grad_p_exact(x, y, z);
    let p0 = elliptic_projection(&disc.space_p, &p, &gp)?;
    Ok(FieldState { u: u0, q: q0, p: p0, t: z })
}

/// The monolithic step matrix before boundary conditions:
///
/// ```text
/// [ A            -Bᵀ            0               ]
/// [ B            λ⁻¹ M_qq       -λ⁻¹ M_qp       ]
/// [ 0            -λ⁻¹/τ M_pq    λ⁻¹/τ M_pp + K  ]
/// ```
pub fn assemble_step_matrix<T: Real>(blocks: &BlockSystem<T>, params: &PhysicalParams<T>, tau: T) -> Result<CsrMatrix<T>> {
    let li = T::one() / params.lambda;
    let lt = li / tau;
    let bt = blocks.b.transpose();
    let m_pq = blocks.m_qp.transpose();
    let sizes = [blocks.a.nrows, blocks.m_qq.nrows, blocks.m_pp.nrows];
    block_matrix(
        &sizes,
        &sizes,
        &[
            Block { row: 0, col: 0, matrix: &blocks.a, scale: T::one() },
            Block { row: 0, col: 1, matrix: &bt, scale: -T::one() },
            Block { row: 1, col: 0, matrix: &blocks.b, scale: T::one() },
            Block { row: 1, col: 1, matrix: &blocks.m_qq, scale: li },
            Block { row: 1, col: 2, matrix: &blocks.m_qp, scale: -li },
            Block { row: 2, col: 1, matrix: &m_pq, scale: -lt },
            Block { row: 2, col: 2, matrix: &blocks.m_pp, scale: lt },
            Block { row: 2, col: 2, matrix: &blocks.k, scale: T::one() },
        ],
    )
}

/// Constrained and factorized step matrix for a fixed `τ`.
#[derive(Debug, Clone)]
pub struct StepOperator<T> {
    pub tau: T,
    pub system: DirichletSystem<T>,
    lu: SparseLu<T>,
    m_pp: CsrMatrix<T>,
    m_pq: CsrMatrix<T>,
    lambda_inv_tau: T,
    sizes: (usize, usize, usize),
}

pub fn build_step_operator<T: Real>(
    disc: &Discretization<T>,
    blocks: &BlockSystem<T>,
    params: &PhysicalParams<T>,
    tau: T,
) -> Result<StepOperator<T>> {
    build_step_operator_with(disc, blocks, params, tau, OrderingKind::CoordinateDissection)
}

pub fn build_step_operator_with<T: Real>(
    disc: &Discretization<T>,
    blocks: &BlockSystem<T>,
    params: &PhysicalParams<T>,
    tau: T,
    ordering: OrderingKind,
) -> Result<StepOperator<T>> {
    if !(tau > T::zero()) {
        return Err(Error::InvalidParameter(format!("time step must be positive, got {tau}")));
    }
    let (nu, nq, np) = disc.sizes();
    let full = assemble_step_matrix(blocks, params, tau)?;
    let mut dofs = blocks.dirichlet_u.clone();
    dofs.extend(blocks.dirichlet_p.iter().map(|&d| nu + nq + d));
    let system = DirichletSystem::new(&full, &dofs)?;
    let lu = factorize_ordered(&system.matrix, &disc.monolithic_coords(), 0, 0..0, ordering)?;
    Ok(StepOperator {
        tau,
        system,
        lu,
        m_pp: blocks.m_pp.clone(),
        m_pq: blocks.m_qp.transpose(),
        lambda_inv_tau: T::one() / (params.lambda * tau),
        sizes: (nu, nq, np),
    })
}

/// Scratch vectors reused across steps.
#[derive(Debug, Clone, Default)]
pub struct StepWorkspace<T> {
    rhs: Vec<T>,
    x: Vec<T>,
    work: Vec<T>,
    values: Vec<T>,
}

impl<T: Real> StepOperator<T> {
    pub fn factor_nnz(&self) -> usize {
        self.lu.factor_nnz()
    }

    pub fn off_diagonal_pivots(&self) -> usize {
        self.lu.off_diagonal_pivots()
    }

    /// Advances `prev` to time `t` with loads `(fu, gp)` and boundary values aligned
    /// with the Dirichlet dofs of the displacement and pressure spaces.
    pub fn step(&self, prev: &FieldState<T>, fu: &[T], gp: &[T], bc_u: &[T], bc_p: &[T], t: T) -> Result<FieldState<T>> {
        let mut ws = StepWorkspace::default();
        let mut next = prev.clone();
        self.step_into(prev, fu, gp, bc_u, bc_p, t, &mut ws, &mut next)?;
        Ok(next)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn step_into(
        &self,
        prev: &FieldState<T>,
        fu: &[T],
        gp: &[T],
        bc_u: &[T],
        bc_p: &[T],
        t: T,
        ws: &mut StepWorkspace<T>,
        next: &mut FieldState<T>,
    ) -> Result<()> {
        let (nu, nq, np) = self.sizes;
        let n = nu + nq + np;
        if fu.len() != nu || gp.len() != np || prev.u.len() != nu || prev.q.len() != nq || prev.p.len() != np {
            return Err(Error::DimensionMismatch { expected: n, got: fu.len() + prev.q.len() + gp.len() });
        }
        ws.rhs.clear();
        ws.rhs.extend_from_slice(fu);
        ws.rhs.resize(nu + nq, T::zero());
        ws.rhs.extend_from_slice(gp);
        {
            let rp = &mut ws.rhs[nu + nq..];
            self.m_pp.matvec_add(self.lambda_inv_tau, &prev.p, rp);
            self.m_pq.matvec_add(-self.lambda_inv_tau, &prev.q, rp);
        }
        ws.values.clear();
        ws.values.extend_from_slice(bc_u);
        ws.values.extend_from_slice(bc_p);
        self.system.lift(&mut ws.rhs, &ws.values)?;
        ws.x.resize(n, T::zero());
        ws.work.resize(n, T::zero());
        self.lu.solve_into(&ws.rhs, &mut ws.x, &mut ws.work)?;
        next.u.clear();
        next.u.extend_from_slice(&ws.x[..nu]);
        next.q.clear();
        next.q.extend_from_slice(&ws.x[nu..nu + nq]);
        next.p.clear();
        next.p.extend_from_slice(&ws.x[nu + nq..]);
        next.t = t;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub keep_trajectory: bool,
    pub ordering: OrderingKind,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { keep_trajectory: false, ordering: OrderingKind::CoordinateDissection }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput<T> {
    pub disc: Discretization<T>,
    pub grid: TimeGrid<T>,
    pub final_state: FieldState<T>,
    /// States `0..=N` when requested, otherwise empty.
    pub trajectory: Vec<FieldState<T>>,
}

/// Projects the initial data and takes `N = T̄/τ` backward-Euler steps.
pub fn run<T: Real>(
    case: &ManufacturedCase<T>,
    pair: ElementPair,
    n: usize,
    tau_rule: TauRule,
    options: RunOptions,
) -> Result<RunOutput<T>> {
    run_observed(case, pair, n, tau_rule, options, &mut |_, _, _| Ok(()))
}

/// Observer called with `(step index, state, discretization)` for the initial state
/// and after every step.
pub type Observer<'a, T> = dyn FnMut(usize, &FieldState<T>, &Discretization<T>) -> Result<()> + 'a;

pub fn run_observed<T: Real>(
    case: &ManufacturedCase<T>,
    pair: ElementPair,
    n: usize,
    tau_rule: TauRule,
    options: RunOptions,
    observer: &mut Observer<'_, T>,
) -> Result<RunOutput<T>> {
    let grid = TimeGrid::from_rule(n, tau_rule, case.t_bar)?;
    let disc = Discretization::new(n, case.layout, pair)?;
    let blocks = BlockSystem::assemble(&disc.space_u, &disc.space_q, &disc.space_p, &case.params)?;
    let op = build_step_operator_with(&disc, &blocks, &case.params, grid.tau, options.ordering)?;
    let modes = LoadModes::assemble(case, &disc.space_u, &disc.space_p)?;

    // Boundary data separate in time as well: u_D = a(t) U_D, p_D = b(t) P_D.
    let u_d: Vec<T> = disc
        .space_u
        .dirichlet_dofs
        .iter()
        .map(|&d| {
            let [x, y] = disc.space_u.node_coords[d / 2];
            case.spatial(x, y).u[d % 2]
        })
        .collect();
    let p_d: Vec<T> = disc
        .space_p
        .dirichlet_dofs
        .iter()
        .map(|&d| {
            let [x, y] = disc.space_p.node_coords[d];
            case.spatial(x, y).p
        })
        .collect();

    let mut state = initial_state(case, &disc, &blocks)?;
    observer(0, &state, &disc)?;
    let mut trajectory = Vec::new();
    if options.keep_trajectory {
        trajectory.push(state.clone());
    }
    let (nu, _, np) = disc.sizes();
    let (mut fu, mut gp) = (vec![T::zero(); nu], vec![T::zero(); np]);
    let (mut bc_u, mut bc_p) = (vec![T::zero(); u_d.len()], vec![T::zero(); p_d.len()]);
    let mut ws = StepWorkspace::default();
    let mut next = state.clone();
    for k in 1..=grid.steps {
        let t = grid.time(k);
        modes.combine(case, t, &mut fu, &mut gp);
        let tf = case.time_factors(t);
        for (o, v) in bc_u.iter_mut().zip(&u_d) {
            *o = tf.a * *v;
        }
        for (o, v) in bc_p.iter_mut().zip(&p_d) {
            *o = tf.b * *v;
        }
        op.step_into(&state, &fu, &gp, &bc_u, &bc_p, t, &mut ws, &mut next)?;
        std::mem::swap(&mut state, &mut next);
        observer(k, &state, &disc)?;
        if options.keep_trajectory {
            trajectory.push(state.clone());
        }
    }
    Ok(RunOutput { disc, grid, final_state: state, trajectory })
}

/// Discrete energy `μ‖ε(u)‖² + (λ⁻¹/2)‖q - p‖²`, with `A = 2μ(ε,ε)`.
pub fn discrete_energy<T: Real>(blocks: &BlockSystem<T>, params: &PhysicalParams<T>, s: &FieldState<T>) -> T {
    let dot = |a: &[T], b: &[T]| a.iter().zip(b).map(|(x, y)| *x * *y).sum::<T>();
    let half = T::lit(0.5);
    let strain = half * dot(&s.u, &blocks.a.matvec(&s.u));
    // ‖q - p‖² = qᵀM_qq q - 2 qᵀM_qp p + pᵀM_pp p
    let qq = dot(&s.q, &blocks.m_qq.matvec(&s.q));
    let qp = dot(&s.q, &blocks.m_qp.matvec(&s.p));
    let pp = dot(&s.p, &blocks.m_pp.matvec(&s.p));
    strain + half / params.lambda * (qq - (qp + qp) + pp)
}
