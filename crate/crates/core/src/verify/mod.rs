//! Error norms against interpolants and exact fields, observed orders, convergence
//! studies and the inf-sup estimator.

mod infsup;
mod report;
mod study;

pub use infsup::{estimate_infsup, InfSupPair, InfSupReport, InfSupRow, DENSE_LIMIT};
pub use report::{format_sci, ConvergenceReport, ReportRow, SweepKind};
pub use study::{check_gates, default_gates, run_study, run_study_observed, write_outputs, Gate, GateOutcome, StudyConfig};

use std::fmt;

use crate::error::{Error, Result};
use crate::fem::element::{CellGeometry, Tabulation};
use crate::fem::{triangle_rule, EXACT_DEGREE};
use crate::manufactured::ManufacturedCase;
use crate::scalar::Real;
use crate::solver::{Discretization, FieldState};

/// The five reported error measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Norm {
    /// `‖ε(e_u)‖`
    EnergyU,
    L2U,
    L2Q,
    /// `‖∇e_p‖`
    H1P,
    L2P,
}

impl Norm {
    pub const ALL: [Norm; 5] = [Norm::EnergyU, Norm::L2U, Norm::L2Q, Norm::H1P, Norm::L2P];

    pub fn name(self) -> &'static str {
        match self {
            Norm::EnergyU => "energy_u",
            Norm::L2U => "l2_u",
            Norm::L2Q => "l2_q",
            Norm::H1P => "h1_p",
            Norm::L2P => "l2_p",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormSet<T> {
    pub energy_u: T,
    pub l2_u: T,
    pub l2_q: T,
    pub h1_p: T,
    pub l2_p: T,
}

impl<T: Real> NormSet<T> {
    pub fn from_values(v: [T; 5]) -> Self {
        NormSet { energy_u: v[0], l2_u: v[1], l2_q: v[2], h1_p: v[3], l2_p: v[4] }
    }

    pub fn values(&self) -> [T; 5] {
        [self.energy_u, self.l2_u, self.l2_q, self.h1_p, self.l2_p]
    }

    pub fn get(&self, norm: Norm) -> T {
        self.values()[norm.index()]
    }

    pub fn to_f64(&self) -> NormSet<f64> {
        NormSet::from_values(self.values().map(|v| v.to_f64_lossy()))
    }
}

/// Errors at one time level, against the interpolant of the exact solution (the
/// reported quantity) and against the exact fields themselves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport<T> {
    pub t: T,
    pub interpolant: NormSet<T>,
    pub exact: NormSet<T>,
}

/// Evaluates both error sets of `state` at `state.t` with a degree-8 rule.
///
/// Interpolants are nodal: P2 for `u`, P1 for `p`, and for `q` the centroid value
/// (P0) or the P1 nodal interpolant (Taylor-Hood).
pub fn compute_errors<T: Real>(
    state: &FieldState<T>,
    case: &ManufacturedCase<T>,
    disc: &Discretization<T>,
) -> Result<ErrorReport<T>> {
    let (nu, nq, np) = disc.sizes();
    for (expected, got) in [(nu, state.u.len()), (nq, state.q.len()), (np, state.p.len())] {
        if expected != got {
            return Err(Error::DimensionMismatch { expected, got });
        }
    }
    let t = state.t;
    let interp = disc.interpolate_exact(case, t);
    let rule = triangle_rule::<T>(EXACT_DEGREE)?;
    let tu = Tabulation::new(disc.space_u.element, &rule.points);
    let tq = Tabulation::new(disc.space_q.element, &rule.points);
    let tp = Tabulation::new(disc.space_p.element, &rule.points);
    let z = T::zero();
    let two = T::lit(2.0);
    let mut acc_i = [z; 5];
    let mut acc_e = [z; 5];
    let mesh = &disc.mesh;
    for cell in 0..mesh.num_cells() {
        let geo = CellGeometry::new(mesh, cell)?;
        let nodes_u = disc.space_u.nodes_of(cell);
        let nodes_q = disc.space_q.nodes_of(cell);
        let nodes_p = disc.space_p.nodes_of(cell);
        for (qi, &wq) in rule.weights.iter().enumerate() {
            let w = wq * two * geo.area;
            let [x, y] = geo.map(rule.points[qi]);
            let gu = tu.gradients(&geo, qi);
            let gp = tp.gradients(&geo, qi);

            // Discrete solution and interpolation error e = I_h u - u_h.
            let (mut uh, mut guh) = ([z; 2], [[z; 2]; 2]);
            let (mut ei, mut gei) = ([z; 2], [[z; 2]; 2]);
            for (a, &node) in nodes_u.iter().enumerate() {
                let phi = tu.values[qi][a];
                for c in 0..2 {
                    let dh = state.u[2 * node + c];
                    let di = interp.u[2 * node + c] - dh;
                    uh[c] += dh * phi;
                    ei[c] += di * phi;
                    for d in 0..2 {
                        guh[c][d] += dh * gu[a][d];
                        gei[c][d] += di * gu[a][d];
                    }
                }
            }
            let (mut qh, mut eqi) = (z, z);
            for (a, &node) in nodes_q.iter().enumerate() {
                let phi = tq.values[qi][a];
                qh += state.q[node] * phi;
                eqi += (interp.q[node] - state.q[node]) * phi;
            }
            let (mut ph, mut gph, mut epi, mut gepi) = (z, [z; 2], z, [z; 2]);
            for (a, &node) in nodes_p.iter().enumerate() {
                let phi = tp.values[qi][a];
                let di = interp.p[node] - state.p[node];
                ph += state.p[node] * phi;
                epi += di * phi;
                for d in 0..2 {
                    gph[d] += state.p[node] * gp[a][d];
                    gepi[d] += di * gp[a][d];
                }
            }

            let u = case.u_exact(x, y, t);
            let gue = case.grad_u_exact(x, y, t);
            let eu = [u[0] - uh[0], u[1] - uh[1]];
            let mut geu = [[z; 2]; 2];
            for c in 0..2 {
                for d in 0..2 {
                    geu[c][d] = gue[c][d] - guh[c][d];
                }
            }
            let gpe = case.grad_p_exact(x, y, t);
            let epe = case.p_exact(x, y, t) - ph;
            let gepe = [gpe[0] - gph[0], gpe[1] - gph[1]];
            let eqe = case.q_exact(x, y, t) - qh;

            accumulate(&mut acc_i, w, ei, gei, eqi, epi, gepi);
            accumulate(&mut acc_e, w, eu, geu, eqe, epe, gepe);
        }
    }
    Ok(ErrorReport {
        t,
        interpolant: NormSet::from_values(acc_i.map(|v| v.sqrt())),
        exact: NormSet::from_values(acc_e.map(|v| v.sqrt())),
    })
}

fn accumulate<T: Real>(acc: &mut [T; 5], w: T, eu: [T; 2], geu: [[T; 2]; 2], eq: T, ep: T, gep: [T; 2]) {
    let shear = (geu[0][1] + geu[1][0]) * T::lit(0.5);
    acc[0] += w * (geu[0][0] * geu[0][0] + geu[1][1] * geu[1][1] + T::lit(2.0) * shear * shear);
    acc[1] += w * (eu[0] * eu[0] + eu[1] * eu[1]);
    acc[2] += w * eq * eq;
    acc[3] += w * (gep[0] * gep[0] + gep[1] * gep[1]);
    acc[4] += w * ep * ep;
}

/// `log₂(e_coarse / e_fine)` for a factor-2 refinement.
pub fn observed_order(e_coarse: f64, e_fine: f64) -> Result<f64> {
    if !(e_coarse > 0.0 && e_fine > 0.0 && e_coarse.is_finite() && e_fine.is_finite()) {
        return Err(Error::UndefinedOrder { coarse: e_coarse, fine: e_fine });
    }
    Ok((e_coarse / e_fine).log2())
}
