//! Closed-form exact solutions and the data they induce.
//!
//! Every case separates in time as `u = a(t) U(x)`, `p = b(t) P(x)`, so the body
//! force, source and boundary data split into a few fixed spatial modes:
//!
//! ```text
//! f = a [-μ ΔU - (μ+λ) ∇(∇·U)] + b ∇P
//! g = a' ∇·U - b κ ΔP
//! β = a (2μ ε(U) + λ (∇·U) I) n - b P n
//! γ = b κ ∇P·n
//! ```
//!
//! The closed forms are only trusted after [`eval_strong_residual`] and its
//! companions agree with centered finite differences of `u` and `p`.

use std::fmt;
use std::str::FromStr;

use crate::assembly::PhysicalParams;
use crate::error::{Error, Result};
use crate::mesh::BoundaryLayout;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseName {
    Ex1,
    Ex2,
    Ex3,
    Ex4,
}

impl CaseName {
    pub const ALL: [CaseName; 4] = [CaseName::Ex1, CaseName::Ex2, CaseName::Ex3, CaseName::Ex4];
}

impl FromStr for CaseName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ex1" => Ok(CaseName::Ex1),
            "ex2" => Ok(CaseName::Ex2),
            "ex3" => Ok(CaseName::Ex3),
            "ex4" => Ok(CaseName::Ex4),
            _ => Err(Error::Unknown { what: "case", name: s.to_string() }),
        }
    }
}

impl fmt::Display for CaseName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CaseName::Ex1 => "ex1",
            CaseName::Ex2 => "ex2",
            CaseName::Ex3 => "ex3",
            CaseName::Ex4 => "ex4",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Shape<T> {
    Zero,
    /// `U = (sin πx cos πy, cos πx sin πy)`, `P = sin πx sin πy`.
    Waves,
    /// Nearly divergence-free field at spatial frequency `k`.
    Vortex { k: T },
    /// `U = (x² + y/2, x - xy)`, `P = 1 + x + 2y`: representable by P2/P1 exactly.
    Polynomial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TimeProfile {
    /// `a = t²`, `b = e^{-t}`.
    Quadratic,
    /// `a = b = e^{-t}`.
    Decay,
    /// `a = b = 1`.
    Steady,
}

/// Time factors of the separated solution at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeFactors<T> {
    pub a: T,
    pub da: T,
    pub b: T,
}

/// Spatial factors and their derivatives at one point.
#[derive(Debug, Clone, Copy, Default)]
pub struct SpatialFields<T> {
    pub u: [T; 2],
    /// `grad_u[i][j] = ∂_j U_i`
    pub grad_u: [[T; 2]; 2],
    /// `hess_u[i][j][k] = ∂_j ∂_k U_i`
    pub hess_u: [[[T; 2]; 2]; 2],
    pub p: T,
    pub grad_p: [T; 2],
    pub lap_p: T,
}

impl<T: Real> SpatialFields<T> {
    pub fn div_u(&self) -> T {
        self.grad_u[0][0] + self.grad_u[1][1]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManufacturedCase<T> {
    pub name: String,
    pub params: PhysicalParams<T>,
    pub layout: BoundaryLayout,
    pub t_bar: T,
    shape: Shape<T>,
    profile: TimeProfile,
}

/// Default parameters of each named case.
pub fn default_params<T: Real>(name: CaseName) -> PhysicalParams<T> {
    let lambda = match name {
        CaseName::Ex1 | CaseName::Ex2 => 1e-2,
        CaseName::Ex3 | CaseName::Ex4 => 1e4,
    };
    PhysicalParams { mu: T::one(), lambda: T::lit(lambda), kappa: T::one() }
}

pub fn get_case<T: Real>(name: CaseName, params_override: Option<PhysicalParams<T>>) -> Result<ManufacturedCase<T>> {
    let params = params_override.unwrap_or_else(|| default_params(name));
    params.validate()?;
    let (shape, profile, layout) = match name {
        CaseName::Ex1 => (Shape::Waves, TimeProfile::Quadratic, BoundaryLayout::AllDirichlet),
        CaseName::Ex2 => (Shape::Waves, TimeProfile::Quadratic, BoundaryLayout::NeumannRight),
        CaseName::Ex3 => (Shape::Vortex { k: T::PI() }, TimeProfile::Decay, BoundaryLayout::AllDirichlet),
        CaseName::Ex4 => (Shape::Vortex { k: T::one() }, TimeProfile::Decay, BoundaryLayout::AllDirichlet),
    };
    Ok(ManufacturedCase { name: name.to_string(), params, layout, t_bar: T::one(), shape, profile })
}

pub fn get_case_by_name<T: Real>(name: &str, params_override: Option<PhysicalParams<T>>) -> Result<ManufacturedCase<T>> {
    get_case(name.parse()?, params_override)
}

impl<T: Real> ManufacturedCase<T> {
    /// Identically zero solution and data.
    pub fn zero(params: PhysicalParams<T>, layout: BoundaryLayout) -> Self {
        ManufacturedCase {
            name: "zero".into(),
            params,
            layout,
            t_bar: T::one(),
            shape: Shape::Zero,
            profile: TimeProfile::Steady,
        }
    }

    /// Time-independent polynomial solution that both pairs represent exactly.
    pub fn steady_polynomial(params: PhysicalParams<T>, layout: BoundaryLayout) -> Self {
        ManufacturedCase {
            name: "steady-polynomial".into(),
            params,
            layout,
            t_bar: T::one(),
            shape: Shape::Polynomial,
            profile: TimeProfile::Steady,
        }
    }

    pub fn time_factors(&self, t: T) -> TimeFactors<T> {
        match self.profile {
            TimeProfile::Quadratic => TimeFactors { a: t * t, da: T::lit(2.0) * t, b: (-t).exp() },
            TimeProfile::Decay => {
                let e = (-t).exp();
                TimeFactors { a: e, da: -e, b: e }
            }
            TimeProfile::Steady => TimeFactors { a: T::one(), da: T::zero(), b: T::one() },
        }
    }

    pub fn spatial(&self, x: T, y: T) -> SpatialFields<T> {
        let z = T::zero();
        match self.shape {
            Shape::Zero => SpatialFields::default(),
            Shape::Waves => {
                let pi = T::PI();
                let (sx, cx) = (pi * x).sin_cos();
                let (sy, cy) = (pi * y).sin_cos();
                let pi2 = pi * pi;
                let u = [sx * cy, cx * sy];
                SpatialFields {
                    u,
                    grad_u: [[pi * cx * cy, -pi * sx * sy], [-pi * sx * sy, pi * cx * cy]],
                    hess_u: [
                        [[-pi2 * u[0], -pi2 * cx * sy], [-pi2 * cx * sy, -pi2 * u[0]]],
                        [[-pi2 * u[1], -pi2 * sx * cy], [-pi2 * sx * cy, -pi2 * u[1]]],
                    ],
                    p: sx * sy,
                    grad_p: [pi * cx * sy, pi * sx * cy],
                    lap_p: -T::lit(2.0) * pi2 * sx * sy,
                }
            }
            Shape::Vortex { k } => {
                let c = T::one() / (self.params.mu + self.params.lambda);
                let (two, four) = (T::lit(2.0), T::lit(4.0));
                let (sx, cx) = (k * x).sin_cos();
                let (sy, cy) = (k * y).sin_cos();
                let (s2x, c2x) = (two * k * x).sin_cos();
                let (s2y, c2y) = (two * k * y).sin_cos();
                let k2 = k * k;
                // S = sin kx sin ky and its derivatives.
                let s = sx * sy;
                let (s_x, s_y) = (k * cx * sy, k * sx * cy);
                let (s_xx, s_xy, s_yy) = (-k2 * s, k2 * cx * cy, -k2 * s);
                SpatialFields {
                    u: [s2y * (c2x - T::one()) + c * s, s2x * (T::one() - c2y) + c * s],
                    grad_u: [
                        [-two * k * s2y * s2x + c * s_x, two * k * c2y * (c2x - T::one()) + c * s_y],
                        [two * k * c2x * (T::one() - c2y) + c * s_x, two * k * s2x * s2y + c * s_y],
                    ],
                    hess_u: [
                        [
                            [-four * k2 * s2y * c2x + c * s_xx, -four * k2 * c2y * s2x + c * s_xy],
                            [-four * k2 * c2y * s2x + c * s_xy, -four * k2 * s2y * (c2x - T::one()) + c * s_yy],
                        ],
                        [
                            [-four * k2 * s2x * (T::one() - c2y) + c * s_xx, four * k2 * c2x * s2y + c * s_xy],
                            [four * k2 * c2x * s2y + c * s_xy, four * k2 * s2x * c2y + c * s_yy],
                        ],
                    ],
                    p: s,
                    grad_p: [s_x, s_y],
                    lap_p: -two * k2 * s,
                }
            }
            Shape::Polynomial => {
                // div u = (x + 2y)/λ cancels the gradient of p, so q = 1 lies in
                // every stress space.
                let (one, two, half) = (T::one(), T::lit(2.0), T::lit(0.5));
                let il = one / self.params.lambda;
                SpatialFields {
                    u: [half * il * x * x + half * y, x + il * y * y],
                    grad_u: [[il * x, half], [one, two * il * y]],
                    hess_u: [[[il, z], [z, z]], [[z, z], [z, two * il]]],
                    p: one + x + two * y,
                    grad_p: [one, two],
                    lap_p: z,
                }
            }
        }
    }

    pub fn u_exact(&self, x: T, y: T, t: T) -> [T; 2] {
        let a = self.time_factors(t).a;
        let s = self.spatial(x, y);
        [a * s.u[0], a * s.u[1]]
    }

    pub fn grad_u_exact(&self, x: T, y: T, t: T) -> [[T; 2]; 2] {
        let a = self.time_factors(t).a;
        let g = self.spatial(x, y).grad_u;
        [[a * g[0][0], a * g[0][1]], [a * g[1][0], a * g[1][1]]]
    }

    pub fn div_u_exact(&self, x: T, y: T, t: T) -> T {
        self.time_factors(t).a * self.spatial(x, y).div_u()
    }

    pub fn p_exact(&self, x: T, y: T, t: T) -> T {
        self.time_factors(t).b * self.spatial(x, y).p
    }

    pub fn grad_p_exact(&self, x: T, y: T, t: T) -> [T; 2] {
        let b = self.time_factors(t).b;
        let g = self.spatial(x, y).grad_p;
        [b * g[0], b * g[1]]
    }

    /// Total stress `q = -λ ∇·u + p`.
    pub fn q_exact(&self, x: T, y: T, t: T) -> T {
        let tf = self.time_factors(t);
        let s = self.spatial(x, y);
        -self.params.lambda * tf.a * s.div_u() + tf.b * s.p
    }

    /// Spatial parts of `f` multiplying `a(t)` and `b(t)`.
    pub fn f_modes(&self, x: T, y: T) -> ([T; 2], [T; 2]) {
        let s = self.spatial(x, y);
        let PhysicalParams { mu, lambda, .. } = self.params;
        let h = &s.hess_u;
        let mut fa = [T::zero(); 2];
        for (i, fi) in fa.iter_mut().enumerate() {
            let lap = h[i][0][0] + h[i][1][1];
            let grad_div = h[0][0][i] + h[1][1][i];
            *fi = -mu * lap - (mu + lambda) * grad_div;
        }
        (fa, s.grad_p)
    }

    /// Spatial parts of `g` multiplying `a'(t)` and `b(t)`.
    pub fn g_modes(&self, x: T, y: T) -> (T, T) {
        let s = self.spatial(x, y);
        (s.div_u(), -self.params.kappa * s.lap_p)
    }

    /// Spatial parts of the traction `β` multiplying `a(t)` and `b(t)`.
    pub fn beta_modes(&self, x: T, y: T, n: [T; 2]) -> ([T; 2], [T; 2]) {
        let s = self.spatial(x, y);
        let PhysicalParams { mu, lambda, .. } = self.params;
        let g = &s.grad_u;
        let div = s.div_u();
        let two = T::lit(2.0);
        let sigma = [
            [two * mu * g[0][0] + lambda * div, mu * (g[0][1] + g[1][0])],
            [mu * (g[0][1] + g[1][0]), two * mu * g[1][1] + lambda * div],
        ];
        let ba = [sigma[0][0] * n[0] + sigma[0][1] * n[1], sigma[1][0] * n[0] + sigma[1][1] * n[1]];
        (ba, [-s.p * n[0], -s.p * n[1]])
    }

    /// Spatial part of the flux `γ` multiplying `b(t)`.
    pub fn gamma_mode(&self, x: T, y: T, n: [T; 2]) -> T {
        let s = self.spatial(x, y);
        self.params.kappa * (s.grad_p[0] * n[0] + s.grad_p[1] * n[1])
    }

    pub fn f(&self, x: T, y: T, t: T) -> [T; 2] {
        let tf = self.time_factors(t);
        let (fa, fb) = self.f_modes(x, y);
        [tf.a * fa[0] + tf.b * fb[0], tf.a * fa[1] + tf.b * fb[1]]
    }

    pub fn g(&self, x: T, y: T, t: T) -> T {
        let tf = self.time_factors(t);
        let (ga, gb) = self.g_modes(x, y);
        tf.da * ga + tf.b * gb
    }

    pub fn beta(&self, x: T, y: T, t: T, n: [T; 2]) -> [T; 2] {
        let tf = self.time_factors(t);
        let (ba, bb) = self.beta_modes(x, y, n);
        [tf.a * ba[0] + tf.b * bb[0], tf.a * ba[1] + tf.b * bb[1]]
    }

    pub fn gamma(&self, x: T, y: T, t: T, n: [T; 2]) -> T {
        self.time_factors(t).b * self.gamma_mode(x, y, n)
    }

    /// Traction and flux on the Neumann boundary.
    pub fn eval_neumann_data(&self, x: T, y: T, t: T, n: [T; 2]) -> Result<([T; 2], T)> {
        if !self.layout.has_neumann() {
            return Err(Error::NoNeumannBoundary(self.name.clone()));
        }
        Ok((self.beta(x, y, t, n), self.gamma(x, y, t, n)))
    }

    /// Initial total stress `-λ ∇·φ + φ_p`, written from its definition.
    pub fn initial_total_stress(&self, x: T, y: T) -> T {
        let z = T::zero();
        -self.params.lambda * self.div_u_exact(x, y, z) + self.p_exact(x, y, z)
    }
}

/// Finite-difference steps: first derivatives and second derivatives.
const FD_STEP_1: f64 = 1e-5;
const FD_STEP_2: f64 = 1e-4;

/// Centered differences of the exact fields, independent of the closed-form data.
struct FiniteDifference<'a, T> {
    case: &'a ManufacturedCase<T>,
}

impl<T: Real> FiniteDifference<'_, T> {
    fn grad_u(&self, x: T, y: T, t: T, h: T) -> [[T; 2]; 2] {
        let c = self.case;
        let two_h = h + h;
        let (xp, xm) = (c.u_exact(x + h, y, t), c.u_exact(x - h, y, t));
        let (yp, ym) = (c.u_exact(x, y + h, t), c.u_exact(x, y - h, t));
        [[(xp[0] - xm[0]) / two_h, (yp[0] - ym[0]) / two_h], [(xp[1] - xm[1]) / two_h, (yp[1] - ym[1]) / two_h]]
    }

    fn div_u(&self, x: T, y: T, t: T, h: T) -> T {
        let g = self.grad_u(x, y, t, h);
        g[0][0] + g[1][1]
    }

    /// Second derivatives of each component: `[i][j][k] = ∂_j ∂_k u_i`.
    fn hess_u(&self, x: T, y: T, t: T, h: T) -> [[[T; 2]; 2]; 2] {
        let c = self.case;
        let u = |dx: T, dy: T| c.u_exact(x + dx, y + dy, t);
        let z = T::zero();
        let h2 = h * h;
        let two = T::lit(2.0);
        let (c0, xp, xm, yp, ym) = (u(z, z), u(h, z), u(-h, z), u(z, h), u(z, -h));
        let (pp, pm, mp, mm) = (u(h, h), u(h, -h), u(-h, h), u(-h, -h));
        let mut out = [[[z; 2]; 2]; 2];
        for i in 0..2 {
            let xx = (xp[i] - two * c0[i] + xm[i]) / h2;
            let yy = (yp[i] - two * c0[i] + ym[i]) / h2;
            let xy = (pp[i] - pm[i] - mp[i] + mm[i]) / (T::lit(4.0) * h2);
            out[i] = [[xx, xy], [xy, yy]];
        }
        out
    }

    fn grad_p(&self, x: T, y: T, t: T, h: T) -> [T; 2] {
        let c = self.case;
        let two_h = h + h;
        [
            (c.p_exact(x + h, y, t) - c.p_exact(x - h, y, t)) / two_h,
            (c.p_exact(x, y + h, t) - c.p_exact(x, y - h, t)) / two_h,
        ]
    }

    fn lap_p(&self, x: T, y: T, t: T, h: T) -> T {
        let c = self.case;
        let two = T::lit(2.0);
        let p0 = c.p_exact(x, y, t);
        (c.p_exact(x + h, y, t) + c.p_exact(x - h, y, t) + c.p_exact(x, y + h, t) + c.p_exact(x, y - h, t)
            - two * two * p0)
            / (h * h)
    }
}

/// Relative mismatch normalized by the magnitude of the summed terms (at least 1),
/// so cancellation between large terms is judged at the scale it happens.
fn rel<T: Real>(diff: T, scale: T) -> T {
    diff.abs() / scale.max(T::one())
}

/// Largest relative disagreement between the closed-form `f`, `g` and `q` and a
/// finite-difference evaluation of the strong form at `(points[i], times[i % len])`.
pub fn eval_strong_residual<T: Real>(case: &ManufacturedCase<T>, points: &[[T; 2]], times: &[T]) -> T {
    let fd = FiniteDifference { case };
    let (h1, h2) = (T::lit(FD_STEP_1), T::lit(FD_STEP_2));
    let PhysicalParams { mu, lambda, kappa } = case.params;
    let mut worst = T::zero();
    for (i, &[x, y]) in points.iter().enumerate() {
        let t = if times.is_empty() { T::zero() } else { times[i % times.len()] };
        let hu = fd.hess_u(x, y, t, h2);
        let gp = fd.grad_p(x, y, t, h1);
        let f = case.f(x, y, t);
        for k in 0..2 {
            let lap = hu[k][0][0] + hu[k][1][1];
            let grad_div = hu[0][0][k] + hu[1][1][k];
            let value = -mu * lap - (mu + lambda) * grad_div + gp[k];
            let scale = mu * (hu[k][0][0].abs() + hu[k][1][1].abs())
                + (mu + lambda) * (hu[0][0][k].abs() + hu[1][1][k].abs())
                + gp[k].abs();
            worst = worst.max(rel(f[k] - value, scale));
        }
        // ∂t(∇·u) by a centered difference in time of the discrete divergence.
        let dt = T::lit(FD_STEP_2);
        let ddiv = (fd.div_u(x, y, t + dt, h1) - fd.div_u(x, y, t - dt, h1)) / (dt + dt);
        let lp = fd.lap_p(x, y, t, h2);
        let g = ddiv - kappa * lp;
        worst = worst.max(rel(case.g(x, y, t) - g, ddiv.abs() + kappa * lp.abs()));

        let gu = fd.grad_u(x, y, t, h1);
        let p = case.p_exact(x, y, t);
        let q = -lambda * (gu[0][0] + gu[1][1]) + p;
        worst = worst.max(rel(case.q_exact(x, y, t) - q, lambda * (gu[0][0].abs() + gu[1][1].abs()) + p.abs()));
    }
    worst
}

/// Largest relative disagreement of `β` and `γ` with finite-difference tractions
/// and fluxes at the given boundary points and normals.
pub fn eval_neumann_residual<T: Real>(case: &ManufacturedCase<T>, points: &[([T; 2], [T; 2])], times: &[T]) -> T {
    let fd = FiniteDifference { case };
    let h = T::lit(FD_STEP_1);
    let PhysicalParams { mu, lambda, kappa } = case.params;
    let two = T::lit(2.0);
    let mut worst = T::zero();
    for (i, &([x, y], n)) in points.iter().enumerate() {
        let t = if times.is_empty() { T::zero() } else { times[i % times.len()] };
        let g = fd.grad_u(x, y, t, h);
        let div = g[0][0] + g[1][1];
        let p = case.p_exact(x, y, t);
        let shear = mu * (g[0][1] + g[1][0]);
        let sigma = [[two * mu * g[0][0] + lambda * div - p, shear], [shear, two * mu * g[1][1] + lambda * div - p]];
        let beta = case.beta(x, y, t, n);
        for k in 0..2 {
            let value = sigma[k][0] * n[0] + sigma[k][1] * n[1];
            let scale = two * mu * g[k][k].abs() + lambda * (g[0][0].abs() + g[1][1].abs()) + shear.abs() + p.abs();
            worst = worst.max(rel(beta[k] - value, scale));
        }
        let gp = fd.grad_p(x, y, t, h);
        let flux = kappa * (gp[0] * n[0] + gp[1] * n[1]);
        worst = worst.max(rel(case.gamma(x, y, t, n) - flux, kappa * (gp[0].abs() + gp[1].abs())));
    }
    worst
}

/// Deterministic low-discrepancy points in `(0,1)²` (Halton bases 2 and 3) with
/// matching times in `(0, T̄]`.
pub fn oracle_samples<T: Real>(count: usize, t_bar: T) -> (Vec<[T; 2]>, Vec<T>) {
    fn halton(mut i: usize, base: usize) -> f64 {
        let (mut f, mut r) = (1.0, 0.0);
        while i > 0 {
            f /= base as f64;
            r += f * (i % base) as f64;
            i /= base;
        }
        r
    }
    let points = (1..=count).map(|i| [T::lit(halton(i, 2)), T::lit(halton(i, 3))]).collect();
    let times = (1..=count).map(|i| t_bar * T::lit(halton(i, 5).max(1e-3))).collect();
    (points, times)
}

/// Boundary samples on the Neumann part of the layout (empty if there is none).
pub fn neumann_samples<T: Real>(layout: BoundaryLayout, count: usize) -> Vec<([T; 2], [T; 2])> {
    match layout {
        BoundaryLayout::AllDirichlet => Vec::new(),
        BoundaryLayout::NeumannRight => (1..=count)
            .map(|i| ([T::one(), T::from_count(i) / T::from_count(count + 1)], [T::one(), T::zero()]))
            .collect(),
    }
}

/// Oracle gate run before any convergence study: strong form, total stress and,
/// where present, Neumann data must agree with finite differences to `tol`.
pub fn check_oracle<T: Real>(case: &ManufacturedCase<T>, tol: T) -> Result<T> {
    let (points, times) = oracle_samples(50, case.t_bar);
    let mut worst = eval_strong_residual(case, &points, &times);
    let boundary = neumann_samples(case.layout, 20);
    worst = worst.max(eval_neumann_residual(case, &boundary, &times));
    if worst <= tol {
        Ok(worst)
    } else {
        Err(Error::InvalidParameter(format!(
            "case {}: closed-form data disagrees with finite differences ({:e} > {:e})",
            case.name, worst, tol
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_samples(seed: u64) -> (Vec<[f64; 2]>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = (0..50).map(|_| [rng.gen_range(0.01..0.99), rng.gen_range(0.01..0.99)]).collect();
        let ts = (0..50).map(|_| rng.gen_range(0.0..1.0)).collect();
        (pts, ts)
    }

    #[test]
    fn strong_form_matches_finite_differences() {
        for (k, name) in CaseName::ALL.into_iter().enumerate() {
            let case = get_case::<f64>(name, None).unwrap();
            let (pts, ts) = random_samples(k as u64 + 11);
            let r = eval_strong_residual(&case, &pts, &ts);
            assert!(r <= 1e-6, "{name}: {r:e}");
        }
    }

    #[test]
    fn zero_and_polynomial_cases() {
        let params = default_params::<f64>(CaseName::Ex1);
        let (pts, ts) = random_samples(3);
        let zero = ManufacturedCase::zero(params, BoundaryLayout::AllDirichlet);
        assert_eq!(eval_strong_residual(&zero, &pts, &ts), 0.0);
        let poly = ManufacturedCase::steady_polynomial(params, BoundaryLayout::NeumannRight);
        assert!(eval_strong_residual(&poly, &pts, &ts) <= 1e-6);
        let zero = ManufacturedCase::zero(params, BoundaryLayout::NeumannRight);
        assert_eq!(zero.eval_neumann_data(1.0, 0.5, 0.3, [1.0, 0.0]).unwrap(), ([0.0, 0.0], 0.0));
    }

    #[test]
    fn divergence_formulas() {
        let ex1 = get_case::<f64>(CaseName::Ex1, None).unwrap();
        let ex3 = get_case::<f64>(CaseName::Ex3, None).unwrap();
        let ex4 = get_case::<f64>(CaseName::Ex4, None).unwrap();
        let pi = std::f64::consts::PI;
        let (pts, ts) = random_samples(5);
        for (&[x, y], &t) in pts.iter().zip(&ts) {
            let want = 2.0 * pi * t * t * (pi * x).cos() * (pi * y).cos();
            assert!((ex1.div_u_exact(x, y, t) - want).abs() < 1e-13);
            let want = pi * (-t).exp() * (pi * (x + y)).sin() / (1.0 + 1e4);
            assert!((ex3.div_u_exact(x, y, t) - want).abs() < 1e-15);
            let want = (-t).exp() * (x + y).sin() / (1.0 + 1e4);
            assert!((ex4.div_u_exact(x, y, t) - want).abs() < 1e-15);
        }
        assert_eq!(ex1.u_exact(0.3, 0.7, 0.0), [0.0, 0.0]);
    }

    #[test]
    fn near_incompressibility_bound() {
        for name in [CaseName::Ex3, CaseName::Ex4] {
            let c = get_case::<f64>(name, None).unwrap();
            let (pts, _) = random_samples(8);
            for &[x, y] in &pts {
                assert!(c.div_u_exact(x, y, 0.0).abs() <= 3.2e-4);
            }
        }
    }

    #[test]
    fn ex4_is_ex3_at_unit_frequency() {
        let p = default_params::<f64>(CaseName::Ex3);
        let ex3 = get_case::<f64>(CaseName::Ex3, None).unwrap();
        let ex4 = get_case::<f64>(CaseName::Ex4, None).unwrap();
        let pi = std::f64::consts::PI;
        for &(x, y, t) in &[(0.2, 0.3, 0.5), (0.9, 0.1, 1.0)] {
            // Evaluating ex3 at (x/π, y/π) equals ex4 at (x, y).
            let a = ex3.u_exact(x / pi, y / pi, t);
            let b = ex4.u_exact(x, y, t);
            assert!((a[0] - b[0]).abs() < 1e-14 && (a[1] - b[1]).abs() < 1e-14);
            assert!((ex3.p_exact(x / pi, y / pi, t) - ex4.p_exact(x, y, t)).abs() < 1e-15);
        }
        assert_eq!(ex3.params, p);
    }

    #[test]
    fn neumann_data() {
        let ex2 = get_case::<f64>(CaseName::Ex2, None).unwrap();
        let pts = neumann_samples::<f64>(ex2.layout, 30);
        let (_, ts) = random_samples(4);
        assert!(eval_neumann_residual(&ex2, &pts, &ts) <= 1e-6);
        let pi = std::f64::consts::PI;
        for &(y, t) in &[(0.25, 0.5), (0.6, 1.0)] {
            let (_, gamma) = ex2.eval_neumann_data(1.0, y, t, [1.0, 0.0]).unwrap();
            assert!((gamma + pi * (-t).exp() * (pi * y).sin()).abs() < 1e-14);
        }
        let ex1 = get_case::<f64>(CaseName::Ex1, None).unwrap();
        assert!(matches!(ex1.eval_neumann_data(1.0, 0.5, 1.0, [1.0, 0.0]), Err(Error::NoNeumannBoundary(_))));
    }

    #[test]
    fn initial_stress_identity() {
        for name in CaseName::ALL {
            let c = get_case::<f64>(name, None).unwrap();
            for &(x, y) in &[(0.1, 0.2), (0.5, 0.5), (0.77, 0.31)] {
                assert!((c.initial_total_stress(x, y) - c.q_exact(x, y, 0.0)).abs() <= 1e-12);
            }
            assert!(check_oracle(&c, 1e-6).is_ok());
        }
        assert!("ex9".parse::<CaseName>().is_err());
    }
}
