//! Dense reference assembly of the one-step matrix, built from monomial bases on
//! each triangle (Vandermonde inversion) and collapsed Gauss quadrature. Shares no
//! code with the library beyond the mesh and the dof coordinates.

#![allow(dead_code)]

use biot3f_core::assembly::PhysicalParams;
use biot3f_core::solver::Discretization;

/// Five-point Gauss-Legendre on [-1, 1].
const GAUSS_X: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GAUSS_W: [f64; 5] = [
    0.236_926_885_056_189,
    0.478_628_670_499_366,
    0.568_888_888_888_889,
    0.478_628_670_499_366,
    0.236_926_885_056_189,
];

/// Integral over a triangle through the Duffy map of the unit square.
pub fn triangle_integral(v: [[f64; 2]; 3], f: impl Fn(f64, f64) -> f64) -> f64 {
    let det = (v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1]);
    let mut s = 0.0;
    for (i, &a) in GAUSS_X.iter().enumerate() {
        for (j, &b) in GAUSS_X.iter().enumerate() {
            let (u, w) = ((a + 1.0) / 2.0, (b + 1.0) / 2.0);
            let (xi, eta) = (u, (1.0 - u) * w);
            let jac = (1.0 - u) / 4.0;
            let x = v[0][0] + xi * (v[1][0] - v[0][0]) + eta * (v[2][0] - v[0][0]);
            let y = v[0][1] + xi * (v[1][1] - v[0][1]) + eta * (v[2][1] - v[0][1]);
            s += GAUSS_W[i] * GAUSS_W[j] * jac * f(x, y);
        }
    }
    s * det.abs()
}

fn monomials(degree: usize, x: f64, y: f64) -> Vec<(f64, [f64; 2])> {
    let all = [
        (1.0, [0.0, 0.0]),
        (x, [1.0, 0.0]),
        (y, [0.0, 1.0]),
        (x * x, [2.0 * x, 0.0]),
        (x * y, [y, x]),
        (y * y, [0.0, 2.0 * y]),
    ];
    let n = [1, 3, 6][degree];
    all[..n].to_vec()
}

fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    x
}

/// Nodal basis on `nodes` as coefficient vectors over the monomials.
struct Basis {
    degree: usize,
    coeffs: Vec<Vec<f64>>,
}

impl Basis {
    fn new(degree: usize, nodes: &[[f64; 2]]) -> Self {
        let vander: Vec<Vec<f64>> = nodes.iter().map(|p| monomials(degree, p[0], p[1]).iter().map(|m| m.0).collect()).collect();
        let coeffs = (0..nodes.len())
            .map(|i| {
                // Column i of V⁻¹ solves V c = e_i.
                let mut e = vec![0.0; nodes.len()];
                e[i] = 1.0;
                solve(vander.clone(), e)
            })
            .collect();
        Basis { degree, coeffs }
    }

    fn value(&self, i: usize, x: f64, y: f64) -> f64 {
        monomials(self.degree, x, y).iter().zip(&self.coeffs[i]).map(|(m, c)| m.0 * c).sum()
    }

    fn grad(&self, i: usize, x: f64, y: f64) -> [f64; 2] {
        let mut g = [0.0; 2];
        for (m, c) in monomials(self.degree, x, y).iter().zip(&self.coeffs[i]) {
            g[0] += m.1[0] * c;
            g[1] += m.1[1] * c;
        }
        g
    }
}

fn find(coords: &[[f64; 2]], p: [f64; 2]) -> usize {
    coords
        .iter()
        .position(|c| (c[0] - p[0]).abs() < 1e-12 && (c[1] - p[1]).abs() < 1e-12)
        .unwrap_or_else(|| panic!("no node at {p:?}"))
}

/// Dense step matrix `[[A, -Bᵀ, 0], [B, M_qq/λ, -M_qp/λ], [0, -M_pq/(λτ), M_pp/(λτ) + K]]`
/// without boundary conditions.
pub fn dense_step_matrix(disc: &Discretization<f64>, params: &PhysicalParams<f64>, tau: f64) -> Vec<Vec<f64>> {
    let (nu, nq, np) = disc.sizes();
    let n = nu + nq + np;
    let mut m = vec![vec![0.0; n]; n];
    let mesh = &disc.mesh;
    let q_p0 = disc.space_q.element.degree == 0;
    let (mu, li, kappa) = (params.mu, 1.0 / params.lambda, params.kappa);
    for (cell, tri) in mesh.triangles.iter().enumerate() {
        let v = [mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]];
        let mid = |a: usize, b: usize| [(v[a][0] + v[b][0]) / 2.0, (v[a][1] + v[b][1]) / 2.0];
        let p2_nodes = vec![v[0], v[1], v[2], mid(0, 1), mid(1, 2), mid(2, 0)];
        let bu = Basis::new(2, &p2_nodes);
        let bp = Basis::new(1, &v);
        let gu: Vec<usize> = p2_nodes.iter().map(|&p| find(&disc.space_u.node_coords, p)).collect();
        let gp: Vec<usize> = v.iter().map(|&p| find(&disc.space_p.node_coords, p)).collect();
        let (bq, gq): (Basis, Vec<usize>) = if q_p0 {
            (Basis { degree: 0, coeffs: vec![vec![1.0]] }, vec![cell])
        } else {
            (Basis::new(1, &v), v.iter().map(|&p| find(&disc.space_q.node_coords, p)).collect())
        };
        let (ou, oq, op) = (0, nu, nu + nq);

        for (i, &gi) in gu.iter().enumerate() {
            for (j, &gj) in gu.iter().enumerate() {
                for c in 0..2 {
                    for d in 0..2 {
                        // 2μ ε(φ_j e_d) : ε(φ_i e_c)
                        let val = triangle_integral(v, |x, y| {
                            let (a, b) = (bu.grad(i, x, y), bu.grad(j, x, y));
                            let dot = a[0] * b[0] + a[1] * b[1];
                            mu * (if c == d { dot } else { 0.0 } + a[d] * b[c])
                        });
                        m[ou + 2 * gi + c][ou + 2 * gj + d] += val;
                    }
                }
            }
        }
        for (k, &gk) in gq.iter().enumerate() {
            for (j, &gj) in gu.iter().enumerate() {
                for d in 0..2 {
                    let val = triangle_integral(v, |x, y| bq.value(k, x, y) * bu.grad(j, x, y)[d]);
                    m[oq + gk][ou + 2 * gj + d] += val;
                    m[ou + 2 * gj + d][oq + gk] -= val;
                }
            }
            for (l, &gl) in gq.iter().enumerate() {
                m[oq + gk][oq + gl] += li * triangle_integral(v, |x, y| bq.value(k, x, y) * bq.value(l, x, y));
            }
            for (l, &gl) in gp.iter().enumerate() {
                let val = triangle_integral(v, |x, y| bq.value(k, x, y) * bp.value(l, x, y));
                m[oq + gk][op + gl] -= li * val;
                m[op + gl][oq + gk] -= li / tau * val;
            }
        }
        for (k, &gk) in gp.iter().enumerate() {
            for (l, &gl) in gp.iter().enumerate() {
                let mass = triangle_integral(v, |x, y| bp.value(k, x, y) * bp.value(l, x, y));
                let stiff = triangle_integral(v, |x, y| {
                    let (a, b) = (bp.grad(k, x, y), bp.grad(l, x, y));
                    a[0] * b[0] + a[1] * b[1]
                });
                m[op + gk][op + gl] += li / tau * mass + kappa * stiff;
            }
        }
    }
    m
}
