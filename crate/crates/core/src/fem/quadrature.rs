//! Gauss–Legendre rules on edges and collapsed (conical product) rules on triangles.
//!
//! Triangle rules are built from the Duffy map `(s, r) ↦ (s, (1-s) r)` of the unit
//! square onto the reference triangle, so every weight is positive and every point
//! interior for any degree.

use crate::error::{Error, Result};
use crate::scalar::Real;

pub const MAX_DEGREE: usize = 10;

/// Rule on the reference triangle `{(0,0), (1,0), (0,1)}`; points are barycentric
/// `(1-x-y, x, y)` and the weights sum to the reference area 1/2.
#[derive(Debug, Clone)]
pub struct TriangleRule<T> {
    pub points: Vec<[T; 3]>,
    pub weights: Vec<T>,
    pub exact_degree: usize,
}

/// Rule on the unit interval; `points` are edge parameters in `[0,1]`, weights sum to 1.
#[derive(Debug, Clone)]
pub struct EdgeRule<T> {
    pub points: Vec<T>,
    pub weights: Vec<T>,
    pub exact_degree: usize,
}

/// `m`-point Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre<T: Real>(m: usize) -> (Vec<T>, Vec<T>) {
    assert!(m >= 1);
    let one = T::one();
    let two = T::lit(2.0);
    let mf = T::from_count(m);
    // (P_m(z), P_{m-1}(z)) by the three-term recurrence.
    let legendre = |z: T| {
        let (mut p0, mut p1) = (one, z);
        for k in 2..=m {
            let kf = T::from_count(k);
            let p2 = ((two * kf - one) * z * p1 - (kf - one) * p0) / kf;
            p0 = p1;
            p1 = p2;
        }
        (p1, p0)
    };
    let derivative = |z: T, pm: T, pm1: T| mf * (z * pm - pm1) / (z * z - one);

    let mut x = vec![T::zero(); m];
    let mut w = vec![T::zero(); m];
    let tol = T::epsilon() * T::lit(4.0);
    for i in 0..m.div_ceil(2) {
        let mut z = (T::PI() * (T::from_count(i) + T::lit(0.75)) / (mf + T::lit(0.5))).cos();
        for _ in 0..100 {
            let (pm, pm1) = legendre(z);
            let dz = pm / derivative(z, pm, pm1);
            z -= dz;
            if dz.abs() <= tol {
                break;
            }
        }
        let (pm, pm1) = legendre(z);
        let dp = derivative(z, pm, pm1);
        let wi = two / ((one - z * z) * dp * dp);
        x[i] = -z;
        x[m - 1 - i] = z;
        w[i] = wi;
        w[m - 1 - i] = wi;
    }
    if m % 2 == 1 {
        x[m / 2] = T::zero();
    }
    (x, w)
}

pub fn edge_rule<T: Real>(exact_degree: usize) -> Result<EdgeRule<T>> {
    if exact_degree > MAX_DEGREE {
        return Err(Error::UnsupportedDegree(exact_degree));
    }
    let m = exact_degree / 2 + 1;
    let (x, w) = gauss_legendre::<T>(m);
    let half = T::lit(0.5);
    Ok(EdgeRule {
        points: x.iter().map(|&xi| (xi + T::one()) * half).collect(),
        weights: w.iter().map(|&wi| wi * half).collect(),
        exact_degree,
    })
}

pub fn triangle_rule<T: Real>(exact_degree: usize) -> Result<TriangleRule<T>> {
    if exact_degree > MAX_DEGREE {
        return Err(Error::UnsupportedDegree(exact_degree));
    }
    // The Jacobian (1 - s) raises the degree in s by one.
    let ms = (exact_degree + 2).div_ceil(2);
    let mr = (exact_degree + 1).div_ceil(2).max(1);
    let s_rule = edge_rule_points::<T>(ms);
    let r_rule = edge_rule_points::<T>(mr);
    let mut points = Vec::with_capacity(ms * mr);
    let mut weights = Vec::with_capacity(ms * mr);
    for (&s, &ws) in s_rule.0.iter().zip(&s_rule.1) {
        for (&r, &wr) in r_rule.0.iter().zip(&r_rule.1) {
            let x = s;
            let y = (T::one() - s) * r;
            points.push([T::one() - x - y, x, y]);
            weights.push(ws * wr * (T::one() - s));
        }
    }
    Ok(TriangleRule { points, weights, exact_degree })
}

fn edge_rule_points<T: Real>(m: usize) -> (Vec<T>, Vec<T>) {
    let (x, w) = gauss_legendre::<T>(m);
    let half = T::lit(0.5);
    (x.iter().map(|&xi| (xi + T::one()) * half).collect(), w.iter().map(|&wi| wi * half).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// ∫ over the reference triangle of x^a y^b = a! b! / (a+b+2)!
    fn monomial_integral(a: u32, b: u32) -> f64 {
        let fact = |n: u32| (1..=n).map(|k| k as f64).product::<f64>();
        fact(a) * fact(b) / fact(a + b + 2)
    }

    #[test]
    fn triangle_rules_integrate_monomials() {
        for d in 0..=MAX_DEGREE {
            let rule = triangle_rule::<f64>(d).unwrap();
            let total: f64 = rule.weights.iter().sum();
            assert!((total - 0.5).abs() < 1e-15, "degree {d}");
            assert!(rule.weights.iter().all(|&w| w > 0.0));
            for a in 0..=d as u32 {
                for b in 0..=(d as u32 - a) {
                    let q: f64 = rule
                        .points
                        .iter()
                        .zip(&rule.weights)
                        .map(|(p, w)| w * p[1].powi(a as i32) * p[2].powi(b as i32))
                        .sum();
                    let exact = monomial_integral(a, b);
                    assert!((q - exact).abs() < 1e-14, "d={d} a={a} b={b}: {q} vs {exact}");
                }
            }
        }
    }

    #[test]
    fn x_squared_degree_two() {
        let rule = triangle_rule::<f64>(2).unwrap();
        let q: f64 = rule.points.iter().zip(&rule.weights).map(|(p, w)| w * p[1] * p[1]).sum();
        assert!((q - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn edge_rules_integrate_monomials() {
        for d in 0..=MAX_DEGREE {
            let rule = edge_rule::<f64>(d).unwrap();
            for k in 0..=d as i32 {
                let q: f64 = rule.points.iter().zip(&rule.weights).map(|(x, w)| w * x.powi(k)).sum();
                assert!((q - 1.0 / (k as f64 + 1.0)).abs() < 1e-15, "d={d} k={k}");
            }
        }
        let r5 = edge_rule::<f64>(5).unwrap();
        let q: f64 = r5.points.iter().zip(&r5.weights).map(|(x, w)| w * x.powi(5)).sum();
        assert!((q - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn unsupported_degree_rejected() {
        assert_eq!(triangle_rule::<f64>(11).unwrap_err(), Error::UnsupportedDegree(11));
        assert!(edge_rule::<f64>(11).is_err());
    }

    #[test]
    fn f32_rules_are_accurate_to_single_precision() {
        let rule = triangle_rule::<f32>(6).unwrap();
        let q: f32 = rule.points.iter().zip(&rule.weights).map(|(p, w)| w * p[1].powi(3) * p[2].powi(3)).sum();
        assert!((q as f64 - monomial_integral(3, 3)).abs() < 1e-7);
    }
}
