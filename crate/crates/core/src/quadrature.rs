//! Quadrature rules on the reference triangle and the unit interval.
//!
//! The reference triangle has vertices (0,0), (1,0), (0,1) and measure 1/2;
//! edge rules live on [0,1] with measure 1. All rules have strictly positive
//! weights and are symmetric (triangle rules are invariant under the six
//! affine symmetries of the reference triangle).
//!
//! Low triangle degrees use the classic centroid / 3-point / 6-point /
//! 7-point rules. Higher degrees are built from a collapsed Gauss-Legendre
//! product (u, v) -> (u, v(1-u)) symmetrized over the triangle's symmetry
//! group, which is exact and positive by construction rather than by
//! transcription.

use crate::error::MwgError;

/// A fixed quadrature rule: `points` paired with `weights`, exact for
/// polynomials of total degree `degree`.
#[derive(Debug, Clone)]
pub struct QuadratureRule<P> {
    pub points: Vec<P>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

pub type TriangleQuadrature = QuadratureRule<[f64; 2]>;
pub type EdgeQuadrature = QuadratureRule<f64>;

impl<P> QuadratureRule<P> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Exact integral of x^i y^j over the reference triangle: i! j! / (i+j+2)!.
pub fn exact_monomial_integral(i: u32, j: u32) -> f64 {
    let fact = |n: u32| -> f64 {
        let mut f = 1u128;
        for m in 2..=n as u128 {
            f *= m;
        }
        f as f64
    };
    fact(i) * fact(j) / fact(i + j + 2)
}

/// Gauss-Legendre rule with `n` points on [0,1], exact for degree 2n-1.
///
/// Nodes are Newton-refined roots of the Legendre polynomial P_n; this is
/// accurate to machine precision for the small n supported here.
pub fn edge_gauss(n: usize) -> Result<EdgeQuadrature, MwgError> {
    if n == 0 || n > 10 {
        return Err(MwgError::UnsupportedGaussCount(n));
    }
    let mut points = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Initial guess for the i-th root of P_n on [-1,1] (descending).
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // Map [-1,1] -> [0,1]; reverse order so nodes come out ascending.
        points[n - 1 - i] = 0.5 * (x + 1.0);
        weights[n - 1 - i] = 0.5 * w;
    }
    Ok(QuadratureRule {
        points,
        weights,
        degree: 2 * n - 1,
    })
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 1..n {
        let jf = j as f64;
        let p2 = ((2.0 * jf + 1.0) * x * p1 - jf * p0) / (jf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Positive-weight symmetric rule on the reference triangle, exact for
/// polynomials of total degree `d` with 1 <= d <= 10.
pub fn triangle_quadrature(d: usize) -> Result<TriangleQuadrature, MwgError> {
    let rule = match d {
        0 => return Err(MwgError::UnsupportedQuadratureDegree(d)),
        1 => QuadratureRule {
            points: vec![[1.0 / 3.0, 1.0 / 3.0]],
            weights: vec![0.5],
            degree: 1,
        },
        2 => symmetric_orbits(2, &[(1.0 / 6.0, 1.0 / 3.0)]),
        3 | 4 => symmetric_orbits(
            4,
            &[
                (0.445948490915965, 0.223381589678011),
                (0.091576213509771, 0.109951743655322),
            ],
        ),
        5 => {
            let mut rule = symmetric_orbits(
                5,
                &[
                    (0.470142064105115, 0.132394152788506),
                    (0.101286507323456, 0.125939180544827),
                ],
            );
            rule.points.push([1.0 / 3.0, 1.0 / 3.0]);
            rule.weights.push(0.5 * 9.0 / 40.0);
            rule
        }
        6..=10 => collapsed_symmetrized(d),
        _ => return Err(MwgError::UnsupportedQuadratureDegree(d)),
    };
    Ok(rule)
}

/// Expand orbits given as (a, w): each contributes the three points with
/// barycentric coordinates (1-2a, a, a) permuted cyclically, weight w each.
/// Weights are normalized so that a unit total corresponds to measure 1/2.
fn symmetric_orbits(degree: usize, orbits: &[(f64, f64)]) -> TriangleQuadrature {
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for &(a, w) in orbits {
        let b = 1.0 - 2.0 * a;
        for p in [[a, a], [b, a], [a, b]] {
            points.push(p);
            weights.push(0.5 * w);
        }
    }
    QuadratureRule {
        points,
        weights,
        degree,
    }
}

/// Collapsed Gauss product rule symmetrized over the six triangle symmetries.
///
/// With x = u, y = v(1-u) the integral over the triangle becomes
/// int_0^1 int_0^1 f(u, v(1-u)) (1-u) dv du, so Gauss rules exact to degree
/// d+1 in u and d in v integrate any f in P_d exactly. Averaging the rule
/// over all permutations of the barycentric coordinates preserves exactness
/// and makes it symmetric.
fn collapsed_symmetrized(d: usize) -> TriangleQuadrature {
    let nu = (d + 3) / 2;
    let nv = (d + 2) / 2;
    let gu = edge_gauss(nu).expect("supported count");
    let gv = edge_gauss(nv).expect("supported count");
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (&u, &wu) in gu.points.iter().zip(&gu.weights) {
        for (&v, &wv) in gv.points.iter().zip(&gv.weights) {
            let (x, y) = (u, v * (1.0 - u));
            let w = wu * wv * (1.0 - u) / 6.0;
            let l0 = 1.0 - x - y;
            for [p, q] in [[x, y], [y, x], [l0, y], [y, l0], [x, l0], [l0, x]] {
                points.push([p, q]);
                weights.push(w);
            }
        }
    }
    QuadratureRule {
        points,
        weights,
        degree: d,
    }
}
