//! Scalar polynomial bases on the reference triangle and affine element maps.
//!
//! A `PolyBasis` stores a coefficient table over the graded monomials
//! 1, x, y, x^2, xy, y^2, ... of total degree <= k on the reference triangle
//! with vertices (0,0), (1,0), (0,1). Two constructors are provided: the raw
//! monomials (handy in tests, where hand values exist) and an L2-orthonormal
//! family obtained from the exact monomial Gram matrix, which keeps every
//! local mass solve trivially well conditioned.
//!
//! 2D curl conventions used throughout the crate:
//!   curl v    = d(v2)/dx - d(v1)/dy   (vector -> scalar),
//!   curl phi  = (d(phi)/dy, -d(phi)/dx)   (scalar -> vector).

use crate::dense::{Cholesky, DenseMatrix};
use crate::error::MwgError;
use crate::quadrature::{exact_monomial_integral, TriangleQuadrature};

/// Dimension of P_k on a triangle.
pub fn poly_dim(k: usize) -> usize {
    (k + 1) * (k + 2) / 2
}

#[derive(Debug, Clone)]
pub struct PolyBasis {
    degree: usize,
    /// Monomial exponents (i, j) in graded order, x-power first within a degree.
    exps: Vec<(u32, u32)>,
    /// Row m holds the monomial coefficients of basis function m.
    coeffs: DenseMatrix,
}

fn graded_exponents(k: usize) -> Vec<(u32, u32)> {
    let mut exps = Vec::with_capacity(poly_dim(k));
    for d in 0..=k as u32 {
        for j in 0..=d {
            exps.push((d - j, j));
        }
    }
    exps
}

impl PolyBasis {
    /// Raw monomial basis 1, x, y, x^2, xy, y^2, ...
    pub fn monomial(k: usize) -> Result<Self, MwgError> {
        if k > 4 {
            return Err(MwgError::UnsupportedDegree(k));
        }
        let exps = graded_exponents(k);
        let dim = exps.len();
        let mut coeffs = DenseMatrix::zeros(dim, dim);
        for m in 0..dim {
            *coeffs.at_mut(m, m) = 1.0;
        }
        Ok(PolyBasis {
            degree: k,
            exps,
            coeffs,
        })
    }

    /// L2(reference-triangle)-orthonormal basis spanning P_k.
    ///
    /// Built by Cholesky-inverting the exact monomial Gram matrix
    /// G_mn = (m+n)-th beta integral, so the reference mass matrix of the
    /// result is the identity to machine precision.
    pub fn orthonormal(k: usize) -> Result<Self, MwgError> {
        if k > 4 {
            return Err(MwgError::UnsupportedDegree(k));
        }
        let exps = graded_exponents(k);
        let dim = exps.len();
        let mut gram = DenseMatrix::zeros(dim, dim);
        for m in 0..dim {
            for n in 0..dim {
                let (im, jm) = exps[m];
                let (inn, jn) = exps[n];
                *gram.at_mut(m, n) = exact_monomial_integral(im + inn, jm + jn);
            }
        }
        let chol = Cholesky::new(&gram).expect("monomial Gram matrix is SPD");
        // With G = L L^T the coefficient matrix C = inv(L) satisfies
        // C G C^T = I. Row m of inv(L) solves L^T y = e_m (back substitution).
        let mut coeffs = DenseMatrix::zeros(dim, dim);
        for m in 0..dim {
            let mut row = vec![0.0; dim];
            row[m] = 1.0;
            for i in (0..dim).rev() {
                let mut sum = row[i];
                for k2 in i + 1..dim {
                    sum -= chol.l_at(k2, i) * row[k2];
                }
                row[i] = sum / chol.l_at(i, i);
            }
            for n in 0..dim {
                *coeffs.at_mut(m, n) = row[n];
            }
        }
        Ok(PolyBasis {
            degree: k,
            exps,
            coeffs,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.exps.len()
    }

    /// Values of every basis function at the reference points, as
    /// `values[m][q]` for basis m and point q.
    pub fn eval(&self, pts: &[[f64; 2]]) -> Vec<Vec<f64>> {
        let monos = self.monomials_at(pts);
        self.combine(&monos, pts.len())
    }

    /// Reference-frame gradients `(d/dx, d/dy)` at the points, `grads[m][q]`.
    pub fn eval_grad(&self, pts: &[[f64; 2]]) -> Vec<Vec<[f64; 2]>> {
        let dim = self.dim();
        let mut out = vec![vec![[0.0; 2]; pts.len()]; dim];
        for (q, p) in pts.iter().enumerate() {
            for m in 0..dim {
                let mut g = [0.0; 2];
                for n in 0..dim {
                    let c = self.coeffs.at(m, n);
                    if c == 0.0 {
                        continue;
                    }
                    let (i, j) = self.exps[n];
                    if i > 0 {
                        g[0] += c * i as f64 * powi(p[0], i - 1) * powi(p[1], j);
                    }
                    if j > 0 {
                        g[1] += c * j as f64 * powi(p[0], i) * powi(p[1], j - 1);
                    }
                }
                out[m][q] = g;
            }
        }
        out
    }

    /// Reference-frame vector curl of each scalar basis function,
    /// `curl phi = (d(phi)/dy, -d(phi)/dx)`, as `curls[m][q]`.
    pub fn eval_curl(&self, pts: &[[f64; 2]]) -> Vec<Vec<[f64; 2]>> {
        self.eval_grad(pts)
            .into_iter()
            .map(|row| row.into_iter().map(|g| [g[1], -g[0]]).collect())
            .collect()
    }

    fn monomials_at(&self, pts: &[[f64; 2]]) -> Vec<Vec<f64>> {
        self.exps
            .iter()
            .map(|&(i, j)| pts.iter().map(|p| powi(p[0], i) * powi(p[1], j)).collect())
            .collect()
    }

    fn combine(&self, monos: &[Vec<f64>], npts: usize) -> Vec<Vec<f64>> {
        let dim = self.dim();
        let mut out = vec![vec![0.0; npts]; dim];
        for m in 0..dim {
            for n in 0..dim {
                let c = self.coeffs.at(m, n);
                if c == 0.0 {
                    continue;
                }
                for q in 0..npts {
                    out[m][q] += c * monos[n][q];
                }
            }
        }
        out
    }
}

fn powi(x: f64, n: u32) -> f64 {
    let mut r = 1.0;
    for _ in 0..n {
        r *= x;
    }
    r
}

/// Affine map x = J xi + origin from the reference triangle onto a physical
/// triangle with counterclockwise vertices, so det J = 2 * area > 0.
#[derive(Debug, Clone, Copy)]
pub struct AffineMap {
    pub jacobian: [[f64; 2]; 2],
    pub origin: [f64; 2],
    pub det: f64,
    inverse: [[f64; 2]; 2],
}

impl AffineMap {
    pub fn from_triangle(v0: [f64; 2], v1: [f64; 2], v2: [f64; 2]) -> Self {
        let j = [
            [v1[0] - v0[0], v2[0] - v0[0]],
            [v1[1] - v0[1], v2[1] - v0[1]],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        debug_assert!(det > 0.0, "triangle must be counterclockwise");
        let inverse = [
            [j[1][1] / det, -j[0][1] / det],
            [-j[1][0] / det, j[0][0] / det],
        ];
        AffineMap {
            jacobian: j,
            origin: v0,
            det,
            inverse,
        }
    }

    pub fn to_physical(&self, xi: [f64; 2]) -> [f64; 2] {
        [
            self.origin[0] + self.jacobian[0][0] * xi[0] + self.jacobian[0][1] * xi[1],
            self.origin[1] + self.jacobian[1][0] * xi[0] + self.jacobian[1][1] * xi[1],
        ]
    }

    pub fn to_reference(&self, x: [f64; 2]) -> [f64; 2] {
        let d = [x[0] - self.origin[0], x[1] - self.origin[1]];
        [
            self.inverse[0][0] * d[0] + self.inverse[0][1] * d[1],
            self.inverse[1][0] * d[0] + self.inverse[1][1] * d[1],
        ]
    }

    /// Push a reference gradient to physical coordinates: grad_x = J^{-T} grad_xi.
    pub fn grad_to_physical(&self, g: [f64; 2]) -> [f64; 2] {
        [
            self.inverse[0][0] * g[0] + self.inverse[1][0] * g[1],
            self.inverse[0][1] * g[0] + self.inverse[1][1] * g[1],
        ]
    }
}

/// Element mass matrix M_ij = integral over the element of b_i b_j, computed
/// with the given rule: M = det(J) * sum_q w_q b_i(xi_q) b_j(xi_q).
pub fn local_mass_matrix(
    basis: &PolyBasis,
    map: &AffineMap,
    quad: &TriangleQuadrature,
) -> DenseMatrix {
    let vals = basis.eval(&quad.points);
    let dim = basis.dim();
    let mut m = DenseMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in i..dim {
            let mut acc = 0.0;
            for (q, &w) in quad.weights.iter().enumerate() {
                acc += w * vals[i][q] * vals[j][q];
            }
            let v = map.det * acc;
            *m.at_mut(i, j) = v;
            *m.at_mut(j, i) = v;
        }
    }
    m
}

/// Physical scalar curl of a vector field given by a coefficient block
/// `[x-component coeffs | y-component coeffs]` over `basis` on the mapped
/// element: `curl v = d(v2)/dx - d(v1)/dy` evaluated at the reference points.
pub fn vector_curl_of_field(
    coeffs: &[f64],
    basis: &PolyBasis,
    map: &AffineMap,
    pts: &[[f64; 2]],
) -> Vec<f64> {
    let dim = basis.dim();
    assert_eq!(coeffs.len(), 2 * dim, "expected a 2-component block");
    let grads = basis.eval_grad(pts);
    let mut out = vec![0.0; pts.len()];
    for (q, slot) in out.iter_mut().enumerate() {
        let mut g1 = [0.0; 2];
        let mut g2 = [0.0; 2];
        for m in 0..dim {
            let g = grads[m][q];
            g1[0] += coeffs[m] * g[0];
            g1[1] += coeffs[m] * g[1];
            g2[0] += coeffs[dim + m] * g[0];
            g2[1] += coeffs[dim + m] * g[1];
        }
        let g1 = map.grad_to_physical(g1);
        let g2 = map.grad_to_physical(g2);
        *slot = g2[0] - g1[1];
    }
    out
}
