//! The discrete space bundle: bases and quadrature rules for one degree k.
//!
//! Trial functions are vector `(P_k)^2` polynomials per element; the weak
//! curl lives in `P_{k-1}`. Bilinear forms use a triangle rule exact to
//! degree 2k+2 and a (k+2)-point edge rule, which over-integrates every
//! polynomial integrand in the scheme. Error norms and projections use finer
//! rules so that quadrature error stays far below discretization error.

use crate::basis::PolyBasis;
use crate::error::MwgError;
use crate::field::DofMap;
use crate::mesh::Mesh;
use crate::quadrature::{edge_gauss, triangle_quadrature, EdgeQuadrature, TriangleQuadrature};

#[derive(Debug, Clone)]
pub struct MwgSpace {
    pub degree: usize,
    /// Orthonormal scalar P_k basis for the vector components.
    pub trial: PolyBasis,
    /// Orthonormal scalar P_{k-1} basis carrying the weak curl.
    pub test: PolyBasis,
    /// Volume rule for bilinear forms (exact to 2k+2).
    pub tri_quad: TriangleQuadrature,
    /// Edge rule for bilinear forms (k+2 Gauss points).
    pub edge_quad: EdgeQuadrature,
    /// Finer volume rule for projections and error integration.
    pub fine_tri_quad: TriangleQuadrature,
    /// Finer edge rule for error integration.
    pub fine_edge_quad: EdgeQuadrature,
}

impl MwgSpace {
    pub fn new(k: usize) -> Result<Self, MwgError> {
        if k == 0 || k > 4 {
            return Err(MwgError::UnsupportedDegree(k));
        }
        Ok(MwgSpace {
            degree: k,
            trial: PolyBasis::orthonormal(k)?,
            test: PolyBasis::orthonormal(k - 1)?,
            tri_quad: triangle_quadrature(2 * k + 2)?,
            edge_quad: edge_gauss(k + 2)?,
            fine_tri_quad: triangle_quadrature((2 * k + 2).max(8))?,
            fine_edge_quad: edge_gauss((k + 4).min(10))?,
        })
    }

    pub fn trial_dim(&self) -> usize {
        self.trial.dim()
    }

    pub fn test_dim(&self) -> usize {
        self.test.dim()
    }

    /// Unknowns per element: 2 * dim(P_k).
    pub fn block(&self) -> usize {
        2 * self.trial_dim()
    }

    pub fn dof_map(&self, mesh: &Mesh) -> DofMap {
        DofMap::new(mesh.n_elements(), self.trial_dim())
    }
}
