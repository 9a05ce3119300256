//! Modified weak Galerkin (MWG) solver for the 2D H(curl) model problem
//!
//!   curl curl u + u = f   in the unit square,
//!         u . t     = g   on the boundary (tangential trace),
//!
//! discretized with discontinuous piecewise `(P_k)^2` vector fields on a
//! uniform triangulation. The weak curl of a field is computed per element
//! from its traces (edge averages on interior edges), so no inter-element
//! continuity is built into the space; a parameter-free jump penalty
//! supplies stability. The tangential boundary condition is imposed
//! strongly: `constraints` turns the edge-moment conditions on boundary
//! elements into a block-diagonal change of variables, and the solvers work
//! on the reduced space.
//!
//! Modules follow the pipeline: `mesh` -> `basis`/`quadrature` -> `weakcurl`
//! -> `assembly` -> `constraints` -> `solver` -> `errornorms`, with `study`
//! driving whole convergence runs for the CLI and the acceptance suite.

pub mod assembly;
pub mod basis;
pub mod constraints;
pub mod dense;
pub mod error;
pub mod errornorms;
pub mod field;
pub mod manufactured;
pub mod mesh;
pub mod quadrature;
pub mod solver;
pub mod space;
pub mod sparse;
pub mod study;
pub mod weakcurl;

pub use error::MwgError;
