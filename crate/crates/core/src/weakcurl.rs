//! The discrete weak curl operator.
//!
//! On each element tau, the weak curl of a piecewise vector polynomial v is
//! the unique curl_w v in P_{k-1}(tau) with
//!
//!   (curl_w v, psi)_tau = (v, curl psi)_tau + <vb . t, psi>_{boundary of tau}
//!
//! for all psi in P_{k-1}(tau), where t is the element's counterclockwise
//! unit tangent and vb is the edge trace used for v: the average of the two
//! one-sided traces on interior edges, and on boundary edges either the raw
//! one-sided trace or substituted tangential data, depending on `BcMode`.
//! Because vb borrows from the neighbors, curl_w on tau is a linear map from
//! the coefficient blocks of tau and its edge neighbors (the "participants")
//! plus an affine lift from substituted boundary data.

use crate::basis::{local_mass_matrix, PolyBasis};
use crate::dense::{Cholesky, DenseMatrix};
use crate::error::MwgError;
use crate::field::DiscreteField;
use crate::mesh::Mesh;
use crate::quadrature::edge_gauss;
use crate::space::MwgSpace;

/// How boundary edges contribute to the weak curl.
#[derive(Clone, Copy)]
pub enum BcMode<'a> {
    /// Use the element's own trace on boundary edges (the raw operator).
    RawAverage,
    /// Substitute zero tangential data on boundary edges.
    Homogeneous,
    /// Substitute prescribed tangential data g(x, y, t) on boundary edges.
    Data(&'a dyn Fn(f64, f64, [f64; 2]) -> f64),
}

/// The weak curl on one element as a linear map plus boundary lift.
pub struct WeakCurlStencil {
    pub element: usize,
    /// Contributing elements: the element itself first, then the neighbors
    /// across its interior edges in local edge order.
    pub participants: Vec<usize>,
    /// (test_dim) x (participants.len() * block) matrix taking the stacked
    /// participant coefficient blocks to weak-curl coefficients.
    pub matrix: DenseMatrix,
    /// Weak-curl coefficients contributed by substituted boundary data.
    pub lift: Vec<f64>,
}

impl WeakCurlStencil {
    /// Weak-curl coefficients for a discrete field: S x + lift.
    pub fn apply(&self, field: &DiscreteField) -> Vec<f64> {
        let block = field.map.block;
        let mut coeffs = self.lift.clone();
        for (p, &elem) in self.participants.iter().enumerate() {
            let xb = field.block(elem);
            for (i, c) in coeffs.iter_mut().enumerate() {
                let row = self.matrix.row(i);
                for (m, &x) in xb.iter().enumerate() {
                    *c += row[p * block + m] * x;
                }
            }
        }
        coeffs
    }
}

/// Build the weak-curl stencil of element `tau`.
pub fn build_weak_curl_stencil(
    mesh: &Mesh,
    space: &MwgSpace,
    tau: usize,
    bc: BcMode,
) -> Result<WeakCurlStencil, MwgError> {
    let trial_dim = space.trial_dim();
    let test_dim = space.test_dim();
    let block = space.block();
    let map = mesh.affine_map(tau);

    let mut participants = vec![tau];
    let mut neighbor_slot = [0usize; 3];
    for (l, &(e, _)) in mesh.element_edges[tau].iter().enumerate() {
        if let Some(nb) = mesh.neighbor_across(tau, e)? {
            participants.push(nb);
            neighbor_slot[l] = participants.len() - 1;
        }
    }

    // Raw right-hand-side matrix: (test_dim) x (participants * block).
    let cols = participants.len() * block;
    let mut raw = DenseMatrix::zeros(test_dim, cols);
    let mut raw_lift = vec![0.0; test_dim];

    // Volume term (v, curl psi)_tau on the element's own block:
    // curl psi = (d psi/dy, -d psi/dx) in physical coordinates.
    let trial_vals = space.trial.eval(&space.tri_quad.points);
    let test_grads = space.test.eval_grad(&space.tri_quad.points);
    for i in 0..test_dim {
        for m in 0..trial_dim {
            let mut accx = 0.0;
            let mut accy = 0.0;
            for (q, &w) in space.tri_quad.weights.iter().enumerate() {
                let g = map.grad_to_physical(test_grads[i][q]);
                accx += w * trial_vals[m][q] * g[1];
                accy -= w * trial_vals[m][q] * g[0];
            }
            *raw.at_mut(i, m) += map.det * accx;
            *raw.at_mut(i, trial_dim + m) += map.det * accy;
        }
    }

    // Edge terms <vb . t, psi>_e for each local edge.
    for (l, &(e, sigma)) in mesh.element_edges[tau].iter().enumerate() {
        let edge = &mesh.edges[e];
        let (a, b) = mesh.edge_endpoints(e);
        let t_glob = edge.tangent;
        let t_loc = [sigma as f64 * t_glob[0], sigma as f64 * t_glob[1]];
        let he = edge.length;

        let phys: Vec<[f64; 2]> = space
            .edge_quad
            .points
            .iter()
            .map(|&s| [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])])
            .collect();
        let own_ref: Vec<[f64; 2]> = phys.iter().map(|&p| map.to_reference(p)).collect();
        let test_vals = space.test.eval(&own_ref);
        let own_trial = space.trial.eval(&own_ref);

        let neighbor = mesh.neighbor_across(tau, e)?;
        match neighbor {
            Some(nb) => {
                // Interior edge: vb = average of the two one-sided traces.
                let nb_map = mesh.affine_map(nb);
                let nb_ref: Vec<[f64; 2]> = phys.iter().map(|&p| nb_map.to_reference(p)).collect();
                let nb_trial = space.trial.eval(&nb_ref);
                for (slot, vals) in [(0usize, &own_trial), (neighbor_slot[l], &nb_trial)] {
                    accumulate_trace_terms(
                        &mut raw, space, slot, vals, &test_vals, t_loc, 0.5 * he,
                    );
                }
            }
            None => match bc {
                BcMode::RawAverage => {
                    accumulate_trace_terms(&mut raw, space, 0, &own_trial, &test_vals, t_loc, he);
                }
                BcMode::Homogeneous => {}
                BcMode::Data(g) => {
                    for (q, &w) in space.edge_quad.weights.iter().enumerate() {
                        let gv = g(phys[q][0], phys[q][1], t_loc);
                        for (i, lift) in raw_lift.iter_mut().enumerate() {
                            *lift += he * w * gv * test_vals[i][q];
                        }
                    }
                }
            },
        }
    }

    // Solve the P_{k-1} mass system for every column and the lift.
    let mass = local_mass_matrix(&space.test, &map, &space.tri_quad);
    let chol = Cholesky::new(&mass).map_err(|_| MwgError::DegenerateElement {
        element: tau,
        residual: f64::INFINITY,
    })?;
    let mut matrix = DenseMatrix::zeros(test_dim, cols);
    let mut rhs = vec![0.0; test_dim];
    for c in 0..cols {
        for i in 0..test_dim {
            rhs[i] = raw.at(i, c);
        }
        let sol = chol.solve(&rhs);
        for i in 0..test_dim {
            *matrix.at_mut(i, c) = sol[i];
        }
    }
    let lift = chol.solve(&raw_lift);

    // Residual check: M S must reproduce the raw right-hand sides.
    let mut scale: f64 = 1.0;
    for i in 0..test_dim {
        for c in 0..cols {
            scale = scale.max(raw.at(i, c).abs());
        }
    }
    let mut residual: f64 = 0.0;
    for c in 0..cols {
        for i in 0..test_dim {
            let mut acc = 0.0;
            for j in 0..test_dim {
                acc += mass.at(i, j) * matrix.at(j, c);
            }
            residual = residual.max((acc - raw.at(i, c)).abs());
        }
    }
    for i in 0..test_dim {
        let mut acc = 0.0;
        for j in 0..test_dim {
            acc += mass.at(i, j) * lift[j];
        }
        residual = residual.max((acc - raw_lift[i]).abs());
    }
    if residual > 1e-10 * scale {
        return Err(MwgError::DegenerateElement {
            element: tau,
            residual,
        });
    }

    Ok(WeakCurlStencil {
        element: tau,
        participants,
        matrix,
        lift,
    })
}

fn accumulate_trace_terms(
    raw: &mut DenseMatrix,
    space: &MwgSpace,
    slot: usize,
    trial_vals: &[Vec<f64>],
    test_vals: &[Vec<f64>],
    t_loc: [f64; 2],
    weight: f64,
) {
    let trial_dim = space.trial_dim();
    let block = space.block();
    for i in 0..space.test_dim() {
        for m in 0..trial_dim {
            let mut acc = 0.0;
            for (q, &w) in space.edge_quad.weights.iter().enumerate() {
                acc += w * trial_vals[m][q] * test_vals[i][q];
            }
            *raw.at_mut(i, slot * block + m) += weight * acc * t_loc[0];
            *raw.at_mut(i, slot * block + trial_dim + m) += weight * acc * t_loc[1];
        }
    }
}

/// Evaluate curl_w of `field` on the stencil's element at reference points.
pub fn eval_weak_curl(
    field: &DiscreteField,
    stencil: &WeakCurlStencil,
    space: &MwgSpace,
    pts: &[[f64; 2]],
) -> Vec<f64> {
    let coeffs = stencil.apply(field);
    let vals = space.test.eval(pts);
    (0..pts.len())
        .map(|q| (0..space.test_dim()).map(|i| coeffs[i] * vals[i][q]).sum())
        .collect()
}

/// Residual of the trace identity
///
///   sum_tau <({{v}} - v|tau) . t, phi|tau>_{boundary of tau}
///     = - sum over interior edges of <{{phi}}, [[v]]>_e
///
/// for a piecewise vector polynomial v and piecewise scalar polynomial phi.
/// Boundary edges drop out of the left side because {{v}} is the one-sided
/// trace there. Returns |LHS + RHS_interior|, which is zero in exact
/// arithmetic for any v and phi.
pub fn edge_identity_residual(
    mesh: &Mesh,
    v_basis: &PolyBasis,
    v: &DiscreteField,
    phi_basis: &PolyBasis,
    phi: &[f64],
) -> f64 {
    let phi_dim = phi_basis.dim();
    assert_eq!(phi.len(), phi_dim * mesh.n_elements());
    let n_gauss = ((v_basis.degree() + phi_basis.degree()) / 2 + 1).clamp(1, 10);
    let quad = edge_gauss(n_gauss).expect("supported count");

    let eval_phi = |tau: usize, pts: &[[f64; 2]]| -> Vec<f64> {
        let vals = phi_basis.eval(pts);
        (0..pts.len())
            .map(|q| {
                (0..phi_dim)
                    .map(|m| phi[tau * phi_dim + m] * vals[m][q])
                    .sum()
            })
            .collect()
    };

    let edge_points = |e: usize| -> Vec<[f64; 2]> {
        let (a, b) = mesh.edge_endpoints(e);
        quad.points
            .iter()
            .map(|&s| [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])])
            .collect()
    };

    // Left side: loop over elements and their local edges, the way the
    // weak-curl stencil sees traces. Boundary edges contribute zero because
    // the average there is the element's own trace.
    let mut lhs = 0.0;
    for tau in 0..mesh.n_elements() {
        let map = mesh.affine_map(tau);
        for &(e, sigma) in &mesh.element_edges[tau] {
            let nb = match mesh.neighbor_across(tau, e).expect("own edge") {
                Some(nb) => nb,
                None => continue,
            };
            let edge = &mesh.edges[e];
            let t_loc = [
                sigma as f64 * edge.tangent[0],
                sigma as f64 * edge.tangent[1],
            ];
            let phys = edge_points(e);
            let own_ref: Vec<[f64; 2]> = phys.iter().map(|&p| map.to_reference(p)).collect();
            let nb_map = mesh.affine_map(nb);
            let nb_ref: Vec<[f64; 2]> = phys.iter().map(|&p| nb_map.to_reference(p)).collect();
            let v_own = v.eval_on_element(v_basis, tau, &own_ref);
            let v_nb = v.eval_on_element(v_basis, nb, &nb_ref);
            let p_own = eval_phi(tau, &own_ref);
            for (q, &w) in quad.weights.iter().enumerate() {
                let diff = [
                    0.5 * (v_nb[q][0] - v_own[q][0]),
                    0.5 * (v_nb[q][1] - v_own[q][1]),
                ];
                lhs += edge.length * w * (diff[0] * t_loc[0] + diff[1] * t_loc[1]) * p_own[q];
            }
        }
    }

    // Right side: loop over interior edges, the way the stabilization sees
    // jumps, using each side's recorded orientation sign.
    let mut rhs = 0.0;
    for (e, edge) in mesh.edges.iter().enumerate() {
        let (t1, t2) = match edge.elements {
            (t1, Some(t2)) => (t1, t2),
            (_, None) => continue,
        };
        let sign = |tau: usize| -> f64 {
            mesh.element_edges[tau]
                .iter()
                .find(|(idx, _)| *idx == e)
                .expect("incident")
                .1 as f64
        };
        let phys = edge_points(e);
        let map1 = mesh.affine_map(t1);
        let map2 = mesh.affine_map(t2);
        let ref1: Vec<[f64; 2]> = phys.iter().map(|&p| map1.to_reference(p)).collect();
        let ref2: Vec<[f64; 2]> = phys.iter().map(|&p| map2.to_reference(p)).collect();
        let v1 = v.eval_on_element(v_basis, t1, &ref1);
        let v2 = v.eval_on_element(v_basis, t2, &ref2);
        let p1 = eval_phi(t1, &ref1);
        let p2 = eval_phi(t2, &ref2);
        let tg = edge.tangent;
        let (s1, s2) = (sign(t1), sign(t2));
        for (q, &w) in quad.weights.iter().enumerate() {
            let jump = (v1[q][0] * tg[0] + v1[q][1] * tg[1]) * s1
                + (v2[q][0] * tg[0] + v2[q][1] * tg[1]) * s2;
            rhs += edge.length * w * 0.5 * (p1[q] + p2[q]) * jump;
        }
    }
    (lhs + rhs).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::vector_curl_of_field;
    use crate::mesh::Mesh;

    /// Exact local coefficients of a global polynomial vector field in the
    /// element's orthonormal basis (the integrand is polynomial, so the
    /// space rule is exact).
    fn restrict_global<F>(mesh: &Mesh, space: &MwgSpace, f: F) -> DiscreteField
    where
        F: Fn(f64, f64) -> [f64; 2],
    {
        let mut field = DiscreteField::zeros(space.dof_map(mesh));
        let trial_vals = space.trial.eval(&space.tri_quad.points);
        for tau in 0..mesh.n_elements() {
            let map = mesh.affine_map(tau);
            let block = field.block_mut(tau);
            for (q, &w) in space.tri_quad.weights.iter().enumerate() {
                let p = map.to_physical(space.tri_quad.points[q]);
                let v = f(p[0], p[1]);
                for m in 0..space.trial.dim() {
                    // Reference mass is the identity, so the projection is a
                    // plain quadrature sum (det cancels against 1/det).
                    block[m] += w * trial_vals[m][q] * v[0];
                    block[space.trial.dim() + m] += w * trial_vals[m][q] * v[1];
                }
            }
        }
        field
    }

    #[test]
    fn interior_stencil_shape_matches_spec_example() {
        let mesh = Mesh::uniform_square(4).unwrap();
        let space = MwgSpace::new(1).unwrap();
        // Find an element whose three edges are all interior.
        let tau = (0..mesh.n_elements())
            .find(|&t| {
                mesh.element_edges[t]
                    .iter()
                    .all(|&(e, _)| !mesh.edges[e].is_boundary())
            })
            .expect("interior element exists at N = 4");
        let st = build_weak_curl_stencil(&mesh, &space, tau, BcMode::Homogeneous).unwrap();
        assert_eq!(st.participants.len(), 4);
        assert_eq!(st.matrix.rows, 1);
        assert_eq!(st.matrix.cols, 24);
        assert!(st.lift.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn constant_fields_have_zero_weak_curl() {
        let mesh = Mesh::uniform_square(2).unwrap();
        let space = MwgSpace::new(1).unwrap();
        let field = restrict_global(&mesh, &space, |_, _| [0.75, -0.3]);
        for tau in 0..mesh.n_elements() {
            let st = build_weak_curl_stencil(&mesh, &space, tau, BcMode::RawAverage).unwrap();
            let vals = eval_weak_curl(&field, &st, &space, &[[0.3, 0.3], [0.1, 0.6]]);
            for v in vals {
                assert!(v.abs() < 1e-12, "element {tau}: curl_w = {v}");
            }
        }
    }

    #[test]
    fn rotational_field_has_weak_curl_two() {
        let mesh = Mesh::uniform_square(2).unwrap();
        let space = MwgSpace::new(1).unwrap();
        let field = restrict_global(&mesh, &space, |x, y| [-y, x]);
        for tau in 0..mesh.n_elements() {
            let st = build_weak_curl_stencil(&mesh, &space, tau, BcMode::RawAverage).unwrap();
            let vals = eval_weak_curl(&field, &st, &space, &[[0.25, 0.25]]);
            assert!((vals[0] - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn weak_curl_reproduces_classical_curl_for_quadratics() {
        // v = (x^2, x y): curl v = y - 0 = y, a P_1 function.
        let mesh = Mesh::uniform_square(2).unwrap();
        let space = MwgSpace::new(2).unwrap();
        let field = restrict_global(&mesh, &space, |x, y| [x * x, x * y]);
        let pts = [[0.2, 0.2], [0.5, 0.25], [0.1, 0.7]];
        for tau in 0..mesh.n_elements() {
            let map = mesh.affine_map(tau);
            let st = build_weak_curl_stencil(&mesh, &space, tau, BcMode::RawAverage).unwrap();
            let vals = eval_weak_curl(&field, &st, &space, &pts);
            for (q, v) in vals.iter().enumerate() {
                let p = map.to_physical(pts[q]);
                assert!(
                    (v - p[1]).abs() < 1e-11,
                    "element {tau}: curl_w = {v} vs y = {}",
                    p[1]
                );
            }
        }
    }

    #[test]
    fn classical_curl_helper_agrees_on_elements() {
        // vector_curl_of_field and the weak curl agree for a smooth global
        // polynomial restricted to the mesh.
        let mesh = Mesh::uniform_square(2).unwrap();
        let space = MwgSpace::new(2).unwrap();
        let field = restrict_global(&mesh, &space, |x, y| [x * y, 0.5 * y * y - x]);
        let pts = [[0.3, 0.4]];
        for tau in 0..mesh.n_elements() {
            let map = mesh.affine_map(tau);
            let st = build_weak_curl_stencil(&mesh, &space, tau, BcMode::RawAverage).unwrap();
            let wv = eval_weak_curl(&field, &st, &space, &pts);
            let cv = vector_curl_of_field(field.block(tau), &space.trial, &map, &pts);
            assert!((wv[0] - cv[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn edge_identity_holds_for_hand_built_fields() {
        let mesh = Mesh::uniform_square(2).unwrap();
        let space = MwgSpace::new(1).unwrap();
        let v = restrict_global(&mesh, &space, |x, y| [x + 2.0 * y, x * y]);
        // phi: element-index-dependent (discontinuous) linear polynomials.
        let phi_basis = PolyBasis::monomial(1).unwrap();
        let mut phi = vec![0.0; 3 * mesh.n_elements()];
        for tau in 0..mesh.n_elements() {
            phi[3 * tau] = tau as f64 * 0.37 - 1.0;
            phi[3 * tau + 1] = 0.5 + (tau % 3) as f64;
            phi[3 * tau + 2] = -0.25 * (tau as f64);
        }
        let r = edge_identity_residual(&mesh, &space.trial, &v, &phi_basis, &phi);
        assert!(r < 1e-12, "residual {r}");
    }

    #[test]
    fn homogeneous_mode_zeroes_the_lift_and_data_mode_fills_it() {
        let mesh = Mesh::uniform_square(2).unwrap();
        let space = MwgSpace::new(1).unwrap();
        // Element 0 touches the bottom boundary.
        let hom = build_weak_curl_stencil(&mesh, &space, 0, BcMode::Homogeneous).unwrap();
        assert!(hom.lift.iter().all(|&v| v == 0.0));
        let g = |_x: f64, _y: f64, t: [f64; 2]| t[0]; // nonzero along the bottom
        let dat = build_weak_curl_stencil(&mesh, &space, 0, BcMode::Data(&g)).unwrap();
        assert!(dat.lift.iter().any(|&v| v.abs() > 1e-10));
        // Matrices agree: data only changes the affine part.
        for i in 0..dat.matrix.rows {
            for c in 0..dat.matrix.cols {
                assert_eq!(dat.matrix.at(i, c), hom.matrix.at(i, c));
            }
        }
    }
}
