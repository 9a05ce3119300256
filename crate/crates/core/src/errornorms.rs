//! Error measures between exact solutions and discrete fields.
//!
//! The energy norm of the error e = u - u_h splits into three squared terms:
//!
//!   |||e|||^2 = ||curl u - curl_w u_h||^2 + ||u - u_h||^2 + s(e, e),
//!
//! where the stabilization part sums 1/h_e times the squared tangential jump
//! of the error over all edges. The exact solution is tangentially
//! continuous, so on interior edges the jump of e is minus the jump of u_h;
//! on boundary edges it is the defect of the boundary condition, which for
//! the strongly constrained solutions is only the polynomial projection
//! error of the data. The weak curl is the raw-average operator of the
//! broken space, the same one the assembled system uses. All terms are
//! integrated with the refined quadrature rules of the space, which are well
//! beyond the polynomial degree so that the quadrature error is negligible
//! next to the discretization error being measured.

use crate::assembly::project_vector;
use crate::error::MwgError;
use crate::field::DiscreteField;
use crate::manufactured::ManufacturedCase;
use crate::mesh::Mesh;
use crate::space::MwgSpace;
use crate::weakcurl::{build_weak_curl_stencil, eval_weak_curl, BcMode};

/// Squared contributions to the energy error.
#[derive(Debug, Clone, Copy)]
pub struct ErrorBreakdown {
    pub curl_sq: f64,
    pub l2_sq: f64,
    pub stab_sq: f64,
}

impl ErrorBreakdown {
    pub fn energy(&self) -> f64 {
        (self.curl_sq + self.l2_sq + self.stab_sq).sqrt()
    }

    pub fn l2(&self) -> f64 {
        self.l2_sq.sqrt()
    }
}

/// Energy error of a discrete solution of the scheme.
pub fn solution_error(
    mesh: &Mesh,
    space: &MwgSpace,
    field: &DiscreteField,
    case: &ManufacturedCase,
) -> Result<ErrorBreakdown, MwgError> {
    error_terms(mesh, space, field, case)
}

/// Energy error of the elementwise L2 projection of the exact solution. The
/// decay rate of this quantity is the approximation-theory benchmark the
/// scheme's convergence is compared against.
pub fn projection_error(
    mesh: &Mesh,
    space: &MwgSpace,
    case: &ManufacturedCase,
) -> Result<ErrorBreakdown, MwgError> {
    let field = project_vector(mesh, space, &case.u);
    error_terms(mesh, space, &field, case)
}

/// ||curl u - curl_w (P_h u)||: the commuting-style estimate for the weak
/// curl of the projection, expected to decay like h^k.
pub fn projection_curl_error(
    mesh: &Mesh,
    space: &MwgSpace,
    case: &ManufacturedCase,
) -> Result<f64, MwgError> {
    let field = project_vector(mesh, space, &case.u);
    let b = error_terms(mesh, space, &field, case)?;
    Ok(b.curl_sq.sqrt())
}

/// ||u - P_h u||: plain L2 projection error, expected to decay like h^{k+1}.
pub fn projection_l2_error(mesh: &Mesh, space: &MwgSpace, case: &ManufacturedCase) -> f64 {
    let field = project_vector(mesh, space, &case.u);
    let mut acc = 0.0;
    for tau in 0..mesh.n_elements() {
        let map = mesh.affine_map(tau);
        let vals = field.eval_on_element(&space.trial, tau, &space.fine_tri_quad.points);
        for (q, &w) in space.fine_tri_quad.weights.iter().enumerate() {
            let p = map.to_physical(space.fine_tri_quad.points[q]);
            let e = (case.u)(p[0], p[1]);
            let dx = e[0] - vals[q][0];
            let dy = e[1] - vals[q][1];
            acc += map.det * w * (dx * dx + dy * dy);
        }
    }
    acc.sqrt()
}

fn error_terms(
    mesh: &Mesh,
    space: &MwgSpace,
    field: &DiscreteField,
    case: &ManufacturedCase,
) -> Result<ErrorBreakdown, MwgError> {
    let mut curl_sq = 0.0;
    let mut l2_sq = 0.0;
    for tau in 0..mesh.n_elements() {
        let map = mesh.affine_map(tau);
        let st = build_weak_curl_stencil(mesh, space, tau, BcMode::RawAverage)?;
        let cw = eval_weak_curl(field, &st, space, &space.fine_tri_quad.points);
        let uv = field.eval_on_element(&space.trial, tau, &space.fine_tri_quad.points);
        for (q, &w) in space.fine_tri_quad.weights.iter().enumerate() {
            let p = map.to_physical(space.fine_tri_quad.points[q]);
            let dc = (case.curl_u)(p[0], p[1]) - cw[q];
            let e = (case.u)(p[0], p[1]);
            let dx = e[0] - uv[q][0];
            let dy = e[1] - uv[q][1];
            curl_sq += map.det * w * (dc * dc);
            l2_sq += map.det * w * (dx * dx + dy * dy);
        }
    }

    // Stabilization of the error: per edge, sum over adjacent sides of
    // (u - u_h)|side . t_side at the quadrature points. The exact solution
    // cancels between the two sides of an interior edge (its tangential
    // trace is single-valued), leaving the jump of u_h; on boundary edges
    // the one-sided formula is the boundary-condition defect. The 1/h_e
    // weight cancels against the length element of the edge.
    let mut stab_sq = 0.0;
    for e in 0..mesh.n_edges() {
        let edge = &mesh.edges[e];
        let (a, b) = mesh.edge_endpoints(e);
        let phys: Vec<[f64; 2]> = space
            .fine_edge_quad
            .points
            .iter()
            .map(|&s| [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])])
            .collect();
        let mut jumps = vec![0.0; phys.len()];
        let mut sides = vec![edge.elements.0];
        if let Some(t2) = edge.elements.1 {
            sides.push(t2);
        }
        for &tau in &sides {
            let sigma = mesh.element_edges[tau]
                .iter()
                .find(|(idx, _)| *idx == e)
                .expect("edge belongs to side")
                .1 as f64;
            let t = [sigma * edge.tangent[0], sigma * edge.tangent[1]];
            let map = mesh.affine_map(tau);
            let refs: Vec<[f64; 2]> = phys.iter().map(|&p| map.to_reference(p)).collect();
            let vals = field.eval_on_element(&space.trial, tau, &refs);
            for (q, jump) in jumps.iter_mut().enumerate() {
                let exact = (case.u)(phys[q][0], phys[q][1]);
                *jump += (exact[0] - vals[q][0]) * t[0] + (exact[1] - vals[q][1]) * t[1];
            }
        }
        for (q, &w) in space.fine_edge_quad.weights.iter().enumerate() {
            stab_sq += w * jumps[q] * jumps[q];
        }
    }

    Ok(ErrorBreakdown {
        curl_sq,
        l2_sq,
        stab_sq,
    })
}

/// Observed convergence orders from errors on a doubling mesh sequence:
/// order_i = log2(e_{i-1} / e_i), with NaN in the first slot. Rejects empty
/// input and sequences where N does not exactly double between levels.
pub fn convergence_orders(levels: &[usize], errors: &[f64]) -> Result<Vec<f64>, MwgError> {
    if levels.is_empty() || levels.len() != errors.len() {
        return Err(MwgError::EmptyLevels);
    }
    for w in levels.windows(2) {
        if w[1] != 2 * w[0] {
            return Err(MwgError::NonDoublingLevels(levels.to_vec()));
        }
    }
    let mut orders = vec![f64::NAN];
    for i in 1..errors.len() {
        orders.push((errors[i - 1] / errors[i]).log2());
    }
    Ok(orders)
}

/// Least-squares slope of ln(error) against ln(1/N): the single-number
/// convergence rate over a whole refinement sequence.
pub fn fitted_slope(levels: &[usize], errors: &[f64]) -> f64 {
    assert_eq!(levels.len(), errors.len());
    assert!(levels.len() >= 2);
    let xs: Vec<f64> = levels.iter().map(|&n| -(n as f64).ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|&e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::assemble_system;
    use crate::constraints::TangentialBc;
    use crate::manufactured::get_case;
    use crate::solver::constrained_cholesky_solve;

    #[test]
    fn orders_follow_the_log2_ratio_rule() {
        let orders = convergence_orders(&[4, 8, 16], &[4.0, 1.0, 0.25]).unwrap();
        assert!(orders[0].is_nan());
        assert!((orders[1] - 2.0).abs() < 1e-14);
        assert!((orders[2] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn orders_reject_bad_level_sequences() {
        assert!(matches!(
            convergence_orders(&[], &[]),
            Err(MwgError::EmptyLevels)
        ));
        assert!(matches!(
            convergence_orders(&[4, 6], &[1.0, 0.5]),
            Err(MwgError::NonDoublingLevels(_))
        ));
    }

    #[test]
    fn fitted_slope_recovers_exact_power_laws() {
        let levels = [4usize, 8, 16, 32];
        let errors: Vec<f64> = levels.iter().map(|&n| 3.0 / (n as f64).powi(2)).collect();
        assert!((fitted_slope(&levels, &errors) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn energy_error_of_zero_field_matches_hand_integral() {
        // Case 1 is u = (w, w) with w = x(1-x)y(1-y). By hand:
        //   ||u||^2      = 2 (int x^2(1-x)^2 dx)^2 = 2/900       = 1/450,
        //   ||curl u||^2 = 2/3 int y^2(1-y)^2 dy   = 2/90        = 1/45
        // (the cross term vanishes because int (1-2x) x(1-x) dx = 0), and
        // the boundary data vanish, so |||u - 0|||^2 = 11/450. Every
        // integrand is a polynomial of degree 8, which the refined
        // quadrature of the degree-2 space integrates exactly.
        let mesh = Mesh::uniform_square(4).unwrap();
        let space = MwgSpace::new(2).unwrap();
        let case = get_case(1).unwrap();
        let zero = DiscreteField::zeros(space.dof_map(&mesh));
        let b = solution_error(&mesh, &space, &zero, &case).unwrap();
        let total = b.curl_sq + b.l2_sq + b.stab_sq;
        let exact = 11.0 / 450.0;
        assert!(
            (total - exact).abs() < 1e-12 * exact,
            "got {total}, want {exact}"
        );
        assert!((b.curl_sq - 1.0 / 45.0).abs() < 1e-14);
        assert!((b.l2_sq - 1.0 / 450.0).abs() < 1e-14);
        assert!(b.stab_sq < 1e-25);
    }

    #[test]
    fn l2_error_is_below_energy_error_on_a_real_solve() {
        let mesh = Mesh::uniform_square(4).unwrap();
        let space = MwgSpace::new(1).unwrap();
        let case = get_case(1).unwrap();
        let sys = assemble_system(&mesh, &space, &case).unwrap();
        let bc = TangentialBc::build(&mesh, &space, &case);
        let (x, _) = constrained_cholesky_solve(&sys.matrix, &sys.rhs, &bc, &sys.dofs).unwrap();
        let field = DiscreteField::from_values(sys.dofs, x);
        let b = solution_error(&mesh, &space, &field, &case).unwrap();
        assert!(b.l2() > 0.0);
        assert!(b.l2() < b.energy());
        // A coarse mesh cannot resolve the solution to better than a few
        // percent, but the solve must beat the zero field by a wide margin.
        assert!(b.energy() < 0.5 * (11.0f64 / 450.0).sqrt());
    }

    #[test]
    fn projection_errors_shrink_with_refinement() {
        let space = MwgSpace::new(1).unwrap();
        let case = get_case(1).unwrap();
        let mut prev = f64::INFINITY;
        for n in [2usize, 4, 8] {
            let mesh = Mesh::uniform_square(n).unwrap();
            let c = projection_curl_error(&mesh, &space, &case).unwrap();
            let l = projection_l2_error(&mesh, &space, &case);
            assert!(c < prev);
            assert!(l < c, "L2 projection error should be the smaller one");
            prev = c;
        }
    }
}
