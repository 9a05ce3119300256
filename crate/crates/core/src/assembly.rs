//! Assembly of the modified weak Galerkin system.
//!
//! The bilinear form is
//!
//!   a(u, v) = (curl_w u, curl_w v) + (u, v) + s(u, v),
//!
//! with the parameter-free stabilization
//!
//!   s(u, v) = sum over all edges of 1/h_e <[[u]], [[v]]>_e,
//!
//! where [[.]] is the tangential jump (one-sided trace on boundary edges).
//! The weak curl uses the raw one-sided trace on boundary edges, so the
//! assembled operator is the bilinear form of the unconstrained broken
//! space. Tangential boundary conditions are imposed strongly on the trial
//! space by the `constraints` module: for fields whose boundary trace
//! vanishes, the boundary contributions of both the weak curl and the
//! stabilization vanish identically, and inhomogeneous data enter the solve
//! through the constrained solvers' data lift, never through assembly. The
//! right-hand side is the plain load (f, v).
//!
//! The matrix couples each element with its distance-<=2 neighborhood (its
//! stencil participants and theirs), stays exactly symmetric by
//! construction, and is assembled deterministically: identical inputs yield
//! bit-identical matrices.

use crate::basis::local_mass_matrix;
use crate::dense::{Cholesky, DenseMatrix};
use crate::error::MwgError;
use crate::field::{DiscreteField, DofMap};
use crate::manufactured::ManufacturedCase;
use crate::mesh::Mesh;
use crate::space::MwgSpace;
use crate::sparse::{PatternBuilder, SparseSymMatrix};
use crate::weakcurl::{build_weak_curl_stencil, BcMode, WeakCurlStencil};

pub struct AssembledSystem {
    pub matrix: SparseSymMatrix,
    pub rhs: Vec<f64>,
    pub dofs: DofMap,
}

/// Build the stiffness matrix and load vector for a manufactured case.
pub fn assemble_system(
    mesh: &Mesh,
    space: &MwgSpace,
    case: &ManufacturedCase,
) -> Result<AssembledSystem, MwgError> {
    let dofs = space.dof_map(mesh);
    let block = space.block();
    let trial_dim = space.trial_dim();
    let test_dim = space.test_dim();

    let stencils: Vec<WeakCurlStencil> = (0..mesh.n_elements())
        .map(|tau| build_weak_curl_stencil(mesh, space, tau, BcMode::RawAverage))
        .collect::<Result<_, _>>()?;

    // Sparsity: stencil participant pairs plus edge-neighbor pairs.
    let mut pattern = PatternBuilder::new(mesh.n_elements(), block);
    for st in &stencils {
        for (i, &pa) in st.participants.iter().enumerate() {
            for &pb in &st.participants[i..] {
                pattern.couple(pa, pb);
            }
        }
    }
    for edge in &mesh.edges {
        let t1 = edge.elements.0;
        pattern.couple(t1, t1);
        if let Some(t2) = edge.elements.1 {
            pattern.couple(t2, t2);
            pattern.couple(t1, t2);
        }
    }
    let mut a = pattern.build();
    let mut rhs = vec![0.0; dofs.n()];

    // Element terms: curl-curl through the stencil, vector mass, and load.
    let trial_vals = space.trial.eval(&space.tri_quad.points);
    for tau in 0..mesh.n_elements() {
        let st = &stencils[tau];
        let map = mesh.affine_map(tau);
        let cols = st.participants.len() * block;

        // t1 = M_test S and the symmetric local curl block S^T M_test S.
        let mass_test = local_mass_matrix(&space.test, &map, &space.tri_quad);
        let mut t1 = DenseMatrix::zeros(test_dim, cols);
        for i in 0..test_dim {
            for c in 0..cols {
                let mut acc = 0.0;
                for j in 0..test_dim {
                    acc += mass_test.at(i, j) * st.matrix.at(j, c);
                }
                *t1.at_mut(i, c) = acc;
            }
        }
        let mut local = DenseMatrix::zeros(cols, cols);
        for r in 0..cols {
            for c in r..cols {
                let mut acc = 0.0;
                for i in 0..test_dim {
                    acc += st.matrix.at(i, r) * t1.at(i, c);
                }
                *local.at_mut(r, c) = acc;
                *local.at_mut(c, r) = acc;
            }
        }
        scatter(&mut a, &dofs, &st.participants, block, &local);

        // Vector mass block (diagonal in the component split) and load.
        let mass_trial = local_mass_matrix(&space.trial, &map, &space.tri_quad);
        let off = dofs.offset(tau);
        for mi in 0..trial_dim {
            let row_x = off + mi;
            let row_y = off + trial_dim + mi;
            let sx = a.block_start(row_x, tau);
            let sy = a.block_start(row_y, tau);
            for mj in 0..trial_dim {
                let v = mass_trial.at(mi, mj);
                a.values_mut()[sx + mj] += v;
                a.values_mut()[sy + trial_dim + mj] += v;
            }
        }
        for (q, &w) in space.tri_quad.weights.iter().enumerate() {
            let p = map.to_physical(space.tri_quad.points[q]);
            let fv = (case.f)(p[0], p[1]);
            for m in 0..trial_dim {
                let wphi = map.det * w * trial_vals[m][q];
                rhs[off + m] += wphi * fv[0];
                rhs[off + trial_dim + m] += wphi * fv[1];
            }
        }
    }

    // Stabilization over all edges.
    for e in 0..mesh.n_edges() {
        let rows = jump_rows(mesh, space, e);
        let local = jump_product(space, &rows);
        scatter(&mut a, &dofs, &rows.sides, block, &local);
    }

    a.verify_symmetry()?;
    Ok(AssembledSystem {
        matrix: a,
        rhs,
        dofs,
    })
}

/// The stabilization matrix s(., .) alone (all edges, no data terms).
pub fn assemble_stabilization_only(mesh: &Mesh, space: &MwgSpace) -> SparseSymMatrix {
    let block = space.block();
    let mut pattern = PatternBuilder::new(mesh.n_elements(), block);
    for edge in &mesh.edges {
        let t1 = edge.elements.0;
        pattern.couple(t1, t1);
        if let Some(t2) = edge.elements.1 {
            pattern.couple(t2, t2);
            pattern.couple(t1, t2);
        }
    }
    let mut a = pattern.build();
    let dofs = space.dof_map(mesh);
    for e in 0..mesh.n_edges() {
        let rows = jump_rows(mesh, space, e);
        let local = jump_product(space, &rows);
        scatter(&mut a, &dofs, &rows.sides, block, &local);
    }
    a
}

/// Tangential-jump rows of one edge at the edge quadrature points.
struct JumpRows {
    /// Adjacent elements: one for boundary edges, two for interior.
    sides: Vec<usize>,
    /// Per quadrature point, the jump row over the stacked side blocks.
    rows: Vec<Vec<f64>>,
}

fn jump_rows(mesh: &Mesh, space: &MwgSpace, e: usize) -> JumpRows {
    let edge = &mesh.edges[e];
    let trial_dim = space.trial_dim();
    let block = space.block();
    let mut sides = vec![edge.elements.0];
    if let Some(t2) = edge.elements.1 {
        sides.push(t2);
    }
    let (a, b) = mesh.edge_endpoints(e);
    let phys: Vec<[f64; 2]> = space
        .edge_quad
        .points
        .iter()
        .map(|&s| [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])])
        .collect();

    let mut rows = vec![vec![0.0; sides.len() * block]; phys.len()];
    for (sidx, &tau) in sides.iter().enumerate() {
        let sigma = mesh.element_edges[tau]
            .iter()
            .find(|(idx, _)| *idx == e)
            .expect("edge belongs to side")
            .1 as f64;
        let t = [sigma * edge.tangent[0], sigma * edge.tangent[1]];
        let map = mesh.affine_map(tau);
        let refs: Vec<[f64; 2]> = phys.iter().map(|&p| map.to_reference(p)).collect();
        let vals = space.trial.eval(&refs);
        for (q, row) in rows.iter_mut().enumerate() {
            for m in 0..trial_dim {
                row[sidx * block + m] = vals[m][q] * t[0];
                row[sidx * block + trial_dim + m] = vals[m][q] * t[1];
            }
        }
    }
    JumpRows { sides, rows }
}

/// sum_q w_q J_q^T J_q, symmetric by explicit mirroring. The 1/h_e penalty
/// weight cancels against the edge length element of ds.
fn jump_product(space: &MwgSpace, rows: &JumpRows) -> DenseMatrix {
    let l = rows.sides.len() * space.block();
    let mut local = DenseMatrix::zeros(l, l);
    for (q, &w) in space.edge_quad.weights.iter().enumerate() {
        let row = &rows.rows[q];
        for r in 0..l {
            if row[r] == 0.0 {
                continue;
            }
            let wr = w * row[r];
            for c in r..l {
                *local.at_mut(r, c) += wr * row[c];
            }
        }
    }
    for r in 0..l {
        for c in r + 1..l {
            *local.at_mut(c, r) = local.at(r, c);
        }
    }
    local
}

fn scatter(
    a: &mut SparseSymMatrix,
    dofs: &DofMap,
    parts: &[usize],
    block: usize,
    local: &DenseMatrix,
) {
    for (pr, &er) in parts.iter().enumerate() {
        for ri in 0..block {
            let grow = dofs.offset(er) + ri;
            for (pc, &ec) in parts.iter().enumerate() {
                let start = a.block_start(grow, ec);
                let vals = a.values_mut();
                for ci in 0..block {
                    vals[start + ci] += local.at(pr * block + ri, pc * block + ci);
                }
            }
        }
    }
}

/// Elementwise L2 projection onto vector (P_k)^2 (the P_h operator).
pub fn project_vector(
    mesh: &Mesh,
    space: &MwgSpace,
    f: &dyn Fn(f64, f64) -> [f64; 2],
) -> DiscreteField {
    let mut field = DiscreteField::zeros(space.dof_map(mesh));
    let dim = space.trial_dim();
    let vals = space.trial.eval(&space.fine_tri_quad.points);
    for tau in 0..mesh.n_elements() {
        let map = mesh.affine_map(tau);
        let mass = local_mass_matrix(&space.trial, &map, &space.fine_tri_quad);
        let chol = Cholesky::new(&mass).expect("element mass is SPD");
        let mut bx = vec![0.0; dim];
        let mut by = vec![0.0; dim];
        for (q, &w) in space.fine_tri_quad.weights.iter().enumerate() {
            let p = map.to_physical(space.fine_tri_quad.points[q]);
            let v = f(p[0], p[1]);
            for m in 0..dim {
                let wphi = map.det * w * vals[m][q];
                bx[m] += wphi * v[0];
                by[m] += wphi * v[1];
            }
        }
        let cx = chol.solve(&bx);
        let cy = chol.solve(&by);
        let blockv = field.block_mut(tau);
        blockv[..dim].copy_from_slice(&cx);
        blockv[dim..].copy_from_slice(&cy);
    }
    field
}

/// Elementwise L2 projection onto scalar P_{k-1} (the G_h operator);
/// returns per-element coefficient blocks of size dim(P_{k-1}).
pub fn project_scalar(mesh: &Mesh, space: &MwgSpace, f: &dyn Fn(f64, f64) -> f64) -> Vec<f64> {
    let dim = space.test_dim();
    let mut out = vec![0.0; dim * mesh.n_elements()];
    let vals = space.test.eval(&space.fine_tri_quad.points);
    for tau in 0..mesh.n_elements() {
        let map = mesh.affine_map(tau);
        let mass = local_mass_matrix(&space.test, &map, &space.fine_tri_quad);
        let chol = Cholesky::new(&mass).expect("element mass is SPD");
        let mut b = vec![0.0; dim];
        for (q, &w) in space.fine_tri_quad.weights.iter().enumerate() {
            let p = map.to_physical(space.fine_tri_quad.points[q]);
            let fv = f(p[0], p[1]);
            for m in 0..dim {
                b[m] += map.det * w * vals[m][q] * fv;
            }
        }
        let c = chol.solve(&b);
        out[tau * dim..(tau + 1) * dim].copy_from_slice(&c);
    }
    out
}
