//! Strong tangential boundary conditions as local trace constraints.
//!
//! The trial space is piecewise `(P_k)^2` with no built-in continuity, so the
//! boundary condition u . t = g cannot be imposed by fixing nodal values.
//! Instead, every element with boundary edges gets linear constraints: on
//! each of its boundary edges, the first k+1 moments of the tangential trace
//! must match the moments of the data,
//!
//!   int_e s^m (u|_tau . t) ds = int_e s^m g ds,   m = 0 .. k.
//!
//! Since u|_tau . t is itself a polynomial of degree <= k on the edge, these
//! moments pin it down completely: the constrained trace *is* the L2
//! projection of g onto P_k(e), and vanishes identically when g = 0.
//!
//! The constraints are entirely local to one element block, so the change of
//! variables to the constrained subspace is block-diagonal: per element, an
//! orthonormal basis `T_tau` of the constraint nullspace plus one particular
//! coefficient vector carrying the inhomogeneous data. Interior elements
//! keep their identity blocks. The global solve then works on the reduced
//! coordinates x with u = T x + u_g, and the reduced operator T^T A T is
//! applied matrix-free through expand / matvec / contract.

use crate::dense::DenseMatrix;
use crate::field::DofMap;
use crate::manufactured::ManufacturedCase;
use crate::mesh::Mesh;
use crate::space::MwgSpace;
use crate::sparse::SparseSymMatrix;

/// Change of variables for one element.
struct ElementReduction {
    /// Orthonormal nullspace basis (block x dim); None for interior elements
    /// (identity, no constraints).
    basis: Option<DenseMatrix>,
    /// Particular solution of the trace constraints; empty means zero.
    lift: Vec<f64>,
    /// Reduced coefficient count of the element.
    dim: usize,
    /// Start of the element's coefficients in the reduced vector.
    offset: usize,
}

/// The assembled change of variables onto the constrained (affine) space.
pub struct TangentialBc {
    reductions: Vec<ElementReduction>,
    block: usize,
    n_reduced: usize,
}

/// Moment rows of the tangential traces of all basis functions on the
/// boundary edges of `tau`, with the matching data moments. `None` when the
/// element has no boundary edge.
fn trace_constraints(
    mesh: &Mesh,
    space: &MwgSpace,
    tau: usize,
    case: &ManufacturedCase,
) -> Option<(DenseMatrix, Vec<f64>)> {
    let boundary: Vec<usize> = mesh.element_edges[tau]
        .iter()
        .map(|&(e, _)| e)
        .filter(|&e| mesh.edges[e].elements.1.is_none())
        .collect();
    if boundary.is_empty() {
        return None;
    }
    let dim = space.trial_dim();
    let block = space.block();
    let nmom = space.degree + 1;
    let map = mesh.affine_map(tau);
    let mut c = DenseMatrix::zeros(boundary.len() * nmom, block);
    let mut ghat = vec![0.0; boundary.len() * nmom];
    for (bi, &e) in boundary.iter().enumerate() {
        let edge = &mesh.edges[e];
        let sigma = mesh.element_edges[tau]
            .iter()
            .find(|(idx, _)| *idx == e)
            .expect("edge belongs to element")
            .1 as f64;
        let t = [sigma * edge.tangent[0], sigma * edge.tangent[1]];
        let (a, b) = mesh.edge_endpoints(e);
        let pts: Vec<[f64; 2]> = space
            .edge_quad
            .points
            .iter()
            .map(|&s| [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])])
            .collect();
        let refs: Vec<[f64; 2]> = pts.iter().map(|&p| map.to_reference(p)).collect();
        let vals = space.trial.eval(&refs);
        for (q, &w) in space.edge_quad.weights.iter().enumerate() {
            let s = space.edge_quad.points[q];
            let mut smom = 1.0;
            for m in 0..nmom {
                let row = bi * nmom + m;
                for i in 0..dim {
                    *c.at_mut(row, i) += w * smom * vals[i][q] * t[0];
                    *c.at_mut(row, dim + i) += w * smom * vals[i][q] * t[1];
                }
                if !case.homogeneous {
                    ghat[row] += w * smom * case.g_t(pts[q][0], pts[q][1], t);
                }
                smom *= s;
            }
        }
    }
    Some((c, ghat))
}

/// Orthonormal nullspace basis of the constraint rows plus the minimum-norm
/// particular solution, by modified Gram-Schmidt with right-hand-side
/// tracking. Rank-deficient (dependent) constraint rows are dropped after
/// verifying their data stay consistent, so elements with several boundary
/// edges need no special casing.
fn constrained_basis(c: &DenseMatrix, ghat: &[f64]) -> (DenseMatrix, Vec<f64>) {
    let n = c.cols;
    let row_scale = (0..c.rows)
        .map(|i| c.row(i).iter().map(|x| x * x).sum::<f64>().sqrt())
        .fold(1e-30_f64, f64::max);
    let g_scale = ghat.iter().fold(1.0_f64, |m, &g| m.max(g.abs()));

    // Orthonormalize the constraint rows; each kept row q_j carries the
    // transformed datum gam_j with q_j . u = gam_j on the feasible set.
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut gam: Vec<f64> = Vec::new();
    for i in 0..c.rows {
        let mut v = c.row(i).to_vec();
        let mut g = ghat[i];
        for _ in 0..2 {
            for (q, &gq) in rows.iter().zip(&gam) {
                let d: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
                for (vj, qj) in v.iter_mut().zip(q) {
                    *vj -= d * qj;
                }
                g -= d * gq;
            }
        }
        let nrm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nrm > 1e-10 * row_scale {
            for vj in v.iter_mut() {
                *vj /= nrm;
            }
            rows.push(v);
            gam.push(g / nrm);
        } else {
            assert!(
                g.abs() <= 1e-9 * g_scale.max(row_scale),
                "inconsistent dependent boundary constraint: residual {g:e}"
            );
        }
    }

    // Minimum-norm particular solution in the row space.
    let mut lift = vec![0.0; n];
    for (q, &gq) in rows.iter().zip(&gam) {
        for (u, qj) in lift.iter_mut().zip(q) {
            *u += gq * qj;
        }
    }
    for i in 0..c.rows {
        let r: f64 = c.row(i).iter().zip(&lift).map(|(a, b)| a * b).sum::<f64>() - ghat[i];
        assert!(
            r.abs() <= 1e-9 * g_scale.max(row_scale),
            "boundary data lift residual {r:e}"
        );
    }

    // Complete the orthonormal row space to a basis of R^n; the complement
    // spans the nullspace.
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for j in 0..n {
        let mut v = vec![0.0; n];
        v[j] = 1.0;
        for _ in 0..2 {
            for q in rows.iter().chain(basis.iter()) {
                let d: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
                for (vj, qj) in v.iter_mut().zip(q) {
                    *vj -= d * qj;
                }
            }
        }
        let nrm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nrm > 1e-8 {
            for vj in v.iter_mut() {
                *vj /= nrm;
            }
            basis.push(v);
        }
    }
    assert_eq!(rows.len() + basis.len(), n, "rank plus nullity");
    let mut t = DenseMatrix::zeros(n, basis.len());
    for (j, v) in basis.iter().enumerate() {
        for i in 0..n {
            *t.at_mut(i, j) = v[i];
        }
    }
    (t, lift)
}

impl TangentialBc {
    /// Build the per-element reductions for a case's boundary data.
    pub fn build(mesh: &Mesh, space: &MwgSpace, case: &ManufacturedCase) -> Self {
        let block = space.block();
        let mut reductions = Vec::with_capacity(mesh.n_elements());
        let mut offset = 0;
        for tau in 0..mesh.n_elements() {
            let red = match trace_constraints(mesh, space, tau, case) {
                None => ElementReduction {
                    basis: None,
                    lift: Vec::new(),
                    dim: block,
                    offset,
                },
                Some((c, ghat)) => {
                    let (t, mut lift) = constrained_basis(&c, &ghat);
                    if case.homogeneous {
                        lift = Vec::new();
                    }
                    ElementReduction {
                        dim: t.cols,
                        basis: Some(t),
                        lift,
                        offset,
                    }
                }
            };
            offset += red.dim;
            reductions.push(red);
        }
        TangentialBc {
            reductions,
            block,
            n_reduced: offset,
        }
    }

    pub fn n_reduced(&self) -> usize {
        self.n_reduced
    }

    /// u = T x (without the data lift).
    pub fn expand(&self, dofs: &DofMap, xr: &[f64], full: &mut [f64]) {
        let block = self.block;
        for (tau, red) in self.reductions.iter().enumerate() {
            let off = dofs.offset(tau);
            let seg = &xr[red.offset..red.offset + red.dim];
            match &red.basis {
                None => full[off..off + block].copy_from_slice(seg),
                Some(t) => {
                    for i in 0..block {
                        let mut acc = 0.0;
                        for (j, &s) in seg.iter().enumerate() {
                            acc += t.at(i, j) * s;
                        }
                        full[off + i] = acc;
                    }
                }
            }
        }
    }

    /// x = T^T u.
    pub fn contract(&self, dofs: &DofMap, full: &[f64], xr: &mut [f64]) {
        let block = self.block;
        for (tau, red) in self.reductions.iter().enumerate() {
            let off = dofs.offset(tau);
            let seg = &mut xr[red.offset..red.offset + red.dim];
            match &red.basis {
                None => seg.copy_from_slice(&full[off..off + block]),
                Some(t) => {
                    for (j, s) in seg.iter_mut().enumerate() {
                        let mut acc = 0.0;
                        for i in 0..block {
                            acc += t.at(i, j) * full[off + i];
                        }
                        *s = acc;
                    }
                }
            }
        }
    }

    /// The data lift u_g in full coordinates (zero for homogeneous data).
    pub fn lift_full(&self, dofs: &DofMap) -> Vec<f64> {
        let mut full = vec![0.0; dofs.n()];
        for (tau, red) in self.reductions.iter().enumerate() {
            if !red.lift.is_empty() {
                let off = dofs.offset(tau);
                full[off..off + self.block].copy_from_slice(&red.lift);
            }
        }
        full
    }

    /// Diagonal of the reduced operator T^T A T, from the element-diagonal
    /// blocks of A (T is block-diagonal, so this is exact).
    pub fn reduced_diagonal(&self, a: &SparseSymMatrix, dofs: &DofMap) -> Vec<f64> {
        let block = self.block;
        let mut diag = vec![0.0; self.n_reduced];
        for (tau, red) in self.reductions.iter().enumerate() {
            let off = dofs.offset(tau);
            match &red.basis {
                None => {
                    for i in 0..block {
                        diag[red.offset + i] = a.value_at(off + i, off + i);
                    }
                }
                Some(t) => {
                    for j in 0..red.dim {
                        let mut acc = 0.0;
                        for i in 0..block {
                            for l in 0..block {
                                acc += t.at(i, j) * a.value_at(off + i, off + l) * t.at(l, j);
                            }
                        }
                        diag[red.offset + j] = acc;
                    }
                }
            }
        }
        diag
    }

    /// Dense reduced matrix T^T A T, one sparse matvec per reduced column.
    pub fn reduced_dense(&self, a: &SparseSymMatrix, dofs: &DofMap) -> DenseMatrix {
        let nr = self.n_reduced;
        let n = a.n();
        let mut out = DenseMatrix::zeros(nr, nr);
        let mut e = vec![0.0; nr];
        let mut full = vec![0.0; n];
        let mut af = vec![0.0; n];
        let mut col = vec![0.0; nr];
        for j in 0..nr {
            e[j] = 1.0;
            self.expand(dofs, &e, &mut full);
            a.matvec(&full, &mut af);
            self.contract(dofs, &af, &mut col);
            for i in 0..nr {
                *out.at_mut(i, j) = col[i];
            }
            e[j] = 0.0;
        }
        // Symmetrize away the last-bit roundoff asymmetry of the matvec.
        for i in 0..nr {
            for j in i + 1..nr {
                let v = 0.5 * (out.at(i, j) + out.at(j, i));
                *out.at_mut(i, j) = v;
                *out.at_mut(j, i) = v;
            }
        }
        out
    }
}
