//! Uniform triangulations of the unit square.
//!
//! The square is split into N x N cells and each cell into two triangles by
//! the diagonal from its lower-left to its upper-right corner; triangle
//! vertices are stored counterclockwise. Every edge carries a global unit
//! tangent pointing from its lower-indexed endpoint to the higher one, and
//! each element records an orientation sign per local edge: +1 when the
//! element's counterclockwise traversal agrees with the global tangent, -1
//! otherwise. The two elements sharing an interior edge always see opposite
//! signs, which is what jump and average definitions rely on.

use crate::basis::AffineMap;
use crate::error::MwgError;
use std::collections::HashMap;

#[derive(Debug, Clone)]
pub struct Edge {
    /// Global endpoint indices, lower index first.
    pub vertices: (usize, usize),
    /// Unit tangent from the lower-indexed endpoint toward the higher.
    pub tangent: [f64; 2],
    pub length: f64,
    /// Adjacent elements in discovery order; `None` marks a boundary edge.
    pub elements: (usize, Option<usize>),
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.elements.1.is_none()
    }
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub vertices: Vec<[f64; 2]>,
    /// Counterclockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    pub edges: Vec<Edge>,
    /// Per element: (edge index, orientation sign) for the local edges
    /// (v0 -> v1), (v1 -> v2), (v2 -> v0).
    pub element_edges: Vec<[(usize, i8); 3]>,
    /// Mesh size: max over elements of sqrt(area).
    pub h: f64,
}

impl Mesh {
    /// Uniform N x N triangulation of [0,1]^2 (2 N^2 elements); every cell
    /// is split along the diagonal from its lower-left to its upper-right
    /// corner.
    pub fn uniform_square(n: usize) -> Result<Self, MwgError> {
        if n == 0 {
            return Err(MwgError::EmptyMesh);
        }
        let np = n + 1;
        let mut vertices = Vec::with_capacity(np * np);
        for j in 0..np {
            for i in 0..np {
                vertices.push([i as f64 / n as f64, j as f64 / n as f64]);
            }
        }
        let vid = |i: usize, j: usize| j * np + i;

        let mut triangles = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let a = vid(i, j);
                let b = vid(i + 1, j);
                let c = vid(i + 1, j + 1);
                let d = vid(i, j + 1);
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            }
        }

        let mut edges: Vec<Edge> = Vec::new();
        let mut lookup: HashMap<(usize, usize), usize> = HashMap::new();
        let mut element_edges = Vec::with_capacity(triangles.len());
        for (tau, tri) in triangles.iter().enumerate() {
            let mut local = [(0usize, 0i8); 3];
            for l in 0..3 {
                let from = tri[l];
                let to = tri[(l + 1) % 3];
                let key = (from.min(to), from.max(to));
                let idx = *lookup.entry(key).or_insert_with(|| {
                    let (lo, hi) = key;
                    let d = [
                        vertices[hi][0] - vertices[lo][0],
                        vertices[hi][1] - vertices[lo][1],
                    ];
                    let length = (d[0] * d[0] + d[1] * d[1]).sqrt();
                    edges.push(Edge {
                        vertices: key,
                        tangent: [d[0] / length, d[1] / length],
                        length,
                        elements: (tau, None),
                    });
                    edges.len() - 1
                });
                if edges[idx].elements.0 != tau {
                    debug_assert!(edges[idx].elements.1.is_none());
                    edges[idx].elements.1 = Some(tau);
                }
                local[l] = (idx, if from < to { 1 } else { -1 });
            }
            element_edges.push(local);
        }

        let h = 1.0 / (n as f64 * std::f64::consts::SQRT_2);
        Ok(Mesh {
            vertices,
            triangles,
            edges,
            element_edges,
            h,
        })
    }

    pub fn n_elements(&self) -> usize {
        self.triangles.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn affine_map(&self, tau: usize) -> AffineMap {
        let t = self.triangles[tau];
        AffineMap::from_triangle(
            self.vertices[t[0]],
            self.vertices[t[1]],
            self.vertices[t[2]],
        )
    }

    pub fn element_area(&self, tau: usize) -> f64 {
        0.5 * self.affine_map(tau).det
    }

    /// Global unit tangent of edge `e` (lower-indexed endpoint -> higher).
    pub fn edge_tangent(&self, e: usize) -> [f64; 2] {
        self.edges[e].tangent
    }

    /// Physical endpoints of edge `e` in global tangent direction.
    pub fn edge_endpoints(&self, e: usize) -> ([f64; 2], [f64; 2]) {
        let (lo, hi) = self.edges[e].vertices;
        (self.vertices[lo], self.vertices[hi])
    }

    /// The element on the other side of `e` from `tau`, or `None` when `e`
    /// lies on the boundary. Errors if `e` is not an edge of `tau`.
    pub fn neighbor_across(&self, tau: usize, e: usize) -> Result<Option<usize>, MwgError> {
        let edge = &self.edges[e];
        if edge.elements.0 == tau {
            Ok(edge.elements.1)
        } else if edge.elements.1 == Some(tau) {
            Ok(Some(edge.elements.0))
        } else {
            Err(MwgError::NotIncident { element: tau, edge: e })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_resolution_zero() {
        assert!(matches!(Mesh::uniform_square(0), Err(MwgError::EmptyMesh)));
    }

    #[test]
    fn counts_match_closed_forms() {
        for n in [1usize, 2, 4, 7, 16] {
            let mesh = Mesh::uniform_square(n).unwrap();
            assert_eq!(mesh.vertices.len(), (n + 1) * (n + 1));
            assert_eq!(mesh.n_elements(), 2 * n * n);
            assert_eq!(mesh.n_edges(), 3 * n * n + 2 * n);
            let boundary = mesh.edges.iter().filter(|e| e.is_boundary()).count();
            assert_eq!(boundary, 4 * n);
            // Euler characteristic of a disk: V - E + T = 1.
            let euler =
                mesh.vertices.len() as i64 - mesh.n_edges() as i64 + mesh.n_elements() as i64;
            assert_eq!(euler, 1);
        }
    }

    #[test]
    fn spec_counts_for_n_four() {
        let mesh = Mesh::uniform_square(4).unwrap();
        assert_eq!(mesh.vertices.len(), 25);
        assert_eq!(mesh.n_elements(), 32);
        assert_eq!(mesh.n_edges(), 56);
        assert_eq!(mesh.edges.iter().filter(|e| e.is_boundary()).count(), 16);
        assert_eq!(mesh.edges.iter().filter(|e| !e.is_boundary()).count(), 40);
    }

    #[test]
    fn triangles_are_counterclockwise_and_tile_the_square() {
        let mesh = Mesh::uniform_square(5).unwrap();
        let mut total = 0.0;
        for tau in 0..mesh.n_elements() {
            let [a, b, c] = mesh.triangles[tau];
            let va = mesh.vertices[a];
            let vb = mesh.vertices[b];
            let vc = mesh.vertices[c];
            let cross = (vb[0] - va[0]) * (vc[1] - va[1]) - (vb[1] - va[1]) * (vc[0] - va[0]);
            assert!(cross > 0.0, "element {tau} is not counterclockwise");
            total += mesh.element_area(tau);
        }
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn mesh_size_is_element_area_sqrt() {
        let mesh = Mesh::uniform_square(8).unwrap();
        for tau in 0..mesh.n_elements() {
            assert!((mesh.element_area(tau).sqrt() - mesh.h).abs() < 1e-15);
        }
        assert!((mesh.h - 1.0 / (8.0 * std::f64::consts::SQRT_2)).abs() < 1e-15);
    }

    #[test]
    fn interior_edges_see_opposite_orientations() {
        let mesh = Mesh::uniform_square(4).unwrap();
        for (e, edge) in mesh.edges.iter().enumerate() {
            if let (t1, Some(t2)) = edge.elements {
                let s1 = sign_of(&mesh, t1, e);
                let s2 = sign_of(&mesh, t2, e);
                assert_eq!(s1 + s2, 0, "edge {e} signs {s1} {s2}");
            }
        }
    }

    fn sign_of(mesh: &Mesh, tau: usize, e: usize) -> i8 {
        mesh.element_edges[tau]
            .iter()
            .find(|(idx, _)| *idx == e)
            .expect("edge belongs to element")
            .1
    }

    #[test]
    fn oriented_edge_vectors_close_around_each_triangle() {
        let mesh = Mesh::uniform_square(3).unwrap();
        for tau in 0..mesh.n_elements() {
            let mut sum = [0.0f64; 2];
            for &(e, sigma) in &mesh.element_edges[tau] {
                let t = mesh.edge_tangent(e);
                let len = mesh.edges[e].length;
                sum[0] += sigma as f64 * t[0] * len;
                sum[1] += sigma as f64 * t[1] * len;
            }
            assert!(sum[0].abs() < 1e-14 && sum[1].abs() < 1e-14);
        }
    }

    #[test]
    fn tangents_point_from_lower_indexed_vertex() {
        let mesh = Mesh::uniform_square(2).unwrap();
        for edge in &mesh.edges {
            let (lo, hi) = edge.vertices;
            assert!(lo < hi);
            let d = [
                mesh.vertices[hi][0] - mesh.vertices[lo][0],
                mesh.vertices[hi][1] - mesh.vertices[lo][1],
            ];
            let dot = d[0] * edge.tangent[0] + d[1] * edge.tangent[1];
            assert!((dot - edge.length).abs() < 1e-14);
        }
    }

    #[test]
    fn neighbor_across_is_an_involution() {
        let mesh = Mesh::uniform_square(4).unwrap();
        for (e, edge) in mesh.edges.iter().enumerate() {
            let t1 = edge.elements.0;
            match mesh.neighbor_across(t1, e).unwrap() {
                Some(t2) => {
                    assert_eq!(mesh.neighbor_across(t2, e).unwrap(), Some(t1));
                }
                None => assert!(edge.is_boundary()),
            }
        }
    }

    #[test]
    fn neighbor_across_rejects_non_incident_pairs() {
        let mesh = Mesh::uniform_square(4).unwrap();
        // Element 0 is in the bottom-left corner; the last edge belongs to the
        // top-right region.
        let e = mesh.n_edges() - 1;
        assert!(matches!(
            mesh.neighbor_across(0, e),
            Err(MwgError::NotIncident { element: 0, .. })
        ));
    }
}
