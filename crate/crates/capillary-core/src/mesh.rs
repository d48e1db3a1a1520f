//! Triangulated drop surfaces with container-pinned boundary loops.
//!
//! A [`TriMesh`] is the discrete free surface `M`: consistently oriented
//! triangles whose normals point out of the enclosed drop, plus boundary
//! loops lying on container facets. Boundary loops are stored in the
//! direction induced by the face orientation, so that walking a loop keeps
//! the surface on the left when seen from outside; each loop edge carries
//! the index of the container facet it lies on (loops of a wedge drop may
//! visit several facets, meeting the wedge edge at corner vertices).

#[cfg(not(feature = "std"))]
use num_traits::Float;

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::boundary;
use crate::container::Container;
use crate::Vec3;

/// Facet-equation tolerance for boundary vertices.
pub const BOUNDARY_TOL: f64 = 1e-12;
/// Faces below this area are rejected as degenerate.
pub const MIN_FACE_AREA: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeshError {
    #[error("vertex index {0} out of range")]
    IndexOutOfRange(u32),
    #[error("face {0} is degenerate (area {1:.3e})")]
    DegenerateFace(usize, f64),
    #[error("edge ({0},{1}) is shared by more than two faces")]
    NonManifoldEdge(u32, u32),
    #[error("edge ({0},{1}) appears twice with the same direction; orientation is inconsistent")]
    InconsistentOrientation(u32, u32),
    #[error("boundary edge ({0},{1}) is not covered by any boundary loop")]
    UntaggedBoundaryEdge(u32, u32),
    #[error("loop edge ({0},{1}) does not match a boundary edge in face direction")]
    LoopEdgeMismatch(u32, u32),
    #[error("vertex {0} has no incident face")]
    IsolatedVertex(u32),
    #[error("boundary vertex {vertex} is off facet {facet} by {dist:.3e}")]
    VertexOffFacet { vertex: u32, facet: u32, dist: f64 },
    #[error("boundary loop on facet {0} winds inconsistently")]
    InconsistentWinding(u32),
    #[error("facet index {0} out of range for the container")]
    FacetOutOfRange(u32),
    #[error("a boundary loop needs at least 3 vertices (got {0})")]
    LoopTooShort(usize),
}

/// An ordered boundary cycle. `edge_facets[i]` tags the edge from
/// `vertices[i]` to `vertices[(i + 1) % len]` with a container facet.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryLoop {
    pub vertices: Vec<u32>,
    pub edge_facets: Vec<u32>,
}

impl BoundaryLoop {
    /// Loop lying entirely on one facet.
    pub fn on_facet(vertices: Vec<u32>, facet: u32) -> Self {
        let n = vertices.len();
        Self { vertices, edge_facets: vec![facet; n] }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// Triangulated surface with boundary loops pinned to container facets.
#[derive(Debug, Clone)]
pub struct TriMesh {
    vertices: Vec<Vec3>,
    faces: Vec<[u32; 3]>,
    loops: Vec<BoundaryLoop>,
    // derived at construction
    vertex_faces: Vec<Vec<u32>>,
    vertex_facets: Vec<Vec<u32>>,
    boundary_flag: Vec<bool>,
}

impl TriMesh {
    /// Build and validate a mesh. Checks manifoldness, global orientation,
    /// agreement between boundary edges and loops, and face quality.
    pub fn new(
        vertices: Vec<Vec3>,
        faces: Vec<[u32; 3]>,
        loops: Vec<BoundaryLoop>,
    ) -> Result<Self, MeshError> {
        let nv = vertices.len() as u32;
        for f in &faces {
            for &v in f {
                if v >= nv {
                    return Err(MeshError::IndexOutOfRange(v));
                }
            }
        }
        for (fi, f) in faces.iter().enumerate() {
            let area = face_area_vector(&vertices, f).norm();
            if area <= MIN_FACE_AREA {
                return Err(MeshError::DegenerateFace(fi, area));
            }
        }

        // Directed-edge census: every undirected edge must appear once in
        // each direction (interior) or once total (boundary).
        let mut directed: BTreeMap<(u32, u32), u32> = BTreeMap::new();
        for f in &faces {
            for k in 0..3 {
                let a = f[k];
                let b = f[(k + 1) % 3];
                *directed.entry((a, b)).or_insert(0) += 1;
            }
        }
        let mut boundary_edges: BTreeMap<(u32, u32), bool> = BTreeMap::new();
        for (&(a, b), &cnt) in &directed {
            if cnt > 1 {
                return Err(MeshError::InconsistentOrientation(a, b));
            }
            let rev = directed.get(&(b, a)).copied().unwrap_or(0);
            if rev > 1 {
                return Err(MeshError::InconsistentOrientation(b, a));
            }
            if rev == 0 {
                boundary_edges.insert((a, b), false);
            }
        }

        for lp in &loops {
            if lp.len() < 3 {
                return Err(MeshError::LoopTooShort(lp.len()));
            }
            debug_assert_eq!(lp.vertices.len(), lp.edge_facets.len());
            for i in 0..lp.len() {
                let a = lp.vertices[i];
                let b = lp.vertices[(i + 1) % lp.len()];
                match boundary_edges.get_mut(&(a, b)) {
                    Some(seen) => *seen = true,
                    None => return Err(MeshError::LoopEdgeMismatch(a, b)),
                }
            }
        }
        if let Some((&(a, b), _)) = boundary_edges.iter().find(|(_, &seen)| !seen) {
            return Err(MeshError::UntaggedBoundaryEdge(a, b));
        }

        let mut vertex_faces = vec![Vec::new(); vertices.len()];
        for (fi, f) in faces.iter().enumerate() {
            for &v in f {
                vertex_faces[v as usize].push(fi as u32);
            }
        }
        if let Some(v) = vertex_faces.iter().position(|fs| fs.is_empty()) {
            return Err(MeshError::IsolatedVertex(v as u32));
        }

        let mut vertex_facets = vec![Vec::new(); vertices.len()];
        let mut boundary_flag = vec![false; vertices.len()];
        for lp in &loops {
            for i in 0..lp.len() {
                let a = lp.vertices[i] as usize;
                let b = lp.vertices[(i + 1) % lp.len()] as usize;
                let fct = lp.edge_facets[i];
                boundary_flag[a] = true;
                boundary_flag[b] = true;
                for v in [a, b] {
                    if !vertex_facets[v].contains(&fct) {
                        vertex_facets[v].push(fct);
                    }
                }
            }
        }
        for fs in &mut vertex_facets {
            fs.sort_unstable();
        }

        Ok(Self { vertices, faces, loops, vertex_faces, vertex_facets, boundary_flag })
    }

    /// Check that boundary vertices satisfy their facet equations and that
    /// facet indices are valid for `container`.
    pub fn validate_against(&self, container: &Container) -> Result<(), MeshError> {
        let nfac = container.facet_count() as u32;
        for (v, facets) in self.vertex_facets.iter().enumerate() {
            for &f in facets {
                if f >= nfac {
                    return Err(MeshError::FacetOutOfRange(f));
                }
                let d = container.signed_offset(f as usize, &self.vertices[v]).abs();
                if d > BOUNDARY_TOL {
                    return Err(MeshError::VertexOffFacet { vertex: v as u32, facet: f, dist: d });
                }
            }
        }
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.vertices
    }

    /// Replace vertex positions, keeping the topology. The caller is
    /// responsible for keeping boundary vertices on their facets.
    pub fn set_positions(&mut self, positions: Vec<Vec3>) {
        assert_eq!(positions.len(), self.vertices.len());
        self.vertices = positions;
    }

    pub fn faces(&self) -> &[[u32; 3]] {
        &self.faces
    }

    pub fn boundary_loops(&self) -> &[BoundaryLoop] {
        &self.loops
    }

    pub fn is_closed(&self) -> bool {
        self.loops.is_empty()
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary_flag[v]
    }

    /// Container facets constraining a vertex (empty for interior vertices).
    pub fn vertex_facets(&self, v: usize) -> &[u32] {
        &self.vertex_facets[v]
    }

    pub fn vertex_face_indices(&self, v: usize) -> &[u32] {
        &self.vertex_faces[v]
    }

    pub fn face_area_vector(&self, f: usize) -> Vec3 {
        face_area_vector(&self.vertices, &self.faces[f])
    }

    pub fn face_area(&self, f: usize) -> f64 {
        self.face_area_vector(f).norm()
    }

    pub fn face_normal(&self, f: usize) -> Vec3 {
        self.face_area_vector(f).normalize()
    }

    pub fn face_centroid(&self, f: usize) -> Vec3 {
        let [a, b, c] = self.faces[f];
        (self.vertices[a as usize] + self.vertices[b as usize] + self.vertices[c as usize]) / 3.0
    }

    pub fn total_area(&self) -> f64 {
        (0..self.faces.len()).map(|f| self.face_area(f)).sum()
    }

    pub fn max_edge_length(&self) -> f64 {
        let mut m: f64 = 0.0;
        for f in &self.faces {
            for k in 0..3 {
                let a = self.vertices[f[k] as usize];
                let b = self.vertices[f[(k + 1) % 3] as usize];
                m = m.max((a - b).norm());
            }
        }
        m
    }

    /// Smallest interior angle over all faces, in radians.
    pub fn min_triangle_angle(&self) -> f64 {
        let mut m = f64::INFINITY;
        for f in &self.faces {
            let p = [
                self.vertices[f[0] as usize],
                self.vertices[f[1] as usize],
                self.vertices[f[2] as usize],
            ];
            for k in 0..3 {
                let u = p[(k + 1) % 3] - p[k];
                let v = p[(k + 2) % 3] - p[k];
                let ang = u.cross(&v).norm().atan2(u.dot(&v));
                m = m.min(ang);
            }
        }
        m
    }

    /// Mixed Voronoi vertex areas (obtuse-safe).
    pub fn mixed_vertex_areas(&self) -> Vec<f64> {
        let mut areas = vec![0.0; self.vertices.len()];
        for f in &self.faces {
            let idx = [f[0] as usize, f[1] as usize, f[2] as usize];
            let p = [self.vertices[idx[0]], self.vertices[idx[1]], self.vertices[idx[2]]];
            let area = 0.5 * (p[1] - p[0]).cross(&(p[2] - p[0])).norm();
            // cotangents of the three corner angles
            let mut cot = [0.0; 3];
            let mut obtuse = None;
            for k in 0..3 {
                let u = p[(k + 1) % 3] - p[k];
                let v = p[(k + 2) % 3] - p[k];
                let cr = u.cross(&v).norm();
                cot[k] = u.dot(&v) / cr.max(1e-300);
                if u.dot(&v) < 0.0 {
                    obtuse = Some(k);
                }
            }
            match obtuse {
                Some(k) => {
                    for j in 0..3 {
                        areas[idx[j]] += if j == k { 0.5 * area } else { 0.25 * area };
                    }
                }
                None => {
                    // Voronoi: each corner gets (|e_right|²cot(angle across e_right)
                    //          + |e_left|²cot(angle across e_left)) / 8
                    for k in 0..3 {
                        let e1 = p[(k + 1) % 3] - p[k];
                        let e2 = p[(k + 2) % 3] - p[k];
                        areas[idx[k]] +=
                            (e1.norm_squared() * cot[(k + 2) % 3] + e2.norm_squared() * cot[(k + 1) % 3]) / 8.0;
                    }
                }
            }
        }
        areas
    }

    /// Signed volume enclosed by the drop: divergence-theorem flux of `x/3`
    /// through the faces, plus the wetted contribution of the container
    /// (zero for planar facets through the origin; a third of the wetted
    /// spherical area for the unit ball).
    pub fn enclosed_volume(&self, container: &Container) -> Result<f64, MeshError> {
        let mut v = self.face_flux_volume();
        if matches!(container.kind(), crate::container::ContainerKind::Ball) {
            for lp in &self.loops {
                v += boundary::spherical_loop_area(&self.vertices, &lp.vertices)? / 3.0;
            }
        }
        Ok(v)
    }

    /// The face part of the enclosed volume, `Σ det(x₀,x₁,x₂)/6`.
    pub fn face_flux_volume(&self) -> f64 {
        self.faces
            .iter()
            .map(|f| {
                let a = self.vertices[f[0] as usize];
                let b = self.vertices[f[1] as usize];
                let c = self.vertices[f[2] as usize];
                a.dot(&b.cross(&c)) / 6.0
            })
            .sum()
    }

    /// Free-surface area and per-facet wetted areas computed from the
    /// boundary loops alone.
    pub fn surface_and_wetted_area(
        &self,
        container: &Container,
    ) -> Result<(f64, Vec<f64>), MeshError> {
        let wetted = boundary::wetted_areas(self, container)?;
        Ok((self.total_area(), wetted))
    }

    /// Sum of oriented area vectors; the zero vector for closed meshes.
    pub fn orientation_defect(&self) -> Vec3 {
        let mut s = Vec3::zeros();
        for f in 0..self.faces.len() {
            s += self.face_area_vector(f);
        }
        s
    }

    /// Rigid translation of every vertex.
    pub fn translated(&self, t: Vec3) -> TriMesh {
        let mut m = self.clone();
        for p in &mut m.vertices {
            *p += t;
        }
        m
    }

    /// Disjoint union of two meshes (indices of `other` are shifted).
    pub fn disjoint_union(&self, other: &TriMesh) -> TriMesh {
        let off = self.vertices.len() as u32;
        let mut vertices = self.vertices.clone();
        vertices.extend_from_slice(&other.vertices);
        let mut faces = self.faces.clone();
        faces.extend(other.faces.iter().map(|f| [f[0] + off, f[1] + off, f[2] + off]));
        let mut loops = self.loops.clone();
        loops.extend(other.loops.iter().map(|lp| BoundaryLoop {
            vertices: lp.vertices.iter().map(|v| v + off).collect(),
            edge_facets: lp.edge_facets.clone(),
        }));
        TriMesh::new(vertices, faces, loops).expect("disjoint union of valid meshes is valid")
    }

    /// Number of connected components (over the face graph).
    pub fn component_count(&self) -> usize {
        let n = self.vertices.len();
        let mut comp = vec![usize::MAX; n];
        let mut count = 0;
        let mut stack = Vec::new();
        for seed in 0..n {
            if comp[seed] != usize::MAX {
                continue;
            }
            comp[seed] = count;
            stack.push(seed);
            while let Some(v) = stack.pop() {
                for &fi in &self.vertex_faces[v] {
                    for &w in &self.faces[fi as usize] {
                        let w = w as usize;
                        if comp[w] == usize::MAX {
                            comp[w] = count;
                            stack.push(w);
                        }
                    }
                }
            }
            count += 1;
        }
        count
    }
}

pub(crate) fn face_area_vector(vertices: &[Vec3], f: &[u32; 3]) -> Vec3 {
    let a = vertices[f[0] as usize];
    let b = vertices[f[1] as usize];
    let c = vertices[f[2] as usize];
    0.5 * (b - a).cross(&(c - a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capmesh;
    use approx::assert_relative_eq;
    use core::f64::consts::PI;

    fn tetrahedron() -> TriMesh {
        // regular-ish tetrahedron, outward oriented
        let v = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
        ];
        let f = vec![[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]];
        TriMesh::new(v, f, Vec::new()).unwrap()
    }

    #[test]
    fn tetrahedron_volume_and_closure() {
        let m = tetrahedron();
        assert!(m.is_closed());
        let c = Container::floor(0.0).unwrap();
        // below the floor plane convention does not matter for a closed mesh
        assert_relative_eq!(m.enclosed_volume(&c).unwrap(), 1.0 / 6.0, epsilon = 1e-15);
        assert!(m.orientation_defect().norm() < 1e-15);
    }

    #[test]
    fn flipped_face_is_rejected() {
        let v = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
        ];
        let f = vec![[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 3, 2]]; // last flipped
        assert!(matches!(
            TriMesh::new(v, f, Vec::new()),
            Err(MeshError::InconsistentOrientation(_, _))
        ));
    }

    #[test]
    fn degenerate_face_is_rejected() {
        let v = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(2.0, 0.0, 0.0), // collinear
        ];
        let f = vec![[0, 1, 2]];
        assert!(matches!(
            TriMesh::new(v, f, Vec::new()),
            Err(MeshError::DegenerateFace(_, _))
        ));
    }

    #[test]
    fn boundary_edges_must_be_tagged() {
        // one triangle, no loop
        let v = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
        ];
        let f = vec![[0, 1, 2]];
        assert!(matches!(
            TriMesh::new(v.clone(), f.clone(), Vec::new()),
            Err(MeshError::UntaggedBoundaryEdge(_, _))
        ));
        let lp = BoundaryLoop::on_facet(vec![0, 1, 2], 0);
        assert!(TriMesh::new(v, f, vec![lp]).is_ok());
    }

    #[test]
    fn loop_direction_must_match_faces() {
        let v = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
        ];
        let f = vec![[0, 1, 2]];
        let lp = BoundaryLoop::on_facet(vec![2, 1, 0], 0); // reversed
        assert!(matches!(
            TriMesh::new(v, f, vec![lp]),
            Err(MeshError::LoopEdgeMismatch(_, _))
        ));
    }

    #[test]
    fn mixed_areas_sum_to_total_area() {
        let m = capmesh::icosphere(Vec3::new(0.2, -0.1, 0.4), 0.8, 3);
        let areas = m.mixed_vertex_areas();
        let total: f64 = areas.iter().sum();
        assert_relative_eq!(total, m.total_area(), epsilon = 1e-12, max_relative = 1e-12);
        assert!(areas.iter().all(|&a| a > 0.0));
    }

    #[test]
    fn icosphere_volume_converges_to_ball() {
        let c = Container::floor(0.0).unwrap();
        let exact = 4.0 * PI / 3.0;
        let mut errs = Vec::new();
        for sub in [2, 3, 4] {
            let m = capmesh::icosphere(Vec3::zeros(), 1.0, sub);
            let v = m.enclosed_volume(&c).unwrap();
            errs.push((exact - v).abs());
        }
        assert!(errs[0] > errs[1] && errs[1] > errs[2]);
        // second-order convergence of the inscribed-polyhedron volume
        assert!(errs[0] / errs[1] > 3.5 && errs[1] / errs[2] > 3.5);
        assert!(errs[2] < 1e-2);
        // inscribed polyhedron underestimates
        let m = capmesh::icosphere(Vec3::zeros(), 1.0, 4);
        assert!(m.enclosed_volume(&c).unwrap() < exact);
    }

    #[test]
    fn closed_volume_is_exact_for_polyhedra() {
        // cube via two triangles per face, volume 8 around origin
        let m = capmesh::icosphere(Vec3::new(3.0, 0.0, 0.0), 1.0, 2);
        let c = Container::floor(0.0).unwrap();
        // translation invariance of the closed-mesh volume
        let v0 = m.enclosed_volume(&c).unwrap();
        let v1 = m.translated(Vec3::new(-5.0, 2.0, 1.0)).enclosed_volume(&c).unwrap();
        assert_relative_eq!(v0, v1, epsilon = 1e-12);
    }

    #[test]
    fn component_count_of_union() {
        let a = tetrahedron();
        let b = tetrahedron().translated(Vec3::new(5.0, 0.0, 0.0));
        let u = a.disjoint_union(&b);
        assert_eq!(u.component_count(), 2);
        assert_eq!(u.face_count(), 8);
        let c = Container::floor(0.0).unwrap();
        assert_relative_eq!(u.enclosed_volume(&c).unwrap(), 1.0 / 3.0, epsilon = 1e-14);
    }
}
