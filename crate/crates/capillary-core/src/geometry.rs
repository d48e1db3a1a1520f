//! Discrete differential operators: cotangent Laplacian, per-vertex
//! curvatures, and contact-line frames.
//!
//! Sign conventions. Face normals point out of the drop; the shape operator
//! is taken with respect to the outward normal so that a drop of radius `ρ`
//! has `H = 2/ρ > 0` and `‖h‖² = 2/ρ²`. The integrated mean-curvature
//! vector is `K_i = Σ_j w_ij (x_i - x_j) = A_i H_i ν_i`, which is also the
//! exact gradient of total triangle area with respect to `x_i`.
//!
//! `H` comes from the cotangent formula with mixed Voronoi areas; the full
//! shape operator (`‖h‖²` and the normal curvature `h(μ,μ)` along the
//! contact line) comes from a quadric fit over the 2-ring, re-fit once in
//! the frame of the corrected normal. Boundary fits are one-sided and one
//! order less accurate than interior ones.

#[cfg(not(feature = "std"))]
use num_traits::Float;

use alloc::vec;
use alloc::vec::Vec;

use crate::boundary::loop_neighbors;
use crate::container::Container;
use crate::mesh::TriMesh;
use crate::Vec3;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("boundary vertex {0} has an all-boundary 1-ring (needle)")]
    NeedleVertex(u32),
    #[error("quadric fit at vertex {0} is rank deficient ({1} usable neighbors)")]
    DegenerateFit(u32, usize),
}

/// Edge-based cotangent Laplacian. Weights are `(cot α + cot β)/2` over the
/// one or two faces adjacent to each undirected edge; no boundary
/// modification (pure Neumann).
pub struct CotanLaplacian {
    /// `(i, j, w_ij)` with `i < j`, each undirected edge once.
    pub edges: Vec<(u32, u32, f64)>,
    /// Mixed Voronoi vertex areas.
    pub areas: Vec<f64>,
}

impl CotanLaplacian {
    pub fn new(mesh: &TriMesh) -> Self {
        let mut acc: alloc::collections::BTreeMap<(u32, u32), f64> =
            alloc::collections::BTreeMap::new();
        let verts = mesh.positions();
        for f in mesh.faces() {
            let p = [
                verts[f[0] as usize],
                verts[f[1] as usize],
                verts[f[2] as usize],
            ];
            for k in 0..3 {
                // cotangent at corner k weights the opposite edge (k+1, k+2)
                let u = p[(k + 1) % 3] - p[k];
                let v = p[(k + 2) % 3] - p[k];
                let cot = u.dot(&v) / u.cross(&v).norm().max(1e-300);
                let (a, b) = (f[(k + 1) % 3], f[(k + 2) % 3]);
                let key = (a.min(b), a.max(b));
                *acc.entry(key).or_insert(0.0) += 0.5 * cot;
            }
        }
        let edges = acc.into_iter().map(|((i, j), w)| (i, j, w)).collect();
        Self { edges, areas: mesh.mixed_vertex_areas() }
    }

    /// Integrated Laplacian `(Kf)_i = Σ_j w_ij (f_i - f_j)`; equals
    /// `-A_i (Δf)_i` on the underlying surface.
    pub fn apply_integrated(&self, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; f.len()];
        for &(i, j, w) in &self.edges {
            let (i, j) = (i as usize, j as usize);
            let d = w * (f[i] - f[j]);
            out[i] += d;
            out[j] -= d;
        }
        out
    }

    /// Pointwise Laplace-Beltrami estimate `(Δf)_i`, the integrated form
    /// divided by the mixed vertex area and negated.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let mut out = self.apply_integrated(f);
        for (o, a) in out.iter_mut().zip(&self.areas) {
            *o = -*o / a;
        }
        out
    }

    /// Integrated mean-curvature vectors `K_i = Σ_j w_ij (x_i - x_j)`.
    pub fn mean_curvature_vectors(&self, mesh: &TriMesh) -> Vec<Vec3> {
        let verts = mesh.positions();
        let mut out = vec![Vec3::zeros(); verts.len()];
        for &(i, j, w) in &self.edges {
            let (i, j) = (i as usize, j as usize);
            let d = (verts[i] - verts[j]) * w;
            out[i] += d;
            out[j] -= d;
        }
        out
    }

    /// Dirichlet form `fᵀ K f = Σ_edges w_ij (f_i - f_j)²`.
    pub fn dirichlet_energy(&self, f: &[f64]) -> f64 {
        self.edges
            .iter()
            .map(|&(i, j, w)| {
                let d = f[i as usize] - f[j as usize];
                w * d * d
            })
            .sum()
    }
}

/// Per-face gradient of a piecewise-linear scalar field.
pub fn face_gradients(mesh: &TriMesh, f: &[f64]) -> Vec<Vec3> {
    let verts = mesh.positions();
    mesh.faces()
        .iter()
        .map(|fc| {
            let p = [
                verts[fc[0] as usize],
                verts[fc[1] as usize],
                verts[fc[2] as usize],
            ];
            let n2 = (p[1] - p[0]).cross(&(p[2] - p[0]));
            let inv_4a2 = 1.0 / n2.norm_squared();
            // ∇λ_k = n × e_k / (2A), e_k the edge opposite vertex k
            let mut g = Vec3::zeros();
            for k in 0..3 {
                let e = p[(k + 2) % 3] - p[(k + 1) % 3];
                g += n2.cross(&e) * (f[fc[k] as usize] * inv_4a2);
            }
            g
        })
        .collect()
}

/// Area-weighted vertex gradient of a piecewise-linear scalar field.
pub fn vertex_gradients(mesh: &TriMesh, f: &[f64]) -> Vec<Vec3> {
    let fg = face_gradients(mesh, f);
    let mut out = vec![Vec3::zeros(); mesh.vertex_count()];
    let mut wsum = vec![0.0; mesh.vertex_count()];
    for (fi, fc) in mesh.faces().iter().enumerate() {
        let a = mesh.face_area(fi);
        for &v in fc {
            out[v as usize] += fg[fi] * a;
            wsum[v as usize] += a;
        }
    }
    for (g, w) in out.iter_mut().zip(&wsum) {
        *g /= w.max(1e-300);
    }
    out
}

/// Contact-line frame at a boundary vertex.
#[derive(Debug, Clone)]
pub struct BoundaryFrame {
    /// Loop tangent (face-induced direction).
    pub tangent: Vec3,
    /// Outward conormal of the free surface, `μ = T × ν`.
    pub conormal: Vec3,
    /// Outward conormal of the wetted region in the wall, `ν̄ = N̄ × T`.
    pub wall_conormal: Vec3,
    /// Measured contact angle `arccos(-<ν, N̄>)`.
    pub contact_angle: f64,
    /// Normal curvature of the surface along `μ`.
    pub h_mu_mu: f64,
    /// Facet the frame is measured against (corner vertices pick the first).
    pub facet: u32,
    /// True at wedge-edge corners sitting on two facets.
    pub is_corner: bool,
}

/// Per-vertex discrete geometry of the free surface.
pub struct VertexGeometry {
    /// Mixed Voronoi areas.
    pub areas: Vec<f64>,
    /// Outward unit normals (quadric-fit corrected).
    pub normals: Vec<Vec3>,
    /// Signed mean curvature (cotangent estimate). Exact as the density of
    /// the discrete area gradient and convergent in area-weighted norms,
    /// but not pointwise at irregular vertices.
    pub mean_curvature: Vec<f64>,
    /// Mean curvature from the quadric fit (trace of the fitted shape
    /// operator); pointwise consistent everywhere.
    pub mean_curvature_fit: Vec<f64>,
    /// Squared norm of the second fundamental form (quadric fit).
    pub norm_h_sq: Vec<f64>,
    /// Contact-line frames, `None` at interior vertices.
    pub boundary: Vec<Option<BoundaryFrame>>,
}

impl VertexGeometry {
    pub fn interior_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.boundary
            .iter()
            .enumerate()
            .filter(|(_, b)| b.is_none())
            .map(|(i, _)| i)
    }
}

/// Compute per-vertex geometry. Errors on needle vertices (boundary
/// vertices whose whole 1-ring is boundary) and rank-deficient fits.
pub fn vertex_geometry(
    mesh: &TriMesh,
    container: &Container,
) -> Result<VertexGeometry, GeometryError> {
    let n = mesh.vertex_count();
    let verts = mesh.positions();
    let lap = CotanLaplacian::new(mesh);

    // 1-ring adjacency and averaged normals as the initial fit frame.
    let mut ring: Vec<Vec<u32>> = vec![Vec::new(); n];
    for f in mesh.faces() {
        for k in 0..3 {
            let a = f[k];
            let b = f[(k + 1) % 3];
            if !ring[a as usize].contains(&b) {
                ring[a as usize].push(b);
            }
            if !ring[b as usize].contains(&a) {
                ring[b as usize].push(a);
            }
        }
    }
    for v in 0..n {
        if mesh.is_boundary_vertex(v)
            && ring[v].iter().all(|&w| mesh.is_boundary_vertex(w as usize))
        {
            return Err(GeometryError::NeedleVertex(v as u32));
        }
    }

    let mut avg_normals = vec![Vec3::zeros(); n];
    for fi in 0..mesh.face_count() {
        let av = mesh.face_area_vector(fi);
        for &v in &mesh.faces()[fi] {
            avg_normals[v as usize] += av;
        }
    }
    for nrm in &mut avg_normals {
        *nrm = nrm.normalize();
    }

    // Quadric fits over the 2-ring, one refit pass in the corrected frame.
    let mut normals = vec![Vec3::zeros(); n];
    let mut norm_h_sq = vec![0.0; n];
    let mut mean_curvature_fit = vec![0.0; n];
    let mut shape_frames: Vec<(Vec3, Vec3, [f64; 3])> = Vec::with_capacity(n);
    for v in 0..n {
        let mut nbrs: Vec<u32> = Vec::new();
        for &w in &ring[v] {
            if !nbrs.contains(&w) {
                nbrs.push(w);
            }
            for &w2 in &ring[w as usize] {
                if w2 as usize != v && !nbrs.contains(&w2) {
                    nbrs.push(w2);
                }
            }
        }
        if nbrs.len() < 5 {
            return Err(GeometryError::DegenerateFit(v as u32, nbrs.len()));
        }
        let mut frame_normal = avg_normals[v];
        let mut fit = None;
        for _pass in 0..2 {
            let f = quadric_fit(verts[v], &nbrs, verts, &frame_normal)
                .ok_or(GeometryError::DegenerateFit(v as u32, nbrs.len()))?;
            frame_normal = f.normal;
            fit = Some(f);
        }
        let fit = fit.unwrap();
        normals[v] = fit.normal;
        norm_h_sq[v] =
            fit.hess[0] * fit.hess[0] + 2.0 * fit.hess[1] * fit.hess[1] + fit.hess[2] * fit.hess[2];
        mean_curvature_fit[v] = fit.hess[0] + fit.hess[2];
        shape_frames.push((fit.e1, fit.e2, fit.hess));
    }

    // Cotangent mean curvature, signed against the fitted normal.
    let kvec = lap.mean_curvature_vectors(mesh);
    let mean_curvature: Vec<f64> =
        (0..n).map(|v| kvec[v].dot(&normals[v]) / lap.areas[v]).collect();

    // Contact-line frames.
    let nb = loop_neighbors(mesh);
    let mut boundary = vec![None; n];
    for v in 0..n {
        let Some((prev, next)) = nb[v] else { continue };
        let nu = normals[v];
        let t_raw = verts[next as usize] - verts[prev as usize];
        let tangent = (t_raw - nu * t_raw.dot(&nu)).normalize();
        let conormal = tangent.cross(&nu).normalize();
        let facets = mesh.vertex_facets(v);
        let facet = facets[0];
        let wall_n = container.wall_normal(facet as usize, &verts[v]);
        let wall_conormal = wall_n.cross(&tangent).normalize();
        let contact_angle = (-nu.dot(&wall_n)).clamp(-1.0, 1.0).acos();
        let (e1, e2, hess) = &shape_frames[v];
        let mu2 = [conormal.dot(e1), conormal.dot(e2)];
        let norm2 = (mu2[0] * mu2[0] + mu2[1] * mu2[1]).max(1e-300);
        let h_mu_mu = (hess[0] * mu2[0] * mu2[0]
            + 2.0 * hess[1] * mu2[0] * mu2[1]
            + hess[2] * mu2[1] * mu2[1])
            / norm2;
        boundary[v] = Some(BoundaryFrame {
            tangent,
            conormal,
            wall_conormal,
            contact_angle,
            h_mu_mu,
            facet,
            is_corner: facets.len() > 1,
        });
    }

    Ok(VertexGeometry {
        areas: lap.areas,
        normals,
        mean_curvature,
        mean_curvature_fit,
        norm_h_sq,
        boundary,
    })
}

struct QuadricFit {
    normal: Vec3,
    e1: Vec3,
    e2: Vec3,
    /// Second fundamental form `[h11, h12, h22]` in the (e1, e2) frame,
    /// outward-normal convention (positive on a drop sphere).
    hess: [f64; 3],
}

/// Fit `w ≈ a u + b v + (c u² + 2 d u v + e v²)/2` over the neighbors in
/// the tangent frame of `frame_normal`; returns the tilt-corrected normal
/// and the curvature tensor `h = -Hess` (outward convention).
fn quadric_fit(
    origin: Vec3,
    nbrs: &[u32],
    verts: &[Vec3],
    frame_normal: &Vec3,
) -> Option<QuadricFit> {
    let nu = *frame_normal;
    let helper =
        if nu.x.abs() < 0.9 { Vec3::new(1.0, 0.0, 0.0) } else { Vec3::new(0.0, 1.0, 0.0) };
    let e1 = (helper - nu * helper.dot(&nu)).normalize();
    let e2 = nu.cross(&e1);

    // scale for conditioning
    let mut scale = 0.0;
    for &j in nbrs {
        scale += (verts[j as usize] - origin).norm();
    }
    scale /= nbrs.len() as f64;
    if scale <= 0.0 {
        return None;
    }

    let mut ata = [[0.0f64; 5]; 5];
    let mut atb = [0.0f64; 5];
    for &j in nbrs {
        let d = (verts[j as usize] - origin) / scale;
        let (u, v, w) = (d.dot(&e1), d.dot(&e2), d.dot(&nu));
        let row = [u, v, 0.5 * u * u, u * v, 0.5 * v * v];
        for r in 0..5 {
            for c in 0..5 {
                ata[r][c] += row[r] * row[c];
            }
            atb[r] += row[r] * w;
        }
    }
    // tiny ridge keeps one-sided boundary fits solvable
    for r in 0..5 {
        ata[r][r] += 1e-12;
    }
    let g: Vec<Vec<f64>> = ata.iter().map(|r| r.to_vec()).collect();
    let sol = crate::container::solve_spd_small(&g, &atb);
    if !sol.iter().all(|x| x.is_finite()) {
        return None;
    }
    let (a, b) = (sol[0], sol[1]);
    // graph normal (-a, -b, 1)/|·| in the local frame
    let normal = (nu - e1 * a - e2 * b).normalize();
    let hess = [-sol[2] / scale, -sol[3] / scale, -sol[4] / scale];
    Some(QuadricFit { normal, e1, e2, hess })
}
