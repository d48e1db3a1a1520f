//! Pointwise PDE audits on exactly sampled caps.
//!
//! On a stationary cap the test fields satisfy closed-form Helmholtz-type
//! identities; sampling the exact field at mesh vertices and applying the
//! discrete Laplacian (or conormal derivative) measures the consistency of
//! the discrete operators alone. Interior defects are reported in L², the
//! Robin boundary defect `<∇f, μ> - q f` in max norm along the contact
//! line (corners excluded).

#[cfg(not(feature = "std"))]
use num_traits::Float;

use alloc::vec::Vec;

use crate::geometry::{vertex_gradients, CotanLaplacian, VertexGeometry};
use crate::mesh::TriMesh;
use crate::Vec3;

/// Sample a scalar field at every vertex.
pub fn sample_on_mesh(mesh: &TriMesh, f: impl Fn(&Vec3) -> f64) -> Vec<f64> {
    mesh.positions().iter().map(f).collect()
}

/// Area-weighted interior L² norm of `Δf - rhs`:
/// `sqrt(Σ_int A_v (Δf - rhs)² / Σ_int A_v)`.
pub fn laplace_defect_l2(
    mesh: &TriMesh,
    geom: &VertexGeometry,
    f: &[f64],
    rhs: &[f64],
) -> f64 {
    let lap = CotanLaplacian::new(mesh);
    let lf = lap.apply(f);
    let mut acc = 0.0;
    let mut area = 0.0;
    for v in geom.interior_indices() {
        let d = lf[v] - rhs[v];
        acc += geom.areas[v] * d * d;
        area += geom.areas[v];
    }
    (acc / area).sqrt()
}

/// Max-norm Robin defect `|<∇f, μ> - q f|` along the contact line.
pub fn robin_defect_max(mesh: &TriMesh, geom: &VertexGeometry, f: &[f64], q: &[f64]) -> f64 {
    let grads = vertex_gradients(mesh, f);
    let mut worst: f64 = 0.0;
    for v in 0..mesh.vertex_count() {
        let Some(bf) = &geom.boundary[v] else { continue };
        if bf.is_corner {
            continue;
        }
        worst = worst.max((grads[v].dot(&bf.conormal) - q[v] * f[v]).abs());
    }
    worst
}

/// Sup norm over all vertices; used for the "field vanishes identically"
/// audits.
pub fn sup_norm(f: &[f64]) -> f64 {
    f.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}
