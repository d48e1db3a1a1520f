//! Seeded smooth perturbations of drop meshes.
//!
//! Perturbations displace vertices along their estimated normals by a
//! smooth random field (a small sum of sinusoidal modes), scaled so the
//! largest displacement equals `amplitude × scale`. Boundary vertices are
//! displaced only within their wall facets, so the perturbed mesh still
//! satisfies every constraint exactly. Identical seeds give identical
//! meshes.

#[cfg(not(feature = "std"))]
use num_traits::Float;

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::container::{Container, ContainerKind};
use crate::mesh::TriMesh;
use crate::Vec3;

/// Smoothly perturb a mesh. `scale` is the geometric scale of the drop
/// (its radius for caps); `amplitude` is relative to it.
pub fn perturb_mesh(
    mesh: &TriMesh,
    container: &Container,
    amplitude: f64,
    scale: f64,
    seed: u64,
) -> TriMesh {
    assert!((0.0..=0.2).contains(&amplitude), "amplitude must lie in [0, 0.2]");
    if amplitude == 0.0 {
        return mesh.clone();
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    // a handful of smooth plane-wave modes
    let modes: Vec<(Vec3, f64, f64)> = (0..6)
        .map(|_| {
            let dir = Vec3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            )
            .normalize();
            let freq = rng.gen_range(0.5..2.5) / scale;
            let phase = rng.gen_range(0.0..core::f64::consts::TAU);
            (dir * freq, rng.gen_range(-1.0..1.0), phase)
        })
        .collect();
    let field = |x: &Vec3| -> f64 {
        modes.iter().map(|(w, a, p)| a * (w.dot(x) + p).sin()).sum()
    };

    // vertex normals from incident faces
    let mut normals = vec![Vec3::zeros(); mesh.vertex_count()];
    for f in 0..mesh.face_count() {
        let av = mesh.face_area_vector(f);
        for &v in &mesh.faces()[f] {
            normals[v as usize] += av;
        }
    }

    let verts = mesh.positions();
    let mut disp: Vec<Vec3> = (0..mesh.vertex_count())
        .map(|v| {
            let n = normals[v].normalize();
            let d = n * field(&verts[v]);
            let facets = mesh.vertex_facets(v);
            if facets.is_empty() {
                d
            } else {
                container.tangent_project(facets, &verts[v], &d)
            }
        })
        .collect();
    let sup = disp.iter().map(|d| d.norm()).fold(0.0f64, f64::max);
    if sup > 0.0 {
        let gain = amplitude * scale / sup;
        for d in &mut disp {
            *d *= gain;
        }
    }

    let mut out = mesh.clone();
    let mut positions: Vec<Vec3> = verts.to_vec();
    for v in 0..positions.len() {
        positions[v] += disp[v];
        // boundary vertices snap back onto their facets (exact for planes,
        // radial for the ball)
        for &f in mesh.vertex_facets(v) {
            positions[v] = container.project_to_facet(f as usize, &positions[v]);
        }
        if container.kind() == ContainerKind::Ball && !mesh.vertex_facets(v).is_empty() {
            positions[v] = positions[v].normalize();
        }
    }
    out.set_positions(positions);
    out
}
