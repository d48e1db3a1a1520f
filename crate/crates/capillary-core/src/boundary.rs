//! Contact-line integrals: wetted areas, their exact vertex gradients, and
//! trapezoid weights for boundary integrals.
//!
//! Wetted regions are never meshed. On planar facets the wetted area is the
//! shoelace area of the (oriented) boundary chains; on the unit sphere it is
//! computed from the turning angles of the geodesic polygon, which stays
//! well-conditioned even for near-hemispherical regions where fan-based
//! solid-angle formulas sit on a branch cut.
//!
//! Orientation: boundary loops run in the face-induced direction, which
//! leaves the wetted region on the *right* of the traversal. Hence
//! `area(B⁺) = 2π + Σ τ_k` on the sphere and the planar shoelace carries a
//! minus sign.

#[cfg(not(feature = "std"))]
use num_traits::Float;

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::container::{Container, ContainerKind};
use crate::mesh::{MeshError, TriMesh};
use crate::Vec3;

/// Maximal runs of consecutive loop edges sharing a facet tag. Returns
/// `(facet, vertex chain)` per run; a chain equal to the whole loop is
/// cyclic (no closing chord needed), otherwise the chord from the last back
/// to the first chain vertex closes the wetted polygon along the wedge edge.
pub fn facet_runs(lp: &crate::mesh::BoundaryLoop) -> Vec<(u32, Vec<u32>, bool)> {
    let n = lp.len();
    let uniform = lp.edge_facets.iter().all(|&f| f == lp.edge_facets[0]);
    if uniform {
        return vec![(lp.edge_facets[0], lp.vertices.clone(), true)];
    }
    // start at an edge whose tag differs from its predecessor
    let mut start = 0;
    for e in 0..n {
        if lp.edge_facets[(e + n - 1) % n] != lp.edge_facets[e] {
            start = e;
            break;
        }
    }
    let mut runs: Vec<(u32, Vec<u32>, bool)> = Vec::new();
    let mut e = start;
    loop {
        let tag = lp.edge_facets[e];
        let mut chain = vec![lp.vertices[e]];
        let mut k = e;
        while lp.edge_facets[k] == tag {
            chain.push(lp.vertices[(k + 1) % n]);
            k = (k + 1) % n;
            if k == start {
                break;
            }
        }
        runs.push((tag, chain, false));
        e = k;
        if e == start {
            break;
        }
    }
    runs
}

/// Planar shoelace area of a chain on the facet with outward normal `nrm`.
/// `cyclic` chains wrap around; open chains are closed by the chord from the
/// last to the first vertex.
fn planar_chain_area(verts: &[Vec3], chain: &[u32], cyclic: bool, nrm: &Vec3) -> f64 {
    let m = chain.len();
    let mut s = Vec3::zeros();
    let last = if cyclic { m } else { m - 1 };
    for i in 0..last {
        let a = verts[chain[i] as usize];
        let b = verts[chain[(i + 1) % m] as usize];
        s += a.cross(&b);
    }
    if !cyclic {
        let a = verts[chain[m - 1] as usize];
        let b = verts[chain[0] as usize];
        s += a.cross(&b);
    }
    -0.5 * nrm.dot(&s)
}

fn planar_chain_area_grad(
    verts: &[Vec3],
    chain: &[u32],
    cyclic: bool,
    nrm: &Vec3,
    weight: f64,
    grad: &mut [Vec3],
) {
    let m = chain.len();
    let add_edge = |ia: u32, ib: u32, grad: &mut [Vec3]| {
        let a = verts[ia as usize];
        let b = verts[ib as usize];
        // d(-1/2 <n, a×b>) = -1/2 (b×n)·da - 1/2 (n×a)·db
        grad[ia as usize] += b.cross(nrm) * (-0.5 * weight);
        grad[ib as usize] += nrm.cross(&a) * (-0.5 * weight);
    };
    let last = if cyclic { m } else { m - 1 };
    for i in 0..last {
        add_edge(chain[i], chain[(i + 1) % m], grad);
    }
    if !cyclic {
        add_edge(chain[m - 1], chain[0], grad);
    }
}

/// Signed turning angle of the geodesic polygon at `b`, with its gradients
/// with respect to the three ambient vertex positions.
fn turning_angle(a: Vec3, b: Vec3, c: Vec3) -> (f64, Vec3, Vec3, Vec3) {
    let (na, nb, nc) = (a.norm(), b.norm(), c.norm());
    let (ua, ub, uc) = (a / na, b / nb, c / nc);

    let w_in = ua - ub * ua.dot(&ub);
    let w_out = uc - ub * uc.dot(&ub);
    let (lin, lout) = (w_in.norm(), w_out.norm());
    let t_in = -w_in / lin;
    let t_out = w_out / lout;

    let y = t_in.cross(&t_out).dot(&ub);
    let x = t_in.dot(&t_out);
    let tau = y.atan2(x);

    // dτ = <dt_in, G_in> + <dt_out, G_out> + x <t_in×t_out, dub>
    // (x² + y² = 1 because t_in, t_out are unit vectors orthogonal to ub).
    let g_in = t_out.cross(&ub) * x - t_out * y;
    let g_out = ub.cross(&t_in) * x - t_in * y;

    let perp = |t: &Vec3, v: Vec3| v - t * t.dot(&v);
    // ∂τ/∂w = ±(I - t tᵀ) G / |w|
    let dw_in = perp(&t_in, g_in) * (-1.0 / lin);
    let dw_out = perp(&t_out, g_out) * (1.0 / lout);

    // ∂τ/∂ua = (I - ub ubᵀ) dw_in ; then through the normalisation of a
    let d_ua = perp(&ub, dw_in);
    let d_uc = perp(&ub, dw_out);
    // b̂-dependence of w_in, w_out plus the explicit ub in y
    let d_ub = -(ua * ub.dot(&dw_in) + dw_in * ua.dot(&ub))
        - (uc * ub.dot(&dw_out) + dw_out * uc.dot(&ub))
        + t_in.cross(&t_out) * x;

    let da = perp(&ua, d_ua) / na;
    let db = perp(&ub, d_ub) / nb;
    let dc = perp(&uc, d_uc) / nc;
    (tau, da, db, dc)
}

/// Area of the wetted spherical region bounded by a loop on the unit
/// sphere: `2π + Σ τ_k` with the wetted patch on the right of the traversal.
pub fn spherical_loop_area(verts: &[Vec3], loop_verts: &[u32]) -> Result<f64, MeshError> {
    let n = loop_verts.len();
    let mut total = 2.0 * PI;
    for k in 0..n {
        let a = verts[loop_verts[(k + n - 1) % n] as usize];
        let b = verts[loop_verts[k] as usize];
        let c = verts[loop_verts[(k + 1) % n] as usize];
        let (tau, _, _, _) = turning_angle(a, b, c);
        total += tau;
    }
    if !(total > 0.0 && total < 4.0 * PI) {
        return Err(MeshError::InconsistentWinding(0));
    }
    Ok(total)
}

/// Accumulate `weight · ∇ area(B⁺)` for a spherical loop into `grad`.
pub fn spherical_loop_area_grad(
    verts: &[Vec3],
    loop_verts: &[u32],
    weight: f64,
    grad: &mut [Vec3],
) {
    let n = loop_verts.len();
    for k in 0..n {
        let ia = loop_verts[(k + n - 1) % n] as usize;
        let ib = loop_verts[k] as usize;
        let ic = loop_verts[(k + 1) % n] as usize;
        let (_, da, db, dc) = turning_angle(verts[ia], verts[ib], verts[ic]);
        grad[ia] += da * weight;
        grad[ib] += db * weight;
        grad[ic] += dc * weight;
    }
}

/// Per-facet wetted areas from the boundary loops.
pub fn wetted_areas(mesh: &TriMesh, container: &Container) -> Result<Vec<f64>, MeshError> {
    let nfac = container.facet_count();
    let mut wetted = vec![0.0; nfac];
    let verts = mesh.positions();
    match container.kind() {
        ContainerKind::Ball => {
            for lp in mesh.boundary_loops() {
                wetted[0] += spherical_loop_area(verts, &lp.vertices)?;
            }
        }
        _ => {
            for lp in mesh.boundary_loops() {
                for (facet, chain, cyclic) in facet_runs(lp) {
                    if facet as usize >= nfac {
                        return Err(MeshError::FacetOutOfRange(facet));
                    }
                    let nrm = container.wall_normal(facet as usize, &verts[chain[0] as usize]);
                    wetted[facet as usize] += planar_chain_area(verts, &chain, cyclic, &nrm);
                }
            }
            for (f, &w) in wetted.iter().enumerate() {
                if w < -1e-10 {
                    return Err(MeshError::InconsistentWinding(f as u32));
                }
            }
        }
    }
    Ok(wetted)
}

/// Accumulate `Σ_i facet_weight[i] · ∇ wetted_i` into `grad`.
pub fn wetted_area_gradients(
    mesh: &TriMesh,
    container: &Container,
    facet_weights: &[f64],
    grad: &mut [Vec3],
) -> Result<(), MeshError> {
    let verts = mesh.positions();
    match container.kind() {
        ContainerKind::Ball => {
            for lp in mesh.boundary_loops() {
                spherical_loop_area_grad(verts, &lp.vertices, facet_weights[0], grad);
            }
        }
        _ => {
            for lp in mesh.boundary_loops() {
                for (facet, chain, cyclic) in facet_runs(lp) {
                    let nrm = container.wall_normal(facet as usize, &verts[chain[0] as usize]);
                    planar_chain_area_grad(
                        verts,
                        &chain,
                        cyclic,
                        &nrm,
                        facet_weights[facet as usize],
                        grad,
                    );
                }
            }
        }
    }
    Ok(())
}

/// Trapezoid weight of each boundary vertex: half the summed length of its
/// incident loop edges. Zero at interior vertices.
pub fn vertex_line_weights(mesh: &TriMesh) -> Vec<f64> {
    let mut w = vec![0.0; mesh.vertex_count()];
    let verts = mesh.positions();
    for lp in mesh.boundary_loops() {
        let n = lp.len();
        for i in 0..n {
            let a = lp.vertices[i] as usize;
            let b = lp.vertices[(i + 1) % n] as usize;
            let half = 0.5 * (verts[a] - verts[b]).norm();
            w[a] += half;
            w[b] += half;
        }
    }
    w
}

/// Like [`vertex_line_weights`] but restricted to edges on one facet.
pub fn facet_line_weights(mesh: &TriMesh, facet: u32) -> Vec<f64> {
    let mut w = vec![0.0; mesh.vertex_count()];
    let verts = mesh.positions();
    for lp in mesh.boundary_loops() {
        let n = lp.len();
        for i in 0..n {
            if lp.edge_facets[i] != facet {
                continue;
            }
            let a = lp.vertices[i] as usize;
            let b = lp.vertices[(i + 1) % n] as usize;
            let half = 0.5 * (verts[a] - verts[b]).norm();
            w[a] += half;
            w[b] += half;
        }
    }
    w
}

/// Total contact-line length per facet.
pub fn contact_line_lengths(mesh: &TriMesh, nfac: usize) -> Vec<f64> {
    let mut len = vec![0.0; nfac];
    let verts = mesh.positions();
    for lp in mesh.boundary_loops() {
        let n = lp.len();
        for i in 0..n {
            let a = lp.vertices[i] as usize;
            let b = lp.vertices[(i + 1) % n] as usize;
            len[lp.edge_facets[i] as usize] += (verts[a] - verts[b]).norm();
        }
    }
    len
}

/// Previous and next loop vertex of each boundary vertex (`None` interior).
pub fn loop_neighbors(mesh: &TriMesh) -> Vec<Option<(u32, u32)>> {
    let mut nb = vec![None; mesh.vertex_count()];
    for lp in mesh.boundary_loops() {
        let n = lp.len();
        for i in 0..n {
            let prev = lp.vertices[(i + n - 1) % n];
            let here = lp.vertices[i] as usize;
            let next = lp.vertices[(i + 1) % n];
            nb[here] = Some((prev, next));
        }
    }
    nb
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    /// Regular n-gon on the circle of latitude `z0` of the unit sphere,
    /// traversed counter-clockwise seen from +z.
    fn latitude_polygon(n: usize, z0: f64) -> Vec<Vec3> {
        let r = (1.0 - z0 * z0).sqrt();
        (0..n)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / n as f64;
                Vec3::new(r * t.cos(), r * t.sin(), z0)
            })
            .collect()
    }

    #[test]
    fn equatorial_loop_area_is_hemisphere() {
        let verts = latitude_polygon(64, 0.0);
        let idx: Vec<u32> = (0..64).collect();
        // CCW from above leaves the south on the right
        let a = spherical_loop_area(&verts, &idx).unwrap();
        assert_relative_eq!(a, 2.0 * PI, epsilon = 1e-12);
    }

    #[test]
    fn latitude_loop_area_matches_cap_formula() {
        for &z0 in &[0.8, 0.5, -0.4] {
            let n = 2000;
            let verts = latitude_polygon(n, z0);
            let idx: Vec<u32> = (0..n as u32).collect();
            let a = spherical_loop_area(&verts, &idx).unwrap();
            // CCW seen from +z keeps the region below (the right side);
            // polygon inscribed in the circle, so compare at coarse tol
            let exact = 2.0 * PI * (1.0 + z0);
            assert_relative_eq!(a, exact, epsilon = 2e-5 * (1.0 + z0.abs()));
        }
    }

    #[test]
    fn spherical_area_gradient_matches_finite_differences() {
        let n = 24;
        let mut verts = latitude_polygon(n, 0.35);
        // wobble the polygon off the perfect circle, staying on the sphere
        let mut rng = StdRng::seed_from_u64(9);
        for v in &mut verts {
            let d = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            *v = (*v + d * 0.02).normalize();
        }
        let idx: Vec<u32> = (0..n as u32).collect();
        let mut grad = vec![Vec3::zeros(); n];
        spherical_loop_area_grad(&verts, &idx, 1.0, &mut grad);
        let h = 1e-6;
        for probe in [0usize, 5, 13] {
            for dim in 0..3 {
                let mut vp = verts.clone();
                vp[probe][dim] += h;
                let ap = spherical_loop_area(&vp, &idx).unwrap();
                let mut vm = verts.clone();
                vm[probe][dim] -= h;
                let am = spherical_loop_area(&vm, &idx).unwrap();
                let fd = (ap - am) / (2.0 * h);
                assert_relative_eq!(grad[probe][dim], fd, epsilon = 1e-7, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn planar_chain_area_of_polygon() {
        // unit circle polygon in the floor plane, CCW from +z, floor normal -z
        let n = 512;
        let verts: Vec<Vec3> = (0..n)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / n as f64;
                Vec3::new(t.cos(), t.sin(), 0.0)
            })
            .collect();
        let chain: Vec<u32> = (0..n as u32).collect();
        let nrm = Vec3::new(0.0, 0.0, -1.0);
        let a = planar_chain_area(&verts, &chain, true, &nrm);
        let exact = 0.5 * n as f64 * (2.0 * PI / n as f64).sin(); // inscribed polygon
        assert_relative_eq!(a, exact, epsilon = 1e-12);
    }

    #[test]
    fn planar_gradient_matches_finite_differences() {
        let verts = vec![
            Vec3::new(1.0, 0.1, 0.0),
            Vec3::new(0.2, 0.9, 0.0),
            Vec3::new(-0.8, 0.4, 0.0),
            Vec3::new(-0.3, -0.7, 0.0),
            Vec3::new(0.6, -0.5, 0.0),
        ];
        let chain: Vec<u32> = vec![0, 1, 2, 3, 4];
        let nrm = Vec3::new(0.0, 0.0, -1.0);
        for cyclic in [true, false] {
            let mut grad = vec![Vec3::zeros(); 5];
            planar_chain_area_grad(&verts, &chain, cyclic, &nrm, 1.0, &mut grad);
            let h = 1e-7;
            for probe in 0..5 {
                for dim in 0..3 {
                    let mut vp = verts.clone();
                    vp[probe][dim] += h;
                    let mut vm = verts.clone();
                    vm[probe][dim] -= h;
                    let fd = (planar_chain_area(&vp, &chain, cyclic, &nrm)
                        - planar_chain_area(&vm, &chain, cyclic, &nrm))
                        / (2.0 * h);
                    assert_relative_eq!(grad[probe][dim], fd, epsilon = 1e-6);
                }
            }
        }
    }

    #[test]
    fn facet_runs_split_mixed_loops() {
        let lp = crate::mesh::BoundaryLoop {
            vertices: vec![0, 1, 2, 3, 4, 5],
            edge_facets: vec![0, 0, 1, 1, 1, 0],
        };
        let runs = facet_runs(&lp);
        assert_eq!(runs.len(), 2);
        // runs start where the tag changes
        let tags: Vec<u32> = runs.iter().map(|r| r.0).collect();
        assert!(tags.contains(&0) && tags.contains(&1));
        for (_, chain, cyclic) in &runs {
            assert!(!cyclic);
            assert!(chain.len() >= 3);
        }
        let uniform = crate::mesh::BoundaryLoop::on_facet(vec![0, 1, 2], 7);
        let runs = facet_runs(&uniform);
        assert_eq!(runs.len(), 1);
        assert!(runs[0].2);
    }
}
