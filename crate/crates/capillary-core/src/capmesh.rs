//! Mesh generation: exact sampling of cap solutions and closed test spheres.
//!
//! Cap meshes place every vertex exactly on the analytic surface and every
//! boundary vertex exactly on its container facet, so that discretization
//! error enters only through the triangulation, never through the sampling.
//! All builders are deterministic in their inputs.

#[cfg(not(feature = "std"))]
use num_traits::Float;

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::caps::{BallCapGeometry, CapError, CapShape, CapSolution};
use crate::container::{Container, ContainerKind};
use crate::mesh::{BoundaryLoop, MeshError, TriMesh};
use crate::Vec3;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BuildError {
    #[error("target edge length {0} is too coarse (boundary loop needs at least 6 vertices)")]
    TooCoarse(f64),
    #[error("cap does not fit inside the container (vertex defect {0:.3e})")]
    CapOutsideContainer(f64),
    #[error("no mesh builder for this cap/container combination")]
    Unsupported,
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Cap(#[from] CapError),
}

/// Right-handed orthonormal frame completing `axis` (`e1 × e2 = axis`).
pub fn orthonormal_frame(axis: &Vec3) -> (Vec3, Vec3) {
    let helper = if axis.x.abs() < 0.9 {
        Vec3::new(1.0, 0.0, 0.0)
    } else {
        Vec3::new(0.0, 1.0, 0.0)
    };
    let e1 = (helper - axis * helper.dot(axis)).normalize();
    let e2 = axis.cross(&e1);
    (e1, e2)
}

/// One latitude row of a spherical patch: polar angle from the patch axis
/// and the azimuths of its vertices (strictly increasing; a full ring covers
/// `[t0, t0 + 2π)`).
struct Row {
    polar: f64,
    azimuths: Vec<f64>,
    cyclic: bool,
}

/// Stitch two vertex rows (index ranges into a shared vertex buffer) into a
/// triangle strip. Rows are ordered by azimuth; `cyclic` rows wrap around.
/// The upper row (closer to the patch apex) comes first; emitted triangles
/// are oriented outward for a right-handed frame.
fn zip_rows(
    upper: &[u32],
    upper_az: &[f64],
    lower: &[u32],
    lower_az: &[f64],
    cyclic: bool,
    faces: &mut Vec<[u32; 3]>,
) {
    assert!(!upper.is_empty() && !lower.is_empty());
    if upper.len() == 1 {
        // fan from a single apex/corner vertex
        let a = upper[0];
        let last = if cyclic { lower.len() } else { lower.len() - 1 };
        for k in 0..last {
            faces.push([a, lower[k], lower[(k + 1) % lower.len()]]);
        }
        return;
    }
    if lower.len() == 1 {
        let b = lower[0];
        let last = if cyclic { upper.len() } else { upper.len() - 1 };
        for i in 0..last {
            faces.push([upper[i], b, upper[(i + 1) % upper.len()]]);
        }
        return;
    }

    // Build extended index/azimuth arrays; cyclic rows repeat their first
    // vertex one turn later.
    let extend = |ids: &[u32], az: &[f64]| -> (Vec<u32>, Vec<f64>) {
        let mut i = ids.to_vec();
        let mut a = az.to_vec();
        if cyclic {
            i.push(ids[0]);
            a.push(az[0] + 2.0 * PI);
        }
        (i, a)
    };
    let (ui, ua) = extend(upper, upper_az);
    let (li, la) = extend(lower, lower_az);

    let (mut i, mut k) = (0usize, 0usize);
    while i + 1 < ui.len() || k + 1 < li.len() {
        let advance_upper = if i + 1 >= ui.len() {
            false
        } else if k + 1 >= li.len() {
            true
        } else {
            // snap ties so symmetric rows stitch identically in each sector
            ua[i + 1] <= la[k + 1] + 1e-12
        };
        if advance_upper {
            faces.push([ui[i], li[k], ui[i + 1]]);
            i += 1;
        } else {
            faces.push([ui[i], li[k], li[k + 1]]);
            k += 1;
        }
    }
}

/// Trace the boundary loops of an oriented triangle soup, in face-induced
/// direction, tagging each loop edge with `tag(a, b)`.
pub fn trace_boundary_loops(
    vertex_count: usize,
    faces: &[[u32; 3]],
    mut tag: impl FnMut(u32, u32) -> Result<u32, MeshError>,
) -> Result<Vec<BoundaryLoop>, MeshError> {
    let mut directed: BTreeMap<(u32, u32), ()> = BTreeMap::new();
    for f in faces {
        for k in 0..3 {
            directed.insert((f[k], f[(k + 1) % 3]), ());
        }
    }
    let mut next: BTreeMap<u32, u32> = BTreeMap::new();
    for (&(a, b), _) in &directed {
        if !directed.contains_key(&(b, a)) {
            if next.insert(a, b).is_some() {
                return Err(MeshError::NonManifoldEdge(a, b));
            }
        }
    }
    let _ = vertex_count;
    let mut loops = Vec::new();
    let mut visited: BTreeMap<u32, ()> = BTreeMap::new();
    let starts: Vec<u32> = next.keys().copied().collect();
    for start in starts {
        if visited.contains_key(&start) {
            continue;
        }
        let mut cyc = vec![start];
        visited.insert(start, ());
        let mut cur = next[&start];
        while cur != start {
            cyc.push(cur);
            visited.insert(cur, ());
            cur = next[&cur];
        }
        let mut edge_facets = Vec::with_capacity(cyc.len());
        for i in 0..cyc.len() {
            edge_facets.push(tag(cyc[i], cyc[(i + 1) % cyc.len()])?);
        }
        loops.push(BoundaryLoop { vertices: cyc, edge_facets });
    }
    Ok(loops)
}

/// Edge tagger that assigns the facet whose equation both endpoints satisfy
/// best (within `tol`).
fn facet_tagger<'c>(
    container: &'c Container,
    verts: &'c [Vec3],
    tol: f64,
) -> impl FnMut(u32, u32) -> Result<u32, MeshError> + 'c {
    move |a: u32, b: u32| {
        let mut best: Option<(f64, u32)> = None;
        for f in 0..container.facet_count() {
            let da = container.signed_offset(f, &verts[a as usize]).abs();
            let db = container.signed_offset(f, &verts[b as usize]).abs();
            let d = da.max(db);
            if d < tol && best.map_or(true, |(bd, _)| d < bd) {
                best = Some((d, f as u32));
            }
        }
        best.map(|(_, f)| f).ok_or(MeshError::UntaggedBoundaryEdge(a, b))
    }
}

fn build_patch(
    center: Vec3,
    radius: f64,
    frame: (Vec3, Vec3, Vec3),
    rows: &[Row],
    container: &Container,
) -> Result<TriMesh, BuildError> {
    let (axis, e1, e2) = frame;
    let mut vertices: Vec<Vec3> = Vec::new();
    let mut row_ids: Vec<Vec<u32>> = Vec::new();
    for row in rows {
        let (sp, cp) = row.polar.sin_cos();
        let ids: Vec<u32> = row
            .azimuths
            .iter()
            .map(|&t| {
                let u = axis * cp + (e1 * t.cos() + e2 * t.sin()) * sp;
                vertices.push(center + u * radius);
                (vertices.len() - 1) as u32
            })
            .collect();
        row_ids.push(ids);
    }
    let mut faces = Vec::new();
    for j in 0..rows.len() - 1 {
        zip_rows(
            &row_ids[j],
            &rows[j].azimuths,
            &row_ids[j + 1],
            &rows[j + 1].azimuths,
            rows[j].cyclic && rows[j + 1].cyclic,
            &mut faces,
        );
    }
    finish_mesh(vertices, faces, container)
}

fn finish_mesh(
    vertices: Vec<Vec3>,
    faces: Vec<[u32; 3]>,
    container: &Container,
) -> Result<TriMesh, BuildError> {
    for v in &vertices {
        if !container.contains(v, 1e-9) {
            let worst = (0..container.facet_count())
                .map(|f| container.signed_offset(f, v))
                .fold(f64::NEG_INFINITY, f64::max);
            return Err(BuildError::CapOutsideContainer(worst));
        }
    }
    let loops = trace_boundary_loops(vertices.len(), &faces, facet_tagger(container, &vertices, 1e-9))?;
    if let Some(lp) = loops.iter().find(|lp| lp.len() < 6) {
        return Err(BuildError::TooCoarse(lp.len() as f64));
    }
    let mesh = TriMesh::new(vertices, faces, loops)?;
    mesh.validate_against(container)?;
    Ok(mesh)
}

/// Rows of an axisymmetric cap: apex at polar 0, rim exactly at `polar_max`.
fn axisymmetric_rows(radius: f64, polar_max: f64, target_edge: f64) -> Vec<Row> {
    let steps = ((radius * polar_max / target_edge).ceil() as usize).max(2);
    let dp = polar_max / steps as f64;
    let mut rows = vec![Row { polar: 0.0, azimuths: vec![0.0], cyclic: true }];
    for j in 1..=steps {
        let polar = dp * j as f64;
        let circ = 2.0 * PI * radius * polar.sin();
        // counts divisible by 6 give the mesh an exact six-fold symmetry,
        // so odd moments of symmetric integrands cancel to rounding
        let n = round_up_to_six(((circ / target_edge).ceil() as usize).max(6));
        let azimuths: Vec<f64> = (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect();
        rows.push(Row { polar, azimuths, cyclic: true });
    }
    rows
}

fn round_up_to_six(n: usize) -> usize {
    n.div_ceil(6) * 6
}

/// Exactly sampled mesh of a cap solution.
pub fn build_cap_mesh(
    container: &Container,
    cap: &CapSolution,
    target_edge: f64,
) -> Result<TriMesh, BuildError> {
    assert!(target_edge > 0.0, "target edge length must be positive");
    match (&cap.shape, container.kind()) {
        (CapShape::Sphere { center, radius }, ContainerKind::HalfSpace) => {
            let n = container.plane_normals()[0];
            let theta = cap.angles[0];
            if 2.0 * PI * radius * theta.sin() < 6.0 * target_edge {
                return Err(BuildError::TooCoarse(target_edge));
            }
            let axis = -n;
            let (e1, e2) = orthonormal_frame(&axis);
            let rows = axisymmetric_rows(*radius, theta, target_edge);
            build_patch(*center, *radius, (axis, e1, e2), &rows, container)
        }
        (CapShape::Sphere { center, radius }, ContainerKind::Ball) => {
            let theta = cap.angles[0];
            let geo = BallCapGeometry::new(*radius, theta);
            let psi = geo.cos_psi.clamp(-1.0, 1.0).acos();
            if 2.0 * PI * radius * psi.sin() < 6.0 * target_edge {
                return Err(BuildError::TooCoarse(target_edge));
            }
            let axis = -center.normalize();
            let (e1, e2) = orthonormal_frame(&axis);
            let rows = axisymmetric_rows(*radius, psi, target_edge);
            build_patch(*center, *radius, (axis, e1, e2), &rows, container)
        }
        (CapShape::FlatDisk { normal }, ContainerKind::Ball) => build_flat_disk(normal, target_edge, container),
        (CapShape::Sphere { center, radius }, ContainerKind::Wedge) => {
            build_wedge_cap(container, *center, *radius, target_edge)
        }
        _ => Err(BuildError::Unsupported),
    }
}

fn build_flat_disk(
    normal: &Vec3,
    target_edge: f64,
    container: &Container,
) -> Result<TriMesh, BuildError> {
    if 2.0 * PI < 6.0 * target_edge {
        return Err(BuildError::TooCoarse(target_edge));
    }
    let (e1, e2) = orthonormal_frame(normal);
    let steps = ((1.0 / target_edge).ceil() as usize).max(2);
    let mut vertices = vec![Vec3::zeros()];
    let mut rows_ids: Vec<Vec<u32>> = vec![vec![0]];
    let mut rows_az: Vec<Vec<f64>> = vec![vec![0.0]];
    for j in 1..=steps {
        let r = j as f64 / steps as f64;
        let n = round_up_to_six((((2.0 * PI * r) / target_edge).ceil() as usize).max(6));
        let az: Vec<f64> = (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect();
        let ids: Vec<u32> = az
            .iter()
            .map(|&t| {
                vertices.push((e1 * t.cos() + e2 * t.sin()) * r);
                (vertices.len() - 1) as u32
            })
            .collect();
        rows_ids.push(ids);
        rows_az.push(az);
    }
    let mut faces = Vec::new();
    for j in 0..steps {
        zip_rows(&rows_ids[j], &rows_az[j], &rows_ids[j + 1], &rows_az[j + 1], true, &mut faces);
    }
    finish_mesh(vertices, faces, container)
}

fn build_wedge_cap(
    container: &Container,
    center: Vec3,
    radius: f64,
    target_edge: f64,
) -> Result<TriMesh, BuildError> {
    let normals = container.plane_normals();
    if normals.len() != 2 {
        return Err(BuildError::Unsupported);
    }
    let kv = crate::caps::wedge_k(container)?;
    if kv.magnitude >= 1.0 - 1e-9 {
        return Err(BuildError::Cap(CapError::DegenerateWedge(kv.magnitude)));
    }
    debug_assert!((center - kv.k * radius).norm() < 1e-12 * radius.max(1.0));

    let (n1, n2) = (normals[0], normals[1]);
    let gamma = n1.dot(&n2).clamp(-1.0, 1.0).acos();
    let edge_dir = n1.cross(&n2).normalize();
    // frame: axis = edge direction, m1 = N̄₁, m2 = axis × m1 (right-handed)
    let m1 = n1;
    let b1 = container.beta(0);
    let b2 = container.beta(1);

    // corners where both contact circles meet: polar angles from the edge
    let polar_lo = (1.0 - kv.magnitude * kv.magnitude).max(0.0).sqrt().clamp(-1.0, 1.0).acos();
    let polar_hi = PI - polar_lo;
    let steps = (((polar_hi - polar_lo) * radius / target_edge).ceil() as usize).max(2);

    // azimuth interval at a given polar angle: cos φ ≤ -β₁/sin λ and
    // cos(φ - γ) ≤ -β₂/sin λ; intervals on the real line (no wrap needed
    // since both are centred in (π/2, 3π/2 + γ)).
    let interval = |polar: f64| -> Option<(f64, f64, bool, bool)> {
        let s = polar.sin();
        if s < 1e-15 {
            return None;
        }
        let c1 = (-b1 / s).clamp(-1.0, 1.0);
        let c2 = (-b2 / s).clamp(-1.0, 1.0);
        let (a1, a2) = (c1.acos(), c2.acos());
        let (lo1, hi1) = (a1, 2.0 * PI - a1);
        let (lo2, hi2) = (gamma + a2, gamma + 2.0 * PI - a2);
        let lo = lo1.max(lo2);
        let hi = hi1.min(hi2);
        if lo >= hi {
            return None;
        }
        // which constraint binds each end decides the facet of the rim edge
        Some((lo, hi, lo2 > lo1, hi1 < hi2))
    };

    let mut rows: Vec<Row> = Vec::new();
    // lower corner: u = -k + sqrt(1-|k|²) ê, azimuth of -k in the frame
    rows.push(Row { polar: polar_lo, azimuths: vec![corner_azimuth(&kv.k, &m1, &edge_dir)], cyclic: false });
    for j in 1..steps {
        let polar = polar_lo + (polar_hi - polar_lo) * j as f64 / steps as f64;
        if let Some((lo, hi, _, _)) = interval(polar) {
            let arc = (hi - lo) * radius * polar.sin();
            let n = ((arc / target_edge).ceil() as usize).max(2);
            let azimuths: Vec<f64> =
                (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();
            rows.push(Row { polar, azimuths, cyclic: false });
        }
    }
    rows.push(Row { polar: polar_hi, azimuths: vec![corner_azimuth(&kv.k, &m1, &edge_dir)], cyclic: false });

    let m2 = edge_dir.cross(&m1);
    build_patch(center, radius, (edge_dir, m1, m2), &rows, container)
}

/// Azimuth of the corner direction `-k` in the patch frame.
fn corner_azimuth(k: &Vec3, m1: &Vec3, axis: &Vec3) -> f64 {
    let m2 = axis.cross(m1);
    let w = -k;
    let t = w.dot(&m2).atan2(w.dot(m1));
    if t < 0.0 {
        t + 2.0 * PI
    } else {
        t
    }
}

/// Closed icosphere: subdivided icosahedron projected onto the sphere of
/// the given `center` and `radius`, outward oriented.
pub fn icosphere(center: Vec3, radius: f64, subdivisions: u32) -> TriMesh {
    let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
    let mut verts: Vec<Vec3> = [
        (-1.0, phi, 0.0),
        (1.0, phi, 0.0),
        (-1.0, -phi, 0.0),
        (1.0, -phi, 0.0),
        (0.0, -1.0, phi),
        (0.0, 1.0, phi),
        (0.0, -1.0, -phi),
        (0.0, 1.0, -phi),
        (phi, 0.0, -1.0),
        (phi, 0.0, 1.0),
        (-phi, 0.0, -1.0),
        (-phi, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vec3::new(x, y, z).normalize())
    .collect();
    let mut faces: Vec<[u32; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut midpoint: BTreeMap<(u32, u32), u32> = BTreeMap::new();
        let mut new_faces = Vec::with_capacity(faces.len() * 4);
        for f in &faces {
            let mut mid = [0u32; 3];
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                mid[k] = *midpoint.entry(key).or_insert_with(|| {
                    let m = (verts[a as usize] + verts[b as usize]).normalize();
                    verts.push(m);
                    (verts.len() - 1) as u32
                });
            }
            new_faces.push([f[0], mid[0], mid[2]]);
            new_faces.push([f[1], mid[1], mid[0]]);
            new_faces.push([f[2], mid[2], mid[1]]);
            new_faces.push([mid[0], mid[1], mid[2]]);
        }
        faces = new_faces;
    }
    let vertices: Vec<Vec3> = verts.iter().map(|u| center + u * radius).collect();
    TriMesh::new(vertices, faces, Vec::new()).expect("icosphere is a valid closed mesh")
}

/// Two disjoint copies of a cap mesh, translated parallel to the wall by
/// `±separation/2`. Used for disconnected-configuration experiments in the
/// half-space.
pub fn disjoint_cap_pair(
    container: &Container,
    cap: &CapSolution,
    target_edge: f64,
    separation: f64,
) -> Result<TriMesh, BuildError> {
    if container.kind() != ContainerKind::HalfSpace {
        return Err(BuildError::Unsupported);
    }
    let n = container.plane_normals()[0];
    let (t, _) = orthonormal_frame(&n);
    let single = build_cap_mesh(container, cap, target_edge)?;
    let left = single.translated(-t * (0.5 * separation));
    let right = single.translated(t * (0.5 * separation));
    let both = left.disjoint_union(&right);
    both.validate_against(container)?;
    Ok(both)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn hemisphere_mesh_samples_sphere_exactly() {
        let c = Container::floor(0.0).unwrap();
        let cap = CapSolution::with_radius(&c, 1.0, None).unwrap();
        let m = build_cap_mesh(&c, &cap, 0.1).unwrap();
        for v in m.positions() {
            assert!((v.norm() - 1.0).abs() < 1e-14);
        }
        assert_eq!(m.boundary_loops().len(), 1);
        assert!(m.boundary_loops()[0].len() >= 6);
        for lp in m.boundary_loops() {
            for &v in &lp.vertices {
                assert!(m.positions()[v as usize].z.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn hemisphere_measures_converge() {
        let c = Container::floor(0.0).unwrap();
        let cap = CapSolution::with_radius(&c, 1.0, None).unwrap();
        let mut vol_err = alloc::vec::Vec::new();
        let mut area_err = alloc::vec::Vec::new();
        for h in [0.2, 0.1, 0.05] {
            let m = build_cap_mesh(&c, &cap, h).unwrap();
            vol_err.push((m.enclosed_volume(&c).unwrap() - 2.0 * PI / 3.0).abs());
            let (area, wetted) = m.surface_and_wetted_area(&c).unwrap();
            area_err.push((area - 2.0 * PI).abs());
            assert_relative_eq!(wetted[0], PI, epsilon = 0.05);
        }
        assert!(vol_err[0] > vol_err[1] && vol_err[1] > vol_err[2]);
        assert!(area_err[2] < area_err[0]);
        assert!(vol_err[2] < 3e-3);
    }

    #[test]
    fn sixty_degree_cap_rim_radius() {
        let c = Container::floor(0.5).unwrap();
        let cap = CapSolution::with_radius(&c, 1.0, None).unwrap();
        let m = build_cap_mesh(&c, &cap, 0.05).unwrap();
        let rim = &m.boundary_loops()[0];
        for &v in &rim.vertices {
            let p = m.positions()[v as usize];
            assert_relative_eq!(
                (p.x * p.x + p.y * p.y).sqrt(),
                (PI / 3.0).sin(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn ball_cap_mesh_is_exactly_on_both_spheres() {
        let c = Container::unit_ball(0.5).unwrap();
        let cap = CapSolution::with_radius(&c, 0.8, None).unwrap();
        let m = build_cap_mesh(&c, &cap, 0.05).unwrap();
        let ctr = cap.center().unwrap();
        for v in m.positions() {
            assert!(((v - ctr).norm() - 0.8).abs() < 1e-13);
        }
        for lp in m.boundary_loops() {
            for &v in &lp.vertices {
                assert!((m.positions()[v as usize].norm() - 1.0).abs() < 1e-12);
            }
        }
        let (_, wetted) = m.surface_and_wetted_area(&c).unwrap();
        let geo = BallCapGeometry::new(0.8, c.contact_angle(0));
        assert_relative_eq!(wetted[0], geo.wetted_area(), epsilon = 2e-3);
        assert_relative_eq!(
            m.enclosed_volume(&c).unwrap(),
            cap.volume,
            epsilon = 2e-3
        );
    }

    #[test]
    fn flat_disk_mesh_measures() {
        let c = Container::unit_ball(0.0).unwrap();
        let disk = CapSolution::flat_disk(&c, Vec3::new(0.0, 0.0, 1.0)).unwrap();
        let m = build_cap_mesh(&c, &disk, 0.07).unwrap();
        let (area, wetted) = m.surface_and_wetted_area(&c).unwrap();
        assert_relative_eq!(area, PI, epsilon = 4e-3);
        assert_relative_eq!(wetted[0], 2.0 * PI, epsilon = 1e-10);
        assert_relative_eq!(m.enclosed_volume(&c).unwrap(), 2.0 * PI / 3.0, epsilon = 2e-3);
    }

    #[test]
    fn quarter_sphere_wedge_mesh() {
        let c = Container::wedge(
            vec![Vec3::new(-1.0, 0.0, 0.0), Vec3::new(0.0, -1.0, 0.0)],
            vec![0.0, 0.0],
        )
        .unwrap();
        let cap = CapSolution::with_radius(&c, 1.0, None).unwrap();
        let m = build_cap_mesh(&c, &cap, 0.07).unwrap();
        m.validate_against(&c).unwrap();
        // two corner vertices on the wedge edge carry both facet tags
        let corners = (0..m.vertex_count())
            .filter(|&v| m.vertex_facets(v).len() == 2)
            .count();
        assert_eq!(corners, 2);
        let (area, wetted) = m.surface_and_wetted_area(&c).unwrap();
        assert_relative_eq!(area, PI, epsilon = 6e-3);
        assert_relative_eq!(wetted[0], 0.5 * PI, epsilon = 6e-3);
        assert_relative_eq!(wetted[1], 0.5 * PI, epsilon = 6e-3);
        assert_relative_eq!(m.enclosed_volume(&c).unwrap(), PI / 3.0, epsilon = 4e-3);
    }

    #[test]
    fn oblique_wedge_cap_mesh_volume() {
        let c = Container::wedge(
            vec![Vec3::new(-1.0, 0.0, 0.0), Vec3::new(0.0, -1.0, 0.0)],
            vec![0.3, 0.4],
        )
        .unwrap();
        let cap = CapSolution::with_radius(&c, 1.0, None).unwrap();
        let m = build_cap_mesh(&c, &cap, 0.05).unwrap();
        m.validate_against(&c).unwrap();
        assert_relative_eq!(m.enclosed_volume(&c).unwrap(), cap.volume, epsilon = 4e-3);
        let (area, wetted) = m.surface_and_wetted_area(&c).unwrap();
        let q = cap.quantities(&c).unwrap();
        assert_relative_eq!(area, q.area, epsilon = 6e-3);
        assert_relative_eq!(wetted[0], q.wetted[0], epsilon = 6e-3);
        assert_relative_eq!(wetted[1], q.wetted[1], epsilon = 6e-3);
    }

    #[test]
    fn coarse_mesh_is_rejected() {
        let c = Container::floor(0.0).unwrap();
        let cap = CapSolution::with_radius(&c, 1.0, None).unwrap();
        assert!(matches!(
            build_cap_mesh(&c, &cap, 2.0),
            Err(BuildError::TooCoarse(_))
        ));
    }

    #[test]
    fn disjoint_pair_has_two_components() {
        let c = Container::floor(0.0).unwrap();
        let cap = CapSolution::with_radius(&c, 0.5, None).unwrap();
        let m = disjoint_cap_pair(&c, &cap, 0.04, 2.5).unwrap();
        assert_eq!(m.component_count(), 2);
        assert_eq!(m.boundary_loops().len(), 2);
        assert_relative_eq!(
            m.enclosed_volume(&c).unwrap(),
            2.0 * 0.5f64.powi(3) * 2.0 * PI / 3.0,
            max_relative = 4e-3
        );
    }
}
