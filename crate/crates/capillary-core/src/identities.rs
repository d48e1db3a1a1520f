//! Discrete residuals of the integral identities satisfied by stationary
//! drops: Minkowski-type formulas, the per-facet balancing law, constancy
//! of curvature and contact angle, the tangential divergence theorem, and
//! the boundary flux identity.
//!
//! All residuals are dimensionless: surface integrals are normalized by the
//! free-surface area, boundary integrals by contact-line length where
//! natural. Surface integrands use the *discrete* per-vertex curvature and
//! normal (never the optimizer's multiplier), so the residuals test mesh
//! geometry; contact-line integrals use the trapezoid rule on loop
//! polylines. `∫_M ν dA` is summed over faces, which is exact for the
//! polyhedral surface (and exactly zero on closed meshes).

#[cfg(not(feature = "std"))]
use num_traits::Float;

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::boundary::{contact_line_lengths, vertex_line_weights, wetted_areas};
use crate::caps::WedgeVector;
use crate::container::{Container, ContainerKind};
use crate::fields::AmbientField;
use crate::geometry::VertexGeometry;
use crate::mesh::{MeshError, TriMesh};
use crate::Vec3;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IdentityError {
    #[error("this identity applies to {required} containers")]
    WrongContainer { required: &'static str },
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// One named residual together with the scale it was normalized by.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResidualEntry {
    pub name: String,
    pub value: f64,
    pub scale: f64,
}

/// Residuals of every identity applicable to a mesh, at one resolution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResidualReport {
    pub max_edge_length: f64,
    pub entries: Vec<ResidualEntry>,
}

impl ResidualReport {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.iter().find(|e| e.name == name).map(|e| e.value)
    }
}

/// `|∫_M (2 - H<x,ν> + 2<ν,k>)| / area_M` — zero for stationary drops in
/// planar containers.
pub fn minkowski_residual_wedge(
    mesh: &TriMesh,
    container: &Container,
    geom: &VertexGeometry,
    k: &WedgeVector,
) -> Result<f64, IdentityError> {
    if container.kind() == ContainerKind::Ball {
        return Err(IdentityError::WrongContainer { required: "planar" });
    }
    let verts = mesh.positions();
    let mut acc = 0.0;
    let mut area = 0.0;
    for v in 0..mesh.vertex_count() {
        let nu = geom.normals[v];
        let integrand =
            2.0 - geom.mean_curvature[v] * verts[v].dot(&nu) + 2.0 * k.k.dot(&nu);
        acc += geom.areas[v] * integrand;
        area += geom.areas[v];
    }
    Ok(acc.abs() / area)
}

/// `max_a |∫_M 2<x + cosθ ν, a> - H <X_a, ν>| / area_M` over the three
/// coordinate directions — zero for stationary drops in the ball.
pub fn minkowski_residual_ball(
    mesh: &TriMesh,
    container: &Container,
    geom: &VertexGeometry,
) -> Result<f64, IdentityError> {
    if container.kind() != ContainerKind::Ball {
        return Err(IdentityError::WrongContainer { required: "ball" });
    }
    let cos_t = container.beta(0);
    let verts = mesh.positions();
    let mut acc = Vec3::zeros();
    let mut area = 0.0;
    for v in 0..mesh.vertex_count() {
        let nu = geom.normals[v];
        let x = verts[v];
        // <x + cosθ ν, a> is linear in a; accumulate the vector form
        let lin = (x + nu * cos_t) * 2.0;
        // H <X_a, ν> = H aᵀ(x νᵀ x - (|x|²+1)/2 ν): collect as vector in a
        let h = geom.mean_curvature[v];
        let conf = x * x.dot(&nu) - nu * 0.5 * (x.norm_squared() + 1.0);
        acc += (lin - conf * h) * geom.areas[v];
        area += geom.areas[v];
    }
    Ok(acc.abs().max() / area)
}

/// Per-facet balancing residual. Planar facets compare
/// `H̄ · wetted_i` against `sin θ_i · |Γ_i|` (relative form). The ball
/// compares the vector identity `H̄ ∫_{B⁺} x dA = ∮_Γ μ ds`; for flat drops
/// (`H̄ ≈ 0`) the residual is reported in absolute form, both sides being
/// near zero.
pub fn balancing_residuals(
    mesh: &TriMesh,
    container: &Container,
    geom: &VertexGeometry,
) -> Result<Vec<f64>, IdentityError> {
    let h_bar = area_weighted_mean_curvature(geom);
    match container.kind() {
        ContainerKind::Ball => {
            // wetted moment ∫_{B⁺} x dA = -½ Σ p × p' over the mesh loops
            let verts = mesh.positions();
            let mut moment = Vec3::zeros();
            for lp in mesh.boundary_loops() {
                let n = lp.len();
                for i in 0..n {
                    let a = verts[lp.vertices[i] as usize];
                    let b = verts[lp.vertices[(i + 1) % n] as usize];
                    moment -= 0.5 * a.cross(&b);
                }
            }
            let weights = vertex_line_weights(mesh);
            let mut mu_flux = Vec3::zeros();
            for v in 0..mesh.vertex_count() {
                if let Some(bf) = &geom.boundary[v] {
                    mu_flux += bf.conormal * weights[v];
                }
            }
            let lhs = moment * h_bar;
            let defect = (lhs - mu_flux).norm();
            let scale = lhs.norm();
            Ok(vec![if scale > 1e-8 { defect / scale } else { defect }])
        }
        _ => {
            let wetted = wetted_areas(mesh, container)?;
            let lengths = contact_line_lengths(mesh, container.facet_count());
            let mut out = Vec::with_capacity(container.facet_count());
            for f in 0..container.facet_count() {
                let theta = container.contact_angle(f);
                let lhs = h_bar * wetted[f];
                let rhs = theta.sin() * lengths[f];
                let defect = (lhs - rhs).abs();
                out.push(if lhs.abs() > 1e-8 { defect / lhs.abs() } else { defect });
            }
            Ok(out)
        }
    }
}

/// Area-weighted mean curvature over interior vertices.
pub fn area_weighted_mean_curvature(geom: &VertexGeometry) -> f64 {
    let mut acc = 0.0;
    let mut area = 0.0;
    for v in geom.interior_indices() {
        acc += geom.areas[v] * geom.mean_curvature[v];
        area += geom.areas[v];
    }
    acc / area
}

/// Deviations from constant mean curvature and Young's law.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct YoungCmcDeviation {
    /// `max_Γ |measured angle - arccos β|` in radians (corners excluded).
    pub angle_dev_max: f64,
    /// `stdev(H)/|mean(H)|` over interior vertices; absolute stdev for
    /// flat drops.
    pub cmc_rel_stdev: f64,
    pub mean_curvature: f64,
}

pub fn young_cmc_deviation(
    mesh: &TriMesh,
    container: &Container,
    geom: &VertexGeometry,
) -> YoungCmcDeviation {
    let mut angle_dev: f64 = 0.0;
    for v in 0..mesh.vertex_count() {
        let Some(bf) = &geom.boundary[v] else { continue };
        if bf.is_corner {
            continue;
        }
        let target = container.contact_angle(bf.facet as usize);
        angle_dev = angle_dev.max((bf.contact_angle - target).abs());
    }
    // The spread statistic uses the quadric-fit curvature: it is pointwise
    // consistent, so its stdev measures the surface's deviation from CMC
    // rather than estimator noise at irregular vertices.
    let h = &geom.mean_curvature_fit;
    let mut mean = 0.0;
    let mut area = 0.0;
    for v in geom.interior_indices() {
        mean += geom.areas[v] * h[v];
        area += geom.areas[v];
    }
    mean /= area;
    let mut var = 0.0;
    for v in geom.interior_indices() {
        let d = h[v] - mean;
        var += geom.areas[v] * d * d;
    }
    let stdev = (var / area).sqrt();
    // flat branch: when the mean does not dominate the spread, H ≈ 0 and
    // the relative form is meaningless; report the absolute spread
    let cmc_rel_stdev = if mean.abs() > stdev { stdev / mean.abs() } else { stdev };
    YoungCmcDeviation { angle_dev_max: angle_dev, cmc_rel_stdev, mean_curvature: mean }
}

/// Defect of the tangential divergence theorem for a closed-form field:
/// `|∫_M div_M X - ∫_M H <X,ν> - ∮_Γ <X,μ>| / area_M`.
pub fn divergence_residual(mesh: &TriMesh, geom: &VertexGeometry, field: &AmbientField) -> f64 {
    let verts = mesh.positions();
    let weights = vertex_line_weights(mesh);
    let mut acc = 0.0;
    let mut area = 0.0;
    for v in 0..mesh.vertex_count() {
        let nu = geom.normals[v];
        let x = verts[v];
        let div_m = field.tangential_divergence(&x, &nu);
        acc += geom.areas[v] * (div_m - geom.mean_curvature[v] * field.value(&x).dot(&nu));
        area += geom.areas[v];
        if let Some(bf) = &geom.boundary[v] {
            acc -= weights[v] * field.value(&x).dot(&bf.conormal);
        }
    }
    acc.abs() / area
}

/// Defect of the boundary flux identity
/// `2 ∫_M ν dA = ∮_Γ (<x,μ> ν - <x,ν> μ) ds`, normalized by the area.
/// The left side is summed over faces and is exactly the polyhedral value.
pub fn flux_identity_residual(mesh: &TriMesh, geom: &VertexGeometry) -> f64 {
    let mut lhs = Vec3::zeros();
    for f in 0..mesh.face_count() {
        lhs += mesh.face_area_vector(f);
    }
    lhs *= 2.0;
    let verts = mesh.positions();
    let weights = vertex_line_weights(mesh);
    let mut rhs = Vec3::zeros();
    for v in 0..mesh.vertex_count() {
        if let Some(bf) = &geom.boundary[v] {
            let x = verts[v];
            let nu = geom.normals[v];
            rhs += (nu * x.dot(&bf.conormal) - bf.conormal * x.dot(&nu)) * weights[v];
        }
    }
    (lhs - rhs).norm() / mesh.total_area()
}

/// Least-squares slope of `log(residual)` against `log(h)`. Rows at
/// machine zero (`< 1e-13`) are dropped; if fewer than two remain the
/// identity is exact at every level and `+∞` is returned.
pub fn fit_order(h: &[f64], residual: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = h
        .iter()
        .zip(residual)
        .filter(|(_, &r)| r > 1e-13)
        .map(|(&h, &r)| (h.ln(), r.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::INFINITY;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// All residuals applicable to this mesh/container at its resolution.
pub fn full_report(
    mesh: &TriMesh,
    container: &Container,
    geom: &VertexGeometry,
    k: Option<&WedgeVector>,
) -> Result<ResidualReport, IdentityError> {
    let mut entries = Vec::new();
    let area = mesh.total_area();
    let push = |entries: &mut Vec<ResidualEntry>, name: &str, value: f64, scale: f64| {
        entries.push(ResidualEntry { name: String::from(name), value, scale });
    };
    match container.kind() {
        ContainerKind::Ball => {
            let v = minkowski_residual_ball(mesh, container, geom)?;
            push(&mut entries, "minkowski_ball", v, area);
        }
        _ => {
            let kv = match k {
                Some(kv) => kv.clone(),
                None => crate::caps::wedge_k(container).map_err(|_| {
                    IdentityError::WrongContainer { required: "planar" }
                })?,
            };
            let v = minkowski_residual_wedge(mesh, container, geom, &kv)?;
            push(&mut entries, "minkowski_wedge", v, area);
        }
    }
    for (i, r) in balancing_residuals(mesh, container, geom)?.iter().enumerate() {
        push(&mut entries, &alloc::format!("balancing_facet_{i}"), *r, 1.0);
    }
    let yc = young_cmc_deviation(mesh, container, geom);
    push(&mut entries, "young_angle_dev_max", yc.angle_dev_max, 1.0);
    push(&mut entries, "cmc_rel_stdev", yc.cmc_rel_stdev, 1.0);
    push(
        &mut entries,
        "divergence_position_field",
        divergence_residual(mesh, geom, &AmbientField::Position),
        area,
    );
    let a = Vec3::new(1.0, 0.0, 0.0);
    push(
        &mut entries,
        "divergence_conformal_field",
        divergence_residual(mesh, geom, &AmbientField::Conformal(a)),
        area,
    );
    push(&mut entries, "flux_identity", flux_identity_residual(mesh, geom), area);
    Ok(ResidualReport { max_edge_length: mesh.max_edge_length(), entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capmesh::{build_cap_mesh, icosphere};
    use crate::caps::{wedge_k, CapSolution};
    use crate::geometry::vertex_geometry;

    fn ladder(
        container: &Container,
        cap: &CapSolution,
        hs: &[f64],
        f: impl Fn(&TriMesh, &VertexGeometry) -> f64,
    ) -> (Vec<f64>, Vec<f64>) {
        let mut edge = Vec::new();
        let mut res = Vec::new();
        for &h in hs {
            let m = build_cap_mesh(container, cap, h).unwrap();
            let g = vertex_geometry(&m, container).unwrap();
            edge.push(m.max_edge_length());
            res.push(f(&m, &g));
        }
        (edge, res)
    }

    #[test]
    fn minkowski_wedge_converges_on_sixty_cap() {
        let c = Container::floor(0.5).unwrap();
        let cap = CapSolution::with_radius(&c, 1.0, None).unwrap();
        let kv = wedge_k(&c).unwrap();
        let (edge, res) = ladder(&c, &cap, &[0.2, 0.1, 0.05], |m, g| {
            minkowski_residual_wedge(m, &c, g, &kv).unwrap()
        });
        assert!(res[2] < res[0], "{res:?}");
        assert!(fit_order(&edge, &res) > 0.9, "order {} res {res:?}", fit_order(&edge, &res));
    }

    #[test]
    fn minkowski_ball_converges_on_orthogonal_cap() {
        let c = Container::unit_ball(0.0).unwrap();
        let cap = CapSolution::with_radius(&c, 1.0, None).unwrap();
        let (edge, res) = ladder(&c, &cap, &[0.2, 0.1, 0.05], |m, g| {
            minkowski_residual_ball(m, &c, g).unwrap()
        });
        assert!(fit_order(&edge, &res) > 0.9, "order {} res {res:?}", fit_order(&edge, &res));
    }

    #[test]
    fn minkowski_wrong_container_errors() {
        let ball = Container::unit_ball(0.0).unwrap();
        let cap = CapSolution::with_radius(&ball, 1.0, None).unwrap();
        let m = build_cap_mesh(&ball, &cap, 0.1).unwrap();
        let g = vertex_geometry(&m, &ball).unwrap();
        let kv = WedgeVector { k: Vec3::zeros(), magnitude: 0.0 };
        assert!(minkowski_residual_wedge(&m, &ball, &g, &kv).is_err());
        let floor = Container::floor(0.0).unwrap();
        let cap = CapSolution::with_radius(&floor, 1.0, None).unwrap();
        let m = build_cap_mesh(&floor, &cap, 0.1).unwrap();
        let g = vertex_geometry(&m, &floor).unwrap();
        assert!(minkowski_residual_ball(&m, &floor, &g).is_err());
    }

    #[test]
    fn balancing_on_exact_caps() {
        let c = Container::floor(0.5).unwrap();
        let cap = CapSolution::with_radius(&c, 1.0, None).unwrap();
        let (_, res) = ladder(&c, &cap, &[0.1, 0.05], |m, g| {
            balancing_residuals(m, &c, g).unwrap()[0]
        });
        assert!(res[1] < res[0] && res[1] < 5e-3, "{res:?}");

        // flat disk: absolute branch, both sides ≈ 0
        let ball = Container::unit_ball(0.0).unwrap();
        let disk = CapSolution::flat_disk(&ball, Vec3::new(0.0, 0.0, 1.0)).unwrap();
        let m = build_cap_mesh(&ball, &disk, 0.07).unwrap();
        let g = vertex_geometry(&m, &ball).unwrap();
        let r = balancing_residuals(&m, &ball, &g).unwrap();
        assert!(r[0] < 1e-6, "flat disk balancing (absolute) {r:?}");
    }

    #[test]
    fn balancing_on_ball_cap_vector_form() {
        let ball = Container::unit_ball(0.5).unwrap();
        let cap = CapSolution::with_radius(&ball, 0.9, None).unwrap();
        let (_, res) = ladder(&ball, &cap, &[0.1, 0.05], |m, g| {
            balancing_residuals(m, &ball, g).unwrap()[0]
        });
        assert!(res[1] < res[0] && res[1] < 0.01, "{res:?}");
    }

    #[test]
    fn young_cmc_on_exact_cap_converges() {
        let c = Container::floor(0.5).unwrap();
        let cap = CapSolution::with_radius(&c, 1.0, None).unwrap();
        let (edge, ang) = ladder(&c, &cap, &[0.2, 0.1, 0.05], |m, g| {
            young_cmc_deviation(m, &c, g).angle_dev_max
        });
        assert!(fit_order(&edge, &ang) > 0.9, "order {}", fit_order(&edge, &ang));
        let (_, cmc) = ladder(&c, &cap, &[0.2, 0.1, 0.05], |m, g| {
            young_cmc_deviation(m, &c, g).cmc_rel_stdev
        });
        assert!(cmc[2] < cmc[0] && cmc[2] < 0.02, "{cmc:?}");
    }

    #[test]
    fn divergence_theorem_position_field_on_hemisphere() {
        let c = Container::floor(0.0).unwrap();
        let cap = CapSolution::with_radius(&c, 1.0, None).unwrap();
        let (edge, res) =
            ladder(&c, &cap, &[0.2, 0.1, 0.05], |m, g| {
                divergence_residual(m, g, &AmbientField::Position)
            });
        assert!(fit_order(&edge, &res) > 0.9, "order {} {res:?}", fit_order(&edge, &res));
    }

    #[test]
    fn divergence_theorem_conformal_field_on_ball_cap() {
        let c = Container::unit_ball(0.0).unwrap();
        let cap = CapSolution::with_radius(&c, 1.0, None).unwrap();
        let a = Vec3::new(0.0, 1.0, 0.5).normalize();
        let (edge, res) = ladder(&c, &cap, &[0.2, 0.1, 0.05], |m, g| {
            divergence_residual(m, g, &AmbientField::Conformal(a))
        });
        assert!(fit_order(&edge, &res) > 0.9, "order {} {res:?}", fit_order(&edge, &res));
    }

    #[test]
    fn flux_identity_on_caps_and_closed_spheres() {
        let c = Container::floor(0.0).unwrap();
        let cap = CapSolution::with_radius(&c, 1.0, None).unwrap();
        let (edge, res) =
            ladder(&c, &cap, &[0.2, 0.1, 0.05], |m, g| flux_identity_residual(m, g));
        assert!(fit_order(&edge, &res) > 0.9, "order {} {res:?}", fit_order(&edge, &res));

        // closed surface: Γ empty, face-summed ∫ν exactly zero
        let m = icosphere(Vec3::new(0.2, 0.0, 0.5), 0.7, 3);
        let g = vertex_geometry(&m, &c).unwrap();
        assert!(flux_identity_residual(&m, &g) < 1e-12);
    }

    #[test]
    fn residuals_are_scale_invariant() {
        let c = Container::floor(0.5).unwrap();
        let kv = wedge_k(&c).unwrap();
        let at_scale = |scale: f64| {
            let cap = CapSolution::with_radius(&c, scale, None).unwrap();
            let m = build_cap_mesh(&c, &cap, 0.08 * scale).unwrap();
            let g = vertex_geometry(&m, &c).unwrap();
            (
                minkowski_residual_wedge(&m, &c, &g, &kv).unwrap(),
                flux_identity_residual(&m, &g),
            )
        };
        let (b1, b2) = at_scale(1.0);
        let (r1, r2) = at_scale(2.0);
        assert!((r1 - b1).abs() < 1e-10 * (1.0 + b1.abs()), "{r1} vs {b1}");
        assert!((r2 - b2).abs() < 1e-10 * (1.0 + b2.abs()), "{r2} vs {b2}");
    }

    #[test]
    fn fit_order_handles_machine_zero_rows() {
        assert!(fit_order(&[0.1, 0.05, 0.025], &[1e-16, 1e-15, 1e-16]).is_infinite());
        let o = fit_order(&[0.1, 0.05, 0.025], &[4e-2, 1e-2, 2.5e-3]);
        assert!((o - 2.0).abs() < 1e-12);
    }

    #[test]
    fn full_report_includes_expected_entries() {
        let c = Container::floor(0.5).unwrap();
        let cap = CapSolution::with_radius(&c, 1.0, None).unwrap();
        let m = build_cap_mesh(&c, &cap, 0.1).unwrap();
        let g = vertex_geometry(&m, &c).unwrap();
        let report = full_report(&m, &c, &g, None).unwrap();
        for name in [
            "minkowski_wedge",
            "balancing_facet_0",
            "young_angle_dev_max",
            "cmc_rel_stdev",
            "flux_identity",
        ] {
            assert!(report.get(name).is_some(), "missing {name}");
        }
    }
}
