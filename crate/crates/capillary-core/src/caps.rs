//! Exact spherical-cap and flat-disk equilibria.
//!
//! For each container the stationary drops are spherical caps meeting every
//! wall facet at its prescribed contact angle (plus the flat equatorial disk
//! in the ball at `β = 0`). This module constructs them, evaluates their
//! closed-form quantities (areas, contact-line lengths, energy, curvature)
//! and samples the scalar/vector fields used by the identity and stability
//! checks.
//!
//! Conventions (used consistently across the crate):
//! * the surface normal `ν` points out of the drop, so a drop of radius `ρ`
//!   has mean curvature `H = 2/ρ > 0` and `‖h‖² = 2/ρ²`;
//! * wall normals `N̄` point out of the fluid domain, and Young's law reads
//!   `<ν, N̄> = -cos θ` along the contact line;
//! * planar facets pass through the origin, the ball is the unit ball.

#[cfg(not(feature = "std"))]
use num_traits::Float;

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::container::{solve_spd_small, Container, ContainerKind};
use crate::fields::conformal_field;
use crate::Vec3;

/// Points claimed to lie on a cap or contact line must satisfy the defining
/// equations to within this tolerance.
pub const ON_SURFACE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CapError {
    #[error("container kind does not admit this construction")]
    WrongContainer,
    #[error("wedge adhesion vector has |k| = {0}; spherical caps require |k| < 1")]
    DegenerateWedge(f64),
    #[error("exact caps are implemented for at most two wedge planes (got {0})")]
    UnsupportedWedge(usize),
    #[error("no cap with volume {requested} (attainable range is (0, {limit}))")]
    VolumeOutOfRange { requested: f64, limit: f64 },
    #[error("root finding on the cap radius failed to bracket the volume")]
    BracketFailed,
    #[error("point is not on the cap surface (defect {0})")]
    NotOnCap(f64),
    #[error("point is not on the contact line (defect {0})")]
    NotOnContactLine(f64),
    #[error("flat solutions are only constructed in the ball at beta = 0")]
    FlatUnsupported,
    #[error(transparent)]
    Container(#[from] crate::container::ContainerError),
}

/// Adhesion vector `k = Σ cᵢ N̄ᵢ` with `<k, N̄ᵢ> = βᵢ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WedgeVector {
    #[serde(with = "vec3_serde")]
    pub k: Vec3,
    pub magnitude: f64,
}

/// Solve the Gram system for the adhesion vector of a planar container.
pub fn wedge_k(container: &Container) -> Result<WedgeVector, CapError> {
    let normals = container.plane_normals();
    if normals.is_empty() {
        return Err(CapError::WrongContainer);
    }
    let gram = container.gram()?;
    let coeffs = solve_spd_small(&gram, container.betas());
    let mut k = Vec3::zeros();
    for (c, n) in coeffs.iter().zip(normals) {
        k += n * *c;
    }
    for (i, n) in normals.iter().enumerate() {
        debug_assert!((k.dot(n) - container.beta(i)).abs() < 1e-12);
    }
    Ok(WedgeVector { k, magnitude: k.norm() })
}

/// Shape of an exact solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CapShape {
    Sphere {
        #[serde(with = "vec3_serde")]
        center: Vec3,
        radius: f64,
    },
    /// Totally geodesic disk through the origin of the ball.
    FlatDisk {
        #[serde(with = "vec3_serde")]
        normal: Vec3,
    },
}

/// An exact equilibrium drop: spherical cap or flat disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapSolution {
    pub shape: CapShape,
    /// Contact angle per container facet (radians).
    pub angles: Vec<f64>,
    /// Enclosed volume.
    pub volume: f64,
}

/// Closed-form quantities of an exact solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapQuantities {
    /// Area of the free surface.
    pub area: f64,
    /// Wetted area per facet.
    pub wetted: Vec<f64>,
    /// Contact-line length per facet.
    pub contact_len: Vec<f64>,
    /// Free energy `area - Σ βᵢ · wettedᵢ`.
    pub energy: f64,
    /// Mean curvature (`2/ρ`, or 0 for flat disks).
    pub mean_curvature: f64,
}

impl CapSolution {
    /// Exact cap of prescribed radius meeting every facet of `container` at
    /// its Young angle. `axis` orients ball caps (direction from the origin
    /// to the sphere centre); it defaults to `+z` and is ignored for planar
    /// containers, whose center is pinned at `ρ·k`.
    pub fn with_radius(
        container: &Container,
        radius: f64,
        axis: Option<Vec3>,
    ) -> Result<Self, CapError> {
        assert!(radius > 0.0, "cap radius must be positive");
        let angles: Vec<f64> = (0..container.facet_count())
            .map(|i| container.contact_angle(i))
            .collect();
        match container.kind() {
            ContainerKind::HalfSpace | ContainerKind::Wedge => {
                let n_facets = container.plane_normals().len();
                if n_facets > 2 {
                    return Err(CapError::UnsupportedWedge(n_facets));
                }
                let kv = wedge_k(container)?;
                if n_facets > 1 && kv.magnitude >= 1.0 - 1e-9 {
                    return Err(CapError::DegenerateWedge(kv.magnitude));
                }
                let center = kv.k * radius;
                let volume = planar_cap_unit_volume(container, &kv)? * radius.powi(3);
                Ok(Self {
                    shape: CapShape::Sphere { center, radius },
                    angles,
                    volume,
                })
            }
            ContainerKind::Ball => {
                let theta = angles[0];
                let axis = axis.unwrap_or_else(|| Vec3::new(0.0, 0.0, 1.0)).normalize();
                let dist = (1.0 + radius * radius + 2.0 * radius * theta.cos()).sqrt();
                let geo = BallCapGeometry::new(radius, theta);
                Ok(Self {
                    shape: CapShape::Sphere { center: axis * dist, radius },
                    angles,
                    volume: geo.volume(),
                })
            }
        }
    }

    /// The flat equatorial disk in the ball. Only admissible at `β = 0`.
    pub fn flat_disk(container: &Container, normal: Vec3) -> Result<Self, CapError> {
        if container.kind() != ContainerKind::Ball {
            return Err(CapError::WrongContainer);
        }
        if container.beta(0).abs() > 1e-12 {
            return Err(CapError::FlatUnsupported);
        }
        Ok(Self {
            shape: CapShape::FlatDisk { normal: normal.normalize() },
            angles: vec![0.5 * PI],
            volume: 2.0 * PI / 3.0,
        })
    }

    /// Invert the volume map: the cap with the container's Young angles and
    /// the prescribed volume. Monotone bracketed root finding on the radius,
    /// solved to a relative volume residual of 1e-12.
    pub fn from_volume(container: &Container, volume: f64) -> Result<Self, CapError> {
        if !(volume > 0.0) {
            return Err(CapError::VolumeOutOfRange { requested: volume, limit: 0.0 });
        }
        match container.kind() {
            ContainerKind::HalfSpace | ContainerKind::Wedge => {
                let kv = wedge_k(container)?;
                if container.plane_normals().len() > 2 {
                    return Err(CapError::UnsupportedWedge(container.plane_normals().len()));
                }
                if container.plane_normals().len() > 1 && kv.magnitude >= 1.0 - 1e-9 {
                    return Err(CapError::DegenerateWedge(kv.magnitude));
                }
                let unit_vol = planar_cap_unit_volume(container, &kv)?;
                let radius = solve_radius(|r| unit_vol * r.powi(3), volume)?;
                Self::with_radius(container, radius, None)
            }
            ContainerKind::Ball => {
                let theta = container.contact_angle(0);
                // Flat limit: volume of the unit ball below the plane at
                // height -cos θ, approached as ρ → ∞.
                let c = theta.cos();
                let limit = PI / 3.0 * (1.0 - c) * (1.0 - c) * (2.0 + c);
                let ball_vol = 4.0 * PI / 3.0;
                debug_assert!(limit < ball_vol);
                if (volume - limit).abs() < 1e-12 * ball_vol && (theta - 0.5 * PI).abs() < 1e-12 {
                    return Self::flat_disk(container, Vec3::new(0.0, 0.0, 1.0));
                }
                if volume >= limit {
                    return Err(CapError::VolumeOutOfRange { requested: volume, limit });
                }
                let radius =
                    solve_radius(|r| BallCapGeometry::new(r, theta).volume(), volume)?;
                Self::with_radius(container, radius, None)
            }
        }
    }

    pub fn is_flat(&self) -> bool {
        matches!(self.shape, CapShape::FlatDisk { .. })
    }

    pub fn radius(&self) -> Option<f64> {
        match self.shape {
            CapShape::Sphere { radius, .. } => Some(radius),
            CapShape::FlatDisk { .. } => None,
        }
    }

    pub fn center(&self) -> Option<Vec3> {
        match self.shape {
            CapShape::Sphere { center, .. } => Some(center),
            CapShape::FlatDisk { .. } => None,
        }
    }

    /// Mean curvature with the outward-normal convention (`2/ρ`, flat: 0).
    pub fn mean_curvature(&self) -> f64 {
        match self.shape {
            CapShape::Sphere { radius, .. } => 2.0 / radius,
            CapShape::FlatDisk { .. } => 0.0,
        }
    }

    /// Closed-form areas, lengths, energy and curvature.
    pub fn quantities(&self, container: &Container) -> Result<CapQuantities, CapError> {
        match (&self.shape, container.kind()) {
            (CapShape::FlatDisk { .. }, ContainerKind::Ball) => {
                let beta = container.beta(0);
                Ok(CapQuantities {
                    area: PI,
                    wetted: vec![2.0 * PI],
                    contact_len: vec![2.0 * PI],
                    energy: PI - beta * 2.0 * PI,
                    mean_curvature: 0.0,
                })
            }
            (CapShape::FlatDisk { .. }, _) => Err(CapError::WrongContainer),
            (CapShape::Sphere { radius, .. }, ContainerKind::Ball) => {
                let theta = self.angles[0];
                let beta = container.beta(0);
                let geo = BallCapGeometry::new(*radius, theta);
                let area = geo.lateral_area();
                let wetted = geo.wetted_area();
                Ok(CapQuantities {
                    area,
                    wetted: vec![wetted],
                    contact_len: vec![2.0 * PI * geo.sin_alpha()],
                    energy: area - beta * wetted,
                    mean_curvature: 2.0 / radius,
                })
            }
            (CapShape::Sphere { radius, .. }, _) => {
                let kv = wedge_k(container)?;
                let q = planar_cap_unit_quantities(container, &kv)?;
                let r2 = radius * radius;
                let area = q.area * r2;
                let wetted: Vec<f64> = q.wetted.iter().map(|w| w * r2).collect();
                let contact_len: Vec<f64> =
                    q.contact_len.iter().map(|l| l * radius).collect();
                let energy = area
                    - container
                        .betas()
                        .iter()
                        .zip(&wetted)
                        .map(|(b, w)| b * w)
                        .sum::<f64>();
                Ok(CapQuantities {
                    area,
                    wetted,
                    contact_len,
                    energy,
                    mean_curvature: 2.0 / radius,
                })
            }
        }
    }

    /// Outward unit normal of the drop at a point of the surface.
    pub fn normal_at(&self, x: &Vec3) -> Vec3 {
        match &self.shape {
            CapShape::Sphere { center, radius } => (x - center) / *radius,
            CapShape::FlatDisk { normal } => *normal,
        }
    }

    /// Squared norm of the second fundamental form (`2/ρ²`, flat: 0).
    pub fn norm_h_squared(&self) -> f64 {
        match self.shape {
            CapShape::Sphere { radius, .. } => 2.0 / (radius * radius),
            CapShape::FlatDisk { .. } => 0.0,
        }
    }

    /// Distance of `x` from the cap surface equation (0 on the surface).
    pub fn surface_defect(&self, x: &Vec3) -> f64 {
        match &self.shape {
            CapShape::Sphere { center, radius } => ((x - center).norm() - radius).abs(),
            CapShape::FlatDisk { normal } => normal.dot(x).abs(),
        }
    }

    fn check_on_cap(&self, x: &Vec3) -> Result<(), CapError> {
        let d = self.surface_defect(x);
        if d > ON_SURFACE_TOL {
            return Err(CapError::NotOnCap(d));
        }
        Ok(())
    }

    /// Test function `ζ = 2 - H <x,ν> + 2 <k,ν>` of the planar containers;
    /// identically zero on exact caps.
    pub fn zeta(&self, k: &WedgeVector, x: &Vec3) -> Result<f64, CapError> {
        self.check_on_cap(x)?;
        let nu = self.normal_at(x);
        Ok(2.0 - self.mean_curvature() * x.dot(&nu) + 2.0 * k.k.dot(&nu))
    }

    /// `Φ = (H/2)|x|² - 2 <x,ν>` (planar containers); constant on exact caps.
    pub fn phi_wedge(&self, x: &Vec3) -> Result<f64, CapError> {
        self.check_on_cap(x)?;
        let nu = self.normal_at(x);
        Ok(0.5 * self.mean_curvature() * x.norm_squared() - 2.0 * x.dot(&nu))
    }

    /// Ball test function `φ_a = 2 <x + cos θ ν, a> - H <X_a, ν>`.
    pub fn phi_a(&self, a: &Vec3, x: &Vec3) -> Result<f64, CapError> {
        self.check_on_cap(x)?;
        let nu = self.normal_at(x);
        let cos_t = self.angles[0].cos();
        Ok(2.0 * (x + nu * cos_t).dot(a) - self.mean_curvature() * conformal_field(a, x).dot(&nu))
    }

    /// Ball function `Φ = (|x|²-1)H/2 - 2(<x,ν> + cos θ)`; identically zero
    /// on exact ball caps and on the equatorial disk.
    pub fn phi_ball(&self, x: &Vec3) -> Result<f64, CapError> {
        self.check_on_cap(x)?;
        let nu = self.normal_at(x);
        let cos_t = self.angles[0].cos();
        Ok(0.5 * (x.norm_squared() - 1.0) * self.mean_curvature() - 2.0 * (x.dot(&nu) + cos_t))
    }

    /// Robin coefficient `q` at a contact-line point:
    /// `q = h^∂Ω(ν̄,ν̄)/sin θ + cot θ · h(μ,μ)`. Errors away from the
    /// contact line, where `q` is undefined.
    pub fn q_at(&self, container: &Container, facet: usize, x: &Vec3) -> Result<f64, CapError> {
        self.check_on_cap(x)?;
        let off = container.signed_offset(facet, x).abs();
        if off > ON_SURFACE_TOL {
            return Err(CapError::NotOnContactLine(off));
        }
        let theta = self.angles[facet];
        let h_mu_mu = match self.shape {
            CapShape::Sphere { radius, .. } => 1.0 / radius,
            CapShape::FlatDisk { .. } => 0.0,
        };
        Ok(container.wall_normal_curvature() / theta.sin() + h_mu_mu / theta.tan())
    }
}

/// Derived trigonometry of a spherical cap in the unit ball.
///
/// The sphere centre sits at distance `|c| = √(1 + ρ² + 2ρ cos θ)` from the
/// origin. `α` is the angular radius of the wetted spherical patch seen from
/// the origin; `ψ` is the angular radius of the free surface seen from the
/// sphere centre.
#[derive(Debug, Clone, Copy)]
pub struct BallCapGeometry {
    pub radius: f64,
    pub theta: f64,
    pub center_dist: f64,
    pub cos_alpha: f64,
    pub cos_psi: f64,
}

impl BallCapGeometry {
    pub fn new(radius: f64, theta: f64) -> Self {
        let d2 = 1.0 + radius * radius + 2.0 * radius * theta.cos();
        let center_dist = d2.sqrt();
        Self {
            radius,
            theta,
            center_dist,
            cos_alpha: (1.0 + radius * theta.cos()) / center_dist,
            cos_psi: (radius + theta.cos()) / center_dist,
        }
    }

    pub fn sin_alpha(&self) -> f64 {
        (1.0 - self.cos_alpha * self.cos_alpha).max(0.0).sqrt()
    }

    /// Area of the free surface.
    pub fn lateral_area(&self) -> f64 {
        2.0 * PI * self.radius * self.radius * (1.0 - self.cos_psi)
    }

    /// Area of the wetted patch of the unit sphere.
    pub fn wetted_area(&self) -> f64 {
        2.0 * PI * (1.0 - self.cos_alpha)
    }

    /// Enclosed volume, via the divergence theorem over the closed boundary.
    pub fn volume(&self) -> f64 {
        let sa2 = 1.0 - self.cos_alpha * self.cos_alpha;
        (self.radius * self.lateral_area() - PI * sa2 * self.center_dist
            + self.wetted_area())
            / 3.0
    }
}

fn solve_radius(volume_of: impl Fn(f64) -> f64, target: f64) -> Result<f64, CapError> {
    let (mut lo, mut hi) = (1e-6, 1e3);
    if volume_of(lo) > target || volume_of(hi) < target {
        return Err(CapError::BracketFailed);
    }
    // Bisection with a secant refinement; the volume is strictly increasing
    // in the radius for every container.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let v = volume_of(mid);
        if v < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) < 1e-15 * hi {
            break;
        }
    }
    let mut r = 0.5 * (lo + hi);
    for _ in 0..8 {
        let v = volume_of(r);
        let dv = (volume_of(r * (1.0 + 1e-7)) - v) / (r * 1e-7);
        if dv <= 0.0 {
            break;
        }
        let step = (target - v) / dv;
        let next = r + step;
        if next > lo && next < hi {
            r = next;
        }
        if (volume_of(r) - target).abs() <= 1e-12 * target {
            break;
        }
    }
    Ok(r)
}

struct PlanarUnitQuantities {
    area: f64,
    wetted: Vec<f64>,
    contact_len: Vec<f64>,
}

/// Quantities of the unit-radius cap (centre at `k`) in a planar container.
fn planar_cap_unit_quantities(
    container: &Container,
    kv: &WedgeVector,
) -> Result<PlanarUnitQuantities, CapError> {
    let normals = container.plane_normals();
    match normals.len() {
        1 => {
            let theta = container.contact_angle(0);
            let (s, c) = theta.sin_cos();
            Ok(PlanarUnitQuantities {
                area: 2.0 * PI * (1.0 - c),
                wetted: vec![PI * s * s],
                contact_len: vec![2.0 * PI * s],
            })
        }
        2 => {
            if kv.magnitude >= 1.0 - 1e-9 {
                return Err(CapError::DegenerateWedge(kv.magnitude));
            }
            let theta: Vec<f64> = (0..2).map(|i| container.contact_angle(i)).collect();
            let gamma = normals[0].dot(&normals[1]).clamp(-1.0, 1.0).acos();
            // Free surface: the unit sphere minus the two caps cut away by
            // the planes, by inclusion-exclusion. The cap removed by plane i
            // has angular radius π - θᵢ about N̄ᵢ.
            let psi: Vec<f64> = theta.iter().map(|t| PI - t).collect();
            let removed: f64 = psi.iter().map(|p| 2.0 * PI * (1.0 - p.cos())).sum();
            let overlap = spherical_cap_intersection_area(psi[0], psi[1], gamma);
            let area = 4.0 * PI - removed + overlap;

            let (sin_g, cos_g) = (gamma.sin(), gamma.cos());
            let mut wetted = Vec::with_capacity(2);
            let mut contact_len = Vec::with_capacity(2);
            for i in 0..2 {
                let j = 1 - i;
                let r = theta[i].sin();
                let beta_i = container.beta(i);
                let beta_j = container.beta(j);
                // In-plane signed distance from the contact-disk centre to
                // the wedge edge, positive on the forbidden side.
                let s = (beta_j - beta_i * cos_g) / sin_g;
                wetted.push(circular_segment_area(r, -s));
                let t = (s / r).clamp(-1.0, 1.0);
                contact_len.push(2.0 * r * t.acos());
            }
            Ok(PlanarUnitQuantities { area, wetted, contact_len })
        }
        n => Err(CapError::UnsupportedWedge(n)),
    }
}

/// Unit-radius cap volume in a planar container:
/// `V = (area_M - Σ βᵢ wettedᵢ) / 3` since all facets pass through the origin.
fn planar_cap_unit_volume(container: &Container, kv: &WedgeVector) -> Result<f64, CapError> {
    let q = planar_cap_unit_quantities(container, kv)?;
    let wetted_weighted: f64 = container
        .betas()
        .iter()
        .zip(&q.wetted)
        .map(|(b, w)| b * w)
        .sum();
    Ok((q.area - wetted_weighted) / 3.0)
}

/// Area of the part of a disk of radius `r` with in-plane coordinate `u ≤ h`
/// (coordinate measured from the disk centre).
pub fn circular_segment_area(r: f64, h: f64) -> f64 {
    if h <= -r {
        return 0.0;
    }
    if h >= r {
        return PI * r * r;
    }
    r * r * (-h / r).clamp(-1.0, 1.0).acos() + h * (r * r - h * h).max(0.0).sqrt()
}

/// Area of the intersection of two spherical caps on the unit sphere, with
/// angular radii `psi1`, `psi2` and axes separated by `gamma`. Gauss-Bonnet
/// over the lens bounded by the two small-circle arcs.
pub fn spherical_cap_intersection_area(psi1: f64, psi2: f64, gamma: f64) -> f64 {
    let cap = |psi: f64| 2.0 * PI * (1.0 - psi.cos());
    if gamma >= psi1 + psi2 {
        return 0.0;
    }
    if gamma <= psi2 - psi1 {
        return cap(psi1);
    }
    if gamma <= psi1 - psi2 {
        return cap(psi2);
    }
    // Complements disjoint: the caps cover the sphere twice outside both
    // polar holes.
    if gamma >= 2.0 * PI - psi1 - psi2 {
        return cap(psi1) + cap(psi2) - 4.0 * PI;
    }
    let (c1, s1) = (psi1.cos(), psi1.sin());
    let (c2, s2) = (psi2.cos(), psi2.sin());
    let (cg, sg) = (gamma.cos(), gamma.sin());
    let a1 = ((c2 - c1 * cg) / (s1 * sg)).clamp(-1.0, 1.0).acos();
    let a2 = ((c1 - c2 * cg) / (s2 * sg)).clamp(-1.0, 1.0).acos();
    let ap = ((cg - c1 * c2) / (s1 * s2)).clamp(-1.0, 1.0).acos();
    2.0 * PI - 2.0 * (a1 * c1 + a2 * c2 + ap)
}

pub(crate) mod vec3_serde {
    use crate::Vec3;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Vec3, s: S) -> Result<S::Ok, S::Error> {
        [v.x, v.y, v.z].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec3, D::Error> {
        let a = <[f64; 3]>::deserialize(d)?;
        Ok(Vec3::new(a[0], a[1], a[2]))
    }
}
