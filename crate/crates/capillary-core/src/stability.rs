//! Second-variation index form of the free energy and its spectrum.
//!
//! For a normal perturbation `ζ` of a stationary drop the second variation
//! is the quadratic form
//!
//! `J(ζ) = ∫_M |∇ζ|² - ∫_M ‖h‖² ζ² - ∫_Γ q ζ²`,
//!
//! assembled here as cotangent stiffness minus two lumped mass matrices
//! (curvature mass over all vertices, Robin mass over contact-line
//! vertices). The conormal boundary term of the un-integrated form cancels
//! against integration by parts and is never discretized. Stability of the
//! drop is nonnegativity of `J` over mean-zero `ζ`; the smallest
//! mass-orthogonal eigenvalue is computed by shift-invert Lanczos.
//!
//! The Robin weight is `q = h^∂Ω(ν̄,ν̄)/sin θ + cot θ · h(μ,μ)` with
//! `θ = arccos β` prescribed per facet: planar walls contribute no wall
//! curvature, the unit sphere contributes `1/sin θ`.

#[cfg(not(feature = "std"))]
use num_traits::Float;

use alloc::vec;
use alloc::vec::Vec;

use crate::boundary::facet_line_weights;
use crate::container::Container;
use crate::eigen::{min_eigenvalue_mean_zero, CsrMatrix, EigenError, EigenOptions};
use crate::geometry::{CotanLaplacian, VertexGeometry};
use crate::mesh::TriMesh;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StabilityError {
    #[error("contact angle {angle} on facet {facet} is too close to 0 or π for the Robin weight")]
    IllConditionedAngle { facet: usize, angle: f64 },
    #[error(transparent)]
    Eigen(#[from] EigenError),
}

/// Which specialization of the Robin weight applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QBranch {
    /// Planar walls: `q = cot θ · h(μ,μ)`.
    Wedge,
    /// Unit ball: `q = 1/sin θ + cot θ · h(μ,μ)`.
    Ball,
}

/// Per-vertex Robin coefficient on the contact line (zero elsewhere).
#[derive(Debug, Clone)]
pub struct QCoefficient {
    pub values: Vec<f64>,
    pub branch: QBranch,
}

fn angle_guard(container: &Container, facet: usize) -> Result<f64, StabilityError> {
    let theta = container.contact_angle(facet);
    if theta < 1e-3 || theta > core::f64::consts::PI - 1e-3 {
        return Err(StabilityError::IllConditionedAngle { facet, angle: theta });
    }
    Ok(theta)
}

/// Robin weight at every contact-line vertex, from the prescribed contact
/// angles and the fitted normal curvature `h(μ,μ)`.
pub fn q_coefficient(
    mesh: &TriMesh,
    container: &Container,
    geom: &VertexGeometry,
) -> Result<QCoefficient, StabilityError> {
    let branch = match container.kind() {
        crate::container::ContainerKind::Ball => QBranch::Ball,
        _ => QBranch::Wedge,
    };
    let wall_curv = container.wall_normal_curvature();
    let mut values = vec![0.0; mesh.vertex_count()];
    for v in 0..mesh.vertex_count() {
        let Some(bf) = &geom.boundary[v] else { continue };
        let theta = angle_guard(container, bf.facet as usize)?;
        values[v] = wall_curv / theta.sin() + bf.h_mu_mu / theta.tan();
    }
    Ok(QCoefficient { values, branch })
}

/// Assembled index form: `J(ζ) = ζᵀ(K - M_h - M_q)ζ` with lumped masses.
pub struct IndexForm {
    /// Cotangent stiffness (positive semidefinite, kernel = constants per
    /// component).
    pub stiffness: CsrMatrix,
    /// Diagonal `A_i ‖h‖²_i`.
    pub curvature_mass: Vec<f64>,
    /// Diagonal `ℓ_i q_i`, supported on contact-line vertices.
    pub robin_mass: Vec<f64>,
    /// Diagonal vertex mass `A_i`.
    pub mass: Vec<f64>,
}

impl IndexForm {
    /// The operator `K - diag(M_h) - diag(M_q)` as one sparse matrix.
    pub fn operator(&self) -> CsrMatrix {
        let d: Vec<f64> = self
            .curvature_mass
            .iter()
            .zip(&self.robin_mass)
            .map(|(c, r)| -(c + r))
            .collect();
        self.stiffness.with_added_diagonal(&d)
    }

    /// `J(ζ)` and the mass-weighted mean `∫ζ`.
    pub fn evaluate(&self, zeta: &[f64]) -> (f64, f64) {
        let n = self.mass.len();
        let mut az = vec![0.0; n];
        self.stiffness.matvec(zeta, &mut az);
        let mut j = 0.0;
        let mut mean = 0.0;
        for i in 0..n {
            j += zeta[i] * az[i] - (self.curvature_mass[i] + self.robin_mass[i]) * zeta[i] * zeta[i];
            mean += self.mass[i] * zeta[i];
        }
        (j, mean)
    }

    /// Smallest eigenvalue of `(K - M_h - M_q) v = λ M v` over mean-zero
    /// `v`, with its eigenvector.
    pub fn min_eigenvalue_mean_zero(
        &self,
        opts: &EigenOptions,
    ) -> Result<(f64, Vec<f64>), StabilityError> {
        let op = self.operator();
        Ok(min_eigenvalue_mean_zero(&op, &self.mass, opts)?)
    }
}

/// Assemble the index form from mesh geometry and prescribed angles.
pub fn assemble_index_form(
    mesh: &TriMesh,
    container: &Container,
    geom: &VertexGeometry,
) -> Result<IndexForm, StabilityError> {
    let n = mesh.vertex_count();
    let lap = CotanLaplacian::new(mesh);
    let mut triplets: Vec<(u32, u32, f64)> = Vec::with_capacity(4 * lap.edges.len());
    for &(i, j, w) in &lap.edges {
        triplets.push((i, j, -w));
        triplets.push((j, i, -w));
        triplets.push((i, i, w));
        triplets.push((j, j, w));
    }
    let stiffness = CsrMatrix::from_triplets(n, &triplets, false);

    let curvature_mass: Vec<f64> =
        (0..n).map(|i| geom.areas[i] * geom.norm_h_sq[i]).collect();

    let mut robin_mass = vec![0.0; n];
    for facet in 0..container.facet_count() {
        let theta = angle_guard(container, facet)?;
        let weights = facet_line_weights(mesh, facet as u32);
        let wall_curv = container.wall_normal_curvature();
        for v in 0..n {
            if weights[v] == 0.0 {
                continue;
            }
            let Some(bf) = &geom.boundary[v] else { continue };
            // per-facet Robin weight; at wedge corners each facet
            // contributes its own angle with its own line weight
            let qv = wall_curv / theta.sin() + bf.h_mu_mu / theta.tan();
            robin_mass[v] += weights[v] * qv;
        }
    }

    Ok(IndexForm { stiffness, curvature_mass, robin_mass, mass: geom.areas.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capmesh::build_cap_mesh;
    use crate::caps::CapSolution;
    use crate::geometry::vertex_geometry;
    use crate::Vec3;
    use approx::assert_relative_eq;
    use core::f64::consts::PI;

    #[test]
    fn q_values_on_reference_meshes() {
        // hemisphere at β = 0: q ≡ 0
        let c = Container::floor(0.0).unwrap();
        let cap = CapSolution::with_radius(&c, 1.0, None).unwrap();
        let m = build_cap_mesh(&c, &cap, 0.08).unwrap();
        let g = vertex_geometry(&m, &c).unwrap();
        let q = q_coefficient(&m, &c, &g).unwrap();
        assert_eq!(q.branch, QBranch::Wedge);
        for v in 0..m.vertex_count() {
            if g.boundary[v].is_some() {
                assert!(q.values[v].abs() < 1e-10);
            }
        }

        // θ = 60°: q ≈ 1/√3
        let c = Container::floor(0.5).unwrap();
        let cap = CapSolution::with_radius(&c, 1.0, None).unwrap();
        let m = build_cap_mesh(&c, &cap, 0.05).unwrap();
        let g = vertex_geometry(&m, &c).unwrap();
        let q = q_coefficient(&m, &c, &g).unwrap();
        for v in 0..m.vertex_count() {
            if g.boundary[v].is_some() {
                assert!((q.values[v] - 1.0 / 3.0f64.sqrt()).abs() < 0.06, "q = {}", q.values[v]);
            }
        }

        // equatorial disk: q ≡ 1 (and exactly, since h(μ,μ) = 0 exactly)
        let c = Container::unit_ball(0.0).unwrap();
        let disk = CapSolution::flat_disk(&c, Vec3::new(0.0, 0.0, 1.0)).unwrap();
        let m = build_cap_mesh(&c, &disk, 0.08).unwrap();
        let g = vertex_geometry(&m, &c).unwrap();
        let q = q_coefficient(&m, &c, &g).unwrap();
        assert_eq!(q.branch, QBranch::Ball);
        for v in 0..m.vertex_count() {
            if g.boundary[v].is_some() {
                assert_relative_eq!(q.values[v], 1.0, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn index_form_matrices_are_symmetric_and_psd() {
        let c = Container::floor(0.5).unwrap();
        let cap = CapSolution::with_radius(&c, 1.0, None).unwrap();
        let m = build_cap_mesh(&c, &cap, 0.1).unwrap();
        let g = vertex_geometry(&m, &c).unwrap();
        let form = assemble_index_form(&m, &c, &g).unwrap();
        assert!(form.stiffness.asymmetry() < 1e-14);
        // stiffness kernel contains constants
        let ones = vec![1.0; m.vertex_count()];
        let mut k1 = vec![0.0; m.vertex_count()];
        form.stiffness.matvec(&ones, &mut k1);
        assert!(k1.iter().all(|&x| x.abs() < 1e-12));
        // Robin mass supported only on the contact line
        for v in 0..m.vertex_count() {
            if g.boundary[v].is_none() {
                assert_eq!(form.robin_mass[v], 0.0);
            }
        }
        // Dirichlet form positive on a non-constant function
        let f: Vec<f64> = m.positions().iter().map(|p| p.x).collect();
        let pure = IndexForm {
            stiffness: form.stiffness.clone(),
            curvature_mass: vec![0.0; m.vertex_count()],
            robin_mass: vec![0.0; m.vertex_count()],
            mass: form.mass.clone(),
        };
        let (j_stiff, _) = pure.evaluate(&f);
        assert!(j_stiff > 0.0);
    }

    #[test]
    fn flat_disk_constant_gives_minus_boundary_mass() {
        // J(c) = -∮ q c² = -2π c² on the unit disk with q = 1
        let c = Container::unit_ball(0.0).unwrap();
        let disk = CapSolution::flat_disk(&c, Vec3::new(0.0, 0.0, 1.0)).unwrap();
        let m = build_cap_mesh(&c, &disk, 0.05).unwrap();
        let g = vertex_geometry(&m, &c).unwrap();
        let form = assemble_index_form(&m, &c, &g).unwrap();
        let cval = 1.3;
        let f = vec![cval; m.vertex_count()];
        let (j, _) = form.evaluate(&f);
        // boundary length of the inscribed polygon is slightly below 2π
        assert_relative_eq!(j, -2.0 * PI * cval * cval, max_relative = 2e-3);
    }

    #[test]
    fn hemisphere_vertical_normal_component_is_neutral() {
        // ζ = ν_z on the hemisphere: J(ζ) = 0 in the continuum
        let c = Container::floor(0.0).unwrap();
        let cap = CapSolution::with_radius(&c, 1.0, None).unwrap();
        let m = build_cap_mesh(&c, &cap, 0.045).unwrap();
        let g = vertex_geometry(&m, &c).unwrap();
        let form = assemble_index_form(&m, &c, &g).unwrap();
        let f: Vec<f64> = m.positions().iter().map(|p| p.z).collect();
        let (j, _) = form.evaluate(&f);
        // |J| small relative to each constituent term (∫|∇ζ|² = 4π/3)
        assert!(j.abs() < 0.1, "J(ν_z) = {j}");
    }
}
