//! Volume-constrained minimization of the free energy
//! `F = area(M) - Σᵢ βᵢ · wetted_areaᵢ`.
//!
//! The descent is projected gradient with backtracking: the volume-changing
//! component of the energy gradient is removed through the multiplier
//! `λ = <∇F, ∇V> / |∇V|²` (inner products in the inverse-mass metric, so
//! the step is the discrete L² gradient flow), a backtracking step is
//! taken with boundary vertices sliding on their facets, and the volume is
//! restored exactly by a 1D Newton correction along vertex normals.
//!
//! At a discrete stationary point `∇F = λ ∇V` pointwise, so the multiplier
//! of the final iterate estimates the constant mean curvature. The contact
//! angle is never prescribed anywhere in the descent: boundary vertices are
//! only constrained to their walls, and Young's law must emerge from
//! minimization.

#[cfg(not(feature = "std"))]
use num_traits::Float;

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::boundary::{loop_neighbors, wetted_area_gradients};
use crate::container::{Container, ContainerKind};
use crate::mesh::{MeshError, TriMesh};
use crate::Vec3;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvolveError {
    #[error("initial volume {volume} is more than 20% away from the target {target}")]
    VolumeTooFar { volume: f64, target: f64 },
    #[error("volume restoration did not converge in {iterations} iterations (residual {residual:.3e})")]
    ProjectionFailed { iterations: usize, residual: f64 },
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// Free energy `area - Σ βᵢ wettedᵢ`.
pub fn energy(mesh: &TriMesh, container: &Container) -> Result<f64, MeshError> {
    let (area, wetted) = mesh.surface_and_wetted_area(container)?;
    Ok(area - container.betas().iter().zip(&wetted).map(|(b, w)| b * w).sum::<f64>())
}

/// Exact ambient gradient of the discrete energy with respect to every
/// vertex position (no constraint projection applied).
pub fn energy_gradient(mesh: &TriMesh, container: &Container) -> Result<Vec<Vec3>, MeshError> {
    let verts = mesh.positions();
    let mut grad = vec![Vec3::zeros(); mesh.vertex_count()];
    for f in mesh.faces() {
        let [a, b, c] = [f[0] as usize, f[1] as usize, f[2] as usize];
        let n = (verts[b] - verts[a]).cross(&(verts[c] - verts[a]));
        let nn = n / n.norm();
        grad[a] += 0.5 * nn.cross(&(verts[c] - verts[b]));
        grad[b] += 0.5 * nn.cross(&(verts[a] - verts[c]));
        grad[c] += 0.5 * nn.cross(&(verts[b] - verts[a]));
    }
    let weights: Vec<f64> = container.betas().iter().map(|b| -b).collect();
    wetted_area_gradients(mesh, container, &weights, &mut grad)?;
    Ok(grad)
}

/// Exact ambient gradient of the enclosed volume.
pub fn volume_gradient(mesh: &TriMesh, container: &Container) -> Result<Vec<Vec3>, MeshError> {
    let verts = mesh.positions();
    let mut grad = vec![Vec3::zeros(); mesh.vertex_count()];
    for f in mesh.faces() {
        let [a, b, c] = [f[0] as usize, f[1] as usize, f[2] as usize];
        grad[a] += verts[b].cross(&verts[c]) / 6.0;
        grad[b] += verts[c].cross(&verts[a]) / 6.0;
        grad[c] += verts[a].cross(&verts[b]) / 6.0;
    }
    if container.kind() == ContainerKind::Ball {
        let weights = vec![1.0 / 3.0; container.facet_count()];
        wetted_area_gradients(mesh, container, &weights, &mut grad)?;
    }
    Ok(grad)
}

/// Project per-vertex vectors onto the walls' tangent spaces at constrained
/// vertices (interior rows pass through).
pub fn project_to_constraints(mesh: &TriMesh, container: &Container, field: &mut [Vec3]) {
    let verts = mesh.positions();
    for v in 0..mesh.vertex_count() {
        let facets = mesh.vertex_facets(v);
        if !facets.is_empty() {
            field[v] = container.tangent_project(facets, &verts[v], &field[v]);
        }
    }
}

/// Snap boundary vertices back onto their facets (plane projection, radial
/// for the ball). A no-op for interior vertices.
fn snap_to_facets(mesh: &TriMesh, container: &Container, positions: &mut [Vec3]) {
    for v in 0..positions.len() {
        for &f in mesh.vertex_facets(v) {
            positions[v] = container.project_to_facet(f as usize, &positions[v]);
        }
    }
}

/// Vertex normal estimates from incident face area vectors, boundary rows
/// projected onto the wall tangent space.
fn offset_directions(mesh: &TriMesh, container: &Container) -> Vec<Vec3> {
    let mut nrm = vec![Vec3::zeros(); mesh.vertex_count()];
    for f in 0..mesh.face_count() {
        let av = mesh.face_area_vector(f);
        for &v in &mesh.faces()[f] {
            nrm[v as usize] += av;
        }
    }
    for v in 0..mesh.vertex_count() {
        nrm[v] = nrm[v].normalize();
    }
    project_to_constraints(mesh, container, &mut nrm);
    nrm
}

/// Restore the enclosed volume to `target` by a single scalar offset of all
/// vertices along their (constraint-projected) normals, found by Newton
/// iteration. Returns the offset. The correction is local: the initial
/// volume must be within 20% of the target.
pub fn volume_project(
    mesh: &mut TriMesh,
    container: &Container,
    target: f64,
    rel_tol: f64,
) -> Result<f64, EvolveError> {
    let v0 = mesh.enclosed_volume(container)?;
    if (v0 - target).abs() > 0.2 * target {
        return Err(EvolveError::VolumeTooFar { volume: v0, target });
    }
    let dirs = offset_directions(mesh, container);
    let base = mesh.positions().to_vec();
    let constrained: Vec<(usize, Vec<u32>)> = (0..mesh.vertex_count())
        .filter(|&v| !mesh.vertex_facets(v).is_empty())
        .map(|v| (v, mesh.vertex_facets(v).to_vec()))
        .collect();
    let offset_positions = |s: f64| -> Vec<Vec3> {
        let mut pos: Vec<Vec3> = base.iter().zip(&dirs).map(|(p, d)| p + d * s).collect();
        for (v, fs) in &constrained {
            for &f in fs {
                pos[*v] = container.project_to_facet(f as usize, &pos[*v]);
            }
        }
        pos
    };
    let mut work = mesh.clone();

    let mut s = 0.0;
    let mut residual = v0 - target;
    for _ in 0..50 {
        if residual.abs() <= rel_tol * target {
            mesh.set_positions(offset_positions(s));
            return Ok(s);
        }
        // analytic dV/ds at the current offset
        let gv = volume_gradient(&work, container)?;
        let mut dvds: f64 = gv.iter().zip(&dirs).map(|(g, d)| g.dot(d)).sum();
        if dvds.abs() < 1e-300 {
            dvds = 1e-300;
        }
        s -= residual / dvds;
        work.set_positions(offset_positions(s));
        residual = work.enclosed_volume(container)? - target;
    }
    Err(EvolveError::ProjectionFailed { iterations: 50, residual })
}

/// Like [`volume_project`], but reaches distant targets through a chain of
/// intermediate ones so that every correction stays within the 20% locality
/// bound. Used when preparing initial meshes whose perturbation moved the
/// volume far off target.
pub fn volume_project_staged(
    mesh: &mut TriMesh,
    container: &Container,
    target: f64,
    rel_tol: f64,
) -> Result<(), EvolveError> {
    for _ in 0..64 {
        let v = mesh.enclosed_volume(container)?;
        if (v - target).abs() <= 0.15 * target {
            volume_project(mesh, container, target, rel_tol)?;
            return Ok(());
        }
        let step_target = if target > v { v * 1.15 } else { v * 0.85 };
        volume_project(mesh, container, step_target, rel_tol)?;
    }
    Err(EvolveError::ProjectionFailed { iterations: 64, residual: f64::NAN })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvolveConfig {
    pub target_volume: f64,
    pub max_iterations: usize,
    /// Stop when the constrained gradient norm (inverse-mass metric) drops
    /// below this.
    pub gradient_tolerance: f64,
    pub initial_step: f64,
    /// Backtracking shrink factor in (0, 1).
    pub step_shrink: f64,
    /// Armijo sufficient-decrease constant.
    pub sufficient_decrease: f64,
    /// Relative tolerance of the volume restoration.
    pub volume_restore_tolerance: f64,
    /// Quality floor: terminate when the smallest triangle angle (degrees)
    /// falls below this.
    pub min_triangle_angle_deg: f64,
}

impl EvolveConfig {
    pub fn new(target_volume: f64) -> Self {
        Self {
            target_volume,
            max_iterations: 20000,
            gradient_tolerance: 1e-4,
            initial_step: 2e-3,
            step_shrink: 0.5,
            sufficient_decrease: 1e-4,
            volume_restore_tolerance: 1e-10,
            min_triangle_angle_deg: 5.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    GradientTolerance,
    MaxIterations,
    LineSearchStagnation,
    MeshDegenerate,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HistoryRow {
    pub iteration: usize,
    pub energy: f64,
    pub volume_error: f64,
    pub grad_norm: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone)]
pub struct EvolveResult {
    pub mesh: TriMesh,
    /// Multiplier of the final iterate; the CMC estimate.
    pub lambda: f64,
    pub history: Vec<HistoryRow>,
    pub termination: Termination,
}

/// Volume-constrained projected gradient descent with backtracking.
pub fn evolve(
    mesh: &TriMesh,
    container: &Container,
    config: &EvolveConfig,
) -> Result<EvolveResult, EvolveError> {
    let mut mesh = mesh.clone();
    volume_project(&mut mesh, container, config.target_volume, config.volume_restore_tolerance)?;

    let mut current_energy = energy(&mesh, container)?;
    let mut step = config.initial_step;
    let mut history = Vec::new();
    let mut lambda = 0.0;
    let mut termination = Termination::MaxIterations;
    let angle_floor = config.min_triangle_angle_deg.to_radians();

    let nb = loop_neighbors(&mesh);
    for iteration in 0..config.max_iterations {
        let areas = mesh.mixed_vertex_areas();
        let mut g = energy_gradient(&mesh, container)?;
        project_to_constraints(&mesh, container, &mut g);
        let mut gv = volume_gradient(&mesh, container)?;
        project_to_constraints(&mesh, container, &mut gv);

        // multiplier in the inverse-mass metric
        let mut num = 0.0;
        let mut den = 0.0;
        for v in 0..mesh.vertex_count() {
            num += g[v].dot(&gv[v]) / areas[v];
            den += gv[v].norm_squared() / areas[v];
        }
        lambda = num / den.max(1e-300);

        // Descent direction: mass-preconditioned constrained gradient.
        // Single-facet contact-line vertices additionally lose their
        // component along the loop tangent: that motion only reparametrizes
        // the discrete contact line, and the inscribed-polygon area makes
        // it a spurious descent mode that bunches boundary vertices.
        // Wedge-edge corners keep it (sliding along the edge moves the
        // drop, which is a real degree of freedom).
        let verts = mesh.positions();
        let mut dsq = 0.0;
        let dir: Vec<Vec3> = (0..mesh.vertex_count())
            .map(|v| {
                let r = g[v] - gv[v] * lambda;
                let mut d = -(r / areas[v]);
                if mesh.vertex_facets(v).len() == 1 {
                    if let Some((prev, next)) = nb[v] {
                        let t_raw = verts[next as usize] - verts[prev as usize];
                        let t = container
                            .tangent_project(mesh.vertex_facets(v), &verts[v], &t_raw)
                            .normalize();
                        d -= t * t.dot(&d);
                    }
                }
                dsq += -d.dot(&(g[v] - gv[v] * lambda));
                d
            })
            .collect();
        let grad_norm = dsq.max(0.0).sqrt();

        if grad_norm < config.gradient_tolerance {
            termination = Termination::GradientTolerance;
            history.push(HistoryRow {
                iteration,
                energy: current_energy,
                volume_error: relative_volume_error(&mesh, container, config)?,
                grad_norm,
                lambda,
            });
            break;
        }

        // backtracking with exact volume restoration per trial
        let base = mesh.positions().to_vec();
        let mut accepted = false;
        while step >= 1e-14 {
            let mut pos: Vec<Vec3> =
                base.iter().zip(&dir).map(|(p, d)| p + d * step).collect();
            snap_to_facets(&mesh, container, &mut pos);
            let mut trial = mesh.clone();
            trial.set_positions(pos);
            if volume_project(
                &mut trial,
                container,
                config.target_volume,
                config.volume_restore_tolerance,
            )
            .is_err()
            {
                step *= config.step_shrink;
                continue;
            }
            let trial_energy = energy(&trial, container)?;
            if trial_energy <= current_energy - config.sufficient_decrease * step * dsq {
                if trial.min_triangle_angle() < angle_floor {
                    termination = Termination::MeshDegenerate;
                    history.push(HistoryRow {
                        iteration,
                        energy: current_energy,
                        volume_error: relative_volume_error(&mesh, container, config)?,
                        grad_norm,
                        lambda,
                    });
                    return Ok(EvolveResult { mesh, lambda, history, termination });
                }
                mesh = trial;
                current_energy = trial_energy;
                accepted = true;
                break;
            }
            step *= config.step_shrink;
        }
        if !accepted {
            termination = Termination::LineSearchStagnation;
            history.push(HistoryRow {
                iteration,
                energy: current_energy,
                volume_error: relative_volume_error(&mesh, container, config)?,
                grad_norm,
                lambda,
            });
            break;
        }
        history.push(HistoryRow {
            iteration,
            energy: current_energy,
            volume_error: relative_volume_error(&mesh, container, config)?,
            grad_norm,
            lambda,
        });
        step = (step * 1.7).min(config.initial_step * 64.0);
    }

    Ok(EvolveResult { mesh, lambda, history, termination })
}

fn relative_volume_error(
    mesh: &TriMesh,
    container: &Container,
    config: &EvolveConfig,
) -> Result<f64, EvolveError> {
    Ok((mesh.enclosed_volume(container)? - config.target_volume).abs() / config.target_volume)
}
