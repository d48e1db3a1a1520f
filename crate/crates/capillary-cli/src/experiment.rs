//! Experiment orchestration: build the initial drop, run the selected
//! suites, emit reports, histories, and meshes.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};

use capillary_core::caps::{wedge_k, CapError, CapSolution, WedgeVector};
use capillary_core::capmesh::build_cap_mesh;
use capillary_core::container::ContainerKind;
use capillary_core::energy::{evolve, volume_project_staged, EvolveConfig};
use capillary_core::eigen::EigenOptions;
use capillary_core::geometry::{vertex_geometry, VertexGeometry};
use capillary_core::identities::{fit_order, full_report, young_cmc_deviation, ResidualReport};
use capillary_core::perturb::perturb_mesh;
use capillary_core::pointwise::{laplace_defect_l2, robin_defect_max, sample_on_mesh, sup_norm};
use capillary_core::spherefit::fit_sphere;
use capillary_core::stability::assemble_index_form;
use capillary_core::{Container, TriMesh, Vec3};

use crate::io;
use crate::report::{
    EvolveSummary, RunReport, SphericityVerdict, StabilityReport, TestFunctionValue, Timings,
    WedgeInfo, SCHEMA_VERSION,
};
use crate::spec::{ExperimentSpec, InitialCondition, Suite};

pub struct RunOptions {
    pub out_dir: PathBuf,
    pub seed_override: Option<u64>,
    /// Skip writing files (used by tests that only need the report).
    pub write_outputs: bool,
}

impl RunOptions {
    pub fn new(out_dir: PathBuf) -> Self {
        Self { out_dir, seed_override: None, write_outputs: true }
    }
}

fn wedge_info(container: &Container) -> Result<Option<WedgeInfo>> {
    if container.kind() == ContainerKind::Ball {
        return Ok(None);
    }
    let kv = wedge_k(container)?;
    Ok(Some(WedgeInfo {
        k: [kv.k.x, kv.k.y, kv.k.z],
        magnitude: kv.magnitude,
        edge_hypothesis_boundary: (kv.magnitude - 1.0).abs() < 1e-6 || kv.magnitude > 1.0,
    }))
}

/// Discrete samples of the classification test functions on an arbitrary
/// near-stationary mesh, built from the measured per-vertex geometry.
fn test_functions(
    mesh: &TriMesh,
    container: &Container,
    geom: &VertexGeometry,
    kv: Option<&WedgeVector>,
) -> Vec<(String, Vec<f64>)> {
    let verts = mesh.positions();
    let h_bar = capillary_core::identities::area_weighted_mean_curvature(geom);
    match container.kind() {
        ContainerKind::Ball => {
            let cos_t = container.beta(0);
            let mut out = Vec::new();
            for (label, a) in [
                ("phi_a_x", Vec3::new(1.0, 0.0, 0.0)),
                ("phi_a_y", Vec3::new(0.0, 1.0, 0.0)),
                ("phi_a_z", Vec3::new(0.0, 0.0, 1.0)),
            ] {
                let f: Vec<f64> = (0..mesh.vertex_count())
                    .map(|v| {
                        let nu = geom.normals[v];
                        let x = verts[v];
                        let xa = capillary_core::fields::conformal_field(&a, &x);
                        2.0 * (x + nu * cos_t).dot(&a) - h_bar * xa.dot(&nu)
                    })
                    .collect();
                out.push((label.to_string(), f));
            }
            let phi: Vec<f64> = (0..mesh.vertex_count())
                .map(|v| {
                    let nu = geom.normals[v];
                    let x = verts[v];
                    0.5 * (x.norm_squared() - 1.0) * h_bar - 2.0 * (x.dot(&nu) + cos_t)
                })
                .collect();
            out.push(("phi_ball".to_string(), phi));
            out
        }
        _ => {
            let k = kv.map(|k| k.k).unwrap_or_else(Vec3::zeros);
            let zeta: Vec<f64> = (0..mesh.vertex_count())
                .map(|v| {
                    let nu = geom.normals[v];
                    2.0 - h_bar * verts[v].dot(&nu) + 2.0 * k.dot(&nu)
                })
                .collect();
            vec![("zeta".to_string(), zeta)]
        }
    }
}

fn build_initial(
    spec: &ExperimentSpec,
    container: &Container,
    seed_override: Option<u64>,
) -> Result<(TriMesh, f64, Option<u64>)> {
    let make_cap = || -> Result<CapSolution> {
        CapSolution::from_volume(container, spec.target_volume).map_err(|e| anyhow!(e))
    };
    match &spec.initial {
        InitialCondition::ExactCap => {
            let cap = make_cap()?;
            let mesh = build_cap_mesh(container, &cap, spec.target_edge_length)?;
            Ok((mesh, 0.0, None))
        }
        InitialCondition::PerturbedCap { seed, amplitude } => {
            let cap = make_cap()?;
            let mesh = build_cap_mesh(container, &cap, spec.target_edge_length)?;
            let seed = seed_override.unwrap_or(*seed);
            let scale = cap.radius().unwrap_or(1.0);
            let mut mesh = perturb_mesh(&mesh, container, *amplitude, scale, seed);
            volume_project_staged(&mut mesh, container, spec.target_volume, 1e-10)?;
            Ok((mesh, *amplitude, Some(seed)))
        }
        InitialCondition::MeshFile { path } => {
            let raw = match path.extension().and_then(|e| e.to_str()) {
                Some("off") => io::read_off(path)?,
                Some("obj") => io::read_obj(path)?,
                other => bail!("unsupported mesh extension {:?}", other),
            };
            let mut mesh = io::assemble_mesh(raw, Some(container))?;
            volume_project_staged(&mut mesh, container, spec.target_volume, 1e-10)?;
            Ok((mesh, 0.0, None))
        }
    }
}

/// Run one experiment. Deterministic given the seed; writes `report.json`,
/// `history.csv`, and the final mesh (`final.off`, `final.obj`) into the
/// output directory. Tolerance failures are reported, not fatal; suite
/// errors are.
pub fn run_experiment(spec: &ExperimentSpec, opts: &RunOptions) -> Result<RunReport> {
    spec.validate()?;
    let t_total = Instant::now();
    let container = spec.container.build()?;
    let wedge = wedge_info(&container)?;
    let mut timings = Timings::default();

    // |k| at the theorem's boundary: exact caps degenerate; report and stop
    // before construction instead of failing.
    let initial = build_initial(spec, &container, opts.seed_override);
    let (mesh, amplitude, seed) = match initial {
        Ok(x) => x,
        Err(e) => {
            let degenerate = e
                .downcast_ref::<CapError>()
                .map(|c| matches!(c, CapError::DegenerateWedge(_)))
                .unwrap_or(false)
                || e.downcast_ref::<capillary_core::capmesh::BuildError>()
                    .map(|b| {
                        matches!(
                            b,
                            capillary_core::capmesh::BuildError::Cap(CapError::DegenerateWedge(_))
                        )
                    })
                    .unwrap_or(false);
            if degenerate && wedge.as_ref().is_some_and(|w| w.edge_hypothesis_boundary) {
                let report = RunReport {
                    schema_version: SCHEMA_VERSION.to_string(),
                    spec: spec.clone(),
                    mesh_vertices: 0,
                    mesh_faces: 0,
                    max_edge_length: 0.0,
                    evolve: None,
                    residuals: None,
                    stability: None,
                    sphericity: None,
                    wedge,
                    timings: Timings { total_s: t_total.elapsed().as_secs_f64(), ..Timings::default() },
                };
                finish(spec, opts, &report, None, &[])?;
                return Ok(report);
            }
            return Err(e);
        }
    };

    let suites = spec.suites();
    let mut mesh = mesh;
    let mut evolve_summary = None;
    let mut history: Vec<capillary_core::energy::HistoryRow> = Vec::new();

    if suites.contains(&Suite::Evolve) {
        let t = Instant::now();
        let mut config = EvolveConfig::new(spec.target_volume);
        config.max_iterations = spec.evolve.max_iterations;
        config.gradient_tolerance = spec.evolve.gradient_tolerance;
        config.initial_step = spec.evolve.initial_step;
        let result = evolve(&mesh, &container, &config).map_err(|e| anyhow!(e))?;
        timings.evolve_s = t.elapsed().as_secs_f64();
        let last = result.history.last();
        evolve_summary = Some(EvolveSummary {
            iterations: result.history.len(),
            termination: result.termination,
            final_energy: last.map(|r| r.energy).unwrap_or(f64::NAN),
            lambda: result.lambda,
            final_grad_norm: last.map(|r| r.grad_norm).unwrap_or(f64::NAN),
            volume_error_rel: last.map(|r| r.volume_error).unwrap_or(f64::NAN),
            perturbation_amplitude: amplitude,
            perturbation_seed: seed,
        });
        history = result.history;
        mesh = result.mesh;
    }

    let geom = vertex_geometry(&mesh, &container).map_err(|e| anyhow!(e))?;
    let kv = match container.kind() {
        ContainerKind::Ball => None,
        _ => Some(wedge_k(&container)?),
    };

    let mut residuals: Option<ResidualReport> = None;
    if suites.contains(&Suite::Identities) {
        let t = Instant::now();
        residuals = Some(full_report(&mesh, &container, &geom, kv.as_ref())?);
        timings.identities_s = t.elapsed().as_secs_f64();
    }

    let mut stability = None;
    if suites.contains(&Suite::Stability) {
        let t = Instant::now();
        let form = assemble_index_form(&mesh, &container, &geom).map_err(|e| anyhow!(e))?;
        let (lambda_min, vector) =
            form.min_eigenvalue_mean_zero(&EigenOptions::default()).map_err(|e| anyhow!(e))?;
        let mass_mean: f64 =
            vector.iter().zip(&form.mass).map(|(v, m)| v * m).sum::<f64>();
        let test_functions = test_functions(&mesh, &container, &geom, kv.as_ref())
            .into_iter()
            .map(|(name, f)| {
                let (j_value, mean) = form.evaluate(&f);
                TestFunctionValue { name, j_value, mean, sup_norm: sup_norm(&f) }
            })
            .collect();
        stability = Some(StabilityReport {
            lambda_min,
            eigenvector_mass_mean: mass_mean,
            test_functions,
        });
        timings.stability_s = t.elapsed().as_secs_f64();
    }

    // sphericity verdict with pass/fail against the published tolerances
    let yc = young_cmc_deviation(&mesh, &container, &geom);
    let fit = fit_sphere(mesh.positions()).map_err(|e| anyhow!(e))?;
    let mean_angle = {
        let mut acc = 0.0;
        let mut n = 0usize;
        for v in 0..mesh.vertex_count() {
            if let Some(bf) = &geom.boundary[v] {
                if !bf.is_corner {
                    acc += bf.contact_angle;
                    n += 1;
                }
            }
        }
        if n > 0 {
            acc / n as f64
        } else {
            f64::NAN
        }
    };
    let tol = &spec.tolerances;
    let sphericity = SphericityVerdict {
        verdict: if fit.is_flat { "flat".to_string() } else { "sphere".to_string() },
        radius: if fit.is_flat { None } else { Some(fit.radius) },
        rms: fit.rms,
        contact_angle_deg: mean_angle.to_degrees(),
        angle_dev_deg: yc.angle_dev_max.to_degrees(),
        cmc_rel_stdev: yc.cmc_rel_stdev,
        mean_curvature: yc.mean_curvature,
        pass_sphere_rms: fit.rms < tol.sphere_rms,
        pass_angle: yc.angle_dev_max.to_degrees() < tol.angle_deg,
        pass_cmc: yc.cmc_rel_stdev < tol.cmc_rel_stdev,
    };

    timings.total_s = t_total.elapsed().as_secs_f64();
    let report = RunReport {
        schema_version: SCHEMA_VERSION.to_string(),
        spec: spec.clone(),
        mesh_vertices: mesh.vertex_count(),
        mesh_faces: mesh.face_count(),
        max_edge_length: mesh.max_edge_length(),
        evolve: evolve_summary,
        residuals,
        stability,
        sphericity: Some(sphericity),
        wedge,
        timings,
    };
    finish(spec, opts, &report, Some(&mesh), &history)?;
    Ok(report)
}

fn finish(
    spec: &ExperimentSpec,
    opts: &RunOptions,
    report: &RunReport,
    mesh: Option<&TriMesh>,
    history: &[capillary_core::energy::HistoryRow],
) -> Result<()> {
    if !opts.write_outputs {
        return Ok(());
    }
    let dir = opts.out_dir.join(&spec.name);
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let json = serde_json::to_string_pretty(report)?;
    std::fs::write(dir.join("report.json"), json)?;
    if !history.is_empty() {
        crate::report::write_history_csv(history, &dir.join("history.csv"))?;
    }
    if let Some(m) = mesh {
        io::write_off(m, &dir.join("final.off"))?;
        io::write_obj(m, &dir.join("final.obj"))?;
    }
    Ok(())
}

/// One row of a refinement ladder.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct LadderRow {
    pub level: usize,
    pub max_edge_length: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct LadderTable {
    pub names: Vec<String>,
    pub rows: Vec<LadderRow>,
    /// Fitted log-log convergence order per column (+∞ for identically
    /// machine-zero columns).
    pub orders: Vec<f64>,
}

/// Evaluate every applicable residual (plus the pointwise test-field
/// defects) on exactly sampled caps over a ladder of refinements of the
/// spec's edge length, halving per level.
pub fn refinement_ladder(spec: &ExperimentSpec, levels: usize, out: Option<&Path>) -> Result<LadderTable> {
    if !(2..=5).contains(&levels) {
        bail!("levels must lie in [2, 5]");
    }
    let container = spec.container.build()?;
    let cap = CapSolution::from_volume(&container, spec.target_volume)?;
    let kv = match container.kind() {
        ContainerKind::Ball => None,
        _ => Some(wedge_k(&container)?),
    };

    let mut names: Vec<String> = Vec::new();
    let mut rows: Vec<LadderRow> = Vec::new();
    for level in 0..levels {
        let h = spec.target_edge_length / (1 << level) as f64;
        let mesh = build_cap_mesh(&container, &cap, h)?;
        let geom = vertex_geometry(&mesh, &container).map_err(|e| anyhow!(e))?;
        let report = full_report(&mesh, &container, &geom, kv.as_ref())?;
        let mut row_names: Vec<String> = report.entries.iter().map(|e| e.name.clone()).collect();
        let mut values: Vec<f64> = report.entries.iter().map(|e| e.value).collect();

        // pointwise defects on the exactly sampled fields
        match container.kind() {
            ContainerKind::Ball => {
                if !cap.is_flat() {
                    let a = Vec3::new(1.0, 0.0, 0.0);
                    let phi = sample_on_mesh(&mesh, |x| cap.phi_a(&a, x).unwrap());
                    let rhs = sample_on_mesh(&mesh, |x| {
                        -cap.norm_h_squared() * cap.phi_a(&a, x).unwrap()
                    });
                    row_names.push("phi_a_laplace_defect_l2".into());
                    values.push(laplace_defect_l2(&mesh, &geom, &phi, &rhs));
                    let q: Vec<f64> = (0..mesh.vertex_count())
                        .map(|v| {
                            if geom.boundary[v].is_some() {
                                cap.q_at(&container, 0, &mesh.positions()[v]).unwrap()
                            } else {
                                0.0
                            }
                        })
                        .collect();
                    row_names.push("phi_a_robin_defect_max".into());
                    values.push(robin_defect_max(&mesh, &geom, &phi, &q));
                }
                let phi_ball = sample_on_mesh(&mesh, |x| cap.phi_ball(x).unwrap());
                row_names.push("phi_ball_sup".into());
                values.push(sup_norm(&phi_ball));
            }
            _ => {
                let kvv = kv.as_ref().unwrap();
                let zeta = sample_on_mesh(&mesh, |x| cap.zeta(kvv, x).unwrap());
                row_names.push("zeta_sup".into());
                values.push(sup_norm(&zeta));
                let rhs = vec![0.0; mesh.vertex_count()];
                row_names.push("zeta_laplace_defect_l2".into());
                values.push(laplace_defect_l2(&mesh, &geom, &zeta, &rhs));
            }
        }

        if names.is_empty() {
            names = row_names;
        }
        rows.push(LadderRow { level, max_edge_length: mesh.max_edge_length(), values });
    }

    let hs: Vec<f64> = rows.iter().map(|r| r.max_edge_length).collect();
    let orders: Vec<f64> = (0..names.len())
        .map(|c| {
            let col: Vec<f64> = rows.iter().map(|r| r.values[c]).collect();
            fit_order(&hs, &col)
        })
        .collect();

    let table = LadderTable { names, rows, orders };
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        write_ladder_csv(&table, &dir.join("ladder.csv"))?;
        std::fs::write(dir.join("ladder.json"), serde_json::to_string_pretty(&table)?)?;
    }
    Ok(table)
}

pub fn write_ladder_csv(table: &LadderTable, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["level".to_string(), "max_edge_length".to_string()];
    header.extend(table.names.iter().cloned());
    w.write_record(&header)?;
    for row in &table.rows {
        let mut rec = vec![row.level.to_string(), row.max_edge_length.to_string()];
        rec.extend(row.values.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    let mut rec = vec!["order".to_string(), "".to_string()];
    rec.extend(table.orders.iter().map(|v| v.to_string()));
    w.write_record(&rec)?;
    w.flush()?;
    Ok(())
}
