//! Integration tests of the experiment driver: reports, reproducibility,
//! schema conformance, ladder output, and the command-line binary.

use std::path::Path;
use std::process::Command;

use serde_json::Value;

use capillary_cli::experiment::{refinement_ladder, run_experiment, RunOptions};
use capillary_cli::report::RUN_REPORT_SCHEMA;
use capillary_cli::spec::{
    ContainerSpec, EvolveOverrides, ExperimentSpec, InitialCondition, Suite, Tolerances,
};

fn quick_spec(name: &str) -> ExperimentSpec {
    ExperimentSpec {
        name: name.to_string(),
        container: ContainerSpec::HalfSpace { normal: [0.0, 0.0, -1.0], beta: 0.5 },
        target_volume: 5.0 * std::f64::consts::PI / 24.0,
        initial: InitialCondition::PerturbedCap { seed: 7, amplitude: 0.03 },
        target_edge_length: 0.12,
        suites: None,
        evolve: EvolveOverrides {
            max_iterations: 300,
            gradient_tolerance: 5e-2,
            initial_step: 2e-3,
        },
        tolerances: Tolerances::default(),
    }
}

/// Minimal JSON-schema checker covering the subset used by the published
/// schema: type, required, properties, items, enum, minItems/maxItems.
fn validate(schema: &Value, value: &Value, path: &str, errors: &mut Vec<String>) {
    if let Some(types) = schema.get("type") {
        let allowed: Vec<&str> = match types {
            Value::String(s) => vec![s.as_str()],
            Value::Array(a) => a.iter().filter_map(|t| t.as_str()).collect(),
            _ => vec![],
        };
        let actual = match value {
            Value::Null => "null",
            Value::Bool(_) => "boolean",
            Value::Number(n) => {
                if n.is_i64() || n.is_u64() {
                    "integer"
                } else {
                    "number"
                }
            }
            Value::String(_) => "string",
            Value::Array(_) => "array",
            Value::Object(_) => "object",
        };
        let ok = allowed.iter().any(|t| {
            *t == actual || (*t == "number" && actual == "integer")
        });
        if !ok {
            errors.push(format!("{path}: expected {allowed:?}, got {actual}"));
            return;
        }
    }
    if let Some(en) = schema.get("enum").and_then(|e| e.as_array()) {
        if !en.contains(value) {
            errors.push(format!("{path}: {value} not in enum"));
        }
    }
    if let Value::Object(obj) = value {
        if let Some(req) = schema.get("required").and_then(|r| r.as_array()) {
            for key in req.iter().filter_map(|k| k.as_str()) {
                if !obj.contains_key(key) {
                    errors.push(format!("{path}: missing required key {key}"));
                }
            }
        }
        if let Some(props) = schema.get("properties").and_then(|p| p.as_object()) {
            for (key, sub) in props {
                if let Some(v) = obj.get(key) {
                    validate(sub, v, &format!("{path}.{key}"), errors);
                }
            }
        }
    }
    if let Value::Array(arr) = value {
        if let Some(items) = schema.get("items") {
            for (i, v) in arr.iter().enumerate() {
                validate(items, v, &format!("{path}[{i}]"), errors);
            }
        }
        if let Some(min) = schema.get("minItems").and_then(|m| m.as_u64()) {
            if (arr.len() as u64) < min {
                errors.push(format!("{path}: fewer than {min} items"));
            }
        }
        if let Some(max) = schema.get("maxItems").and_then(|m| m.as_u64()) {
            if (arr.len() as u64) > max {
                errors.push(format!("{path}: more than {max} items"));
            }
        }
    }
}

fn assert_schema_valid(report_json: &str) {
    let schema: Value = serde_json::from_str(RUN_REPORT_SCHEMA).unwrap();
    let value: Value = serde_json::from_str(report_json).unwrap();
    let mut errors = Vec::new();
    validate(&schema, &value, "$", &mut errors);
    assert!(errors.is_empty(), "schema violations: {errors:#?}");
}

#[test]
fn run_experiment_produces_valid_report_and_files() {
    let dir = tempfile::tempdir().unwrap();
    let spec = quick_spec("smoke");
    let opts = RunOptions::new(dir.path().to_path_buf());
    let report = run_experiment(&spec, &opts).unwrap();

    assert_eq!(report.schema_version, "1.0.0");
    assert!(report.evolve.is_some());
    assert!(report.residuals.is_some());
    assert!(report.stability.is_some());
    let e = report.evolve.as_ref().unwrap();
    assert!(e.volume_error_rel < 1e-9);
    assert_eq!(e.perturbation_seed, Some(7));

    let out = dir.path().join("smoke");
    for f in ["report.json", "history.csv", "final.off", "final.obj"] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    let text = std::fs::read_to_string(out.join("report.json")).unwrap();
    assert_schema_valid(&text);

    // the history CSV has the documented columns
    let hist = std::fs::read_to_string(out.join("history.csv")).unwrap();
    assert!(hist.starts_with("iteration,energy,volume_error,grad_norm,lambda"));
}

#[test]
fn reports_are_reproducible_modulo_timings() {
    let run = |dir: &Path| -> Value {
        let spec = quick_spec("repro");
        let opts = RunOptions::new(dir.to_path_buf());
        run_experiment(&spec, &opts).unwrap();
        let text = std::fs::read_to_string(dir.join("repro/report.json")).unwrap();
        let mut v: Value = serde_json::from_str(&text).unwrap();
        v.as_object_mut().unwrap().insert("timings".into(), Value::Null);
        v
    };
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    let (a, b) = (run(d1.path()), run(d2.path()));
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
}

#[test]
fn different_seed_changes_the_outcome() {
    let dir = tempfile::tempdir().unwrap();
    let spec = quick_spec("seeded");
    let mut opts = RunOptions::new(dir.path().to_path_buf());
    opts.write_outputs = false;
    let a = run_experiment(&spec, &opts).unwrap();
    opts.seed_override = Some(8);
    let b = run_experiment(&spec, &opts).unwrap();
    let (ea, eb) = (a.evolve.unwrap(), b.evolve.unwrap());
    assert_eq!(eb.perturbation_seed, Some(8));
    assert_ne!(ea.final_energy, eb.final_energy);
}

#[test]
fn unit_k_wedge_runs_and_flags_the_theorem_boundary() {
    let dir = tempfile::tempdir().unwrap();
    let spec = ExperimentSpec {
        name: "wedge-unit-k".to_string(),
        container: ContainerSpec::Wedge {
            normals: vec![[-1.0, 0.0, 0.0], [0.0, -1.0, 0.0]],
            betas: vec![0.6, 0.8],
        },
        target_volume: 0.3,
        initial: InitialCondition::ExactCap,
        target_edge_length: 0.1,
        suites: None,
        evolve: EvolveOverrides::default(),
        tolerances: Tolerances::default(),
    };
    let opts = RunOptions::new(dir.path().to_path_buf());
    let report = run_experiment(&spec, &opts).unwrap();
    let w = report.wedge.expect("wedge info present");
    assert!(w.edge_hypothesis_boundary, "|k| = 1 must be flagged");
    assert!((w.magnitude - 1.0).abs() < 1e-9);
    // no mesh was constructible; the run still reports cleanly
    assert_eq!(report.mesh_vertices, 0);
    let text =
        std::fs::read_to_string(dir.path().join("wedge-unit-k/report.json")).unwrap();
    assert_schema_valid(&text);
}

#[test]
fn ball_identities_on_exact_disk_are_tiny() {
    let dir = tempfile::tempdir().unwrap();
    let spec = ExperimentSpec {
        name: "disk".to_string(),
        container: ContainerSpec::Ball { beta: 0.0 },
        target_volume: 2.0 * std::f64::consts::PI / 3.0,
        initial: InitialCondition::ExactCap,
        target_edge_length: 0.08,
        suites: Some(vec![Suite::Identities]),
        evolve: EvolveOverrides::default(),
        tolerances: Tolerances::default(),
    };
    let mut opts = RunOptions::new(dir.path().to_path_buf());
    opts.write_outputs = false;
    let report = run_experiment(&spec, &opts).unwrap();
    let res = report.residuals.unwrap();
    // flat disk: Minkowski and balancing vanish to rounding on the exact
    // mesh; Young deviation is zero because ν is exactly vertical
    assert!(res.get("minkowski_ball").unwrap() < 1e-10);
    assert!(res.get("balancing_facet_0").unwrap() < 1e-10);
    assert!(res.get("young_angle_dev_max").unwrap() < 1e-8);
    let s = report.sphericity.unwrap();
    assert_eq!(s.verdict, "flat");
}

#[test]
fn ladder_reports_orders_and_zero_rows() {
    let spec = ExperimentSpec {
        name: "ladder".to_string(),
        container: ContainerSpec::HalfSpace { normal: [0.0, 0.0, -1.0], beta: 0.5 },
        target_volume: 5.0 * std::f64::consts::PI / 24.0,
        initial: InitialCondition::ExactCap,
        target_edge_length: 0.2,
        suites: None,
        evolve: EvolveOverrides::default(),
        tolerances: Tolerances::default(),
    };
    let dir = tempfile::tempdir().unwrap();
    let table = refinement_ladder(&spec, 2, Some(dir.path())).unwrap();
    assert!(dir.path().join("ladder.csv").exists());
    assert!(dir.path().join("ladder.json").exists());
    let zeta_sup = table.names.iter().position(|n| n == "zeta_sup").unwrap();
    assert!(table.orders[zeta_sup].is_infinite(), "exact field rows are machine zero");
    for row in &table.rows {
        assert!(row.values[zeta_sup] < 1e-12);
    }
    let mink = table.names.iter().position(|n| n == "minkowski_wedge").unwrap();
    assert!(table.orders[mink] > 0.8, "Minkowski order {}", table.orders[mink]);

    assert!(refinement_ladder(&spec, 1, None).is_err());
    assert!(refinement_ladder(&spec, 6, None).is_err());
}

#[test]
fn cli_binary_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let spec_path = dir.path().join("spec.json");
    let spec = quick_spec("bin");
    std::fs::write(&spec_path, serde_json::to_string_pretty(&spec).unwrap()).unwrap();

    let bin = env!("CARGO_BIN_EXE_capillary");
    let out = Command::new(bin)
        .args(["run", "--spec"])
        .arg(&spec_path)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("bin: ok"));

    // check-mesh on the produced OFF file against the same spec
    let mesh_path = dir.path().join("out/bin/final.off");
    let out = Command::new(bin)
        .args(["check-mesh", "--mesh"])
        .arg(&mesh_path)
        .arg("--spec")
        .arg(&spec_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("ok:"), "{text}");

    // and the ladder subcommand
    let out = Command::new(bin)
        .args(["ladder", "--spec"])
        .arg(&spec_path)
        .args(["--levels", "2", "--out"])
        .arg(dir.path().join("ladder"))
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn mesh_file_initial_condition_runs() {
    // write an exact cap, then start an identities-only run from the file
    let dir = tempfile::tempdir().unwrap();
    let container = capillary_core::Container::floor(0.0).unwrap();
    let cap = capillary_core::caps::CapSolution::with_radius(&container, 1.0, None).unwrap();
    let mesh = capillary_core::capmesh::build_cap_mesh(&container, &cap, 0.1).unwrap();
    let mesh_path = dir.path().join("start.obj");
    capillary_cli::io::write_obj(&mesh, &mesh_path).unwrap();

    let spec = ExperimentSpec {
        name: "from-file".to_string(),
        container: ContainerSpec::HalfSpace { normal: [0.0, 0.0, -1.0], beta: 0.0 },
        target_volume: cap.volume,
        initial: InitialCondition::MeshFile { path: mesh_path },
        target_edge_length: 0.1,
        suites: Some(vec![Suite::Identities]),
        evolve: EvolveOverrides::default(),
        tolerances: Tolerances::default(),
    };
    let mut opts = RunOptions::new(dir.path().to_path_buf());
    opts.write_outputs = false;
    let report = run_experiment(&spec, &opts).unwrap();
    assert!(report.residuals.is_some());
    assert_eq!(report.mesh_vertices, mesh.vertex_count());
}
