//! Run reports: the externally consumed JSON output of an experiment.

use serde::{Deserialize, Serialize};

use capillary_core::energy::{HistoryRow, Termination};
use capillary_core::identities::ResidualReport;

use crate::spec::ExperimentSpec;

/// Schema version of [`RunReport`]; bump on breaking layout changes.
pub const SCHEMA_VERSION: &str = "1.0.0";

/// The published JSON schema the reports validate against.
pub const RUN_REPORT_SCHEMA: &str = include_str!("../schema/run_report.schema.json");

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvolveSummary {
    pub iterations: usize,
    pub termination: Termination,
    pub final_energy: f64,
    /// Multiplier of the final iterate (the CMC estimate), 1/length.
    pub lambda: f64,
    pub final_grad_norm: f64,
    pub volume_error_rel: f64,
    /// Perturbation magnitude of the initial condition (relative), recorded
    /// in place of a locality radius.
    pub perturbation_amplitude: f64,
    pub perturbation_seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SphericityVerdict {
    /// "sphere" or "flat".
    pub verdict: String,
    /// Fitted radius (absent for flat verdicts).
    pub radius: Option<f64>,
    /// RMS deviation, relative to the radius (or diameter when flat).
    pub rms: f64,
    /// Estimated contact angle in degrees (from the measured boundary
    /// frames), with its maximal deviation from arccos β.
    pub contact_angle_deg: f64,
    pub angle_dev_deg: f64,
    pub cmc_rel_stdev: f64,
    pub mean_curvature: f64,
    pub pass_sphere_rms: bool,
    pub pass_angle: bool,
    pub pass_cmc: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestFunctionValue {
    pub name: String,
    /// J(ζ) for the sampled test function.
    pub j_value: f64,
    /// Mass-weighted mean ∫ζ (the side condition).
    pub mean: f64,
    /// Sup norm of the sampled field.
    pub sup_norm: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StabilityReport {
    /// Smallest mean-zero eigenvalue of the index form.
    pub lambda_min: f64,
    /// Mass-weighted mean of the returned eigenvector (should be ~0).
    pub eigenvector_mass_mean: f64,
    pub test_functions: Vec<TestFunctionValue>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WedgeInfo {
    pub k: [f64; 3],
    pub magnitude: f64,
    /// True when |k| is at the classification theorem's boundary |k| = 1
    /// (within 1e-6); exact caps degenerate there.
    pub edge_hypothesis_boundary: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct Timings {
    pub total_s: f64,
    pub evolve_s: f64,
    pub identities_s: f64,
    pub stability_s: f64,
}

/// Everything an experiment produces. All lengths are unit-scale; residual
/// entries carry their normalization scale explicitly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: String,
    pub spec: ExperimentSpec,
    pub mesh_vertices: usize,
    pub mesh_faces: usize,
    pub max_edge_length: f64,
    pub evolve: Option<EvolveSummary>,
    pub residuals: Option<ResidualReport>,
    pub stability: Option<StabilityReport>,
    pub sphericity: Option<SphericityVerdict>,
    pub wedge: Option<WedgeInfo>,
    pub timings: Timings,
}

/// Write the iteration history as CSV.
pub fn write_history_csv(rows: &[HistoryRow], path: &std::path::Path) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["iteration", "energy", "volume_error", "grad_norm", "lambda"])?;
    for r in rows {
        w.write_record([
            r.iteration.to_string(),
            r.energy.to_string(),
            r.volume_error.to_string(),
            r.grad_norm.to_string(),
            r.lambda.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
