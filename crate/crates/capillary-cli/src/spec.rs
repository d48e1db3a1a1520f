//! Experiment specifications (JSON).

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use capillary_core::{Container, Vec3};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ContainerSpec {
    HalfSpace {
        /// Outward unit normal of the wall (defaults to the floor `-z`).
        #[serde(default = "default_floor_normal")]
        normal: [f64; 3],
        beta: f64,
    },
    Wedge {
        normals: Vec<[f64; 3]>,
        betas: Vec<f64>,
    },
    Ball {
        beta: f64,
    },
}

fn default_floor_normal() -> [f64; 3] {
    [0.0, 0.0, -1.0]
}

impl ContainerSpec {
    pub fn build(&self) -> Result<Container> {
        let v = |a: &[f64; 3]| Vec3::new(a[0], a[1], a[2]);
        Ok(match self {
            ContainerSpec::HalfSpace { normal, beta } => Container::half_space(v(normal), *beta)?,
            ContainerSpec::Wedge { normals, betas } => {
                Container::wedge(normals.iter().map(v).collect(), betas.clone())?
            }
            ContainerSpec::Ball { beta } => Container::unit_ball(*beta)?,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum InitialCondition {
    /// Exact cap (or flat disk) of the target volume.
    ExactCap,
    /// Exact cap displaced by a smooth seeded normal field.
    PerturbedCap { seed: u64, amplitude: f64 },
    /// Start from a mesh file (OFF or OBJ by extension).
    MeshFile { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Evolve,
    Identities,
    Stability,
}

/// Pass/fail thresholds published with every report. The defaults are tied
/// to the measured refinement orders at the default resolution (~10k faces).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Contact-angle deviation from arccos β, degrees.
    pub angle_deg: f64,
    /// Relative stdev of the mean curvature.
    pub cmc_rel_stdev: f64,
    /// Sphere-fit RMS (relative to the fitted radius).
    pub sphere_rms: f64,
    /// Integral-identity residual bound.
    pub identity_residual: f64,
    /// Relative multiplier error against the analytic curvature.
    pub lambda_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            angle_deg: 1.0,
            cmc_rel_stdev: 0.02,
            sphere_rms: 1e-3,
            identity_residual: 1e-2,
            lambda_rel: 0.02,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct EvolveOverrides {
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub initial_step: f64,
}

impl Default for EvolveOverrides {
    fn default() -> Self {
        Self { max_iterations: 8000, gradient_tolerance: 2e-3, initial_step: 2e-3 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub name: String,
    pub container: ContainerSpec,
    pub target_volume: f64,
    pub initial: InitialCondition,
    /// Target edge length of generated cap meshes.
    #[serde(default = "default_edge")]
    pub target_edge_length: f64,
    /// Suites to run; all three when omitted.
    #[serde(default)]
    pub suites: Option<Vec<Suite>>,
    #[serde(default)]
    pub evolve: EvolveOverrides,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn default_edge() -> f64 {
    0.05
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.target_volume > 0.0) {
            bail!("target_volume must be positive");
        }
        if !(self.target_edge_length > 0.0) {
            bail!("target_edge_length must be positive");
        }
        match &self.initial {
            InitialCondition::PerturbedCap { amplitude, .. } => {
                if !(0.0..=0.2).contains(amplitude) {
                    bail!("perturbation amplitude must lie in [0, 0.2]");
                }
            }
            InitialCondition::MeshFile { path } => {
                if !path.exists() {
                    bail!("mesh file {} does not exist", path.display());
                }
            }
            InitialCondition::ExactCap => {}
        }
        Ok(())
    }

    pub fn suites(&self) -> Vec<Suite> {
        self.suites
            .clone()
            .unwrap_or_else(|| vec![Suite::Evolve, Suite::Identities, Suite::Stability])
    }
}

/// A spec file holds one experiment or a batch of them.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpecFile {
    One(Box<ExperimentSpec>),
    Batch(Vec<ExperimentSpec>),
}

impl SpecFile {
    pub fn into_vec(self) -> Vec<ExperimentSpec> {
        match self {
            SpecFile::One(s) => vec![*s],
            SpecFile::Batch(v) => v,
        }
    }
}

pub fn load_specs(path: &std::path::Path) -> Result<Vec<ExperimentSpec>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file: SpecFile =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let specs = file.into_vec();
    for s in &specs {
        s.validate().with_context(|| format!("spec {:?}", s.name))?;
    }
    Ok(specs)
}
