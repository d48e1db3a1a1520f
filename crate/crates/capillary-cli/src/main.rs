use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use rayon::prelude::*;

use capillary_cli::experiment::{refinement_ladder, run_experiment, RunOptions};
use capillary_cli::io;
use capillary_cli::spec::load_specs;

#[derive(Parser)]
#[command(name = "capillary", about = "Capillary drop experiments on triangulated surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiments of a spec file (evolve / identities / stability).
    Run {
        /// JSON spec file (one experiment or an array).
        #[arg(long)]
        spec: PathBuf,
        /// Output directory; each experiment writes into its own subfolder.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Override the perturbation seed of every experiment.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads for batch files (experiments run concurrently).
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Refinement ladder of identity residuals on exactly sampled caps.
    Ladder {
        #[arg(long)]
        spec: PathBuf,
        /// Refinement levels (2-5), halving the edge length per level.
        #[arg(long, default_value_t = 3)]
        levels: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Validate a mesh file against the container of a spec.
    CheckMesh {
        #[arg(long)]
        mesh: PathBuf,
        /// Spec providing the container (optional for closed meshes).
        #[arg(long)]
        spec: Option<PathBuf>,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run { spec, out, seed, threads } => {
            let specs = load_specs(&spec)?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads.max(1))
                .build()
                .context("building thread pool")?;
            let results: Vec<(String, Result<()>)> = pool.install(|| {
                specs
                    .par_iter()
                    .map(|s| {
                        let mut opts = RunOptions::new(out.clone());
                        opts.seed_override = seed;
                        let r = run_experiment(s, &opts).map(|_| ());
                        (s.name.clone(), r)
                    })
                    .collect()
            });
            let mut failed = 0;
            for (name, r) in &results {
                match r {
                    Ok(()) => println!("{name}: ok"),
                    Err(e) => {
                        failed += 1;
                        eprintln!("{name}: error: {e:#}");
                    }
                }
            }
            if failed > 0 {
                std::process::exit(1);
            }
            Ok(())
        }
        Command::Ladder { spec, levels, out } => {
            let specs = load_specs(&spec)?;
            let s = specs.first().context("spec file is empty")?;
            let table = refinement_ladder(s, levels, Some(&out))?;
            println!("{:<32} {:>10}", "residual", "order");
            for (name, order) in table.names.iter().zip(&table.orders) {
                println!("{name:<32} {order:>10.3}");
            }
            Ok(())
        }
        Command::CheckMesh { mesh, spec } => {
            let container = match &spec {
                Some(p) => Some(
                    load_specs(p)?
                        .first()
                        .context("spec file is empty")?
                        .container
                        .build()?,
                ),
                None => None,
            };
            let raw = match mesh.extension().and_then(|e| e.to_str()) {
                Some("off") => io::read_off(&mesh)?,
                Some("obj") => io::read_obj(&mesh)?,
                other => anyhow::bail!("unsupported mesh extension {:?}", other),
            };
            let m = io::assemble_mesh(raw, container.as_ref())?;
            println!(
                "ok: {} vertices, {} faces, {} boundary loop(s), min angle {:.2} deg, max edge {:.4}",
                m.vertex_count(),
                m.face_count(),
                m.boundary_loops().len(),
                m.min_triangle_angle().to_degrees(),
                m.max_edge_length()
            );
            if let Some(c) = &container {
                println!(
                    "enclosed volume {:.6}, area {:.6}",
                    m.enclosed_volume(c)?,
                    m.total_area()
                );
            }
            Ok(())
        }
    }
}
