use capillary_core::{Container, Vec3};
use capillary_core::caps::CapSolution;
use capillary_core::capmesh::build_cap_mesh;
use capillary_core::energy::{evolve, volume_project_staged, EvolveConfig};
use capillary_core::geometry::vertex_geometry;
use capillary_core::identities::young_cmc_deviation;
use capillary_core::perturb::perturb_mesh;
use capillary_core::spherefit::fit_sphere;
use std::time::Instant;

fn run(name: &str, c: &Container, cap: &CapSolution, h: f64, seed: u64, max_iter: usize, tol: f64) {
    let m = build_cap_mesh(c, cap, h).unwrap();
    let scale = cap.radius().unwrap_or(1.0);
    let mut m = perturb_mesh(&m, c, 0.05, scale, seed);
    volume_project_staged(&mut m, c, cap.volume, 1e-10).unwrap();
    let mut cfg = EvolveConfig::new(cap.volume);
    cfg.max_iterations = max_iter;
    cfg.gradient_tolerance = tol;
    let t0 = Instant::now();
    let r = evolve(&m, c, &cfg).unwrap();
    let dt = t0.elapsed().as_secs_f64();
    let g = vertex_geometry(&r.mesh, c).unwrap();
    let yc = young_cmc_deviation(&r.mesh, c, &g);
    let fit = fit_sphere(r.mesh.positions()).unwrap();
    let h_exact = cap.mean_curvature();
    let lam_err = if h_exact > 0.0 { 100.0 * (r.lambda - h_exact).abs() / h_exact } else { r.lambda.abs() };
    println!("{name}: iters={} term={:?} t={dt:.1}s | rms={:.2e} flat={} angle_dev={:.3}deg cmc_stdev={:.2}% lambda_err={:.2}%",
        r.history.len(), r.termination, fit.rms, fit.is_flat,
        yc.angle_dev_max.to_degrees(), 100.0 * yc.cmc_rel_stdev, lam_err);
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let h: f64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(0.05);
    let iters: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(4000);
    let tol: f64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(5e-3);

    for (name, beta, seed) in [("halfspace-90", 0.0, 42u64), ("halfspace-60", 0.5, 43), ("halfspace-120", -0.5, 44)] {
        let c = Container::floor(beta).unwrap();
        let cap = CapSolution::with_radius(&c, 1.0, None).unwrap();
        run(name, &c, &cap, h, seed, iters, tol);
    }
    {
        let c = Container::unit_ball(0.5).unwrap();
        let cap = CapSolution::with_radius(&c, 0.7, None).unwrap();
        run("ball-60", &c, &cap, h * 0.7, 45, iters, tol);
    }
    {
        let c = Container::unit_ball(0.0).unwrap();
        let disk = CapSolution::flat_disk(&c, Vec3::new(0.0, 0.0, 1.0)).unwrap();
        run("ball-90-flat", &c, &disk, h, 46, iters, tol);
    }
    {
        let c = Container::wedge(
            vec![Vec3::new(-1.0, 0.0, 0.0), Vec3::new(0.0, -1.0, 0.0)],
            vec![0.0, 0.0],
        ).unwrap();
        let cap = CapSolution::with_radius(&c, 1.0, None).unwrap();
        run("wedge-quarter", &c, &cap, h, 47, iters, tol);
    }
}
