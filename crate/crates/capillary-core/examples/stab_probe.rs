use capillary_core::{Container, Vec3};
use capillary_core::caps::{wedge_k, CapSolution};
use capillary_core::capmesh::{build_cap_mesh, disjoint_cap_pair};
use capillary_core::eigen::EigenOptions;
use capillary_core::energy::{evolve, volume_project_staged, EvolveConfig};
use capillary_core::geometry::vertex_geometry;
use capillary_core::perturb::perturb_mesh;
use capillary_core::stability::assemble_index_form;
use std::time::Instant;

fn main() {
    // converged half-space cap θ=60°
    for (label, beta, h) in [("hs60", 0.5f64, 0.045), ("hs90", 0.0, 0.045)] {
        let c = Container::floor(beta).unwrap();
        let cap = CapSolution::with_radius(&c, 1.0, None).unwrap();
        let m = build_cap_mesh(&c, &cap, h).unwrap();
        let mut m = perturb_mesh(&m, &c, 0.05, 1.0, 17);
        volume_project_staged(&mut m, &c, cap.volume, 1e-10).unwrap();
        let mut cfg = EvolveConfig::new(cap.volume);
        cfg.max_iterations = 6000;
        cfg.gradient_tolerance = 2e-3;
        let r = evolve(&m, &c, &cfg).unwrap();
        let g = vertex_geometry(&r.mesh, &c).unwrap();
        let form = assemble_index_form(&r.mesh, &c, &g).unwrap();
        let t = Instant::now();
        let (lmin, v) = form.min_eigenvalue_mean_zero(&EigenOptions::default()).unwrap();
        let kv = wedge_k(&c).unwrap();
        // discrete zeta on the converged mesh
        let hbar = capillary_core::identities::area_weighted_mean_curvature(&g);
        let zeta: Vec<f64> = (0..r.mesh.vertex_count()).map(|vi| {
            let nu = g.normals[vi];
            2.0 - hbar * r.mesh.positions()[vi].dot(&nu) + 2.0 * kv.k.dot(&nu)
        }).collect();
        let (j, mean) = form.evaluate(&zeta);
        let vmean: f64 = v.iter().zip(&form.mass).map(|(a, b)| a * b).sum();
        println!("{label}: h={h} lambda_min={lmin:.4e} (eig t={:.1}s) J(zeta)={j:.3e} mean(zeta)={mean:.2e} sup(zeta)={:.2e} vmean={vmean:.1e}",
            t.elapsed().as_secs_f64(),
            zeta.iter().fold(0.0f64, |m, x| m.max(x.abs())));
    }
    // flat disk
    {
        let c = Container::unit_ball(0.0).unwrap();
        let disk = CapSolution::flat_disk(&c, Vec3::new(0.0, 0.0, 1.0)).unwrap();
        let m = build_cap_mesh(&c, &disk, 0.05).unwrap();
        let g = vertex_geometry(&m, &c).unwrap();
        let form = assemble_index_form(&m, &c, &g).unwrap();
        let (lmin, _) = form.min_eigenvalue_mean_zero(&EigenOptions::default()).unwrap();
        println!("exact disk: lambda_min={lmin:.4e}");
    }
    // disjoint pair, ladder of resolutions
    {
        let c = Container::floor(0.5).unwrap();
        let cap = CapSolution::from_volume(&c, 0.3).unwrap();
        for h in [0.2, 0.1, 0.05] {
            let pair = disjoint_cap_pair(&c, &cap, h * cap.radius().unwrap(), 3.0).unwrap();
            let g = vertex_geometry(&pair, &c).unwrap();
            let form = assemble_index_form(&pair, &c, &g).unwrap();
            let (lmin, _) = form.min_eigenvalue_mean_zero(&EigenOptions::default()).unwrap();
            println!("pair h={h}: n={} lambda_min={lmin:.4e}", pair.vertex_count());
        }
    }
}
