use std::time::Instant;

use fsge_core::fluid::*;

fn tube_errors(f: &FluidParams, nz: usize, nr: usize) -> (f64, f64, f64) {
    let g = build_grid(15.0, &[0.647, 0.647], nz, nr, DEFAULT_STRETCH).unwrap();
    let t = Instant::now();
    let s = solve_steady_flow(&g, f, &SolverOptions::default(), None).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let q = f.inflow_rate(0.647);
    let (dp, tau) = poiseuille(q, f.mu, 0.647, 1.0);
    let mut e_tau = 0.0_f64;
    let mut e_grad = 0.0_f64;
    for i in nz / 10..=nz - nz / 10 {
        e_tau = e_tau.max((s.wall_shear[i] / tau - 1.0).abs());
    }
    for i in nz / 10..nz - nz / 10 {
        let grad = (s.wall_pressure[i] - s.wall_pressure[i + 1]) / (g.z_nodes[i + 1] - g.z_nodes[i]);
        e_grad = e_grad.max((grad / dp - 1.0).abs());
    }
    (e_tau, e_grad, secs)
}

#[test]
fn tube_benchmark_at_acceptance_resolution() {
    let (e_tau, e_grad, secs) = tube_errors(&FluidParams::default(), 200, 32);
    println!("tau err {e_tau:.3e} grad err {e_grad:.3e} in {secs:.2}s");
    assert!(e_tau < 0.02 && e_grad < 0.02);
    assert!(secs < 60.0);
}

#[test]
fn refinement_sequence() {
    let f = FluidParams::default();
    let errs: Vec<f64> = [8, 16, 32].iter().map(|&nr| tube_errors(&f, 60, nr).0).collect();
    println!("{errs:?}");
    assert!(errs[1] < errs[0] && errs[2] < errs[1]);
}

#[test]
fn aneurysm_bump_trends() {
    let f = FluidParams::default();
    let n = 200;
    let prof: Vec<f64> = (0..=n)
        .map(|k| {
            let z = 15.0 * k as f64 / n as f64;
            0.647 * (1.0 + (-((z - 7.5) / 3.75).powi(2)).exp())
        })
        .collect();
    let g = build_grid(15.0, &prof, n, 32, DEFAULT_STRETCH).unwrap();
    let s = solve_steady_flow(&g, &f, &SolverOptions::default(), None).unwrap();
    let p = &s.wall_pressure;
    let mean = p.iter().sum::<f64>() / p.len() as f64;
    let p_var = (p.iter().cloned().fold(f64::MIN, f64::max) - p.iter().cloned().fold(f64::MAX, f64::min)) / mean;
    let u = s.centerline_velocity();
    let u_var = (u.iter().cloned().fold(f64::MIN, f64::max) - u.iter().cloned().fold(f64::MAX, f64::min))
        / u.iter().cloned().fold(f64::MIN, f64::max);
    println!("pressure variation {p_var:.4}, centerline variation {u_var:.4}, residual {:.2e}", s.converged_residual);
    let recirc = s.wall_shear.iter().zip(&s.omega.chunks(33).map(|c| c[32]).collect::<Vec<_>>()).filter(|(_, w)| **w < 0.0).count();
    println!("nodes with reversed wall vorticity: {recirc}");
    for i in (0..=n).step_by(10) {
        println!("z {:5.2} a {:.4} tau {:.5} p {:.5} uc {:.1}", g.z_nodes[i], g.wall_radius[i], s.wall_shear[i], p[i], u[i]);
    }
    assert!(p_var <= 0.05);
    assert!(u_var >= 0.4);
}
