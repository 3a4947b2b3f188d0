//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. The coupled sweep is shared by criteria 3 to 8.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use fsge_cli::DEFAULT_GAINS;
use fsge_core::coupling::{aitken_omega, couple_step, CouplingConfig, InterfaceField, Scheme};
use fsge_core::fluid::FluidParams;
use fsge_core::mixture::MixtureParams;
use fsge_core::simulation::{run, InsultParams, Mode, Scenario, StepRecord};
use fsge_core::verify::{linear_fixedpoint_reference, run_suite, test_problem, tube_benchmark, SuiteOptions};
use rayon::prelude::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

type Runs = BTreeMap<(usize, Mode), Result<Vec<StepRecord>, String>>;

fn key_label(k: &(usize, Mode)) -> String {
    format!("K={} {}", DEFAULT_GAINS[k.0], k.1.label())
}

fn sweep_runs() -> Runs {
    let jobs: Vec<(usize, Mode)> = (0..DEFAULT_GAINS.len())
        .flat_map(|g| [(g, Mode::Gr), (g, Mode::Fsge)])
        .collect();
    jobs.par_iter()
        .map(|&(g, mode)| {
            let s = Scenario {
                mode,
                gain_ratio: DEFAULT_GAINS[g],
                ..Scenario::default()
            };
            let t0 = Instant::now();
            let r = run(&s).map_err(|e| e.to_string());
            eprintln!("  run K={} {}: {:.0} s", DEFAULT_GAINS[g], mode.label(), t0.elapsed().as_secs_f64());
            ((g, mode), r)
        })
        .collect()
}

fn all_ok(runs: &Runs) -> Result<(), String> {
    let failed: Vec<String> = runs
        .iter()
        .filter_map(|(k, r)| r.as_ref().err().map(|e| format!("{}: {e}", key_label(k))))
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(failed.join("; "))
    }
}

fn mean_iterations(recs: &[StepRecord]) -> f64 {
    let v: Vec<f64> = recs
        .iter()
        .filter(|r| (2..=10).contains(&r.t))
        .map(|r| r.iterations as f64)
        .collect();
    v.iter().sum::<f64>() / v.len() as f64
}

fn crit1() -> Outcome {
    let m = MixtureParams::default();
    let t0 = Instant::now();
    let r = tube_benchmark(&FluidParams::default(), m.a_o, m.l_o, 200, 32);
    let secs = t0.elapsed().as_secs_f64();
    match r {
        Ok(r) => outcome(
            r.pass && secs < 60.0,
            format!("max rel err {:.3e} (tol 2e-2), {secs:.1} s", r.rel_error),
        ),
        Err(e) => outcome(false, e.to_string()),
    }
}

fn crit2() -> Outcome {
    let mut worst = (0.0_f64, 0.0_f64);
    let a_o = MixtureParams::default().a_o;
    for mode in [Mode::Gr, Mode::Fsge] {
        let s = Scenario {
            mode,
            gain_ratio: 1.0,
            insult: InsultParams {
                phi_e_hm: 0.0,
                ..InsultParams::default()
            },
            ..Scenario::default()
        };
        match run(&s) {
            Ok(recs) => {
                for r in &recs {
                    worst.0 = worst.0.max(r.displacement.max_abs());
                    for p in &r.patches {
                        worst.1 = worst.1.max(p.dsig.abs()).max(p.dtau.abs());
                    }
                }
            }
            Err(e) => return outcome(false, format!("{} run failed: {e}", mode.label())),
        }
    }
    outcome(
        worst.0 < 1e-6 * a_o && worst.1 < 1e-6,
        format!("max |d| = {:.2e} mm, max stimulus {:.2e}", worst.0, worst.1),
    )
}

fn crit3(runs: &Runs) -> Outcome {
    let mut worst = 0.0_f64;
    let mut count = 0usize;
    for recs in runs.values().flatten() {
        for p in recs.iter().flat_map(|r| &r.patches) {
            worst = worst.max((p.dsig - p.k_h * p.dtau).abs());
            count += 1;
        }
    }
    let mut detail = format!("max |dsig - K dtau| = {worst:.2e} over {count} patch states");
    if let Err(e) = all_ok(runs) {
        detail.push_str(&format!("; failed runs: {e}"));
    }
    outcome(worst < 1e-8 && all_ok(runs).is_ok(), detail)
}

fn crit4(runs: &Runs) -> Outcome {
    let mut its = Vec::new();
    for g in 0..DEFAULT_GAINS.len() {
        match &runs[&(g, Mode::Fsge)] {
            Ok(recs) => its.push(recs[0].iterations),
            Err(e) => return outcome(false, format!("K={}: {e}", DEFAULT_GAINS[g])),
        }
    }
    outcome(its.iter().all(|&n| n <= 3), format!("t=0 iterations {its:?}"))
}

fn crit5(runs: &Runs) -> Outcome {
    let mut means = Vec::new();
    for g in 0..DEFAULT_GAINS.len() {
        match &runs[&(g, Mode::Fsge)] {
            Ok(recs) => means.push(mean_iterations(recs)),
            Err(e) => return outcome(false, format!("K={}: {e}", DEFAULT_GAINS[g])),
        }
    }
    let monotone = means.windows(2).all(|w| w[1] >= w[0]);
    let ratio = means[means.len() - 1] / means[0];
    let shown: Vec<String> = means.iter().map(|m| format!("{m:.2}")).collect();
    outcome(
        monotone && ratio >= 1.5,
        format!("means [{}], K=1/K=0 ratio {ratio:.2}", shown.join(", ")),
    )
}

fn crit6(runs: &Runs) -> Outcome {
    let (gr, fsge) = match (&runs[&(0, Mode::Gr)], &runs[&(0, Mode::Fsge)]) {
        (Ok(a), Ok(b)) => (a.last().unwrap(), b.last().unwrap()),
        _ => return outcome(false, "K=0 run failed"),
    };
    let a = gr.trace(gr.apex_index(), |p| p.a_h);
    let b = fsge.trace(fsge.apex_index(), |p| p.a_h);
    let worst = a
        .iter()
        .zip(&b)
        .map(|(x, y)| ((x - y) / x).abs())
        .fold(0.0_f64, f64::max);
    outcome(worst < 0.05, format!("max relative a_h difference {worst:.3e}"))
}

fn crit7(runs: &Runs) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for mode in [Mode::Gr, Mode::Fsge] {
        let mut peaks = Vec::new();
        for g in 0..DEFAULT_GAINS.len() {
            match &runs[&(g, mode)] {
                Ok(recs) => peaks.push(recs.last().unwrap().peak_radius()),
                Err(e) => return outcome(false, format!("K={} {}: {e}", DEFAULT_GAINS[g], mode.label())),
            }
        }
        pass &= peaks.windows(2).all(|w| w[1] <= w[0]);
        let shown: Vec<String> = peaks.iter().map(|p| format!("{p:.4}")).collect();
        parts.push(format!("{} peaks [{}]", mode.label(), shown.join(", ")));
    }
    outcome(pass, parts.join("; "))
}

fn crit8(runs: &Runs) -> Outcome {
    let mut sym = 0.0_f64;
    for g in 0..DEFAULT_GAINS.len() {
        let recs = match &runs[&(g, Mode::Gr)] {
            Ok(r) => r,
            Err(e) => return outcome(false, format!("GR K={}: {e}", DEFAULT_GAINS[g])),
        };
        for r in recs {
            for i in 0..r.n_theta {
                for j in 0..r.n_z / 2 {
                    let (p, q) = (r.patch(i, j), r.patch(i, r.n_z - 1 - j));
                    sym = sym.max((p.h_h - q.h_h).abs()).max((p.a_h - q.a_h).abs());
                }
            }
        }
    }
    let fsge = match &runs[&(0, Mode::Fsge)] {
        Ok(r) => r.last().unwrap(),
        Err(e) => return outcome(false, format!("FSGe K=0: {e}")),
    };
    let h = fsge.trace(fsge.apex_index(), |p| p.h_h);
    let n = h.len();
    let diffs: Vec<f64> = (0..n / 2).map(|j| h[n - 1 - j] - h[j]).collect();
    let min_diff = diffs.iter().copied().fold(f64::INFINITY, f64::min);
    outcome(
        sym <= 1e-8 && min_diff > 0.0,
        format!("GR mirror mismatch {sym:.2e}; FSGe K=0 min downstream-upstream h {min_diff:.3e} mm"),
    )
}

fn apply(a: &[Vec<f64>], b: &[f64], d: &InterfaceField) -> InterfaceField {
    a.iter()
        .zip(b)
        .map(|(row, bi)| row.iter().zip(&d.values).map(|(x, y)| x * y).sum::<f64>() + bi)
        .collect::<Vec<_>>()
        .into()
}

fn crit9() -> Outcome {
    let mut iqn_worst = 0.0_f64;
    let mut cases = 0;
    for n in 1..=10usize {
        for (s, radius) in [0.5, 0.9, 1.2, 1.5].into_iter().enumerate() {
            let (a, b) = test_problem(n, radius, (100 * n + s) as u64);
            let exact = match linear_fixedpoint_reference(&a, &b) {
                Ok(x) => x,
                Err(e) => return outcome(false, e.to_string()),
            };
            let cfg = CouplingConfig {
                eps0: 1e-13,
                eps_qr: 1e-8,
                q: 2 * n,
                k_max: n + 2,
                ..CouplingConfig::default()
            };
            let mut h = cfg.history().unwrap();
            let mut last = InterfaceField::zeros(n);
            let _ = couple_step(
                |d: &InterfaceField| {
                    last = d.clone();
                    Ok(apply(&a, &b, d))
                },
                InterfaceField::zeros(n),
                &cfg,
                &mut h,
                2,
            );
            let scale = exact.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
            let err = last.values.iter().zip(&exact).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale;
            iqn_worst = iqn_worst.max(err);
            cases += 1;
        }
    }

    let mut gs_min_growth = f64::INFINITY;
    for radius in [1.1, 1.5] {
        let (a, b) = test_problem(4, radius, 42);
        let cfg = CouplingConfig {
            scheme: Scheme::GaussSeidel,
            k_max: 200,
            ..CouplingConfig::default()
        };
        let mut h = cfg.history().unwrap();
        let growth = match couple_step(|d: &InterfaceField| Ok(apply(&a, &b, d)), InterfaceField::zeros(4), &cfg, &mut h, 2) {
            Ok(_) => 0.0,
            Err(e) => e.log.last().map_or(0.0, |l| l.residual_norm) / e.log[0].residual_norm,
        };
        gs_min_growth = gs_min_growth.min(growth);
    }

    let mut aitken_worst = 0.0_f64;
    for (slope, shift, w0) in [(0.5, 1.0, 0.1), (-0.8, 2.0, 0.5), (1.7, -0.3, 0.05), (0.99, 3.0, 1.0)] {
        let f = |d: f64| slope * d + shift;
        let exact = shift / (1.0 - slope);
        let d0 = 0.0;
        let r0 = f(d0) - d0;
        let d1 = d0 + w0 * r0;
        let r1 = f(d1) - d1;
        let w1 = aitken_omega(w0, &vec![r0].into(), &vec![r1].into()).unwrap();
        let d2 = d1 + w1 * r1;
        aitken_worst = aitken_worst.max(((d2 - exact) / exact).abs());
    }

    outcome(
        iqn_worst < 1e-10 && gs_min_growth > 1e3 && aitken_worst < 1e-12,
        format!(
            "IQN-ILS max rel err {iqn_worst:.2e} over {cases} problems; Gauss-Seidel growth >= {gs_min_growth:.2e}; Aitken err {aitken_worst:.2e}"
        ),
    )
}

fn crit10() -> Outcome {
    let constitutive = |scale: f64| {
        run_suite(&SuiteOptions {
            quick: true,
            stress_scale: scale,
            ..SuiteOptions::default()
        })
        .map(|v| {
            v.into_iter()
                .filter(|r| r.name.contains("stress vs energy") && !r.name.contains("x1.01"))
                .collect::<Vec<_>>()
        })
    };
    let (plain, perturbed) = match (constitutive(1.0), constitutive(1.01)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return outcome(false, e.to_string()),
    };
    let worst = plain.iter().map(|r| r.rel_error).fold(0.0, f64::max);
    let all_pass = plain.len() == 5 && plain.iter().all(|r| r.pass);
    let all_caught = perturbed.len() == 5 && perturbed.iter().all(|r| !r.pass);
    outcome(
        all_pass && all_caught,
        format!(
            "{} checks, max rel err {worst:.2e}; perturbed controls failing: {}/{}",
            plain.len(),
            perturbed.iter().filter(|r| !r.pass).count(),
            perturbed.len()
        ),
    )
}

fn read_tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().is_some_and(|x| x == "csv") {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn crit11() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("small.json");
    std::fs::write(
        &config,
        r#"{"scenario": {"n_theta": 4, "n_z": 40, "fluid_n_z": 60, "fluid_n_r": 12,
            "insult": {"t_max": 4}}}"#,
    )
    .unwrap();
    let mut trees = Vec::new();
    for (tag, workers) in [("a", 1), ("b", 1), ("c", 4)] {
        let out = tmp.path().join(tag);
        let status = Command::new(env!("CARGO_BIN_EXE_fsge"))
            .args(["sweep", "--gains", "0,0.6,1"])
            .arg("--config")
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .args(["--workers", &workers.to_string()])
            .status();
        match status {
            Ok(s) if s.success() => trees.push(read_tree(&out)),
            Ok(s) => return outcome(false, format!("sweep exited with {s}")),
            Err(e) => return outcome(false, e.to_string()),
        }
    }
    let files = trees[0].len();
    let same = trees.windows(2).all(|w| w[0] == w[1]);
    outcome(
        same && files > 0,
        format!("{files} CSV files compared across 2 repeated runs and 1 vs 4 workers"),
    )
}

fn main() {
    let t0 = Instant::now();
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    results.push((1, "Poiseuille fidelity", crit1()));
    results.push((2, "homeostatic fixed point", crit2()));
    eprintln!("  running the gain sweep in both modes");
    let runs = sweep_runs();
    results.push((3, "mechanobiological closure", crit3(&runs)));
    results.push((4, "pre-loading cost", crit4(&runs)));
    results.push((5, "iteration trend vs gain", crit5(&runs)));
    results.push((6, "GR/FSGe agreement at K=0", crit6(&runs)));
    results.push((7, "dilation monotonicity", crit7(&runs)));
    results.push((8, "GR symmetry and FSGe downstream thickening", crit8(&runs)));
    results.push((9, "coupling algorithm exactness", crit9()));
    results.push((10, "constitutive consistency", crit10()));
    results.push((11, "determinism", crit11()));

    let mut failed = 0;
    for (n, name, o) in &results {
        println!("{} criterion {n}: {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!(
        "{} of {} criteria passed ({:.0} s)",
        results.len() - failed,
        results.len(),
        t0.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
