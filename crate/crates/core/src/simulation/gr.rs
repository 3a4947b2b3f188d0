use rayon::prelude::*;

use super::{apply_insult, insult_factor, Mode, Scenario, SimulationError, StepRecord};
use crate::coupling::InterfaceField;
use crate::mixture::{preload_homeostasis, solve_patch_equilibrium, PatchLoads, PatchState, WssLoad};
use crate::{Error, Result};

/// Solid-only growth: every patch sees the preload pressure and the
/// Poiseuille-scaled shear of its own radius. No flow solve.
pub fn run_gr(s: &Scenario) -> std::result::Result<Vec<StepRecord>, SimulationError> {
    if s.mode != Mode::Gr {
        return Err(SimulationError::at(0, Error::param("mode", "run_gr needs mode gr"), Vec::new()));
    }
    s.validate().map_err(|e| SimulationError::at(0, e, Vec::new()))?;
    let params = s.mixture_with_gain();
    let insult = s.effective_insult();
    let home = preload_homeostasis(&params, s.fluid.inflow_rate(params.a_o), s.fluid.mu)
        .map_err(|e| SimulationError::at(0, e, Vec::new()))?;
    let theta = s.theta_stations();
    let z = s.z_stations();
    let n_z = s.n_z;
    let n = s.n_theta * n_z;
    let loads = PatchLoads {
        pressure: home.pressure,
        wss: WssLoad::Gr,
    };

    let mut prev = vec![PatchState::identity(&params, &home); n];
    let mut records: Vec<StepRecord> = Vec::with_capacity(insult.t_max + 1);
    for t in 0..=insult.t_max {
        let solved: Result<Vec<PatchState>> = (0..n)
            .into_par_iter()
            .map(|idx| {
                let (i, j) = (idx / n_z, idx % n_z);
                let f = insult_factor(theta[i], z[j], t, &insult, params.l_o);
                let ins = apply_insult(f, &params, &insult)?;
                solve_patch_equilibrium(loads, ins, &params, &home, Some(&prev[idx]))
            })
            .collect();
        let states = match solved {
            Ok(v) => v,
            Err(e) => return Err(SimulationError::at(t, e, records)),
        };
        log::debug!("gr step {t}: peak radius {:.6}", states.iter().fold(0.0_f64, |m, p| m.max(p.a_h)));
        let displacement = InterfaceField::new(states.iter().map(|p| p.radial_displacement(&params)).collect());
        records.push(StepRecord {
            t,
            n_theta: s.n_theta,
            n_z,
            theta: theta.clone(),
            z: z.clone(),
            patches: states.clone(),
            displacement,
            iterations: 1,
            log: Vec::new(),
            flow: None,
        });
        prev = states;
    }
    Ok(records)
}
