use rayon::prelude::*;

use super::interp::{linear, natural_spline};
use super::{apply_insult, insult_factor, Mode, Scenario, SimulationError, StepRecord};
use crate::coupling::{couple_step, predictor, CouplingError, CouplingHistory, InterfaceField, StepOutcome};
use crate::fluid::{build_grid, deform_grid, solve_steady_flow, AxisymGrid, FlowSolution, DEFAULT_STRETCH};
use crate::mixture::{
    local_homeostasis, preload_homeostasis, solve_patch_equilibrium, HomeostaticState, MixtureParams, PatchInsult,
    PatchLoads, PatchState, WssLoad,
};
use crate::{Error, Result};

/// Per-patch shear from an axial wall trace: each patch takes the trace value
/// at its z station (linear in z), identical for every θ.
pub fn propagate_wss(z_nodes: &[f64], wall_shear: &[f64], z_stations: &[f64], n_theta: usize) -> Result<Vec<f64>> {
    let col = linear(z_nodes, wall_shear, z_stations)?;
    Ok((0..n_theta).flat_map(|_| col.iter().copied()).collect())
}

/// Fluid, solid and interface state shared by the coupling iterations.
struct Fields {
    scenario: Scenario,
    params: MixtureParams,
    /// Gauge pressure of the solid at the outlet.
    p_ref: f64,
    flow_rate: f64,
    grid0: AxisymGrid,
    z: Vec<f64>,
    /// Set points per axial station.
    homes: Vec<HomeostaticState>,
    insults: Vec<PatchInsult>,
    states: Vec<PatchState>,
    flow: Option<FlowSolution>,
}

impl Fields {
    fn wall_displacement(&self, d: &InterfaceField) -> Result<Vec<f64>> {
        let (nt, nz) = (self.scenario.n_theta, self.scenario.n_z);
        if d.len() != nt * nz {
            return Err(Error::DimensionMismatch {
                expected: nt * nz,
                got: d.len(),
            });
        }
        let mean: Vec<f64> = (0..nz)
            .map(|j| (0..nt).map(|i| d.values[i * nz + j]).sum::<f64>() / nt as f64)
            .collect();
        natural_spline(&self.z, &mean, &self.grid0.z_nodes)
    }

    /// Flow on the wall displaced by `d`; returns (pressure, shear) per z station.
    fn flow_loads(&mut self, d: &InterfaceField) -> Result<(Vec<f64>, Vec<f64>)> {
        let grid = deform_grid(&self.grid0, &self.wall_displacement(d)?)?;
        let flow = solve_steady_flow(&grid, &self.scenario.fluid, &self.scenario.flow_solver, self.flow.as_ref())?;
        let p = linear(&grid.z_nodes, &flow.wall_pressure, &self.z)?;
        let tau = linear(&grid.z_nodes, &flow.wall_shear, &self.z)?;
        let p_out = self.scenario.fluid.p_out;
        let pressure = p.iter().map(|v| self.p_ref + (v - p_out)).collect();
        self.flow = Some(flow);
        Ok((pressure, tau))
    }

    /// Pre-loading: patch set points from the flow at the reference geometry;
    /// every patch then sits at its identity state.
    fn preload(&mut self, d: &InterfaceField) -> Result<InterfaceField> {
        let (pressure, tau) = self.flow_loads(d)?;
        self.homes = pressure
            .iter()
            .zip(&tau)
            .map(|(p, t)| local_homeostasis(&self.params, *p, *t, self.flow_rate))
            .collect::<Result<_>>()?;
        let nz = self.scenario.n_z;
        self.states = (0..self.scenario.n_theta * nz)
            .map(|idx| PatchState::identity(&self.params, &self.homes[idx % nz]))
            .collect();
        Ok(InterfaceField::zeros(self.states.len()))
    }

    /// One fluid-then-solid pass d ↦ d̃.
    fn evaluate(&mut self, d: &InterfaceField) -> Result<InterfaceField> {
        let (pressure, tau) = self.flow_loads(d)?;
        let nz = self.scenario.n_z;
        let (params, homes, insults, prev) = (&self.params, &self.homes, &self.insults, &self.states);
        let correct = self.scenario.wss_radius_correction;
        let states: Vec<PatchState> = (0..prev.len())
            .into_par_iter()
            .map(|idx| {
                let j = idx % nz;
                let wss = if correct {
                    WssLoad::FsgeAtRadius {
                        tau: tau[j],
                        radius: params.a_o + d.values[idx],
                    }
                } else {
                    WssLoad::Fsge(tau[j])
                };
                let loads = PatchLoads {
                    pressure: pressure[j],
                    wss,
                };
                solve_patch_equilibrium(loads, insults[idx], params, &homes[j], Some(&prev[idx]))
            })
            .collect::<Result<_>>()?;
        let out = states.iter().map(|p| p.radial_displacement(params)).collect::<Vec<_>>();
        self.states = states;
        Ok(out.into())
    }
}

/// Load-stepped coupled fluid–solid growth.
pub struct FsgeDriver {
    fields: Fields,
    history: CouplingHistory,
    converged: Vec<InterfaceField>,
}

impl FsgeDriver {
    pub fn new(s: &Scenario) -> Result<Self> {
        if s.mode != Mode::Fsge {
            return Err(Error::param("mode", "the coupled driver needs mode fsge"));
        }
        s.validate()?;
        let params = s.mixture_with_gain();
        let flow_rate = s.fluid.inflow_rate(params.a_o);
        let home = preload_homeostasis(&params, flow_rate, s.fluid.mu)?;
        let grid0 = build_grid(params.l_o, &[params.a_o, params.a_o], s.fluid_n_z, s.fluid_n_r, DEFAULT_STRETCH)?;
        let n = s.n_theta * s.n_z;
        Ok(Self {
            fields: Fields {
                scenario: s.clone(),
                p_ref: home.pressure,
                flow_rate,
                grid0,
                z: s.z_stations(),
                homes: vec![home; s.n_z],
                insults: vec![PatchInsult::none(&params); n],
                states: vec![PatchState::identity(&params, &home); n],
                flow: None,
                params,
            },
            history: s.coupling.history()?,
            converged: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.fields.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.states.is_empty()
    }

    /// Set points captured at pre-loading, per axial station.
    pub fn set_points(&self) -> &[HomeostaticState] {
        &self.fields.homes
    }

    /// Initial interface iterate of step `t`.
    pub fn predict(&self, t: usize) -> InterfaceField {
        let k = self.converged.len().saturating_sub(2);
        predictor(&self.converged[k..], t, self.len())
    }

    /// Runs the coupling loop of step `t` from `d0`. Step 0 is pre-loading.
    pub fn step(&mut self, t: usize, d0: InterfaceField) -> std::result::Result<StepOutcome, CouplingError> {
        let s = &self.fields.scenario;
        if t > 0 {
            let insult = s.effective_insult();
            let theta = s.theta_stations();
            let nz = s.n_z;
            let params = &self.fields.params;
            let insults: Result<Vec<PatchInsult>> = (0..self.len())
                .map(|idx| {
                    let f = insult_factor(theta[idx / nz], self.fields.z[idx % nz], t, &insult, params.l_o);
                    apply_insult(f, params, &insult)
                })
                .collect();
            self.fields.insults = insults.map_err(|e| CouplingError {
                t,
                iterations: 0,
                source: e,
                log: Vec::new(),
            })?;
        }
        let config = self.fields.scenario.coupling.clone();
        let fields = &mut self.fields;
        if t == 0 {
            couple_step(|d: &InterfaceField| fields.preload(d), d0, &config, &mut self.history, t)
        } else {
            couple_step(|d: &InterfaceField| fields.evaluate(d), d0, &config, &mut self.history, t)
        }
    }

    /// Stores the converged interface of a step for the predictor.
    pub fn accept(&mut self, d: InterfaceField) {
        self.converged.push(d);
        if self.converged.len() > 2 {
            self.converged.remove(0);
        }
    }

    /// Record of the most recent evaluation.
    pub fn record(&self, t: usize, outcome: &StepOutcome) -> StepRecord {
        let s = &self.fields.scenario;
        StepRecord {
            t,
            n_theta: s.n_theta,
            n_z: s.n_z,
            theta: s.theta_stations(),
            z: self.fields.z.clone(),
            patches: self.fields.states.clone(),
            displacement: outcome.d_tilde.clone(),
            iterations: outcome.iterations,
            log: outcome.log.clone(),
            flow: self.fields.flow.clone(),
        }
    }
}

/// Coupled run: pre-loading plus `t_max` load steps.
pub fn run_fsge(s: &Scenario) -> std::result::Result<Vec<StepRecord>, SimulationError> {
    let mut drv = FsgeDriver::new(s).map_err(|e| SimulationError::at(0, e, Vec::new()))?;
    let mut records = Vec::with_capacity(s.insult.t_max + 1);
    for t in 0..=s.insult.t_max {
        let d0 = drv.predict(t);
        match drv.step(t, d0) {
            Ok(out) => {
                log::debug!("fsge step {t}: {} coupling evaluations", out.iterations);
                records.push(drv.record(t, &out));
                drv.accept(out.d);
            }
            Err(e) => {
                return Err(SimulationError {
                    t,
                    iterations: e.iterations,
                    source: e.source,
                    records,
                    log: e.log,
                })
            }
        }
    }
    Ok(records)
}

/// Runs the scenario in its configured mode.
pub fn run(s: &Scenario) -> std::result::Result<Vec<StepRecord>, SimulationError> {
    match s.mode {
        Mode::Gr => super::run_gr(s),
        Mode::Fsge => run_fsge(s),
    }
}
