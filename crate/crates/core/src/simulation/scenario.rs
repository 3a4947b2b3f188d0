use serde::{Deserialize, Serialize};

use super::InsultParams;
use crate::coupling::{CouplingConfig, InterfaceField, IterationLog};
use crate::fluid::{FlowSolution, FluidParams, SolverOptions};
use crate::mixture::{MixtureParams, PatchState};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Solid only, Poiseuille-scaled shear.
    #[default]
    Gr,
    /// Coupled with the resolved flow.
    Fsge,
}

impl Mode {
    pub fn label(self) -> &'static str {
        match self {
            Mode::Gr => "gr",
            Mode::Fsge => "fsge",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gr" => Ok(Mode::Gr),
            "fsge" => Ok(Mode::Fsge),
            other => Err(Error::param("mode", format!("expected gr or fsge, got {other}"))),
        }
    }
}

/// Everything needed to run one aneurysm simulation.
///
/// `gain_ratio` overrides `mixture.k_tau_sigma_o`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Scenario {
    pub mode: Mode,
    pub mixture: MixtureParams,
    pub fluid: FluidParams,
    pub insult: InsultParams,
    pub gain_ratio: f64,
    /// Solid patches around the circumference.
    pub n_theta: usize,
    /// Solid patches along the vessel.
    pub n_z: usize,
    pub fluid_n_z: usize,
    pub fluid_n_r: usize,
    pub coupling: CouplingConfig,
    pub flow_solver: SolverOptions,
    /// Coupled mode: rescale the fluid shear handed to each patch from the
    /// radius the fluid saw to the patch's own radius (Poiseuille scaling).
    /// Leaves converged states unchanged; makes the coupling iteration much
    /// better conditioned for large gains.
    pub wss_radius_correction: bool,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            mode: Mode::Gr,
            mixture: MixtureParams::default(),
            fluid: FluidParams::default(),
            insult: InsultParams::default(),
            gain_ratio: 0.0,
            n_theta: 64,
            n_z: 40,
            fluid_n_z: 200,
            fluid_n_r: 32,
            coupling: CouplingConfig::default(),
            flow_solver: SolverOptions::default(),
            wss_radius_correction: true,
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.mixture.validate()?;
        self.fluid.validate()?;
        self.insult.validate()?;
        self.coupling.validate()?;
        if !(self.gain_ratio.is_finite() && self.gain_ratio >= 0.0) {
            return Err(Error::param("gain_ratio", "must be finite and nonnegative"));
        }
        if self.n_theta == 0 || self.n_z < 2 {
            return Err(Error::param("n_theta/n_z", "need n_theta >= 1 and n_z >= 2"));
        }
        if self.mode == Mode::Fsge && (self.fluid_n_z < 8 || self.fluid_n_r < 8) {
            return Err(Error::param("fluid_n_z/fluid_n_r", "need at least 8 cells in each direction"));
        }
        Ok(())
    }

    /// Mixture constants with the scenario gain ratio.
    pub fn mixture_with_gain(&self) -> MixtureParams {
        MixtureParams {
            k_tau_sigma_o: self.gain_ratio,
            ..self.mixture.clone()
        }
    }

    /// Insult as applied in this mode; the coupled model only takes
    /// axisymmetric insults.
    pub fn effective_insult(&self) -> InsultParams {
        InsultParams {
            axisymmetric: self.insult.axisymmetric || self.mode == Mode::Fsge,
            ..self.insult.clone()
        }
    }

    /// Circumferential patch stations [rad].
    pub fn theta_stations(&self) -> Vec<f64> {
        (0..self.n_theta)
            .map(|i| 2.0 * std::f64::consts::PI * i as f64 / self.n_theta as f64)
            .collect()
    }

    /// Axial patch stations (cell centres) [mm].
    pub fn z_stations(&self) -> Vec<f64> {
        let l = self.mixture.l_o;
        (0..self.n_z).map(|j| l * (2 * j + 1) as f64 / (2 * self.n_z) as f64).collect()
    }
}

/// Converged state of one load step.
#[derive(Debug, Clone)]
pub struct StepRecord {
    pub t: usize,
    pub n_theta: usize,
    pub n_z: usize,
    pub theta: Vec<f64>,
    pub z: Vec<f64>,
    /// Patches, θ-major: index i·n_z + j.
    pub patches: Vec<PatchState>,
    /// Radial displacement per patch, same layout [mm].
    pub displacement: InterfaceField,
    /// Coupling evaluations (1 in GR mode).
    pub iterations: usize,
    pub log: Vec<IterationLog>,
    pub flow: Option<FlowSolution>,
}

impl StepRecord {
    pub fn patch(&self, i: usize, j: usize) -> &PatchState {
        &self.patches[i * self.n_z + j]
    }

    /// Axial profile of a patch quantity along circumferential station `i`.
    pub fn trace(&self, i: usize, f: impl Fn(&PatchState) -> f64) -> Vec<f64> {
        (0..self.n_z).map(|j| f(self.patch(i, j))).collect()
    }

    /// Station facing the insult apex (θ = π).
    pub fn apex_index(&self) -> usize {
        self.n_theta / 2
    }

    pub fn peak_radius(&self) -> f64 {
        self.patches.iter().fold(f64::NEG_INFINITY, |m, p| m.max(p.a_h))
    }

    pub fn thickness_range(&self) -> (f64, f64) {
        self.patches
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.h_h), hi.max(p.h_h)))
    }
}

/// A run stopped at load step `t`; holds the steps completed before it.
#[derive(Debug, Clone, thiserror::Error)]
#[error("load step {t} failed after {iterations} coupling evaluations: {source}")]
pub struct SimulationError {
    pub t: usize,
    pub iterations: usize,
    pub source: Error,
    pub records: Vec<StepRecord>,
    pub log: Vec<IterationLog>,
}

impl SimulationError {
    pub(crate) fn at(t: usize, source: Error, records: Vec<StepRecord>) -> Self {
        Self {
            t,
            iterations: 0,
            source,
            records,
            log: Vec::new(),
        }
    }
}
