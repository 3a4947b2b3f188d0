//! Equilibrated constrained-mixture wall model.

mod constitutive;
mod homeostasis;
mod params;
mod patch;

pub use constitutive::{
    elastin_energy, elastin_extra_stress, fiber_cauchy_stress, fiber_energy, ims_invariant,
    mixture_extra_stress, FiberStresses, MixtureState, Stress,
};
pub use homeostasis::{
    equilibrated_stimuli, gr_wss_stimulus, lagrange_multiplier, local_homeostasis,
    preload_homeostasis, HomeostaticState,
};
pub use params::MixtureParams;
pub use patch::{solve_patch_equilibrium, PatchInsult, PatchLoads, PatchState, WssLoad};
