use serde::{Deserialize, Serialize};

use crate::mixture::{MixtureParams, PatchInsult};
use crate::{Error, Result};

/// Spatial footprint and ramp of the elastin insult.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InsultParams {
    /// Circumferential extent [rad].
    pub theta_od: f64,
    pub nu_theta: f64,
    /// Axial extent [mm].
    pub z_od: f64,
    pub nu_z: f64,
    /// Maximum elastin degradation.
    pub phi_e_hm: f64,
    /// Number of load steps after pre-loading.
    pub t_max: usize,
    /// Drop the circumferential factor (f_θ = 1).
    pub axisymmetric: bool,
}

impl Default for InsultParams {
    fn default() -> Self {
        Self {
            theta_od: 0.55 * std::f64::consts::PI,
            nu_theta: 6.0,
            z_od: 15.0 / 4.0,
            nu_z: 2.0,
            phi_e_hm: 0.7,
            t_max: 10,
            axisymmetric: false,
        }
    }
}

impl InsultParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("insult.theta_od", self.theta_od),
            ("insult.nu_theta", self.nu_theta),
            ("insult.z_od", self.z_od),
            ("insult.nu_z", self.nu_z),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, format!("must be positive, got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.phi_e_hm) {
            return Err(Error::param("insult.phi_e_hm", "must lie in [0, 1]"));
        }
        if self.t_max == 0 {
            return Err(Error::param("insult.t_max", "need at least one load step"));
        }
        Ok(())
    }

    /// Circumferential factor f_θ.
    pub fn f_theta(&self, theta: f64) -> f64 {
        if self.axisymmetric {
            return 1.0;
        }
        let x = ((theta - std::f64::consts::PI) / self.theta_od).abs();
        (-x.powf(self.nu_theta)).exp()
    }

    /// Axial factor f_z, centred at mid-vessel.
    pub fn f_z(&self, z: f64, l_o: f64) -> f64 {
        let x = ((z - 0.5 * l_o) / self.z_od).abs();
        (-x.powf(self.nu_z)).exp()
    }

    /// Ramp f_t over the load steps; zero at pre-loading.
    pub fn f_t(&self, t: usize) -> f64 {
        if t == 0 {
            return 0.0;
        }
        (2.0 * t as f64 / self.t_max as f64).tanh() / 2.0_f64.tanh()
    }
}

/// Insult intensity f = f_θ·f_z·f_t at (θ, z) and load step `t`.
pub fn insult_factor(theta: f64, z: f64, t: usize, p: &InsultParams, l_o: f64) -> f64 {
    if t == 0 {
        return 0.0;
    }
    p.f_theta(theta) * p.f_z(z, l_o) * p.f_t(t)
}

/// Degraded elastin stiffness and gain ratio for intensity `f`.
pub fn apply_insult(f: f64, params: &MixtureParams, insult: &InsultParams) -> Result<PatchInsult> {
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::OutOfRange(format!("insult intensity {f} outside [0, 1]")));
    }
    Ok(PatchInsult {
        c_e_h: params.c_e * (1.0 - insult.phi_e_hm * f),
        k_h: params.k_tau_sigma_o * (1.0 - f),
    })
}
