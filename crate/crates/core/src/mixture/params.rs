use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Solid constants of the vessel wall (mm, kPa).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MixtureParams {
    /// Inner radius of the unloaded-to-in-vivo reference [mm].
    pub a_o: f64,
    /// Wall thickness [mm].
    pub h_o: f64,
    /// Vessel length [mm].
    pub l_o: f64,
    pub phi_e_o: f64,
    pub phi_m_o: f64,
    pub phi_c_o: f64,
    pub beta_theta: f64,
    pub beta_z: f64,
    pub beta_d: f64,
    /// Diagonal collagen angle from the axial direction [rad].
    pub alpha_0: f64,
    pub c_e: f64,
    pub c1_m: f64,
    pub c2_m: f64,
    pub c1_c: f64,
    pub c2_c: f64,
    pub g_e_theta: f64,
    pub g_e_z: f64,
    pub g_e_r: f64,
    pub g_m: f64,
    pub g_c: f64,
    /// Muscle-to-collagen turnover ratio; only 1 is supported.
    pub eta: f64,
    /// Shear-to-intramural gain ratio before the insult.
    pub k_tau_sigma_o: f64,
    /// Perivascular support stiffness [kPa/mm].
    pub k_support: f64,
}

impl Default for MixtureParams {
    fn default() -> Self {
        let g_e_theta = 1.90;
        let g_e_z = 1.62;
        Self {
            a_o: 0.647,
            h_o: 0.040,
            l_o: 15.0,
            phi_e_o: 0.34,
            phi_m_o: 0.33,
            phi_c_o: 0.33,
            beta_theta: 0.056,
            beta_z: 0.067,
            beta_d: 0.877,
            alpha_0: 29.9_f64.to_radians(),
            c_e: 89.71,
            c1_m: 261.4,
            c2_m: 0.24,
            c1_c: 234.9,
            c2_c: 4.08,
            g_e_theta,
            g_e_z,
            g_e_r: 1.0 / (g_e_theta * g_e_z),
            g_m: 1.20,
            g_c: 1.25,
            eta: 1.0,
            k_tau_sigma_o: 0.0,
            k_support: 2.0,
        }
    }
}

impl MixtureParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("a_o", self.a_o),
            ("h_o", self.h_o),
            ("l_o", self.l_o),
            ("c_e", self.c_e),
            ("c1_m", self.c1_m),
            ("c2_m", self.c2_m),
            ("c1_c", self.c1_c),
            ("c2_c", self.c2_c),
            ("g_e_theta", self.g_e_theta),
            ("g_e_z", self.g_e_z),
            ("g_e_r", self.g_e_r),
            ("g_m", self.g_m),
            ("g_c", self.g_c),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, format!("must be positive, got {v}")));
            }
        }
        let fractions = [
            ("phi_e_o", self.phi_e_o),
            ("phi_m_o", self.phi_m_o),
            ("phi_c_o", self.phi_c_o),
            ("beta_theta", self.beta_theta),
            ("beta_z", self.beta_z),
            ("beta_d", self.beta_d),
        ];
        for (name, v) in fractions {
            if !(v.is_finite() && (0.0..=1.0).contains(&v)) {
                return Err(Error::param(name, format!("must lie in [0, 1], got {v}")));
            }
        }
        let phi_sum = self.phi_e_o + self.phi_m_o + self.phi_c_o;
        if (phi_sum - 1.0).abs() > 1e-12 {
            return Err(Error::param(
                "phi_e_o + phi_m_o + phi_c_o",
                format!("mass fractions must sum to 1, got {phi_sum}"),
            ));
        }
        if self.phi_e_o <= 0.0 || self.phi_c_o <= 0.0 {
            return Err(Error::param("phi_c_o", "elastin and collagen fractions must be positive"));
        }
        let beta_sum = self.beta_theta + self.beta_z + self.beta_d;
        if (beta_sum - 1.0).abs() > 1e-12 {
            return Err(Error::param(
                "beta_theta + beta_z + beta_d",
                format!("collagen orientation fractions must sum to 1, got {beta_sum}"),
            ));
        }
        let g_r = 1.0 / (self.g_e_theta * self.g_e_z);
        if (self.g_e_r - g_r).abs() > 1e-12 {
            return Err(Error::param(
                "g_e_r",
                format!("must equal 1/(g_e_theta*g_e_z) = {g_r}, got {}", self.g_e_r),
            ));
        }
        if !self.alpha_0.is_finite() {
            return Err(Error::param("alpha_0", "must be finite"));
        }
        if (self.eta - 1.0).abs() > 1e-12 {
            return Err(Error::param("eta", "only eta = 1 is supported"));
        }
        if !(self.k_tau_sigma_o.is_finite() && self.k_tau_sigma_o >= 0.0) {
            return Err(Error::param("k_tau_sigma_o", "must be nonnegative"));
        }
        if !(self.k_support.is_finite() && self.k_support >= 0.0) {
            return Err(Error::param("k_support", "must be nonnegative"));
        }
        Ok(())
    }

    /// Circumferential and axial weights of the collagen families.
    pub fn collagen_weights(&self) -> (f64, f64) {
        let s2 = self.alpha_0.sin().powi(2);
        let c2 = self.alpha_0.cos().powi(2);
        (self.beta_theta + self.beta_d * s2, self.beta_z + self.beta_d * c2)
    }
}
