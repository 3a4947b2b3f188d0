use serde::{Deserialize, Serialize};

use super::constitutive::{ims_invariant, mixture_extra_stress, MixtureState};
use super::MixtureParams;
use crate::fluid::poiseuille;
use crate::{Error, Result};

/// Set points of the original homeostatic state.
///
/// Besides the regulated quantities this keeps the preload multiplier, the
/// radial balance offset and the in-vivo axial wall force, which anchor the
/// thin-wall patch equations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomeostaticState {
    /// Transmural pressure P_o [kPa].
    pub pressure: f64,
    /// Intramural stress invariant σ_Io [kPa].
    pub sigma_io: f64,
    /// Wall shear magnitude τ_wo [kPa].
    pub tau_wo: f64,
    /// Flow rate Q_o [mm³/s].
    pub flow_rate: f64,
    /// Lagrange multiplier at preload [kPa].
    pub multiplier: f64,
    /// σ_r − p + P/2 at preload [kPa]; zero for the self-consistent cylinder.
    pub radial_offset: f64,
    /// Axial wall force at preload [kPa·mm²].
    pub axial_force: f64,
}

fn identity_state(params: &MixtureParams) -> MixtureState {
    MixtureState {
        lambda_theta: 1.0,
        lambda_z: 1.0,
        phi_e: params.phi_e_o,
        phi_m: params.phi_m_o,
        phi_c: params.phi_c_o,
        c_e_h: params.c_e,
    }
}

pub(crate) fn wall_area(a: f64, h: f64) -> f64 {
    std::f64::consts::PI * h * (2.0 * a + h)
}

/// Homeostatic state of the uniform cylinder.
///
/// Newton on P_o: the multiplier follows from the mean radial traction
/// σ_r = −P/2 through the wall and the circumferential balance
/// σ_θ = P·a_o/h_o must hold at the identity in-vivo deformation.
pub fn preload_homeostasis(params: &MixtureParams, flow_rate: f64, mu: f64) -> Result<HomeostaticState> {
    params.validate()?;
    if !(flow_rate > 0.0 && mu > 0.0) {
        return Err(Error::param("flow_rate", "flow rate and viscosity must be positive"));
    }
    let sx = mixture_extra_stress(&identity_state(params), params)?;
    let ratio = params.a_o / params.h_o;
    let (s_t, s_r) = (sx[(0, 0)], sx[(2, 2)]);
    let g = |p: f64| s_t - (s_r + 0.5 * p) - p * ratio;
    let dg = -0.5 - ratio;

    let mut p = 0.0;
    let mut res = g(p);
    let mut it = 0;
    while (res / s_t).abs() > 1e-12 {
        if it == 100 {
            return Err(Error::NotConverged {
                what: "preload pressure".into(),
                iterations: it,
                residual: res,
            });
        }
        p -= res / dg;
        res = g(p);
        it += 1;
    }
    let multiplier = s_r + 0.5 * p;
    let sigma = sx - nalgebra::Matrix3::identity() * multiplier;
    let sigma_io = ims_invariant(&sigma);
    if sigma_io <= 0.0 {
        return Err(Error::param("c_e", "preload intramural stress is not positive"));
    }
    Ok(HomeostaticState {
        pressure: p,
        sigma_io,
        tau_wo: poiseuille(flow_rate, mu, params.a_o, 0.0).1,
        flow_rate,
        multiplier,
        radial_offset: 0.0,
        axial_force: sigma[(1, 1)] * wall_area(params.a_o, params.h_o),
    })
}

/// Set points of a patch that is in equilibrium at the identity deformation
/// under a local pressure and wall shear.
pub fn local_homeostasis(
    params: &MixtureParams,
    pressure: f64,
    tau_w: f64,
    flow_rate: f64,
) -> Result<HomeostaticState> {
    if !(tau_w > 0.0) {
        return Err(Error::param("tau_wo", format!("must be positive, got {tau_w}")));
    }
    let sx = mixture_extra_stress(&identity_state(params), params)?;
    let multiplier = sx[(0, 0)] - pressure * params.a_o / params.h_o;
    let sigma = sx - nalgebra::Matrix3::identity() * multiplier;
    let sigma_io = ims_invariant(&sigma);
    if sigma_io <= 0.0 {
        return Err(Error::param("pressure", "local intramural stress is not positive"));
    }
    Ok(HomeostaticState {
        pressure,
        sigma_io,
        tau_wo: tau_w,
        flow_rate,
        multiplier,
        radial_offset: sx[(2, 2)] - multiplier + 0.5 * pressure,
        axial_force: sigma[(1, 1)] * wall_area(params.a_o, params.h_o),
    })
}

/// Stimuli (Δσ_I, Δτ_w) relative to the set points.
pub fn equilibrated_stimuli(sigma_i: f64, tau_w: f64, home: &HomeostaticState) -> Result<(f64, f64)> {
    check_set_points(home)?;
    Ok((sigma_i / home.sigma_io - 1.0, tau_w / home.tau_wo - 1.0))
}

pub(crate) fn check_set_points(home: &HomeostaticState) -> Result<()> {
    if !(home.sigma_io > 0.0) {
        return Err(Error::param("sigma_io", "homeostatic set point must be positive"));
    }
    if !(home.tau_wo > 0.0) {
        return Err(Error::param("tau_wo", "homeostatic set point must be positive"));
    }
    Ok(())
}

/// p_h = σ^x_I − σ_Io·[1 + K·(τ_w/τ_wo − 1)].
pub fn lagrange_multiplier(sigma_x_i: f64, home: &HomeostaticState, k_h: f64, tau_w: f64) -> f64 {
    sigma_x_i - home.sigma_io * (1.0 + k_h * (tau_w / home.tau_wo - 1.0))
}

/// Poiseuille-based WSS stimulus of the solid-only model.
pub fn gr_wss_stimulus(lambda_theta: f64, lambda_r: f64, r_o: f64, a_o: f64) -> Result<f64> {
    let q = r_o / a_o;
    let ratio = q * lambda_theta - (q - 1.0) * lambda_r;
    if !(ratio > 0.0) || !ratio.is_finite() {
        return Err(Error::DegenerateGeometry(format!(
            "evolved radius ratio {ratio} is not positive"
        )));
    }
    Ok(ratio.powi(-3) - 1.0)
}
