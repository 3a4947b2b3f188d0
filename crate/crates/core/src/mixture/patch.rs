//! Thin-wall mechanobiological equilibrium of one (θ, z) patch.
//!
//! Unknowns x = (λθ, λz, J, φc). Residuals:
//! R1 circumferential balance σθ = P_eff·a/h,
//! R2 gap between the mechanobiological multiplier p_h and the one fixed by
//!    the mean radial traction (σr = −P_eff/2 relative to preload),
//!    which is Δσ_I − K·Δτ_w with Δσ_I taken from the balanced stress,
//! R3 muscle-to-collagen mass ratio held at its original value,
//! R4 axial wall force held at its in-vivo value.

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use super::constitutive::{mixture_extra_stress_with, FiberStresses, MixtureState};
use super::homeostasis::{check_set_points, gr_wss_stimulus, lagrange_multiplier, wall_area};
use super::{HomeostaticState, MixtureParams};
use crate::{Error, Result};

/// Wall shear input of a patch solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WssLoad {
    /// Solid-only model: shear follows Poiseuille scaling of the evolved radius.
    Gr,
    /// Shear supplied by the fluid [kPa].
    Fsge(f64),
    /// Fluid shear `tau` computed with the wall at `radius`; the patch sees
    /// τ·(radius/a_h)³, which equals `tau` when a_h = radius.
    FsgeAtRadius { tau: f64, radius: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchLoads {
    /// Transmural pressure [kPa].
    pub pressure: f64,
    pub wss: WssLoad,
}

/// Degraded material state produced by the insult.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchInsult {
    pub c_e_h: f64,
    pub k_h: f64,
}

impl PatchInsult {
    pub fn none(params: &MixtureParams) -> Self {
        Self {
            c_e_h: params.c_e,
            k_h: params.k_tau_sigma_o,
        }
    }
}

/// Evolved equilibrium of a patch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatchState {
    pub lambda_theta: f64,
    pub lambda_z: f64,
    pub h_h: f64,
    pub a_h: f64,
    pub j_h: f64,
    pub phi_e_h: f64,
    pub phi_m_h: f64,
    pub phi_c_h: f64,
    pub sigma_i_h: f64,
    pub sigma_x_i_h: f64,
    pub tau_w_h: f64,
    pub p_h: f64,
    pub dsig: f64,
    pub dtau: f64,
    pub c_e_h: f64,
    pub k_h: f64,
    /// Applied transmural pressure [kPa].
    pub pressure: f64,
    /// Newton iterations of the final solve.
    pub iterations: usize,
    /// Infinity norm of the scaled residual at return.
    pub residual: f64,
}

impl PatchState {
    /// The undeformed homeostatic patch.
    pub fn identity(params: &MixtureParams, home: &HomeostaticState) -> Self {
        Self {
            lambda_theta: 1.0,
            lambda_z: 1.0,
            h_h: params.h_o,
            a_h: params.a_o,
            j_h: 1.0,
            phi_e_h: params.phi_e_o,
            phi_m_h: params.phi_m_o,
            phi_c_h: params.phi_c_o,
            sigma_i_h: home.sigma_io,
            sigma_x_i_h: home.sigma_io + home.multiplier,
            tau_w_h: home.tau_wo,
            p_h: home.multiplier,
            dsig: 0.0,
            dtau: 0.0,
            c_e_h: params.c_e,
            k_h: params.k_tau_sigma_o,
            pressure: home.pressure,
            iterations: 0,
            residual: 0.0,
        }
    }

    /// Radial displacement of the inner surface [mm].
    pub fn radial_displacement(&self, params: &MixtureParams) -> f64 {
        self.a_h - params.a_o
    }

    pub fn mixture_state(&self) -> MixtureState {
        MixtureState {
            lambda_theta: self.lambda_theta,
            lambda_z: self.lambda_z,
            phi_e: self.phi_e_h,
            phi_m: self.phi_m_h,
            phi_c: self.phi_c_h,
            c_e_h: self.c_e_h,
        }
    }

    fn unknowns(&self) -> [f64; 4] {
        [self.lambda_theta, self.lambda_z, self.j_h, self.phi_c_h]
    }
}

const MAX_NEWTON: usize = 50;
const MAX_HALVINGS: usize = 20;
const TARGET: f64 = 1e-12;
const ACCEPT: f64 = 1e-9;
const MAX_REL_STEP: f64 = 0.2;

struct System<'a> {
    params: &'a MixtureParams,
    home: &'a HomeostaticState,
    loads: PatchLoads,
    insult: PatchInsult,
    fibers: FiberStresses,
}

struct Eval {
    r: [f64; 4],
    state: PatchState,
}

impl System<'_> {
    fn eval(&self, x: [f64; 4]) -> Option<Eval> {
        let p = self.params;
        let [lt, lz, j, phi_c] = x;
        if !(lt > 0.0 && lz > 0.0 && j > 0.0 && phi_c >= 0.0) || x.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let phi_e = p.phi_e_o / j;
        let phi_m = 1.0 - phi_e - phi_c;
        if phi_m < 0.0 {
            return None;
        }
        let a = p.a_o * lt;
        let h = p.h_o * j / (lt * lz);
        let ms = MixtureState {
            lambda_theta: lt,
            lambda_z: lz,
            phi_e,
            phi_m,
            phi_c,
            c_e_h: self.insult.c_e_h,
        };
        let sx = mixture_extra_stress_with(&ms, p, &self.fibers);
        let sx_i = sx.trace() / 3.0;
        let (dtau, tau) = match self.loads.wss {
            WssLoad::Gr => {
                let d = gr_wss_stimulus(lt, 1.0 / (lt * lz), p.a_o, p.a_o).ok()?;
                (d, self.home.tau_wo * (1.0 + d))
            }
            WssLoad::Fsge(tau) => (tau / self.home.tau_wo - 1.0, tau),
            WssLoad::FsgeAtRadius { tau, radius } => {
                let t = tau * (radius / a).powi(3);
                (t / self.home.tau_wo - 1.0, t)
            }
        };
        let k = self.insult.k_h;
        let p_h = lagrange_multiplier(sx_i, self.home, k, tau);
        let u_outer = a + h - p.a_o - p.h_o;
        let p_eff = self.loads.pressure - p.k_support * u_outer;
        let p_mech = sx[(2, 2)] + 0.5 * p_eff - self.home.radial_offset;
        let sigma_i = sx_i - p_mech;
        let dsig = sigma_i / self.home.sigma_io - 1.0;
        let s0 = self.home.sigma_io;
        let f0 = self.home.axial_force.abs().max(s0 * wall_area(p.a_o, p.h_o) * 1e-3);
        let r = [
            (sx[(0, 0)] - p_h - p_eff * a / h) / s0,
            dsig - k * dtau,
            phi_m - phi_c * p.phi_m_o / p.phi_c_o,
            ((sx[(1, 1)] - p_h) * wall_area(a, h) - self.home.axial_force) / f0,
        ];
        if r.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let state = PatchState {
            lambda_theta: lt,
            lambda_z: lz,
            h_h: h,
            a_h: a,
            j_h: j,
            phi_e_h: phi_e,
            phi_m_h: phi_m,
            phi_c_h: phi_c,
            sigma_i_h: sigma_i,
            sigma_x_i_h: sx_i,
            tau_w_h: tau,
            p_h,
            dsig,
            dtau,
            c_e_h: self.insult.c_e_h,
            k_h: k,
            pressure: self.loads.pressure,
            iterations: 0,
            residual: norm(&r),
        };
        Some(Eval { r, state })
    }

    fn jacobian(&self, x: [f64; 4]) -> Option<Matrix4<f64>> {
        let mut jac = Matrix4::zeros();
        for c in 0..4 {
            let h = 1e-6 * x[c].abs().max(0.1);
            let mut xp = x;
            let mut xm = x;
            xp[c] += h;
            xm[c] -= h;
            let rp = self.eval(xp)?.r;
            let rm = self.eval(xm)?.r;
            for r in 0..4 {
                jac[(r, c)] = (rp[r] - rm[r]) / (2.0 * h);
            }
        }
        Some(jac)
    }

    /// Damped Newton from `x`; returns the converged state or the best residual.
    fn newton(&self, mut x: [f64; 4]) -> std::result::Result<PatchState, f64> {
        let mut cur = match self.eval(x) {
            Some(e) => e,
            None => return Err(f64::INFINITY),
        };
        let mut n = norm(&cur.r);
        for it in 0..MAX_NEWTON {
            if n < TARGET {
                return Ok(PatchState { iterations: it, ..cur.state });
            }
            let Some(jac) = self.jacobian(x) else {
                break;
            };
            let Some(dx) = jac.lu().solve(&-Vector4::from(cur.r)) else {
                break;
            };
            // Limit relative stretch changes so Newton stays on the branch
            // connected to the starting point.
            let growth = (0..3).fold(0.0_f64, |m, i| m.max((dx[i] / x[i]).abs()));
            let mut step = if growth > MAX_REL_STEP { MAX_REL_STEP / growth } else { 1.0 };
            let mut accepted = None;
            for _ in 0..=MAX_HALVINGS {
                let xt = [
                    x[0] + step * dx[0],
                    x[1] + step * dx[1],
                    x[2] + step * dx[2],
                    x[3] + step * dx[3],
                ];
                if let Some(e) = self.eval(xt) {
                    let nt = norm(&e.r);
                    if nt < (1.0 - 1e-4 * step) * n {
                        accepted = Some((xt, e, nt));
                        break;
                    }
                }
                step *= 0.5;
            }
            match accepted {
                Some((xt, e, nt)) => {
                    x = xt;
                    cur = e;
                    n = nt;
                }
                None => break,
            }
        }
        if n < ACCEPT {
            Ok(PatchState {
                iterations: MAX_NEWTON,
                ..cur.state
            })
        } else {
            Err(n)
        }
    }
}

fn norm(r: &[f64; 4]) -> f64 {
    r.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Solves the patch equilibrium, starting from `guess`.
///
/// Without a guess, or when Newton fails from it, the load and degradation are
/// ramped from the homeostatic state in sub-steps so the solution stays on the
/// branch connected to homeostasis.
pub fn solve_patch_equilibrium(
    loads: PatchLoads,
    insult: PatchInsult,
    params: &MixtureParams,
    home: &HomeostaticState,
    guess: Option<&PatchState>,
) -> Result<PatchState> {
    check_set_points(home)?;
    if !loads.pressure.is_finite() {
        return Err(Error::param("pressure", "must be finite"));
    }
    if let WssLoad::Fsge(t) | WssLoad::FsgeAtRadius { tau: t, .. } = loads.wss {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::param("tau_w", format!("must be finite and nonnegative, got {t}")));
        }
    }
    if let WssLoad::FsgeAtRadius { radius, .. } = loads.wss {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::param("radius", format!("must be positive, got {radius}")));
        }
    }
    if !(insult.c_e_h >= 0.0 && insult.k_h >= 0.0) {
        return Err(Error::param("insult", "degraded stiffness and gain must be nonnegative"));
    }
    let fibers = FiberStresses::at_deposition(params)?;
    let system = |s: f64| System {
        params,
        home,
        loads: PatchLoads {
            pressure: home.pressure + s * (loads.pressure - home.pressure),
            wss: match loads.wss {
                WssLoad::Gr => WssLoad::Gr,
                WssLoad::Fsge(t) => WssLoad::Fsge(home.tau_wo + s * (t - home.tau_wo)),
                WssLoad::FsgeAtRadius { tau, radius } => WssLoad::FsgeAtRadius {
                    tau: home.tau_wo + s * (tau - home.tau_wo),
                    radius: params.a_o + s * (radius - params.a_o),
                },
            },
        },
        insult: PatchInsult {
            c_e_h: params.c_e + s * (insult.c_e_h - params.c_e),
            k_h: insult.k_h,
        },
        fibers,
    };
    let identity = [1.0, 1.0, 1.0, params.phi_c_o];
    let mut last = f64::INFINITY;
    if let Some(g) = guess {
        match system(1.0).newton(g.unknowns()) {
            Ok(s) => return Ok(s),
            Err(n) => last = n,
        }
    }

    // Continuation from the homeostatic state.
    let mut s = 0.0_f64;
    let mut ds = 0.1_f64;
    let mut x = identity;
    while s < 1.0 {
        let st = (s + ds).min(1.0);
        match system(st).newton(x) {
            Ok(state) => {
                s = st;
                x = state.unknowns();
                if s >= 1.0 {
                    return Ok(state);
                }
                ds = (ds * 1.5).min(0.25);
            }
            Err(n) => {
                last = n;
                ds *= 0.5;
                if ds < 1e-4 {
                    break;
                }
            }
        }
    }
    Err(Error::NotConverged {
        what: "patch equilibrium".into(),
        iterations: MAX_NEWTON,
        residual: last,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mixture::preload_homeostasis;

    fn setup(k: f64) -> (MixtureParams, HomeostaticState) {
        let p = MixtureParams {
            k_tau_sigma_o: k,
            ..MixtureParams::default()
        };
        let q = 1000.0 * std::f64::consts::PI * p.a_o * p.a_o / 2.0;
        let h = preload_homeostasis(&p, q, 4e-6).unwrap();
        (p, h)
    }

    fn degrade(p: &MixtureParams, f: f64) -> PatchInsult {
        PatchInsult {
            c_e_h: p.c_e * (1.0 - 0.7 * f),
            k_h: p.k_tau_sigma_o * (1.0 - f),
        }
    }

    #[test]
    fn homeostatic_fixed_point() {
        let (p, h) = setup(0.5);
        let loads = PatchLoads {
            pressure: h.pressure,
            wss: WssLoad::Fsge(h.tau_wo),
        };
        let s = solve_patch_equilibrium(loads, PatchInsult::none(&p), &p, &h, None).unwrap();
        assert!((s.lambda_theta - 1.0).abs() < 1e-8);
        assert!((s.j_h - 1.0).abs() < 1e-8);
        assert!(s.dsig.abs() < 1e-8 && s.dtau.abs() < 1e-8);
        assert!((s.phi_c_h - p.phi_c_o).abs() < 1e-8);
    }

    #[test]
    fn full_degradation_without_gain() {
        let (p, h) = setup(0.0);
        let loads = PatchLoads {
            pressure: h.pressure,
            wss: WssLoad::Gr,
        };
        let s = solve_patch_equilibrium(loads, degrade(&p, 1.0), &p, &h, None).unwrap();
        assert!(s.dsig.abs() < 1e-10);
        assert!(s.lambda_theta > 1.5, "{s:?}");
        assert!((s.phi_e_h * s.j_h - p.phi_e_o).abs() < 1e-12);
    }

    #[test]
    fn gain_limits_dilation() {
        let (p, h) = setup(1.0);
        let loads = PatchLoads {
            pressure: h.pressure,
            wss: WssLoad::Gr,
        };
        let s = solve_patch_equilibrium(loads, degrade(&p, 0.6), &p, &h, None).unwrap();
        let (p0, h0) = setup(0.0);
        let s0 = solve_patch_equilibrium(loads, degrade(&p0, 0.6), &p0, &h0, None).unwrap();
        assert!(s.a_h < s0.a_h);
        assert!(s.dtau < 0.0 && s.dsig < 0.0);
        assert!((s.dsig - s.k_h * s.dtau).abs() < 1e-8);
    }

    #[test]
    fn shear_at_radius_matches_plain_shear_at_that_radius() {
        let (p, h) = setup(0.6);
        let plain = PatchLoads {
            pressure: h.pressure,
            wss: WssLoad::Fsge(0.98 * h.tau_wo),
        };
        let s = solve_patch_equilibrium(plain, degrade(&p, 0.3), &p, &h, None).unwrap();
        let scaled = PatchLoads {
            pressure: h.pressure,
            wss: WssLoad::FsgeAtRadius {
                tau: 0.98 * h.tau_wo,
                radius: s.a_h,
            },
        };
        let t = solve_patch_equilibrium(scaled, degrade(&p, 0.3), &p, &h, Some(&s)).unwrap();
        assert!((t.a_h - s.a_h).abs() < 1e-10 * s.a_h);
        assert!((t.tau_w_h - 0.98 * h.tau_wo).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_set_points() {
        let (p, h) = setup(0.0);
        let bad = HomeostaticState { sigma_io: -1.0, ..h };
        let loads = PatchLoads {
            pressure: h.pressure,
            wss: WssLoad::Gr,
        };
        assert!(solve_patch_equilibrium(loads, PatchInsult::none(&p), &p, &bad, None).is_err());
    }
}
