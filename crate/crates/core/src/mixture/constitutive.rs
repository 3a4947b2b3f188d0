//! Constituent strain energies and their Cauchy stresses.

use nalgebra::Matrix3;

use super::MixtureParams;
use crate::{Error, Result};

/// Symmetric 3×3 stress tensor in the (θ, z, r) basis [kPa].
pub type Stress = Matrix3<f64>;

/// Intramural stress invariant: one third of the trace.
pub fn ims_invariant(stress: &Stress) -> f64 {
    stress.trace() / 3.0
}

/// Fung-type fiber energy c1/(4 c2)·[exp(c2 (λ²−1)²) − 1].
pub fn fiber_energy(lambda: f64, c1: f64, c2: f64) -> f64 {
    let e = lambda * lambda - 1.0;
    c1 / (4.0 * c2) * (c2 * e * e).exp_m1()
}

/// Uniaxial Cauchy stress λ·dŴ/dλ of a fiber family.
pub fn fiber_cauchy_stress(lambda: f64, c1: f64, c2: f64) -> Result<f64> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::OutOfRange(format!("fiber stretch {lambda} must be positive")));
    }
    let l2 = lambda * lambda;
    let e = l2 - 1.0;
    let s = c1 * l2 * e * (c2 * e * e).exp();
    if !s.is_finite() {
        return Err(Error::OutOfRange(format!("fiber stress overflows at stretch {lambda}")));
    }
    Ok(s)
}

/// Neo-Hookean elastin energy c·(I1 − 3) for principal stretches.
pub fn elastin_energy(stretches: [f64; 3], c: f64) -> f64 {
    c * (stretches.iter().map(|s| s * s).sum::<f64>() - 3.0)
}

/// Principal elastin extra stresses (θ, z, r) after the deposition stretch.
///
/// The elastin radial stretch follows from incompressibility, 1/(λθ λz).
pub fn elastin_extra_stress(
    lambda_theta: f64,
    lambda_z: f64,
    params: &MixtureParams,
    c_e_h: f64,
) -> [f64; 3] {
    let lambda_r = 1.0 / (lambda_theta * lambda_z);
    let s = |l: f64, g: f64| 2.0 * c_e_h * (l * g).powi(2);
    [
        s(lambda_theta, params.g_e_theta),
        s(lambda_z, params.g_e_z),
        s(lambda_r, params.g_e_r),
    ]
}

/// Constituent stresses that do not depend on the evolved deformation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberStresses {
    pub muscle: f64,
    pub collagen: f64,
}

impl FiberStresses {
    pub fn at_deposition(params: &MixtureParams) -> Result<Self> {
        Ok(Self {
            muscle: fiber_cauchy_stress(params.g_m, params.c1_m, params.c2_m)?,
            collagen: fiber_cauchy_stress(params.g_c, params.c1_c, params.c2_c)?,
        })
    }
}

/// Mass fractions and stretches needed to assemble σ^x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureState {
    pub lambda_theta: f64,
    pub lambda_z: f64,
    pub phi_e: f64,
    pub phi_m: f64,
    pub phi_c: f64,
    pub c_e_h: f64,
}

/// Mass-weighted extra stress σ^x (diagonal in the θ, z, r basis).
///
/// Muscle and collagen sit at their deposition stretch; the diagonal collagen
/// pair projects onto θ and z through sin²α₀ and cos²α₀.
pub fn mixture_extra_stress(state: &MixtureState, params: &MixtureParams) -> Result<Stress> {
    let fibers = FiberStresses::at_deposition(params)?;
    Ok(mixture_extra_stress_with(state, params, &fibers))
}

pub(crate) fn mixture_extra_stress_with(
    state: &MixtureState,
    params: &MixtureParams,
    fibers: &FiberStresses,
) -> Stress {
    let [e_t, e_z, e_r] = elastin_extra_stress(state.lambda_theta, state.lambda_z, params, state.c_e_h);
    let (w_t, w_z) = params.collagen_weights();
    let s_t = state.phi_e * e_t + state.phi_m * fibers.muscle + state.phi_c * w_t * fibers.collagen;
    let s_z = state.phi_e * e_z + state.phi_c * w_z * fibers.collagen;
    let s_r = state.phi_e * e_r;
    Stress::from_diagonal(&nalgebra::Vector3::new(s_t, s_z, s_r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fd(f: impl Fn(f64) -> f64, x: f64) -> f64 {
        let h = 1e-6;
        x * (f(x + h) - f(x - h)) / (2.0 * h)
    }

    #[test]
    fn invariant_is_mean_trace() {
        assert_eq!(ims_invariant(&Stress::from_diagonal_element(3.0)), 3.0);
        assert_eq!(ims_invariant(&Stress::zeros()), 0.0);
        let s = Stress::from_diagonal(&nalgebra::Vector3::new(226.2, -13.99, 100.0));
        assert_relative_eq!(ims_invariant(&s), 104.07, epsilon = 1e-12);
    }

    #[test]
    fn fiber_stress_matches_energy_derivative() {
        for &(c1, c2) in &[(234.9, 4.08), (261.4, 0.24)] {
            for &l in &[0.9, 1.0, 1.1, 1.2, 1.25] {
                let s = fiber_cauchy_stress(l, c1, c2).unwrap();
                let r = fd(|x| fiber_energy(x, c1, c2), l);
                assert!((s - r).abs() <= 1e-6 * r.abs().max(1.0), "{l}: {s} vs {r}");
            }
        }
        assert_eq!(fiber_cauchy_stress(1.0, 234.9, 4.08).unwrap(), 0.0);
    }

    #[test]
    fn fiber_stress_rejects_bad_stretch() {
        assert!(fiber_cauchy_stress(0.0, 1.0, 1.0).is_err());
        assert!(fiber_cauchy_stress(30.0, 234.9, 4.08).is_err());
    }

    #[test]
    fn elastin_at_identity_keeps_deposition_stretch() {
        let p = MixtureParams::default();
        let s = elastin_extra_stress(1.0, 1.0, &p, p.c_e);
        assert_relative_eq!(s[0], 2.0 * p.c_e * p.g_e_theta.powi(2));
        assert_relative_eq!(s[1], 2.0 * p.c_e * p.g_e_z.powi(2));
        assert_relative_eq!(s[2], 2.0 * p.c_e * p.g_e_r.powi(2));
        assert_eq!(elastin_extra_stress(1.3, 0.8, &p, 0.0), [0.0; 3]);
    }

    #[test]
    fn elastin_theta_stress_matches_energy() {
        let p = MixtureParams::default();
        let l = 1.1 * p.g_e_theta;
        let s = elastin_extra_stress(1.1, 1.0, &p, p.c_e)[0];
        let r = fd(|x| elastin_energy([x, p.g_e_z, p.g_e_r], p.c_e), l);
        assert_relative_eq!(s, r, max_relative = 1e-6);
    }

    #[test]
    fn pure_elastin_mixture() {
        let p = MixtureParams::default();
        let st = MixtureState {
            lambda_theta: 1.0,
            lambda_z: 1.0,
            phi_e: 1.0,
            phi_m: 0.0,
            phi_c: 0.0,
            c_e_h: p.c_e,
        };
        let s = mixture_extra_stress(&st, &p).unwrap();
        let e = elastin_extra_stress(1.0, 1.0, &p, p.c_e);
        assert_eq!([s[(0, 0)], s[(1, 1)], s[(2, 2)]], e);
        assert_eq!(s[(0, 1)], 0.0);
    }

    #[test]
    fn stress_is_linear_in_stiffness() {
        let p = MixtureParams::default();
        let mut q = p.clone();
        q.c_e *= 2.0;
        q.c1_m *= 2.0;
        q.c1_c *= 2.0;
        let st = MixtureState {
            lambda_theta: 1.2,
            lambda_z: 0.9,
            phi_e: 0.3,
            phi_m: 0.35,
            phi_c: 0.35,
            c_e_h: p.c_e,
        };
        let st2 = MixtureState { c_e_h: q.c_e, ..st };
        let a = mixture_extra_stress(&st, &p).unwrap();
        let b = mixture_extra_stress(&st2, &q).unwrap();
        assert_relative_eq!(b, a * 2.0, max_relative = 1e-14);
    }
}
