use std::f64::consts::PI;

/// Poiseuille pressure drop and wall shear: (8μlQ/(πa⁴), 4μQ/(πa³)).
///
/// With μ in kg/(mm·s), Q in mm³/s and lengths in mm the result is in kPa.
pub fn poiseuille(q: f64, mu: f64, a: f64, l: f64) -> (f64, f64) {
    let a3 = a * a * a;
    (8.0 * mu * l * q / (PI * a3 * a), 4.0 * mu * q / (PI * a3))
}

/// ρ·u·D/μ.
pub fn reynolds(rho: f64, mu: f64, mean_u: f64, diameter: f64) -> f64 {
    rho * mean_u * diameter / mu
}
