//! Independent oracles: closed-form fixed points, finite-difference
//! constitutive checks and the Poiseuille scaling relations.
//!
//! None of these call the code they check; energies and reference solutions
//! are restated here.

mod suite;

pub use suite::{run_suite, test_problem, tube_benchmark, SuiteOptions, STRETCH_SAMPLES};

use serde::Serialize;

use crate::mixture::PatchState;
use crate::{Error, Result};

/// Outcome of one oracle comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub name: String,
    pub computed: Vec<f64>,
    pub reference: Vec<f64>,
    /// Largest absolute error.
    pub abs_error: f64,
    /// Largest relative error (against max(|reference|, floor)).
    pub rel_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl OracleReport {
    /// Compares elementwise with a relative tolerance; `floor` bounds the
    /// denominator away from zero.
    pub fn compare(name: impl Into<String>, computed: Vec<f64>, reference: Vec<f64>, tolerance: f64, floor: f64) -> Self {
        let mut abs_error = 0.0_f64;
        let mut rel_error = 0.0_f64;
        let mut finite = computed.len() == reference.len();
        for (c, r) in computed.iter().zip(&reference) {
            let e = (c - r).abs();
            finite &= e.is_finite();
            abs_error = abs_error.max(e);
            rel_error = rel_error.max(e / r.abs().max(floor));
        }
        Self {
            name: name.into(),
            computed,
            reference,
            abs_error,
            rel_error,
            tolerance,
            pass: finite && rel_error <= tolerance,
        }
    }

    /// A check whose expected outcome is failure: passes iff `inner` failed.
    pub fn negative_control(inner: OracleReport) -> Self {
        Self {
            name: format!("{} (negative control)", inner.name),
            pass: !inner.pass,
            ..inner
        }
    }
}

/// (I − A)⁻¹ b by Gaussian elimination with partial pivoting.
pub fn linear_fixedpoint_reference(a: &[Vec<f64>], b: &[f64]) -> Result<Vec<f64>> {
    let n = b.len();
    if a.len() != n || a.iter().any(|row| row.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: a.len(),
        });
    }
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row: Vec<f64> = (0..n).map(|j| f64::from(i == j) - a[i][j]).collect();
            row.push(b[i]);
            row
        })
        .collect();
    let scale = m.iter().flat_map(|r| r[..n].iter()).fold(0.0_f64, |s, v| s.max(v.abs()));
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))
            .unwrap_or(c);
        if m[p][c].abs() <= 1e-14 * scale.max(1.0) {
            return Err(Error::Singular("I - A".into()));
        }
        m.swap(c, p);
        for i in c + 1..n {
            let f = m[i][c] / m[c][c];
            if f != 0.0 {
                for j in c..=n {
                    m[i][j] -= f * m[c][j];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| m[i][j] * x[j]).sum();
        x[i] = (m[i][n] - s) / m[i][i];
    }
    Ok(x)
}

/// Step of the central difference in [`fd_check_stress`].
pub const FD_STEP: f64 = 1e-6;

/// Checks a uniaxial stress law σ(λ) against λ·dW/dλ of its energy by a
/// central difference at each sample.
///
/// `floor` is the stress magnitude below which the error is taken as
/// absolute (for σ = 0 at λ = 1).
pub fn fd_check_stress(
    name: &str,
    energy: impl Fn(f64) -> f64,
    stress: impl Fn(f64) -> Result<f64>,
    samples: &[f64],
    tolerance: f64,
    floor: f64,
) -> OracleReport {
    let mut computed = Vec::with_capacity(samples.len());
    let mut reference = Vec::with_capacity(samples.len());
    for &l in samples {
        computed.push(stress(l).unwrap_or(f64::NAN));
        reference.push(l * (energy(l + FD_STEP) - energy(l - FD_STEP)) / (2.0 * FD_STEP));
    }
    OracleReport::compare(name, computed, reference, tolerance, floor)
}

/// Poiseuille-scaling predictions next to the resolved stimuli.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimplifiedRelations {
    /// Q/Q_b·(a_b/a)³ − 1.
    pub dtau_poiseuille: f64,
    /// τ/τ_b − 1 from the states.
    pub dtau_actual: f64,
    /// (P a/h)/(P_b a_b/h_b) − 1, the thin-wall hoop stress ratio.
    pub dsig_laplace: f64,
    /// σ_I/σ_I,b − 1 from the states.
    pub dsig_actual: f64,
    /// Shear relation check: (1 + dtau_actual) against (1 + dtau_poiseuille).
    pub report: OracleReport,
}

/// Geometry-only stimulus predictions τ ∼ Q/a³ and σ ∼ P·a/h between two
/// converged states, against the stimuli the states actually carry.
pub fn simplified_relations(
    before: &PatchState,
    after: &PatchState,
    flow: [f64; 2],
    pressure: [f64; 2],
    tolerance: f64,
) -> Result<SimplifiedRelations> {
    if !(before.a_h > 0.0 && after.a_h > 0.0 && before.h_h > 0.0 && after.h_h > 0.0) {
        return Err(Error::DegenerateGeometry("radius and thickness must be positive".into()));
    }
    if !(flow[0] > 0.0 && pressure[0] != 0.0) {
        return Err(Error::param("flow/pressure", "reference flow and pressure must be nonzero"));
    }
    let dtau_poiseuille = flow[1] / flow[0] * (before.a_h / after.a_h).powi(3) - 1.0;
    let dtau_actual = after.tau_w_h / before.tau_w_h - 1.0;
    let dsig_laplace = (pressure[1] * after.a_h / after.h_h) / (pressure[0] * before.a_h / before.h_h) - 1.0;
    let dsig_actual = after.sigma_i_h / before.sigma_i_h - 1.0;
    let report = OracleReport::compare(
        "shear scaling tau ~ Q/a^3",
        vec![1.0 + dtau_actual],
        vec![1.0 + dtau_poiseuille],
        tolerance,
        1e-12,
    );
    Ok(SimplifiedRelations {
        dtau_poiseuille,
        dtau_actual,
        dsig_laplace,
        dsig_actual,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_solutions() {
        assert_eq!(linear_fixedpoint_reference(&[vec![0.0, 0.0], vec![0.0, 0.0]], &[1.0, 2.0]).unwrap(), vec![1.0, 2.0]);
        assert_eq!(linear_fixedpoint_reference(&[vec![0.5]], &[1.0]).unwrap(), vec![2.0]);
        // (I − A) = [[0.1, −0.3], [0, 0.2]]: x2 = 5, x1 = (1 + 1.5)/0.1 = 25.
        let x = linear_fixedpoint_reference(&[vec![0.9, 0.3], vec![0.0, 0.8]], &[1.0, 1.0]).unwrap();
        assert!((x[0] - 25.0).abs() < 1e-12 && (x[1] - 5.0).abs() < 1e-12);
        assert!(linear_fixedpoint_reference(&[vec![1.0]], &[1.0]).is_err());
    }

    #[test]
    fn fd_check_detects_perturbation() {
        let w = |l: f64| l.powi(3);
        let good = fd_check_stress("cubic", w, |l| Ok(3.0 * l.powi(3)), &[0.9, 1.1], 1e-6, 1e-8);
        assert!(good.pass, "{good:?}");
        let bad = fd_check_stress("cubic", w, |l| Ok(3.03 * l.powi(3)), &[0.9, 1.1], 1e-6, 1e-8);
        assert!(!bad.pass);
        assert!(OracleReport::negative_control(bad).pass);
    }

    #[test]
    fn report_pass_iff_within_tolerance() {
        assert!(OracleReport::compare("x", vec![1.0 + 1e-7], vec![1.0], 1e-6, 0.0).pass);
        assert!(!OracleReport::compare("x", vec![1.0 + 1e-5], vec![1.0], 1e-6, 0.0).pass);
        assert!(!OracleReport::compare("x", vec![f64::NAN], vec![1.0], 1e-6, 0.0).pass);
        assert!(!OracleReport::compare("x", vec![1.0], vec![1.0, 2.0], 1e-6, 0.0).pass);
    }
}
