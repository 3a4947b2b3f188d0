use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Interface radial displacements exchanged between the fields [mm].
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct InterfaceField {
    pub values: Vec<f64>,
}

impl InterfaceField {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn zeros(n: usize) -> Self {
        Self { values: vec![0.0; n] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn norm(&self) -> f64 {
        dot(&self.values, &self.values).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub(crate) fn check_len(&self, other: &Self) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        Ok(())
    }
}

impl From<Vec<f64>> for InterfaceField {
    fn from(values: Vec<f64>) -> Self {
        Self { values }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// r = d̃ − d.
pub fn residual(d_tilde: &InterfaceField, d: &InterfaceField) -> Result<InterfaceField> {
    d.check_len(d_tilde)?;
    Ok(d_tilde.values.iter().zip(&d.values).map(|(a, b)| a - b).collect::<Vec<_>>().into())
}

/// ‖r‖ < eps0·‖d‖, or ‖r‖ < eps0 when d vanishes.
pub fn converged(r: &InterfaceField, d: &InterfaceField, eps0: f64) -> bool {
    let rn = r.norm();
    let dn = d.norm();
    if dn == 0.0 {
        rn < eps0
    } else {
        rn < eps0 * dn
    }
}

/// d + ω·(d̃ − d); exactly d when d̃ = d.
pub fn static_relax(d_tilde_prev: &InterfaceField, d_prev: &InterfaceField, omega: f64) -> Result<InterfaceField> {
    d_prev.check_len(d_tilde_prev)?;
    if !(omega > 0.0 && omega <= 1.0) {
        return Err(Error::param("omega", format!("must lie in (0, 1], got {omega}")));
    }
    if omega == 1.0 {
        return Ok(d_tilde_prev.clone());
    }
    Ok(d_tilde_prev
        .values
        .iter()
        .zip(&d_prev.values)
        .map(|(a, b)| b + omega * (a - b))
        .collect::<Vec<_>>()
        .into())
}

/// ω_k = −ω_{k−1}·(r_{k−1}·Δr)/‖Δr‖².
pub fn aitken_omega(omega_prev: f64, r_prev: &InterfaceField, r_curr: &InterfaceField) -> Result<f64> {
    r_prev.check_len(r_curr)?;
    let dr: Vec<f64> = r_curr.values.iter().zip(&r_prev.values).map(|(a, b)| a - b).collect();
    let n2 = dot(&dr, &dr);
    if n2.sqrt() < 1e-14 {
        return Err(Error::Stagnation(n2.sqrt()));
    }
    Ok(-omega_prev * dot(&r_prev.values, &dr) / n2)
}
