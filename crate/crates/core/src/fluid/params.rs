use serde::{Deserialize, Serialize};

use crate::{Error, Result, KPA_PER_MMHG};

/// Newtonian blood properties and boundary data (mm, kg, s, kPa).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FluidParams {
    /// Dynamic viscosity [kg/(mm·s)].
    pub mu: f64,
    /// Density [kg/mm³].
    pub rho: f64,
    /// Peak velocity of the parabolic inflow [mm/s].
    pub u_in: f64,
    /// Outlet pressure [kPa]. Also read as a string with a unit,
    /// "104.9 mmHg" or "13.98 kPa".
    #[serde(deserialize_with = "pressure")]
    pub p_out: f64,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PressureInput {
    Kpa(f64),
    Text(String),
}

/// Pressure in kPa from a number (kPa) or "<value> mmHg" / "<value> kPa".
pub fn parse_pressure(text: &str) -> Result<f64> {
    let t = text.trim();
    let (num, factor) = if let Some(v) = t.strip_suffix("mmHg") {
        (v, KPA_PER_MMHG)
    } else if let Some(v) = t.strip_suffix("kPa") {
        (v, 1.0)
    } else {
        return Err(Error::param("pressure", format!("`{t}` needs a unit suffix, mmHg or kPa")));
    };
    num.trim()
        .parse::<f64>()
        .map(|v| v * factor)
        .map_err(|e| Error::param("pressure", format!("`{t}`: {e}")))
}

fn pressure<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    match PressureInput::deserialize(d)? {
        PressureInput::Kpa(v) => Ok(v),
        PressureInput::Text(s) => parse_pressure(&s).map_err(serde::de::Error::custom),
    }
}

impl Default for FluidParams {
    fn default() -> Self {
        Self {
            mu: 4.0e-6,
            rho: 1.06e-6,
            u_in: 1000.0,
            p_out: 104.9 * KPA_PER_MMHG,
        }
    }
}

impl FluidParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("mu", self.mu), ("rho", self.rho), ("u_in", self.u_in), ("p_out", self.p_out)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, format!("must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Kinematic viscosity [mm²/s].
    pub fn nu(&self) -> f64 {
        self.mu / self.rho
    }

    /// Flow rate of the parabolic inflow on an inlet of radius `a`.
    pub fn inflow_rate(&self, a: f64) -> f64 {
        0.5 * self.u_in * std::f64::consts::PI * a * a
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pressure_units() {
        assert!((parse_pressure("104.9 mmHg").unwrap() - 104.9 * 0.1333).abs() < 1e-12);
        assert_eq!(parse_pressure("13.5kPa").unwrap(), 13.5);
        assert!(parse_pressure("13.5").is_err());
        assert!(parse_pressure("abc mmHg").is_err());
    }

    #[test]
    fn defaults() {
        let f = FluidParams::default();
        assert!(f.validate().is_ok());
        assert!((f.inflow_rate(0.647) - 657.5).abs() < 0.1);
    }
}
