//! Temperatures and the Boltzmann constant.
//!
//! Everything downstream works with the inverse temperature β in 1/eV.
//! Celsius and kelvin only appear at input/output boundaries.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Boltzmann constant in eV/K (CODATA 2018, exact).
pub const BOLTZMANN_EV_PER_K: f64 = 8.617333262e-5;

/// Offset between the Celsius and kelvin scales.
pub const CELSIUS_OFFSET: f64 = 273.15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "unit", content = "value", rename_all = "snake_case")]
pub enum Temperature {
    Celsius(f64),
    Kelvin(f64),
    /// Inverse temperature in 1/eV.
    Beta(f64),
}

impl Temperature {
    pub fn celsius(value: f64) -> Self {
        Temperature::Celsius(value)
    }

    pub fn kelvin(value: f64) -> Self {
        Temperature::Kelvin(value)
    }

    pub fn beta(value: f64) -> Self {
        Temperature::Beta(value)
    }

    /// Absolute temperature in kelvin. `Beta(0)` maps to `+inf`.
    pub fn to_kelvin(self) -> Result<f64> {
        let k = match self {
            Temperature::Celsius(c) => c + CELSIUS_OFFSET,
            Temperature::Kelvin(k) => k,
            Temperature::Beta(b) => {
                if !(b >= 0.0) || b.is_infinite() {
                    return domain(format!("inverse temperature must be finite and >= 0, got {b}"));
                }
                return Ok(1.0 / (BOLTZMANN_EV_PER_K * b));
            }
        };
        if !(k > 0.0) {
            return domain(format!("absolute temperature must be positive, got {k} K"));
        }
        Ok(k)
    }

    pub fn to_celsius(self) -> Result<f64> {
        Ok(self.to_kelvin()? - CELSIUS_OFFSET)
    }

    /// Inverse temperature `1 / (k_B T)` in 1/eV.
    pub fn to_beta(self) -> Result<f64> {
        match self {
            Temperature::Beta(b) => {
                if !(b >= 0.0) || b.is_infinite() {
                    return domain(format!("inverse temperature must be finite and >= 0, got {b}"));
                }
                Ok(b)
            }
            other => Ok(1.0 / (BOLTZMANN_EV_PER_K * other.to_kelvin()?)),
        }
    }
}

impl fmt::Display for Temperature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_celsius() {
            Ok(c) => write!(f, "{c:.2} °C"),
            Err(_) => write!(f, "{self:?}"),
        }
    }
}

/// Converts a temperature to β. Free-function form of [`Temperature::to_beta`].
pub fn to_beta(t: Temperature) -> Result<f64> {
    t.to_beta()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn freezing_point_beta() {
        // 0.05 / (k_B * 273.15), evaluated with mpmath at 30 digits.
        let b = to_beta(Temperature::celsius(0.0)).unwrap();
        assert!((b * 0.05 - 2.124_202_475_150_208).abs() < 1e-12);
    }

    #[test]
    fn sixty_celsius_beta() {
        let b = to_beta(Temperature::celsius(60.0)).unwrap();
        assert!((b * 0.05 - 1.741_635_617_851_656).abs() < 1e-12);
    }

    #[test]
    fn infinite_temperature_is_zero_beta() {
        let b = to_beta(Temperature::kelvin(f64::MAX)).unwrap();
        assert!(b < 1e-300);
        assert_eq!(Temperature::beta(0.0).to_kelvin().unwrap(), f64::INFINITY);
    }

    #[test]
    fn non_positive_kelvin_rejected() {
        assert!(to_beta(Temperature::kelvin(0.0)).is_err());
        assert!(to_beta(Temperature::celsius(-300.0)).is_err());
        assert!(to_beta(Temperature::beta(-1.0)).is_err());
        assert!(to_beta(Temperature::kelvin(f64::NAN)).is_err());
    }

    #[test]
    fn celsius_round_trip() {
        for c in [-200.0, -40.0, 0.0, 60.0, 136.7, 1.0e4] {
            let b = Temperature::celsius(c).to_beta().unwrap();
            let back = Temperature::beta(b).to_celsius().unwrap();
            assert!((back - c).abs() < 1e-9, "{c} -> {back}");
        }
    }
}
