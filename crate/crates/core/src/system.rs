use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// ħ in J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant in J/K.
pub const K_B: f64 = 1.380_649e-23;

/// ¹H gyromagnetic ratio, rad·s⁻¹·T⁻¹.
pub const GAMMA_1H: f64 = 2.675_221_874_4e8;
/// ¹³C gyromagnetic ratio, rad·s⁻¹·T⁻¹.
pub const GAMMA_13C: f64 = 6.728_284e7;

/// Physical parameters of the heteronuclear pair. Spin 1 is ¹H, spin 2 is ¹³C.
///
/// Frequencies are angular (rad/s) with ħ = 1; linewidths are in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinSystem {
    pub gamma1: f64,
    pub gamma2: f64,
    /// Static field, tesla.
    pub b_field: f64,
    /// Sample temperature, kelvin.
    pub temperature: f64,
    /// Scalar coupling J, rad/s.
    pub j: f64,
    pub linewidth1: f64,
    pub linewidth2: f64,
}

impl Default for SpinSystem {
    /// ¹H–¹³C pair with J/2π = 138 Hz at 11.7 T and room temperature.
    fn default() -> Self {
        Self {
            gamma1: GAMMA_1H,
            gamma2: GAMMA_13C,
            b_field: 11.7,
            temperature: 298.0,
            j: 2.0 * PI * 138.0,
            linewidth1: 3.0,
            linewidth2: 3.0,
        }
    }
}

impl SpinSystem {
    pub fn validate(&self) -> Result<()> {
        let checks: [(&'static str, f64); 7] = [
            ("gamma1", self.gamma1),
            ("gamma2", self.gamma2),
            ("b_field", self.b_field),
            ("temperature", self.temperature),
            ("j", self.j),
            ("linewidth1", self.linewidth1),
            ("linewidth2", self.linewidth2),
        ];
        for (name, v) in checks {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, format!("must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }

    pub fn with_j_hz(mut self, j_hz: f64) -> Self {
        self.j = 2.0 * PI * j_hz;
        self
    }

    /// J/2π in Hz.
    pub fn j_hz(&self) -> f64 {
        self.j / (2.0 * PI)
    }

    /// Larmor frequency Ω₁ = γ₁B, rad/s.
    pub fn larmor1(&self) -> f64 {
        self.gamma1 * self.b_field
    }

    pub fn larmor2(&self) -> f64 {
        self.gamma2 * self.b_field
    }

    /// ε₁ = ħΩ₁ / (4 k_B T).
    pub fn epsilon1(&self) -> f64 {
        HBAR * self.larmor1() / (4.0 * K_B * self.temperature)
    }

    pub fn epsilon2(&self) -> f64 {
        HBAR * self.larmor2() / (4.0 * K_B * self.temperature)
    }

    pub fn linewidth(&self, spin: crate::states::Spin) -> f64 {
        match spin {
            crate::states::Spin::One => self.linewidth1,
            crate::states::Spin::Two => self.linewidth2,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_larmor_is_about_500_mhz() {
        let sys = SpinSystem::default();
        let mhz = sys.larmor1() / (2.0 * PI) / 1e6;
        assert!((mhz - 500.0).abs() < 5.0, "{mhz}");
        assert!((sys.j_hz() - 138.0).abs() < 1e-12);
    }

    #[test]
    fn polarization_ratio_matches_gyromagnetic_ratio() {
        let sys = SpinSystem::default();
        let ratio = sys.epsilon1() / sys.epsilon2();
        assert!((ratio - sys.gamma1 / sys.gamma2).abs() < 1e-12);
        assert!((ratio - 3.977).abs() < 1e-3, "{ratio}");
    }

    #[test]
    fn rejects_nonpositive_temperature() {
        let sys = SpinSystem {
            temperature: 0.0,
            ..SpinSystem::default()
        };
        assert!(sys.validate().is_err());
    }
}
