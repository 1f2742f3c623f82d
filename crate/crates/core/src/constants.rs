//! Physical constants (CODATA 2018 exact or recommended values).

use serde::{Deserialize, Serialize};

pub const HBAR: f64 = 1.054_571_817e-34;
pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;

/// Atomic mass of neutral 88Sr in atomic mass units.
pub const SR88_ATOMIC_MASS_U: f64 = 87.905_612_257_1;

/// Ion species and the constants entering the heating-rate conversion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalContext {
    /// kg
    pub ion_mass: f64,
    /// C
    pub ion_charge: f64,
    /// J s
    pub hbar: f64,
    /// J/K
    pub k_b: f64,
}

impl PhysicalContext {
    /// Singly ionised 88Sr.
    pub fn strontium_88() -> Self {
        Self {
            ion_mass: SR88_ATOMIC_MASS_U * ATOMIC_MASS_UNIT - ELECTRON_MASS,
            ion_charge: ELEMENTARY_CHARGE,
            hbar: HBAR,
            k_b: BOLTZMANN,
        }
    }

    pub fn validate(&self) -> crate::Result<()> {
        for (name, v) in [
            ("ion_mass", self.ion_mass),
            ("ion_charge", self.ion_charge),
            ("hbar", self.hbar),
            ("k_B", self.k_b),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(crate::Error::InvalidInput {
                    field: "physical context",
                    reason: format!("{name} must be positive and finite, got {v}"),
                });
            }
        }
        Ok(())
    }
}

impl Default for PhysicalContext {
    fn default() -> Self {
        Self::strontium_88()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strontium_mass_is_88_u() {
        let ctx = PhysicalContext::default();
        let in_u = ctx.ion_mass / ATOMIC_MASS_UNIT;
        assert!((in_u - 87.905).abs() < 1e-3, "{in_u}");
        assert!(ctx.validate().is_ok());
    }
}
