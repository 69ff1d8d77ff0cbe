//! Unit systems. Boltzmann's constant is fixed to one, so temperatures are
//! carried in energy units throughout the crate.

use crate::error::{require_positive, Result};

/// CODATA 2018 values used by the SI unit system.
pub mod si {
    /// Reduced Planck constant in J s.
    pub const HBAR: f64 = 1.054_571_817e-34;
    /// Unified atomic mass unit in kg.
    pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
    /// Electron mass in u.
    pub const ELECTRON_MASS_U: f64 = 5.485_799_090_65e-4;
    /// Atomic mass of neutral 174Yb in u.
    pub const YB174_ATOM_MASS_U: f64 = 173.938_866_4;
    /// Mass of a singly ionised 174Yb+ in kg.
    pub const YB174_ION_MASS: f64 = (YB174_ATOM_MASS_U - ELECTRON_MASS_U) * ATOMIC_MASS_UNIT;
    /// Boltzmann constant in J/K, only for converting reported temperatures.
    pub const BOLTZMANN: f64 = 1.380_649e-23;
    /// Lattice period of the ion-trap potential used when none is configured (m).
    pub const DEFAULT_LATTICE_PERIOD: f64 = 185e-9;
}

/// Action and mass units of a calculation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSystem {
    pub hbar: f64,
    pub mass: f64,
}

impl UnitSystem {
    /// hbar = m = 1.
    pub const NATURAL: UnitSystem = UnitSystem {
        hbar: 1.0,
        mass: 1.0,
    };

    pub fn new(hbar: f64, mass: f64) -> Result<Self> {
        require_positive("units.hbar", hbar)?;
        require_positive("units.mass", mass)?;
        Ok(UnitSystem { hbar, mass })
    }

    /// SI units for a particle of the given mass in kg.
    pub fn si(mass: f64) -> Result<Self> {
        Self::new(si::HBAR, mass)
    }

    /// SI units for a 174Yb+ ion.
    pub fn ytterbium_ion() -> Self {
        UnitSystem {
            hbar: si::HBAR,
            mass: si::YB174_ION_MASS,
        }
    }

    /// Same mass with an effective Planck constant `hbar / xi`.
    pub fn with_reduced_hbar(self, xi: f64) -> Result<Self> {
        require_positive("xi", xi)?;
        Ok(UnitSystem {
            hbar: self.hbar / xi,
            mass: self.mass,
        })
    }

    /// hbar^2 / 2m, the prefactor of the kinetic operator.
    #[inline]
    pub fn kinetic_prefactor(&self) -> f64 {
        self.hbar * self.hbar / (2.0 * self.mass)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("units.hbar", self.hbar)?;
        require_positive("units.mass", self.mass)
    }
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self::NATURAL
    }
}

/// Hot-bath well length in the convention `2 hbar^2 / (m L_h) = 1` with
/// hbar = m = 1.
pub const FIG2_HOT_LENGTH: f64 = 2.0;

/// Barrier-strength unit `2 hbar^2 / (m L)` for a well of length `length`.
pub fn critical_barrier_strength(units: &UnitSystem, length: f64) -> f64 {
    2.0 * units.hbar * units.hbar / (units.mass * length)
}
