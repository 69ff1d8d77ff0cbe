//! Confining potentials in one dimension.
//!
//! Every shape is an even function of `x`. Square-well walls are a domain
//! boundary rather than a large number: outside the well [`evaluate`]
//! returns [`PotentialValue::Wall`], and solvers use hard-wall bases there.
//!
//! [`evaluate`]: PotentialSpec::evaluate

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{require_finite, require_positive, Error, Result};
use crate::math;
use crate::units::UnitSystem;

/// Shape family and its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    /// Infinite square well on `[-length/2, length/2]`.
    SquareWell { length: f64 },
    /// Square well with a central barrier `strength * delta(x)`. Negative
    /// strengths give an attractive well.
    SquareWellDelta { length: f64, strength: f64 },
    /// Square well with a central rectangular barrier of `height` and full `width`.
    SquareWellFiniteBarrier { length: f64, height: f64, width: f64 },
    /// `m omega^2 x^2 / 2`.
    Harmonic { omega: f64 },
    /// Paul trap plus optical lattice:
    /// `m omega^2 a^2 (x^2/(2a^2) + kappa/(4 pi^2) (1 + cos(2 pi x / a)))`.
    IonTrap { omega: f64, kappa: f64, lattice: f64 },
}

impl Shape {
    pub fn name(&self) -> &'static str {
        match self {
            Shape::SquareWell { .. } => "square_well",
            Shape::SquareWellDelta { .. } => "delta_well",
            Shape::SquareWellFiniteBarrier { .. } => "finite_barrier",
            Shape::Harmonic { .. } => "harmonic",
            Shape::IonTrap { .. } => "ion_trap",
        }
    }
}

/// Value of a potential at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PotentialValue {
    Finite(f64),
    /// Beyond an infinite wall.
    Wall,
}

impl PotentialValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            PotentialValue::Finite(v) => Some(v),
            PotentialValue::Wall => None,
        }
    }

    pub fn is_wall(self) -> bool {
        matches!(self, PotentialValue::Wall)
    }
}

/// A validated potential together with the units its parameters are expressed in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialSpec {
    pub shape: Shape,
    pub units: UnitSystem,
}

impl PotentialSpec {
    pub fn new(shape: Shape, units: UnitSystem) -> Result<Self> {
        units.validate()?;
        match shape {
            Shape::SquareWell { length } => require_positive("length", length)?,
            Shape::SquareWellDelta { length, strength } => {
                require_positive("length", length)?;
                require_finite("strength", strength)?;
            }
            Shape::SquareWellFiniteBarrier {
                length,
                height,
                width,
            } => {
                require_positive("length", length)?;
                require_finite("height", height)?;
                if height < 0.0 {
                    return Err(Error::invalid("height", "barrier height must be >= 0"));
                }
                require_positive("width", width)?;
                if width >= length {
                    return Err(Error::invalid("width", "barrier width must be < well length"));
                }
            }
            Shape::Harmonic { omega } => require_positive("omega", omega)?,
            Shape::IonTrap {
                omega,
                kappa,
                lattice,
            } => {
                require_positive("omega", omega)?;
                require_finite("kappa", kappa)?;
                if kappa < 0.0 {
                    return Err(Error::invalid("kappa", "must be >= 0"));
                }
                require_positive("lattice", lattice)?;
            }
        }
        Ok(PotentialSpec { shape, units })
    }

    pub fn square_well(length: f64, units: UnitSystem) -> Result<Self> {
        Self::new(Shape::SquareWell { length }, units)
    }

    pub fn delta_well(length: f64, strength: f64, units: UnitSystem) -> Result<Self> {
        Self::new(Shape::SquareWellDelta { length, strength }, units)
    }

    pub fn finite_barrier(length: f64, height: f64, width: f64, units: UnitSystem) -> Result<Self> {
        Self::new(
            Shape::SquareWellFiniteBarrier {
                length,
                height,
                width,
            },
            units,
        )
    }

    pub fn harmonic(omega: f64, units: UnitSystem) -> Result<Self> {
        Self::new(Shape::Harmonic { omega }, units)
    }

    pub fn ion_trap(omega: f64, kappa: f64, lattice: f64, units: UnitSystem) -> Result<Self> {
        Self::new(
            Shape::IonTrap {
                omega,
                kappa,
                lattice,
            },
            units,
        )
    }

    /// V(x). The delta term of [`Shape::SquareWellDelta`] cannot be sampled, so
    /// `x = 0` is a domain error for that shape.
    pub fn evaluate(&self, x: f64) -> Result<PotentialValue> {
        if !x.is_finite() {
            return Err(Error::Domain {
                shape: self.shape.name(),
                x,
                reason: "x must be finite",
            });
        }
        let m = self.units.mass;
        let value = match self.shape {
            Shape::SquareWell { length } => {
                if x.abs() > 0.5 * length {
                    PotentialValue::Wall
                } else {
                    PotentialValue::Finite(0.0)
                }
            }
            Shape::SquareWellDelta { length, .. } => {
                if x == 0.0 {
                    return Err(Error::Domain {
                        shape: self.shape.name(),
                        x,
                        reason: "delta barrier is not point-evaluable",
                    });
                }
                if x.abs() > 0.5 * length {
                    PotentialValue::Wall
                } else {
                    PotentialValue::Finite(0.0)
                }
            }
            Shape::SquareWellFiniteBarrier {
                length,
                height,
                width,
            } => {
                if x.abs() > 0.5 * length {
                    PotentialValue::Wall
                } else if x.abs() < 0.5 * width {
                    PotentialValue::Finite(height)
                } else {
                    PotentialValue::Finite(0.0)
                }
            }
            Shape::Harmonic { omega } => PotentialValue::Finite(0.5 * m * omega * omega * x * x),
            Shape::IonTrap {
                omega,
                kappa,
                lattice,
            } => {
                let u = x / lattice;
                PotentialValue::Finite(m * omega * omega * lattice * lattice * ion_trap_profile(u, kappa))
            }
        };
        Ok(value)
    }

    /// Potential multiplied pointwise by `xi^2`. Lengths are unchanged.
    pub fn scale(&self, xi: f64) -> Result<Self> {
        require_positive("xi", xi)?;
        let xi2 = xi * xi;
        let shape = match self.shape {
            Shape::SquareWell { length } => Shape::SquareWell { length },
            Shape::SquareWellDelta { length, strength } => Shape::SquareWellDelta {
                length,
                strength: strength * xi2,
            },
            Shape::SquareWellFiniteBarrier {
                length,
                height,
                width,
            } => Shape::SquareWellFiniteBarrier {
                length,
                height: height * xi2,
                width,
            },
            Shape::Harmonic { omega } => Shape::Harmonic { omega: omega * xi },
            Shape::IonTrap {
                omega,
                kappa,
                lattice,
            } => Shape::IonTrap {
                omega: omega * xi,
                kappa,
                lattice,
            },
        };
        Ok(PotentialSpec {
            shape,
            units: self.units,
        })
    }

    /// Same potential with `hbar` replaced by `hbar / xi`.
    pub fn with_reduced_hbar(&self, xi: f64) -> Result<Self> {
        Ok(PotentialSpec {
            shape: self.shape,
            units: self.units.with_reduced_hbar(xi)?,
        })
    }

    /// Half-width of the hard-wall box, if the shape has one.
    pub fn wall_half_width(&self) -> Option<f64> {
        match self.shape {
            Shape::SquareWell { length }
            | Shape::SquareWellDelta { length, .. }
            | Shape::SquareWellFiniteBarrier { length, .. } => Some(0.5 * length),
            Shape::Harmonic { .. } | Shape::IonTrap { .. } => None,
        }
    }

    /// Global minimum of the sampled (non-delta) part of the potential.
    pub fn minimum(&self) -> f64 {
        match self.shape {
            Shape::SquareWell { .. }
            | Shape::SquareWellDelta { .. }
            | Shape::SquareWellFiniteBarrier { .. }
            | Shape::Harmonic { .. } => 0.0,
            Shape::IonTrap {
                omega,
                kappa,
                lattice,
            } => {
                let scale = self.units.mass * omega * omega * lattice * lattice;
                scale * ion_trap_profile(ion_trap_minimum(kappa), kappa)
            }
        }
    }

    /// Positions where the potential is not smooth, sorted, for quadrature splitting.
    pub fn kinks(&self) -> Vec<f64> {
        match self.shape {
            Shape::SquareWell { length } | Shape::SquareWellDelta { length, .. } => {
                alloc::vec![-0.5 * length, 0.5 * length]
            }
            Shape::SquareWellFiniteBarrier { length, width, .. } => {
                alloc::vec![-0.5 * length, -0.5 * width, 0.5 * width, 0.5 * length]
            }
            Shape::Harmonic { .. } | Shape::IonTrap { .. } => Vec::new(),
        }
    }

    /// Half-width `b` with `V(x) >= level` for every `|x| >= b`, for wall-free
    /// shapes. Both are bounded below by `m omega^2 x^2 / 2`, which gives `b`.
    pub(crate) fn outer_crossing(&self, level: f64) -> Option<f64> {
        let omega = match self.shape {
            Shape::Harmonic { omega } | Shape::IonTrap { omega, .. } => omega,
            _ => return None,
        };
        let b = math::sqrt(2.0 * level.max(0.0) / (self.units.mass * omega * omega));
        (b.is_finite() && b > 0.0).then_some(b)
    }
}

/// Dimensionless ion-trap profile `u^2/2 + kappa/(4 pi^2) (1 + cos 2 pi u)`.
pub fn ion_trap_profile(u: f64, kappa: f64) -> f64 {
    0.5 * u * u + kappa / (4.0 * PI * PI) * (1.0 + math::cos(2.0 * PI * u))
}

/// Location `u >= 0` of the global minimum of [`ion_trap_profile`].
pub fn ion_trap_minimum(kappa: f64) -> f64 {
    if kappa <= 1.0 {
        return 0.0;
    }
    // u = (kappa / 2 pi) sin(2 pi u) has exactly one root in (0, 1/2) for kappa > 1.
    let g = |u: f64| u - kappa / (2.0 * PI) * math::sin(2.0 * PI * u);
    let (mut lo, mut hi) = (1e-12_f64, 0.5_f64);
    if g(lo) >= 0.0 {
        return 0.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-16 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}
