//! Quantum and classical Otto cycles for a particle in a one-dimensional potential.
//!
//! The crate computes eigenspectra (closed forms, the transcendental δ-well
//! condition, or a sinc discrete variable representation), thermalizes them,
//! evaluates the four-stroke Otto cycle and contrasts it with the classical
//! limit obtained by scaling the potential and temperatures by ξ².
//!
//! Everything here is `no_std` with `alloc`. File formats and the command
//! line live in the companion `qotto-cli` crate.

#![no_std]

extern crate alloc;

pub mod cycle;
pub mod error;
pub mod explore;
pub mod limits;
pub mod linalg;
pub mod math;
pub mod potentials;
pub mod quad;
pub mod spectrum;
pub mod thermo;
pub mod units;

pub use cycle::{CycleResult, Mode};
pub use error::{Error, Result};
pub use potentials::{PotentialSpec, PotentialValue, Shape};
pub use spectrum::{Parity, Solver, Spectrum};
pub use thermo::ThermalEnsemble;
pub use units::UnitSystem;

/// Crate version, recorded in output metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
