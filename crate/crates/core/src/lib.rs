//! Wire-mediated coupling of individually trapped ions.
//!
//! Two (or more) ions held in separate harmonic wells are coupled through the
//! charges their motion induces on a shared, electrically floating wire. This
//! crate turns trap geometry into design numbers and simulates the resulting
//! coupled motion:
//!
//! - [`physmodel`]: constants, ion species and the validated [`SystemConfig`].
//! - [`electrostatics`]: wire and site potentials, induced charge, the coupling
//!   constant and a finite-difference cross-check of it.
//! - [`dynamics`]: exchange time and phase, exact classical normal modes, a
//!   truncated Fock-space propagator, the rotating-wave (beam-splitter)
//!   evolution and the N-ion generalization.
//! - [`circuit`]: the per-ion series LC equivalent, the wire capacitance, the
//!   circuit form of the exchange rate and a time-domain network simulator.
//! - [`decoherence`]: induced current, Ohmic dissipation, Johnson heating and
//!   the aggregate noise budget.
//!
//! All quantities are SI. The crate is `no_std` and needs only `alloc`.
#![no_std]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod circuit;
pub mod constants;
pub mod decoherence;
pub mod dynamics;
pub mod electrostatics;
mod error;
pub mod physmodel;

pub use constants::PhysicalConstants;
pub use error::{Error, Result};
pub use physmodel::{
    species_constants, validate_config, Environment, IonSpecies, ModeSpec, SystemConfig,
    TrapGeometry, ValidationReport,
};

pub use num_complex::Complex64;
