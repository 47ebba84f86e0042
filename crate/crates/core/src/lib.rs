//! Simulation of phonon hopping between the local radial modes of a trapped-ion
//! chain, and of dynamical decoupling of that hopping by sideband, dispersive
//! and phase-shift pulses.
//!
//! The crate is layered: [`operators`] (Hilbert space, states, projectors),
//! [`hamiltonian`] (hopping and drive terms), [`dynamics`] (propagators and
//! the Lindblad integrator), [`experiment`] (scenarios, presets, sampling),
//! [`calibrate`], [`selftest`] and [`io`] (CSV and run manifests).

pub mod calibrate;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod hamiltonian;
pub mod io;
pub mod operators;
pub mod selftest;
pub mod units;

pub use error::{Error, Result};
