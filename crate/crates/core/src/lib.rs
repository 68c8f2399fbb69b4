//! Simulation of an interaction-free measurement used as a quantum engine.
//!
//! A single photon crosses a Mach-Zehnder interferometer whose arm I contains
//! a "quantum bomb": a bouncing-ball particle in a two-level motional space
//! that absorbs the photon only when found inside the beam. Conditioning on
//! non-absorption redshifts the photon and leaves energy in the bomb, which
//! can then be extracted as work.
//!
//! Units: `hbar = 1`; all frequencies are angular and energies equal them.

pub mod analytic;
pub mod bouncer;
pub mod cli;
pub mod dynamics;
pub mod engine;
pub mod error;
pub mod output;
pub mod statespace;
pub mod weakvalues;

pub use error::{Error, Result};

/// Complex amplitude type used throughout.
pub type C64 = num_complex::Complex64;
