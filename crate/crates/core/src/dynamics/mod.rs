//! Conditional (no-explosion) evolution, output-port detection, the
//! motional phase correction, and a microscopic reservoir cross-check.

mod kraus;
mod micro;
mod ports;

pub(crate) use kraus::evolve_pairs; // shared with the two-state-vector engine
pub use kraus::{evolve_for, evolve_no_explosion, EvolutionResult, TrajectoryPoint};
pub use micro::{microscopic_oracle, MicroReservoirSpec, OracleReport};
pub use ports::{correction_delay, detect_ports, phase_correction, PortOutcomes, PortTable};
