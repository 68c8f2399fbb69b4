//! Photon frequency grid, the joint photon-bomb state, observables and the
//! interferometer beamsplitters.

mod grid;
mod observable;
mod params;
mod state;

pub use grid::{build_grid, gaussian_wavepacket, FrequencyGrid};
pub use observable::{Arm, Motional, Observable, Sectors};
pub use params::Params;
pub use state::{
    apply_exit_beamsplitter, expectations, from_in_out, initial_state, to_in_out, BranchEnergies,
    Expectations, JointState, Picture, Port, PortState, StateSnapshot,
};
