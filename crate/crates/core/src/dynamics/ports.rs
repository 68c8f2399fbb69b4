use crate::error::Result;
use crate::statespace::{
    apply_exit_beamsplitter, BranchEnergies, JointState, Motional, Params, Picture, PortState,
};
use crate::C64;
use serde::Serialize;
use std::f64::consts::TAU;

/// Detector statistics after the exit beamsplitter.
#[derive(Debug, Clone)]
pub struct PortOutcomes {
    pub p_dark: f64,
    pub p_bright: f64,
    pub p_explosion: f64,
    /// Normalized dark-port state; `None` when the port cannot fire.
    pub state_dark: Option<PortState>,
    pub state_bright: Option<PortState>,
    pub energies_dark: Option<BranchEnergies>,
    pub energies_bright: Option<BranchEnergies>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PortTable {
    pub p_dark: f64,
    pub p_bright: f64,
    pub p_explosion: f64,
    pub e_ph_dark: Option<f64>,
    pub e_m_dark: Option<f64>,
    pub e_ph_bright: Option<f64>,
    pub e_m_bright: Option<f64>,
}

impl PortOutcomes {
    pub fn table(&self) -> PortTable {
        PortTable {
            p_dark: self.p_dark,
            p_bright: self.p_bright,
            p_explosion: self.p_explosion,
            e_ph_dark: self.energies_dark.map(|e| e.e_ph),
            e_m_dark: self.energies_dark.map(|e| e.e_m),
            e_ph_bright: self.energies_bright.map(|e| e.e_ph),
            e_m_bright: self.energies_bright.map(|e| e.e_m),
        }
    }

    /// Overlap of the dark-conditioned motional state with `|in>`.
    pub fn dark_in_fidelity(&self) -> Option<f64> {
        let v = Motional::In.vector();
        self.state_dark.as_ref().and_then(|s| {
            s.motional_fidelity((C64::new(v[0], 0.0), C64::new(v[1], 0.0)))
                .ok()
        })
    }
}

/// Splits the post-interaction state at the exit beamsplitter. Because the
/// unexploded branch is carried unnormalized, each port's squared norm is
/// already its joint probability.
pub fn detect_ports(s: &JointState) -> Result<PortOutcomes> {
    let (dark, bright) = apply_exit_beamsplitter(s);
    let (p_dark, p_bright) = (dark.probability(), bright.probability());
    let condition =
        |port: PortState, prob: f64| -> Result<(Option<PortState>, Option<BranchEnergies>)> {
            if prob > 0.0 {
                let c = port.conditioned()?;
                let e = c.energies()?;
                Ok((Some(c), Some(e)))
            } else {
                Ok((None, None))
            }
        };
    let (state_dark, energies_dark) = condition(dark, p_dark)?;
    let (state_bright, energies_bright) = condition(bright, p_bright)?;
    Ok(PortOutcomes {
        p_dark,
        p_bright,
        p_explosion: s.explosion_weight,
        state_dark,
        state_bright,
        energies_dark,
        energies_bright,
    })
}

/// Extra free-evolution time `tau2` after which the total motional phase
/// `omega_m (tau + tau2)` is a multiple of `2 pi`.
pub fn correction_delay(p: &Params) -> f64 {
    let period = TAU / p.omega_m;
    let cycles = (p.tau / period).ceil();
    (cycles * period - p.tau).max(0.0)
}

/// Lets the bomb evolve freely for [`correction_delay`] so that its `|1>`
/// amplitudes regain the phase they have in the interaction picture. An
/// interaction-picture input is taken to be at time `p.tau`. The result is
/// in the Schrodinger picture.
pub fn phase_correction(s: &JointState, p: &Params) -> JointState {
    let mut out = match s.picture {
        Picture::Interaction => s.to_picture(Picture::Schrodinger, p.tau),
        Picture::Schrodinger => s.clone(),
    };
    let tau2 = correction_delay(p);
    if tau2 > 0.0 {
        let phase = C64::from_polar(1.0, -p.omega_m * tau2);
        out.psi1.iter_mut().for_each(|a| *a *= phase);
    }
    out
}
