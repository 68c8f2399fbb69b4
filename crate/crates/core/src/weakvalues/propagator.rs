use crate::error::Result;
use crate::statespace::{gaussian_wavepacket, JointState, Params, Picture};
use crate::C64;

/// Three-state approximation of the no-explosion evolution,
/// `U(t) = Pi_II + Pi_o + Pi_i exp(-Gamma t / 2)`.
///
/// `|Phi_i> ~ phi0(w)|0> - phi0(w + omega_m)|1>` and
/// `|Phi_o> ~ phi0(w)|0> + phi0(w + omega_m)|1>` (both in arm I, normalized
/// here). The decaying direction is the one with the bomb inside the beam,
/// since only that amplitude can be absorbed. Arm-I amplitude outside the
/// span of the two states is discarded.
#[derive(Debug, Clone)]
pub struct EffectivePropagator {
    gamma: f64,
    phi_i: (Vec<C64>, Vec<C64>),
    phi_o: (Vec<C64>, Vec<C64>),
}

fn normalized(x0: Vec<C64>, x1: Vec<C64>) -> (Vec<C64>, Vec<C64>) {
    let n = (x0.iter().chain(&x1).map(|a| a.norm_sqr()).sum::<f64>()).sqrt();
    (
        x0.into_iter().map(|a| a / n).collect(),
        x1.into_iter().map(|a| a / n).collect(),
    )
}

fn dot(a: &(Vec<C64>, Vec<C64>), x0: &[C64], x1: &[C64]) -> C64 {
    a.0.iter()
        .zip(x0)
        .chain(a.1.iter().zip(x1))
        .map(|(u, v)| u.conj() * v)
        .sum()
}

impl EffectivePropagator {
    /// Builds `|Phi_i>`, `|Phi_o>` on the grid of `s` from the wavepacket of `p`.
    pub fn new(s: &JointState, p: &Params) -> Result<Self> {
        let phi0 = gaussian_wavepacket(&s.grid, p.omega_ph, p.delta_omega_ph)?;
        let shift = s.grid.shift_steps;
        let n = phi0.len();
        let phi1: Vec<C64> = (0..n)
            .map(|j| phi0.get(j + shift).copied().unwrap_or_default())
            .collect();
        let minus: Vec<C64> = phi1.iter().map(|a| -a).collect();
        Ok(Self {
            gamma: p.gamma,
            phi_i: normalized(phi0.clone(), minus),
            phi_o: normalized(phi0, phi1),
        })
    }

    pub fn apply(&self, s: &JointState, t: f64) -> Result<JointState> {
        s.require_picture(Picture::Interaction)?;
        let decay = (-0.5 * self.gamma * t).exp();
        let ci = dot(&self.phi_i, &s.psi0, &s.psi1) * decay;
        let co = dot(&self.phi_o, &s.psi0, &s.psi1);
        let mut out = s.clone();
        for j in 0..s.psi0.len() {
            out.psi0[j] = self.phi_i.0[j] * ci + self.phi_o.0[j] * co;
            out.psi1[j] = self.phi_i.1[j] * ci + self.phi_o.1[j] * co;
        }
        out.explosion_weight =
            (s.explosion_weight + s.arm_i_norm_sqr() - out.arm_i_norm_sqr()).clamp(0.0, 1.0);
        Ok(out)
    }
}

/// Applies [`EffectivePropagator`] for time `t` to an interaction-picture state.
pub fn effective_propagator_apply(s: &JointState, t: f64, p: &Params) -> Result<JointState> {
    EffectivePropagator::new(s, p)?.apply(s, t)
}

/// `|Phi_o>` in arm I, with nothing in arm II; used by tests.
#[cfg(test)]
pub(crate) fn phi_o_state(s: &JointState, p: &Params) -> JointState {
    let u = EffectivePropagator::new(s, p).unwrap();
    let mut out = JointState::zeros(s.grid.clone());
    out.psi0 = u.phi_o.0.clone();
    out.psi1 = u.phi_o.1.clone();
    out
}
