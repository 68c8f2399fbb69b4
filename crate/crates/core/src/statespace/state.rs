use super::{build_grid, gaussian_wavepacket, FrequencyGrid, Params};
use crate::error::{Error, Result};
use crate::C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Picture {
    Interaction,
    Schrodinger,
}

impl Picture {
    pub fn name(self) -> &'static str {
        match self {
            Picture::Interaction => "interaction",
            Picture::Schrodinger => "schrodinger",
        }
    }
}

/// Motional basis change `(|0>, |1>) -> (|in>, |out>)` with
/// `|in> = (|0> - |1>)/sqrt(2)` and `|out> = (|0> + |1>)/sqrt(2)`.
pub fn to_in_out(x0: C64, x1: C64) -> (C64, C64) {
    ((x0 - x1) * FRAC_1_SQRT_2, (x0 + x1) * FRAC_1_SQRT_2)
}

/// Inverse of [`to_in_out`].
pub fn from_in_out(x_in: C64, x_out: C64) -> (C64, C64) {
    (
        (x_in + x_out) * FRAC_1_SQRT_2,
        (x_out - x_in) * FRAC_1_SQRT_2,
    )
}

/// Unexploded branch of the photon-bomb state.
///
/// `psi0[j]` and `psi1[j]` are the arm-I amplitudes for a photon at
/// `omegas[j]` with the bomb in `|0>` or `|1>`; `beta[j]` is arm II, where
/// the bomb can only be in `|0>`. The branch is kept unnormalized so that
/// its squared norm plus `explosion_weight` is one.
#[derive(Debug, Clone)]
pub struct JointState {
    pub grid: Arc<FrequencyGrid>,
    pub psi0: Vec<C64>,
    pub psi1: Vec<C64>,
    pub beta: Vec<C64>,
    pub explosion_weight: f64,
    pub picture: Picture,
}

fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum()
}

fn weighted(v: &[C64], omegas: &[f64]) -> f64 {
    v.iter().zip(omegas).map(|(a, w)| a.norm_sqr() * w).sum()
}

impl JointState {
    pub fn zeros(grid: Arc<FrequencyGrid>) -> Self {
        let n = grid.len();
        Self {
            grid,
            psi0: vec![C64::default(); n],
            psi1: vec![C64::default(); n],
            beta: vec![C64::default(); n],
            explosion_weight: 0.0,
            picture: Picture::Interaction,
        }
    }

    pub fn arm_i_norm_sqr(&self) -> f64 {
        norm_sqr(&self.psi0) + norm_sqr(&self.psi1)
    }

    pub fn arm_ii_norm_sqr(&self) -> f64 {
        norm_sqr(&self.beta)
    }

    /// Squared norm of the unexploded branch.
    pub fn norm_sqr(&self) -> f64 {
        self.arm_i_norm_sqr() + self.arm_ii_norm_sqr()
    }

    pub fn omega_m(&self) -> f64 {
        self.grid.omega_m()
    }

    pub fn require_picture(&self, expected: Picture) -> Result<()> {
        if self.picture != expected {
            return Err(Error::PictureMismatch {
                expected: expected.name(),
                found: self.picture.name(),
            });
        }
        Ok(())
    }

    /// Attaches (or removes) the free phases `exp(-i E t)` accumulated over
    /// time `t`, switching pictures. `E` is the photon frequency plus the
    /// motional energy.
    pub fn to_picture(&self, target: Picture, t: f64) -> JointState {
        if target == self.picture {
            return self.clone();
        }
        let sign = if target == Picture::Schrodinger {
            -1.0
        } else {
            1.0
        };
        let wm = self.omega_m();
        let phase = |w: f64| C64::from_polar(1.0, sign * w * t);
        let mut out = self.clone();
        for (j, &w) in self.grid.omegas.iter().enumerate() {
            out.psi0[j] *= phase(w);
            out.psi1[j] *= phase(w + wm);
            out.beta[j] *= phase(w);
        }
        out.picture = target;
        out
    }

    pub fn snapshot(&self) -> StateSnapshot {
        let pairs = |v: &[C64]| v.iter().map(|a| [a.re, a.im]).collect();
        StateSnapshot {
            omegas: self.grid.omegas.clone(),
            psi0: pairs(&self.psi0),
            psi1: pairs(&self.psi1),
            beta: pairs(&self.beta),
            explosion_weight: self.explosion_weight,
            picture: self.picture,
        }
    }
}

/// JSON form of a [`JointState`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSnapshot {
    pub omegas: Vec<f64>,
    pub psi0: Vec<[f64; 2]>,
    pub psi1: Vec<[f64; 2]>,
    pub beta: Vec<[f64; 2]>,
    pub explosion_weight: f64,
    pub picture: Picture,
}

/// Pre-interaction state. Without the interferometer the photon is in arm I;
/// with it, the input beamsplitter splits it evenly between the arms.
pub fn initial_state(p: &Params, interferometer: bool) -> Result<JointState> {
    let grid = Arc::new(build_grid(p)?);
    let phi = gaussian_wavepacket(&grid, p.omega_ph, p.delta_omega_ph)?;
    let mut s = JointState::zeros(grid);
    if interferometer {
        s.psi0 = phi.iter().map(|a| a * FRAC_1_SQRT_2).collect();
        s.beta = phi.iter().map(|a| a * FRAC_1_SQRT_2).collect();
    } else {
        s.psi0 = phi;
    }
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Port {
    Dark,
    Bright,
}

/// State after the exit beamsplitter, restricted to one output port.
/// Unnormalized: its squared norm is the joint probability of reaching this
/// port without an explosion.
#[derive(Debug, Clone)]
pub struct PortState {
    pub port: Port,
    pub grid: Arc<FrequencyGrid>,
    pub psi0: Vec<C64>,
    pub psi1: Vec<C64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchEnergies {
    pub e_ph: f64,
    pub e_m: f64,
    pub mean_frequency: f64,
}

impl PortState {
    pub fn probability(&self) -> f64 {
        norm_sqr(&self.psi0) + norm_sqr(&self.psi1)
    }

    pub fn conditioned(&self) -> Result<PortState> {
        let p = self.probability();
        if p <= 0.0 {
            return Err(Error::ZeroNorm);
        }
        let inv = p.sqrt().recip();
        let mut out = self.clone();
        out.psi0
            .iter_mut()
            .chain(out.psi1.iter_mut())
            .for_each(|a| *a *= inv);
        Ok(out)
    }

    /// Photon and motional energies conditioned on this port firing.
    pub fn energies(&self) -> Result<BranchEnergies> {
        let p = self.probability();
        if p <= 0.0 {
            return Err(Error::ZeroNorm);
        }
        let w = &self.grid.omegas;
        let e_ph = (weighted(&self.psi0, w) + weighted(&self.psi1, w)) / p;
        let e_m = self.grid.omega_m() * norm_sqr(&self.psi1) / p;
        Ok(BranchEnergies {
            e_ph,
            e_m,
            mean_frequency: e_ph,
        })
    }

    /// Reduced motional density matrix in the `{|0>, |1>}` basis, photon
    /// traced out and normalized to unit trace.
    pub fn motional_density(&self) -> Result<[[C64; 2]; 2]> {
        let p = self.probability();
        if p <= 0.0 {
            return Err(Error::ZeroNorm);
        }
        let coherence: C64 = self
            .psi0
            .iter()
            .zip(&self.psi1)
            .map(|(a, b)| a * b.conj())
            .sum();
        let r00 = C64::new(norm_sqr(&self.psi0) / p, 0.0);
        let r11 = C64::new(norm_sqr(&self.psi1) / p, 0.0);
        Ok([[r00, coherence / p], [coherence.conj() / p, r11]])
    }

    /// `<chi| rho_m |chi>` for a motional state `chi = (c0, c1)`.
    pub fn motional_fidelity(&self, chi: (C64, C64)) -> Result<f64> {
        let r = self.motional_density()?;
        let v = [chi.0, chi.1];
        let mut f = C64::default();
        for i in 0..2 {
            for j in 0..2 {
                f += v[i].conj() * r[i][j] * v[j];
            }
        }
        Ok(f.re)
    }
}

/// Exit beamsplitter: `dark = (I - II)/sqrt(2)`, `bright = (I + II)/sqrt(2)`
/// per frequency mode, with the motional index carried along.
pub fn apply_exit_beamsplitter(s: &JointState) -> (PortState, PortState) {
    let dark0 = s
        .psi0
        .iter()
        .zip(&s.beta)
        .map(|(a, b)| (a - b) * FRAC_1_SQRT_2)
        .collect();
    let bright0 = s
        .psi0
        .iter()
        .zip(&s.beta)
        .map(|(a, b)| (a + b) * FRAC_1_SQRT_2)
        .collect();
    let half1: Vec<C64> = s.psi1.iter().map(|a| a * FRAC_1_SQRT_2).collect();
    (
        PortState {
            port: Port::Dark,
            grid: s.grid.clone(),
            psi0: dark0,
            psi1: half1.clone(),
        },
        PortState {
            port: Port::Bright,
            grid: s.grid.clone(),
            psi0: bright0,
            psi1: half1,
        },
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Expectations {
    pub norm: f64,
    pub p_arm_i: f64,
    pub p_arm_ii: f64,
    pub e_ph: f64,
    pub e_m: f64,
    pub mean_frequency_arm_i: Option<f64>,
    pub mean_frequency_arm_ii: Option<f64>,
}

/// Expectation values conditioned on the unexploded branch.
pub fn expectations(s: &JointState) -> Result<Expectations> {
    let n2 = s.norm_sqr();
    if n2 <= 0.0 {
        return Err(Error::ZeroNorm);
    }
    let w = &s.grid.omegas;
    let arm_i = s.arm_i_norm_sqr();
    let arm_ii = s.arm_ii_norm_sqr();
    let e_i = weighted(&s.psi0, w) + weighted(&s.psi1, w);
    let e_ii = weighted(&s.beta, w);
    Ok(Expectations {
        norm: n2.sqrt(),
        p_arm_i: arm_i / n2,
        p_arm_ii: arm_ii / n2,
        e_ph: (e_i + e_ii) / n2,
        e_m: s.omega_m() * norm_sqr(&s.psi1) / n2,
        mean_frequency_arm_i: (arm_i > 0.0).then(|| e_i / arm_i),
        mean_frequency_arm_ii: (arm_ii > 0.0).then(|| e_ii / arm_ii),
    })
}
