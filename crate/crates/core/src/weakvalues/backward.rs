use crate::error::Result;
use crate::statespace::{build_grid, gaussian_wavepacket, Params};
use crate::C64;
use serde::Serialize;

/// Number of coefficient samples kept in [`BackwardState`].
const RECORDED: usize = 201;
/// RK4 steps per unit of `Gamma t`.
const STEPS_PER_UNIT: f64 = 100.0;

/// Dark-port state `|dk>|in>` evolved backward through the interaction.
///
/// Arm I is written as
/// `(c0' phi0(w) + d0' phi0(w - omega_m))|0> + (c1' phi0(w + omega_m) + d1' phi0(w))|1>`
/// and arm II stays `-|in>/sqrt2`. The coefficient pairs `(c0', c1')` and
/// `(d0', d1')` multiply the same photon wavepacket and are coupled by the
/// no-explosion dynamics.
#[derive(Debug, Clone, Serialize)]
pub struct BackwardState {
    pub times: Vec<f64>,
    /// Raw coefficients `[c0', c1', d0', d1']` at each recorded time.
    pub coefficients: Vec<[C64; 4]>,
    /// Norm of the full backward state at `tau`.
    pub norm: f64,
    /// Coefficients at `tau` divided by `norm`.
    pub normalized_final: [C64; 4],
    /// Largest arm-I amplitude of the normalized state at `tau`, relative to
    /// the peak amplitude of `phi0`.
    pub arm_i_max_amplitude: f64,
    /// Arm-I norm of the normalized state at `tau`.
    pub arm_i_norm: f64,
    /// `omega_m / Delta omega_ph`.
    pub bound: f64,
    pub within_bound: bool,
}

impl BackwardState {
    pub fn final_coefficients(&self) -> [C64; 4] {
        *self.coefficients.last().expect("at least one sample")
    }
}

fn derivative(gamma: f64, y: &[C64; 4]) -> [C64; 4] {
    let c = (y[0] - y[1]) * (0.25 * gamma);
    let d = (y[2] - y[3]) * (0.25 * gamma);
    [-c, c, -d, d]
}

fn rk4_step(gamma: f64, y: &[C64; 4], h: f64) -> [C64; 4] {
    let add = |a: &[C64; 4], k: &[C64; 4], s: f64| std::array::from_fn(|i| a[i] + k[i] * s);
    let k1 = derivative(gamma, y);
    let k2 = derivative(gamma, &add(y, &k1, h / 2.0));
    let k3 = derivative(gamma, &add(y, &k2, h / 2.0));
    let k4 = derivative(gamma, &add(y, &k3, h));
    std::array::from_fn(|i| y[i] + (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0))
}

/// Integrates the coefficient equations over `p.tau` from
/// `(1/2, 0, 0, -1/2)`, rebuilds the wavefunction on the grid and measures
/// what remains in arm I.
pub fn backward_propagate(p: &Params) -> Result<BackwardState> {
    p.validate()?;
    let grid = build_grid(p)?;
    let phi0 = gaussian_wavepacket(&grid, p.omega_ph, p.delta_omega_ph)?;

    let segments = RECORDED - 1;
    let substeps = ((STEPS_PER_UNIT * p.gamma_tau() / segments as f64).ceil() as usize).max(1);
    let h = p.tau / (segments * substeps) as f64;
    let mut y = [
        C64::new(0.5, 0.0),
        C64::default(),
        C64::default(),
        C64::new(-0.5, 0.0),
    ];
    let mut times = vec![0.0];
    let mut coefficients = vec![y];
    for k in 1..=segments {
        for _ in 0..substeps {
            y = rk4_step(p.gamma, &y, h);
        }
        times.push(p.tau * k as f64 / segments as f64);
        coefficients.push(y);
    }

    let s = grid.shift_steps;
    let at = |j: isize| -> C64 {
        if j < 0 {
            C64::default()
        } else {
            phi0.get(j as usize).copied().unwrap_or_default()
        }
    };
    let mut arm_i_sq = 0.0;
    let mut arm_i_max: f64 = 0.0;
    for j in 0..phi0.len() as isize {
        let a0 = y[0] * at(j) + y[2] * at(j - s as isize);
        let a1 = y[1] * at(j + s as isize) + y[3] * at(j);
        arm_i_sq += a0.norm_sqr() + a1.norm_sqr();
        arm_i_max = arm_i_max.max(a0.norm()).max(a1.norm());
    }
    // arm II: -|in>/sqrt2 carries weight 1/2
    let norm = (arm_i_sq + 0.5).sqrt();
    let peak = phi0.iter().map(|a| a.norm()).fold(0.0, f64::max);
    let arm_i_max_amplitude = arm_i_max / norm / peak;
    let bound = p.omega_m / p.delta_omega_ph;
    Ok(BackwardState {
        times,
        coefficients,
        norm,
        normalized_final: y.map(|c| c / norm),
        arm_i_max_amplitude,
        arm_i_norm: arm_i_sq.sqrt() / norm,
        bound,
        within_bound: arm_i_max_amplitude <= bound,
    })
}
