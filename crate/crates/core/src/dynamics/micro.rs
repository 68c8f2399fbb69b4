//! Brute-force check of the Kraus generator: the photon modes, two motional
//! levels and a discretized flat reservoir evolve under the full coupling
//! `V = i Pi_in sum_jk g (a_j^+ b_k - b_k^+ a_j)` in the single-excitation
//! sector, with the reservoir checked for an excitation at fixed intervals.
//!
//! Because the coupling is uniform, `V = i g (|A><R| - |R><A|)` with
//! `A = sum_j |j, in>` and `R = sum_k |k, in>`, a rank-two operator. Each
//! Crank-Nicolson step therefore costs O(N) via the Woodbury identity.

use super::kraus::evolve_pairs;
use crate::error::{Error, Result};
use crate::statespace::{build_grid, gaussian_wavepacket, Params};
use crate::C64;
use serde::Serialize;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MicroReservoirSpec {
    pub n_reservoir_modes: usize,
    /// Reservoir frequencies `nu_k` span this closed interval uniformly.
    pub band: (f64, f64),
    /// Uniform coupling `g_k = g`.
    pub coupling: f64,
    /// Integration step.
    pub dt: f64,
    /// Time between reservoir checks (projections onto no excitation).
    pub check_interval: f64,
    /// Number of comparison samples on `[0, tau]`.
    pub n_samples: usize,
}

impl MicroReservoirSpec {
    /// Default reservoir for [`Self::oracle_params`]: 1000 modes over
    /// `+-500 Gamma`.
    pub fn oracle_default(p: &Params) -> Result<Self> {
        Self::calibrated(p, 1000, 500.0 * p.gamma.max(f64::MIN_POSITIVE))
    }

    /// Flat band of half-width `half_band` around the photon carrier with
    /// the coupling set by the golden rule `Gamma = 2 pi g^2 rho`.
    pub fn calibrated(p: &Params, n_reservoir_modes: usize, half_band: f64) -> Result<Self> {
        if n_reservoir_modes < 2 || !(half_band > 0.0) {
            return Err(Error::InvalidParameter(
                "reservoir needs two or more modes and a positive band".into(),
            ));
        }
        let density = (n_reservoir_modes - 1) as f64 / (2.0 * half_band);
        let coupling = (p.gamma / (2.0 * PI * density)).sqrt();
        let max_rel = half_band.max(p.grid_span * p.delta_omega_ph) + p.omega_m;
        Ok(Self {
            n_reservoir_modes,
            band: (p.omega_ph - half_band, p.omega_ph + half_band),
            coupling,
            dt: 0.01 / max_rel,
            check_interval: 0.1 / p.gamma.max(f64::MIN_POSITIVE),
            n_samples: 51,
        })
    }

    /// Modes per unit angular frequency.
    pub fn density(&self) -> f64 {
        (self.n_reservoir_modes - 1) as f64 / (self.band.1 - self.band.0)
    }

    fn validate(&self, p: &Params) -> Result<()> {
        if self.n_reservoir_modes < 2 || !(self.band.1 > self.band.0) {
            return Err(Error::InvalidParameter("reservoir band is empty".into()));
        }
        if !(self.dt > 0.0 && self.check_interval > 0.0) || self.n_samples < 2 {
            return Err(Error::InvalidParameter(
                "dt, check_interval and n_samples must be positive".into(),
            ));
        }
        if !(self.coupling >= 0.0) {
            return Err(Error::InvalidParameter(
                "coupling must be non-negative".into(),
            ));
        }
        let support = p.grid_span * p.delta_omega_ph + p.omega_m;
        if self.band.0 > p.omega_ph - support || self.band.1 < p.omega_ph + support {
            log::warn!("reservoir band does not cover the photon grid; the fit will be biased");
        }
        Ok(())
    }

    /// Default oracle setup. All photon modes share one reservoir, so modes
    /// at different energies stay coupled at order `Gamma / spacing`; the
    /// photon spacing is therefore set equal to a motional gap of
    /// `40 Gamma`, which keeps that cross-talk at a few percent.
    pub fn oracle_params() -> Params {
        Params {
            omega_ph: 1000.0,
            delta_omega_ph: 60.0,
            omega_m: 40.0,
            gamma: 1.0,
            tau: 5.0,
            n_modes: 10,
            grid_span: 3.0,
            regime_factor: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    /// Decay rate of the `|in>` weight from a log-linear fit.
    pub fitted_rate: f64,
    /// `fitted_rate / (g^2 rho)`; equals `2 pi` for golden-rule decay.
    pub convention_factor: f64,
    /// Largest L2 distance between the full and Kraus photon states.
    pub max_state_deviation: f64,
    pub survival_full: f64,
    pub survival_kraus: f64,
    pub n_steps: usize,
    pub max_norm_drift: f64,
}

struct System {
    /// Diagonal energies in a frame rotating at `omega_ph`.
    energies: Vec<f64>,
    /// Real coupling vectors `A` and `R`; disjoint supports.
    a: Vec<f64>,
    r: Vec<f64>,
    n_photon: usize,
}

impl System {
    /// Layout: photon `(j, m)` at `2 j + m`, then reservoir `(k, m)`.
    fn new(omegas: &[f64], omega_ph: f64, omega_m: f64, spec: &MicroReservoirSpec) -> Self {
        let np = omegas.len();
        let nr = spec.n_reservoir_modes;
        let mut energies = Vec::with_capacity(2 * (np + nr));
        let mut a = vec![0.0; 2 * (np + nr)];
        let mut r = vec![0.0; 2 * (np + nr)];
        for (j, w) in omegas.iter().enumerate() {
            energies.push(w - omega_ph);
            energies.push(w - omega_ph + omega_m);
            a[2 * j] = FRAC_1_SQRT_2;
            a[2 * j + 1] = -FRAC_1_SQRT_2;
        }
        let step = (spec.band.1 - spec.band.0) / (nr - 1) as f64;
        for k in 0..nr {
            let nu = spec.band.0 + k as f64 * step;
            energies.push(nu - omega_ph);
            energies.push(nu - omega_ph + omega_m);
            r[2 * (np + k)] = FRAC_1_SQRT_2;
            r[2 * (np + k) + 1] = -FRAC_1_SQRT_2;
        }
        Self {
            energies,
            a,
            r,
            n_photon: np,
        }
    }
}

/// One Crank-Nicolson step `(1 + i H dt/2) x = (1 - i H dt/2) psi`, which
/// is exactly norm preserving for Hermitian `H`.
struct Stepper {
    inv_plus: Vec<C64>,
    minus: Vec<C64>,
    beta: f64,
    /// `(1 + W^T D^-1 U)^-1` for the rank-two update.
    c_inv: [[C64; 2]; 2],
}

impl Stepper {
    fn new(sys: &System, g: f64, dt: f64) -> Self {
        let beta = 0.5 * g * dt;
        let inv_plus: Vec<C64> = sys
            .energies
            .iter()
            .map(|e| C64::new(1.0, 0.5 * e * dt).inv())
            .collect();
        let minus = sys
            .energies
            .iter()
            .map(|e| C64::new(1.0, -0.5 * e * dt))
            .collect();
        let quad = |v: &[f64]| {
            v.iter()
                .zip(&inv_plus)
                .map(|(x, d)| d * (x * x))
                .sum::<C64>()
        };
        let (ada, rdr) = (quad(&sys.a), quad(&sys.r));
        // C = [[1, -beta r.D^-1.r], [beta a.D^-1.a, 1]]
        let c = [
            [C64::new(1.0, 0.0), -rdr * beta],
            [ada * beta, C64::new(1.0, 0.0)],
        ];
        let det = c[0][0] * c[1][1] - c[0][1] * c[1][0];
        let c_inv = [
            [c[1][1] / det, -c[0][1] / det],
            [-c[1][0] / det, c[0][0] / det],
        ];
        Self {
            inv_plus,
            minus,
            beta,
            c_inv,
        }
    }

    fn step(&self, sys: &System, psi: &mut [C64]) {
        let dot = |v: &[f64], x: &[C64]| {
            v.iter()
                .zip(x)
                .filter(|(c, _)| **c != 0.0)
                .map(|(c, y)| y * *c)
                .sum::<C64>()
        };
        let (r_psi, a_psi) = (dot(&sys.r, psi), dot(&sys.a, psi));
        // rhs = (1 - i D dt/2) psi + beta a (r.psi) - beta r (a.psi), then y = D_+^-1 rhs
        for i in 0..psi.len() {
            let rhs = self.minus[i] * psi[i] + (r_psi * sys.a[i] - a_psi * sys.r[i]) * self.beta;
            psi[i] = rhs * self.inv_plus[i];
        }
        let (r_y, a_y) = (dot(&sys.r, psi), dot(&sys.a, psi));
        let w = [-r_y * self.beta, a_y * self.beta];
        let z0 = self.c_inv[0][0] * w[0] + self.c_inv[0][1] * w[1];
        let z1 = self.c_inv[1][0] * w[0] + self.c_inv[1][1] * w[1];
        for i in 0..psi.len() {
            if sys.a[i] != 0.0 || sys.r[i] != 0.0 {
                psi[i] -= self.inv_plus[i] * (z0 * sys.a[i] + z1 * sys.r[i]);
            }
        }
    }
}

fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum()
}

/// Weight of the motional `|in>` state with energy-matched pairing,
/// `sum_i |x0[i] - x1[i - s]|^2 / 2`.
fn in_weight(x0: &[C64], x1: &[C64], shift: usize) -> f64 {
    let n = x0.len();
    let mut w = 0.0;
    for i in 0..n {
        let partner = if i >= shift {
            x1[i - shift]
        } else {
            C64::default()
        };
        w += 0.5 * (x0[i] - partner).norm_sqr();
    }
    w + x1[n - shift..]
        .iter()
        .map(|b| 0.5 * b.norm_sqr())
        .sum::<f64>()
}

fn fit_log_slope(ts: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = ts
        .iter()
        .zip(ys)
        .filter(|(_, y)| **y > 0.0)
        .map(|(t, y)| (*t, y.ln()))
        .collect();
    let n = pts.len() as f64;
    let (st, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (t, y)| (a + t, b + y));
    let (mt, my) = (st / n, sy / n);
    let (num, den) = pts.iter().fold((0.0, 0.0), |(a, b), (t, y)| {
        (a + (t - mt) * (y - my), b + (t - mt).powi(2))
    });
    num / den
}

/// Integrates the full photon + bomb + reservoir model from a single-arm
/// photon wavepacket over `[0, p.tau]` and compares against the Kraus map.
pub fn microscopic_oracle(p: &Params, spec: &MicroReservoirSpec) -> Result<OracleReport> {
    p.validate()?;
    spec.validate(p)?;
    let grid = build_grid(p)?;
    let phi = gaussian_wavepacket(&grid, p.omega_ph, p.delta_omega_ph)?;
    let np = grid.len();
    let shift = grid.shift_steps;
    let sys = System::new(&grid.omegas, p.omega_ph, grid.omega_m(), spec);

    let mut psi = vec![C64::default(); sys.energies.len()];
    for (j, a) in phi.iter().enumerate() {
        psi[2 * j] = *a;
    }
    // Arm II is decoupled; its free phases are trivial in the interaction
    // picture, so it is not integrated.

    let sample_times: Vec<f64> = (0..spec.n_samples)
        .map(|k| p.tau * k as f64 / (spec.n_samples - 1) as f64)
        .collect();
    let steps_per_check = (spec.check_interval / spec.dt).ceil().max(1.0) as usize;
    let n_steps_total = (p.tau / spec.dt).ceil() as usize;
    let dt = if n_steps_total > 0 {
        p.tau / n_steps_total as f64
    } else {
        0.0
    };
    let stepper = Stepper::new(&sys, spec.coupling, dt);

    let mut t_index = 0usize;
    let mut next_sample = 0usize;
    let mut max_dev = 0.0f64;
    let mut max_drift = 0.0f64;
    let mut in_weights = Vec::with_capacity(spec.n_samples);
    let mut survival_full = 1.0;
    let mut survival_kraus = 1.0;

    let project = |psi: &mut [C64]| {
        for v in psi[2 * np..].iter_mut() {
            *v = C64::default();
        }
    };

    loop {
        let t = t_index as f64 * dt;
        while next_sample < sample_times.len() && (sample_times[next_sample] - t).abs() <= 0.5 * dt
        {
            // photon amplitudes in the interaction picture
            let mut x0 = vec![C64::default(); np];
            let mut x1 = vec![C64::default(); np];
            for j in 0..np {
                x0[j] = psi[2 * j] * C64::from_polar(1.0, sys.energies[2 * j] * t);
                x1[j] = psi[2 * j + 1] * C64::from_polar(1.0, sys.energies[2 * j + 1] * t);
            }
            let mut k0 = phi.clone();
            let mut k1 = vec![C64::default(); np];
            evolve_pairs(&mut k0, &mut k1, shift, (-0.5 * p.gamma * t).exp());
            let dev = (norm_sqr(&x0.iter().zip(&k0).map(|(a, b)| a - b).collect::<Vec<_>>())
                + norm_sqr(&x1.iter().zip(&k1).map(|(a, b)| a - b).collect::<Vec<_>>()))
            .sqrt();
            max_dev = max_dev.max(dev);
            in_weights.push(in_weight(&x0, &x1, shift));
            survival_full = norm_sqr(&x0) + norm_sqr(&x1);
            survival_kraus = norm_sqr(&k0) + norm_sqr(&k1);
            next_sample += 1;
        }
        if t_index >= n_steps_total {
            break;
        }
        let before = norm_sqr(&psi);
        stepper.step(&sys, &mut psi);
        let drift = (norm_sqr(&psi) - before).abs();
        max_drift = max_drift.max(drift);
        if drift > 1e-6 {
            return Err(Error::StepInstability { drift });
        }
        t_index += 1;
        if t_index % steps_per_check == 0 {
            project(&mut psi);
        }
    }
    debug_assert_eq!(sys.n_photon, np);

    let fitted_rate = if spec.coupling == 0.0 {
        0.0
    } else {
        -fit_log_slope(&sample_times, &in_weights)
    };
    let g2rho = spec.coupling * spec.coupling * spec.density();
    Ok(OracleReport {
        fitted_rate,
        convention_factor: if g2rho > 0.0 {
            fitted_rate / g2rho
        } else {
            0.0
        },
        max_state_deviation: max_dev,
        survival_full,
        survival_kraus,
        n_steps: n_steps_total,
        max_norm_drift: max_drift,
    })
}
