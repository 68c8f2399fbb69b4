//! Quantum bouncing ball: a particle of mass `m` above a hard floor in a
//! uniform field `g`. Eigenstates are shifted Airy functions and their
//! energies follow from the Airy zeros.

pub mod airy;

pub use airy::{airy, airy_ai, airy_ai_prime, airy_zeros};

use crate::error::{Error, Result};
use serde::Serialize;

const REFINEMENT_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Serialize)]
pub struct BouncerConfig {
    /// Characteristic length `(hbar^2 / 2 m^2 g)^{1/3}`.
    pub z0: f64,
    pub mass: f64,
    pub gravity: f64,
    /// Sample points, strictly increasing and non-negative.
    pub z_grid: Vec<f64>,
    pub n_levels: usize,
}

impl BouncerConfig {
    /// Builds a config with `z0` derived from mass and gravity and a uniform
    /// grid on `[0, z_max_over_z0 * z0]`.
    pub fn new(
        mass: f64,
        gravity: f64,
        z_max_over_z0: f64,
        n_points: usize,
        n_levels: usize,
    ) -> Result<Self> {
        if !(mass > 0.0 && gravity > 0.0) {
            return Err(Error::InvalidParameter(
                "mass and gravity must be positive".into(),
            ));
        }
        if n_points < 2 || !(z_max_over_z0 > 0.0) {
            return Err(Error::InvalidParameter(
                "grid needs at least two points and positive extent".into(),
            ));
        }
        let z0 = (1.0 / (2.0 * mass * mass * gravity)).cbrt();
        let z_max = z_max_over_z0 * z0;
        let step = z_max / (n_points - 1) as f64;
        let z_grid = (0..n_points).map(|i| i as f64 * step).collect();
        let cfg = Self {
            z0,
            mass,
            gravity,
            z_grid,
            n_levels,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.z0 > 0.0 && self.z0.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "z0 must be positive, got {}",
                self.z0
            )));
        }
        if self.n_levels < 2 {
            return Err(Error::InvalidParameter(
                "n_levels must be at least 2".into(),
            ));
        }
        if self.z_grid.len() < 2 || self.z_grid[0] < 0.0 {
            return Err(Error::InvalidParameter(
                "z_grid must start at z >= 0 with two or more points".into(),
            ));
        }
        if self.z_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter(
                "z_grid must be strictly increasing".into(),
            ));
        }
        Ok(())
    }

    /// Energy scale `m g z0`.
    pub fn energy_unit(&self) -> f64 {
        self.mass * self.gravity * self.z0
    }

    /// Gap between the two lowest levels, `(E_1 - E_0) / hbar`.
    pub fn motional_gap(&self) -> f64 {
        let zeros = airy_zeros(2);
        self.energy_unit() * (zeros[0] - zeros[1])
    }

    fn refined_grid(&self) -> Vec<f64> {
        let mut fine = Vec::with_capacity(2 * self.z_grid.len() - 1);
        for w in self.z_grid.windows(2) {
            fine.push(w[0]);
            fine.push(0.5 * (w[0] + w[1]));
        }
        fine.push(*self.z_grid.last().expect("validated grid is non-empty"));
        fine
    }
}

impl Default for BouncerConfig {
    /// `m = 1/2`, `g = 2` so that `z0 = 1` and `m g z0 = 1`; grid `[0, 12]`
    /// with 4096 points.
    fn default() -> Self {
        Self::new(0.5, 2.0, 12.0, 4096, 2).expect("default bouncer config is valid")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BounceEigenstate {
    pub index: usize,
    /// Airy zero `zeta_{j+1}` (negative).
    pub zero: f64,
    /// `-m g z0 zeta_{j+1}`, measured from the potential minimum.
    pub energy: f64,
    /// Samples on the config grid, unit L2 norm under the trapezoid rule.
    pub wavefunction: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianFit {
    pub mean: f64,
    /// Width parameter of `exp(-(z - mean)^2 / (2 sigma z0))`.
    pub sigma: f64,
    pub overlap_probability: f64,
}

impl GaussianFit {
    /// Standard deviation of the amplitude `chi(z)`.
    pub fn amplitude_std(&self, z0: f64) -> f64 {
        (self.sigma * z0).sqrt()
    }

    /// Standard deviation of the density `|chi(z)|^2`.
    pub fn density_std(&self, z0: f64) -> f64 {
        (0.5 * self.sigma * z0).sqrt()
    }
}

pub(crate) fn trapezoid(z: &[f64], f: &[f64]) -> f64 {
    z.windows(2)
        .zip(f.windows(2))
        .map(|(zw, fw)| 0.5 * (zw[1] - zw[0]) * (fw[0] + fw[1]))
        .sum()
}

/// Unnormalized `Ai(z/z0 + zeta) / Ai'(zeta)` on `z`.
fn raw_level(z: &[f64], z0: f64, zeta: f64) -> Vec<f64> {
    let scale = airy_ai_prime(zeta);
    z.iter()
        .map(|&zi| airy_ai(zi / z0 + zeta) / scale)
        .collect()
}

fn norm_squared(z: &[f64], f: &[f64]) -> f64 {
    let sq: Vec<f64> = f.iter().map(|v| v * v).collect();
    trapezoid(z, &sq)
}

fn check_refinement(quantity: &'static str, coarse: f64, fine: f64) -> Result<()> {
    let relative_change = ((coarse - fine) / fine).abs();
    if relative_change > REFINEMENT_TOLERANCE || !relative_change.is_finite() {
        return Err(Error::GridTooCoarse {
            quantity,
            relative_change,
        });
    }
    Ok(())
}

pub fn bounce_eigenstate(cfg: &BouncerConfig, j: usize) -> Result<BounceEigenstate> {
    cfg.validate()?;
    if j >= cfg.n_levels {
        return Err(Error::InvalidParameter(format!(
            "level {j} not below n_levels = {}",
            cfg.n_levels
        )));
    }
    let zero = airy_zeros(j + 1)[j];
    let raw = raw_level(&cfg.z_grid, cfg.z0, zero);
    let coarse = norm_squared(&cfg.z_grid, &raw);
    let fine_grid = cfg.refined_grid();
    let fine = norm_squared(&fine_grid, &raw_level(&fine_grid, cfg.z0, zero));
    check_refinement("eigenstate norm", coarse, fine)?;
    let inv = coarse.sqrt().recip();
    Ok(BounceEigenstate {
        index: j,
        zero,
        energy: -cfg.energy_unit() * zero,
        wavefunction: raw.into_iter().map(|v| v * inv).collect(),
    })
}

/// The `|in>` profile `(psi_0 - psi_1)/sqrt(2)` sampled on a grid.
#[derive(Debug, Clone)]
struct InProfile {
    z: Vec<f64>,
    z0: f64,
    psi_in: Vec<f64>,
}

impl InProfile {
    fn on_grid(z: &[f64], z0: f64) -> Self {
        let zeros = airy_zeros(2);
        let mut levels = [0, 1].map(|j| raw_level(z, z0, zeros[j]));
        for level in levels.iter_mut() {
            let inv = norm_squared(z, level).sqrt().recip();
            level.iter_mut().for_each(|v| *v *= inv);
        }
        let psi_in = levels[0]
            .iter()
            .zip(&levels[1])
            .map(|(a, b)| (a - b) * std::f64::consts::FRAC_1_SQRT_2)
            .collect();
        Self {
            z: z.to_vec(),
            z0,
            psi_in,
        }
    }

    fn overlap(&self, mean: f64, sigma: f64) -> f64 {
        if !(sigma > 0.0) {
            return 0.0;
        }
        let chi: Vec<f64> = self
            .z
            .iter()
            .map(|&z| (-(z - mean).powi(2) / (2.0 * sigma * self.z0)).exp())
            .collect();
        let chi_norm = norm_squared(&self.z, &chi).sqrt();
        if chi_norm == 0.0 || !chi_norm.is_finite() {
            return 0.0;
        }
        let prod: Vec<f64> = chi.iter().zip(&self.psi_in).map(|(c, p)| c * p).collect();
        (trapezoid(&self.z, &prod) / chi_norm).powi(2)
    }
}

/// Squared overlap of the unit-normalized Gaussian
/// `exp(-(z - mean)^2 / (2 sigma z0))` with the `|in>` motional state.
pub fn overlap_with_minus(cfg: &BouncerConfig, mean: f64, sigma: f64) -> Result<f64> {
    cfg.validate()?;
    if !(sigma > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    let coarse = InProfile::on_grid(&cfg.z_grid, cfg.z0).overlap(mean, sigma);
    let fine = InProfile::on_grid(&cfg.refined_grid(), cfg.z0).overlap(mean, sigma);
    if (coarse - fine).abs() > REFINEMENT_TOLERANCE {
        return Err(Error::GridTooCoarse {
            quantity: "gaussian overlap",
            relative_change: (coarse - fine).abs(),
        });
    }
    Ok(coarse.clamp(0.0, 1.0))
}

const SCAN_MEAN: (f64, f64) = (1.0, 5.0);
const SCAN_SIGMA: (f64, f64) = (0.5, 3.0);
const MAX_ITERATIONS: usize = 500;

/// Maximizes the Gaussian overlap: a coarse scan over
/// `mean in [1, 5] z0`, `sigma in [0.5, 3] z0` followed by Nelder-Mead.
pub fn fit_gaussian(cfg: &BouncerConfig) -> Result<GaussianFit> {
    cfg.validate()?;
    let profile = InProfile::on_grid(&cfg.z_grid, cfg.z0);
    let (mut best, mut best_val) = ((0.0, 0.0), f64::NEG_INFINITY);
    let n = 41;
    for i in 0..n {
        for k in 0..n {
            let m =
                (SCAN_MEAN.0 + (SCAN_MEAN.1 - SCAN_MEAN.0) * i as f64 / (n - 1) as f64) * cfg.z0;
            let s =
                (SCAN_SIGMA.0 + (SCAN_SIGMA.1 - SCAN_SIGMA.0) * k as f64 / (n - 1) as f64) * cfg.z0;
            let v = profile.overlap(m, s);
            if v > best_val {
                best_val = v;
                best = (m, s);
            }
        }
    }
    refine(cfg, &profile, best)
}

/// Local Nelder-Mead refinement from an explicit starting point.
pub fn fit_gaussian_from(cfg: &BouncerConfig, mean: f64, sigma: f64) -> Result<GaussianFit> {
    cfg.validate()?;
    let profile = InProfile::on_grid(&cfg.z_grid, cfg.z0);
    refine(cfg, &profile, (mean, sigma))
}

fn refine(cfg: &BouncerConfig, profile: &InProfile, start: (f64, f64)) -> Result<GaussianFit> {
    let objective = |x: [f64; 2]| -profile.overlap(x[0], x[1]);
    let step = 0.2 * cfg.z0;
    let (x, _) = nelder_mead(objective, [start.0, start.1], step, 1e-12, MAX_ITERATIONS).ok_or(
        Error::NonConvergence {
            iterations: MAX_ITERATIONS,
        },
    )?;
    let overlap_probability = overlap_with_minus(cfg, x[0], x[1])?;
    Ok(GaussianFit {
        mean: x[0],
        sigma: x[1],
        overlap_probability,
    })
}

/// Minimizes `f` over two variables; returns `None` without convergence.
fn nelder_mead<F: Fn([f64; 2]) -> f64>(
    f: F,
    start: [f64; 2],
    step: f64,
    ftol: f64,
    max_iter: usize,
) -> Option<([f64; 2], f64)> {
    let mut simplex = [
        start,
        [start[0] + step, start[1]],
        [start[0], start[1] + step],
    ];
    let mut values = simplex.map(&f);
    let lerp =
        |a: [f64; 2], b: [f64; 2], t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
    for _ in 0..max_iter {
        let mut order = [0, 1, 2];
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.map(|i| simplex[i]);
        values = order.map(|i| values[i]);
        let spread = (simplex[1][0] - simplex[0][0])
            .abs()
            .max((simplex[2][0] - simplex[0][0]).abs())
            + (simplex[1][1] - simplex[0][1])
                .abs()
                .max((simplex[2][1] - simplex[0][1]).abs());
        if (values[2] - values[0]).abs() <= ftol && spread <= 1e-9 {
            return Some((simplex[0], values[0]));
        }
        let centroid = lerp(simplex[0], simplex[1], 0.5);
        let reflected = lerp(centroid, simplex[2], -1.0);
        let fr = f(reflected);
        if fr < values[0] {
            let expanded = lerp(centroid, simplex[2], -2.0);
            let fe = f(expanded);
            (simplex[2], values[2]) = if fe < fr {
                (expanded, fe)
            } else {
                (reflected, fr)
            };
        } else if fr < values[1] {
            (simplex[2], values[2]) = (reflected, fr);
        } else {
            let contracted = if fr < values[2] {
                lerp(centroid, reflected, 0.5)
            } else {
                lerp(centroid, simplex[2], 0.5)
            };
            let fc = f(contracted);
            if fc < values[2].min(fr) {
                (simplex[2], values[2]) = (contracted, fc);
            } else {
                for i in 1..3 {
                    simplex[i] = lerp(simplex[0], simplex[i], 0.5);
                    values[i] = f(simplex[i]);
                }
            }
        }
    }
    None
}

/// Largest floor raise `dz` such that the `|in>` probability in `[0, dz]`
/// stays below `epsilon`.
pub fn safe_raise_height(cfg: &BouncerConfig, epsilon: f64) -> Result<f64> {
    cfg.validate()?;
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let z = &cfg.z_grid;
    let last = *z.last().expect("validated grid is non-empty");
    if epsilon >= 1.0 {
        return Ok(last);
    }
    let profile = InProfile::on_grid(z, cfg.z0);
    let density: Vec<f64> = profile.psi_in.iter().map(|v| v * v).collect();
    let mut cumulative = 0.0;
    for i in 1..z.len() {
        let piece = 0.5 * (z[i] - z[i - 1]) * (density[i] + density[i - 1]);
        if cumulative + piece >= epsilon {
            let frac = (epsilon - cumulative) / piece;
            return Ok(z[i - 1] + frac * (z[i] - z[i - 1]));
        }
        cumulative += piece;
    }
    Ok(last)
}
