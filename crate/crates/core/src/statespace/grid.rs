use super::Params;
use crate::error::{Error, Result};
use crate::C64;
use serde::Serialize;

/// Uniform photon frequency grid whose spacing divides `omega_m` exactly.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyGrid {
    pub omegas: Vec<f64>,
    pub spacing: f64,
    /// `omega_m / spacing`, an integer by construction.
    pub shift_steps: usize,
}

impl FrequencyGrid {
    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    pub fn lo(&self) -> f64 {
        self.omegas[0]
    }

    pub fn hi(&self) -> f64 {
        self.omegas[self.omegas.len() - 1]
    }

    /// The motional gap recovered from the grid.
    pub fn omega_m(&self) -> f64 {
        self.spacing * self.shift_steps as f64
    }

    pub fn omega_max_abs(&self) -> f64 {
        self.lo().abs().max(self.hi().abs())
    }
}

/// Grid centred on `omega_ph` covering `+- grid_span * delta_omega_ph`.
///
/// The nominal spacing `2 span / (n_modes - 1)` is reduced to
/// `omega_m / ceil(omega_m / nominal)` and the mode count raised to keep the
/// span, so `n_modes` never shrinks.
pub fn build_grid(p: &Params) -> Result<FrequencyGrid> {
    p.validate()?;
    let half = p.grid_span * p.delta_omega_ph;
    let nominal = 2.0 * half / (p.n_modes - 1) as f64;
    if p.omega_m < nominal {
        return Err(Error::InfeasibleGrid {
            omega_m: p.omega_m,
            spacing: nominal,
        });
    }
    let shift_steps = (p.omega_m / nominal).ceil() as usize;
    let spacing = p.omega_m / shift_steps as f64;
    let half_count = (half / spacing).ceil() as usize;
    let omegas = (0..=2 * half_count)
        .map(|i| p.omega_ph + (i as f64 - half_count as f64) * spacing)
        .collect();
    Ok(FrequencyGrid {
        omegas,
        spacing,
        shift_steps,
    })
}

/// Unit-norm Gaussian amplitudes `exp(-(w - center)^2 / (4 width^2))`, so the
/// spectral density has standard deviation `width`. The outermost
/// `shift_steps` modes on each side are left empty so that every occupied
/// mode has its energy partner on the grid.
pub fn gaussian_wavepacket(grid: &FrequencyGrid, center: f64, width: f64) -> Result<Vec<C64>> {
    if !(center >= grid.lo() && center <= grid.hi()) {
        return Err(Error::CenterOffGrid {
            center,
            lo: grid.lo(),
            hi: grid.hi(),
        });
    }
    if !(width > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "width must be positive, got {width}"
        )));
    }
    let n = grid.len();
    let guard = grid.shift_steps.min(n / 2);
    let mut amps: Vec<f64> = grid
        .omegas
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            if i < guard || i >= n - guard {
                0.0
            } else {
                (-(w - center).powi(2) / (4.0 * width * width)).exp()
            }
        })
        .collect();
    let norm = amps.iter().map(|a| a * a).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroNorm);
    }
    amps.iter_mut().for_each(|a| *a /= norm);
    Ok(amps.into_iter().map(|a| C64::new(a, 0.0)).collect())
}
