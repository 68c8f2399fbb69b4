use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Physical parameters plus grid controls. Frequencies are angular, in
/// units where `Gamma` is typically 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    /// Photon carrier frequency.
    pub omega_ph: f64,
    /// Photon spectral width (standard deviation of the spectral density).
    pub delta_omega_ph: f64,
    /// Motional gap between the two lowest bouncer levels.
    pub omega_m: f64,
    /// Absorption rate of the bomb.
    pub gamma: f64,
    /// Interaction duration (time the photon spends in the bomb region).
    pub tau: f64,
    /// Requested number of frequency modes; may be raised by the grid builder.
    pub n_modes: usize,
    /// Grid half-width in units of `delta_omega_ph`.
    pub grid_span: f64,
    /// Ratio below which a "much greater than" regime condition is flagged.
    pub regime_factor: f64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            omega_ph: 10.0,
            delta_omega_ph: 100.0,
            omega_m: 2.0,
            gamma: 1.0,
            tau: 20.0,
            n_modes: 4096,
            grid_span: 8.0,
            regime_factor: 10.0,
        }
    }
}

impl Params {
    pub fn gamma_tau(&self) -> f64 {
        self.gamma * self.tau
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("omega_ph", self.omega_ph),
            ("delta_omega_ph", self.delta_omega_ph),
            ("omega_m", self.omega_m),
            ("gamma", self.gamma),
            ("tau", self.tau),
            ("grid_span", self.grid_span),
            ("regime_factor", self.regime_factor),
        ];
        if let Some((name, v)) = finite.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "{name} must be finite, got {v}"
            )));
        }
        if self.omega_m <= 0.0 {
            return Err(Error::InvalidParameter("omega_m must be positive".into()));
        }
        if self.delta_omega_ph <= 0.0 {
            return Err(Error::InvalidParameter(
                "delta_omega_ph must be positive".into(),
            ));
        }
        if self.gamma < 0.0 || self.tau < 0.0 {
            return Err(Error::InvalidParameter(
                "gamma and tau must be non-negative".into(),
            ));
        }
        if self.grid_span <= 0.0 {
            return Err(Error::InvalidParameter("grid_span must be positive".into()));
        }
        if self.n_modes < 3 {
            return Err(Error::InvalidParameter("n_modes must be at least 3".into()));
        }
        Ok(())
    }

    /// Regime conditions `omega_ph >> omega_m`, `delta_omega_ph >> omega_m`
    /// and `omega_m >> gamma` that fail at the configured factor. These are
    /// warnings: the simulation still runs.
    pub fn regime_warnings(&self) -> Vec<String> {
        let checks = [
            ("omega_ph / omega_m", self.omega_ph / self.omega_m),
            (
                "delta_omega_ph / omega_m",
                self.delta_omega_ph / self.omega_m,
            ),
            ("omega_m / gamma", self.omega_m / self.gamma),
        ];
        checks
            .iter()
            .filter(|(_, ratio)| *ratio < self.regime_factor)
            .map(|(name, ratio)| {
                format!(
                    "{name} = {ratio:.3} is below the regime factor {}",
                    self.regime_factor
                )
            })
            .collect()
    }

    /// Logs regime warnings through `log::warn!`.
    pub fn warn_regime(&self) {
        for w in self.regime_warnings() {
            log::warn!("{w}");
        }
    }
}
