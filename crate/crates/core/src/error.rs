use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid too coarse: {quantity} changes by {relative_change:.3e} on refinement")]
    GridTooCoarse {
        quantity: &'static str,
        relative_change: f64,
    },

    #[error("optimizer did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("frequency grid infeasible: motional gap {omega_m} is below the requested spacing {spacing}")]
    InfeasibleGrid { omega_m: f64, spacing: f64 },

    #[error("wavepacket center {center} lies outside the grid [{lo}, {hi}]")]
    CenterOffGrid { center: f64, lo: f64, hi: f64 },

    #[error("conditioned branch has zero norm")]
    ZeroNorm,

    #[error("state is in the {found} picture, expected {expected}")]
    PictureMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("post-selection amplitude {amplitude:.3e} is below the floor {floor:.3e}")]
    VanishingPostSelection { amplitude: f64, floor: f64 },

    #[error("integration unstable: norm drifted by {drift:.3e}")]
    StepInstability { drift: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("numerical tolerance exceeded: {0}")]
    Tolerance(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit status for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Tolerance(_) => 2,
            _ => 1,
        }
    }
}
