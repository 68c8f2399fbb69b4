//! Two-state-vector analysis of the dark-port ensemble: weak values of the
//! photon-bomb observables, anomaly detection, and the backward-evolving
//! state.

mod backward;
mod propagator;
mod series;

pub use backward::{backward_propagate, BackwardState};
pub use propagator::{effective_propagator_apply, EffectivePropagator};
pub use series::{
    detect_anomalies, weak_value, weak_value_series, weak_value_series_with, weak_value_with,
    Anomaly, PostSelection, TwoStateVector, WeakValueOptions, WeakValueSeries,
    DEFAULT_ANOMALY_EPSILON, DEFAULT_FLOOR, DEFAULT_TIMES,
};
