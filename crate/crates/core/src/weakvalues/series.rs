use crate::dynamics::{evolve_for, evolve_pairs};
use crate::error::{Error, Result};
use crate::statespace::{
    gaussian_wavepacket, initial_state, JointState, Observable, Params, Sectors,
};
use crate::C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

pub const DEFAULT_FLOOR: f64 = 1e-12;
pub const DEFAULT_TIMES: usize = 201;
pub const DEFAULT_ANOMALY_EPSILON: f64 = 1e-9;

/// Final state selected after the exit beamsplitter: the dark port fires
/// and the bomb is found in `|in>`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PostSelection {
    /// `|in>` paired with the energy-conserving photon partner: the photon
    /// in `|1>` carries `phi0(w + omega_m)`. This is the state reached by the
    /// no-explosion dynamics itself.
    #[default]
    EnergyMatched,
    /// Photon in the original wavepacket, bomb in `|in>`, as a product.
    Factorized,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakValueOptions {
    pub post_selection: PostSelection,
    /// Smallest admissible `|<Psi_f|U(tau)|Psi_i>|`.
    pub floor: f64,
    /// Tolerance on the spectral range when flagging anomalies.
    pub anomaly_epsilon: f64,
}

impl Default for WeakValueOptions {
    fn default() -> Self {
        Self {
            post_selection: PostSelection::default(),
            floor: DEFAULT_FLOOR,
            anomaly_epsilon: DEFAULT_ANOMALY_EPSILON,
        }
    }
}

/// Pre- and post-selected pair for one parameter set. The forward state is
/// the interferometer input evolved to `t`; the backward state is the
/// post-selected bra evolved back from `tau`. The no-explosion map is real
/// and symmetric on each energy pair, so its adjoint is itself.
#[derive(Debug, Clone)]
pub struct TwoStateVector {
    params: Params,
    initial: JointState,
    post: Sectors,
    amplitude: C64,
}

impl TwoStateVector {
    pub fn new(p: &Params, opts: &WeakValueOptions) -> Result<Self> {
        let initial = initial_state(p, true)?;
        let phi0 = gaussian_wavepacket(&initial.grid, p.omega_ph, p.delta_omega_ph)?;
        let shift = initial.grid.shift_steps;
        let phi1: Vec<C64> = match opts.post_selection {
            PostSelection::EnergyMatched => (0..phi0.len())
                .map(|j| phi0.get(j + shift).copied().unwrap_or_default())
                .collect(),
            PostSelection::Factorized => phi0.clone(),
        };
        // |dk>|in> = (|I> - |II>)/sqrt2 (|0> - |1>)/sqrt2
        let post = Sectors {
            i0: phi0.iter().map(|a| a * 0.5).collect(),
            i1: phi1.iter().map(|a| a * -0.5).collect(),
            ii0: phi0.iter().map(|a| a * -0.5).collect(),
            ii1: phi1.iter().map(|a| a * 0.5).collect(),
        };
        let fin = Sectors::from(&evolve_for(&initial, p.gamma, p.tau)?);
        let amplitude = post.inner(&fin);
        if !(amplitude.norm() > opts.floor) {
            return Err(Error::VanishingPostSelection {
                amplitude: amplitude.norm(),
                floor: opts.floor,
            });
        }
        Ok(Self {
            params: p.clone(),
            initial,
            post,
            amplitude,
        })
    }

    /// `<Psi_f|U(tau)|Psi_i>`.
    pub fn amplitude(&self) -> C64 {
        self.amplitude
    }

    pub fn grid(&self) -> &Arc<crate::statespace::FrequencyGrid> {
        &self.initial.grid
    }

    /// Backward and forward states at time `t`.
    pub fn states_at(&self, t: f64) -> Result<(Sectors, Sectors)> {
        let p = &self.params;
        if !(0.0..=p.tau).contains(&t) {
            return Err(Error::InvalidParameter(format!(
                "t = {t} outside [0, {}]",
                p.tau
            )));
        }
        let ket = Sectors::from(&evolve_for(&self.initial, p.gamma, t)?);
        let mut bra = self.post.clone();
        evolve_pairs(
            &mut bra.i0,
            &mut bra.i1,
            self.initial.grid.shift_steps,
            (-0.5 * p.gamma * (p.tau - t)).exp(),
        );
        Ok((bra, ket))
    }

    /// Weak value from precomputed states. The denominator `<bra|ket>` is
    /// the same at every `t`; evaluating it alongside the numerator keeps
    /// the identity exactly 1.
    pub fn ratio(&self, a: Observable, bra: &Sectors, ket: &Sectors) -> C64 {
        let num = bra.inner(&a.apply(ket, &self.initial.grid.omegas, self.params.omega_m));
        num / bra.inner(ket)
    }

    pub fn value(&self, a: Observable, t: f64) -> Result<C64> {
        let (bra, ket) = self.states_at(t)?;
        Ok(self.ratio(a, &bra, &ket))
    }
}

/// Weak value of `a` at time `t` for the dark-port ensemble, computed on the
/// full frequency grid.
pub fn weak_value(a: Observable, t: f64, p: &Params) -> Result<C64> {
    weak_value_with(a, t, p, &WeakValueOptions::default())
}

pub fn weak_value_with(a: Observable, t: f64, p: &Params, opts: &WeakValueOptions) -> Result<C64> {
    TwoStateVector::new(p, opts)?.value(a, t)
}

/// Weak values sampled uniformly on `[0, tau]`. Hamiltonian entries are in
/// units of `hbar Gamma`, as are the spectral ranges.
#[derive(Debug, Clone, Serialize)]
pub struct WeakValueSeries {
    pub gamma: f64,
    pub times: Vec<f64>,
    pub observables: Vec<Observable>,
    /// `values[k][i]`: observable `k` at `times[i]`.
    pub values: Vec<Vec<C64>>,
    pub ranges: Vec<(f64, f64)>,
    pub anomalous: Vec<Vec<bool>>,
}

impl WeakValueSeries {
    pub fn column(&self, a: Observable) -> Option<&[C64]> {
        self.observables
            .iter()
            .position(|&o| o == a)
            .map(|k| self.values[k].as_slice())
    }
}

pub fn weak_value_series(
    observables: &[Observable],
    p: &Params,
    n_times: usize,
) -> Result<WeakValueSeries> {
    weak_value_series_with(observables, p, n_times, &WeakValueOptions::default())
}

pub fn weak_value_series_with(
    observables: &[Observable],
    p: &Params,
    n_times: usize,
    opts: &WeakValueOptions,
) -> Result<WeakValueSeries> {
    if n_times < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 times, got {n_times}"
        )));
    }
    let tsv = TwoStateVector::new(p, opts)?;
    let times: Vec<f64> = (0..n_times)
        .map(|i| p.tau * i as f64 / (n_times - 1) as f64)
        .collect();
    let by_time: Vec<Vec<C64>> = times
        .par_iter()
        .map(|&t| {
            let (bra, ket) = tsv.states_at(t)?;
            Ok(observables
                .iter()
                .map(|&a| tsv.ratio(a, &bra, &ket))
                .collect())
        })
        .collect::<Result<_>>()?;
    let unit = |a: Observable| {
        if a.is_projector() || a == Observable::Identity {
            1.0
        } else {
            p.gamma
        }
    };
    let omega_max = tsv.grid().omega_max_abs();
    let mut values = Vec::with_capacity(observables.len());
    let mut ranges = Vec::with_capacity(observables.len());
    let mut anomalous = Vec::with_capacity(observables.len());
    for (k, &a) in observables.iter().enumerate() {
        let u = unit(a);
        let (lo, hi) = a.spectral_range(omega_max, p.omega_m);
        let (lo, hi) = (lo / u, hi / u);
        let col: Vec<C64> = by_time.iter().map(|row| row[k] / u).collect();
        anomalous.push(
            col.iter()
                .map(|v| v.re < lo - opts.anomaly_epsilon || v.re > hi + opts.anomaly_epsilon)
                .collect(),
        );
        values.push(col);
        ranges.push((lo, hi));
    }
    Ok(WeakValueSeries {
        gamma: p.gamma,
        times,
        observables: observables.to_vec(),
        values,
        ranges,
        anomalous,
    })
}

/// A maximal run of consecutive anomalous samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Anomaly {
    pub observable: Observable,
    pub t_start: f64,
    pub t_end: f64,
    /// Real part farthest outside the spectral range within the run.
    pub extremal: f64,
}

pub fn detect_anomalies(series: &WeakValueSeries) -> Vec<Anomaly> {
    let mut out = Vec::new();
    for (k, &a) in series.observables.iter().enumerate() {
        let (lo, hi) = series.ranges[k];
        let excess = |v: f64| (lo - v).max(v - hi);
        let mut run: Option<Anomaly> = None;
        for (i, &flag) in series.anomalous[k].iter().enumerate() {
            let (t, v) = (series.times[i], series.values[k][i].re);
            match (&mut run, flag) {
                (Some(r), true) => {
                    r.t_end = t;
                    if excess(v) > excess(r.extremal) {
                        r.extremal = v;
                    }
                }
                (None, true) => {
                    run = Some(Anomaly {
                        observable: a,
                        t_start: t,
                        t_end: t,
                        extremal: v,
                    })
                }
                (Some(_), false) => out.extend(run.take()),
                (None, false) => {}
            }
        }
        out.extend(run);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::analytic_weak_values;
    use crate::statespace::{Arm, Motional};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const I0: Observable = Observable::ProjectorJoint(Arm::I, Motional::Ground);
    const I1: Observable = Observable::ProjectorJoint(Arm::I, Motional::Excited);

    fn small() -> Params {
        Params {
            n_modes: 2001,
            ..Params::default()
        }
    }

    /// Three-state model oracle: ket `(|I>(e_t|in> + |out>)/sqrt2 + |II,0>)/sqrt2`,
    /// bra `(E'|I,in> - |II,in>)/sqrt2`, with the photon factor ignored.
    fn three_state_pi_ii(gt: f64) -> f64 {
        1.0 / (1.0 - (-gt / 2.0).exp())
    }

    #[test]
    fn identity_is_one() {
        let tsv = TwoStateVector::new(&small(), &WeakValueOptions::default()).unwrap();
        for t in [0.0, 3.3, 20.0] {
            assert_eq!(
                tsv.value(Observable::Identity, t).unwrap(),
                C64::new(1.0, 0.0)
            );
        }
    }

    #[test]
    fn arm_ii_projector_matches_three_state_model() {
        let p = small();
        for t in [0.0, 10.0, 20.0] {
            let v = weak_value(Observable::ProjectorArm(Arm::II), t, &p).unwrap();
            assert!((v.re - three_state_pi_ii(20.0)).abs() < 1e-10, "{v}");
            assert!(v.im.abs() < 1e-12);
        }
    }

    #[test]
    fn energy_basis_matches_closed_form() {
        let p = Params::default();
        let tsv = TwoStateVector::new(&p, &WeakValueOptions::default()).unwrap();
        for t in [0.0, 5.0, 10.0, 17.5, 20.0] {
            let w = analytic_weak_values(1.0, 20.0, t, p.omega_ph, p.omega_m).unwrap();
            for a in [
                I0,
                I1,
                Observable::HphRestricted(Arm::I),
                Observable::HmRestricted(Arm::I),
            ] {
                let v = tsv.value(a, t).unwrap();
                assert!(
                    (v.re - w.get(a).unwrap().printed).abs() < 1e-8,
                    "{a} at {t}: {v}"
                );
            }
        }
    }

    #[test]
    fn sum_rules_at_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..10 {
            let tau = rng.gen_range(0.5..40.0);
            let t = rng.gen_range(0.0..tau);
            let p = Params { tau, ..small() };
            let tsv = TwoStateVector::new(&p, &WeakValueOptions::default()).unwrap();
            let v = |a| tsv.value(a, t).unwrap();
            let pi_i = v(Observable::ProjectorArm(Arm::I));
            assert!((pi_i + v(Observable::ProjectorArm(Arm::II)) - 1.0).norm() < 1e-10);
            assert!((v(I0) + v(I1) - pi_i).norm() < 1e-10);
            let io = v(Observable::ProjectorJoint(Arm::I, Motional::In))
                + v(Observable::ProjectorJoint(Arm::I, Motional::Out));
            assert!((io - pi_i).norm() < 1e-10);
        }
    }

    #[test]
    fn energy_weak_value_is_conserved() {
        let p = small();
        let tsv = TwoStateVector::new(&p, &WeakValueOptions::default()).unwrap();
        let total =
            |t| (tsv.value(Observable::Hph, t).unwrap() + tsv.value(Observable::Hm, t).unwrap()).re;
        let e0 = total(0.0);
        for t in [2.0, 9.0, 20.0] {
            assert!((total(t) - e0).abs() < p.omega_m * p.omega_m / p.delta_omega_ph);
        }
    }

    #[test]
    fn no_bomb_means_no_post_selection() {
        let p = Params {
            gamma: 0.0,
            ..small()
        };
        assert!(matches!(
            weak_value(I0, 1.0, &p),
            Err(Error::VanishingPostSelection { .. })
        ));
    }

    #[test]
    fn factorized_post_selection_differs_at_order_overlap() {
        let p = small();
        let opts = WeakValueOptions {
            post_selection: PostSelection::Factorized,
            ..Default::default()
        };
        let a = weak_value_with(I0, 20.0, &p, &opts).unwrap();
        let b = weak_value(I0, 20.0, &p).unwrap();
        let r = p.omega_m / p.delta_omega_ph;
        assert!((a - b).norm() < r, "{a} vs {b}");
    }

    #[test]
    fn series_flags_negative_projector() {
        let p = small();
        let s = weak_value_series(&[I0, Observable::Identity], &p, 21).unwrap();
        assert_eq!(s.times.len(), 21);
        assert!(s.anomalous[0][1..].iter().all(|&f| f));
        assert!(s.anomalous[1].iter().all(|&f| !f));
        let an = detect_anomalies(&s);
        assert_eq!(an.len(), 1);
        assert_eq!(an[0].observable, I0);
        assert!((an[0].extremal + 0.5).abs() < 1e-3);
        assert_eq!(an[0].t_end, 20.0);
        assert!(weak_value_series(&[I0], &p, 1).is_err());
    }

    #[test]
    fn sampling_is_antisymmetric_up_to_finite_rate() {
        let p = small();
        let s = weak_value_series(&[I0, I1], &p, 41).unwrap();
        let e = (-10.0f64).exp();
        for i in 0..41 {
            assert!((s.values[0][i] + s.values[1][i]).norm() <= 2.0 * e / (1.0 - e) + 1e-12);
        }
    }
}
