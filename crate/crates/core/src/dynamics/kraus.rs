use crate::error::Result;
use crate::statespace::{expectations, JointState, Params, Picture};
use crate::C64;
use serde::Serialize;

/// Evolves every energy-degenerate pair `(x0[i], x1[i - shift])` under
///
/// ```text
/// dx0/dt = -(Gamma/4)(x0 - x1),   dx1/dt = +(Gamma/4)(x0 - x1)
/// ```
///
/// given `decay = exp(-Gamma t / 2)`. The sum of a pair is conserved and its
/// difference is multiplied by `decay`. Amplitudes whose partner falls off
/// the grid evolve with that partner held at zero and discarded.
pub(crate) fn evolve_pairs(x0: &mut [C64], x1: &mut [C64], shift: usize, decay: f64) {
    let n = x0.len();
    let edge = 0.5 * (1.0 + decay);
    for i in 0..n {
        if i >= shift {
            let (a, b) = (x0[i], x1[i - shift]);
            let sum = (a + b) * 0.5;
            let diff = (a - b) * (0.5 * decay);
            x0[i] = sum + diff;
            x1[i - shift] = sum - diff;
        } else {
            x0[i] *= edge;
        }
    }
    for b in x1[n.saturating_sub(shift)..].iter_mut() {
        *b *= edge;
    }
}

/// Applies the no-explosion evolution for time `t` to an
/// interaction-picture state. Arm II is untouched; the lost norm is added to
/// the explosion weight.
pub fn evolve_for(s: &JointState, gamma: f64, t: f64) -> Result<JointState> {
    s.require_picture(Picture::Interaction)?;
    let mut out = s.clone();
    let before = out.arm_i_norm_sqr();
    evolve_pairs(
        &mut out.psi0,
        &mut out.psi1,
        s.grid.shift_steps,
        (-0.5 * gamma * t).exp(),
    );
    let lost = (before - out.arm_i_norm_sqr()).max(0.0);
    out.explosion_weight = (s.explosion_weight + lost).min(1.0);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub survival: f64,
    pub e_ph: f64,
    pub e_m: f64,
    pub p_arm_i: f64,
    pub p_arm_ii: f64,
}

#[derive(Debug, Clone)]
pub struct EvolutionResult {
    pub final_state: JointState,
    /// Squared norm of the unexploded branch at `tau`.
    pub survival_probability: f64,
    pub trajectory: Option<Vec<TrajectoryPoint>>,
}

const TRAJECTORY_POINTS: usize = 101;

/// Evolves `s` over the interaction time `p.tau`, optionally sampling
/// norms and energies at 101 uniformly spaced times.
pub fn evolve_no_explosion(s: &JointState, p: &Params, record: bool) -> Result<EvolutionResult> {
    s.require_picture(Picture::Interaction)?;
    let final_state = evolve_for(s, p.gamma, p.tau)?;
    let trajectory = if record {
        let mut points = Vec::with_capacity(TRAJECTORY_POINTS);
        for k in 0..TRAJECTORY_POINTS {
            let t = p.tau * k as f64 / (TRAJECTORY_POINTS - 1) as f64;
            let st = evolve_for(s, p.gamma, t)?;
            let e = expectations(&st)?;
            points.push(TrajectoryPoint {
                t,
                survival: st.norm_sqr(),
                e_ph: e.e_ph,
                e_m: e.e_m,
                p_arm_i: e.p_arm_i,
                p_arm_ii: e.p_arm_ii,
            });
        }
        Some(points)
    } else {
        None
    };
    Ok(EvolutionResult {
        survival_probability: final_state.norm_sqr(),
        final_state,
        trajectory,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statespace::initial_state;
    use proptest::prelude::*;

    fn params(gamma_tau: f64) -> Params {
        Params {
            gamma: 1.0,
            tau: gamma_tau,
            n_modes: 1201,
            grid_span: 8.0,
            ..Params::default()
        }
    }

    #[test]
    fn single_arm_survival_at_twenty() {
        let p = params(20.0);
        let r = evolve_no_explosion(&initial_state(&p, false).unwrap(), &p, false).unwrap();
        // (1 + e^-20) / 2
        assert!((r.survival_probability - 0.500_000_001_030_576).abs() < 1e-12);
        assert!((r.survival_probability + r.final_state.explosion_weight - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_rate_is_identity() {
        let p = Params {
            gamma: 0.0,
            ..params(20.0)
        };
        let s = initial_state(&p, true).unwrap();
        let r = evolve_no_explosion(&s, &p, false).unwrap();
        assert_eq!(r.final_state.psi0, s.psi0);
        assert_eq!(r.survival_probability, s.norm_sqr());
    }

    #[test]
    fn interferometer_survival_tends_to_three_quarters() {
        let p = params(60.0);
        let r = evolve_no_explosion(&initial_state(&p, true).unwrap(), &p, false).unwrap();
        assert!((r.survival_probability - 0.75).abs() < 1e-12);
    }

    #[test]
    fn trajectory_is_monotone() {
        let p = params(5.0);
        let r = evolve_no_explosion(&initial_state(&p, true).unwrap(), &p, true).unwrap();
        let tr = r.trajectory.unwrap();
        assert_eq!(tr.len(), 101);
        assert!(tr
            .windows(2)
            .all(|w| w[1].survival <= w[0].survival + 1e-15));
        assert_eq!(tr[100].t, 5.0);
    }

    #[test]
    fn schrodinger_input_rejected() {
        let p = params(1.0);
        let s = initial_state(&p, true)
            .unwrap()
            .to_picture(Picture::Schrodinger, 0.3);
        assert!(evolve_no_explosion(&s, &p, false).is_err());
    }

    proptest! {
        #[test]
        fn pair_sums_conserved(
            vals in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 40),
            t in 0.0..30.0f64,
            shift in 1usize..5,
        ) {
            let mut x0: Vec<C64> = vals[..20].iter().map(|&(r, i)| C64::new(r, i)).collect();
            let mut x1: Vec<C64> = vals[20..].iter().map(|&(r, i)| C64::new(r, i)).collect();
            let sums: Vec<C64> = (shift..20).map(|i| x0[i] + x1[i - shift]).collect();
            evolve_pairs(&mut x0, &mut x1, shift, (-0.5 * t).exp());
            for (k, i) in (shift..20).enumerate() {
                prop_assert!((x0[i] + x1[i - shift] - sums[k]).norm() < 1e-14);
            }
        }

        #[test]
        fn evolution_composes(t1 in 0.0..10.0f64, t2 in 0.0..10.0f64) {
            let p = Params { n_modes: 1201, grid_span: 6.0, ..Params::default() };
            let s = initial_state(&p, true).unwrap();
            let a = evolve_for(&evolve_for(&s, 1.0, t1).unwrap(), 1.0, t2).unwrap();
            let b = evolve_for(&s, 1.0, t1 + t2).unwrap();
            for (x, y) in a.psi0.iter().zip(&b.psi0).chain(a.psi1.iter().zip(&b.psi1)) {
                prop_assert!((x - y).norm() < 1e-14);
            }
            prop_assert!((a.explosion_weight - b.explosion_weight).abs() < 1e-13);
        }

        #[test]
        fn survival_non_increasing(t1 in 0.0..50.0f64, dt in 0.0..5.0f64) {
            let p = Params { n_modes: 1201, grid_span: 6.0, ..Params::default() };
            let s = initial_state(&p, false).unwrap();
            let a = evolve_for(&s, 1.0, t1).unwrap().norm_sqr();
            let b = evolve_for(&s, 1.0, t1 + dt).unwrap().norm_sqr();
            prop_assert!(b <= a + 1e-15);
        }
    }
}
