//! Closed-form results for the ideal (`Delta omega_ph >> omega_m`) limit.
//! They serve as the reference against which the grid simulation and the
//! two-state-vector engine are tested.

use crate::error::{Error, Result};
use crate::statespace::{Arm, Motional, Observable};
use serde::Serialize;

/// Beyond this value of `Gamma tau` every exponential is replaced by its limit.
const LIMIT_GAMMA_TAU: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticReport {
    pub c0: f64,
    pub c1: f64,
    pub p_ne_single: f64,
    pub p_ne_interf: f64,
    pub p_dk: f64,
    pub p_br: f64,
    pub p_expl: f64,
    pub e_dk_ph: f64,
    pub e_dk_m: f64,
    pub e_br_ph: f64,
    pub e_br_m: f64,
}

/// `(exp(-x/2), exp(-x))` with the limit values past [`LIMIT_GAMMA_TAU`].
fn decays(gamma_tau: f64) -> (f64, f64) {
    if gamma_tau > LIMIT_GAMMA_TAU {
        (0.0, 0.0)
    } else {
        ((-0.5 * gamma_tau).exp(), (-gamma_tau).exp())
    }
}

/// Probabilities, amplitudes and conditioned energies after an interaction
/// of duration `tau`.
///
/// The bright-port motional energy follows from the conditioned state
/// `(3 + e)|0> + (1 - e)|1>` (up to normalization), `e = exp(-Gamma tau/2)`.
pub fn closed_forms(gamma: f64, tau: f64, omega_ph: f64, omega_m: f64) -> Result<AnalyticReport> {
    if !(gamma >= 0.0 && tau >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need gamma >= 0 and tau >= 0, got {gamma}, {tau}"
        )));
    }
    let gt = gamma * tau;
    let (e, e2) = decays(gt);
    let e_br_m = omega_m * (1.0 - e).powi(2) / ((3.0 + e).powi(2) + (1.0 - e).powi(2));
    Ok(AnalyticReport {
        c0: 0.5 * (1.0 + e),
        c1: 0.5 * (1.0 - e),
        p_ne_single: 0.5 * (1.0 + e2),
        p_ne_interf: 0.5 + 0.25 * (1.0 + e2),
        p_dk: (1.0 - e).powi(2) / 8.0,
        p_br: (5.0 + 2.0 * e + e2) / 8.0,
        p_expl: (1.0 - e2) / 4.0,
        e_dk_ph: omega_ph - 0.5 * omega_m,
        e_dk_m: 0.5 * omega_m,
        e_br_ph: omega_ph - e_br_m,
        e_br_m,
    })
}

/// One observable's closed-form weak value in two readings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeakValueEntry {
    pub observable: Observable,
    /// The formula as published.
    pub printed: f64,
    /// The value implied by the three-state model `{|II>, |Phi_i>, |Phi_o>}`
    /// with the same propagator, which obeys every sum rule.
    pub consistent: f64,
}

/// Internal-consistency residuals of the published formulas. Each is zero
/// for an exact set of weak values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SumRuleResiduals {
    /// `(Pi_I0 + Pi_I1) - (Pi_Iin + Pi_Iout)`.
    pub arm_i_basis: f64,
    /// `(Pi_II0 + Pi_II1) - (Pi_IIin + Pi_IIout)`.
    pub arm_ii_basis: f64,
    /// `Pi_I0 + Pi_I1 + Pi_II0 + Pi_II1 - 1`.
    pub energy_basis_completeness: f64,
    /// `Pi_I + Pi_II - 1` with the rank-2 formulas.
    pub rank2_completeness: f64,
    /// `Pi_I1 + Pi_I0`, which vanishes only as `Gamma tau -> infinity`.
    pub antisymmetry: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyticWeakValues {
    pub t: f64,
    pub entries: Vec<WeakValueEntry>,
    pub residuals: SumRuleResiduals,
    /// Same residuals for the consistent column; zero up to rounding.
    pub consistent_residuals: SumRuleResiduals,
}

impl AnalyticWeakValues {
    pub fn get(&self, o: Observable) -> Option<&WeakValueEntry> {
        self.entries.iter().find(|e| e.observable == o)
    }
}

struct Basis {
    i_in: f64,
    i_out: f64,
    ii_in: f64,
    ii_out: f64,
    i0: f64,
    i1: f64,
    ii0: f64,
    ii1: f64,
    rank2_i: f64,
    rank2_ii: f64,
}

impl Basis {
    fn residuals(&self) -> SumRuleResiduals {
        SumRuleResiduals {
            arm_i_basis: (self.i0 + self.i1) - (self.i_in + self.i_out),
            arm_ii_basis: (self.ii0 + self.ii1) - (self.ii_in + self.ii_out),
            energy_basis_completeness: self.i0 + self.i1 + self.ii0 + self.ii1 - 1.0,
            rank2_completeness: self.rank2_i + self.rank2_ii - 1.0,
            antisymmetry: self.i0 + self.i1,
        }
    }

    fn value(&self, o: Observable, omega_ph: f64, omega_m: f64) -> Option<f64> {
        use Arm::*;
        use Motional::*;
        let h_ph_i = omega_ph * self.i0 + (omega_ph - omega_m) * self.i1;
        let h_ph_ii = omega_ph * self.ii0 + (omega_ph - omega_m) * self.ii1;
        Some(match o {
            Observable::ProjectorJoint(I, In) => self.i_in,
            Observable::ProjectorJoint(I, Out) => self.i_out,
            Observable::ProjectorJoint(II, In) => self.ii_in,
            Observable::ProjectorJoint(II, Out) => self.ii_out,
            Observable::ProjectorJoint(I, Ground) => self.i0,
            Observable::ProjectorJoint(I, Excited) => self.i1,
            Observable::ProjectorJoint(II, Ground) => self.ii0,
            Observable::ProjectorJoint(II, Excited) => self.ii1,
            Observable::ProjectorArm(I) => self.rank2_i,
            Observable::ProjectorArm(II) => self.rank2_ii,
            Observable::Hm => omega_m * (self.i1 + self.ii1),
            Observable::HmRestricted(I) => omega_m * self.i1,
            Observable::HmRestricted(II) => omega_m * self.ii1,
            Observable::HphRestricted(I) => h_ph_i,
            Observable::HphRestricted(II) => h_ph_ii,
            Observable::Hph => h_ph_i + h_ph_ii,
            Observable::Identity => return None,
        })
    }
}

/// Weak values for the dark-port ensemble at time `t` of an interaction of
/// length `tau`, in both the published and the self-consistent form, with
/// the sum-rule residuals of each.
///
/// Energies carry the units of `omega_ph` and `omega_m`.
pub fn analytic_weak_values(
    gamma: f64,
    tau: f64,
    t: f64,
    omega_ph: f64,
    omega_m: f64,
) -> Result<AnalyticWeakValues> {
    if !(0.0..=tau).contains(&t) {
        return Err(Error::InvalidParameter(format!(
            "t = {t} outside [0, {tau}]"
        )));
    }
    let gt = gamma * tau;
    // dark-port amplitude <dk, in| U(tau) |Psi_i> up to sign
    let amplitude = -(-0.5 * gt).exp_m1() / (2.0 * std::f64::consts::SQRT_2);
    if !(amplitude > 0.0) {
        return Err(Error::VanishingPostSelection {
            amplitude,
            floor: 0.0,
        });
    }
    let (eh, _) = decays(gt);
    let late = (-0.5 * gamma * (tau - t)).exp();
    let one_minus_eh = -(-0.5 * gt).exp_m1();
    let i0 = -(late + eh) / (2.0 * one_minus_eh);
    let i1 = (late - eh) / (2.0 * one_minus_eh);
    // 1/(e^x - 1), exact for large x through expm1 overflow to infinity
    let inv_em1 = |x: f64| 1.0 / x.exp_m1();
    let printed = Basis {
        i_in: -inv_em1(gt),
        i_out: 0.0,
        ii_in: 1.0 + inv_em1(gt),
        ii_out: 0.0,
        i0,
        i1,
        ii0: 1.0 / -(-gt).exp_m1(),
        ii1: 0.0,
        rank2_i: -inv_em1(gt),
        rank2_ii: 1.0 / -(-gt).exp_m1(),
    };
    let consistent = Basis {
        i_in: -inv_em1(0.5 * gt),
        i_out: 0.0,
        ii_in: 1.0 + inv_em1(0.5 * gt),
        ii_out: 0.0,
        i0,
        i1,
        ii0: 1.0 + inv_em1(0.5 * gt),
        ii1: 0.0,
        rank2_i: -inv_em1(0.5 * gt),
        rank2_ii: 1.0 + inv_em1(0.5 * gt),
    };
    let mut observables = Observable::full_set();
    observables.retain(|&o| o != Observable::Identity);
    let entries = observables
        .into_iter()
        .filter_map(|o| {
            Some(WeakValueEntry {
                observable: o,
                printed: printed.value(o, omega_ph, omega_m)?,
                consistent: consistent.value(o, omega_ph, omega_m)?,
            })
        })
        .collect();
    Ok(AnalyticWeakValues {
        t,
        entries,
        residuals: printed.residuals(),
        consistent_residuals: consistent.residuals(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn at(gt: f64) -> AnalyticReport {
        closed_forms(1.0, gt, 10.0, 2.0).unwrap()
    }

    #[test]
    fn probabilities_sum_to_one_everywhere() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let gt = rng.gen_range(0.0..100.0);
            let r = at(gt);
            assert!(
                (r.p_dk + r.p_br + r.p_expl - 1.0).abs() < 1e-14,
                "gt = {gt}"
            );
            assert!((r.c0 + r.c1 - 1.0).abs() < 1e-15);
            assert!(r.c0 * r.c0 + r.c1 * r.c1 <= 1.0 + 1e-15);
            // the dark and bright ports share the unexploded branch
            assert!((r.p_dk + r.p_br - r.p_ne_interf).abs() < 1e-14);
        }
    }

    #[test]
    fn long_interaction_limits() {
        let r = at(1e4);
        assert_eq!((r.p_dk, r.p_br, r.p_expl), (0.125, 0.625, 0.25));
        assert_eq!(r.e_br_m, 0.2);
        assert_eq!(r.p_ne_single, 0.5);
        let r50 = at(50.0);
        assert!((r50.p_dk - 0.125).abs() < 1e-8);
        assert!((r50.e_br_m - 0.2).abs() < 1e-9);
    }

    #[test]
    fn no_bomb() {
        let r = closed_forms(0.0, 20.0, 10.0, 2.0).unwrap();
        assert_eq!((r.p_dk, r.p_expl, r.p_br), (0.0, 0.0, 1.0));
        assert_eq!((r.c0, r.c1), (1.0, 0.0));
        assert_eq!(r.e_br_m, 0.0);
    }

    #[test]
    fn energies_close() {
        for gt in [0.0, 0.3, 2.0, 20.0, 800.0] {
            let r = at(gt);
            assert_eq!(r.e_dk_ph + r.e_dk_m, 10.0);
            assert!((r.e_br_ph + r.e_br_m - 10.0).abs() < 1e-15);
        }
    }

    /// Independent route to the bright-port energy: build the bright-port
    /// amplitudes `(psi0 + beta)/sqrt2` and `psi1/sqrt2` from `c0, c1`.
    #[test]
    fn bright_energy_from_amplitudes() {
        for gt in [0.5, 3.0, 20.0] {
            let r = at(gt);
            let (b0, b1) = ((r.c0 + 1.0) / 2.0, r.c1 / 2.0);
            let p1 = b1 * b1 / (b0 * b0 + b1 * b1);
            assert!((r.e_br_m - 2.0 * p1).abs() < 1e-14);
            assert!((b0 * b0 + b1 * b1 - r.p_br).abs() < 1e-14);
        }
        // frozen value at Gamma tau = 2
        assert!((at(2.0).e_br_m - 0.068_058_251_089_946_28).abs() < 1e-15);
    }

    #[test]
    fn endpoint_values() {
        let w = analytic_weak_values(1.0, 20.0, 20.0, 10.0, 2.0).unwrap();
        let v = |o| w.get(o).unwrap().printed;
        assert!((v(Observable::ProjectorJoint(Arm::I, Motional::Ground)) + 0.5).abs() < 1e-4);
        assert!((v(Observable::ProjectorJoint(Arm::I, Motional::Excited)) - 0.5).abs() < 1e-4);
        assert!((v(Observable::HphRestricted(Arm::I)) + 1.0).abs() < 1e-3);
        assert!((v(Observable::Hm) - 1.0).abs() < 1e-3);
        for t in [0.0, 7.0, 20.0] {
            let w = analytic_weak_values(1.0, 20.0, t, 10.0, 2.0).unwrap();
            assert_eq!(
                w.get(Observable::ProjectorJoint(Arm::I, Motional::Out))
                    .unwrap()
                    .printed,
                0.0
            );
            assert_eq!(
                w.get(Observable::ProjectorJoint(Arm::II, Motional::Out))
                    .unwrap()
                    .printed,
                0.0
            );
        }
    }

    #[test]
    fn printed_rank2_rule_holds_but_bases_disagree() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let tau = rng.gen_range(0.1..40.0);
            let t = rng.gen_range(0.0..tau);
            let w = analytic_weak_values(1.0, tau, t, 10.0, 2.0).unwrap();
            assert!(w.residuals.rank2_completeness.abs() < 1e-13);
            let c = w.consistent_residuals;
            for r in [
                c.arm_i_basis,
                c.arm_ii_basis,
                c.energy_basis_completeness,
                c.rank2_completeness,
            ] {
                assert!(r.abs() < 1e-12 * (1.0 + 1.0 / tau), "{c:?}");
            }
        }
        // the published energy and in/out bases differ by 1/(e^5 - 1) - 1/(e^10 - 1)
        let w = analytic_weak_values(1.0, 10.0, 3.0, 10.0, 2.0).unwrap();
        let expected = -1.0 / (5.0f64.exp() - 1.0) + 1.0 / (10.0f64.exp() - 1.0);
        assert!((w.residuals.arm_i_basis - expected).abs() < 1e-15);
    }

    #[test]
    fn antisymmetry_up_to_finite_rate_correction() {
        for gt in [4.0, 10.0, 20.0] {
            for k in 0..=10 {
                let w = analytic_weak_values(1.0, gt, gt * k as f64 / 10.0, 10.0, 2.0).unwrap();
                let e = (-gt / 2.0).exp();
                assert!(w.residuals.antisymmetry.abs() <= 2.0 * e / (1.0 - e) + 1e-15);
            }
        }
    }

    #[test]
    fn huge_rate_uses_limits() {
        let w = analytic_weak_values(1.0, 2000.0, 1000.0, 10.0, 2.0).unwrap();
        for e in &w.entries {
            assert!(e.printed.is_finite() && e.consistent.is_finite(), "{e:?}");
        }
        assert_eq!(
            w.get(Observable::ProjectorArm(Arm::II)).unwrap().printed,
            1.0
        );
    }

    #[test]
    fn no_post_selection_without_bomb() {
        assert!(matches!(
            analytic_weak_values(0.0, 20.0, 1.0, 10.0, 2.0),
            Err(Error::VanishingPostSelection { .. })
        ));
        assert!(analytic_weak_values(1.0, 20.0, 21.0, 10.0, 2.0).is_err());
    }
}
