//! The measurement-driven engine cycle: launch one photon, read the ports,
//! and on a dark click rotate the bomb to its ground state and raise the
//! floor under it. Every cycle is booked in an energy ledger.

use crate::bouncer::{safe_raise_height, BouncerConfig};
use crate::dynamics::{detect_ports, evolve_no_explosion, PortOutcomes};
use crate::error::{Error, Result};
use crate::statespace::{initial_state, Params};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Cycles drawn from one generator stream.
const CHUNK: u64 = 65_536;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Dark,
    Bright,
    Explosion,
}

impl Outcome {
    pub const ALL: [Outcome; 3] = [Outcome::Dark, Outcome::Bright, Outcome::Explosion];

    pub fn name(self) -> &'static str {
        match self {
            Outcome::Dark => "dark",
            Outcome::Bright => "bright",
            Outcome::Explosion => "explosion",
        }
    }
}

/// Work booked for a bright click, whose bomb state is not `|in>`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BrightPolicy {
    /// No work: there is no fixed unitary that empties a mixed state.
    #[default]
    Zero,
    /// Book the full motional energy as work.
    Optimistic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    pub bright_policy: BrightPolicy,
    /// Tolerated `|in>` probability below a raised floor.
    pub raise_epsilon: f64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            bright_policy: BrightPolicy::Zero,
            raise_epsilon: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Mode {
    Expectation,
    Sampled { seed: u64, cycles: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CycleRecord {
    pub outcome: Outcome,
    /// Probability (expectation mode) or number of cycles (sampled mode)
    /// this record stands for.
    pub weight: f64,
    pub photon_energy_in: f64,
    pub photon_energy_out: f64,
    pub motional_gain: f64,
    /// Energy taken up by the bomb's reservoir on absorption.
    pub absorbed: f64,
    pub extractable_work: f64,
    pub platform_raise: f64,
    pub bomb_lost: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EngineLedger {
    /// Height bound for `platform_raise`.
    pub safe_raise: f64,
    pub records: Vec<CycleRecord>,
}

impl EngineLedger {
    pub fn total_weight(&self) -> f64 {
        self.records.iter().map(|r| r.weight).sum()
    }

    pub fn weight_of(&self, o: Outcome) -> f64 {
        self.records
            .iter()
            .filter(|r| r.outcome == o)
            .map(|r| r.weight)
            .sum()
    }
}

/// Record for each port that can fire, from the grid simulation at `p`.
fn outcome_records(
    p: &Params,
    cfg: &EngineConfig,
    outcomes: &PortOutcomes,
    raise: f64,
) -> Vec<(Outcome, f64, CycleRecord)> {
    let e_in = p.omega_ph;
    let mut out = Vec::new();
    if let Some(e) = outcomes.energies_dark {
        let rec = CycleRecord {
            outcome: Outcome::Dark,
            weight: 0.0,
            photon_energy_in: e_in,
            photon_energy_out: e.e_ph,
            motional_gain: e.e_m,
            absorbed: 0.0,
            extractable_work: e.e_m,
            platform_raise: raise,
            bomb_lost: false,
        };
        out.push((Outcome::Dark, outcomes.p_dark, rec));
    }
    if let Some(e) = outcomes.energies_bright {
        let work = match cfg.bright_policy {
            BrightPolicy::Zero => 0.0,
            BrightPolicy::Optimistic => e.e_m,
        };
        let rec = CycleRecord {
            outcome: Outcome::Bright,
            weight: 0.0,
            photon_energy_in: e_in,
            photon_energy_out: e.e_ph,
            motional_gain: e.e_m,
            absorbed: 0.0,
            extractable_work: work,
            platform_raise: 0.0,
            bomb_lost: false,
        };
        out.push((Outcome::Bright, outcomes.p_bright, rec));
    }
    if outcomes.p_explosion > 0.0 {
        let rec = CycleRecord {
            outcome: Outcome::Explosion,
            weight: 0.0,
            photon_energy_in: e_in,
            photon_energy_out: 0.0,
            motional_gain: 0.0,
            absorbed: e_in,
            extractable_work: 0.0,
            platform_raise: 0.0,
            bomb_lost: true,
        };
        out.push((Outcome::Explosion, outcomes.p_explosion, rec));
    }
    out
}

/// Per-outcome counts from `cycles` draws. Each block of [`CHUNK`] cycles
/// uses its own ChaCha stream of `seed`, so the result does not depend on
/// the thread count.
pub fn sample_outcomes(probabilities: [f64; 3], seed: u64, cycles: u64) -> [u64; 3] {
    let chunks = cycles.div_ceil(CHUNK);
    let (p_dark, p_bright) = (probabilities[0], probabilities[1]);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let n = CHUNK.min(cycles - c * CHUNK);
            let mut counts = [0u64; 3];
            for _ in 0..n {
                let u: f64 = rng.gen();
                let k = if u < p_dark {
                    0
                } else if u < p_dark + p_bright {
                    1
                } else {
                    2
                };
                counts[k] += 1;
            }
            counts
        })
        .reduce(|| [0; 3], |a, b| [a[0] + b[0], a[1] + b[1], a[2] + b[2]])
}

/// Runs the cycle at `p`. Expectation mode returns one record per outcome
/// weighted by its probability; sampled mode draws `cycles` outcomes and
/// returns one record per outcome weighted by its count. Outcomes that
/// cannot occur are omitted.
pub fn run_cycle(
    p: &Params,
    bouncer: &BouncerConfig,
    cfg: &EngineConfig,
    mode: Mode,
) -> Result<EngineLedger> {
    p.validate()?;
    let s = evolve_no_explosion(&initial_state(p, true)?, p, false)?.final_state;
    let outcomes = detect_ports(&s)?;
    let safe_raise = safe_raise_height(bouncer, cfg.raise_epsilon)?;
    let mut records: Vec<(Outcome, f64, CycleRecord)> =
        outcome_records(p, cfg, &outcomes, safe_raise);
    match mode {
        Mode::Expectation => {
            for (_, prob, rec) in records.iter_mut() {
                rec.weight = *prob;
            }
        }
        Mode::Sampled { seed, cycles } => {
            let counts = sample_outcomes(
                [outcomes.p_dark, outcomes.p_bright, outcomes.p_explosion],
                seed,
                cycles,
            );
            for (o, _, rec) in records.iter_mut() {
                let k = Outcome::ALL
                    .iter()
                    .position(|x| x == o)
                    .expect("known outcome");
                rec.weight = counts[k] as f64;
            }
            records.retain(|(_, _, r)| r.weight > 0.0);
        }
    }
    Ok(EngineLedger {
        safe_raise,
        records: records.into_iter().map(|(_, _, r)| r).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct YieldReport {
    pub work_per_photon: f64,
    /// Mean photon energy not returned by the photon.
    pub photon_energy_cost: f64,
    pub bombs_lost_per_photon: f64,
}

pub fn expected_yield(
    p: &Params,
    bouncer: &BouncerConfig,
    cfg: &EngineConfig,
) -> Result<YieldReport> {
    let ledger = run_cycle(p, bouncer, cfg, Mode::Expectation)?;
    let sum = |f: &dyn Fn(&CycleRecord) -> f64| {
        ledger.records.iter().map(|r| r.weight * f(r)).sum::<f64>()
    };
    Ok(YieldReport {
        work_per_photon: sum(&|r| r.extractable_work),
        photon_energy_cost: sum(&|r| r.photon_energy_in - r.photon_energy_out),
        bombs_lost_per_photon: sum(&|r| if r.bomb_lost { 1.0 } else { 0.0 }),
    })
}

/// Energy-balance tolerance `omega_m (omega_m / Delta omega_ph + 10 delta_omega / omega_m)`,
/// with `delta_omega` the grid spacing.
pub fn audit_tolerance(p: &Params) -> Result<f64> {
    let grid = crate::statespace::build_grid(p)?;
    Ok(p.omega_m * (p.omega_m / p.delta_omega_ph + 10.0 * grid.spacing / p.omega_m))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    EnergyBalance,
    WorkExceedsGain,
    RaiseExceedsSafe,
    NegativeWeight,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Violation {
    pub record: usize,
    pub kind: ViolationKind,
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub tolerance: f64,
    pub violations: Vec<Violation>,
    /// `sum(w in) - sum(w (out + gain + absorbed))`, per unit weight.
    pub closure_residual: f64,
    pub passed: bool,
}

/// Checks every record's energy balance and work and height bounds, and
/// the weighted closure of the whole ledger.
pub fn audit(ledger: &EngineLedger, tolerance: f64) -> Result<AuditReport> {
    if ledger.records.is_empty() {
        return Err(Error::InvalidParameter(
            "cannot audit an empty ledger".into(),
        ));
    }
    let mut violations = Vec::new();
    let mut flag = |record, kind, excess: f64| {
        if excess > 0.0 {
            violations.push(Violation {
                record,
                kind,
                excess,
            });
        }
    };
    let mut balance = 0.0;
    for (i, r) in ledger.records.iter().enumerate() {
        let residual = r.photon_energy_in - r.photon_energy_out - r.motional_gain - r.absorbed;
        flag(i, ViolationKind::EnergyBalance, residual.abs() - tolerance);
        flag(
            i,
            ViolationKind::WorkExceedsGain,
            r.extractable_work - r.motional_gain - tolerance,
        );
        flag(
            i,
            ViolationKind::RaiseExceedsSafe,
            r.platform_raise - ledger.safe_raise,
        );
        flag(i, ViolationKind::NegativeWeight, -r.weight);
        balance += r.weight * residual;
    }
    let total = ledger.total_weight();
    let closure_residual = if total > 0.0 { balance / total } else { 0.0 };
    if closure_residual.abs() > tolerance {
        violations.push(Violation {
            record: ledger.records.len(),
            kind: ViolationKind::EnergyBalance,
            excess: closure_residual.abs() - tolerance,
        });
    }
    let passed = violations.is_empty();
    Ok(AuditReport {
        tolerance,
        violations,
        closure_residual,
        passed,
    })
}
