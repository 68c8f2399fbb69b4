use super::config::{EngineMode, RunConfig};
use crate::analytic::{analytic_weak_values, closed_forms};
use crate::bouncer::{bounce_eigenstate, fit_gaussian, safe_raise_height};
use crate::dynamics::{
    correction_delay, detect_ports, evolve_no_explosion, microscopic_oracle, phase_correction,
};
use crate::engine::{audit, audit_tolerance, expected_yield, run_cycle, Mode, Outcome};
use crate::error::Result;
use crate::output::{Cell, Table};
use crate::statespace::initial_state;
use crate::weakvalues::{
    backward_propagate, detect_anomalies, weak_value_series_with, TwoStateVector,
};
use serde_json::json;

/// What a subcommand produces: a table, an optional structured report,
/// and whether a numerical tolerance check failed.
#[derive(Debug, Clone)]
pub struct Emission {
    pub table: Table,
    pub report: Option<serde_json::Value>,
    pub tolerance_failure: Option<String>,
}

impl Emission {
    fn new(table: Table, report: serde_json::Value) -> Self {
        Self {
            table,
            report: Some(report),
            tolerance_failure: None,
        }
    }
}

pub fn eigenstates(cfg: &RunConfig, wavefunctions: bool) -> Result<Emission> {
    let b = cfg.bouncer.build()?;
    let levels = (0..b.n_levels)
        .map(|j| bounce_eigenstate(&b, j))
        .collect::<Result<Vec<_>>>()?;
    let report = json!({
        "z0": b.z0,
        "energy_unit": b.energy_unit(),
        "motional_gap": b.motional_gap(),
    });
    let table = if wavefunctions {
        let mut cols = vec!["z_over_z0".to_string()];
        cols.extend((0..levels.len()).map(|j| format!("psi_{j}")));
        let mut t = Table {
            columns: cols,
            rows: Vec::new(),
        };
        for (i, z) in b.z_grid.iter().enumerate() {
            let mut row: Vec<Cell> = vec![(z / b.z0).into()];
            row.extend(levels.iter().map(|l| Cell::from(l.wavefunction[i])));
            t.push(row);
        }
        t
    } else {
        let mut t = Table::new(&["level", "airy_zero", "energy"]);
        for l in &levels {
            t.push(vec![l.index.into(), l.zero.into(), l.energy.into()]);
        }
        t
    };
    Ok(Emission::new(table, report))
}

pub fn fit(cfg: &RunConfig, epsilons: &[f64]) -> Result<Emission> {
    let b = cfg.bouncer.build()?;
    let f = fit_gaussian(&b)?;
    let mut t = Table::new(&[
        "mean_over_z0",
        "sigma_over_z0",
        "overlap_probability",
        "amplitude_std",
        "density_std",
    ]);
    t.push(vec![
        (f.mean / b.z0).into(),
        (f.sigma / b.z0).into(),
        f.overlap_probability.into(),
        f.amplitude_std(b.z0).into(),
        f.density_std(b.z0).into(),
    ]);
    let raises = epsilons
        .iter()
        .map(|&e| Ok(json!({"epsilon": e, "safe_raise": safe_raise_height(&b, e)?})))
        .collect::<Result<Vec<_>>>()?;
    Ok(Emission::new(
        t,
        json!({ "z0": b.z0, "safe_raise": raises }),
    ))
}

pub fn evolve(cfg: &RunConfig) -> Result<Emission> {
    let p = &cfg.params;
    p.warn_regime();
    let r = evolve_no_explosion(&initial_state(p, false)?, p, true)?;
    let mut t = Table::new(&["t_Gamma", "survival", "e_ph", "e_m", "p_arm_i", "p_arm_ii"]);
    for pt in r.trajectory.as_deref().unwrap_or_default() {
        t.push(vec![
            (pt.t * p.gamma).into(),
            pt.survival.into(),
            pt.e_ph.into(),
            pt.e_m.into(),
            pt.p_arm_i.into(),
            pt.p_arm_ii.into(),
        ]);
    }
    let a = closed_forms(p.gamma, p.tau, p.omega_ph, p.omega_m)?;
    let report = json!({
        "survival_probability": r.survival_probability,
        "closed_form": a.p_ne_single,
        "explosion_probability": r.final_state.explosion_weight,
    });
    Ok(Emission::new(t, report))
}

pub fn interfere(cfg: &RunConfig) -> Result<Emission> {
    let p = &cfg.params;
    p.warn_regime();
    let s = evolve_no_explosion(&initial_state(p, true)?, p, false)?.final_state;
    let o = detect_ports(&s)?;
    let a = closed_forms(p.gamma, p.tau, p.omega_ph, p.omega_m)?;
    let mut t = Table::new(&[
        "port",
        "probability",
        "closed_form",
        "e_ph",
        "e_m",
        "closed_form_e_ph",
        "closed_form_e_m",
    ]);
    let d = o.energies_dark;
    let b = o.energies_bright;
    t.push(vec![
        "dark".into(),
        o.p_dark.into(),
        a.p_dk.into(),
        d.map(|e| e.e_ph).into(),
        d.map(|e| e.e_m).into(),
        a.e_dk_ph.into(),
        a.e_dk_m.into(),
    ]);
    t.push(vec![
        "bright".into(),
        o.p_bright.into(),
        a.p_br.into(),
        b.map(|e| e.e_ph).into(),
        b.map(|e| e.e_m).into(),
        a.e_br_ph.into(),
        a.e_br_m.into(),
    ]);
    t.push(vec![
        "explosion".into(),
        o.p_explosion.into(),
        a.p_expl.into(),
        Cell::Empty,
        Cell::Empty,
        Cell::Empty,
        Cell::Empty,
    ]);
    let corrected = detect_ports(&phase_correction(&s, p))?;
    let report = json!({
        "correction_delay": correction_delay(p),
        "dark_in_fidelity": corrected.dark_in_fidelity(),
    });
    Ok(Emission::new(t, report))
}

pub fn weak_values(cfg: &RunConfig) -> Result<Emission> {
    let p = &cfg.params;
    p.warn_regime();
    let w = &cfg.weak_values;
    let series = weak_value_series_with(&w.observables()?, p, w.n_times, &w.options())?;
    let mut t = Table::new(&["t_Gamma", "observable_id", "re", "im", "anomalous_flag"]);
    for (k, o) in series.observables.iter().enumerate() {
        for (i, &time) in series.times.iter().enumerate() {
            let v = series.values[k][i];
            t.push(vec![
                (time * p.gamma).into(),
                o.to_string().into(),
                v.re.into(),
                v.im.into(),
                series.anomalous[k][i].into(),
            ]);
        }
    }
    let anomalies: Vec<_> = detect_anomalies(&series)
        .iter()
        .map(|a| {
            json!({
                "observable": a.observable.to_string(),
                "t_Gamma_start": a.t_start * p.gamma,
                "t_Gamma_end": a.t_end * p.gamma,
                "extremal": a.extremal,
            })
        })
        .collect();
    Ok(Emission::new(t, json!({ "anomalies": anomalies })))
}

pub fn backward(cfg: &RunConfig) -> Result<Emission> {
    let p = &cfg.params;
    let b = backward_propagate(p)?;
    let mut t = Table::new(&["t_Gamma", "c0", "c1", "d0", "d1"]);
    for (time, c) in b.times.iter().zip(&b.coefficients) {
        t.push(vec![
            (time * p.gamma).into(),
            c[0].re.into(),
            c[1].re.into(),
            c[2].re.into(),
            c[3].re.into(),
        ]);
    }
    let report = json!({
        "norm": b.norm,
        "normalized_final": b.normalized_final.iter().map(|c| c.re).collect::<Vec<_>>(),
        "arm_i_max_amplitude": b.arm_i_max_amplitude,
        "arm_i_norm": b.arm_i_norm,
        "bound": b.bound,
        "within_bound": b.within_bound,
    });
    Ok(Emission::new(t, report))
}

pub fn oracle(cfg: &RunConfig) -> Result<Emission> {
    let m = &cfg.micro;
    let spec = m.build()?;
    let r = microscopic_oracle(&m.params, &spec)?;
    let rate_error = (r.fitted_rate / m.params.gamma - 1.0).abs();
    let mut t = Table::new(&[
        "fitted_rate",
        "rate_error",
        "convention_factor",
        "max_state_deviation",
        "survival_full",
        "survival_kraus",
        "n_steps",
        "max_norm_drift",
    ]);
    t.push(vec![
        r.fitted_rate.into(),
        rate_error.into(),
        r.convention_factor.into(),
        r.max_state_deviation.into(),
        r.survival_full.into(),
        r.survival_kraus.into(),
        r.n_steps.into(),
        r.max_norm_drift.into(),
    ]);
    let mut failures = Vec::new();
    if r.max_state_deviation > m.max_deviation {
        failures.push(format!(
            "state deviation {:.3e} > {:.3e}",
            r.max_state_deviation, m.max_deviation
        ));
    }
    if rate_error > m.max_rate_error {
        failures.push(format!(
            "rate error {rate_error:.3e} > {:.3e}",
            m.max_rate_error
        ));
    }
    let report = json!({ "spec": spec, "params": m.params });
    Ok(Emission {
        table: t,
        report: Some(report),
        tolerance_failure: (!failures.is_empty()).then(|| failures.join("; ")),
    })
}

pub fn engine(cfg: &RunConfig) -> Result<Emission> {
    let p = &cfg.params;
    let e = &cfg.engine;
    let bouncer = cfg.bouncer.build()?;
    let mode = match e.mode {
        EngineMode::Expectation => Mode::Expectation,
        EngineMode::Sampled => Mode::Sampled {
            seed: cfg.run.seed,
            cycles: e.cycles,
        },
    };
    let ledger = run_cycle(p, &bouncer, &e.config(), mode)?;
    let mut t = Table::new(&[
        "outcome",
        "weight",
        "photon_energy_in",
        "photon_energy_out",
        "motional_gain",
        "absorbed",
        "extractable_work",
        "platform_raise",
        "bomb_lost",
    ]);
    for r in &ledger.records {
        t.push(vec![
            r.outcome.name().into(),
            r.weight.into(),
            r.photon_energy_in.into(),
            r.photon_energy_out.into(),
            r.motional_gain.into(),
            r.absorbed.into(),
            r.extractable_work.into(),
            r.platform_raise.into(),
            r.bomb_lost.into(),
        ]);
    }
    let audit = audit(&ledger, audit_tolerance(p)?)?;
    let yields = expected_yield(p, &bouncer, &e.config())?;
    let mut report = json!({ "audit": audit, "yield": yields, "safe_raise": ledger.safe_raise });
    if let Mode::Sampled { seed, cycles } = mode {
        let a = closed_forms(p.gamma, p.tau, p.omega_ph, p.omega_m)?;
        let probs = [a.p_dk, a.p_br, a.p_expl];
        let n = cycles as f64;
        let z: serde_json::Map<_, _> = Outcome::ALL
            .iter()
            .zip(probs)
            .map(|(o, q)| {
                let sigma = (n * q * (1.0 - q)).sqrt();
                let dev = ledger.weight_of(*o) - n * q;
                (
                    o.name().to_string(),
                    json!(if sigma > 0.0 { dev / sigma } else { dev }),
                )
            })
            .collect();
        report["seed"] = json!(seed);
        report["cycles"] = json!(cycles);
        report["z_scores"] = serde_json::Value::Object(z);
    }
    Ok(Emission::new(t, report))
}

struct Row {
    quantity: String,
    analytic: f64,
    numeric: f64,
    tolerance: f64,
    checked: bool,
}

/// Closed forms against the grid simulation. Weak values are checked
/// against the self-consistent closed forms; the published forms are
/// listed for reference only.
pub fn compare(cfg: &RunConfig) -> Result<Emission> {
    let p = &cfg.params;
    p.warn_regime();
    let a = closed_forms(p.gamma, p.tau, p.omega_ph, p.omega_m)?;
    let single = evolve_no_explosion(&initial_state(p, false)?, p, false)?;
    let s = evolve_no_explosion(&initial_state(p, true)?, p, false)?.final_state;
    let o = detect_ports(&s)?;
    let e_tol = audit_tolerance(p)?;
    let mut rows = Vec::new();
    let mut add = |q: &str, analytic: f64, numeric: Option<f64>, tolerance: f64, checked: bool| {
        if let Some(numeric) = numeric {
            rows.push(Row {
                quantity: q.to_string(),
                analytic,
                numeric,
                tolerance,
                checked,
            });
        }
    };
    add(
        "p_ne_single",
        a.p_ne_single,
        Some(single.survival_probability),
        1e-9,
        true,
    );
    add("p_dk", a.p_dk, Some(o.p_dark), 1e-6, true);
    add("p_br", a.p_br, Some(o.p_bright), 1e-6, true);
    add("p_expl", a.p_expl, Some(o.p_explosion), 1e-6, true);
    add(
        "E_dk_ph",
        a.e_dk_ph,
        o.energies_dark.map(|e| e.e_ph),
        e_tol,
        true,
    );
    add(
        "E_dk_m",
        a.e_dk_m,
        o.energies_dark.map(|e| e.e_m),
        e_tol,
        true,
    );
    add(
        "E_br_ph",
        a.e_br_ph,
        o.energies_bright.map(|e| e.e_ph),
        e_tol,
        true,
    );
    add(
        "E_br_m",
        a.e_br_m,
        o.energies_bright.map(|e| e.e_m),
        e_tol,
        true,
    );
    if p.gamma_tau() > 0.0 {
        let tsv = TwoStateVector::new(p, &cfg.weak_values.options())?;
        let wv_tol = p.omega_m / p.delta_omega_ph;
        for t in [0.5 * p.tau, p.tau] {
            let closed = analytic_weak_values(p.gamma, p.tau, t, p.omega_ph, p.omega_m)?;
            let (bra, ket) = tsv.states_at(t)?;
            for entry in &closed.entries {
                let numeric = tsv.ratio(entry.observable, &bra, &ket).re;
                let scale = if entry.observable.is_projector() {
                    1.0
                } else {
                    p.omega_ph
                };
                let label = |kind: &str| {
                    format!("wv[{}](t_Gamma={}) {kind}", entry.observable, t * p.gamma)
                };
                add(
                    &label("consistent"),
                    entry.consistent,
                    Some(numeric),
                    wv_tol * scale,
                    true,
                );
                add(
                    &label("printed"),
                    entry.printed,
                    Some(numeric),
                    wv_tol * scale,
                    false,
                );
            }
        }
    }
    let mut table = Table::new(&[
        "quantity",
        "analytic",
        "numeric",
        "abs_dev",
        "rel_dev",
        "tolerance",
        "checked",
        "pass",
    ]);
    let mut failures = Vec::new();
    for r in &rows {
        let abs = (r.numeric - r.analytic).abs();
        let rel = if r.analytic != 0.0 {
            abs / r.analytic.abs()
        } else {
            abs
        };
        let pass = abs <= r.tolerance;
        if r.checked && !pass {
            failures.push(r.quantity.clone());
        }
        table.push(vec![
            r.quantity.clone().into(),
            r.analytic.into(),
            r.numeric.into(),
            abs.into(),
            rel.into(),
            r.tolerance.into(),
            r.checked.into(),
            pass.into(),
        ]);
    }
    let report =
        json!({ "checked": rows.iter().filter(|r| r.checked).count(), "failed": failures });
    Ok(Emission {
        table,
        report: Some(report),
        tolerance_failure: (!failures.is_empty())
            .then(|| format!("outside tolerance: {}", failures.join(", "))),
    })
}
