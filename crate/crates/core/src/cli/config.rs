use crate::bouncer::BouncerConfig;
use crate::dynamics::MicroReservoirSpec;
use crate::engine::{BrightPolicy, EngineConfig};
use crate::error::{Error, Result};
use crate::output::{validate_precision, Format, DEFAULT_PRECISION};
use crate::statespace::{Observable, Params};
use crate::weakvalues::{
    PostSelection, WeakValueOptions, DEFAULT_ANOMALY_EPSILON, DEFAULT_FLOOR, DEFAULT_TIMES,
};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Environment variable naming a config file used when `--config` is absent.
pub const CONFIG_ENV: &str = "IFM_SIM_DEFAULT_CONFIG";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BouncerSettings {
    pub mass: f64,
    pub gravity: f64,
    /// Grid extent in units of `z0`.
    pub z_max_over_z0: f64,
    pub n_points: usize,
    pub n_levels: usize,
}

impl Default for BouncerSettings {
    fn default() -> Self {
        Self {
            mass: 0.5,
            gravity: 2.0,
            z_max_over_z0: 12.0,
            n_points: 4096,
            n_levels: 2,
        }
    }
}

impl BouncerSettings {
    pub fn build(&self) -> Result<BouncerConfig> {
        BouncerConfig::new(
            self.mass,
            self.gravity,
            self.z_max_over_z0,
            self.n_points,
            self.n_levels,
        )
    }
}

/// Microscopic oracle setup. It has its own physical parameters because the
/// shared reservoir needs a large motional gap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MicroSettings {
    pub params: Params,
    pub n_reservoir_modes: usize,
    /// Reservoir half-width in units of `gamma`.
    pub half_band: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub check_interval: Option<f64>,
    pub n_samples: usize,
    /// Largest accepted Kraus-versus-full state deviation.
    pub max_deviation: f64,
    /// Largest accepted relative error of the fitted rate.
    pub max_rate_error: f64,
}

impl Default for MicroSettings {
    fn default() -> Self {
        Self {
            params: MicroReservoirSpec::oracle_params(),
            n_reservoir_modes: 1000,
            half_band: 500.0,
            dt: None,
            check_interval: None,
            n_samples: 51,
            max_deviation: 5e-2,
            max_rate_error: 0.1,
        }
    }
}

impl MicroSettings {
    pub fn build(&self) -> Result<MicroReservoirSpec> {
        let p = &self.params;
        let mut spec =
            MicroReservoirSpec::calibrated(p, self.n_reservoir_modes, self.half_band * p.gamma)?;
        if let Some(dt) = self.dt {
            spec.dt = dt;
        }
        if let Some(c) = self.check_interval {
            spec.check_interval = c;
        }
        spec.n_samples = self.n_samples;
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeakValueSettings {
    pub n_times: usize,
    pub post_selection: PostSelection,
    pub floor: f64,
    pub anomaly_epsilon: f64,
    /// Observable ids such as `Pi_I_0` or `H_ph_Pi_II`.
    pub observables: Vec<String>,
}

impl Default for WeakValueSettings {
    fn default() -> Self {
        Self {
            n_times: DEFAULT_TIMES,
            post_selection: PostSelection::default(),
            floor: DEFAULT_FLOOR,
            anomaly_epsilon: DEFAULT_ANOMALY_EPSILON,
            observables: Observable::default_set()
                .iter()
                .map(|o| o.to_string())
                .collect(),
        }
    }
}

impl WeakValueSettings {
    pub fn options(&self) -> WeakValueOptions {
        WeakValueOptions {
            post_selection: self.post_selection,
            floor: self.floor,
            anomaly_epsilon: self.anomaly_epsilon,
        }
    }

    pub fn observables(&self) -> Result<Vec<Observable>> {
        self.observables.iter().map(|s| s.parse()).collect()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineMode {
    #[default]
    Expectation,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineSettings {
    pub mode: EngineMode,
    pub cycles: u64,
    pub bright_policy: BrightPolicy,
    pub raise_epsilon: f64,
}

impl Default for EngineSettings {
    fn default() -> Self {
        let e = EngineConfig::default();
        Self {
            mode: EngineMode::default(),
            cycles: 1_000_000,
            bright_policy: e.bright_policy,
            raise_epsilon: e.raise_epsilon,
        }
    }
}

impl EngineSettings {
    pub fn config(&self) -> EngineConfig {
        EngineConfig {
            bright_policy: self.bright_policy,
            raise_epsilon: self.raise_epsilon,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSettings {
    /// Output file; standard output when absent. A directory for `sweep`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    pub format: Format,
    /// Significant digits, 6 to 17.
    pub precision: usize,
}

impl Default for OutputSettings {
    fn default() -> Self {
        Self {
            path: None,
            format: Format::Csv,
            precision: DEFAULT_PRECISION,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSettings {
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    pub jobs: usize,
}

/// Everything a run needs, layered from defaults, a config file, `--set`
/// overrides and dedicated flags, in that order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub params: Params,
    pub bouncer: BouncerSettings,
    pub micro: MicroSettings,
    pub weak_values: WeakValueSettings,
    pub engine: EngineSettings,
    pub output: OutputSettings,
    pub run: RunSettings,
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Parses the right-hand side of `--set`: any TOML value, or a bare string.
fn parse_value(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

/// Applies `section.key=value` to a TOML document.
pub fn apply_override(doc: &mut toml::Table, assignment: &str) -> Result<()> {
    let (path, raw) = assignment.split_once('=').ok_or_else(|| {
        Error::Config(format!(
            "override '{assignment}' is not of the form key=value"
        ))
    })?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(Error::Config(format!("malformed key '{path}'")));
    }
    let mut table = doc;
    for k in &keys[..keys.len() - 1] {
        let entry = table
            .entry(k.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("'{k}' in '{path}' is not a section")))?;
    }
    table.insert(keys[keys.len() - 1].to_string(), parse_value(raw.trim()));
    Ok(())
}

impl RunConfig {
    /// Builds the configuration from an optional file and overrides.
    pub fn load(file: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let defaults = toml::Table::try_from(RunConfig::default())
            .map_err(|e| Error::Config(e.to_string()))?;
        let mut doc = toml::Table::new();
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            let parsed: toml::Table = toml::from_str(&text)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            merge(&mut doc, parsed);
        }
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        // nested sections start from their own defaults, not the type's
        let mut full = defaults;
        merge(&mut full, doc);
        let cfg: RunConfig = toml::Value::Table(full)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        validate_precision(self.output.precision)?;
        self.params.validate()?;
        self.micro.params.validate()?;
        self.weak_values.observables()?;
        if self.weak_values.n_times < 2 {
            return Err(Error::Config(
                "weak_values.n_times must be at least 2".into(),
            ));
        }
        Ok(())
    }

    /// The config as TOML, as recorded next to sweep outputs.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = RunConfig::default();
        let back: RunConfig = toml::from_str(&c.to_toml().unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn layering() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(
            &path,
            "[params]\ngamma = 2\ntau = 5.0\n\n[output]\nprecision = 8\n",
        )
        .unwrap();
        let c = RunConfig::load(
            Some(&path),
            &["params.tau=7".into(), "micro.params.omega_m=50".into()],
        )
        .unwrap();
        assert_eq!(c.params.gamma, 2.0);
        assert_eq!(c.params.tau, 7.0);
        assert_eq!(c.params.omega_m, 2.0);
        assert_eq!(c.micro.params.omega_m, 50.0);
        assert_eq!(c.micro.params.omega_ph, 1000.0);
        assert_eq!(c.output.precision, 8);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            RunConfig::load(None, &["params.nope=1".into()]),
            Err(Error::Config(_))
        ));
        assert!(RunConfig::load(None, &["params.gamma".into()]).is_err());
        assert!(RunConfig::load(None, &["output.precision=30".into()]).is_err());
        assert!(RunConfig::load(None, &["params.gamma=-1".into()]).is_err());
        assert!(RunConfig::load(Some(Path::new("/nonexistent/x.toml")), &[]).is_err());
        assert!(RunConfig::load(None, &["weak_values.observables=[\"Pi_X\"]".into()]).is_err());
    }

    #[test]
    fn string_and_enum_overrides() {
        let c = RunConfig::load(
            None,
            &[
                "engine.bright_policy=optimistic".into(),
                "output.format=json".into(),
            ],
        )
        .unwrap();
        assert_eq!(c.engine.bright_policy, BrightPolicy::Optimistic);
        assert_eq!(c.output.format, Format::Json);
    }
}
