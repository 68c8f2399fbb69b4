//! Command-line front end: configuration layering, subcommand dispatch and
//! file emission.

mod commands;
mod config;
mod sweep;

pub use commands::Emission;
pub use config::{
    apply_override, BouncerSettings, EngineMode, EngineSettings, MicroSettings, OutputSettings,
    RunConfig, RunSettings, WeakValueSettings, CONFIG_ENV,
};

use crate::error::{Error, Result};
use crate::output::{write_csv, write_json, Format};
use clap::{Parser, Subcommand, ValueEnum};
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Expectation,
    Sampled,
}

/// Interaction-free measurement engine simulator.
///
/// Settings come from built-in defaults, then the file given by --config
/// (or $IFM_SIM_DEFAULT_CONFIG), then each --set, then the dedicated flags.
/// Config files use TOML sections [params] [bouncer] [micro] [weak_values]
/// [engine] [output] [run].
#[derive(Debug, Parser)]
#[command(name = "ifm-sim", version)]
struct Cli {
    /// Config file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override one setting, e.g. --set params.tau=20. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output file (a directory for `sweep`); standard output if absent.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    /// Seed for sampled runs.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Clone, Subcommand)]
enum Command {
    #[command(flatten)]
    Run(Target),
    /// Cartesian sweep of another subcommand; one output file per point
    /// plus index.csv in the --out directory.
    #[command(
        after_help = "Example: ifm-sim --out runs sweep --vary params.tau=5,10,20 interfere\n\
        index.csv columns: point,<varied keys>,file,status"
    )]
    Sweep {
        /// KEY=V1,V2,... Repeatable; the first key varies slowest.
        #[arg(long = "vary", value_name = "KEY=VALUES", required = true)]
        vary: Vec<String>,
        #[command(subcommand)]
        target: Target,
    },
}

#[derive(Debug, Clone, Subcommand)]
enum Target {
    /// Bouncer levels (Airy zeros and energies) or wavefunctions.
    #[command(after_help = "Columns: level,airy_zero,energy\n\
        With --wavefunctions: z_over_z0,psi_0,psi_1,...")]
    Eigenstates {
        /// Emit the sampled wavefunctions instead of the level table.
        #[arg(long)]
        wavefunctions: bool,
    },
    /// Best Gaussian approximation of the |in> state and safe raise heights.
    #[command(
        after_help = "Columns: mean_over_z0,sigma_over_z0,overlap_probability,amplitude_std,density_std"
    )]
    Fit {
        /// Tolerated |in> probability below the raised floor. Repeatable.
        #[arg(long = "epsilon", default_values_t = [1e-4, 1e-3, 1e-2])]
        epsilon: Vec<f64>,
    },
    /// Photon through the bomb alone: survival and energies over time.
    #[command(after_help = "Columns: t_Gamma,survival,e_ph,e_m,p_arm_i,p_arm_ii")]
    Evolve,
    /// Full interferometer: port probabilities and conditioned energies.
    #[command(
        after_help = "Columns: port,probability,closed_form,e_ph,e_m,closed_form_e_ph,closed_form_e_m"
    )]
    Interfere,
    /// Weak values for the dark-port ensemble over the interaction.
    #[command(after_help = "Columns: t_Gamma,observable_id,re,im,anomalous_flag\n\
        Rows are grouped by observable, then time. Energies are in units of hbar Gamma.")]
    WeakValues {
        /// Number of sample times (overrides weak_values.n_times).
        #[arg(long)]
        times: Option<usize>,
    },
    /// Backward evolution of the dark-port state.
    #[command(after_help = "Columns: t_Gamma,c0,c1,d0,d1")]
    Backward,
    /// Microscopic reservoir check of the conditional dynamics. Exit 2 on
    /// tolerance failure.
    #[command(
        after_help = "Columns: fitted_rate,rate_error,convention_factor,max_state_deviation,\
        survival_full,survival_kraus,n_steps,max_norm_drift"
    )]
    Oracle,
    /// Engine cycle ledger with energy audit.
    #[command(
        after_help = "Columns: outcome,weight,photon_energy_in,photon_energy_out,motional_gain,\
        absorbed,extractable_work,platform_raise,bomb_lost"
    )]
    Engine {
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Number of sampled cycles.
        #[arg(long)]
        cycles: Option<u64>,
    },
    /// Closed forms against the grid simulation. Exit 2 on tolerance failure.
    #[command(
        after_help = "Columns: quantity,analytic,numeric,abs_dev,rel_dev,tolerance,checked,pass"
    )]
    Compare,
}

/// Flag values layered on top of the config.
#[derive(Debug, Clone, Default)]
struct Flags {
    out: Option<PathBuf>,
    format: Option<Format>,
    seed: Option<u64>,
    jobs: Option<usize>,
}

impl Flags {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(o) = &self.out {
            cfg.output.path = Some(o.clone());
        }
        if let Some(f) = self.format {
            cfg.output.format = f;
        }
        if let Some(s) = self.seed {
            cfg.run.seed = s;
        }
        if let Some(j) = self.jobs {
            cfg.run.jobs = j;
        }
    }
}

/// Subcommand-specific flags that map onto config keys.
fn command_overrides(cmd: &Target, cfg: &mut RunConfig) {
    match cmd {
        Target::WeakValues { times: Some(n) } => cfg.weak_values.n_times = *n,
        Target::Engine { mode, cycles } => {
            if let Some(m) = mode {
                cfg.engine.mode = match m {
                    ModeArg::Expectation => EngineMode::Expectation,
                    ModeArg::Sampled => EngineMode::Sampled,
                };
            }
            if let Some(c) = cycles {
                cfg.engine.cycles = *c;
            }
        }
        _ => {}
    }
}

fn emit(cmd: &Target, cfg: &RunConfig) -> Result<Emission> {
    match cmd {
        Target::Eigenstates { wavefunctions } => commands::eigenstates(cfg, *wavefunctions),
        Target::Fit { epsilon } => commands::fit(cfg, epsilon),
        Target::Evolve => commands::evolve(cfg),
        Target::Interfere => commands::interfere(cfg),
        Target::WeakValues { .. } => commands::weak_values(cfg),
        Target::Backward => commands::backward(cfg),
        Target::Oracle => commands::oracle(cfg),
        Target::Engine { .. } => commands::engine(cfg),
        Target::Compare => commands::compare(cfg),
    }
}

fn write_emission<W: Write>(e: &Emission, cfg: &RunConfig, w: W) -> Result<()> {
    match cfg.output.format {
        Format::Csv => write_csv(&e.table, cfg.output.precision, w),
        Format::Json => write_json(&e.table, e.report.as_ref(), cfg.output.precision, w),
    }
}

fn write_to(e: &Emission, cfg: &RunConfig, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => {
            let file = std::fs::File::create(p).map_err(|err| {
                Error::Io(std::io::Error::new(
                    err.kind(),
                    format!("{}: {err}", p.display()),
                ))
            })?;
            let mut w = std::io::BufWriter::new(file);
            write_emission(e, cfg, &mut w)?;
            w.flush()?;
            Ok(())
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            write_emission(e, cfg, &mut w)?;
            w.flush()?;
            Ok(())
        }
    }
}

/// Exit status for a finished emission: 2 when a tolerance check failed.
fn status(e: &Emission) -> i32 {
    match &e.tolerance_failure {
        Some(msg) => {
            eprintln!("tolerance failure: {msg}");
            2
        }
        None => 0,
    }
}

fn execute(cli: Cli, cmd: Command) -> Result<i32> {
    let config_path = cli
        .config
        .or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
    let flags = Flags {
        out: cli.out,
        format: cli.format.map(|f| match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }),
        seed: cli.seed,
        jobs: cli.jobs,
    };
    let mut cfg = RunConfig::load(config_path.as_deref(), &cli.set)?;
    flags.apply(&mut cfg);
    if let Command::Run(target) = &cmd {
        command_overrides(target, &mut cfg);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.run.jobs)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| match &cmd {
        Command::Sweep { vary, target } => {
            let point = |overrides: &[String]| -> Result<(RunConfig, Emission)> {
                let mut all = cli.set.clone();
                all.extend_from_slice(overrides);
                let mut c = RunConfig::load(config_path.as_deref(), &all)?;
                flags.apply(&mut c);
                command_overrides(target, &mut c);
                let e = emit(target, &c)?;
                Ok((c, e))
            };
            sweep::run(&cfg, vary, point, |e, c, path| write_to(e, c, Some(path)))
        }
        Command::Run(target) => {
            let e = emit(target, &cfg)?;
            write_to(&e, &cfg, cfg.output.path.as_deref())?;
            Ok(status(&e))
        }
    })
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit status: 0 on success, 1 on usage or
/// validation errors, 2 on a numerical tolerance failure.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let mut cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    let Some(cmd) = cli.command.take() else {
        use clap::CommandFactory;
        let _ = Cli::command().print_help();
        return 1;
    };
    match execute(cli, cmd) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
