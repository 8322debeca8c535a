use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use ldpid_core::sim::{SimConfig, StepInput};

use crate::config::{
    read_controller, read_integral_spec, read_tuning_spec, usage, KeyValues, Overrides,
    PlantConfig, UsageError,
};
use crate::job::{Job, RunManifest};
use crate::output::BodeRange;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERICAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Long-memory discrete-time PID design workbench.
#[derive(Debug, Parser)]
#[command(name = "ldpid", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Writes the coefficient series f_k(order), k = 0..M, as `k,f_k`.
    Coeffs {
        #[arg(long, allow_hyphen_values = true)]
        order: f64,
        #[arg(long = "M")]
        m: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Loop, sensitivity and complementary sensitivity over a log grid.
    Bode {
        #[command(flatten)]
        configs: LoopFiles,
        #[arg(long, default_value_t = 1e-4)]
        omega_min: f64,
        #[arg(long, default_value_t = 1e2)]
        omega_max: f64,
        #[arg(long, default_value_t = 200)]
        points_per_decade: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Closed-loop step response with an optional load disturbance.
    Simulate {
        #[command(flatten)]
        configs: LoopFiles,
        #[arg(long)]
        duration: f64,
        #[arg(long)]
        substeps: Option<usize>,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        reference: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        disturbance: f64,
        #[arg(long, default_value_t = 0.0)]
        disturbance_at: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Frequency-domain tuning against crossover, margin and sensitivity targets.
    TuneFreq(TuneArgs),
    /// Minimizes IAE or ISE of a simulated scenario.
    TuneIntegral(TuneArgs),
    /// Runs one of the five scripted examples.
    Example {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=5))]
        number: u8,
        #[arg(long)]
        out: PathBuf,
    },
    /// Repeats the run recorded in a manifest.
    Rerun {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct LoopFiles {
    #[arg(long)]
    plant: PathBuf,
    #[arg(long)]
    controller: PathBuf,
    /// Overrides the controller's sampling period.
    #[arg(long = "T")]
    period: Option<f64>,
    /// Overrides the controller's memory length.
    #[arg(long = "M")]
    m: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    #[arg(long)]
    plant: PathBuf,
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long = "T")]
    period: Option<f64>,
    #[arg(long = "M")]
    m: Option<usize>,
    #[arg(long)]
    substeps: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

fn plant(path: &Path) -> Result<PlantConfig, UsageError> {
    PlantConfig::read(&KeyValues::load(path)?)
}

impl LoopFiles {
    fn overrides(&self) -> Overrides {
        Overrides {
            period: self.period,
            m: self.m,
            ..Overrides::default()
        }
    }
}

impl TuneArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            budget: self.budget,
            period: self.period,
            m: self.m,
            substeps: self.substeps,
        }
    }
}

/// Turns parsed arguments into a job and its output directory.
pub fn resolve(command: Command) -> Result<(Job, PathBuf), UsageError> {
    Ok(match command {
        Command::Coeffs { order, m, out } => (Job::Coeffs { order, m }, out),
        Command::Bode {
            configs,
            omega_min,
            omega_max,
            points_per_decade,
            out,
        } => {
            let job = Job::Bode {
                plant: plant(&configs.plant)?,
                controller: read_controller(
                    &KeyValues::load(&configs.controller)?,
                    &configs.overrides(),
                )?,
                range: BodeRange {
                    omega_min,
                    omega_max,
                    points_per_decade,
                },
            };
            (job, out)
        }
        Command::Simulate {
            configs,
            duration,
            substeps,
            reference,
            disturbance,
            disturbance_at,
            out,
        } => {
            let controller =
                read_controller(&KeyValues::load(&configs.controller)?, &configs.overrides())?;
            let period = controller
                .build()
                .ok()
                .and_then(|c| c.period())
                .ok_or_else(|| usage("a continuous controller cannot be simulated; give omega_c, M and T to sample it"))?;
            let scenario = SimConfig {
                period,
                substeps: substeps.unwrap_or(10),
                duration,
                reference: StepInput {
                    amplitude: reference,
                    start: 0.0,
                },
                disturbance: StepInput {
                    amplitude: disturbance,
                    start: disturbance_at,
                },
            };
            scenario
                .validate()
                .map_err(|e| usage(format!("scenario: {e}")))?;
            let job = Job::Simulate {
                plant: plant(&configs.plant)?,
                controller,
                scenario,
            };
            (job, out)
        }
        Command::TuneFreq(a) => {
            let spec = read_tuning_spec(&KeyValues::load(&a.spec)?, &a.overrides())?;
            (
                Job::TuneFreq {
                    plant: plant(&a.plant)?,
                    spec,
                },
                a.out,
            )
        }
        Command::TuneIntegral(a) => {
            let spec = read_integral_spec(&KeyValues::load(&a.spec)?, &a.overrides())?;
            (
                Job::TuneIntegral {
                    plant: plant(&a.plant)?,
                    spec,
                },
                a.out,
            )
        }
        Command::Example { number, out } => (Job::Example { number }, out),
        Command::Rerun { manifest, out } => {
            let m = RunManifest::load(&manifest).map_err(|e| match e.downcast::<UsageError>() {
                Ok(u) => u,
                Err(e) => usage(e.to_string()),
            })?;
            (m.config, out)
        }
    })
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let (job, out) = match resolve(cli.command) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    match job.execute(&out) {
        Ok(outcome) => {
            for line in &outcome.summary {
                println!("{line}");
            }
            match outcome.numerical_failure {
                Some(msg) => {
                    eprintln!("error: {msg}");
                    EXIT_NUMERICAL
                }
                None => EXIT_OK,
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                EXIT_USAGE
            } else {
                EXIT_NUMERICAL
            }
        }
    }
}
