//! Fully resolved commands and the manifests that record them.
//!
//! A [`Job`] holds every value a command depends on, after config files and
//! flags have been merged, so running the same job twice writes the same
//! bytes.

use std::path::Path;

use anyhow::{bail, Context, Result};
use ldpid_core::fracseries::expand_fk;
use ldpid_core::ldpid::LdpidParams;
use ldpid_core::sim::{metrics, simulate, SimConfig};
use ldpid_core::tuning::{
    tune_frequency, tune_integral, IntegralSpec, TuningResult, TuningSpec, DIVERGED_PENALTY,
};
use serde::{Deserialize, Serialize};

use crate::config::{usage, PlantConfig};
use crate::controller::ControllerConfig;
use crate::output::{margin_summary, write_bode, write_csv, write_json, write_trace, BodeRange};
use crate::reproduce;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Job {
    Coeffs {
        order: f64,
        #[serde(rename = "M")]
        m: usize,
    },
    Bode {
        plant: PlantConfig,
        controller: ControllerConfig,
        range: BodeRange,
    },
    Simulate {
        plant: PlantConfig,
        controller: ControllerConfig,
        scenario: SimConfig,
    },
    TuneFreq {
        plant: PlantConfig,
        spec: TuningSpec,
    },
    TuneIntegral {
        plant: PlantConfig,
        spec: IntegralSpec,
    },
    Example {
        number: u8,
    },
}

/// What a job produced.
#[derive(Debug, Default)]
pub struct Outcome {
    /// File names inside the output directory, manifest excluded.
    pub artifacts: Vec<String>,
    /// Lines for standard output.
    pub summary: Vec<String>,
    /// Set when the files were written but the numbers are unusable.
    pub numerical_failure: Option<String>,
}

impl Outcome {
    pub(crate) fn file(&mut self, dir: &Path, name: &str) -> std::path::PathBuf {
        self.artifacts.push(name.to_string());
        dir.join(name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: Option<u64>,
    pub config: Job,
    pub artifacts: Vec<String>,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| usage(format!("{}: not a run manifest: {e}", path.display())).into())
    }
}

impl Job {
    pub fn name(&self) -> &'static str {
        match self {
            Job::Coeffs { .. } => "coeffs",
            Job::Bode { .. } => "bode",
            Job::Simulate { .. } => "simulate",
            Job::TuneFreq { .. } => "tune-freq",
            Job::TuneIntegral { .. } => "tune-integral",
            Job::Example { .. } => "example",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Job::TuneFreq { spec, .. } => Some(spec.seed),
            Job::TuneIntegral { spec, .. } => Some(spec.seed),
            _ => None,
        }
    }

    /// Runs the job into `dir` and writes its manifest there.
    pub fn execute(&self, dir: &Path) -> Result<Outcome> {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        let outcome = self.run(dir)?;
        let manifest = RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: self.name().to_string(),
            seed: self.seed(),
            config: self.clone(),
            artifacts: outcome.artifacts.clone(),
        };
        write_json(&dir.join(MANIFEST_FILE), &manifest)?;
        Ok(outcome)
    }

    fn run(&self, dir: &Path) -> Result<Outcome> {
        let mut out = Outcome::default();
        match self {
            Job::Coeffs { order, m } => {
                let f = expand_fk(*order, *m).map_err(|e| usage(e.to_string()))?;
                let rows = f.iter().enumerate().map(|(k, &v)| [k as f64, v]);
                write_csv(&out.file(dir, "coeffs.csv"), &["k", "f_k"], rows)?;
            }
            Job::Bode {
                plant,
                controller,
                range,
            } => {
                let p = plant.build()?;
                let c = controller.build()?;
                let m = write_bode(&out.file(dir, "bode.csv"), &c, &p, range)?;
                out.summary.push(margin_summary("loop", m.as_ref()));
            }
            Job::Simulate {
                plant,
                controller,
                scenario,
            } => {
                let p = plant.build()?;
                let c = controller.build()?;
                let Some(mut runtime) = c.discrete() else {
                    bail!(usage("a continuous controller cannot be simulated; give omega_c, M and T to sample it"));
                };
                let trace = simulate(&p, runtime.as_mut(), scenario)?;
                write_trace(&out.file(dir, "trace.csv"), &trace)?;
                let mt = metrics(&trace, scenario);
                write_json(&out.file(dir, "metrics.json"), &mt)?;
                out.summary.push(if trace.diverged {
                    "closed loop diverged".to_string()
                } else {
                    format!(
                        "IAE = {:.6}, overshoot = {:.3} %, rise = {:.4} s, settling = {:.4} s",
                        mt.iae, mt.overshoot, mt.rise_time, mt.settling_time
                    )
                });
            }
            Job::TuneFreq { plant, spec } => {
                let p = plant.build()?;
                let res = tune_frequency(&p, spec)?;
                write_result(&mut out, dir, &res)?;
                let range = BodeRange::new(spec.omega_s / 10.0, spec.omega_t * 10.0);
                let m = write_bode(&out.file(dir, "bode.csv"), &res.controller, &p, &range)?;
                out.summary.push(margin_summary("tuned loop", m.as_ref()));
                if !res.objective.is_finite() {
                    out.numerical_failure = Some("no candidate had a finite objective".into());
                }
            }
            Job::TuneIntegral { plant, spec } => {
                let p = plant.build()?;
                let res = tune_integral(&p, spec)?;
                write_result(&mut out, dir, &res)?;
                let mut scenario = spec.scenario;
                scenario.period = res.controller.period();
                let trace = simulate(&p, &mut res.controller.runtime(), &scenario)?;
                write_trace(&out.file(dir, "trace.csv"), &trace)?;
                if res.objective >= DIVERGED_PENALTY {
                    out.numerical_failure = Some("every candidate diverged".into());
                }
            }
            Job::Example { number } => reproduce::run(*number, dir, &mut out)?,
        }
        Ok(out)
    }
}

#[derive(Serialize)]
struct ResultRecord<'a> {
    controller: &'a LdpidParams,
    objective: f64,
    constraint_report: Option<&'a ldpid_core::tuning::ConstraintReport>,
    evaluations: usize,
    converged: bool,
}

fn write_result(out: &mut Outcome, dir: &Path, res: &TuningResult) -> Result<()> {
    let p = res.controller.params();
    write_json(
        &out.file(dir, "result.json"),
        &ResultRecord {
            controller: p,
            objective: res.objective,
            constraint_report: res.constraint_report.as_ref(),
            evaluations: res.evaluations,
            converged: res.converged,
        },
    )?;
    out.summary.push(format!(
        "Kp = {}, Kd = {}, Ki = {}, mu = {}, lambda = {}, M = {}, T = {}",
        p.kp, p.kd, p.ki, p.mu, p.lambda, p.m, p.period
    ));
    out.summary.push(format!(
        "objective = {:e}, evaluations = {}, converged = {}",
        res.objective, res.evaluations, res.converged
    ));
    Ok(())
}
