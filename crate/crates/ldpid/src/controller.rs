use ldpid_core::discrete::DiscreteTransferFunction;
use ldpid_core::ldpid::{LdpidController, LdpidParams};
use ldpid_core::lti::{ContinuousFopid, FrequencyDomain};
use ldpid_core::{Complex64, DiscreteController};
use serde::{Deserialize, Serialize};

/// How a continuous FOPID is turned into an LDPID for sampled use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sampling {
    pub omega_c: f64,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "T")]
    pub period: f64,
}

/// Controller description as stored in manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ControllerConfig {
    Ldpid(LdpidParams),
    Fopid {
        kp: f64,
        ki: f64,
        kd: f64,
        lambda: f64,
        mu: f64,
        sampling: Option<Sampling>,
    },
    TustinPid {
        kp: f64,
        ki: f64,
        kd: f64,
        omega_c: f64,
        #[serde(rename = "T")]
        period: f64,
    },
}

/// A built controller.
#[derive(Debug, Clone)]
pub enum Controller {
    Ldpid(LdpidController),
    /// Continuous law, plus its LDPID image when sampling was configured.
    Fopid(ContinuousFopid, Option<LdpidController>),
    Tf(DiscreteTransferFunction),
}

impl ControllerConfig {
    pub fn build(&self) -> ldpid_core::Result<Controller> {
        Ok(match *self {
            ControllerConfig::Ldpid(p) => Controller::Ldpid(LdpidController::new(p)?),
            ControllerConfig::Fopid {
                kp,
                ki,
                kd,
                lambda,
                mu,
                sampling,
            } => {
                let f = ContinuousFopid::new(kp, ki, kd, lambda, mu)?;
                let sampled = sampling
                    .map(|s| LdpidController::from_fopid(&f, s.omega_c, s.period, s.m))
                    .transpose()?;
                Controller::Fopid(f, sampled)
            }
            ControllerConfig::TustinPid {
                kp,
                ki,
                kd,
                omega_c,
                period,
            } => Controller::Tf(DiscreteTransferFunction::tustin_pid(
                &ContinuousFopid::pid(kp, ki, kd),
                omega_c,
                period,
            )?),
        })
    }
}

impl Controller {
    /// Runnable form, if the controller is sampled.
    pub fn discrete(&self) -> Option<Box<dyn DiscreteController + '_>> {
        match self {
            Controller::Ldpid(c) | Controller::Fopid(_, Some(c)) => Some(Box::new(c.runtime())),
            Controller::Tf(tf) => Some(Box::new(tf.runtime())),
            Controller::Fopid(_, None) => None,
        }
    }

    pub fn period(&self) -> Option<f64> {
        match self {
            Controller::Ldpid(c) | Controller::Fopid(_, Some(c)) => Some(c.period()),
            Controller::Tf(tf) => Some(tf.period()),
            Controller::Fopid(_, None) => None,
        }
    }
}

impl FrequencyDomain for Controller {
    /// A FOPID is evaluated as the continuous law even when sampling is
    /// configured; use an `ldpid` controller file for the sampled response.
    fn freq(&self, omega: f64) -> ldpid_core::Result<Complex64> {
        match self {
            Controller::Ldpid(c) => c.freq(omega),
            Controller::Fopid(f, _) => f.freq(omega),
            Controller::Tf(tf) => tf.freq(omega),
        }
    }
}
