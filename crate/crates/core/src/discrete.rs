//! Rational discrete-time transfer functions in `z^-1`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{finite, Error};
use crate::fracseries::prewarp_alpha;
use crate::lti::{ContinuousFopid, FrequencyDomain};
use crate::{DiscreteController, Result};

/// `H(z) = (b_0 + b_1 z^-1 + ...) / (a_0 + a_1 z^-1 + ...)` sampled every
/// `period` seconds.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiscreteTransferFunction {
    b: Vec<f64>,
    a: Vec<f64>,
    period: f64,
}

impl DiscreteTransferFunction {
    pub fn new(b: Vec<f64>, a: Vec<f64>, period: f64) -> Result<Self> {
        for &c in b.iter().chain(&a) {
            finite("coefficient", c)?;
        }
        finite("period", period)?;
        if period <= 0.0 {
            return Err(Error::invalid("period", "must be positive"));
        }
        if b.is_empty() {
            return Err(Error::invalid("b", "numerator must not be empty"));
        }
        match a.first() {
            None | Some(0.0) => return Err(Error::ZeroLeadingCoefficient),
            _ => {}
        }
        Ok(Self { b, a, period })
    }

    /// Prewarped-Tustin image of the classical PID `kp + ki / s + kd s`:
    ///
    /// ```text
    /// kp + (ki / alpha) (1 + z^-1) / (1 - z^-1) + kd alpha (1 - z^-1) / (1 + z^-1)
    /// ```
    ///
    /// over the common denominator `1 - z^-2`.
    pub fn tustin_pid(pid: &ContinuousFopid, omega_c: f64, period: f64) -> Result<Self> {
        if pid.lambda != 1.0 || pid.mu != 1.0 {
            return Err(Error::invalid(
                "pid",
                "integer orders (lambda = mu = 1) required",
            ));
        }
        let alpha = prewarp_alpha(omega_c, period)?;
        Self::pid_from_discrete_gains(pid.kp, pid.ki / alpha, pid.kd * alpha, period)
    }

    /// `kp + ki (1 + z^-1) / (1 - z^-1) + kd (1 - z^-1) / (1 + z^-1)` with the
    /// discrete gains given directly.
    pub fn pid_from_discrete_gains(kp: f64, ki: f64, kd: f64, period: f64) -> Result<Self> {
        let b = vec![kp + ki + kd, 2.0 * ki - 2.0 * kd, -kp + ki + kd];
        Self::new(b, vec![1.0, 0.0, -1.0], period)
    }

    pub fn numerator(&self) -> &[f64] {
        &self.b
    }

    pub fn denominator(&self) -> &[f64] {
        &self.a
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn runtime(&self) -> TransferFunctionRuntime<'_> {
        TransferFunctionRuntime {
            tf: self,
            inputs: vec![0.0; self.b.len()],
            outputs: vec![0.0; self.a.len().saturating_sub(1)],
        }
    }
}

fn poly_in_w(coeffs: &[f64], w: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * w + c)
}

impl FrequencyDomain for DiscreteTransferFunction {
    fn freq(&self, omega: f64) -> Result<Complex64> {
        finite("omega", omega)?;
        let w = Complex64::from_polar(1.0, -omega * self.period);
        let den = poly_in_w(&self.a, w);
        if den.norm() == 0.0 {
            return Err(Error::PoleHit { omega });
        }
        Ok(poly_in_w(&self.b, w) / den)
    }
}

/// Direct-form I state of a [`DiscreteTransferFunction`].
#[derive(Debug, Clone)]
pub struct TransferFunctionRuntime<'a> {
    tf: &'a DiscreteTransferFunction,
    inputs: Vec<f64>,
    outputs: Vec<f64>,
}

impl DiscreteController for TransferFunctionRuntime<'_> {
    fn period(&self) -> f64 {
        self.tf.period
    }

    fn reset(&mut self) {
        self.inputs.iter_mut().for_each(|x| *x = 0.0);
        self.outputs.iter_mut().for_each(|x| *x = 0.0);
    }

    fn update(&mut self, error: f64) -> f64 {
        self.inputs.rotate_right(1);
        self.inputs[0] = error;
        let forward: f64 = self.tf.b.iter().zip(&self.inputs).map(|(b, x)| b * x).sum();
        let feedback: f64 = self.tf.a[1..]
            .iter()
            .zip(&self.outputs)
            .map(|(a, y)| a * y)
            .sum();
        let y = (forward - feedback) / self.tf.a[0];
        if !self.outputs.is_empty() {
            self.outputs.rotate_right(1);
            self.outputs[0] = y;
        }
        y
    }
}
