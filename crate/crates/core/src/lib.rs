//! Long-memory discrete-time PID (LDPID) controllers.
//!
//! An `M`-th order LDPID controller has the transfer function
//!
//! ```text
//! C(z) = Kp + Kd * sum_{k=0..M} f_k(mu) z^-k
//!           + Ki * (1 + z^-1) / (1 - z^-1) * sum_{k=0..M} f_k(1 - lambda) z^-k
//! ```
//!
//! where `f_k(x)` are the Maclaurin coefficients of `((1 - w) / (1 + w))^x`.
//! The weights come from expanding the prewarped Tustin image of a
//! fractional-order differentiator and integrator, truncated to `M + 1` memory
//! taps.
//!
//! This crate is `no_std` (it needs `alloc`). It contains:
//!
//! - [`fracseries`]: the coefficient series, backward-difference stencils and
//!   the prewarp factor.
//! - [`lti`]: continuous plants with dead time, continuous FOPID controllers,
//!   frequency responses, stability margins and sensitivity checks.
//! - [`ldpid`] and [`discrete`]: the controller itself and general discrete
//!   transfer functions, both with streaming runtimes.
//! - [`sim`]: sampled-data closed-loop simulation with zero-order hold and
//!   transport delay, plus step-response metrics.
//! - [`tuning`]: a seeded genetic optimizer and the frequency-domain and
//!   integral-index tuners built on it.
//! - [`presets`]: the plants and controllers of the reference examples.
#![no_std]
extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod discrete;
mod error;
pub mod fracseries;
pub mod ldpid;
mod linalg;
pub mod lti;
pub mod presets;
pub mod sim;
pub mod tuning;

pub use error::Error;
pub use num_complex::Complex64;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// A causal discrete-time controller driven by the sampled error signal.
pub trait DiscreteController {
    /// Sampling period in seconds.
    fn period(&self) -> f64;
    /// Returns the controller to rest (zero history, zero output).
    fn reset(&mut self);
    /// Consumes one error sample and produces the control for this period.
    fn update(&mut self, error: f64) -> f64;
}
