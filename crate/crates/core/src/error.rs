use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter `{name}` must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },
    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument {
        name: &'static str,
        reason: &'static str,
    },
    #[error("frequency {omega} rad/s is at or above the Nyquist frequency {nyquist} rad/s")]
    AboveNyquist { omega: f64, nyquist: f64 },
    #[error("frequency {omega} rad/s hits an imaginary-axis pole of the plant")]
    PoleHit { omega: f64 },
    #[error("frequency {omega} rad/s hits the integral pole at z = 1")]
    IntegralPole { omega: f64 },
    #[error("transfer function is not proper (numerator degree {num} > denominator degree {den})")]
    ImproperPlant { num: usize, den: usize },
    #[error("polynomial has a zero leading coefficient")]
    ZeroLeadingCoefficient,
    #[error("no gain crossover found on the frequency grid")]
    NoCrossover,
    #[error("frequency grid [{lo}, {hi}] does not cover the required band [{need_lo}, {need_hi}]")]
    GridCoverage {
        lo: f64,
        hi: f64,
        need_lo: f64,
        need_hi: f64,
    },
    #[error("controller period {controller} s does not match simulation period {config} s")]
    PeriodMismatch { controller: f64, config: f64 },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: &'static str) -> Self {
        Error::InvalidArgument { name, reason }
    }
}

pub(crate) fn finite(name: &'static str, value: f64) -> Result<f64, Error> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { name, value })
    }
}
