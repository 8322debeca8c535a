//! Plants and controllers of the worked examples, as printed.
//!
//! Where the sampling period is not given with the controller, the value used
//! here is a documented default (see each function).

use crate::discrete::DiscreteTransferFunction;
use crate::ldpid::{LdpidController, LdpidParams};
use crate::lti::{ContinuousFopid, ContinuousPlant};
use crate::sim::{SimConfig, StepInput, TwoDofPid};
use crate::tuning::{PhaseTarget, TuningSpec};

fn plant(num: &[f64], den: &[f64], delay: f64) -> ContinuousPlant {
    ContinuousPlant::new(num, den, delay).expect("preset plant is valid")
}

fn ldpid(params: LdpidParams) -> LdpidController {
    LdpidController::new(params).expect("preset controller is valid")
}

/// Nominal gain of the example 1 plant. The design must hold for gains in
/// `[2.75, 3.75]`.
pub const EXAMPLE1_GAIN: f64 = 3.13;

/// Sampling period assumed for example 1, which does not state one.
pub const EXAMPLE1_PERIOD: f64 = 1.0;

/// `K e^{-50 s} / (433.33 s + 1)`.
pub fn example1_plant(gain: f64) -> ContinuousPlant {
    plant(&[gain], &[433.33, 1.0], 50.0)
}

/// `M = 15` LDPID with derivative series `f_k(1.228)` and integral series
/// `f_k(0.45)`.
pub fn example1_ldpid() -> LdpidController {
    ldpid(LdpidParams::with_integral_order(
        3.059,
        0.384,
        1.228,
        0.059,
        0.45,
        15,
        EXAMPLE1_PERIOD,
    ))
}

/// Design targets of example 1 at the default period.
pub fn example1_spec() -> TuningSpec {
    let mut spec = TuningSpec::new(
        0.008,
        60.0,
        (-20.0, 10.0),
        (-20.0, 0.001),
        15,
        EXAMPLE1_PERIOD,
    );
    spec.seed = 1;
    spec
}

/// Unit reference step over 2000 s at the default period.
pub fn example1_scenario() -> SimConfig {
    SimConfig::step(EXAMPLE1_PERIOD, 2000.0)
}

/// `2 e^{-3 s} / (1 + 10 s)`.
pub fn example2_plant() -> ContinuousPlant {
    plant(&[2.0], &[10.0, 1.0], 3.0)
}

/// `1.1 + 0.1 / s + 0.4 s`.
pub fn example2_pid() -> ContinuousFopid {
    ContinuousFopid::pid(1.1, 0.1, 0.4)
}

/// Prewarped-Tustin discretization of [`example2_pid`] with the gains rounded
/// as printed: `1.1 + 0.005 (1 + z^-1)/(1 - z^-1) + 8 (1 - z^-1)/(1 + z^-1)`,
/// `T = 0.1`.
pub fn example2_tustin_pid() -> DiscreteTransferFunction {
    DiscreteTransferFunction::pid_from_discrete_gains(1.1, 0.005, 8.0, 0.1)
        .expect("preset controller is valid")
}

/// IAE-tuned `M = 5` LDPID with integral series `f_k(-0.1)`, `T = 0.1`.
pub fn example2_ldpid() -> LdpidController {
    ldpid(LdpidParams::with_integral_order(
        2.8, 1.5, 1.03, 0.004, -0.1, 5, 0.1,
    ))
}

/// Unit reference step over 100 s at `T = 0.1`.
pub fn example2_scenario() -> SimConfig {
    SimConfig::step(0.1, 100.0)
}

/// `(-4.906 s^2 - 0.5884 s + 335.17) / (s^4 + 0.55437 s^3 + 139.6 s^2 + 27.91 s)`.
pub fn example3_plant() -> ContinuousPlant {
    plant(
        &[-4.906, -0.5884, 335.17],
        &[1.0, 0.55437, 139.6, 27.91, 0.0],
        0.0,
    )
}

/// Sampling period assumed for example 3, which does not state one.
pub const EXAMPLE3_PERIOD: f64 = 0.05;

/// LDPD (no integral term) `0.3 + 0.5 sum f_k(0.8) z^-k`, `M = 5`.
pub fn example3_ldpd() -> LdpidController {
    let mut p = LdpidParams::with_integral_order(0.3, 0.5, 0.8, 0.0, 0.0, 5, EXAMPLE3_PERIOD);
    p.lambda = 1.0;
    ldpid(p)
}

/// Unit reference step over 60 s.
pub fn example3_scenario() -> SimConfig {
    SimConfig::step(EXAMPLE3_PERIOD, 60.0)
}

/// `e^{-s} / (1 + 0.05 s)^2`.
pub fn example4_plant() -> ContinuousPlant {
    plant(&[1.0], &[0.0025, 0.1, 1.0], 1.0)
}

/// Sampling period assumed for example 4, which does not state one.
pub const EXAMPLE4_PERIOD: f64 = 0.005;

/// AMIGO-tuned two-degree-of-freedom comparator.
pub fn example4_amigo() -> TwoDofPid {
    TwoDofPid {
        k: 0.242,
        ki: 0.515,
        kd: 0.032,
        filter_time_constant: 0.1,
    }
}

/// IAE-tuned `M = 15` LDPID with integral series `f_k(-0.2)`.
pub fn example4_ldpid() -> LdpidController {
    ldpid(LdpidParams::with_integral_order(
        0.5,
        0.15,
        1.15,
        7e-4,
        -0.2,
        15,
        EXAMPLE4_PERIOD,
    ))
}

/// Unit reference step at 0 and unit load disturbance at 10 s, 30 s long.
pub fn example4_scenario() -> SimConfig {
    SimConfig::step(EXAMPLE4_PERIOD, 30.0)
        .with_substeps(5)
        .with_disturbance(StepInput::unit_at(10.0))
}

/// Nominal heater model `32 / (1 + 425 s)`.
pub fn example5_plant() -> ContinuousPlant {
    plant(&[32.0], &[425.0, 1.0], 0.0)
}

/// `7.937 + 1.187 / s - 0.935 s`.
pub fn example5_pid() -> ContinuousFopid {
    ContinuousFopid::pid(7.937, 1.187, -0.935)
}

/// `M = 5` LDPID with derivative series `f_k(0.077)` and integral series
/// `f_k(0.415)`, `T = 0.1`.
pub fn example5_ldpid() -> LdpidController {
    ldpid(LdpidParams::with_integral_order(
        7.109, 0.711, 0.077, 0.750, 0.415, 5, 0.1,
    ))
}

/// Design targets of example 5.
pub fn example5_spec() -> TuningSpec {
    let mut spec = TuningSpec::new(1.0, 75.0, (-20.0, 10.0), (-20.0, 0.1), 5, 0.1);
    spec.phase_target = PhaseTarget::AtLeast;
    spec.seed = 1;
    spec
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lti::FrequencyDomain;
    use alloc::vec;

    #[test]
    fn presets_construct() {
        for g in [2.75, EXAMPLE1_GAIN, 3.75] {
            assert_eq!(example1_plant(g).num(), &vec![g][..]);
        }
        assert_eq!(example1_ldpid().m(), 15);
        assert_eq!(example2_ldpid().params().lambda, 1.1);
        assert!((example4_ldpid().params().lambda - 1.2).abs() < 1e-15);
        assert_eq!(example3_ldpd().params().ki, 0.0);
        assert!(example5_ldpid().freq(1.0).is_ok());
        assert!(example1_spec().validate().is_ok());
        assert!(example5_spec().validate().is_ok());
        assert_eq!(example4_plant().order(), 2);
    }
}
