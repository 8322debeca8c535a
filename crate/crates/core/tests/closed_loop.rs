use ldpid_core::ldpid::{LdpidController, LdpidParams};
use ldpid_core::lti::ContinuousPlant;
use ldpid_core::presets;
use ldpid_core::sim::{metrics, simulate, SimConfig, StepInput};
use proptest::prelude::*;

fn lag() -> ContinuousPlant {
    ContinuousPlant::new(&[1.0], &[1.0, 1.0], 0.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// Well-damped loops around a first-order lag, so the loop time constant
    /// stays near a few seconds and 100 s is more than ten of them. A
    /// truncated fractional integral series can sum to almost nothing at
    /// `z = 1`, which leaves only a creeping power-law approach, so the DC
    /// weight of the integral branch is kept away from zero.
    #[test]
    fn integral_action_leaves_no_step_error(
        kp in 0.5f64..2.0,
        ki in 0.02f64..0.2,
        lambda in 0.8f64..1.0,
        mu in 0.0f64..1.0,
        m in 0usize..8,
    ) {
        let c = LdpidController::new(LdpidParams { kp, kd: 0.05, ki, mu, lambda, m, period: 0.1 }).unwrap();
        let dc: f64 = c.integral_series().values().iter().sum();
        prop_assume!(ki * dc >= 0.01);
        let cfg = SimConfig::step(0.1, 100.0);
        let trace = simulate(&lag(), &mut c.runtime(), &cfg).unwrap();
        prop_assert!(!trace.diverged);
        prop_assert!(trace.error.last().unwrap().abs() < 1e-3);
    }

    #[test]
    fn metrics_are_well_formed(kp in 0.1f64..3.0, amplitude in -2.0f64..2.0) {
        let c = LdpidController::new(LdpidParams { kp, kd: 0.0, ki: 0.05, mu: 0.5, lambda: 1.0, m: 2, period: 0.1 }).unwrap();
        let cfg = SimConfig::step(0.1, 30.0).with_reference(StepInput { amplitude, start: 1.0 });
        let trace = simulate(&lag(), &mut c.runtime(), &cfg).unwrap();
        let m = metrics(&trace, &cfg);
        prop_assert!(m.iae >= 0.0 && m.ise >= 0.0);
        prop_assert!(m.overshoot >= 0.0);
        prop_assert_eq!(trace.times.len(), trace.output.len());
    }
}

#[test]
fn runs_are_reproducible() {
    let cfg = presets::example4_scenario();
    let c = presets::example4_ldpid();
    let a = simulate(&presets::example4_plant(), &mut c.runtime(), &cfg).unwrap();
    let b = simulate(&presets::example4_plant(), &mut c.runtime(), &cfg).unwrap();
    assert_eq!(a, b);
}

#[test]
fn disturbance_enters_at_plant_input() {
    // P = 1/(s+1) with no controller action: y follows 1 - e^{-(t - 2)}
    let c = LdpidController::new(LdpidParams {
        kp: 0.0,
        kd: 0.0,
        ki: 0.0,
        mu: 0.0,
        lambda: 1.0,
        m: 0,
        period: 0.1,
    })
    .unwrap();
    let cfg = SimConfig::step(0.1, 6.0)
        .with_reference(StepInput::NONE)
        .with_disturbance(StepInput::unit_at(2.0));
    let trace = simulate(&lag(), &mut c.runtime(), &cfg).unwrap();
    for (t, y) in trace.times.iter().zip(&trace.output) {
        let want = if *t < 2.0 {
            0.0
        } else {
            1.0 - (-(t - 2.0)).exp()
        };
        assert!((y - want).abs() < 1e-9, "t = {t}");
    }
}
