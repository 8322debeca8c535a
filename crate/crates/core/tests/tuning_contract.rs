use ldpid_core::presets;
use ldpid_core::tuning::{
    constraint_report, tune_frequency, tune_integral, IntegralSpec, PerformanceIndex,
};

#[test]
fn integral_tuning_is_deterministic() {
    let mut spec = IntegralSpec::new(PerformanceIndex::Ise, presets::example2_scenario(), 3);
    spec.budget = 150;
    spec.seed = 42;
    let a = tune_integral(&presets::example2_plant(), &spec).unwrap();
    let b = tune_integral(&presets::example2_plant(), &spec).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.evaluations, 150);
}

#[test]
fn frequency_tuning_is_deterministic_and_reports_consistently() {
    let plant = presets::example5_plant();
    let mut spec = presets::example5_spec();
    spec.budget = 500;
    let a = tune_frequency(&plant, &spec).unwrap();
    let b = tune_frequency(&plant, &spec).unwrap();
    assert_eq!(a, b);
    let stored = a.constraint_report.unwrap();
    let fresh = constraint_report(&plant, &a.controller, &spec).unwrap();
    for (x, y) in [
        (stored.gain, fresh.gain),
        (stored.phase_margin, fresh.phase_margin),
        (stored.phase_slope, fresh.phase_slope),
        (stored.noise, fresh.noise),
        (stored.disturbance, fresh.disturbance),
    ] {
        assert!((x - y).abs() <= 1e-10);
    }
}

#[test]
fn larger_budget_never_worse() {
    let plant = presets::example5_plant();
    let mut last = f64::INFINITY;
    for budget in [60, 200, 700, 1500] {
        let mut spec = presets::example5_spec();
        spec.budget = budget;
        let r = tune_frequency(&plant, &spec).unwrap();
        assert!(r.objective <= last);
        last = r.objective;
    }
}

#[test]
fn heater_design_reaches_a_flat_phase() {
    use ldpid_core::lti::{log_grid, margins_refined, open_loop, FrequencyResponse};

    let plant = presets::example5_plant();
    let spec = presets::example5_spec();
    let r = tune_frequency(&plant, &spec).unwrap();
    let l = open_loop(&r.controller, &plant);
    let resp = FrequencyResponse::sample(&l, log_grid(1e-3, 30.0, 500).unwrap()).unwrap();
    let m = margins_refined(&l, &resp).unwrap();
    assert!(
        (m.omega_c - spec.omega_c).abs() < 0.05 * spec.omega_c,
        "{m:?}"
    );
    assert!(m.phase_margin >= spec.phi_m - 1.0, "{m:?}");
    let band =
        FrequencyResponse::sample(&l, log_grid(m.omega_c / 3.0, 3.0 * m.omega_c, 500).unwrap())
            .unwrap();
    let phase = band.unwrapped_phase();
    let lo = phase.iter().copied().fold(f64::MAX, f64::min);
    let hi = phase.iter().copied().fold(f64::MIN, f64::max);
    assert!(
        (hi - lo).to_degrees() <= 3.0,
        "spread {}",
        (hi - lo).to_degrees()
    );
}
