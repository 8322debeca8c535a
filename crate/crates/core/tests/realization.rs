//! The streaming difference equation against a branch-by-branch filter of the
//! transfer function, with weights from the three-term recurrence
//! `(k + 1) f_{k+1} = (k - 1) f_{k-1} - 2 x f_k` instead of the library's
//! binomial convolution.

use ldpid_core::ldpid::{LdpidController, LdpidParams};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn recurrence_weights(x: f64, m: usize) -> Vec<f64> {
    let mut f = vec![1.0, -2.0 * x];
    for k in 1..m {
        let next = ((k as f64 - 1.0) * f[k - 1] - 2.0 * x * f[k]) / (k as f64 + 1.0);
        f.push(next);
    }
    f.truncate(m + 1);
    f
}

fn fir(weights: &[f64], e: &[f64]) -> Vec<f64> {
    (0..e.len())
        .map(|n| {
            weights
                .iter()
                .enumerate()
                .take(n + 1)
                .map(|(k, w)| w * e[n - k])
                .sum()
        })
        .collect()
}

/// `Kp e + Kd D(z) e + Ki (1 + z^-1)/(1 - z^-1) I(z) e`, each branch filtered
/// on its own.
fn oracle(p: &LdpidParams, e: &[f64]) -> Vec<f64> {
    let d = fir(&recurrence_weights(p.mu, p.m), e);
    let v = fir(&recurrence_weights(1.0 - p.lambda, p.m), e);
    let mut acc = 0.0;
    let mut prev_v = 0.0;
    (0..e.len())
        .map(|n| {
            acc += v[n] + prev_v;
            prev_v = v[n];
            p.kp * e[n] + p.kd * d[n] + p.ki * acc
        })
        .collect()
}

fn random_params(rng: &mut ChaCha8Rng, m: usize) -> LdpidParams {
    LdpidParams {
        kp: rng.gen_range(-5.0..5.0),
        kd: rng.gen_range(-5.0..5.0),
        ki: rng.gen_range(-1.0..1.0),
        mu: rng.gen_range(0.0..2.0),
        lambda: rng.gen_range(-0.5..2.0),
        m,
        period: rng.gen_range(0.01..1.0),
    }
}

#[test]
fn recurrence_agrees_with_library_weights() {
    let c = LdpidController::new(LdpidParams {
        kp: 0.0,
        kd: 1.0,
        ki: 1.0,
        mu: 1.15,
        lambda: 1.2,
        m: 15,
        period: 0.1,
    })
    .unwrap();
    let lib = c.derivative_series().values();
    for (a, b) in lib.iter().zip(recurrence_weights(1.15, 15)) {
        assert!((a - b).abs() < 1e-13);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn step_matches_transfer_function(seed in any::<u64>(), m_index in 0usize..4) {
        let m = [0, 1, 5, 15][m_index];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = random_params(&mut rng, m);
        let c = LdpidController::new(params).unwrap();
        let e: Vec<f64> = (0..1000).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let want = oracle(&params, &e);
        let mut state = c.state();
        for (n, (&x, w)) in e.iter().zip(&want).enumerate() {
            let got = c.step(&mut state, x);
            prop_assert!((got - w).abs() < 1e-9, "n = {n}: {got} vs {w}");
        }
    }
}
