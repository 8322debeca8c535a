//! The `M`-th order LDPID controller and its streaming realization.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
// inherent float methods are only visible when std is linked
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{finite, Error};
use crate::fracseries::{prewarp_alpha, CoefficientSeries, SeriesKind};
use crate::lti::{ContinuousFopid, FrequencyDomain};
use crate::{DiscreteController, Result};

/// Scalar parameters of an LDPID controller. This is the serialized form; the
/// coefficient arrays are always derived from it.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LdpidParams {
    #[cfg_attr(feature = "serde", serde(rename = "Kp"))]
    pub kp: f64,
    #[cfg_attr(feature = "serde", serde(rename = "Kd"))]
    pub kd: f64,
    #[cfg_attr(feature = "serde", serde(rename = "Ki"))]
    pub ki: f64,
    /// Derivative order; the derivative weights are `f_k(mu)`.
    pub mu: f64,
    /// Integral order; the integral weights are `f_k(1 - lambda)`.
    pub lambda: f64,
    /// Number of memory taps minus one.
    #[cfg_attr(feature = "serde", serde(rename = "M"))]
    pub m: usize,
    /// Sampling period `T`, seconds.
    #[cfg_attr(feature = "serde", serde(rename = "T"))]
    pub period: f64,
}

impl LdpidParams {
    /// Parameters from the order of the integral series (`1 - lambda`) rather
    /// than `lambda` itself.
    pub fn with_integral_order(
        kp: f64,
        kd: f64,
        mu: f64,
        ki: f64,
        integral_order: f64,
        m: usize,
        period: f64,
    ) -> Self {
        Self {
            kp,
            kd,
            ki,
            mu,
            lambda: 1.0 - integral_order,
            m,
            period,
        }
    }

    pub fn integral_order(&self) -> f64 {
        1.0 - self.lambda
    }
}

/// `C(z) = Kp + Kd sum f_k(mu) z^-k + Ki (1 + z^-1)/(1 - z^-1) sum f_k(1 - lambda) z^-k`.
///
/// Immutable once built. Run it with [`LdpidController::runtime`] or with an
/// explicit [`ControllerState`] and [`LdpidController::step`].
#[derive(Debug, Clone, PartialEq)]
pub struct LdpidController {
    params: LdpidParams,
    derivative: CoefficientSeries,
    integral: CoefficientSeries,
    // Kd f_k and Ki f_k, precomputed
    kd_weights: Vec<f64>,
    ki_weights: Vec<f64>,
}

impl LdpidController {
    /// Builds the controller and its weights. `mu` must be non-negative,
    /// `T > 0`, and every parameter finite.
    pub fn new(params: LdpidParams) -> Result<Self> {
        finite("Kp", params.kp)?;
        finite("Kd", params.kd)?;
        finite("Ki", params.ki)?;
        finite("mu", params.mu)?;
        finite("lambda", params.lambda)?;
        finite("T", params.period)?;
        if params.period <= 0.0 {
            return Err(Error::invalid("T", "sampling period must be positive"));
        }
        if params.mu < 0.0 {
            return Err(Error::invalid(
                "mu",
                "derivative order must be non-negative",
            ));
        }
        let derivative = CoefficientSeries::derivative(params.mu, params.m)?;
        let integral = CoefficientSeries::integral(params.integral_order(), params.m)?;
        Ok(Self::assemble(params, derivative, integral))
    }

    /// Controller with user-supplied weight sequences in place of `f_k`.
    ///
    /// Both series must have the same length. The `mu` and `lambda` fields of
    /// the stored parameters are NaN because the weights carry no order.
    pub fn with_custom_weights(
        kp: f64,
        kd: f64,
        ki: f64,
        derivative: CoefficientSeries,
        integral: CoefficientSeries,
        period: f64,
    ) -> Result<Self> {
        finite("Kp", kp)?;
        finite("Kd", kd)?;
        finite("Ki", ki)?;
        finite("T", period)?;
        if period <= 0.0 {
            return Err(Error::invalid("T", "sampling period must be positive"));
        }
        if derivative.values().len() != integral.values().len() {
            return Err(Error::invalid("weights", "series lengths differ"));
        }
        if derivative.kind() != SeriesKind::Derivative || integral.kind() != SeriesKind::Integral {
            return Err(Error::invalid("weights", "series kinds swapped"));
        }
        let params = LdpidParams {
            kp,
            kd,
            ki,
            mu: derivative.order().unwrap_or(f64::NAN),
            lambda: integral.order().map_or(f64::NAN, |o| 1.0 - o),
            m: derivative.m(),
            period,
        };
        Ok(Self::assemble(params, derivative, integral))
    }

    fn assemble(
        params: LdpidParams,
        derivative: CoefficientSeries,
        integral: CoefficientSeries,
    ) -> Self {
        let kd_weights = derivative.values().iter().map(|f| params.kd * f).collect();
        let ki_weights = integral.values().iter().map(|f| params.ki * f).collect();
        Self {
            params,
            derivative,
            integral,
            kd_weights,
            ki_weights,
        }
    }

    /// Maps FOPID gains with the prewarp factor `alpha`:
    /// `Kp = kp`, `Kd = kd alpha^mu`, `Ki = ki alpha^-lambda`.
    ///
    /// Only a starting point: once sample-and-hold and truncation enter the
    /// loop the two controllers no longer behave alike, so the result should be
    /// tuned directly afterwards.
    pub fn from_fopid(
        fopid: &ContinuousFopid,
        omega_c: f64,
        period: f64,
        m: usize,
    ) -> Result<Self> {
        let alpha = prewarp_alpha(omega_c, period)?;
        Self::new(LdpidParams {
            kp: fopid.kp,
            kd: fopid.kd * alpha.powf(fopid.mu),
            ki: fopid.ki * alpha.powf(-fopid.lambda),
            mu: fopid.mu,
            lambda: fopid.lambda,
            m,
            period,
        })
    }

    pub fn params(&self) -> &LdpidParams {
        &self.params
    }

    pub fn derivative_series(&self) -> &CoefficientSeries {
        &self.derivative
    }

    pub fn integral_series(&self) -> &CoefficientSeries {
        &self.integral
    }

    pub fn m(&self) -> usize {
        self.params.m
    }

    pub fn period(&self) -> f64 {
        self.params.period
    }

    /// Response at `z = e^{j omega T}` where `w = z^-1` is given directly.
    /// Fails with [`Error::IntegralPole`] at `w = 1` when `Ki != 0`.
    pub fn eval_w(&self, w: Complex64, omega: f64) -> Result<Complex64> {
        let p = &self.params;
        let mut out = Complex64::new(p.kp, 0.0) + self.derivative.eval(w) * p.kd;
        if p.ki != 0.0 {
            let denom = Complex64::new(1.0, 0.0) - w;
            if denom.norm() < 1e-15 {
                return Err(Error::IntegralPole { omega });
            }
            out += (w + 1.0) / denom * self.integral.eval(w) * p.ki;
        }
        Ok(out)
    }

    /// Fresh state at rest.
    pub fn state(&self) -> ControllerState {
        ControllerState::new(self.params.m)
    }

    /// Controller bundled with its own state.
    pub fn runtime(&self) -> LdpidRuntime<'_> {
        LdpidRuntime {
            controller: self,
            state: self.state(),
        }
    }

    /// One sample of the difference equation
    ///
    /// ```text
    /// u[n] = u[n-1] + Kp (e[n] - e[n-1])
    ///      + sum_{k=0..M} Kd f_k(mu)      (e[n-k] - e[n-k-1])
    ///      + sum_{k=0..M} Ki f_k(1-lambda) (e[n-k] + e[n-k-1])
    /// ```
    ///
    /// obtained by multiplying the transfer function through by `1 - z^-1`.
    /// Uses `2M + 3` multiplications.
    ///
    /// Panics if `state` was created for a different `M`.
    pub fn step(&self, state: &mut ControllerState, error: f64) -> f64 {
        assert_eq!(
            state.history.len(),
            self.params.m + 2,
            "state built for another M"
        );
        state.push(error);
        let mut du = self.params.kp * (state.get(0) - state.get(1));
        let mut newer = state.get(0);
        for k in 0..=self.params.m {
            let older = state.get(k + 1);
            du += self.kd_weights[k] * (newer - older) + self.ki_weights[k] * (newer + older);
            newer = older;
        }
        state.last_output += du;
        state.last_output
    }
}

impl FrequencyDomain for LdpidController {
    /// Evaluated at `z = e^{j omega T}` for any `omega > 0`; the response is
    /// `2 pi / T` periodic and singular at multiples of `2 pi / T` when
    /// `Ki != 0`.
    fn freq(&self, omega: f64) -> Result<Complex64> {
        finite("omega", omega)?;
        if omega <= 0.0 {
            return Err(Error::invalid("omega", "must be positive"));
        }
        let w = Complex64::from_polar(1.0, -omega * self.params.period);
        self.eval_w(w, omega)
    }
}

/// Error history `e[n], e[n-1], ..., e[n-M-1]` plus the previous output.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerState {
    history: Vec<f64>,
    head: usize,
    last_output: f64,
}

impl ControllerState {
    pub fn new(m: usize) -> Self {
        Self {
            history: vec![0.0; m + 2],
            head: 0,
            last_output: 0.0,
        }
    }

    pub fn reset(&mut self) {
        self.history.iter_mut().for_each(|x| *x = 0.0);
        self.head = 0;
        self.last_output = 0.0;
    }

    /// Number of stored error samples (`M + 2`).
    pub fn capacity(&self) -> usize {
        self.history.len()
    }

    pub fn last_output(&self) -> f64 {
        self.last_output
    }

    /// `e[n - lag]`.
    pub fn get(&self, lag: usize) -> f64 {
        let n = self.history.len();
        self.history[(self.head + n - lag) % n]
    }

    fn push(&mut self, e: f64) {
        self.head = (self.head + 1) % self.history.len();
        self.history[self.head] = e;
    }
}

/// [`LdpidController`] plus a [`ControllerState`], usable wherever a
/// [`DiscreteController`] is expected.
#[derive(Debug, Clone)]
pub struct LdpidRuntime<'a> {
    controller: &'a LdpidController,
    state: ControllerState,
}

impl LdpidRuntime<'_> {
    pub fn state(&self) -> &ControllerState {
        &self.state
    }
}

impl DiscreteController for LdpidRuntime<'_> {
    fn period(&self) -> f64 {
        self.controller.period()
    }

    fn reset(&mut self) {
        self.state.reset();
    }

    fn update(&mut self, error: f64) -> f64 {
        self.controller.step(&mut self.state, error)
    }
}

/// Arithmetic cost of one controller update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StepCost {
    /// Multiplication count quoted for budgeting the processor, `2M + 6`.
    pub stated_mults: usize,
    /// Multiplications obtained by counting the difference equation term by
    /// term, `2(M + 1) + 1 = 2M + 3`.
    pub counted_mults: usize,
    /// Additions quoted alongside, `2(M + 1) + 4 = 2M + 6`.
    pub stated_adds: usize,
    /// Multiplications performed by [`LdpidController::step`].
    pub actual_mults: usize,
    /// Additions and subtractions performed by [`LdpidController::step`].
    pub actual_adds: usize,
}

pub fn cost_per_step(m: usize) -> StepCost {
    StepCost {
        stated_mults: 2 * m + 6,
        counted_mults: 2 * m + 3,
        stated_adds: 2 * m + 6,
        // Kp (e0 - e1): 1 mult, 1 sub. Each tap: 2 mults, 1 sub, 1 add for the
        // pair, 2 accumulations. Final u[n-1] + du: 1 add.
        actual_mults: 2 * m + 3,
        actual_adds: 4 * (m + 1) + 2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use core::f64::consts::PI;
    use proptest::prelude::*;
    use std::vec::Vec;

    fn params(kp: f64, kd: f64, ki: f64, mu: f64, lambda: f64, m: usize, t: f64) -> LdpidParams {
        LdpidParams {
            kp,
            kd,
            ki,
            mu,
            lambda,
            m,
            period: t,
        }
    }

    #[test]
    fn proportional_only_is_flat() {
        let c = LdpidController::new(params(2.5, 0.0, 0.0, 0.7, 0.3, 4, 0.1)).unwrap();
        for &w in &[0.01, 1.0, 30.0] {
            assert_eq!(c.freq(w).unwrap(), Complex64::new(2.5, 0.0));
        }
    }

    #[test]
    fn half_order_two_tap_at_quarter_turn() {
        let c = LdpidController::new(params(0.0, 1.0, 0.0, 0.5, 0.0, 1, 1.0)).unwrap();
        let v = c.freq(PI / 2.0).unwrap();
        assert!((v - Complex64::new(1.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn integral_pole_is_distinct_error() {
        let c = LdpidController::new(params(1.0, 0.0, 1.0, 0.5, 0.5, 2, 1.0)).unwrap();
        assert!(matches!(c.freq(2.0 * PI), Err(Error::IntegralPole { .. })));
    }

    #[test]
    fn dc_pole_with_integral_gain() {
        let t = 0.1;
        let c = LdpidController::new(params(1.0, 0.5, 0.2, 0.6, 0.8, 5, t)).unwrap();
        let low = c.freq(1e-9 / t).unwrap().norm();
        let high = c.freq(1.0 / t).unwrap().norm();
        assert!(low > 1e6 * high);
    }

    #[test]
    fn zero_input_gives_zero_output() {
        let c = LdpidController::new(params(1.0, 2.0, 3.0, 0.5, 0.5, 3, 0.1)).unwrap();
        let mut s = c.state();
        assert_eq!(c.step(&mut s, 0.0), 0.0);
    }

    #[test]
    fn proportional_increments() {
        let c = LdpidController::new(params(1.0, 0.0, 0.0, 0.5, 0.5, 3, 0.1)).unwrap();
        let mut s = c.state();
        let errs = [0.3, -1.2, 4.0, 0.0, 2.5];
        let mut prev_u = 0.0;
        let mut prev_e = 0.0;
        for &e in &errs {
            let u = c.step(&mut s, e);
            assert_relative_eq!(u - prev_u, e - prev_e, epsilon = 1e-15);
            prev_u = u;
            prev_e = e;
        }
    }

    #[test]
    fn half_order_single_tap_is_backward_difference() {
        let (kp, kd) = (0.7, 1.9);
        let c = LdpidController::new(params(kp, kd, 0.0, 0.5, 0.0, 1, 0.1)).unwrap();
        let mut s = c.state();
        let errs = [1.0, 0.5, -0.25, 2.0, 3.0, -1.0];
        let mut hist = [0.0f64; 3];
        let mut u_prev = 0.0;
        for &e in &errs {
            let u = c.step(&mut s, e);
            hist = [e, hist[0], hist[1]];
            // C(z) = kp + kd (1 - z^-1), so u[n] = kp e[n] + kd (e[n] - e[n-1])
            assert_relative_eq!(u, kp * e + kd * (hist[0] - hist[1]), epsilon = 1e-14);
            let du = kp * (hist[0] - hist[1]) + kd * ((hist[0] - hist[1]) - (hist[1] - hist[2]));
            assert_relative_eq!(u - u_prev, du, epsilon = 1e-14);
            u_prev = u;
        }
    }

    #[test]
    fn from_fopid_mapping() {
        let f = ContinuousFopid::new(2.0, 0.0, 0.0, 0.4, 0.6).unwrap();
        let c = LdpidController::from_fopid(&f, 1.0, 0.1, 5).unwrap();
        assert_eq!(c.params().kp, 2.0);
        assert_eq!(c.params().kd, 0.0);
        assert_eq!(c.params().ki, 0.0);

        let pid = ContinuousFopid::pid(1.1, 0.1, 0.4);
        let alpha = prewarp_alpha(0.21, 0.1).unwrap();
        let c = LdpidController::from_fopid(&pid, 0.21, 0.1, 5).unwrap();
        assert_relative_eq!(c.params().kd, 0.4 * alpha, max_relative = 1e-15);
        assert_relative_eq!(c.params().ki, 0.1 / alpha, max_relative = 1e-15);
        assert_relative_eq!(c.params().kd, 0.4 * 19.999264994597, max_relative = 1e-10);
        assert!(LdpidController::from_fopid(&pid, 40.0, 0.1, 5).is_err());
    }

    #[test]
    fn cost_counts() {
        assert_eq!(cost_per_step(5).stated_mults, 16);
        assert_eq!(cost_per_step(0).stated_mults, 6);
        assert_eq!(cost_per_step(15).stated_mults, 36);
        assert_eq!(cost_per_step(5).counted_mults, 13);
        assert_eq!(cost_per_step(5).actual_mults, 13);
    }

    #[test]
    fn state_holds_m_plus_two_samples() {
        let c = LdpidController::new(params(1.0, 1.0, 1.0, 0.5, 0.5, 7, 0.1)).unwrap();
        let mut rt = c.runtime();
        for i in 0..10_000 {
            rt.update((i as f64).sin());
        }
        assert_eq!(rt.state().capacity(), 9);
        rt.reset();
        assert_eq!(rt.state(), &c.state());
    }

    #[test]
    fn invalid_parameters() {
        assert!(LdpidController::new(params(1.0, 1.0, 1.0, 0.5, 0.5, 2, 0.0)).is_err());
        assert!(LdpidController::new(params(1.0, 1.0, 1.0, -0.5, 0.5, 2, 0.1)).is_err());
        assert!(LdpidController::new(params(f64::NAN, 1.0, 1.0, 0.5, 0.5, 2, 0.1)).is_err());
    }

    #[test]
    fn custom_weights_round_trip() {
        let d = CoefficientSeries::custom(SeriesKind::Derivative, vec![1.5, -2.0, 0.5]).unwrap();
        let i = CoefficientSeries::custom(SeriesKind::Integral, vec![1.0, 0.0, 0.0]).unwrap();
        let c = LdpidController::with_custom_weights(0.0, 1.0, 0.0, d, i, 0.5).unwrap();
        let w = Complex64::from_polar(1.0, -0.3);
        let want = (Complex64::new(1.5, 0.0) - w * 2.0 + w * w * 0.5) * 1.0;
        assert!((c.eval_w(w, 0.6).unwrap() - want).norm() < 1e-15);
        let short = CoefficientSeries::custom(SeriesKind::Integral, vec![1.0]).unwrap();
        let d = CoefficientSeries::custom(SeriesKind::Derivative, vec![1.0, -1.0]).unwrap();
        assert!(LdpidController::with_custom_weights(0.0, 1.0, 0.0, d, short, 0.5).is_err());
    }

    /// Gain and phase of the steady-state response to `sin(omega T n)`. The
    /// integral term leaves a constant offset from the start-up transient, so
    /// the fit includes one.
    fn sinusoid_gain(c: &LdpidController, omega: f64) -> (f64, f64) {
        let t = c.period();
        let mut rt = c.runtime();
        let n = 4000;
        let mut u = Vec::with_capacity(n);
        for k in 0..n {
            u.push(rt.update((omega * t * k as f64).sin()));
        }
        // least squares fit of u ~ a sin + b cos + offset on the tail
        let tail = n / 2;
        let (mut ss, mut sc, mut cc, mut us, mut uc, mut s1, mut c1, mut u1) =
            (0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        let count = (n - tail) as f64;
        for (k, &val) in u.iter().enumerate().skip(tail) {
            let (s, co) = (omega * t * k as f64).sin_cos();
            ss += s * s;
            sc += s * co;
            cc += co * co;
            us += val * s;
            uc += val * co;
            s1 += s;
            c1 += co;
            u1 += val;
        }
        // remove means (integrator offset from the transient)
        let (ms, mc, mu) = (s1 / count, c1 / count, u1 / count);
        let ss = ss - count * ms * ms;
        let sc = sc - count * ms * mc;
        let cc = cc - count * mc * mc;
        let us = us - count * mu * ms;
        let uc = uc - count * mu * mc;
        let det = ss * cc - sc * sc;
        let a = (us * cc - uc * sc) / det;
        let b = (uc * ss - us * sc) / det;
        // a sin + b cos = |G| sin(x + phi)
        (a.hypot(b), b.atan2(a))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(5))]
        #[test]
        fn runtime_matches_frequency_response(
            kp in 0.1f64..3.0,
            kd in 0.0f64..2.0,
            ki in 0.0f64..0.5,
            mu in 0.05f64..1.5,
            lambda in -0.3f64..1.5,
            m in 0usize..12,
            omega_t in 0.2f64..2.5,
        ) {
            let t = 0.1;
            let c = LdpidController::new(params(kp, kd, ki, mu, lambda, m, t)).unwrap();
            let omega = omega_t / t;
            let g = c.freq(omega).unwrap();
            let (mag, phase) = sinusoid_gain(&c, omega);
            prop_assert!((mag - g.norm()).abs() <= 0.01 * g.norm(), "{} vs {}", mag, g.norm());
            let dphi = crate::lti::wrap_angle(phase - g.arg());
            prop_assert!(dphi.abs() <= 0.01 * core::f64::consts::PI, "phase {} vs {}", phase, g.arg());
        }
    }
}
