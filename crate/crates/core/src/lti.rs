//! Continuous-time plants, FOPID controllers and loop analysis.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
// inherent float methods are only visible when std is linked
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{finite, Error};
use crate::Result;

/// Anything with a frequency response `G(j omega)`.
///
/// Sampled systems are evaluated at `z = e^{j omega T}` (ideal C/D and D/C
/// converters), so their response is periodic in `omega` with period `2 pi / T`.
pub trait FrequencyDomain {
    fn freq(&self, omega: f64) -> Result<Complex64>;
}

impl<F: FrequencyDomain + ?Sized> FrequencyDomain for &F {
    fn freq(&self, omega: f64) -> Result<Complex64> {
        (**self).freq(omega)
    }
}

/// Series connection `a(j omega) * b(j omega)`.
#[derive(Debug, Clone, Copy)]
pub struct Series<A, B>(pub A, pub B);

impl<A: FrequencyDomain, B: FrequencyDomain> FrequencyDomain for Series<A, B> {
    fn freq(&self, omega: f64) -> Result<Complex64> {
        Ok(self.0.freq(omega)? * self.1.freq(omega)?)
    }
}

/// Open loop `C * P` of a unity-feedback system.
pub fn open_loop<C: FrequencyDomain, P: FrequencyDomain>(controller: C, plant: P) -> Series<C, P> {
    Series(controller, plant)
}

/// Evaluates a real-coefficient polynomial (descending powers) at `s`.
pub fn polyval(coeffs: &[f64], s: Complex64) -> Complex64 {
    coeffs
        .iter()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c)
}

fn trim_leading_zeros(coeffs: &[f64]) -> Vec<f64> {
    let first = coeffs
        .iter()
        .position(|&c| c != 0.0)
        .unwrap_or(coeffs.len());
    coeffs[first..].to_vec()
}

/// Rational transfer function with input dead time:
/// `P(s) = num(s) / den(s) * e^{-delay s}`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ContinuousPlant {
    num: Vec<f64>,
    den: Vec<f64>,
    delay: f64,
}

impl ContinuousPlant {
    /// Coefficients are in descending powers of `s`; leading zeros are
    /// dropped. The plant must be proper and `delay >= 0`.
    pub fn new(num: &[f64], den: &[f64], delay: f64) -> Result<Self> {
        for &c in num.iter().chain(den) {
            finite("coefficient", c)?;
        }
        finite("delay", delay)?;
        if delay < 0.0 {
            return Err(Error::invalid("delay", "must be non-negative"));
        }
        let den = trim_leading_zeros(den);
        if den.is_empty() {
            return Err(Error::ZeroLeadingCoefficient);
        }
        let mut num = trim_leading_zeros(num);
        if num.is_empty() {
            num.push(0.0);
        }
        if num.len() > den.len() {
            return Err(Error::ImproperPlant {
                num: num.len() - 1,
                den: den.len() - 1,
            });
        }
        Ok(Self { num, den, delay })
    }

    /// First-order plus dead time `gain e^{-delay s} / (tau s + 1)`.
    pub fn foptd(gain: f64, tau: f64, delay: f64) -> Result<Self> {
        Self::new(&[gain], &[tau, 1.0], delay)
    }

    pub fn num(&self) -> &[f64] {
        &self.num
    }

    pub fn den(&self) -> &[f64] {
        &self.den
    }

    pub fn delay(&self) -> f64 {
        self.delay
    }

    pub fn order(&self) -> usize {
        self.den.len() - 1
    }

    /// The same rational part with the dead time replaced.
    pub fn with_delay(&self, delay: f64) -> Result<Self> {
        Self::new(&self.num, &self.den, delay)
    }

    /// `num(j omega) / den(j omega)` without the dead-time factor.
    pub fn rational_freq(&self, omega: f64) -> Result<Complex64> {
        let s = Complex64::new(0.0, omega);
        let d = polyval(&self.den, s);
        if d.norm() == 0.0 {
            return Err(Error::PoleHit { omega });
        }
        Ok(polyval(&self.num, s) / d)
    }
}

impl FrequencyDomain for ContinuousPlant {
    fn freq(&self, omega: f64) -> Result<Complex64> {
        finite("omega", omega)?;
        if omega <= 0.0 {
            return Err(Error::invalid("omega", "must be positive"));
        }
        let r = self.rational_freq(omega)?;
        Ok(r * Complex64::from_polar(1.0, -omega * self.delay))
    }
}

/// `C(s) = kp + ki s^-lambda + kd s^mu` (principal branch). With
/// `lambda = mu = 1` this is the classical PID.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ContinuousFopid {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    pub lambda: f64,
    pub mu: f64,
}

impl ContinuousFopid {
    pub fn new(kp: f64, ki: f64, kd: f64, lambda: f64, mu: f64) -> Result<Self> {
        finite("kp", kp)?;
        finite("ki", ki)?;
        finite("kd", kd)?;
        finite("lambda", lambda)?;
        finite("mu", mu)?;
        if lambda < 0.0 || mu < 0.0 {
            return Err(Error::invalid("lambda/mu", "orders must be non-negative"));
        }
        Ok(Self {
            kp,
            ki,
            kd,
            lambda,
            mu,
        })
    }

    pub fn pid(kp: f64, ki: f64, kd: f64) -> Self {
        Self {
            kp,
            ki,
            kd,
            lambda: 1.0,
            mu: 1.0,
        }
    }
}

/// `(j omega)^x` on the principal branch, `omega > 0`.
fn jw_pow(omega: f64, x: f64) -> Complex64 {
    Complex64::from_polar(omega.powf(x), x * PI / 2.0)
}

impl FrequencyDomain for ContinuousFopid {
    fn freq(&self, omega: f64) -> Result<Complex64> {
        finite("omega", omega)?;
        if omega <= 0.0 {
            return Err(Error::invalid("omega", "must be positive"));
        }
        Ok(Complex64::new(self.kp, 0.0)
            + jw_pow(omega, -self.lambda) * self.ki
            + jw_pow(omega, self.mu) * self.kd)
    }
}

/// Constant gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gain(pub f64);

impl FrequencyDomain for Gain {
    fn freq(&self, _omega: f64) -> Result<Complex64> {
        Ok(Complex64::new(self.0, 0.0))
    }
}

/// Logarithmically spaced frequencies from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, points_per_decade: usize) -> Result<Vec<f64>> {
    finite("lo", lo)?;
    finite("hi", hi)?;
    if lo <= 0.0 || hi <= lo {
        return Err(Error::invalid("grid", "need 0 < lo < hi"));
    }
    if points_per_decade == 0 {
        return Err(Error::invalid("points_per_decade", "must be positive"));
    }
    let (a, b) = (lo.log10(), hi.log10());
    let n = (((b - a) * points_per_decade as f64).ceil() as usize).max(1);
    let mut out: Vec<f64> = (0..=n)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / n as f64))
        .collect();
    out[0] = lo;
    out[n] = hi;
    Ok(out)
}

/// Sampled loop gain over a strictly increasing positive grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyResponse {
    omegas: Vec<f64>,
    values: Vec<Complex64>,
}

impl FrequencyResponse {
    pub fn new(omegas: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if omegas.len() != values.len() || omegas.is_empty() {
            return Err(Error::invalid(
                "omegas",
                "must be non-empty and match values",
            ));
        }
        if omegas[0] <= 0.0 || omegas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid(
                "omegas",
                "must be positive and strictly increasing",
            ));
        }
        Ok(Self { omegas, values })
    }

    /// Evaluates `system` on every grid point.
    pub fn sample<S: FrequencyDomain>(system: &S, omegas: Vec<f64>) -> Result<Self> {
        let values = omegas
            .iter()
            .map(|&w| system.freq(w))
            .collect::<Result<Vec<_>>>()?;
        Self::new(omegas, values)
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    /// `20 log10 |L|` at each grid point.
    pub fn magnitude_db(&self) -> Vec<f64> {
        self.values.iter().map(|v| db(v.norm())).collect()
    }

    /// Phase in radians, unwrapped along the grid starting from the principal
    /// value at the first point.
    pub fn unwrapped_phase(&self) -> Vec<f64> {
        unwrap_phase(self.values.iter().map(|v| v.arg()))
    }

    /// Sensitivity `S = 1 / (1 + L)` at each grid point.
    pub fn sensitivity(&self) -> Vec<Complex64> {
        self.values.iter().map(|l| (l + 1.0).inv()).collect()
    }

    /// Complementary sensitivity `T = L / (1 + L)` at each grid point.
    pub fn complementary_sensitivity(&self) -> Vec<Complex64> {
        self.values.iter().map(|l| l / (l + 1.0)).collect()
    }
}

pub fn db(magnitude: f64) -> f64 {
    20.0 * magnitude.log10()
}

/// Wraps an angle to `(-pi, pi]`.
pub fn wrap_angle(x: f64) -> f64 {
    let mut y = (x + PI) % (2.0 * PI);
    if y <= 0.0 {
        y += 2.0 * PI;
    }
    y - PI
}

/// Removes `2 pi` jumps larger than `pi` between consecutive samples.
pub fn unwrap_phase<I: IntoIterator<Item = f64>>(phases: I) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for p in phases {
        match out.last() {
            None => out.push(p),
            Some(&prev) => out.push(prev + wrap_angle(p - prev)),
        }
    }
    out
}

/// Gain crossover and phase margin.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Margins {
    /// Lowest frequency where `|L| = 1`, rad/s.
    pub omega_c: f64,
    /// `180 + arg L(j omega_c)` in degrees, with the phase unwrapped along the
    /// grid.
    pub phase_margin: f64,
    /// More than one crossing of `|L| = 1` was found on the grid.
    pub multiple_crossovers: bool,
}

fn crossings(resp: &FrequencyResponse) -> Vec<usize> {
    let mag: Vec<f64> = resp.values.iter().map(|v| v.norm()).collect();
    (0..mag.len().saturating_sub(1))
        .filter(|&i| (mag[i] >= 1.0) != (mag[i + 1] >= 1.0))
        .collect()
}

/// Margins from the sampled response alone: the crossover is located by
/// interpolating `ln |L|` linearly in `ln omega` inside the bracketing grid
/// interval, and the phase is interpolated the same way.
pub fn margins(resp: &FrequencyResponse) -> Result<Margins> {
    let found = crossings(resp);
    let &i = found.first().ok_or(Error::NoCrossover)?;
    let phase = resp.unwrapped_phase();
    let (w0, w1) = (resp.omegas[i].ln(), resp.omegas[i + 1].ln());
    let (m0, m1) = (resp.values[i].norm().ln(), resp.values[i + 1].norm().ln());
    let t = if m1 == m0 { 0.5 } else { m0 / (m0 - m1) };
    let omega_c = (w0 + t * (w1 - w0)).exp();
    let ph = phase[i] + t * (phase[i + 1] - phase[i]);
    Ok(Margins {
        omega_c,
        phase_margin: 180.0 + ph.to_degrees(),
        multiple_crossovers: found.len() > 1,
    })
}

/// Margins with the crossover refined by bisection in `ln omega` on the
/// system itself (60 halvings of the bracketing grid interval).
pub fn margins_refined<S: FrequencyDomain>(
    system: &S,
    resp: &FrequencyResponse,
) -> Result<Margins> {
    let found = crossings(resp);
    let &i = found.first().ok_or(Error::NoCrossover)?;
    let phase = resp.unwrapped_phase();
    let above_at_lo = resp.values[i].norm() >= 1.0;
    let (mut lo, mut hi) = (resp.omegas[i].ln(), resp.omegas[i + 1].ln());
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if (system.freq(mid.exp())?.norm() >= 1.0) == above_at_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let omega_c = (0.5 * (lo + hi)).exp();
    let l = system.freq(omega_c)?;
    let ph = phase[i] + wrap_angle(l.arg() - phase[i]);
    Ok(Margins {
        omega_c,
        phase_margin: 180.0 + ph.to_degrees(),
        multiple_crossovers: found.len() > 1,
    })
}

/// Result of checking `|T| <= A dB` above `omega_t` and `|S| <= B dB` below
/// `omega_s`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SensitivityReport {
    pub noise_ok: bool,
    pub dist_ok: bool,
    /// Largest `|T|` in dB over grid points `omega >= omega_t`.
    pub worst_t_db: f64,
    /// Largest `|S|` in dB over grid points `omega <= omega_s`.
    pub worst_s_db: f64,
}

/// Checks the noise-attenuation and disturbance-rejection bounds on the grid.
/// The grid must cover `[omega_s / 10, 10 omega_t]`.
pub fn sensitivity_bounds_check(
    resp: &FrequencyResponse,
    a_db: f64,
    omega_t: f64,
    b_db: f64,
    omega_s: f64,
) -> Result<SensitivityReport> {
    let (lo, hi) = (resp.omegas[0], resp.omegas[resp.len() - 1]);
    let (need_lo, need_hi) = (omega_s / 10.0, omega_t * 10.0);
    // one part in 1e9 of slack for grids generated with exactly these ends
    if lo > need_lo * (1.0 + 1e-9) || hi < need_hi * (1.0 - 1e-9) {
        return Err(Error::GridCoverage {
            lo,
            hi,
            need_lo,
            need_hi,
        });
    }
    let mut worst_t_db = f64::NEG_INFINITY;
    let mut worst_s_db = f64::NEG_INFINITY;
    for (&w, l) in resp.omegas.iter().zip(&resp.values) {
        if w >= omega_t {
            worst_t_db = worst_t_db.max(db((l / (l + 1.0)).norm()));
        }
        if w <= omega_s {
            worst_s_db = worst_s_db.max(db((l + 1.0).inv().norm()));
        }
    }
    Ok(SensitivityReport {
        noise_ok: worst_t_db <= a_db,
        dist_ok: worst_s_db <= b_db,
        worst_t_db,
        worst_s_db,
    })
}

/// `true` iff every root of `den` (descending powers) lies in the open left
/// half-plane.
///
/// Uses the Routh array: a polynomial is Hurwitz exactly when all coefficients
/// share a sign and every first-column entry is nonzero with that sign. A zero
/// anywhere in the first column means a root on or right of the imaginary axis.
pub fn routh_stable(den: &[f64]) -> Result<bool> {
    for &c in den {
        finite("coefficient", c)?;
    }
    if den.len() < 2 {
        return Err(Error::invalid("den", "degree must be at least 1"));
    }
    if den[0] == 0.0 {
        return Err(Error::ZeroLeadingCoefficient);
    }
    let sign = den[0].signum();
    let p: Vec<f64> = den.iter().map(|c| c * sign).collect();
    if p.iter().any(|&c| c <= 0.0) {
        return Ok(false);
    }
    let width = p.len().div_ceil(2);
    let row = |start: usize| -> Vec<f64> {
        (0..width)
            .map(|k| p.get(start + 2 * k).copied().unwrap_or(0.0))
            .collect()
    };
    let mut upper = row(0);
    let mut lower = row(1);
    let scale = p.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    for _ in 0..p.len() - 2 {
        if lower[0] <= 1e-14 * scale {
            return Ok(false);
        }
        let next: Vec<f64> = (0..width)
            .map(|k| {
                let a = upper.get(k + 1).copied().unwrap_or(0.0);
                let b = lower.get(k + 1).copied().unwrap_or(0.0);
                (lower[0] * a - upper[0] * b) / lower[0]
            })
            .collect();
        upper = lower;
        lower = next;
    }
    Ok(lower[0] > 1e-14 * scale)
}
