//! Power-series weights of the discretized fractional operators.
//!
//! With `w = z^-1`, the prewarped Tustin image of `s^x` is
//! `alpha^x * ((1 - w) / (1 + w))^x`. Its Maclaurin coefficients `f_k(x)` are
//! the memory weights of the LDPID derivative term (`x = mu`) and of the
//! integral term (`x = 1 - lambda`).
//!
//! The series is the Cauchy product of the binomial series of `(1 - w)^x` and
//! `(1 + w)^-x`, each produced by the multiplicative recurrence for generalized
//! binomial coefficients. Everything is computed in `f64` along the principal
//! real branch. For `M` beyond a few thousand with `|x| > 2` the accumulated
//! rounding error can exceed `1e-9`.

use alloc::vec::Vec;

use num_complex::Complex64;
// inherent float methods are only visible when std is linked
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{finite, Error};
use crate::Result;

/// Which LDPID term a series feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SeriesKind {
    Derivative,
    Integral,
}

/// Finite weight sequence `f_0..f_M`.
///
/// Series built by [`CoefficientSeries::derivative`] or
/// [`CoefficientSeries::integral`] carry the order they were expanded for.
/// [`CoefficientSeries::custom`] accepts arbitrary weights (any alternating-sign
/// sequence is a valid generalized derivative); those have no order.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CoefficientSeries {
    order: Option<f64>,
    kind: SeriesKind,
    values: Vec<f64>,
}

impl CoefficientSeries {
    /// Weights `f_k(order)` for `k = 0..=m`, tagged as a derivative series.
    pub fn derivative(order: f64, m: usize) -> Result<Self> {
        Self::expanded(order, m, SeriesKind::Derivative)
    }

    /// Weights `f_k(order)` for `k = 0..=m`, tagged as an integral series.
    /// For an LDPID integral term `order` is `1 - lambda`.
    pub fn integral(order: f64, m: usize) -> Result<Self> {
        Self::expanded(order, m, SeriesKind::Integral)
    }

    fn expanded(order: f64, m: usize, kind: SeriesKind) -> Result<Self> {
        Ok(Self {
            order: Some(order),
            kind,
            values: expand_fk(order, m)?,
        })
    }

    /// User-supplied weights. At least one weight is required and all must be
    /// finite.
    pub fn custom(kind: SeriesKind, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("values", "at least one weight is required"));
        }
        for &v in &values {
            finite("values", v)?;
        }
        Ok(Self {
            order: None,
            kind,
            values,
        })
    }

    pub fn order(&self) -> Option<f64> {
        self.order
    }

    pub fn kind(&self) -> SeriesKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Truncation order `M` (the series holds `M + 1` weights).
    pub fn m(&self) -> usize {
        self.values.len() - 1
    }

    /// `sum_k f_k w^k` by Horner's rule.
    pub fn eval(&self, w: Complex64) -> Complex64 {
        self.values
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &f| acc * w + f)
    }
}

/// Maclaurin coefficients `f_0..f_m` of `((1 - w) / (1 + w))^order`.
///
/// `f_0 = 1`, `f_1 = -2 order`, `f_2 = 2 order^2`, and so on. Cost is
/// `O(m^2)`.
pub fn expand_fk(order: f64, m: usize) -> Result<Vec<f64>> {
    finite("order", order)?;
    // (1 - w)^x = sum a_j w^j with a_j = a_{j-1} (j - 1 - x) / j
    // (1 + w)^-x = sum b_j w^j with b_j = b_{j-1} (1 - j - x) / j
    let mut a = Vec::with_capacity(m + 1);
    let mut b = Vec::with_capacity(m + 1);
    a.push(1.0);
    b.push(1.0);
    for j in 1..=m {
        let jf = j as f64;
        a.push(a[j - 1] * (jf - 1.0 - order) / jf);
        b.push(b[j - 1] * (1.0 - jf - order) / jf);
    }
    let values = (0..=m)
        .map(|k| (0..=k).map(|j| a[j] * b[k - j]).sum())
        .collect();
    Ok(values)
}

/// Backward-difference first-derivative stencil with `O(T^n)` error.
///
/// `weights[k]` multiplies `e[i - k]`:
/// `de/dt(t_i) ~ (1/T) * sum_{k=0..n} weights[k] * e[i - k]`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BackwardDiffWeights {
    n: usize,
    weights: Vec<f64>,
}

impl BackwardDiffWeights {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("n", "error order must be at least 1"));
        }
        let mut weights = Vec::with_capacity(n + 1);
        weights.push((1..=n).map(|j| 1.0 / j as f64).sum());
        weights.push(-(n as f64));
        for k in 2..=n {
            let prev = weights[k - 1];
            let (kf, nf) = (k as f64, n as f64);
            weights.push(-prev * (kf - 1.0) * (nf - kf + 1.0) / (kf * kf));
        }
        Ok(Self { n, weights })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Applies the stencil to `history`, newest sample first.
    ///
    /// Panics if fewer than `n + 1` samples are given.
    pub fn apply(&self, history: &[f64], period: f64) -> f64 {
        assert!(history.len() > self.n, "need n + 1 samples");
        self.weights
            .iter()
            .zip(history)
            .map(|(w, e)| w * e)
            .sum::<f64>()
            / period
    }
}

/// Shorthand for [`BackwardDiffWeights::new`].
pub fn backward_diff_weights(n: usize) -> Result<BackwardDiffWeights> {
    BackwardDiffWeights::new(n)
}

/// Prewarp factor `alpha = omega_c / tan(omega_c T / 2)`.
///
/// The bilinear map scaled by `alpha` matches `s = j omega` exactly at
/// `omega_c`. Requires `0 < omega_c < pi / T`.
pub fn prewarp_alpha(omega_c: f64, period: f64) -> Result<f64> {
    finite("omega_c", omega_c)?;
    finite("period", period)?;
    if period <= 0.0 {
        return Err(Error::invalid("period", "must be positive"));
    }
    if omega_c <= 0.0 {
        return Err(Error::invalid("omega_c", "must be positive"));
    }
    let nyquist = core::f64::consts::PI / period;
    if omega_c >= nyquist {
        return Err(Error::AboveNyquist {
            omega: omega_c,
            nyquist,
        });
    }
    Ok(omega_c / (omega_c * period / 2.0).tan())
}
