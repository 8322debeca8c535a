//! Sampled-data closed-loop simulation.
//!
//! The rational part of the plant is discretized exactly under zero-order hold
//! on a fine grid `h = T / substeps`. Dead time is a transport buffer of
//! `round(L / h)` fine samples on the plant input. The controller runs every
//! `T` on `e = r - y` and its output is held until the next update. The load
//! disturbance adds to the plant input.
//!
//! For plants with direct feedthrough the output at `t` uses the delayed
//! input applied at `t`, which is already known when the dead time is at
//! least one fine step. Without dead time the input held over the previous
//! step is used instead, which keeps the loop causal.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

// inherent float methods are only visible when std is linked
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{finite, Error};
use crate::linalg::{Matrix, StateSpace};
use crate::lti::ContinuousPlant;
use crate::{DiscreteController, Result};

/// Step of `amplitude` applied at time `start`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StepInput {
    pub amplitude: f64,
    pub start: f64,
}

impl StepInput {
    pub const NONE: StepInput = StepInput {
        amplitude: 0.0,
        start: 0.0,
    };

    pub fn unit_at(start: f64) -> Self {
        Self {
            amplitude: 1.0,
            start,
        }
    }
}

/// Scenario for a closed-loop run.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SimConfig {
    /// Controller sampling period `T`, seconds.
    pub period: f64,
    /// Plant integration steps per controller period.
    pub substeps: usize,
    pub duration: f64,
    pub reference: StepInput,
    /// Added to the plant input.
    pub disturbance: StepInput,
}

impl SimConfig {
    /// Unit reference step at `t = 0`, no disturbance, 10 substeps.
    pub fn step(period: f64, duration: f64) -> Self {
        Self {
            period,
            substeps: 10,
            duration,
            reference: StepInput::unit_at(0.0),
            disturbance: StepInput::NONE,
        }
    }

    pub fn with_substeps(mut self, substeps: usize) -> Self {
        self.substeps = substeps;
        self
    }

    pub fn with_reference(mut self, reference: StepInput) -> Self {
        self.reference = reference;
        self
    }

    pub fn with_disturbance(mut self, disturbance: StepInput) -> Self {
        self.disturbance = disturbance;
        self
    }

    /// Fine integration step `h = T / substeps`.
    pub fn fine_step(&self) -> f64 {
        self.period / self.substeps as f64
    }

    pub fn validate(&self) -> Result<()> {
        finite("period", self.period)?;
        finite("duration", self.duration)?;
        for s in [self.reference, self.disturbance] {
            finite("step amplitude", s.amplitude)?;
            finite("step start", s.start)?;
        }
        if self.period <= 0.0 {
            return Err(Error::invalid("period", "must be positive"));
        }
        if self.duration <= 0.0 {
            return Err(Error::invalid("duration", "must be positive"));
        }
        if self.substeps == 0 {
            return Err(Error::invalid("substeps", "must be at least 1"));
        }
        Ok(())
    }

    /// `|y|` beyond this declares divergence.
    pub fn divergence_threshold(&self) -> f64 {
        DIVERGENCE_FACTOR
            * self
                .reference
                .amplitude
                .abs()
                .max(self.disturbance.amplitude.abs())
    }
}

/// Runs stop once `|y|` exceeds this multiple of the largest input step.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

/// Sampled closed-loop signals on the fine grid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StepTrace {
    pub times: Vec<f64>,
    pub reference: Vec<f64>,
    pub error: Vec<f64>,
    pub control: Vec<f64>,
    pub output: Vec<f64>,
    /// The run was cut short because the output blew up.
    pub diverged: bool,
    /// `round(L / h) h - L`: the dead time actually simulated minus the
    /// requested one. Nonzero means the delay was rounded to the grid.
    pub delay_rounding: f64,
}

impl StepTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn push(&mut self, t: f64, r: f64, y: f64, u: f64) {
        self.times.push(t);
        self.reference.push(r);
        self.error.push(r - y);
        self.control.push(u);
        self.output.push(y);
    }
}

struct PlantRunner {
    model: crate::linalg::DiscreteStateSpace,
    buffer: VecDeque<f64>,
    applied: f64,
}

impl PlantRunner {
    fn new(plant: &ContinuousPlant, h: f64) -> (Self, f64) {
        let ss = StateSpace::from_tf(plant.num(), plant.den());
        let samples = (plant.delay() / h).round();
        let rounding = samples * h - plant.delay();
        let buffer = core::iter::repeat_n(0.0, samples as usize).collect();
        (
            Self {
                model: ss.zoh(h),
                buffer,
                applied: 0.0,
            },
            rounding,
        )
    }

    /// Output at the current grid point, before the controller acts.
    fn output(&self) -> f64 {
        let feedthrough = self.buffer.front().copied().unwrap_or(self.applied);
        self.model.output(&[feedthrough])
    }

    /// Feeds one fine step of input through the delay line and the plant.
    fn advance(&mut self, input: f64) {
        self.buffer.push_back(input);
        let delayed = self.buffer.pop_front().unwrap_or(input);
        self.model.advance(&[delayed]);
        self.applied = delayed;
    }
}

fn step_index(start: f64, h: f64) -> i64 {
    (start / h).round() as i64
}

fn run_loop<F>(plant: &ContinuousPlant, cfg: &SimConfig, mut control: F) -> Result<StepTrace>
where
    F: FnMut(usize, f64, f64) -> f64,
{
    cfg.validate()?;
    let h = cfg.fine_step();
    let (mut runner, rounding) = PlantRunner::new(plant, h);
    let n = (cfg.duration / h).round() as usize;
    let r_on = step_index(cfg.reference.start, h);
    let d_on = step_index(cfg.disturbance.start, h);
    let limit = cfg.divergence_threshold();
    let mut trace = StepTrace {
        delay_rounding: rounding,
        ..StepTrace::default()
    };
    for i in 0..=n {
        let t = i as f64 * h;
        let r = if i as i64 >= r_on {
            cfg.reference.amplitude
        } else {
            0.0
        };
        let d = if i as i64 >= d_on {
            cfg.disturbance.amplitude
        } else {
            0.0
        };
        let y = runner.output();
        let u = control(i, r, y);
        trace.push(t, r, y, u);
        if !y.is_finite() || !u.is_finite() || y.abs() > limit {
            trace.diverged = true;
            break;
        }
        runner.advance(u + d);
    }
    Ok(trace)
}

/// Closed loop of `plant` with a sampled `controller`.
///
/// The controller is reset first. Its period must equal `cfg.period`.
pub fn simulate(
    plant: &ContinuousPlant,
    controller: &mut dyn DiscreteController,
    cfg: &SimConfig,
) -> Result<StepTrace> {
    let tp = controller.period();
    if (tp - cfg.period).abs() > 1e-12 * cfg.period.abs() {
        return Err(Error::PeriodMismatch {
            controller: tp,
            config: cfg.period,
        });
    }
    controller.reset();
    let substeps = cfg.substeps;
    let mut held = 0.0;
    run_loop(plant, cfg, |i, r, y| {
        if i % substeps == 0 {
            held = controller.update(r - y);
        }
        held
    })
}

/// Continuous two-degree-of-freedom PID
///
/// ```text
/// u = k (r - y_f) + ki int (r - y_f) dt - kd d y_f / dt,   Y_f = Y / (1 + Tf s)^2
/// ```
///
/// with the derivative acting on the filtered measurement only.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TwoDofPid {
    pub k: f64,
    pub ki: f64,
    pub kd: f64,
    /// `Tf` of the second-order measurement filter.
    pub filter_time_constant: f64,
}

impl TwoDofPid {
    fn state_space(&self) -> Result<StateSpace> {
        finite("k", self.k)?;
        finite("ki", self.ki)?;
        finite("kd", self.kd)?;
        finite("filter_time_constant", self.filter_time_constant)?;
        let tf = self.filter_time_constant;
        if tf <= 0.0 {
            return Err(Error::invalid("filter_time_constant", "must be positive"));
        }
        // x = [y_f, y_f', integral of (r - y_f)], inputs (r, y)
        let mut a = Matrix::zeros(3);
        a[(0, 1)] = 1.0;
        a[(1, 0)] = -1.0 / (tf * tf);
        a[(1, 1)] = -2.0 / tf;
        a[(2, 0)] = -1.0;
        Ok(StateSpace {
            a,
            b: vec![0.0, 0.0, 0.0, 1.0 / (tf * tf), 1.0, 0.0],
            c: vec![-self.k, -self.kd, self.ki],
            d: vec![self.k, 0.0],
            inputs: 2,
        })
    }
}

/// Closed loop of `plant` with the continuous [`TwoDofPid`], integrated on the
/// same fine grid as [`simulate`] (controller inputs held over each fine
/// step). `cfg.period` only sets the grid through `cfg.substeps`.
pub fn simulate_2dof(
    plant: &ContinuousPlant,
    params: &TwoDofPid,
    cfg: &SimConfig,
) -> Result<StepTrace> {
    let mut ctrl = params.state_space()?.zoh(cfg.fine_step());
    run_loop(plant, cfg, |_, r, y| {
        let u = ctrl.output(&[r, y]);
        ctrl.advance(&[r, y]);
        u
    })
}

/// Integral indices and step-response figures of a trace.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StepMetrics {
    pub iae: f64,
    pub ise: f64,
    /// Peak excursion past the reference, percent of the step.
    pub overshoot: f64,
    /// 10 % to 90 % rise time, seconds.
    pub rise_time: f64,
    /// Time after the reference step until the output stays within 2 % of it.
    pub settling_time: f64,
    pub steady_state_error: f64,
    /// When set, every other field is NaN.
    pub diverged: bool,
}

impl StepMetrics {
    fn diverged() -> Self {
        Self {
            iae: f64::NAN,
            ise: f64::NAN,
            overshoot: f64::NAN,
            rise_time: f64::NAN,
            settling_time: f64::NAN,
            steady_state_error: f64::NAN,
            diverged: true,
        }
    }
}

fn trapezoid(times: &[f64], values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    times
        .windows(2)
        .zip(v.windows(2))
        .map(|(t, y)| 0.5 * (t[1] - t[0]) * (y[0] + y[1]))
        .sum()
}

/// First time at or after `from` where `y` reaches `level`, linearly
/// interpolated between samples.
fn first_crossing(times: &[f64], y: &[f64], from: usize, level: f64) -> Option<f64> {
    if y.get(from).is_some_and(|&v| v >= level) {
        return Some(times[from]);
    }
    (from + 1..y.len()).find(|&i| y[i] >= level).map(|i| {
        let (y0, y1) = (y[i - 1], y[i]);
        let frac = if y1 == y0 {
            0.0
        } else {
            (level - y0) / (y1 - y0)
        };
        times[i - 1] + frac * (times[i] - times[i - 1])
    })
}

/// Figures of merit for a reference-step run.
///
/// IAE and ISE are trapezoid integrals over the whole trace. Overshoot, rise
/// and settling are measured on the output relative to the reference step in
/// `cfg` (NaN when the reference amplitude is zero or the event never
/// happens). A load disturbance arriving after the reference step ends that
/// window, so its transient does not count as overshoot.
pub fn metrics(trace: &StepTrace, cfg: &SimConfig) -> StepMetrics {
    if trace.diverged || trace.is_empty() {
        return StepMetrics::diverged();
    }
    let iae = trapezoid(&trace.times, trace.error.iter().map(|e| e.abs()));
    let ise = trapezoid(&trace.times, trace.error.iter().map(|e| e * e));
    let steady_state_error = *trace.error.last().unwrap_or(&f64::NAN);
    let r = cfg.reference.amplitude;
    let start = cfg.reference.start;
    if r == 0.0 {
        return StepMetrics {
            iae,
            ise,
            overshoot: 0.0,
            rise_time: f64::NAN,
            settling_time: f64::NAN,
            steady_state_error,
            diverged: false,
        };
    }
    let from = trace.times.partition_point(|&t| t < start - 1e-12);
    let d = cfg.disturbance;
    let end = if d.amplitude != 0.0 && d.start > start {
        trace.times.partition_point(|&t| t < d.start - 1e-12)
    } else {
        trace.len()
    };
    // normalize so the step is +1
    let y: Vec<f64> = trace.output[..end].iter().map(|v| v / r).collect();
    let peak = y[from..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let overshoot = ((peak - 1.0) * 100.0).max(0.0);
    let rise_time = match (
        first_crossing(&trace.times, &y, from, 0.1),
        first_crossing(&trace.times, &y, from, 0.9),
    ) {
        (Some(a), Some(b)) => b - a,
        _ => f64::NAN,
    };
    let last_out = (from..y.len()).rev().find(|&i| (y[i] - 1.0).abs() > 0.02);
    let settling_time = match last_out {
        None => 0.0,
        Some(i) if i + 1 < y.len() => trace.times[i + 1] - start,
        Some(_) => f64::NAN,
    };
    StepMetrics {
        iae,
        ise,
        overshoot,
        rise_time,
        settling_time,
        steady_state_error,
        diverged: false,
    }
}
