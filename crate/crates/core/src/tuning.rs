//! Controller tuning.
//!
//! Two objectives are provided over the same seeded genetic algorithm:
//!
//! * [`tune_frequency`] drives `|L(j omega_c)|` to one while penalizing the
//!   phase-margin target, a flat phase at `omega_c` and the two sensitivity
//!   bounds.
//! * [`tune_integral`] minimizes IAE or ISE of a simulated scenario.
//!
//! Candidates are vectors `[Kp, Kd, Ki, mu, lambda]`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
// inherent float methods are only visible when std is linked
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{finite, Error};
use crate::ldpid::{LdpidController, LdpidParams};
use crate::lti::{db, log_grid, wrap_angle, ContinuousPlant, FrequencyDomain};
use crate::sim::{metrics, simulate, SimConfig};
use crate::Result;

/// Closed interval `[lo, hi]`; `lo == hi` fixes the parameter.
pub type Interval = [f64; 2];

/// Search box for `[Kp, Kd, Ki, mu, lambda]`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ParamBounds {
    pub kp: Interval,
    pub kd: Interval,
    pub ki: Interval,
    pub mu: Interval,
    pub lambda: Interval,
}

impl Default for ParamBounds {
    /// `Kp, Kd in [0, 10]`, `Ki in [0, 1]`, `mu in [0, 2]`,
    /// `lambda in [-0.5, 2]`. The wide `lambda` range admits integral series
    /// of negative order.
    fn default() -> Self {
        Self {
            kp: [0.0, 10.0],
            kd: [0.0, 10.0],
            ki: [0.0, 1.0],
            mu: [0.0, 2.0],
            lambda: [-0.5, 2.0],
        }
    }
}

impl ParamBounds {
    pub fn as_array(&self) -> [Interval; 5] {
        [self.kp, self.kd, self.ki, self.mu, self.lambda]
    }

    pub fn validate(&self) -> Result<()> {
        validate_bounds(&self.as_array())?;
        if self.mu[0] < 0.0 {
            return Err(Error::invalid("bounds", "mu must be non-negative"));
        }
        Ok(())
    }

    pub fn contains(&self, x: &[f64; 5]) -> bool {
        self.as_array()
            .iter()
            .zip(x)
            .all(|(b, v)| (b[0]..=b[1]).contains(v))
    }
}

fn validate_bounds(bounds: &[Interval]) -> Result<()> {
    if bounds.is_empty() {
        return Err(Error::invalid("bounds", "at least one dimension required"));
    }
    for b in bounds {
        finite("bound", b[0])?;
        finite("bound", b[1])?;
        if b[0] > b[1] {
            return Err(Error::invalid("bounds", "lower bound exceeds upper bound"));
        }
    }
    Ok(())
}

/// Genetic-algorithm settings.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GaConfig {
    pub population: usize,
    /// Share of each generation copied unchanged, at least one individual.
    pub elite_fraction: f64,
    pub tournament_size: usize,
    /// BLX-alpha blend: children are drawn from the parents' span widened by
    /// `alpha` times its length on both sides.
    pub blend_alpha: f64,
    /// Per-gene mutation probability.
    pub mutation_rate: f64,
    /// Initial mutation standard deviation as a fraction of each range.
    pub mutation_sigma: f64,
    /// Multiplier applied to the mutation width every generation.
    pub sigma_decay: f64,
    /// Generations without relative improvement above `stall_tolerance`
    /// after which the run counts as converged.
    pub stall_generations: usize,
    pub stall_tolerance: f64,
    /// Run a local Nelder-Mead search every this many generations; zero
    /// disables it.
    pub local_search_every: usize,
    /// Evaluations granted to each local search.
    pub local_search_evals: usize,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population: 50,
            elite_fraction: 0.1,
            tournament_size: 2,
            blend_alpha: 0.5,
            mutation_rate: 0.2,
            mutation_sigma: 0.05,
            sigma_decay: 0.99,
            stall_generations: 30,
            stall_tolerance: 1e-9,
            local_search_every: 20,
            local_search_evals: 2000,
        }
    }
}

impl GaConfig {
    fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::invalid("population", "must be at least 2"));
        }
        if !(0.0..1.0).contains(&self.elite_fraction) {
            return Err(Error::invalid("elite_fraction", "must lie in [0, 1)"));
        }
        if self.tournament_size == 0 {
            return Err(Error::invalid("tournament_size", "must be at least 1"));
        }
        for (name, v) in [
            ("blend_alpha", self.blend_alpha),
            ("mutation_rate", self.mutation_rate),
            ("mutation_sigma", self.mutation_sigma),
            ("sigma_decay", self.sigma_decay),
            ("stall_tolerance", self.stall_tolerance),
        ] {
            if finite(name, v)? < 0.0 {
                return Err(Error::invalid(name, "must be non-negative"));
            }
        }
        Ok(())
    }
}

/// Outcome of [`optimize`].
#[derive(Debug, Clone, PartialEq)]
pub struct OptimResult {
    pub best: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub generations: usize,
    /// The best value stopped improving for `stall_generations` generations.
    pub converged: bool,
}

#[derive(Clone)]
struct Individual {
    genes: Vec<f64>,
    value: f64,
}

/// NaN ranks as `+inf`.
fn score(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

fn uniform(rng: &mut ChaCha8Rng, b: Interval) -> f64 {
    b[0] + (b[1] - b[0]) * rng.gen::<f64>()
}

fn tournament<'p>(rng: &mut ChaCha8Rng, pop: &'p [Individual], size: usize) -> &'p Individual {
    let mut best = &pop[rng.gen_range(0..pop.len())];
    for _ in 1..size {
        let other = &pop[rng.gen_range(0..pop.len())];
        if other.value < best.value {
            best = other;
        }
    }
    best
}

/// Budget-capped evaluation with best-so-far tracking.
struct Evaluator<F> {
    objective: F,
    budget: usize,
    evaluations: usize,
    best: Option<Individual>,
}

impl<F: FnMut(&[f64]) -> f64> Evaluator<F> {
    fn exhausted(&self) -> bool {
        self.evaluations >= self.budget
    }

    /// `None` once the budget is spent.
    fn eval(&mut self, genes: Vec<f64>) -> Option<Individual> {
        if self.exhausted() {
            return None;
        }
        let value = score((self.objective)(&genes));
        self.evaluations += 1;
        let ind = Individual { genes, value };
        if self.best.as_ref().is_none_or(|b| value < b.value) {
            self.best = Some(ind.clone());
        }
        Some(ind)
    }
}

/// Bounded Nelder-Mead from `start` with initial edge `steps[i]` along each
/// free coordinate, stopping after `max_evals` evaluations.
fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    ev: &mut Evaluator<F>,
    start: &Individual,
    bounds: &[Interval],
    steps: &[f64],
    max_evals: usize,
) -> Option<Individual> {
    let stop = ev.evaluations + max_evals;
    let clamp = |x: Vec<f64>| -> Vec<f64> {
        x.into_iter()
            .zip(bounds)
            .map(|(v, b)| v.clamp(b[0], b[1]))
            .collect()
    };
    let mut simplex = vec![start.clone()];
    for (i, (&step, b)) in steps.iter().zip(bounds).enumerate() {
        if step <= 0.0 || ev.evaluations >= stop {
            continue;
        }
        let mut x = start.genes.clone();
        x[i] = if x[i] + step <= b[1] {
            x[i] + step
        } else {
            x[i] - step
        };
        simplex.push(ev.eval(clamp(x))?);
    }
    let n = simplex.len();
    if n < 2 {
        return None;
    }
    let dim = start.genes.len();
    while ev.evaluations < stop {
        simplex.sort_by(|a, b| a.value.total_cmp(&b.value));
        let worst = simplex[n - 1].clone();
        let mut centroid = vec![0.0; dim];
        for p in &simplex[..n - 1] {
            for (c, g) in centroid.iter_mut().zip(&p.genes) {
                *c += g / (n - 1) as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&worst.genes)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };
        let reflected = ev.eval(clamp(along(1.0)))?;
        if reflected.value < simplex[0].value {
            let expanded = ev.eval(clamp(along(2.0)))?;
            simplex[n - 1] = if expanded.value < reflected.value {
                expanded
            } else {
                reflected
            };
        } else if reflected.value < simplex[n - 2].value {
            simplex[n - 1] = reflected;
        } else {
            let t = if reflected.value < worst.value {
                0.5
            } else {
                -0.5
            };
            let contracted = ev.eval(clamp(along(t)))?;
            if contracted.value < worst.value.min(reflected.value) {
                simplex[n - 1] = contracted;
            } else {
                let anchor = simplex[0].genes.clone();
                for p in simplex.iter_mut().skip(1) {
                    let x = anchor
                        .iter()
                        .zip(&p.genes)
                        .map(|(a, g)| a + 0.5 * (g - a))
                        .collect();
                    *p = ev.eval(x)?;
                }
            }
        }
    }
    simplex
        .into_iter()
        .min_by(|a, b| a.value.total_cmp(&b.value))
}

/// Minimizes `objective` over the box `bounds` with a seeded genetic
/// algorithm, using at most `budget` evaluations.
///
/// Each generation keeps its elite, then fills the rest by tournament
/// selection, blend crossover and Gaussian mutation (clamped to the box).
/// Every `local_search_every` generations a short Nelder-Mead run starts
/// from the best point and its result replaces the worst individual.
///
/// Nothing in the search depends on the budget other than where it stops,
/// so a smaller budget evaluates a prefix of the candidates a larger one
/// would. With the same seed the result is therefore bit-identical and the
/// best value never gets worse as the budget grows.
pub fn optimize<F>(
    objective: F,
    bounds: &[Interval],
    seed: u64,
    budget: usize,
    config: &GaConfig,
) -> Result<OptimResult>
where
    F: FnMut(&[f64]) -> f64,
{
    validate_bounds(bounds)?;
    config.validate()?;
    if budget == 0 {
        return Err(Error::invalid("budget", "must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ev = Evaluator {
        objective,
        budget,
        evaluations: 0,
        best: None,
    };

    let initial: Vec<Vec<f64>> = (0..config.population)
        .map(|_| bounds.iter().map(|&b| uniform(&mut rng, b)).collect())
        .collect();
    let mut pop: Vec<Individual> = initial.into_iter().map_while(|g| ev.eval(g)).collect();

    let elites = ((config.elite_fraction * config.population as f64).round() as usize)
        .clamp(1, config.population - 1);
    let mut sigma_scale = config.mutation_sigma;
    let mut generations = 0;
    let mut stall = 0;
    while !ev.exhausted() {
        let reference = ev.best.as_ref().map_or(f64::INFINITY, |b| b.value);
        pop.sort_by(|a, b| a.value.total_cmp(&b.value));
        let mut offspring: Vec<Vec<f64>> = Vec::with_capacity(config.population - elites);
        for _ in elites..config.population {
            let a = tournament(&mut rng, &pop, config.tournament_size);
            let b = tournament(&mut rng, &pop, config.tournament_size);
            let child = bounds
                .iter()
                .enumerate()
                .map(|(i, &bd)| {
                    let (lo, hi) = (a.genes[i].min(b.genes[i]), a.genes[i].max(b.genes[i]));
                    let spread = config.blend_alpha * (hi - lo);
                    let mut g = uniform(&mut rng, [lo - spread, hi + spread]);
                    if rng.gen::<f64>() < config.mutation_rate {
                        let z: f64 = rng.sample(StandardNormal);
                        g += z * sigma_scale * (bd[1] - bd[0]);
                    }
                    g.clamp(bd[0], bd[1])
                })
                .collect();
            offspring.push(child);
        }
        pop.truncate(elites);
        pop.extend(offspring.into_iter().map_while(|g| ev.eval(g)));
        generations += 1;
        sigma_scale *= config.sigma_decay;
        if config.local_search_every > 0 && generations % config.local_search_every == 0 {
            let steps: Vec<f64> = bounds.iter().map(|b| sigma_scale * (b[1] - b[0])).collect();
            let start = ev.best.clone().expect("population evaluated");
            let found = nelder_mead(&mut ev, &start, bounds, &steps, config.local_search_evals);
            if let Some(found) = found {
                pop.sort_by(|a, b| a.value.total_cmp(&b.value));
                if let Some(last) = pop.last_mut() {
                    *last = found;
                }
            }
        }
        let now = ev.best.as_ref().map_or(f64::INFINITY, |b| b.value);
        let improved = if reference.is_finite() {
            reference - now > config.stall_tolerance * (1.0 + reference.abs())
        } else {
            now < reference
        };
        stall = if improved { 0 } else { stall + 1 };
    }
    let best = ev
        .best
        .expect("budget >= 1 evaluates at least one candidate");
    Ok(OptimResult {
        best: best.genes,
        value: best.value,
        evaluations: ev.evaluations,
        generations,
        converged: stall >= config.stall_generations,
    })
}

/// How the phase-margin target is enforced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum PhaseTarget {
    /// `phi_m` exactly.
    #[default]
    Equal,
    /// `phi_m` or more.
    AtLeast,
}

/// Exterior penalty weights for [`tune_frequency`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PenaltyWeights {
    /// Per rad² of phase-margin error.
    pub phase: f64,
    /// Per (rad s)² of phase slope at the crossover.
    pub flat_phase: f64,
    /// Per dB of excess over each sensitivity bound.
    pub sensitivity: f64,
}

impl Default for PenaltyWeights {
    fn default() -> Self {
        Self {
            phase: 10.0,
            flat_phase: 1e4,
            sensitivity: 1.0,
        }
    }
}

/// Frequency-domain design targets.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TuningSpec {
    /// Desired gain crossover, rad/s.
    pub omega_c: f64,
    /// Desired phase margin, degrees.
    pub phi_m: f64,
    /// `|T| <= noise_db` for `omega >= omega_t`.
    pub noise_db: f64,
    pub omega_t: f64,
    /// `|S| <= disturbance_db` for `omega <= omega_s`.
    pub disturbance_db: f64,
    pub omega_s: f64,
    #[cfg_attr(feature = "serde", serde(rename = "M"))]
    pub m: usize,
    #[cfg_attr(feature = "serde", serde(rename = "T"))]
    pub period: f64,
    pub bounds: ParamBounds,
    pub seed: u64,
    pub budget: usize,
    #[cfg_attr(feature = "serde", serde(default))]
    pub phase_target: PhaseTarget,
    #[cfg_attr(feature = "serde", serde(default))]
    pub weights: PenaltyWeights,
    /// Density of the grids on which the sensitivity bounds are checked:
    /// `[omega_s / 10, omega_s]` and `[omega_t, 10 omega_t]`.
    #[cfg_attr(feature = "serde", serde(default = "default_grid_density"))]
    pub grid_points_per_decade: usize,
    #[cfg_attr(feature = "serde", serde(default))]
    pub ga: GaConfig,
}

/// Points per decade of the constraint grids unless set otherwise.
pub const DEFAULT_GRID_DENSITY: usize = 500;

#[cfg(feature = "serde")]
fn default_grid_density() -> usize {
    DEFAULT_GRID_DENSITY
}

/// Relative step of the central difference for the phase slope.
pub const PHASE_SLOPE_STEP: f64 = 1e-3;

impl TuningSpec {
    /// Targets with default bounds, weights, grid density and optimizer
    /// settings, seed 0 and a budget of 20 000 evaluations.
    pub fn new(
        omega_c: f64,
        phi_m: f64,
        noise: (f64, f64),
        disturbance: (f64, f64),
        m: usize,
        period: f64,
    ) -> Self {
        Self {
            omega_c,
            phi_m,
            noise_db: noise.0,
            omega_t: noise.1,
            disturbance_db: disturbance.0,
            omega_s: disturbance.1,
            m,
            period,
            bounds: ParamBounds::default(),
            seed: 0,
            budget: 20_000,
            phase_target: PhaseTarget::Equal,
            weights: PenaltyWeights::default(),
            grid_points_per_decade: DEFAULT_GRID_DENSITY,
            ga: GaConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("omega_c", self.omega_c),
            ("phi_m", self.phi_m),
            ("noise_db", self.noise_db),
            ("omega_t", self.omega_t),
            ("disturbance_db", self.disturbance_db),
            ("omega_s", self.omega_s),
            ("T", self.period),
        ] {
            finite(name, v)?;
        }
        if !(0.0 < self.omega_s && self.omega_s < self.omega_c && self.omega_c < self.omega_t) {
            return Err(Error::invalid(
                "spec",
                "need 0 < omega_s < omega_c < omega_t",
            ));
        }
        if self.period <= 0.0 {
            return Err(Error::invalid("T", "sampling period must be positive"));
        }
        if self.budget == 0 {
            return Err(Error::invalid("budget", "must be at least 1"));
        }
        if self.grid_points_per_decade == 0 {
            return Err(Error::invalid(
                "grid_points_per_decade",
                "must be at least 1",
            ));
        }
        self.bounds.validate()?;
        self.ga.validate()
    }
}

/// Signed residuals of the five design conditions for one controller.
///
/// Equalities are satisfied at zero. The two bounds are satisfied when their
/// residual is at most zero.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConstraintReport {
    /// `|L(j omega_c)| - 1`.
    pub gain: f64,
    /// Achieved minus target phase margin at `omega_c`, radians.
    pub phase_margin: f64,
    /// `d arg L / d omega` at `omega_c`, rad s.
    pub phase_slope: f64,
    /// Worst `|T|` in dB over `[omega_t, 10 omega_t]` minus the bound.
    pub noise: f64,
    /// Worst `|S|` in dB over `[omega_s / 10, omega_s]` minus the bound.
    pub disturbance: f64,
}

impl ConstraintReport {
    /// The quantity being minimized when every constraint holds.
    pub fn raw_objective(&self) -> f64 {
        self.gain.abs()
    }

    /// Raw objective plus exterior penalties.
    pub fn penalized(&self, weights: &PenaltyWeights, target: PhaseTarget) -> f64 {
        let phase = match target {
            PhaseTarget::Equal => self.phase_margin,
            PhaseTarget::AtLeast => self.phase_margin.min(0.0),
        };
        self.raw_objective()
            + weights.phase * phase * phase
            + weights.flat_phase * self.phase_slope * self.phase_slope
            + weights.sensitivity * (self.noise.max(0.0) + self.disturbance.max(0.0))
    }

    /// Achieved phase margin in degrees given the target it was measured
    /// against.
    pub fn phase_margin_deg(&self, target_deg: f64) -> f64 {
        target_deg + self.phase_margin.to_degrees()
    }
}

/// Precomputed plant responses and `z^-1` values on the constraint grids.
struct LoopEvaluator {
    spec: TuningSpec,
    // (omega, w = e^{-j omega T}, P(j omega))
    at_crossover: [(f64, Complex64, Complex64); 3],
    low: Vec<(f64, Complex64, Complex64)>,
    high: Vec<(f64, Complex64, Complex64)>,
}

impl LoopEvaluator {
    fn new(plant: &ContinuousPlant, spec: &TuningSpec) -> Result<Self> {
        spec.validate()?;
        let point = |omega: f64| -> Result<(f64, Complex64, Complex64)> {
            Ok((
                omega,
                Complex64::from_polar(1.0, -omega * spec.period),
                plant.freq(omega)?,
            ))
        };
        let grid = |lo: f64, hi: f64| -> Result<Vec<_>> {
            log_grid(lo, hi, spec.grid_points_per_decade)?
                .into_iter()
                .map(point)
                .collect()
        };
        let wc = spec.omega_c;
        Ok(Self {
            spec: *spec,
            at_crossover: [
                point(wc * (1.0 - PHASE_SLOPE_STEP))?,
                point(wc)?,
                point(wc * (1.0 + PHASE_SLOPE_STEP))?,
            ],
            low: grid(spec.omega_s / 10.0, spec.omega_s)?,
            high: grid(spec.omega_t, 10.0 * spec.omega_t)?,
        })
    }

    fn loop_at(
        c: &LdpidController,
        &(omega, w, p): &(f64, Complex64, Complex64),
    ) -> Result<Complex64> {
        Ok(c.eval_w(w, omega)? * p)
    }

    fn report(&self, c: &LdpidController) -> Result<ConstraintReport> {
        let spec = &self.spec;
        let [lo, mid, hi] = &self.at_crossover;
        let l = Self::loop_at(c, mid)?;
        let dphi = wrap_angle(Self::loop_at(c, hi)?.arg() - Self::loop_at(c, lo)?.arg());
        let phase_slope = dphi / (hi.0 - lo.0);
        let pm = wrap_angle(l.arg() + PI);
        let mut worst_t = f64::NEG_INFINITY;
        for pt in &self.high {
            let l = Self::loop_at(c, pt)?;
            worst_t = worst_t.max(db((l / (l + 1.0)).norm()));
        }
        let mut worst_s = f64::NEG_INFINITY;
        for pt in &self.low {
            let l = Self::loop_at(c, pt)?;
            worst_s = worst_s.max(db((l + 1.0).inv().norm()));
        }
        let nan_to_inf = |v: f64| if v.is_nan() { f64::INFINITY } else { v };
        Ok(ConstraintReport {
            gain: l.norm() - 1.0,
            phase_margin: pm - spec.phi_m.to_radians(),
            phase_slope,
            noise: nan_to_inf(worst_t - spec.noise_db),
            disturbance: nan_to_inf(worst_s - spec.disturbance_db),
        })
    }
}

/// Residuals of `controller` against `spec` on `plant`, computed exactly as
/// [`tune_frequency`] computes them for its candidates.
pub fn constraint_report(
    plant: &ContinuousPlant,
    controller: &LdpidController,
    spec: &TuningSpec,
) -> Result<ConstraintReport> {
    if (controller.period() - spec.period).abs() > 1e-12 * spec.period {
        return Err(Error::PeriodMismatch {
            controller: controller.period(),
            config: spec.period,
        });
    }
    LoopEvaluator::new(plant, spec)?.report(controller)
}

/// Outcome of a tuning run.
#[derive(Debug, Clone, PartialEq)]
pub struct TuningResult {
    pub controller: LdpidController,
    /// Best objective value reached (penalized for frequency tuning, the
    /// performance index or the divergence penalty for integral tuning).
    pub objective: f64,
    /// Present for frequency-domain tuning.
    pub constraint_report: Option<ConstraintReport>,
    pub evaluations: usize,
    pub converged: bool,
}

fn candidate(x: &[f64], m: usize, period: f64) -> LdpidParams {
    LdpidParams {
        kp: x[0],
        kd: x[1],
        ki: x[2],
        mu: x[3],
        lambda: x[4],
        m,
        period,
    }
}

/// Frequency-domain constrained design.
///
/// Minimizes `| |L(j omega_c)| - 1 |` plus quadratic penalties on the phase
/// margin error and on the phase slope `d arg L / d omega` at `omega_c`
/// (central difference, relative step [`PHASE_SLOPE_STEP`]) and linear hinge
/// penalties on the sensitivity bounds, where
/// `L(j omega) = C(e^{j omega T}) P(j omega)`.
///
/// `converged` is set when the optimizer stalled and the returned loop
/// crosses 0 dB within one decade of `omega_c`.
pub fn tune_frequency(plant: &ContinuousPlant, spec: &TuningSpec) -> Result<TuningResult> {
    let eval = LoopEvaluator::new(plant, spec)?;
    let objective = |x: &[f64]| -> f64 {
        LdpidController::new(candidate(x, spec.m, spec.period))
            .and_then(|c| eval.report(&c))
            .map_or(f64::INFINITY, |r| {
                r.penalized(&spec.weights, spec.phase_target)
            })
    };
    let opt = optimize(
        objective,
        &spec.bounds.as_array(),
        spec.seed,
        spec.budget,
        &spec.ga,
    )?;
    let controller = LdpidController::new(candidate(&opt.best, spec.m, spec.period))?;
    let report = eval.report(&controller).ok();
    let crosses = {
        let grid = log_grid(spec.omega_c / 10.0, spec.omega_c * 10.0, 100)?;
        let mags: Vec<f64> = grid
            .iter()
            .filter_map(|&w| Some((controller.freq(w).ok()? * plant.freq(w).ok()?).norm()))
            .collect();
        mags.len() == grid.len() && mags.windows(2).any(|p| (p[0] >= 1.0) != (p[1] >= 1.0))
    };
    Ok(TuningResult {
        controller,
        objective: opt.value,
        constraint_report: report,
        evaluations: opt.evaluations,
        converged: opt.converged && crosses && opt.value.is_finite(),
    })
}

/// Time-domain performance index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum PerformanceIndex {
    #[cfg_attr(feature = "serde", serde(rename = "IAE", alias = "iae"))]
    Iae,
    #[cfg_attr(feature = "serde", serde(rename = "ISE", alias = "ise"))]
    Ise,
}

/// Objective value assigned to candidates whose closed loop diverges.
pub const DIVERGED_PENALTY: f64 = 1e6;

/// Settings of an integral-index tuning run.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IntegralSpec {
    pub index: PerformanceIndex,
    /// Scenario simulated for every candidate. Its period is the controller's.
    pub scenario: SimConfig,
    #[cfg_attr(feature = "serde", serde(rename = "M"))]
    pub m: usize,
    pub bounds: ParamBounds,
    pub seed: u64,
    pub budget: usize,
    #[cfg_attr(feature = "serde", serde(default))]
    pub ga: GaConfig,
}

impl IntegralSpec {
    /// Default bounds and optimizer, seed 0, budget 3000.
    pub fn new(index: PerformanceIndex, scenario: SimConfig, m: usize) -> Self {
        Self {
            index,
            scenario,
            m,
            bounds: ParamBounds::default(),
            seed: 0,
            budget: 3000,
            ga: GaConfig::default(),
        }
    }
}

/// Index of `params` on the scenario, or [`DIVERGED_PENALTY`] if the loop
/// blows up.
pub fn integral_objective(
    plant: &ContinuousPlant,
    params: LdpidParams,
    index: PerformanceIndex,
    scenario: &SimConfig,
) -> Result<f64> {
    let c = LdpidController::new(params)?;
    let trace = simulate(plant, &mut c.runtime(), scenario)?;
    if trace.diverged {
        return Ok(DIVERGED_PENALTY);
    }
    let m = metrics(&trace, scenario);
    let v = match index {
        PerformanceIndex::Iae => m.iae,
        PerformanceIndex::Ise => m.ise,
    };
    Ok(if v.is_finite() {
        v.min(DIVERGED_PENALTY)
    } else {
        DIVERGED_PENALTY
    })
}

/// Minimizes IAE or ISE of the simulated scenario. Diverging candidates score
/// [`DIVERGED_PENALTY`], which stands in for the closed-loop stability
/// constraint.
///
/// `converged` is set when the optimizer stalled and the best candidate does
/// not diverge.
pub fn tune_integral(plant: &ContinuousPlant, spec: &IntegralSpec) -> Result<TuningResult> {
    spec.scenario.validate()?;
    spec.bounds.validate()?;
    let period = spec.scenario.period;
    let objective = |x: &[f64]| -> f64 {
        integral_objective(
            plant,
            candidate(x, spec.m, period),
            spec.index,
            &spec.scenario,
        )
        .unwrap_or(f64::INFINITY)
    };
    let opt = optimize(
        objective,
        &spec.bounds.as_array(),
        spec.seed,
        spec.budget,
        &spec.ga,
    )?;
    let controller = LdpidController::new(candidate(&opt.best, spec.m, period))?;
    Ok(TuningResult {
        controller,
        objective: opt.value,
        constraint_report: None,
        evaluations: opt.evaluations,
        converged: opt.converged && opt.value < DIVERGED_PENALTY,
    })
}
