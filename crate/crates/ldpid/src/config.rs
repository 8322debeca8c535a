//! Flat `key = value` configuration files.
//!
//! Entries are separated by newlines or `;`, `#` starts a comment, lists are
//! written `[a, b, c]`. Keys are case-insensitive. Every key must be consumed
//! by the reader, so a misspelled key is an error rather than a silent
//! default.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use ldpid_core::ldpid::LdpidParams;
use ldpid_core::lti::ContinuousPlant;
use ldpid_core::sim::{SimConfig, StepInput};
use ldpid_core::tuning::{
    IntegralSpec, Interval, ParamBounds, PerformanceIndex, PhaseTarget, TuningSpec,
};
use serde::{Deserialize, Serialize};

use crate::controller::ControllerConfig;

/// Bad input from the user: a malformed file, a missing or unknown key, or a
/// value the library rejects.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub(crate) fn usage(msg: impl Into<String>) -> UsageError {
    UsageError(msg.into())
}

type Result<T> = std::result::Result<T, UsageError>;

/// Parsed entries of one configuration file.
#[derive(Debug)]
pub struct KeyValues {
    source: String,
    entries: BTreeMap<String, String>,
    used: RefCell<BTreeSet<String>>,
}

impl KeyValues {
    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("");
            for item in line.split(';') {
                let item = item.trim();
                if item.is_empty() {
                    continue;
                }
                let (key, value) = item.split_once('=').ok_or_else(|| {
                    usage(format!(
                        "{source}:{}: expected `key = value`, found `{item}`",
                        lineno + 1
                    ))
                })?;
                let key = key.trim().to_ascii_lowercase();
                if key.is_empty() {
                    return Err(usage(format!("{source}:{}: empty key", lineno + 1)));
                }
                if entries
                    .insert(key.clone(), value.trim().to_string())
                    .is_some()
                {
                    return Err(usage(format!("{source}: key `{key}` given twice")));
                }
            }
        }
        Ok(Self {
            source: source.to_string(),
            entries,
            used: RefCell::new(BTreeSet::new()),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    fn raw(&self, key: &str) -> Option<&str> {
        let v = self.entries.get(key)?;
        self.used.borrow_mut().insert(key.to_string());
        Some(v)
    }

    fn bad(&self, key: &str, what: &str) -> UsageError {
        usage(format!("{}: `{key}` {what}", self.source))
    }

    pub fn has(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn str(&self, key: &str) -> Option<String> {
        self.raw(key).map(str::to_string)
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>> {
        self.raw(key)
            .map(|v| parse_number(v).ok_or_else(|| self.bad(key, "must be a finite number")))
            .transpose()
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.f64(key)?.unwrap_or(default))
    }

    pub fn require_f64(&self, key: &str) -> Result<f64> {
        self.f64(key)?.ok_or_else(|| self.bad(key, "is required"))
    }

    pub fn u64(&self, key: &str) -> Result<Option<u64>> {
        self.raw(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| self.bad(key, "must be a non-negative integer"))
            })
            .transpose()
    }

    pub fn usize(&self, key: &str) -> Result<Option<usize>> {
        Ok(self.u64(key)?.map(|v| v as usize))
    }

    pub fn require_usize(&self, key: &str) -> Result<usize> {
        self.usize(key)?.ok_or_else(|| self.bad(key, "is required"))
    }

    /// A flag value wins over the file; the file value is still checked.
    pub fn f64_or_flag(&self, key: &str, flag: Option<f64>) -> Result<f64> {
        let file = self.f64(key)?;
        flag.or(file).ok_or_else(|| self.bad(key, "is required"))
    }

    pub fn usize_or_flag(&self, key: &str, flag: Option<usize>) -> Result<usize> {
        let file = self.usize(key)?;
        flag.or(file).ok_or_else(|| self.bad(key, "is required"))
    }

    pub fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        let Some(v) = self.raw(key) else {
            return Ok(None);
        };
        let inner = v
            .strip_prefix('[')
            .and_then(|v| v.strip_suffix(']'))
            .ok_or_else(|| self.bad(key, "must be a list like [1, 2]"))?;
        if inner.trim().is_empty() {
            return Ok(Some(Vec::new()));
        }
        inner
            .split(',')
            .map(|x| parse_number(x.trim()).ok_or_else(|| self.bad(key, "has a non-numeric entry")))
            .collect::<Result<Vec<f64>>>()
            .map(Some)
    }

    pub fn interval(&self, key: &str) -> Result<Option<Interval>> {
        match self.list(key)? {
            None => Ok(None),
            Some(v) if v.len() == 2 => Ok(Some([v[0], v[1]])),
            Some(_) => Err(self.bad(key, "must be a two-element range [lo, hi]")),
        }
    }

    /// Fails if any key was never read.
    pub fn finish(&self) -> Result<()> {
        let used = self.used.borrow();
        let unknown: Vec<&str> = self
            .entries
            .keys()
            .filter(|k| !used.contains(*k))
            .map(String::as_str)
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(usage(format!(
                "{}: unknown key(s): {}",
                self.source,
                unknown.join(", ")
            )))
        }
    }
}

fn parse_number(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Plant as written in a configuration: `num`, `den`, optional `delay`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantConfig {
    pub num: Vec<f64>,
    pub den: Vec<f64>,
    #[serde(default)]
    pub delay: f64,
}

impl PlantConfig {
    pub fn read(kv: &KeyValues) -> Result<Self> {
        let cfg = Self {
            num: kv
                .list("num")?
                .ok_or_else(|| kv.bad("num", "is required"))?,
            den: kv
                .list("den")?
                .ok_or_else(|| kv.bad("den", "is required"))?,
            delay: kv.f64_or("delay", 0.0)?,
        };
        kv.finish()?;
        cfg.build()?;
        Ok(cfg)
    }

    pub fn build(&self) -> Result<ContinuousPlant> {
        ContinuousPlant::new(&self.num, &self.den, self.delay)
            .map_err(|e| usage(format!("plant: {e}")))
    }
}

impl From<&ContinuousPlant> for PlantConfig {
    fn from(p: &ContinuousPlant) -> Self {
        Self {
            num: p.num().to_vec(),
            den: p.den().to_vec(),
            delay: p.delay(),
        }
    }
}

/// Command-line values that take precedence over configuration files.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub budget: Option<usize>,
    pub period: Option<f64>,
    pub m: Option<usize>,
    pub substeps: Option<usize>,
}

fn read_bounds(kv: &KeyValues) -> Result<ParamBounds> {
    let mut b = ParamBounds::default();
    for (key, slot) in [
        ("kp", &mut b.kp),
        ("kd", &mut b.kd),
        ("ki", &mut b.ki),
        ("mu", &mut b.mu),
        ("lambda", &mut b.lambda),
    ] {
        if let Some(iv) = kv.interval(key)? {
            *slot = iv;
        }
    }
    Ok(b)
}

/// Frequency-domain tuning targets.
///
/// Keys: `omega_c`, `phi_m`, `A`, `omega_t`, `B`, `omega_s`, `M`, `T`, and
/// optionally `seed`, `budget`, `phase_target` (`equal` or `at-least`),
/// bounds `Kp = [lo, hi]` (likewise `Kd`, `Ki`, `mu`, `lambda`), penalty
/// weights `w_phase`, `w_flat`, `w_sensitivity`, and
/// `grid_points_per_decade`.
pub fn read_tuning_spec(kv: &KeyValues, o: &Overrides) -> Result<TuningSpec> {
    let mut spec = TuningSpec::new(
        kv.require_f64("omega_c")?,
        kv.require_f64("phi_m")?,
        (kv.require_f64("a")?, kv.require_f64("omega_t")?),
        (kv.require_f64("b")?, kv.require_f64("omega_s")?),
        kv.usize_or_flag("m", o.m)?,
        kv.f64_or_flag("t", o.period)?,
    );
    spec.bounds = read_bounds(kv)?;
    spec.seed = kv.u64("seed")?.unwrap_or(spec.seed);
    spec.budget = kv.usize("budget")?.unwrap_or(spec.budget);
    spec.phase_target = match kv.str("phase_target").as_deref() {
        None | Some("equal") => PhaseTarget::Equal,
        Some("at-least") => PhaseTarget::AtLeast,
        Some(other) => {
            return Err(kv.bad(
                "phase_target",
                &format!("must be `equal` or `at-least`, not `{other}`"),
            ))
        }
    };
    spec.weights.phase = kv.f64_or("w_phase", spec.weights.phase)?;
    spec.weights.flat_phase = kv.f64_or("w_flat", spec.weights.flat_phase)?;
    spec.weights.sensitivity = kv.f64_or("w_sensitivity", spec.weights.sensitivity)?;
    spec.grid_points_per_decade = kv
        .usize("grid_points_per_decade")?
        .unwrap_or(spec.grid_points_per_decade);
    kv.finish()?;
    if let Some(seed) = o.seed {
        spec.seed = seed;
    }
    if let Some(budget) = o.budget {
        spec.budget = budget;
    }
    spec.validate().map_err(|e| usage(format!("spec: {e}")))?;
    Ok(spec)
}

/// Integral-index tuning.
///
/// Keys: `index` (`IAE` or `ISE`), `M`, `T`, `duration`, and optionally
/// `substeps`, `reference`, `reference_at`, `disturbance`, `disturbance_at`,
/// `seed`, `budget` and the parameter bounds.
pub fn read_integral_spec(kv: &KeyValues, o: &Overrides) -> Result<IntegralSpec> {
    let index = match kv.str("index").map(|s| s.to_ascii_lowercase()).as_deref() {
        Some("iae") => PerformanceIndex::Iae,
        Some("ise") => PerformanceIndex::Ise,
        _ => return Err(kv.bad("index", "must be IAE or ISE")),
    };
    let scenario = read_scenario(kv, o, None)?;
    let m = kv.usize_or_flag("m", o.m)?;
    let mut spec = IntegralSpec::new(index, scenario, m);
    spec.bounds = read_bounds(kv)?;
    spec.seed = o.seed.or(kv.u64("seed")?).unwrap_or(spec.seed);
    spec.budget = o.budget.or(kv.usize("budget")?).unwrap_or(spec.budget);
    kv.finish()?;
    spec.bounds
        .validate()
        .map_err(|e| usage(format!("spec: {e}")))?;
    if spec.budget == 0 {
        return Err(usage("budget must be at least 1"));
    }
    Ok(spec)
}

/// Scenario keys shared by simulation and integral tuning. `period` is the
/// controller's when one is known.
pub fn read_scenario(kv: &KeyValues, o: &Overrides, period: Option<f64>) -> Result<SimConfig> {
    let file_period = kv.f64("t")?;
    let period = o
        .period
        .or(period)
        .or(file_period)
        .ok_or_else(|| kv.bad("t", "is required"))?;
    let cfg = SimConfig {
        period,
        substeps: o.substeps.or(kv.usize("substeps")?).unwrap_or(10),
        duration: kv.require_f64("duration")?,
        reference: StepInput {
            amplitude: kv.f64_or("reference", 1.0)?,
            start: kv.f64_or("reference_at", 0.0)?,
        },
        disturbance: StepInput {
            amplitude: kv.f64_or("disturbance", 0.0)?,
            start: kv.f64_or("disturbance_at", 0.0)?,
        },
    };
    cfg.validate()
        .map_err(|e| usage(format!("scenario: {e}")))?;
    Ok(cfg)
}

/// Controller file.
///
/// `kind = ldpid` takes `Kp`, `Kd`, `Ki`, `mu`, `M`, `T` and either `lambda`
/// or `integral_order` (`1 - lambda`, the order of the printed integral
/// series). `kind = fopid` takes `Kp`, `Ki`, `Kd`, `lambda`, `mu` (orders
/// default to 1) and, to run in a sampled loop, `omega_c`, `M`, `T`.
/// `kind = tustin-pid` takes `Kp`, `Ki`, `Kd`, `omega_c`, `T`.
pub fn read_controller(kv: &KeyValues, o: &Overrides) -> Result<ControllerConfig> {
    let period = |kv: &KeyValues| kv.f64_or_flag("t", o.period);
    let cfg = match kv.str("kind").as_deref().unwrap_or("ldpid") {
        "ldpid" => {
            let m = kv.usize_or_flag("m", o.m)?;
            let (kp, kd, ki, mu) = (
                kv.require_f64("kp")?,
                kv.f64_or("kd", 0.0)?,
                kv.f64_or("ki", 0.0)?,
                kv.f64_or("mu", 1.0)?,
            );
            let lambda = match (kv.f64("lambda")?, kv.f64("integral_order")?) {
                (Some(_), Some(_)) => {
                    return Err(usage("give either `lambda` or `integral_order`, not both"))
                }
                (Some(l), None) => l,
                (None, Some(order)) => 1.0 - order,
                (None, None) => 1.0,
            };
            ControllerConfig::Ldpid(LdpidParams {
                kp,
                kd,
                ki,
                mu,
                lambda,
                m,
                period: period(kv)?,
            })
        }
        "fopid" => {
            let sampled = kv.has("omega_c") || kv.has("t") || kv.has("m") || o.period.is_some();
            ControllerConfig::Fopid {
                kp: kv.require_f64("kp")?,
                ki: kv.f64_or("ki", 0.0)?,
                kd: kv.f64_or("kd", 0.0)?,
                lambda: kv.f64_or("lambda", 1.0)?,
                mu: kv.f64_or("mu", 1.0)?,
                sampling: if sampled {
                    Some(crate::controller::Sampling {
                        omega_c: kv.require_f64("omega_c")?,
                        m: kv.usize_or_flag("m", o.m)?,
                        period: period(kv)?,
                    })
                } else {
                    None
                },
            }
        }
        "tustin-pid" => ControllerConfig::TustinPid {
            kp: kv.require_f64("kp")?,
            ki: kv.f64_or("ki", 0.0)?,
            kd: kv.f64_or("kd", 0.0)?,
            omega_c: kv.require_f64("omega_c")?,
            period: period(kv)?,
        },
        other => return Err(usage(format!("unknown controller kind `{other}`"))),
    };
    kv.finish()?;
    cfg.build().map_err(|e| usage(format!("controller: {e}")))?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separators_comments_and_lists() {
        let kv = KeyValues::parse(
            "num = [2] ; den=[10, 1]\n# comment\ndelay = 3 # trailing\n",
            "t",
        )
        .unwrap();
        let p = PlantConfig::read(&kv).unwrap();
        assert_eq!(p.num, [2.0]);
        assert_eq!(p.den, [10.0, 1.0]);
        assert_eq!(p.delay, 3.0);
    }

    #[test]
    fn unknown_and_duplicate_keys() {
        let kv = KeyValues::parse("num=[1]; den=[1,1]; dealy=2", "t").unwrap();
        assert!(PlantConfig::read(&kv).unwrap_err().0.contains("dealy"));
        assert!(KeyValues::parse("a=1; a=2", "t").is_err());
        assert!(KeyValues::parse("just text", "t").is_err());
    }

    #[test]
    fn keys_are_case_insensitive() {
        let kv = KeyValues::parse(
            "Kp=2.8; Kd=1.5; mu=1.03; Ki=0.004; integral_order=-0.1; M=5; T=0.1",
            "t",
        )
        .unwrap();
        let ControllerConfig::Ldpid(p) = read_controller(&kv, &Overrides::default()).unwrap()
        else {
            panic!("expected an LDPID");
        };
        assert_eq!(p.m, 5);
        assert!((p.lambda - 1.1).abs() < 1e-15);
    }

    #[test]
    fn overrides_win() {
        let kv = KeyValues::parse("kp=1; m=5; t=0.1", "t").unwrap();
        let o = Overrides {
            m: Some(9),
            period: Some(0.2),
            ..Overrides::default()
        };
        let ControllerConfig::Ldpid(p) = read_controller(&kv, &o).unwrap() else {
            panic!("expected an LDPID");
        };
        assert_eq!((p.m, p.period), (9, 0.2));
    }

    #[test]
    fn bad_values_are_usage_errors() {
        for text in [
            "num=[1, x]; den=[1]",
            "num=1; den=[1]",
            "num=[1]; den=[0]",
            "num=[1]; den=[1]; delay=inf",
        ] {
            let kv = KeyValues::parse(text, "t").unwrap();
            assert!(PlantConfig::read(&kv).is_err(), "{text}");
        }
    }

    #[test]
    fn tuning_spec_with_bounds() {
        let text = "omega_c=0.008; phi_m=60; A=-20; omega_t=10; B=-20; omega_s=0.001; M=15; T=1; Kp=[0, 5]; phase_target=at-least";
        let kv = KeyValues::parse(text, "t").unwrap();
        let spec = read_tuning_spec(
            &kv,
            &Overrides {
                seed: Some(4),
                ..Overrides::default()
            },
        )
        .unwrap();
        assert_eq!(spec.bounds.kp, [0.0, 5.0]);
        assert_eq!(spec.seed, 4);
        assert_eq!(spec.phase_target, PhaseTarget::AtLeast);
    }
}
