use std::path::Path;

use anyhow::{Context, Result};
use ldpid_core::lti::{margins_refined, open_loop, FrequencyDomain, FrequencyResponse, Margins};
use ldpid_core::sim::StepTrace;
use ldpid_core::Error;
use serde::{Deserialize, Serialize};

/// Numbers use Rust's shortest round-trip `Display`, which never depends on
/// the locale.
pub fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator,
    I::Item: AsRef<[f64]>,
{
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.as_ref().iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

pub fn write_trace(path: &Path, trace: &StepTrace) -> Result<()> {
    let rows = (0..trace.len()).map(|i| {
        [
            trace.times[i],
            trace.reference[i],
            trace.error[i],
            trace.control[i],
            trace.output[i],
        ]
    });
    write_csv(path, &["t", "r", "e", "u", "y"], rows)
}

/// Frequency grid of a Bode run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BodeRange {
    pub omega_min: f64,
    pub omega_max: f64,
    pub points_per_decade: usize,
}

impl BodeRange {
    pub const fn new(omega_min: f64, omega_max: f64) -> Self {
        Self {
            omega_min,
            omega_max,
            points_per_decade: 200,
        }
    }
}

/// Writes `omega,mag_db,phase_deg,s_db,t_db` for the loop `C P` and returns
/// its margins, or `None` when `|L|` never crosses 0 dB on the grid.
pub fn write_bode<C: FrequencyDomain, P: FrequencyDomain>(
    path: &Path,
    controller: C,
    plant: P,
    range: &BodeRange,
) -> Result<Option<Margins>> {
    let grid =
        ldpid_core::lti::log_grid(range.omega_min, range.omega_max, range.points_per_decade)?;
    let l = open_loop(controller, plant);
    let resp = FrequencyResponse::sample(&l, grid)?;
    let mag = resp.magnitude_db();
    let phase = resp.unwrapped_phase();
    let s = resp.sensitivity();
    let t = resp.complementary_sensitivity();
    let rows = (0..resp.len()).map(|i| {
        [
            resp.omegas()[i],
            mag[i],
            phase[i].to_degrees(),
            ldpid_core::lti::db(s[i].norm()),
            ldpid_core::lti::db(t[i].norm()),
        ]
    });
    write_csv(
        path,
        &["omega", "mag_db", "phase_deg", "s_db", "t_db"],
        rows,
    )?;
    match margins_refined(&l, &resp) {
        Ok(m) => Ok(Some(m)),
        Err(Error::NoCrossover) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

pub fn margin_summary(label: &str, margins: Option<&Margins>) -> String {
    match margins {
        Some(m) => format!(
            "{label}: omega_c = {:.6} rad/s, phi_m = {:.3} deg{}",
            m.omega_c,
            m.phase_margin,
            if m.multiple_crossovers {
                " (multiple crossovers)"
            } else {
                ""
            }
        ),
        None => format!("{label}: crossover absent"),
    }
}
