//! Scripted runs of the five worked examples with their printed controllers.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::Result;
use ldpid_core::presets::*;
use ldpid_core::sim::{metrics, simulate, simulate_2dof, StepMetrics};

use crate::config::usage;
use crate::job::Outcome;
use crate::output::{margin_summary, write_bode, write_json, write_trace, BodeRange};

pub fn run(number: u8, dir: &Path, out: &mut Outcome) -> Result<()> {
    match number {
        1 => example1(dir, out),
        2 => example2(dir, out),
        3 => example3(dir, out),
        4 => example4(dir, out),
        5 => example5(dir, out),
        n => Err(usage(format!("there is no example {n}; choose 1 to 5")).into()),
    }
}

fn metric_line(label: &str, m: &StepMetrics) -> String {
    if m.diverged {
        format!("{label}: diverged")
    } else {
        format!(
            "{label}: IAE = {:.4}, overshoot = {:.2} %, rise = {:.3} s, settling = {:.3} s",
            m.iae, m.overshoot, m.rise_time, m.settling_time
        )
    }
}

/// Gain sweep of the printed `M = 15` controller at `T = 1 s`.
fn example1(dir: &Path, out: &mut Outcome) -> Result<()> {
    let c = example1_ldpid();
    let scenario = example1_scenario();
    let mut all = BTreeMap::new();
    for (tag, gain) in [("k2.75", 2.75), ("k3.13", EXAMPLE1_GAIN), ("k3.75", 3.75)] {
        let trace = simulate(&example1_plant(gain), &mut c.runtime(), &scenario)?;
        write_trace(&out.file(dir, &format!("trace_{tag}.csv")), &trace)?;
        let m = metrics(&trace, &scenario);
        out.summary.push(metric_line(&format!("K = {gain}"), &m));
        all.insert(tag, m);
    }
    write_json(&out.file(dir, "metrics.json"), &all)?;
    let m = write_bode(
        &out.file(dir, "bode.csv"),
        &c,
        example1_plant(EXAMPLE1_GAIN),
        &BodeRange::new(1e-5, 1e2),
    )?;
    out.summary.push(margin_summary("nominal loop", m.as_ref()));
    Ok(())
}

/// Continuous PID, its Tustin image and the printed LDPID on the same plant.
fn example2(dir: &Path, out: &mut Outcome) -> Result<()> {
    let plant = example2_plant();
    let scenario = example2_scenario();
    let range = BodeRange::new(1e-3, 30.0);

    let m = write_bode(
        &out.file(dir, "bode_pid_continuous.csv"),
        example2_pid(),
        &plant,
        &range,
    )?;
    out.summary
        .push(margin_summary("continuous PID loop", m.as_ref()));

    let tustin = example2_tustin_pid();
    let ldpid = example2_ldpid();
    let t_tustin = simulate(&plant, &mut tustin.runtime(), &scenario)?;
    let t_ldpid = simulate(&plant, &mut ldpid.runtime(), &scenario)?;
    write_trace(&out.file(dir, "trace_tustin_pid.csv"), &t_tustin)?;
    write_trace(&out.file(dir, "trace_ldpid.csv"), &t_ldpid)?;
    let m_tustin = metrics(&t_tustin, &scenario);
    let m_ldpid = metrics(&t_ldpid, &scenario);
    out.summary.push(metric_line("Tustin PID", &m_tustin));
    out.summary.push(metric_line("LDPID", &m_ldpid));
    write_json(
        &out.file(dir, "metrics.json"),
        &BTreeMap::from([("ldpid", m_ldpid), ("tustin_pid", m_tustin)]),
    )?;

    let m = write_bode(&out.file(dir, "bode_ldpid.csv"), &ldpid, &plant, &range)?;
    out.summary.push(margin_summary("LDPID loop", m.as_ref()));
    Ok(())
}

/// LDPD on the flexible, integrating plant.
fn example3(dir: &Path, out: &mut Outcome) -> Result<()> {
    let plant = example3_plant();
    let c = example3_ldpd();
    let scenario = example3_scenario();
    let trace = simulate(&plant, &mut c.runtime(), &scenario)?;
    write_trace(&out.file(dir, "trace.csv"), &trace)?;
    let m = metrics(&trace, &scenario);
    out.summary.push(metric_line("LDPD", &m));
    write_json(&out.file(dir, "metrics.json"), &m)?;
    let margins = write_bode(
        &out.file(dir, "bode.csv"),
        &c,
        &plant,
        &BodeRange::new(1e-2, 60.0),
    )?;
    out.summary.push(margin_summary("loop", margins.as_ref()));
    Ok(())
}

/// Reference step and load disturbance against the AMIGO 2-DOF comparator.
fn example4(dir: &Path, out: &mut Outcome) -> Result<()> {
    let plant = example4_plant();
    let scenario = example4_scenario();
    let c = example4_ldpid();
    let t_ldpid = simulate(&plant, &mut c.runtime(), &scenario)?;
    let t_amigo = simulate_2dof(&plant, &example4_amigo(), &scenario)?;
    write_trace(&out.file(dir, "trace_ldpid.csv"), &t_ldpid)?;
    write_trace(&out.file(dir, "trace_amigo.csv"), &t_amigo)?;
    let m_ldpid = metrics(&t_ldpid, &scenario);
    let m_amigo = metrics(&t_amigo, &scenario);
    out.summary.push(metric_line("LDPID", &m_ldpid));
    out.summary.push(metric_line("AMIGO", &m_amigo));
    write_json(
        &out.file(dir, "metrics.json"),
        &BTreeMap::from([("amigo", m_amigo), ("ldpid", m_ldpid)]),
    )?;
    let m = write_bode(
        &out.file(dir, "bode_ldpid.csv"),
        &c,
        &plant,
        &BodeRange::new(1e-2, 600.0),
    )?;
    out.summary.push(margin_summary("LDPID loop", m.as_ref()));
    Ok(())
}

/// Nominal-model margins of the heater loop, PID against LDPID.
fn example5(dir: &Path, out: &mut Outcome) -> Result<()> {
    let plant = example5_plant();
    let range = BodeRange::new(1e-3, 30.0);
    let m_pid = write_bode(
        &out.file(dir, "bode_pid.csv"),
        example5_pid(),
        &plant,
        &range,
    )?;
    let m_ldpid = write_bode(
        &out.file(dir, "bode_ldpid.csv"),
        example5_ldpid(),
        &plant,
        &range,
    )?;
    out.summary.push(margin_summary("PID loop", m_pid.as_ref()));
    out.summary
        .push(margin_summary("LDPID loop", m_ldpid.as_ref()));
    write_json(
        &out.file(dir, "margins.json"),
        &BTreeMap::from([("ldpid", m_ldpid), ("pid", m_pid)]),
    )?;
    Ok(())
}
