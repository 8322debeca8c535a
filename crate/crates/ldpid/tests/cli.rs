use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ldpid_core::fracseries::expand_fk;

fn ldpid(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ldpid"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ldpid-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(str::to_string).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn configs(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
        .to_str()
        .unwrap()
        .to_string()
}

#[test]
fn coeffs_half_order_single_tap() {
    let dir = scratch("c1");
    let o = ldpid(&[
        "coeffs",
        "--order",
        "0.5",
        "--M",
        "1",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let (header, rows) = read_csv(&dir.join("coeffs.csv"));
    assert_eq!(header, ["k", "f_k"]);
    assert_eq!(rows, vec![vec![0.0, 1.0], vec![1.0, -1.0]]);
}

#[test]
fn coeffs_zero_order_is_a_unit_impulse() {
    let dir = scratch("c0");
    assert!(ldpid(&[
        "coeffs",
        "--order",
        "0",
        "--M",
        "3",
        "--out",
        dir.to_str().unwrap()
    ])
    .status
    .success());
    let (_, rows) = read_csv(&dir.join("coeffs.csv"));
    let f: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    assert_eq!(f, [1.0, 0.0, 0.0, 0.0]);
}

#[test]
fn coeffs_round_trip_the_library_exactly() {
    let dir = scratch("c8");
    assert!(ldpid(&[
        "coeffs",
        "--order",
        "0.8",
        "--M",
        "5",
        "--out",
        dir.to_str().unwrap()
    ])
    .status
    .success());
    let (_, rows) = read_csv(&dir.join("coeffs.csv"));
    let f: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    assert_eq!(f, expand_fk(0.8, 5).unwrap());
    let text = fs::read_to_string(dir.join("coeffs.csv")).unwrap();
    assert!(!text.contains(';') && text.lines().skip(1).all(|l| l.split(',').count() == 2));
}

#[test]
fn negative_order_is_accepted() {
    let dir = scratch("cneg");
    let o = ldpid(&[
        "coeffs",
        "--order",
        "-0.1",
        "--M",
        "2",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn bode_of_unit_loop_is_flat() {
    let dir = scratch("flat");
    let plant = write(&dir, "p.cfg", "num = [1]\nden = [1]\n");
    let ctrl = write(&dir, "c.cfg", "kind = ldpid\nKp = 1\nM = 0\nT = 1\n");
    let out = dir.join("out");
    let o = ldpid(&[
        "bode",
        "--plant",
        &plant,
        "--controller",
        &ctrl,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("crossover absent"), "{}", stdout(&o));
    let (header, rows) = read_csv(&out.join("bode.csv"));
    assert_eq!(header, ["omega", "mag_db", "phase_deg", "s_db", "t_db"]);
    assert!(!rows.is_empty());
    for r in rows {
        assert!(r[1].abs() < 1e-12 && r[2].abs() < 1e-12, "{r:?}");
    }
}

#[test]
fn bode_summary_for_the_heater_pid() {
    let dir = scratch("b5");
    let o = ldpid(&[
        "bode",
        "--plant",
        &configs("example5_plant.cfg"),
        "--controller",
        &configs("example5_pid.cfg"),
        "--omega-min",
        "1e-3",
        "--omega-max",
        "30",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let s = stdout(&o);
    let phi: f64 = s
        .split("phi_m = ")
        .nth(1)
        .unwrap()
        .split(' ')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!((phi - 73.3).abs() <= 2.0, "{s}");
}

#[test]
fn example1_bode_meets_the_low_frequency_sensitivity_bound() {
    let dir = scratch("e1");
    let o = ldpid(&[
        "bode",
        "--plant",
        &configs("example1_plant.cfg"),
        "--controller",
        &configs("example1_ldpid.cfg"),
        "--omega-min",
        "1e-5",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let (_, rows) = read_csv(&dir.join("bode.csv"));
    let low: Vec<&Vec<f64>> = rows.iter().filter(|r| r[0] <= 1e-3).collect();
    assert!(!low.is_empty());
    assert!(low.iter().all(|r| r[3] <= -20.0));
}

#[test]
fn example3_metrics_file() {
    let dir = scratch("x3");
    assert!(ldpid(&["example", "3", "--out", dir.to_str().unwrap()])
        .status
        .success());
    let m: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("metrics.json")).unwrap()).unwrap();
    assert!((m["overshoot"].as_f64().unwrap() - 14.0).abs() <= 4.0);
    assert!((m["rise_time"].as_f64().unwrap() - 5.4).abs() <= 1.5);
    assert!((m["settling_time"].as_f64().unwrap() - 15.0).abs() <= 5.0);
}

#[test]
fn example2_traces_and_divergence_flag() {
    let dir = scratch("x2");
    assert!(ldpid(&["example", "2", "--out", dir.to_str().unwrap()])
        .status
        .success());
    let m: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("metrics.json")).unwrap()).unwrap();
    assert_eq!(m["tustin_pid"]["diverged"], true);
    assert_eq!(m["ldpid"]["diverged"], false);
    for f in ["trace_ldpid.csv", "trace_tustin_pid.csv"] {
        let (header, _) = read_csv(&dir.join(f));
        assert_eq!(header, ["t", "r", "e", "u", "y"]);
    }
}

#[test]
fn every_example_writes_one_manifest_listing_its_files() {
    for n in 1..=5 {
        let dir = scratch(&format!("m{n}"));
        let o = ldpid(&["example", &n.to_string(), "--out", dir.to_str().unwrap()]);
        assert!(o.status.success(), "example {n}");
        let manifest: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
        let mut listed: Vec<String> = manifest["artifacts"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_str().unwrap().to_string())
            .collect();
        listed.push("manifest.json".into());
        listed.sort();
        let mut present: Vec<String> = fs::read_dir(&dir)
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        present.sort();
        assert_eq!(listed, present, "example {n}");
        assert_eq!(manifest["command"], "example");
    }
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = scratch("usage");
    let out = dir.join("o");
    let out = out.to_str().unwrap();
    assert_eq!(
        ldpid(&["example", "6", "--out", out]).status.code(),
        Some(2)
    );
    assert_eq!(ldpid(&["frobnicate"]).status.code(), Some(2));
    let plant = write(&dir, "p.cfg", "num = [1]\nden = [1, 1]\ndealy = 2\n");
    let ctrl = write(&dir, "c.cfg", "Kp = 1; M = 0; T = 1");
    let o = ldpid(&[
        "bode",
        "--plant",
        &plant,
        "--controller",
        &ctrl,
        "--out",
        out,
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("dealy"));
    let missing = dir.join("nope.cfg");
    let o = ldpid(&[
        "bode",
        "--plant",
        missing.to_str().unwrap(),
        "--controller",
        &ctrl,
        "--out",
        out,
    ]);
    assert_eq!(o.status.code(), Some(2));
    let improper = write(&dir, "q.cfg", "num = [1, 0]\nden = [1]\n");
    assert_eq!(
        ldpid(&[
            "bode",
            "--plant",
            &improper,
            "--controller",
            &ctrl,
            "--out",
            out
        ])
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn all_diverged_tuning_exits_with_one() {
    let dir = scratch("div");
    let spec = write(
        &dir,
        "s.cfg",
        "index = IAE; duration = 50; T = 0.1; M = 2; budget = 20\n\
         Kp = [1000, 1000]; Kd = [0, 0]; Ki = [0, 0]; mu = [1, 1]; lambda = [1, 1]\n",
    );
    let out = dir.join("o");
    let o = ldpid(&[
        "tune-integral",
        "--plant",
        &configs("example2_plant.cfg"),
        "--spec",
        &spec,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(1),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(out.join("manifest.json").exists() && out.join("result.json").exists());
}

#[test]
fn flags_override_the_spec_and_reach_the_manifest() {
    let dir = scratch("flags");
    let out = dir.join("o");
    let o = ldpid(&[
        "tune-freq",
        "--plant",
        &configs("example1_plant.cfg"),
        "--spec",
        &configs("example1_spec.cfg"),
        "--seed",
        "7",
        "--budget",
        "200",
        "--M",
        "4",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 7);
    assert_eq!(manifest["config"]["spec"]["budget"], 200);
    assert_eq!(manifest["config"]["spec"]["M"], 4);
    let result: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("result.json")).unwrap()).unwrap();
    assert_eq!(result["evaluations"], 200);
    assert_eq!(result["controller"]["M"], 4);
}

#[test]
fn simulate_continuous_controller_is_a_usage_error() {
    let dir = scratch("cont");
    let o = ldpid(&[
        "simulate",
        "--plant",
        &configs("example5_plant.cfg"),
        "--controller",
        &configs("example5_pid.cfg"),
        "--duration",
        "10",
        "--out",
        dir.join("o").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_writes_trace_and_metrics() {
    let dir = scratch("sim");
    let out = dir.join("o");
    let o = ldpid(&[
        "simulate",
        "--plant",
        &configs("example2_plant.cfg"),
        "--controller",
        &configs("example2_ldpid.cfg"),
        "--duration",
        "60",
        "--disturbance",
        "0.5",
        "--disturbance-at",
        "30",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let (_, rows) = read_csv(&out.join("trace.csv"));
    // traces are recorded on the fine grid, T / substeps
    assert_eq!(rows.len(), 6001);
    // tracking before the load step, then a visible upset
    assert!((rows[3000][4] - 1.0).abs() < 1e-2, "{:?}", rows[3000]);
    assert!(rows[3000..].iter().any(|r| r[4] > 1.05));
}
