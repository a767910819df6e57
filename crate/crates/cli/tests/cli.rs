use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_swing-roa"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn generated(dir: &TempDir, seed: u64) -> PathBuf {
    let o = run(&["gen", "--seed", &seed.to_string(), "--paper-defaults"]);
    assert!(o.status.success(), "{}", stderr(&o));
    write(dir, &format!("sys{seed}.json"), &stdout(&o))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_is_deterministic_and_uses_default_ranges() {
    let a = run(&["gen", "--seed", "7", "--paper-defaults"]);
    let b = run(&["gen", "--seed", "7", "--paper-defaults"]);
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["n"], 2);
    assert_eq!(v["coupling"][0][1], 0.2);
    assert_eq!(v["random"]["m_range"], serde_json::json!([0.1, 0.15]));
    assert_eq!(v["random"]["d_range"], serde_json::json!([0.3, 0.4]));
    for k in 0..2 {
        let m = v["m"][k].as_f64().unwrap();
        let d = v["d"][k].as_f64().unwrap();
        assert!((0.10..0.15).contains(&m) && (0.30..0.40).contains(&d));
    }
    let c = run(&["gen", "--seed", "8", "--paper-defaults"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn check_exit_codes() {
    let dir = TempDir::new().unwrap();
    let sys = generated(&dir, 0);

    let ok = run(&["check", s(&sys), "--d0", "pi/4"]);
    assert_eq!(ok.status.code(), Some(0), "{}", stderr(&ok));
    let report: Value = serde_json::from_slice(&ok.stdout).unwrap();
    for key in [
        "c0",
        "c1",
        "c_ell",
        "c_ell_tilde",
        "eps_lo",
        "eps_hi",
        "margin",
        "lambda",
        "l_star",
    ] {
        assert!(report[key].is_number(), "missing {key}");
    }
    assert_eq!(report["h3_pass"], true);

    let far = run(&[
        "check",
        s(&sys),
        "--d0",
        "pi/4",
        "--theta0",
        "3,1",
        "--omega0",
        "derive",
    ]);
    assert_eq!(far.status.code(), Some(1));
    let report: Value = serde_json::from_slice(&far.stdout).unwrap();
    assert_eq!(report["h3_pass"], false);

    let edge = run(&["check", s(&sys), "--d0", "pi"]);
    assert_eq!(edge.status.code(), Some(2));
    assert!(stderr(&edge).contains("D0 out of range"));

    let outside = run(&["check", s(&sys), "--d0", "pi/4", "--eps", "5"]);
    assert_eq!(outside.status.code(), Some(1));
}

#[test]
fn malformed_files_exit_2_naming_the_field() {
    let dir = TempDir::new().unwrap();
    let cases = [
        (
            r#"{"n":2,"m":[0.1,0.1],"d":[0.3,0.3],"omega":[0,0],"coupling":[[0,0.2],[0.3,0]]}"#,
            "coupling",
        ),
        (
            r#"{"n":2,"m":[0.1],"d":[0.3,0.3],"omega":[0,0],"coupling":[[0,0.2],[0.2,0]]}"#,
            "m",
        ),
        (
            r#"{"n":2,"m":[0.1,0.1],"omega":[0,0],"coupling":[[0,0.2],[0.2,0]]}"#,
            "d",
        ),
        (
            r#"{"n":2,"m":[0.1,-1],"d":[0.3,0.3],"omega":[0,0],"coupling":[[0,0.2],[0.2,0]]}"#,
            "m",
        ),
        (r#"{"n":2,"mass":[0.1,0.1]}"#, "mass"),
    ];
    for (k, (text, field)) in cases.iter().enumerate() {
        let p = write(&dir, &format!("bad{k}.json"), text);
        let o = run(&["check", s(&p), "--d0", "0.5"]);
        assert_eq!(o.status.code(), Some(2), "case {k}");
        assert!(stderr(&o).contains(field), "case {k}: {}", stderr(&o));
    }
    let o = run(&["check", "/nonexistent/file.json", "--d0", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_far_point_synchronizes() {
    let dir = TempDir::new().unwrap();
    let sys = generated(&dir, 0);
    let csv = dir.path().join("traj.csv");
    let o = run(&[
        "simulate",
        s(&sys),
        "--theta0",
        "3,1",
        "--omega0",
        "derive",
        "-o",
        s(&csv),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["synced"], true);
    assert!(report["rate"].as_f64().unwrap() < 0.0);
    assert!(report["envelope_rate"].as_f64().unwrap() < 0.0);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,theta_1,theta_2,omega_1,omega_2,diam,spread,etilde,diss,conserved"
    );
    assert_eq!(lines.count(), 2001);
}

#[test]
fn simulate_equilibrium_is_constant() {
    let dir = TempDir::new().unwrap();
    let sys = write(
        &dir,
        "eq.json",
        r#"{"n":2,"m":[0.1,0.2],"d":[0.3,0.4],"omega":[0,0],"coupling":[[0,0.2],[0.2,0]]}"#,
    );
    let o = run(&[
        "simulate",
        s(&sys),
        "--theta0",
        "0.5,0.5",
        "--horizon",
        "1",
        "--record-every",
        "10",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let rows: Vec<Vec<&str>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(rows.len(), 101);
    for r in &rows {
        assert_eq!(r[1..], rows[0][1..]);
    }
    let report: Value = serde_json::from_str(&stderr(&o)).unwrap();
    assert_eq!(report["t_sync"], 0.0);
}

fn endpoint(sys: &Path, dt: &str) -> f64 {
    let o = run(&[
        "simulate",
        s(sys),
        "--theta0",
        "1.2,-1.2",
        "--omega0",
        "0,0",
        "--dt",
        dt,
        "--horizon",
        "10",
        "--record-every",
        "100000",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let last: Vec<f64> = text
        .lines()
        .last()
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    last[1] - last[2]
}

#[test]
fn simulate_dt_halving_shrinks_endpoint_difference() {
    let dir = TempDir::new().unwrap();
    let sys = write(
        &dir,
        "pend.json",
        r#"{"n":2,"m":[1,1],"d":[0.1,0.1],"omega":[0,0],"coupling":[[0,1],[1,0]]}"#,
    );
    let (a, b, c) = (
        endpoint(&sys, "0.05"),
        endpoint(&sys, "0.025"),
        endpoint(&sys, "0.0125"),
    );
    let ratio = (a - b).abs() / (b - c).abs();
    assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn scan_smoke_and_round_trip() {
    let dir = TempDir::new().unwrap();
    let sys = generated(&dir, 0);
    let out = dir.path().join("map.csv");
    let o = run(&[
        "scan",
        s(&sys),
        "--res",
        "2",
        "--mode",
        "both",
        "--eps-list",
        "rel:0.01,0.5",
        "-o",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).contains("conservativeness"));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header.len(), 6);
    assert_eq!(header[0], "theta1");
    assert!(header[2].starts_with("cert_0.785398_"));
    assert_eq!(&header[4..], ["sim_sync", "t_sync"]);
    let rows: Vec<Vec<String>> = lines
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    assert_eq!(rows.len(), 4);
    for r in &rows {
        let _: f64 = r[0].parse().unwrap();
        assert!(r[2] == "0" || r[2] == "1");
        assert_eq!(r[4], "1");
    }
    let meta: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("map.csv.json")).unwrap())
            .unwrap();
    assert_eq!(meta["seed"], 0);
    assert_eq!(meta["stats"]["cells"], 4);
    assert_eq!(meta["stats"]["soundness_violations"], 0);
    assert_eq!(meta["combos"].as_array().unwrap().len(), 2);
    let system = serde_json::to_string(&meta["system"]).unwrap();
    let again = write(&dir, "again.json", &system);
    assert_eq!(
        run(&["check", s(&again), "--d0", "pi/4"]).status.code(),
        Some(0)
    );
}

#[test]
fn scan_output_is_independent_of_worker_count() {
    let dir = TempDir::new().unwrap();
    let sys = generated(&dir, 2);
    let scan = |threads: &str| {
        let o = bin()
            .args([
                "scan",
                s(&sys),
                "--res",
                "12",
                "--d0-list",
                "pi/4,3pi/19",
                "--eps-list",
                "rel:0.01,0.3",
            ])
            .env("SWING_ROA_THREADS", threads)
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", stderr(&o));
        o.stdout
    };
    assert_eq!(scan("1"), scan("3"));
    let bad = bin()
        .args(["scan", s(&sys), "--res", "2"])
        .env("SWING_ROA_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn scan_rejects_bad_input() {
    let dir = TempDir::new().unwrap();
    let sys = generated(&dir, 0);
    assert_eq!(run(&["scan", s(&sys), "--res", "1"]).status.code(), Some(2));
    assert_eq!(
        run(&["scan", s(&sys), "--d0-list", "0.5,4"]).status.code(),
        Some(2)
    );
    let three = run(&["gen", "--n", "3", "--seed", "1"]);
    let p = write(&dir, "three.json", &stdout(&three));
    let o = run(&["scan", s(&p), "--res", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("2 oscillators"));
}
