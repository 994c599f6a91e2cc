use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use oam_ionize_core::config::RunConfig;
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_oam-ionize"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

const TINY: &str = r#"
version = 1
name = "tiny"

[beam]
ell = ELL
polarization = "POL"
n_cyc = 1
waist = 20.0
target_field = { e = E0, rho = RHO }

[grid]
n = [32, 32, 32]
h = 0.5

[propagator]
dt = 0.02

[run]
record_every = 20
tail_time = 1.0

[analysis]
l_max = 4
n_radial = 16
snapshot_times = [3.0]
track_compliance = true
"#;

fn tiny(dir: &Path, ell: i32, pol: &str) -> PathBuf {
    let (e, rho) = if ell == 0 { ("0.4", "1.0") } else { ("5.0", "20.0") };
    let text = TINY
        .replace("ELL", &ell.to_string())
        .replace("POL", pol)
        .replace("E0", e)
        .replace("RHO", rho);
    let p = dir.join(format!("tiny_{ell}_{pol}.toml"));
    fs::write(&p, text).unwrap();
    p
}

fn simulate(cfg: &Path, out: &Path) {
    let o = run(&["simulate", "--config", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn derive_rules_tables() {
    let o = run(&["derive-rules", "--ell", "1", "--pol", "linear-x"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("HI: |ΔL| ≤ 2, ΔL even, ΔM ∈ {0, 2}"), "{s}");
    assert!(s.contains("HII: |ΔL| ≤ 2, ΔL even, ΔM ∈ {2}"), "{s}");

    let s = stdout(&run(&["derive-rules", "--ell", "0", "--pol", "circ-right"]));
    assert!(s.contains("HI: |ΔL| ≤ 1, ΔL odd, ΔM ∈ {1}"), "{s}");

    let o = run(&["derive-rules", "--ell", "-2", "--pol", "circ-left", "--json"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v[0]["part"], "HI");
    assert_eq!(v[0]["delta_m"], serde_json::json!([-3]));
    assert_eq!(v[1]["delta_m"], serde_json::json!([-4]));
}

#[test]
fn bad_flags_are_rejected() {
    let o = run(&["derive-rules", "--ell", "1", "--pol", "elliptic"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown polarization"));
}

#[test]
fn oracle_verify_reports_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = run(&[
        "oracle-verify",
        "--ell-min",
        "-1",
        "--ell-max",
        "1",
        "--l-max",
        "4",
        "--pol",
        "linear-x",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stdout(&o));
    let v = read_json(&out);
    let reports = v.as_array().unwrap();
    assert_eq!(reports.len(), 9);
    for r in reports {
        assert!(r["disagreements"].as_array().unwrap().is_empty());
        let t = &r["nonzero"][0];
        assert!(t["abs"].as_f64().unwrap() > 1e-8 && t.get("li").is_some());
    }
}

#[test]
fn simulation_artifacts_are_deterministic_and_analyzable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny(dir.path(), 1, "linear-x");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    simulate(&cfg, &a);
    let o = bin()
        .args(["--threads", "1", "simulate", "--config", cfg.to_str().unwrap(), "--out-dir"])
        .arg(&b)
        .args(["--checkpoint-every", "100"])
        .output()
        .unwrap();
    assert!(o.status.success());
    for f in ["trajectory.csv", "spectrum.json", "spectrum.csv", "compliance.json", "summary.json", "projection_excited.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f} differs");
    }
    assert!(b.join("checkpoints/state_00000100.chk").exists());
    assert!(!a.join("checkpoints").exists());
    for f in ["snapshot_00_spectrum.json", "compliance_trajectory.csv", "trajectory.gp", "radial_histogram.csv", "config.toml"] {
        assert!(a.join(f).exists(), "{f}");
    }

    let traj = fs::read_to_string(a.join("trajectory.csv")).unwrap();
    assert!(traj.starts_with("t,pop_ground,norm,Lz,x_mean,y_mean,z_mean,absorbed\n"));
    let summary = read_json(&a.join("summary.json"));
    assert!(summary["oam_kinetic"][2].as_f64().unwrap() > 0.0);
    assert!(summary["forbidden_fraction"].as_f64().unwrap() < 1e-2);

    // The written config reproduces the run configuration.
    let echoed = RunConfig::load(&a.join("config.toml")).unwrap();
    assert_eq!(echoed, RunConfig::load(&cfg).unwrap());

    let an = dir.path().join("an");
    let o = run(&[
        "analyze",
        "--state",
        a.join("final.chk").to_str().unwrap(),
        "--ground",
        a.join("ground.chk").to_str().unwrap(),
        "--config",
        cfg.to_str().unwrap(),
        "--out-dir",
        an.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rep = read_json(&an.join("compliance.json"));
    let ch = rep["channels"].as_array().unwrap();
    let p = |l: i64, m: i64| ch.iter().find(|c| c["L"] == l && c["M"] == m).unwrap()["P"].as_f64().unwrap();
    let worst_forbidden = ch.iter().filter(|c| c["allowed"] == false).map(|c| c["P"].as_f64().unwrap()).fold(0.0, f64::max);
    assert!(p(2, 0) > worst_forbidden && p(2, 2) > worst_forbidden);

    let an0 = dir.path().join("an0");
    let ground = a.join("ground.chk");
    let o = run(&["analyze", "--state", ground.to_str().unwrap(), "--ground", ground.to_str().unwrap(), "--out-dir", an0.to_str().unwrap()]);
    assert!(o.status.success());
    let s = read_json(&an0.join("spectrum.json"));
    assert!(s["channels"].as_array().unwrap().iter().all(|c| c["P"].as_f64().unwrap() < 1e-8));
}

#[test]
fn plane_wave_control_carries_no_oam() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g");
    simulate(&tiny(dir.path(), 0, "linear-x"), &out);
    let traj = fs::read_to_string(out.join("trajectory.csv")).unwrap();
    for line in traj.lines().skip(1) {
        let lz: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
        assert!(lz.abs() < 1e-8, "{line}");
    }
    let s = read_json(&out.join("summary.json"));
    let top = &s["top_channels"];
    assert_eq!((top[0]["L"].as_i64(), top[1]["L"].as_i64()), (Some(1), Some(1)));
}

#[test]
fn config_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny(dir.path(), 1, "linear-x");
    let text = fs::read_to_string(&cfg).unwrap().replace("h = 0.5", "h = 0.5\nbogus = 1");
    fs::write(&cfg, text).unwrap();
    let o = run(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains(":15:") && err.contains("bogus"), "{err}");
}

#[test]
fn divergence_exits_nonzero_with_a_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny(dir.path(), 1, "linear-x");
    let text = fs::read_to_string(&cfg).unwrap().replace("target_field = { e = 5.0, rho = 20.0 }", "amplitude = 1e300");
    fs::write(&cfg, text).unwrap();
    let out = dir.path().join("boom");
    let o = run(&["simulate", "--config", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let d = read_json(&out.join("diagnostic.json"));
    assert!(d["error"].as_str().unwrap().contains("diverged"));
    assert!(out.join("trajectory.csv").exists());
}

#[test]
fn bundled_configs_parse_round_trip_and_probe() {
    let mut names: Vec<_> = fs::read_dir(configs_dir()).unwrap().map(|e| e.unwrap().path()).collect();
    names.sort();
    assert!(names.len() >= 9);
    for p in names {
        let c = RunConfig::load(&p).unwrap_or_else(|e| panic!("{e}"));
        assert_eq!(RunConfig::from_toml(&c.to_toml(), "again").unwrap(), c);
        let o = run(&["field-probe", "--config", p.to_str().unwrap(), "--point", "20,0,0", "--per-period", "8"]);
        assert!(o.status.success());
        let s = stdout(&o);
        let mut lines = s.lines();
        assert_eq!(lines.next(), Some("t,Ax,Ay,Ex,Ey"));
        assert!(lines.count() > 8 * c.beam.n_cyc as usize);
    }
}

#[test]
fn field_probe_writes_one_file_per_point() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny(dir.path(), 1, "linear-x");
    // A long envelope makes the peak insensitive to the carrier phase.
    let text = fs::read_to_string(&cfg).unwrap().replace("n_cyc = 1", "n_cyc = 8");
    fs::write(&cfg, text).unwrap();
    let out = dir.path().join("probe");
    let o = run(&[
        "field-probe",
        "--config",
        cfg.to_str().unwrap(),
        "--point",
        "20,0,0",
        "--point",
        "0,20,0",
        "--per-period",
        "400",
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let peak = |i: usize| {
        fs::read_to_string(out.join(format!("field_probe_{i}.csv")))
            .unwrap()
            .lines()
            .skip(1)
            .map(|l| {
                let v: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
                v[3].hypot(v[4])
            })
            .fold(0.0, f64::max)
    };
    // About 5 au at 20 au; the azimuth only shifts the carrier phase.
    for i in 0..2 {
        assert!((peak(i) - 5.0).abs() < 0.1, "{}", peak(i));
    }
}
