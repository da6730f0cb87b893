use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use heisenlab_cli::run::RunReport;
use heisenlab_cli::scenario::parse_scenario;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_heisenlab"))
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(format!("{name}.json"))
}

fn exec(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn run_scenario(name: &str, dir: &Path, extra: &[&str]) -> Output {
    exec(bin().arg("run").arg(scenario(name)).arg("--out-dir").arg(dir).args(extra))
}

fn report(dir: &Path, name: &str) -> RunReport {
    let text = std::fs::read_to_string(dir.join(format!("{name}.report.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn shipped_scenarios_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    let mut names: Vec<String> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path().file_stem().unwrap().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert_eq!(
        names,
        ["crossed_exb", "cubic", "gravity_taylor", "harmonic", "quartic", "rotating_frame", "uniform_b"]
    );
    for n in &names {
        let s = parse_scenario(&scenario(n)).unwrap();
        assert_eq!(&s.name, n);
    }
}

#[test]
fn harmonic_run_writes_stable_outputs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let out = run_scenario("harmonic", a.path(), &[]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(a.path(), "harmonic");
    assert!(r.max_gap < 1e-8);
    assert!(r.linear_scenario_exactness);
    assert!(r.passed);
    assert!(r.checks.as_ref().unwrap().iter().all(|c| c.passed));
    assert_eq!(r.config_hash.len(), 64);
    assert!(!r.deviation.is_empty());

    let csv = std::fs::read_to_string(a.path().join("harmonic.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,mean_q_0,mean_p_0,delta_q_0,classical_q_0,classical_p_0,gap_0"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 201);
    for field in rows.iter().flat_map(|l| l.split(',')) {
        let mantissa = field.trim_start_matches('-').split('e').next().unwrap();
        assert_eq!(mantissa.len(), 18, "{field}");
        let _: f64 = field.parse().unwrap();
    }
    for plot in &r.outputs.plots {
        let svg = std::fs::read_to_string(a.path().join(plot)).unwrap();
        assert!(svg.starts_with("<svg"), "{plot}");
    }
    assert_eq!(r.outputs.plots, ["harmonic_overlay_q0.svg", "harmonic_gap.svg"]);

    run_scenario("harmonic", b.path(), &[]);
    for f in ["harmonic.csv", "harmonic.report.json"] {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn quartic_gap_grows() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_scenario("quartic", dir.path(), &["--no-plots"]);
    assert_eq!(code(&out), 0);
    let r = report(dir.path(), "quartic");
    assert!(!r.linear_scenario_exactness);
    assert!(r.max_gap > 1e-2);
    assert!(r.outputs.plots.is_empty());
    let csv = std::fs::read_to_string(dir.path().join("quartic.csv")).unwrap();
    let gap: Vec<f64> = csv.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    let half = gap.len() / 2;
    let early = gap[..half].iter().cloned().fold(0.0, f64::max);
    let late = gap[half..].iter().cloned().fold(0.0, f64::max);
    assert!(late > early && early > 0.0);
    assert!(r.deviation.iter().all(|d| d.report.predicted_residual.is_none()));
    assert!(std::fs::read_dir(dir.path()).unwrap().all(|e| !e.unwrap().path().to_string_lossy().ends_with(".svg")));
}

#[test]
fn planar_field_run_has_kinetic_columns_and_orbit() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_scenario("uniform_b", dir.path(), &["--basis-levels", "24"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(dir.path(), "uniform_b");
    assert_eq!(r.scenario.basis.levels, Some(24));
    assert!(r.max_gap < 1e-8);
    assert_eq!(r.classical_oracle, "lorentz");
    assert!(r.outputs.plots.contains(&"uniform_b_orbit.svg".to_string()));
    let csv = std::fs::read_to_string(dir.path().join("uniform_b.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert_eq!(
        header,
        "t,mean_q_0,mean_q_1,mean_p_0,mean_p_1,mean_pi_0,mean_pi_1,delta_q_0,delta_q_1,\
         classical_q_0,classical_q_1,classical_p_0,classical_p_1,classical_pi_0,classical_pi_1,gap_0,gap_1"
    );
    // canonical momenta agree too: the symmetric gauge is used on both sides
    let m = &r.divergence.channels;
    assert!(m.iter().all(|c| c.max_abs_gap < 1e-8), "{m:?}");
}

#[test]
fn bad_scenarios_exit_with_usage_status() {
    let dir = tempfile::tempdir().unwrap();
    let base = std::fs::read_to_string(scenario("harmonic")).unwrap();
    let unknown = write(dir.path(), "u.json", &base.replace("\"checks\"", "\"hbar_eff\": 2, \"checks\""));
    let out = exec(bin().arg("run").arg(&unknown).arg("--out-dir").arg(dir.path()));
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("hbar_eff"));

    let negative = write(dir.path(), "m.json", &base.replace("\"checks\"", "\"mass\": -1, \"checks\""));
    let out = exec(bin().arg("run").arg(&negative).arg("--out-dir").arg(dir.path()));
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("`mass`"));

    let out = exec(bin().arg("run").arg(dir.path().join("missing.json")));
    assert_eq!(code(&out), 2);
    assert_eq!(code(&exec(&mut bin())), 2);
    assert_eq!(code(&exec(bin().arg("run"))), 2);
    assert_eq!(code(&exec(bin().args(["verify", "--tolerance", "abc"]))), 2);
}

#[test]
fn unmet_expectation_exits_with_failure_status() {
    let dir = tempfile::tempdir().unwrap();
    let base = std::fs::read_to_string(scenario("harmonic")).unwrap();
    let strict = write(dir.path(), "s.json", &base.replace("1e-8", "1e-30"));
    let out = exec(bin().arg("run").arg(&strict).arg("--out-dir").arg(dir.path()).arg("--no-plots"));
    assert_eq!(code(&out), 1);
    assert!(!report(dir.path(), "harmonic").passed);

    let out = run_scenario("cubic", dir.path(), &["--no-plots", "--tolerance", "1e-300"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn plot_subcommand_rebuilds_from_report() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run_scenario("harmonic", dir.path(), &["--no-plots"])), 0);
    let plots = dir.path().join("plots");
    let out = exec(
        bin()
            .arg("plot")
            .arg(dir.path().join("harmonic.report.json"))
            .arg("--out-dir")
            .arg(&plots),
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let svg = std::fs::read_to_string(plots.join("harmonic_overlay_q0.svg")).unwrap();
    assert!(svg.contains("max gap"));
    assert!(plots.join("harmonic_gap.svg").exists());

    let csv = dir.path().join("harmonic.csv");
    let header = std::fs::read_to_string(&csv).unwrap().lines().next().unwrap().to_string();
    std::fs::write(&csv, format!("{header}\n")).unwrap();
    let out = exec(bin().arg("plot").arg(dir.path().join("harmonic.report.json")));
    assert_eq!(code(&out), 2);

    let out = exec(bin().arg("plot").arg(dir.path().join("nope.json")));
    assert_eq!(code(&out), 2);
}

#[test]
fn verify_small_config_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "v.json",
        r#"{"levels_1d": 32, "levels_2d": 12, "levels_hamilton": 12, "n_random_hamiltonians": 3, "hbar_values": [1.0]}"#,
    );
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let out = exec(bin().arg("verify").arg("--config").arg(&cfg).arg("--seed").arg("7").arg("--out-dir").arg(d));
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    }
    let ra = std::fs::read(a.join("verify_report.json")).unwrap();
    assert_eq!(ra, std::fs::read(b.join("verify_report.json")).unwrap());
    let report: serde_json::Value = serde_json::from_slice(&ra).unwrap();
    assert_eq!(report["config"]["seed"], 7);
    assert_eq!(report["summary"]["failed"], 0);
    assert!(report["missing_anchors"].as_array().unwrap().is_empty());

    let out = exec(
        bin()
            .arg("verify")
            .arg("--config")
            .arg(&cfg)
            .args(["--tolerance", "1e-16"])
            .arg("--out-dir")
            .arg(&a),
    );
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));

    let bad = write(dir.path(), "bad.json", r#"{"levels": 4}"#);
    assert_eq!(code(&exec(bin().arg("verify").arg("--config").arg(&bad).arg("--out-dir").arg(&a))), 2);
    let groups = write(dir.path(), "g.json", r#"{"groups": []}"#);
    assert_eq!(code(&exec(bin().arg("verify").arg("--config").arg(&groups).arg("--out-dir").arg(&a))), 0);
    let out = exec(bin().args(["verify", "--basis-levels", "100000"]).arg("--out-dir").arg(&a));
    assert_eq!(code(&out), 2);
}

#[test]
fn verify_default_config_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = exec(bin().arg("verify").arg("--out-dir").arg(dir.path()));
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("verify_report.json")).unwrap()).unwrap();
    for c in report["checks"].as_array().unwrap() {
        assert!(c["anchor"].as_str().is_some_and(|a| !a.is_empty()));
        assert!(c["measured_error"].as_f64().unwrap() <= c["tolerance"].as_f64().unwrap());
    }
}
