use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qexpfam(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qexpfam"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn value_of(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
        .parse()
        .unwrap()
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn sweep_reproduces_shape_sequence() {
    let dir = tempfile::tempdir().unwrap();
    let o = qexpfam(&["sweep", "--out", dir.path().to_str().unwrap(), "--quiet"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let counts: Vec<usize> = stdout(&o)
        .lines()
        .map(|l| {
            l.split_whitespace()
                .find_map(|w| w.strip_prefix("nonexposed="))
                .unwrap()
                .parse()
                .unwrap()
        })
        .collect();
    assert_eq!(counts, [0, 2, 2, 2, 0, 0, 0]);
    for k in 0..7 {
        let svg = fs::read_to_string(dir.path().join(format!("boundary_phi{k:02}.svg"))).unwrap();
        assert!(svg.contains("viewBox=\"0 0 800 800\""));
        assert!(dir.path().join(format!("boundary_phi{k:02}.csv")).exists());
    }
    // Only final files remain after the atomic renames.
    for e in fs::read_dir(dir.path()).unwrap() {
        let name = e.unwrap().file_name().to_string_lossy().into_owned();
        assert!(name.ends_with(".csv") || name.ends_with(".svg") || name == "run.cfg", "{name}");
    }
}

#[test]
fn quiet_output_is_key_value_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = qexpfam(&["distance", "--family", "staffelberg", "--state", "c", "--out", out, "--quiet"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().all(|l| l.contains('=') && !l.starts_with('#')));
    let loud = qexpfam(&["distance", "--family", "staffelberg", "--state", "c", "--out", out]);
    assert!(stdout(&loud).lines().any(|l| l.starts_with("# wrote")));
}

#[test]
fn staffelberg_distance_at_rho0() {
    let dir = tempfile::tempdir().unwrap();
    let o = qexpfam(&[
        "distance",
        "--family",
        "staffelberg",
        "--state",
        "rho:0",
        "--out",
        dir.path().to_str().unwrap(),
        "--quiet",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!((value_of(&text, "distance") - std::f64::consts::LN_2).abs() < 1e-9);
    assert_eq!(value_of(&text, "attained"), 0.0);
    let cont = fs::read_to_string(dir.path().join("distance_continuation.csv")).unwrap();
    let values: Vec<f64> = cont.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(values.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn member_state_has_zero_distance() {
    let dir = tempfile::tempdir().unwrap();
    let o = qexpfam(&[
        "distance",
        "--family",
        "swallow",
        "--state",
        "member:0.4,-1.5",
        "--out",
        dir.path().to_str().unwrap(),
        "--quiet",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(value_of(&stdout(&o), "distance").abs() < 1e-10);
    assert_eq!(value_of(&stdout(&o), "attained"), 1.0);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let code = |args: &[&str]| qexpfam(args).status.code();

    assert_eq!(code(&["distance", "--family", "moon", "--state", "c", "--out", out]), Some(2));
    assert_eq!(code(&["distance", "--family", "staffelberg", "--out", out]), Some(2));
    assert_eq!(code(&["distance", "--family", "staffelberg", "--state", "tau:7", "--out", out]), Some(2));
    assert_eq!(code(&["sweep", "--phi", "4", "--out", out]), Some(2));
    assert_eq!(code(&["sweep", "--config", "/nonexistent/qexpfam.cfg"]), Some(2));
    assert_eq!(code(&["report", "galaxy", "--out", out]), Some(2));

    let cfg = dir.path().join("coarse.cfg");
    fs::write(&cfg, "[sweep]\nn_angles = 4\n").unwrap();
    assert_eq!(code(&["sweep", "--config", cfg.to_str().unwrap(), "--phi", "pi/6", "--out", out]), Some(3));

    let bad = dir.path().join("bad.cfg");
    fs::write(&bad, "[solver]\ntol = banana\n").unwrap();
    assert_eq!(code(&["sweep", "--config", bad.to_str().unwrap(), "--out", out]), Some(2));
}

#[test]
fn staffelberg_report_has_ln2_entry() {
    let dir = tempfile::tempdir().unwrap();
    let o = qexpfam(&["report", "staffelberg", "--out", dir.path().to_str().unwrap(), "--quiet"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let findings = fs::read_to_string(dir.path().join("staffelberg_findings.csv")).unwrap();
    let row = findings.lines().find(|l| l.starts_with("distance_rho0_exact,")).unwrap();
    let v: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
    assert!((v - std::f64::consts::LN_2).abs() < 1e-9);
}

#[test]
fn violated_finding_gives_exit_4() {
    // The swallow report keeps the slowly decaying cap-200 value as a
    // contract; it is the only violated finding.
    let dir = tempfile::tempdir().unwrap();
    let o = qexpfam(&["report", "swallow", "--out", dir.path().to_str().unwrap(), "--quiet"]);
    assert_eq!(o.status.code(), Some(4));
    let failed: Vec<String> = stdout(&o).lines().filter(|l| l.ends_with("passed=0")).map(String::from).collect();
    assert_eq!(failed.len(), 1, "{failed:?}");
    assert!(failed[0].starts_with("finding=distance_rho0_direct_cap200 "));
}

#[test]
fn closures_and_maximizer_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = qexpfam(&["report", "closures", "--out", out, "--quiet"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("finding=abelian_rI_minus_geodesic value=0.0000000000000000e0 passed=1"));
    let o = qexpfam(&["report", "maximizer", "--seed", "3", "--out", out, "--quiet"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let fd = fs::read_to_string(dir.path().join("maximizer_derivatives.csv")).unwrap();
    assert!(fd.starts_with("index,analytic,finite_difference,relative_error\n"));
    assert_eq!(fd.lines().count(), 201);
    assert!(dir.path().join("maximizer_certificates.csv").exists());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let runs: Vec<_> = (0..2)
        .map(|_| {
            let dir = tempfile::tempdir().unwrap();
            let out = dir.path().to_str().unwrap();
            for args in [
                vec!["sweep", "--phi", "0,pi/12,pi/3", "--out", out, "--quiet"],
                vec!["report", "maximizer", "--seed", "5", "--out", out, "--quiet"],
                vec!["distance", "--family", "swallow", "--state", "rho:pi/2", "--out", out, "--quiet"],
            ] {
                assert_eq!(qexpfam(&args).status.code(), Some(0));
            }
            let files = csv_files(dir.path());
            (dir, files)
        })
        .collect();
    assert!(runs[0].1.len() >= 8);
    assert_eq!(runs[0].1, runs[1].1);
}

#[test]
fn emitted_config_reproduces_itself() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("in.cfg");
    fs::write(
        &cfg,
        "# three-level classical family\n[algebra]\nblocks = 1,1,1\n[family]\nname = custom\n\
         generator = 1 | -1 | 0\ngenerator = 0.5,0 | 0.5 | -1\n[sweep]\nn_angles = 64\n[output]\nseed = 9\n",
    )
    .unwrap();
    let first = dir.path().join("a");
    let o = qexpfam(&["sweep", "--config", cfg.to_str().unwrap(), "--out", first.to_str().unwrap(), "--quiet"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let emitted = fs::read_to_string(first.join("run.cfg")).unwrap();
    assert!(emitted.contains("seed = 9"));

    let second = dir.path().join("b");
    let o = qexpfam(&[
        "sweep",
        "--config",
        first.join("run.cfg").to_str().unwrap(),
        "--out",
        second.to_str().unwrap(),
        "--quiet",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let again = fs::read_to_string(second.join("run.cfg")).unwrap();
    assert_eq!(
        emitted.replace(first.to_str().unwrap(), "DIR"),
        again.replace(second.to_str().unwrap(), "DIR")
    );
    assert_eq!(
        fs::read(first.join("boundary_custom.csv")).unwrap(),
        fs::read(second.join("boundary_custom.csv")).unwrap()
    );
}
