use std::path::Path;
use std::process::{Command, Output};

fn chua(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chua")).args(args).current_dir(cwd).output().expect("spawn chua")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn simulate_zero_initial_state() {
    let dir = tempfile::tempdir().unwrap();
    let o = chua(&["simulate", "--steps", "1000", "--x0", "0,0,0", "--out", "z.csv"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("points: 1000"));
    let text = std::fs::read_to_string(dir.path().join("z.csv")).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 1000);
    for row in rows {
        let vals: Vec<f64> = row.split(',').skip(1).map(|v| v.parse().unwrap()).collect();
        assert_eq!(vals, [0.0, 0.0, 0.0]);
    }
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&chua(&["simulate", "--dt", "-1"], dir.path())), 1);
    assert_eq!(code(&chua(&["simulate", "--no-such-flag"], dir.path())), 1);
    assert_eq!(code(&chua(&["render", "--projection", "xyz"], dir.path())), 1);
    assert_eq!(code(&chua(&["simulate", "--x0", "1,2"], dir.path())), 1);
    assert_eq!(code(&chua(&[], dir.path())), 1);
    assert_eq!(code(&chua(&["--help"], dir.path())), 0);
    assert_eq!(code(&chua(&["render", "--help"], dir.path())), 0);
}

#[test]
fn runtime_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&chua(&["render", "--input", "missing.bin"], dir.path())), 2);
    assert_eq!(code(&chua(&["analyze", "--params", "missing.json"], dir.path())), 2);
    let o = chua(&["export-scene", "--comet", "300", "--trajectory", "missing.bin"], dir.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("comet_length 300"));
}

#[test]
fn analyze_text_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let o = chua(&["analyze"], dir.path());
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert_eq!(text.matches("singularity ").count(), 3);
    assert!(text.contains("u1=1.5000000000000007"));
    assert!(text.contains("segment EP_PLUS x EP_MINUS: PARALLEL"));

    let o = chua(&["analyze", "--json"], dir.path());
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let sing = v["singularities"].as_array().unwrap();
    assert_eq!(sing.len(), 3);
    let i_plus = sing.iter().find(|s| s["label"] == "P_PLUS").unwrap()["location"]["i"].as_f64().unwrap();
    assert!((i_plus + 1.05).abs() < 1e-12);
}

#[test]
fn analyze_reports_degenerate_regions() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("p.json"), r#"{"m1": -0.7}"#).unwrap();
    let o = chua(&["analyze", "--params", "p.json"], dir.path());
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("DEGENERATE"));
}

#[test]
fn render_views_and_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&chua(&["simulate", "--steps", "30000", "--skip", "10000", "--out", "t.bin"], d)), 0);
    let base = ["render", "--input", "t.bin", "--size", "96x96", "--planes", "--segments"];
    let run = |extra: &[&str], out: &str| {
        let mut args: Vec<&str> = base.to_vec();
        args.extend_from_slice(extra);
        args.extend_from_slice(&["--out", out]);
        let o = chua(&args, d);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read(d.join(out).join("frame_00000.ppm")).unwrap()
    };
    let axo = run(&["--projection", "axo", "--azimuth", "0", "--elevation", "0"], "axo");
    let u2u1 = run(&["--projection", "u2u1"], "u2u1");
    assert_eq!(axo, u2u1);
    let iu1 = run(&["--projection", "iu1", "--iv", "--svg"], "iu1");
    assert!(iu1.starts_with(b"P6\n96 96\n255\n"));
    assert!(d.join("iu1/frame_00000.svg").is_file());

    let o = chua(&["render", "--input", "t.bin", "--size", "64x64", "--sweep", "72", "--angle-step", "5", "--out", "sweep"], d);
    assert_eq!(code(&o), 0);
    let n = std::fs::read_dir(d.join("sweep")).unwrap().count();
    assert_eq!(n, 72);
    assert!(d.join("sweep/frame_00071.ppm").is_file());
}

#[test]
fn export_scene_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&chua(&["simulate", "--steps", "20000", "--skip", "0", "--out", "t.bin"], d)), 0);
    let o = chua(&["export-scene", "--trajectory", "t.bin", "--mode", "continuous", "--out", "s.chua-scene.json"], d);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(d.join("s.chua-scene.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["viewer_defaults"]["mode"], "CONTINUOUS");
    assert_eq!(v["viewer_defaults"]["comet_length"], 4096);
    assert_eq!(v["trajectory"]["path"], "t.bin");
    assert_eq!(v["planes"].as_array().unwrap().len(), 3);

    let o = chua(&["export-scene", "--trajectory", "t.bin", "--mode", "sequential", "--comet", "512", "--out", "q.chua-scene.json"], d);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("q.chua-scene.json")).unwrap()).unwrap();
    assert_eq!(v["viewer_defaults"]["mode"], "SEQUENTIAL");

    let o = chua(&["render", "--scene", "s.chua-scene.json", "--size", "64x64", "--planes", "--out", "fromscene"], d);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn pipeline_is_deterministic() {
    let run = || {
        let dir = tempfile::tempdir().unwrap();
        let d = dir.path();
        assert_eq!(code(&chua(&["simulate", "--steps", "50000", "--skip", "5000", "--stride", "3", "--out", "t.bin"], d)), 0);
        let report = stdout(&chua(&["analyze", "--json"], d));
        let o = chua(&["render", "--input", "t.bin", "--projection", "axo", "--azimuth", "30", "--elevation", "20", "--planes", "--segments", "--size", "80x80", "--out", "f"], d);
        assert_eq!(code(&o), 0);
        (std::fs::read(d.join("t.bin")).unwrap(), report, std::fs::read(d.join("f/frame_00000.ppm")).unwrap())
    };
    assert_eq!(run(), run());
}
