use std::path::Path;
use std::process::Command;

fn sawlat(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_sawlat")).args(args).output().expect("binary runs")
}

fn out_arg(p: &Path) -> String {
    p.to_str().unwrap().to_string()
}

#[test]
fn every_cheap_subcommand_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    for cmd in ["scales", "hubbard", "feasibility", "case-study", "trajectory"] {
        let o = sawlat(&[cmd, "--out", &out_arg(dir.path())]);
        assert!(o.status.success(), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
    }
    assert!(dir.path().join("case_study.csv").exists());
}

#[test]
fn stability_output_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = |d: &Path| {
        vec![
            "stability".to_string(),
            "--out".into(),
            out_arg(d),
            "--seed".into(),
            "5".into(),
            "--no-plot".into(),
            "--set".into(),
            "sweep.q.stop=0.3".into(),
            "--set".into(),
            "sweep.theta.stop=0.02".into(),
            "--set".into(),
            "sweep.samples_per_cell=2".into(),
        ]
    };
    for d in [a.path(), b.path()] {
        let v = args(d);
        let o = sawlat(&v.iter().map(String::as_str).collect::<Vec<_>>());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let read = |d: &Path| std::fs::read(d.join("stability.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));

    let svg = a.path().join("map.svg");
    let o = sawlat(&["plot", a.path().join("stability.csv").to_str().unwrap(), "--kind", "heatmap", "--out", svg.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(std::fs::read_to_string(svg).unwrap().starts_with("<svg"));
}

#[test]
fn bad_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = sawlat(&["scales", "--out", &out_arg(dir.path()), "--set", "inputs.material=\"unobtainium\""]);
    assert_eq!(o.status.code(), Some(2));
    let o = sawlat(&["scales", "--set", "inputs.no_such_field=1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn dump_config_prints_json() {
    let o = sawlat(&["qme", "--dump-config", "--set", "inputs.q=0.2"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["inputs"]["q"], 0.2);
    assert_eq!(v["command"], "qme");
}
