use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn vidlab(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vidlab"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(format!("{name}.cfg"))
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

#[test]
fn missing_config_exits_2_and_names_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = vidlab(&["simulate", "no_such.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("no_such.cfg"));
}

#[test]
fn bundled_maxwell_spring_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario("maxwell_spring");
    let out = vidlab(&["simulate", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let trace = std::fs::read_to_string(dir.path().join("maxwell_spring.trace.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,E,E_dot,boxG_u,boxG_udot,K,I,B,L,R,kinetic,elastic,u_L,v_L"
    );
    assert!(lines.count() >= 100);
    assert!(text(&out.stdout).contains("E,exp,"));
}

#[test]
fn traces_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario("sls_unit");
    let cfg = cfg.to_str().unwrap();
    for name in ["a.csv", "b.csv"] {
        let out = vidlab(&["simulate", cfg, "--trace", name], dir.path());
        assert_eq!(out.status.code(), Some(0));
    }
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn cfl_violation_exits_2_with_suggestion() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"schema":1,"mesh":{"L":1,"N":100},"material":{"C":1,"kernel":{"prony":[]}},
                  "sim":{"dt":0.05,"t_end":1},"initial":{"u0":{"profile":"quarter_sine"}}}"#;
    std::fs::write(dir.path().join("bad.cfg"), cfg).unwrap();
    let out = vidlab(&["simulate", "bad.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = text(&out.stderr);
    assert!(err.contains("bad.cfg") && err.contains("try dt <="), "{err}");
}

#[test]
fn snapshots_have_t_x_u_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"schema":1,"mesh":{"L":1,"N":8},"material":{"C":1,"kernel":{"prony":[{"g":1,"r":1}]}},
                  "sim":{"cfl":0.5,"t_end":0.5},"initial":{"u0":{"profile":"quarter_sine"}},
                  "outputs":{"trace":"t.csv","snapshots":"s.csv","snapshot_stride":5}}"#;
    std::fs::write(dir.path().join("s.cfg"), cfg).unwrap();
    let out = vidlab(&["simulate", "s.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let snap = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
    let mut lines = snap.lines();
    assert_eq!(lines.next(), Some("t,x,u"));
    assert_eq!(lines.next(), Some("0,0,0"));
    assert_eq!(lines.count() % 9, 8);
}

#[test]
fn derive_kernel_burgers_unit() {
    let dir = tempfile::tempdir().unwrap();
    let out = vidlab(&["derive-kernel", "burgers", "1", "1", "1", "1"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let s = text(&out.stdout);
    for want in ["r1 = 2.618", "r2 = 0.381966", "b1 = 0.7236", "b2 = 0.2763", "amplitude,rate"] {
        assert!(s.contains(want), "{want} missing from {s}");
    }
}

#[test]
fn derive_kernel_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(vidlab(&["derive-kernel", "maxwell", "1"], dir.path()).status.code(), Some(2));
    assert_eq!(vidlab(&["derive-kernel", "kelvin", "1", "1"], dir.path()).status.code(), Some(2));
    let json = r#"{"series_burgers":[]}"#;
    assert_eq!(vidlab(&["derive-kernel", "json", json], dir.path()).status.code(), Some(2));
}

#[test]
fn validate_kernel_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let fluid = r#"{"schema":1,"mesh":{"L":1,"N":8},
        "material":{"spring_dashpot":{"maxwell":{"cs":2,"eta":1}}},"sim":{"cfl":0.5,"t_end":1}}"#;
    std::fs::write(dir.path().join("fluid.cfg"), fluid).unwrap();
    assert_eq!(vidlab(&["validate-kernel", "fluid.cfg"], dir.path()).status.code(), Some(1));
    let solid = scenario("maxwell_spring");
    let out = vidlab(&["validate-kernel", solid.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stdout));
    let poly = scenario("poly_p3");
    assert_eq!(vidlab(&["validate-kernel", poly.to_str().unwrap()], dir.path()).status.code(), Some(0));
}

#[test]
fn fit_decay_reads_trace() {
    let dir = tempfile::tempdir().unwrap();
    let mut csv = String::from("t,E\n");
    for i in 0..=100 {
        let t = i as f64 * 0.1;
        csv += &format!("{t},{}\n", 3.0 * (-0.7 * t).exp());
    }
    std::fs::write(dir.path().join("tr.csv"), csv).unwrap();
    let out = vidlab(&["fit-decay", "tr.csv", "E", "exp", "--window", "2", "8"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let s = text(&out.stdout);
    let row: Vec<&str> = s.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "E");
    assert!((row[2].parse::<f64>().unwrap() - 0.7).abs() < 1e-9);
    assert_eq!(row[5], "2");
    assert_eq!(vidlab(&["fit-decay", "tr.csv", "F", "exp"], dir.path()).status.code(), Some(2));
}

#[test]
fn check_lemma_examples() {
    let dir = tempfile::tempdir().unwrap();
    let out = vidlab(&["check-lemma", "1", "1", "1", "3"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(text(&out.stdout).contains("PASS"));
    let out = vidlab(&["check-lemma", "1", "1", "1", "-3"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn scenario_runner_subset() {
    let dir = tempfile::tempdir().unwrap();
    let out = vidlab(&["scenarios", "--out-dir", "out", "elastic_limit", "boundary_dissipation_only"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    assert!(dir.path().join("out/elastic_limit.trace.csv").exists());
    assert!(dir.path().join("out/boundary_dissipation_only.trace.csv").exists());
    assert!(!dir.path().join("out/poly_p3.trace.csv").exists());
    assert_eq!(vidlab(&["scenarios", "nope"], dir.path()).status.code(), Some(2));
}
