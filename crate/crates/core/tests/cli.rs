use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_centroid-sections"))
}

fn run(out: &Path, args: &[&str]) -> Output {
    bin().arg("--out-dir").arg(out).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn without_metadata(path: &Path) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap();
    v.as_object_mut().unwrap().remove("metadata");
    v
}

fn data_rows(path: &Path) -> usize {
    std::fs::read_to_string(path).unwrap().lines().count() - 1
}

#[test]
fn dimension_four_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["construct", "--n", "4"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("intersection body"), "{}", stderr(&o));
}

#[test]
fn unknown_tolerance_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["construct", "--tol", "nonsense=1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn impossible_eps_writes_failure() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["construct", "--eps", "10", "--max-eps-halvings", "1"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let f: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("failure.json")).unwrap()).unwrap();
    assert_eq!(f["schema"], "v1");
    assert_eq!(f["stage"], "eps selection");
    assert!(!dir.path().join("certificate.json").exists());
}

#[test]
fn planar_shapes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["planar", "--shape", "triangle", "--output", "tri.json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["count"], 3);
    assert_eq!(v["directions"].as_array().unwrap().len(), 3);
    assert!(dir.path().join("tri.json").exists());

    let o = run(dir.path(), &["planar", "--shape", "ellipse"]);
    assert!(stdout(&o).contains("symmetric_all"));

    let csv = dir.path().join("quad.csv");
    std::fs::write(&csv, "x,y\n0,0\n4,0\n3,2\n0,1\n").unwrap();
    let o = run(dir.path(), &["planar", "--input", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    let k = v["count"].as_u64().unwrap();
    assert!(k >= 3 && k % 2 == 1);
}

#[test]
fn intersection_test_reports() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["intersection-test", "--body", "m", "--n", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("NOT an intersection body"));
    assert!(stdout(&o).contains("-1.000000000 c_5"), "{}", stdout(&o));
    let o = run(dir.path(), &["intersection-test", "--body", "ball", "--n", "6"]);
    assert!(stdout(&o).starts_with("intersection body"));
    let o = run(dir.path(), &["intersection-test", "--body", "m", "--n", "4"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn construct_verify_plot_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    std::fs::create_dir_all(&a).unwrap();
    std::fs::create_dir_all(&b).unwrap();
    let args = ["construct", "--n", "5", "--alpha-grid", "41"];
    let oa = run(&a, &args);
    assert_eq!(oa.status.code(), Some(0), "{}{}", stdout(&oa), stderr(&oa));
    assert!(stdout(&oa).contains("certificate VALID"));
    let ob = run(&b, &args);
    assert_eq!(ob.status.code(), Some(0));
    assert_eq!(without_metadata(&a.join("certificate.json")), without_metadata(&b.join("certificate.json")));
    assert_eq!(data_rows(&a.join("profiles.csv")), 41);
    assert_eq!(data_rows(&a.join("sections.csv")), 41);

    let cert = a.join("certificate.json");
    let o = run(&a, &["verify", cert.to_str().unwrap(), "--refine", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));
    assert!(a.join("verify_report.json").exists());

    let mut v: serde_json::Value = serde_json::from_slice(&std::fs::read(&cert).unwrap()).unwrap();
    let margin = v["min_section_margin"].as_f64().unwrap();
    v["min_section_margin"] = serde_json::json!(-margin);
    let tampered = dir.path().join("tampered.json");
    std::fs::write(&tampered, serde_json::to_vec(&v).unwrap()).unwrap();
    let o = run(dir.path(), &["verify", tampered.to_str().unwrap(), "--refine", "1"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stdout(&o).contains("FAIL"));

    v["schema"] = serde_json::json!("v0");
    std::fs::write(&tampered, serde_json::to_vec(&v).unwrap()).unwrap();
    let o = run(dir.path(), &["verify", tampered.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("schema"));

    let p = dir.path().join("plots");
    std::fs::create_dir_all(&p).unwrap();
    let o = run(&p, &["plot", cert.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for name in ["rho_M", "phi_lambda", "rho_K", "g_lambda", "g_hat_lambda", "section_centroid"] {
        assert_eq!(data_rows(&p.join(format!("{name}.csv"))), 41, "{name}");
    }
}
