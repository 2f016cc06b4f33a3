use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn run(verb: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_loiter"))
        .arg(verb)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, v: &Value) -> PathBuf {
    let p = dir.join("config.json");
    fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p
}

fn base(extra: Value) -> Value {
    let mut v = json!({
        "area": {"x_extent_m": 500, "y_extent_m": 650},
        "r_c_m": 73.20508075688772,
        "platform": {"speed_mps": 15, "r_min_turn_m": 11.47}
    });
    v.as_object_mut().unwrap().extend(extra.as_object().unwrap().clone());
    v
}

fn csv_records(path: &Path) -> (Vec<String>, Vec<csv::StringRecord>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let h = r.headers().unwrap().iter().map(str::to_string).collect();
    (h, r.records().map(Result::unwrap).collect())
}

fn svg_circles(path: &Path) -> usize {
    let text = fs::read_to_string(path).unwrap();
    let doc = roxmltree::Document::parse(&text).expect("well-formed SVG");
    doc.descendants().filter(|n| n.has_tag_name("circle")).count()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn pack_writes_layouts_with_expected_counts() {
    let dir = TempDir::new().unwrap();
    for (packing, n) in [("hexagon", 35), ("square", 42)] {
        let cfg = write_config(dir.path(), &base(json!({"packing": packing, "deployment": {"radius_m": 70}})));
        let out = dir.path().join(packing);
        let o = run("pack", &cfg, &out, &[]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let (h, rows) = csv_records(&out.join("layout.csv"));
        assert_eq!(h, ["id", "row", "x_m", "y_m", "r_l_m"]);
        assert_eq!(rows.len(), n);
        assert_eq!(svg_circles(&out.join("layout.svg")), n);
        let (_, t1) = csv_records(&out.join("table1.csv"));
        assert_eq!(&t1[0][1], "exact");
    }
}

#[test]
fn table1_mode_flag_switches_variant() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), &base(json!({"deployment": {"radius_m": 70}})));
    let o = run("pack", &cfg, &dir.path().join("p"), &["--table1-mode", "paper"]);
    assert_eq!(code(&o), 0);
    let (_, t1) = csv_records(&dir.path().join("p/table1.csv"));
    assert_eq!(&t1[0][1], "paper");
    let bad = run("pack", &cfg, &dir.path().join("q"), &["--table1-mode", "fuzzy"]);
    assert_ne!(code(&bad), 0);
}

#[test]
fn optimize_reports_radius_or_deficit() {
    let dir = TempDir::new().unwrap();
    let o = run("optimize", &scenario("optimize_17.json"), &dir.path().join("ok"), &[]);
    assert_eq!(code(&o), 0);
    let (h, rows) = csv_records(&dir.path().join("ok/optimize.csv"));
    let r: f64 = rows[0][h.iter().position(|c| c == "r_l_m").unwrap()].parse().unwrap();
    assert!((r - 96.22).abs() < 0.01, "{r}");
    assert_eq!(svg_circles(&dir.path().join("ok/layout.svg")), 17);

    let cfg = write_config(dir.path(), &base(json!({"deployment": {"budget_n": 16}})));
    let o = run("optimize", &cfg, &dir.path().join("short"), &[]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stdout).contains("deficit 1"));
}

#[test]
fn simulate_table2_recovers_to_seventeen() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("sim");
    let o = run("simulate", &scenario("table2.json"), &out, &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(svg_circles(&out.join("pre_failure.svg")), 35);
    assert_eq!(svg_circles(&out.join("recovered.svg")), 17);
    let (h, rows) = csv_records(&out.join("layout.csv"));
    assert_eq!(rows.len(), 17);
    let r: f64 = rows[0][h.iter().position(|c| c == "r_l_m").unwrap()].parse().unwrap();
    assert!((r - 96.225).abs() < 0.01);

    let (h, events) = csv_records(&out.join("events.csv"));
    assert_eq!(h, ["t_s", "event", "detail"]);
    let kinds: Vec<&str> = events.iter().map(|e| e.get(1).unwrap()).collect();
    for k in ["deploy", "failure", "detect", "recover", "transition_start", "transition_end"] {
        assert!(kinds.contains(&k), "missing {k}");
    }
    let times: Vec<f64> = events.iter().map(|e| e[0].parse().unwrap()).collect();
    assert!(times.windows(2).all(|w| w[0] <= w[1]));

    let (h, _) = csv_records(&out.join("transitions.csv"));
    assert_eq!(h, ["uav_id", "t_s", "x_m", "y_m", "heading_rad"]);
}

#[test]
fn losing_everyone_exits_three() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        &base(json!({"deployment": {"radius_m": 70}, "failures": [{"time_s": 1, "count": 35}]})),
    );
    let out = dir.path().join("o");
    let o = run("simulate", &cfg, &out, &[]);
    assert_eq!(code(&o), 3);
    let events = fs::read_to_string(out.join("events.csv")).unwrap();
    assert!(events.contains("RecoveryFailed"), "{events}");
    assert!(out.join("manifest.json").exists());
}

#[test]
fn manifest_is_stable_across_runs() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        assert_eq!(code(&run("simulate", &scenario("table2.json"), out, &[])), 0);
    }
    let ma = fs::read_to_string(a.join("manifest.json")).unwrap();
    let mb = fs::read_to_string(b.join("manifest.json")).unwrap();
    assert_eq!(ma, mb);
    let entries: Vec<Value> = serde_json::from_str(&ma).unwrap();
    assert!(entries.len() >= 6);
    for e in &entries {
        let name = e["file"].as_str().unwrap();
        let bytes = fs::read(a.join(name)).unwrap();
        use sha2::Digest;
        assert_eq!(e["sha256"].as_str().unwrap(), hex::encode(sha2::Sha256::digest(&bytes)));
    }
}

#[test]
fn seed_flag_changes_the_draw() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(code(&run("simulate", &scenario("table2.json"), &a, &[])), 0);
    run("simulate", &scenario("table2.json"), &b, &["--seed", "1"]);
    let ea = fs::read_to_string(a.join("events.csv")).unwrap();
    let eb = fs::read_to_string(b.join("events.csv")).unwrap();
    let failure = |s: &str| s.lines().find(|l| l.contains(",failure,")).unwrap().to_string();
    assert_ne!(failure(&ea), failure(&eb));
}

#[test]
fn sweep_writes_table_and_plot() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("s");
    let o = run("sweep", &scenario("sweep.json"), &out, &[]);
    assert_eq!(code(&o), 0);
    let (h, rows) = csv_records(&out.join("sweep.csv"));
    assert_eq!(h, ["r_init_m", "loss_fraction", "survivors", "r_new_m", "regime", "ideal_r_new_m"]);
    assert_eq!(rows.len(), 5 * 21);
    assert_eq!(svg_circles(&out.join("sweep.svg")), 0);
    // infeasible rows leave r_new empty
    assert!(rows.iter().any(|r| &r[4] == "Infeasible" && r[3].is_empty()));
}

#[test]
fn path_between_circles() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("p");
    let o = run("path", &scenario("path.json"), &out, &[]);
    assert_eq!(code(&o), 0);
    assert_eq!(svg_circles(&out.join("path.svg")), 2);
    let (h, rows) = csv_records(&out.join("path.csv"));
    assert_eq!(h, ["uav_id", "t_s", "x_m", "y_m", "heading_rad"]);
    assert!(rows.len() > 10);
    assert!(rows.iter().all(|r| &r[0] == "3"));
}

#[test]
fn path_to_same_circle_is_a_point() {
    let dir = TempDir::new().unwrap();
    let c = json!({"center_m": [100, 100], "radius_m": 60});
    let cfg = write_config(dir.path(), &base(json!({"path": {"source": c, "target": c}})));
    let o = run("path", &cfg, &dir.path().join("p"), &[]);
    assert_eq!(code(&o), 0);
    let svg = fs::read_to_string(dir.path().join("p/path.svg")).unwrap();
    assert!(svg.contains("zero-length"));
    assert!(!svg.contains("<polyline"));
}

#[test]
fn path_tighter_than_turn_radius_is_a_planning_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        &base(json!({"path": {
            "source": {"center_m": [0, 0], "radius_m": 60},
            "target": {"center_m": [200, 0], "radius_m": 5}
        }})),
    );
    assert_eq!(code(&run("path", &cfg, &dir.path().join("p"), &[])), 4);
}

#[test]
fn config_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let mut v = base(json!({"deployment": {"radius_m": 70}}));
    v["area"]["x_extent_m"] = json!(0);
    let cfg = write_config(dir.path(), &v);
    assert_eq!(code(&run("pack", &cfg, &dir.path().join("o"), &[])), 2);

    let cfg = write_config(dir.path(), &base(json!({"deployment": {"budget_n": 17}})));
    assert_eq!(code(&run("pack", &cfg, &dir.path().join("o"), &[])), 2);

    fs::write(dir.path().join("broken.json"), "{ not json").unwrap();
    assert_eq!(code(&run("pack", &dir.path().join("broken.json"), &dir.path().join("o"), &[])), 2);
    assert_eq!(code(&run("pack", &dir.path().join("missing.json"), &dir.path().join("o"), &[])), 2);

    let cfg = write_config(dir.path(), &base(json!({"deployment": {"radius_m": 70}})));
    assert_eq!(code(&run("pack", &cfg, &dir.path().join("o"), &["--phase-samples", "2"])), 2);
}
