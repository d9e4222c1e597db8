use std::path::PathBuf;
use std::process::{Command, Output};
use std::sync::Arc;

use ifmap::cli::report::SWEEP_HEADER;
use ifmap::cli::{load_scenario, parse_scenario, ScenarioFile};
use ifmap::{power_mapping, solve_canonical, CanonicalProblem, MonotoneNorm, SolverConfig};
use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name).display().to_string()
}

fn ifmap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ifmap"))
        .args(args)
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let o = ifmap(&all);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_str(&stdout(&o)).unwrap()
}

#[test]
fn exit_codes() {
    let feasible = fixture("two_bs_db.json");
    let overloaded = fixture("two_bs_overloaded.json");
    let cases: &[(&[&str], i32)] = &[
        (&["feasibility", "--scenario", &feasible], 0),
        (&["feasibility", "--scenario", &overloaded], 0),
        (&["fixed-point", "--scenario", &feasible], 0),
        (&["fixed-point", "--scenario", &overloaded], 2),
        (&["fixed-point", "--scenario", "builtin:log-sqrt:alpha=3"], 2),
        (&["spectral-radius", "--scenario", "builtin:affine-1d"], 0),
        (&["feasibility", "--scenario", "/no/such/file.json"], 1),
        (&["feasibility", "--scenario", "builtin:nope"], 1),
        (&["feasibility"], 1),
        (&["sweep", "--scenario", "builtin:grid5", "--budgets", "3:1:4"], 1),
        (&["maxmin", "--scenario", "builtin:grid5", "--budget", "-1"], 1),
        (&["feasibility", "--scenario", &feasible, "--capped", "--tol", "0"], 1),
        (&["--help"], 0),
    ];
    for (args, code) in cases {
        let o = ifmap(args);
        assert_eq!(o.status.code(), Some(*code), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn malformed_scenario_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{\n  \"num_bs\": 1,\n  \"num_users\": \n").unwrap();
    let o = ifmap(&["feasibility", "--scenario", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("broken.json: line 4"), "{err}");
}

#[test]
fn feasibility_json_schema() {
    let v = json(&["feasibility", "--scenario", "builtin:log-sqrt:alpha=0.5"]);
    let result = v["result"].as_object().unwrap();
    let mut keys: Vec<&str> = result.keys().map(String::as_str).collect();
    keys.sort_unstable();
    assert_eq!(keys, ["boundary_inconclusive", "feasible", "rho"]);
    assert!((result["rho"].as_f64().unwrap() - 0.5).abs() < 1e-6);
    assert_eq!(result["feasible"], Value::Bool(true));

    let v = json(&["feasibility", "--scenario", &fixture("two_bs_overloaded.json")]);
    assert_eq!(v["result"]["feasible"], Value::Bool(false));
    assert!(v["result"]["rho"].as_f64().unwrap() > 1.0);
}

#[test]
fn boundary_verdict_is_null() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("edge.json");
    // a 2x2 coupling matrix with both off-diagonal entries ln 2 / ln 2 = 1
    let doc = format!(
        r#"{{"num_bs": 2, "num_users": 2, "assignment": [0, 1],
            "pathloss": {{"units": "linear", "values": [[1.0, 1.0], [1.0, 1.0]]}},
            "demands_bps": [{d}, {d}], "resource_blocks": 1, "bandwidth_hz": 1.0,
            "noise": {{"noise_power_w": 1.0}}, "power_w": [1.0, 1.0]}}"#,
        d = 1.0 / std::f64::consts::LN_2
    );
    std::fs::write(&path, doc).unwrap();
    let v = json(&["feasibility", "--scenario", path.to_str().unwrap()]);
    assert_eq!(v["result"]["feasible"], Value::Null);
    assert_eq!(v["result"]["boundary_inconclusive"], Value::Bool(true));
}

#[test]
fn sweep_csv_schema_and_invariants() {
    let o = ifmap(&["sweep", "--scenario", "builtin:grid5", "--budgets", "1e-3:1e3:25log", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    let tp = lines.next().unwrap();
    let tp: f64 = tp.strip_prefix("# transition_point=").expect("transition point line").parse().unwrap();
    assert!(tp > 0.0);
    assert_eq!(lines.next(), Some(SWEEP_HEADER));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|f| f.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 25);
    for r in &rows {
        assert_eq!(r.len(), 6);
        let [budget, u, e, ub, eb, lambda] = r[..] else { unreachable!() };
        assert!(budget > 0.0 && u > 0.0 && e > 0.0);
        assert!(u <= ub * (1.0 + 1e-10), "{r:?}");
        assert!(e <= eb * (1.0 + 1e-10), "{r:?}");
        assert!((u * lambda - 1.0).abs() < 1e-9);
    }
    for w in rows.windows(2) {
        assert!(w[1][0] > w[0][0]);
        assert!(w[1][1] > w[0][1]);
        assert!(w[1][2] <= w[0][2] * (1.0 + 1e-10));
    }
    assert!(!text.lines().skip(1).any(|l| l.contains(' ')));
}

#[test]
fn output_is_deterministic_and_independent_of_jobs() {
    let base = ["sweep", "--scenario", "builtin:grid5:seed=3", "--budgets", "1e-2:1e2:9log", "--format", "json"];
    let a = ifmap(&[&base[..], &["--jobs", "1"]].concat());
    let b = ifmap(&[&base[..], &["--jobs", "1"]].concat());
    let c = ifmap(&[&base[..], &["--jobs", "4"]].concat());
    assert_eq!(a.stdout, b.stdout);
    let strip = |o: &Output| {
        let mut v: Value = serde_json::from_slice(&o.stdout).unwrap();
        v.as_object_mut().unwrap().remove("command");
        v
    };
    assert_eq!(strip(&a), strip(&c));
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["timestamp"], 1_700_000_000);
}

#[test]
fn output_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("radius.csv");
    let o = ifmap(&[
        "spectral-radius",
        "--scenario",
        "builtin:log-sqrt:alpha=0.25",
        "--format",
        "csv",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.lines().count() >= 2);

    let o = ifmap(&["feasibility", "--scenario", "builtin:affine-1d", "--output", "/no/such/dir/out.txt"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn maxmin_matches_library() {
    let path = fixture("two_bs_db.json");
    let v = json(&["maxmin", "--scenario", &path, "--budget", "1.0"]);
    let s = load_scenario(path.as_ref()).unwrap();
    let prob = CanonicalProblem::single_norm(Arc::new(power_mapping(&s).unwrap()), MonotoneNorm::linf()).unwrap();
    let sol = solve_canonical(&prob, 1.0, &SolverConfig::default()).unwrap();
    assert_eq!(v["result"]["utility"].as_f64().unwrap(), sol.utility);
    assert_eq!(v["result"]["lambda"].as_f64().unwrap(), sol.lambda);
    let powers: Vec<f64> = serde_json::from_value(v["result"]["powers"].clone()).unwrap();
    assert_eq!(powers, sol.power.into_vec());
    assert!((powers.iter().cloned().fold(0.0, f64::max) - 1.0).abs() < 1e-12);
}

#[test]
fn verify_axioms_reports_each_mapping() {
    let v = json(&["verify-axioms", "--scenario", "builtin:grid5", "--samples", "40"]);
    let mappings = v["result"]["mappings"].as_array().unwrap();
    assert!(!mappings.is_empty());
    for m in mappings {
        let monotone = m["results"].as_array().unwrap().iter().find(|r| r["axiom"] == "monotonicity").unwrap();
        assert_eq!(monotone["passed"], Value::Bool(true), "{}", m["name"]);
    }
    let table = stdout(&ifmap(&["verify-axioms", "--scenario", "builtin:log-sqrt", "--samples", "40"]));
    assert!(table.contains("monotonicity"));
}

#[test]
fn table_format_is_aligned() {
    let text = stdout(&ifmap(&["sweep", "--scenario", "builtin:affine-1d", "--budgets", "0.5:8:5", "--norm", "l1"]));
    let widths: Vec<usize> =
        text.lines().skip_while(|l| !l.trim_start().starts_with("budget")).take(6).map(|l| l.len()).collect();
    assert_eq!(widths.len(), 6);
    assert!(widths.iter().all(|&w| w == widths[0]), "{text}");
}

#[test]
fn scenario_round_trip() {
    for name in ["one_bs.json", "two_bs_db.json", "two_bs_overloaded.json", "grid5_seed7.json"] {
        let s = load_scenario(fixture(name).as_ref()).unwrap();
        let echo = ScenarioFile::from_scenario(&s).to_json();
        assert_eq!(parse_scenario(&echo, "echo").unwrap(), s, "{name}");
    }
}

#[test]
fn decibel_values_are_gains() {
    let s = load_scenario(fixture("two_bs_db.json").as_ref()).unwrap();
    assert!((s.gains[0][0] / 10f64.powf(-9.5) - 1.0).abs() < 1e-14);
    assert!((s.gains[1][3] / 10f64.powf(-10.2) - 1.0).abs() < 1e-14);
    let expected_noise = 10f64.powf((-174.0 - 30.0) / 10.0) * 180_000.0;
    assert!((s.noise_w / expected_noise - 1.0).abs() < 1e-14);
}

#[test]
fn bundled_grid_matches_builtin() {
    let file = load_scenario(fixture("grid5_seed7.json").as_ref()).unwrap();
    assert_eq!(file, ifmap::cli::scenario::grid5(7).unwrap());
    let a = json(&["feasibility", "--scenario", &fixture("grid5_seed7.json")]);
    let b = json(&["feasibility", "--scenario", "builtin:grid5:seed=7"]);
    assert_eq!(a["result"], b["result"]);
}
