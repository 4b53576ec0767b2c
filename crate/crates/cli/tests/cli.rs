use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn terrace(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_terrace")).args(args).output().expect("spawn terrace")
}

fn run_in(sub: &str, scenario: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![sub, "--scenario", scenario.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    terrace(&args)
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn check_schema(schema: &str, doc: &Path) {
    let s = read_json(&root().join("schemas").join(schema));
    let v = jsonschema::validator_for(&s).expect("schema compiles");
    let d = read_json(doc);
    let errs: Vec<String> = v.iter_errors(&d).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errs.is_empty(), "{} vs {schema}: {errs:?}", doc.display());
}

const SMALL: &str = r#"
name = "small"
alpha = 1.0
seed = 3
t_final = 10.0

[potential]
builtin = "nagumo"
params = { a = 0.25 }

[grid]
x_min = -30.0
x_max = 30.0
dx = 0.1
dt = "auto"

[initial]
plateaus = [[1.0], [0.0]]
interfaces = [0.0]
noise = 0.01

[snapshots]
every = 0.5

[diagnostics]
scalar_every = 10

[[diagnostics.frames]]
c = 0.3
"#;

fn scenario(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn simulate_is_deterministic() {
    let d = tempfile::tempdir().unwrap();
    let sc = scenario(d.path(), "small.toml", SMALL);
    let (a, b) = (d.path().join("a"), d.path().join("b"));
    assert!(run_in("simulate", &sc, &a, &[]).status.success());
    assert!(run_in("simulate", &sc, &b, &["--threads", "2"]).status.success());
    for f in ["snapshots.ndjson", "scalars.csv", "diagnostics.csv", "run.json", "frame_0.json"] {
        let x = std::fs::read(a.join(f)).unwrap();
        let y = std::fs::read(b.join(f)).unwrap();
        assert!(!x.is_empty());
        assert!(x == y, "{f} differs between identical runs");
    }
    // a different seed changes the noise
    let sc2 = scenario(d.path(), "small2.toml", &SMALL.replace("seed = 3", "seed = 4"));
    let c = d.path().join("c");
    assert!(run_in("simulate", &sc2, &c, &[]).status.success());
    assert!(std::fs::read(a.join("snapshots.ndjson")).unwrap() != std::fs::read(c.join("snapshots.ndjson")).unwrap());
}

#[test]
fn zero_final_time_gives_the_initial_snapshot_only() {
    let d = tempfile::tempdir().unwrap();
    let sc = scenario(d.path(), "zero.toml", &SMALL.replace("t_final = 10.0", "t_final = 0.0"));
    let out = d.path().join("o");
    assert!(run_in("simulate", &sc, &out, &[]).status.success());
    let text = std::fs::read_to_string(out.join("snapshots.ndjson")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1);
    let s: Value = serde_json::from_str(lines[0]).unwrap();
    assert_eq!(s["t"].as_f64(), Some(0.0));
    assert_eq!(read_json(&out.join("run.json"))["steps"].as_u64(), Some(0));
}

#[test]
fn nagumo_depth_difference() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().join("o");
    let r = run_in("analyze-potential", &root().join("scenarios/nagumo.toml"), &out, &[]);
    assert!(r.status.success());
    let a = read_json(&out.join("analysis.json"));
    let dv = a["analysis"]["delta_v"].as_f64().unwrap();
    assert!((dv - 1.0 / 24.0).abs() < 1e-12, "{dv}");
    check_schema("analysis.schema.json", &out.join("analysis.json"));
}

#[test]
fn outputs_match_schemas() {
    let d = tempfile::tempdir().unwrap();
    let sc = scenario(d.path(), "small.toml", SMALL);
    let o = d.path().join("sim");
    assert!(run_in("simulate", &sc, &o, &[]).status.success());
    check_schema("run.schema.json", &o.join("run.json"));
    check_schema("frame_reports.schema.json", &o.join("frame_0.json"));

    let f = d.path().join("fronts");
    assert!(run_in("solve-front", &root().join("scenarios/triple_well.toml"), &f, &[]).status.success());
    check_schema("library.schema.json", &f.join("library.json"));
    let lib = read_json(&f.join("library.json"));
    for e in lib["fronts"].as_array().unwrap() {
        let csv = f.join(e["csv"].as_str().unwrap());
        assert!(csv.exists());
        check_schema("profile.schema.json", &csv.with_extension("json"));
    }

    let t = d.path().join("terrace");
    let r = run_in("fit-terrace", &root().join("scenarios/nagumo_bump.toml"), &t, &[]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    for side in ["left", "right"] {
        check_schema("terrace_fit.schema.json", &t.join(format!("terrace_{side}.json")));
    }
    check_schema("center.schema.json", &t.join("center.json"));
}

#[test]
fn invalid_input_exits_with_two() {
    let d = tempfile::tempdir().unwrap();
    let sc = scenario(d.path(), "bad.toml", &SMALL.replace("dt = \"auto\"", "dt = 1.0"));
    let out = d.path().join("o");
    std::fs::create_dir_all(&out).unwrap();
    let r = run_in("simulate", &sc, &out, &[]);
    assert_eq!(r.status.code(), Some(2));
    check_schema("error.schema.json", &out.join("error.json"));
    let e = read_json(&out.join("error.json"));
    assert_eq!(e["invalid_input"], Value::Bool(true));
    assert_eq!(e["operation"], "simulate");

    let close = SMALL.replace("interfaces = [0.0]", "interfaces = [25.0]");
    let r = run_in("simulate", &scenario(d.path(), "close.toml", &close), &out, &[]);
    assert_eq!(r.status.code(), Some(2));
    assert_eq!(read_json(&out.join("error.json"))["module"], "pdesim");

    let r = terrace(&["simulate"]);
    assert_eq!(r.status.code(), Some(2));
    let r = run_in("simulate", &scenario(d.path(), "junk.toml", "name = 3"), &out, &[]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn failed_fit_exits_with_one_and_keeps_outputs() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().join("o");
    let r = run_in("fit-terrace", &root().join("scenarios/allen_cahn_wall.toml"), &out, &[]);
    assert_eq!(r.status.code(), Some(1));
    let e = read_json(&out.join("error.json"));
    assert_eq!(e["module"], "terrace");
    assert!(out.join("snapshots.ndjson").exists());
    assert!(out.join("run.json").exists());
}

#[test]
fn bundled_scenarios_load() {
    let d = tempfile::tempdir().unwrap();
    for entry in std::fs::read_dir(root().join("scenarios")).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "toml") {
            let out = d.path().join(p.file_stem().unwrap());
            let r = run_in("analyze-potential", &p, &out, &[]);
            assert!(r.status.success(), "{}: {}", p.display(), String::from_utf8_lossy(&r.stderr));
        }
    }
}

#[test]
fn verify_runs_the_acceptance_table() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().join("v");
    let r = terrace(&["verify", "--out", out.to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&r.stdout);
    for id in 1..=11 {
        assert!(stdout.contains(&format!("] {id:>2}  ")), "criterion {id} missing:\n{stdout}");
    }
    check_schema("verify.schema.json", &out.join("verify.json"));
    let v = read_json(&out.join("verify.json"));
    assert_eq!(r.status.code(), Some(if v["all_pass"] == Value::Bool(true) { 0 } else { 1 }));
}

#[test]
fn schemas_reject_malformed_documents() {
    let s = read_json(&root().join("schemas/error.schema.json"));
    let v = jsonschema::validator_for(&s).unwrap();
    let good = serde_json::json!({"operation": "simulate", "module": "pdesim", "message": "x", "invalid_input": true});
    assert!(v.is_valid(&good));
    let missing = serde_json::json!({"operation": "simulate", "module": "pdesim", "message": "x"});
    assert!(!v.is_valid(&missing));
    let extra = serde_json::json!({"operation": "simulate", "module": "pdesim", "message": "x", "invalid_input": true, "z": 1});
    assert!(!v.is_valid(&extra));
}
