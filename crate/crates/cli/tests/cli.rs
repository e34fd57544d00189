use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use mbl_vqe::circuit_io::parse_circuit;
use mbl_vqe::records::RUN_RECORD_SCHEMA;
use serde_json::Value;

const SMALL: &str = r#"
experiment = "witness_sweep"
seed = 4
[sweep]
sizes = [4]
w = [1.5, 8.0]
depths = [1, 2]
[vqe]
n_trials = 4
k_best = 2
max_iters = 150
"#;

fn mbl_vqe(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mbl-vqe"))
        .current_dir(dir)
        .env_remove("MBLVQE_SEED")
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("exp.toml");
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

/// Checks `type`, `required`, `properties`, `items` and `enum`.
fn validate(schema: &Value, v: &Value, path: &str) -> Result<(), String> {
    if let Some(t) = schema.get("type") {
        let types: Vec<&str> = match t {
            Value::String(s) => vec![s.as_str()],
            Value::Array(a) => a.iter().filter_map(Value::as_str).collect(),
            _ => vec![],
        };
        let ok = types.iter().any(|t| match *t {
            "object" => v.is_object(),
            "array" => v.is_array(),
            "string" => v.is_string(),
            "integer" => v.is_i64() || v.is_u64(),
            "number" => v.is_number(),
            "boolean" => v.is_boolean(),
            "null" => v.is_null(),
            _ => false,
        });
        if !ok {
            return Err(format!("{path}: expected {types:?}, got {v}"));
        }
    }
    if let Some(Value::Array(allowed)) = schema.get("enum") {
        if !allowed.contains(v) {
            return Err(format!("{path}: {v} not in enum"));
        }
    }
    if let Some(Value::Array(req)) = schema.get("required") {
        for k in req.iter().filter_map(Value::as_str) {
            if v.get(k).is_none() {
                return Err(format!("{path}: missing `{k}`"));
            }
        }
    }
    if let (Some(Value::Object(props)), Some(obj)) = (schema.get("properties"), v.as_object()) {
        for (k, s) in props {
            if let Some(x) = obj.get(k) {
                validate(s, x, &format!("{path}.{k}"))?;
            }
        }
    }
    if let (Some(items), Some(arr)) = (schema.get("items"), v.as_array()) {
        for (i, x) in arr.iter().enumerate() {
            validate(items, x, &format!("{path}[{i}]"))?;
        }
    }
    Ok(())
}

#[test]
fn reruns_are_byte_identical_and_records_match_the_schema() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let run = || {
        let o = mbl_vqe(dir.path(), &["--config", &cfg, "--out", "a", "--override", "output.cache=false"]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    };
    let read = |p: &str| fs::read(dir.path().join(p)).unwrap();
    run();
    let (csv1, json1) = (read("a/witness_sweep.csv"), read("a/witness_sweep.json"));
    run();
    assert_eq!(read("a/witness_sweep.csv"), csv1);
    assert_eq!(read("a/witness_sweep.json"), json1);
    assert!(!dir.path().join("a/cache").exists());
    let csv = String::from_utf8(read("a/witness_sweep.csv")).unwrap();
    assert!(csv.starts_with("N,W,depth,trials,k_best,mean_eipr,sem_eipr,mean_r,sem_r,ln_one_minus_r\n"));
    assert_eq!(csv.lines().count(), 5);

    let schema: Value = serde_json::from_str(RUN_RECORD_SCHEMA).unwrap();
    let record: Value = serde_json::from_slice(&read("a/witness_sweep.json")).unwrap();
    validate(&schema, &record, "$").unwrap();
    assert_eq!(record["seed"], 4);
    let timing: Value = serde_json::from_slice(&read("a/witness_sweep.timing.json")).unwrap();
    assert_eq!(timing["config_hash"], record["config_hash"]);
}

#[test]
fn seed_precedence_flag_over_env_over_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let seed_of = |out: &str| -> Value {
        let rec: Value = serde_json::from_slice(&fs::read(dir.path().join(out).join("witness_sweep.json")).unwrap()).unwrap();
        rec["seed"].clone()
    };
    let o = Command::new(env!("CARGO_BIN_EXE_mbl-vqe"))
        .current_dir(dir.path())
        .env("MBLVQE_SEED", "77")
        .args(["--config", &cfg, "--out", "env", "--override", "sweep.depths=[1]"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert_eq!(seed_of("env"), 77);
    let o = Command::new(env!("CARGO_BIN_EXE_mbl-vqe"))
        .current_dir(dir.path())
        .env("MBLVQE_SEED", "77")
        .args(["--config", &cfg, "--out", "flag", "--seed", "5", "--override", "sweep.depths=[1]"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert_eq!(seed_of("flag"), 5);
}

#[test]
fn cached_points_survive_and_are_reused() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let o = mbl_vqe(dir.path(), &["--config", &cfg, "--out", "run", "--override", "sweep.depths=[1]"]);
    assert_eq!(code(&o), 0);
    let cache = dir.path().join("run/cache");
    let count = || fs::read_dir(&cache).unwrap().count();
    assert_eq!(count(), 2);
    let first = fs::read(dir.path().join("run/witness_sweep.csv")).unwrap();

    // a larger grid trains only the new points
    let o = mbl_vqe(dir.path(), &["--config", &cfg, "--out", "run"]);
    assert_eq!(code(&o), 0);
    let log = String::from_utf8_lossy(&o.stderr);
    assert_eq!(log.matches("training").count(), 2, "{log}");
    assert_eq!(count(), 4);

    // an interrupted run resumes from the cache with identical output
    let o = mbl_vqe(dir.path(), &["--config", &cfg, "--out", "run", "--override", "sweep.depths=[1]"]);
    assert_eq!(code(&o), 0);
    assert!(!String::from_utf8_lossy(&o.stderr).contains("training"));
    assert_eq!(fs::read(dir.path().join("run/witness_sweep.csv")).unwrap(), first);

    // another experiment over the same grid reuses the trained ensembles
    let o = mbl_vqe(dir.path(), &["vqe-sweep", "--config", &cfg, "--out", "run"]);
    assert_eq!(code(&o), 0);
    assert!(!String::from_utf8_lossy(&o.stderr).contains("training"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let run = |extra: &[&str]| {
        let mut args = vec!["--config", cfg.as_str(), "--out", "o"];
        args.extend_from_slice(extra);
        mbl_vqe(dir.path(), &args)
    };
    assert_eq!(code(&run(&["--override", "sweep.depths=[]"])), 2);
    assert_eq!(code(&run(&["--override", "sweep.sizes=[5]"])), 2);
    assert_eq!(code(&run(&["--override", "vqe.k_best=9"])), 2);
    assert_eq!(code(&run(&["--override", "sweep.bogus=1"])), 2);
    assert_eq!(code(&run(&["--workers", "0"])), 2);
    assert_eq!(code(&mbl_vqe(dir.path(), &["--config", "missing.toml"])), 2);
    let o = run(&["compile", "--override", "sweep.sizes=[10]"]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    let o = run(&["--override", "vqe.learning_rate=1e308", "--override", "output.cache=false"]);
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn compiled_circuit_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"
experiment = "compile"
[sweep]
sizes = [2]
w = [8.0]
[compile]
depth = 2
n_trials = 2
max_iters = 200
"#,
    );
    let o = mbl_vqe(dir.path(), &["--config", &cfg, "--out", "c"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.path().join("c/compiled_N2_W8.circuit")).unwrap();
    let c = parse_circuit(&text).unwrap();
    assert_eq!(c.n_qubits, 3);
    assert_eq!(c.n_params, 0);
    assert_eq!(mbl_vqe::circuit_io::write_circuit(&c), text);
    let rec: Value = serde_json::from_slice(&fs::read(dir.path().join("c/compile.json")).unwrap()).unwrap();
    let fid = rec["points"][0]["row"][4].as_f64().unwrap();
    assert!(fid > 0.0 && fid <= 1.0 + 1e-12);
}

#[test]
fn depth_fit_from_a_sweep_csv() {
    let dir = tempfile::tempdir().unwrap();
    let mut csv = String::from("N,W,depth,trials,k_best,mean_eipr,sem_eipr,mean_r,sem_r,ln_one_minus_r\n");
    for d in [2, 4, 6, 8] {
        let y = -0.5 * d as f64;
        csv += &format!("12,8,{d},100,10,0.9,0.01,{},0.001,{y}\n", 1.0 - y.exp());
    }
    for d in [2, 4] {
        csv += &format!("12,1.5,{d},100,10,0.5,0.01,0.9,0.001,-12\n");
    }
    fs::write(dir.path().join("sweep.csv"), &csv).unwrap();
    let cfg = write_config(dir.path(), "experiment = \"depth_fit\"\n[fit]\ninput = \"sweep.csv\"\n");
    let o = mbl_vqe(dir.path(), &["--config", &cfg, "--out", "f"]);
    // the saturated W=1.5 series has no points above the effective zero
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("W=1.5"));

    let kept: String = csv.lines().filter(|l| !l.starts_with("12,1.5")).map(|l| format!("{l}\n")).collect();
    fs::write(dir.path().join("sweep.csv"), kept).unwrap();
    let o = mbl_vqe(dir.path(), &["--config", &cfg, "--out", "f"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = fs::read_to_string(dir.path().join("f/depth_fit.csv")).unwrap();
    let row: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
    let fitted: f64 = row[4].parse().unwrap();
    assert!((fitted - 17.8).abs() < 1e-9, "{out}");
}
