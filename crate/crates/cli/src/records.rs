//! Run records, CSV tables and the per-point result cache.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context as _;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;

pub const SCHEMA_VERSION: u32 = 1;

/// JSON schema of [`RunRecord`] files.
pub const RUN_RECORD_SCHEMA: &str = include_str!("../schema/run_record.schema.json");

/// One grid point: a CSV row plus optional per-trial detail for the JSON
/// record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub key: String,
    pub row: Vec<Value>,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub detail: Value,
}

/// Everything needed to reproduce and audit a run. Contains no timing, so
/// identical inputs give identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema_version: u32,
    pub software_version: String,
    pub experiment: String,
    pub config_hash: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub columns: Vec<String>,
    pub points: Vec<PointRecord>,
}

impl RunRecord {
    pub fn new(cfg: &ExperimentConfig, columns: &[&str], points: Vec<PointRecord>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            software_version: env!("CARGO_PKG_VERSION").to_owned(),
            experiment: cfg.experiment.name().to_owned(),
            config_hash: cfg.hash(),
            seed: cfg.seed,
            config: cfg.clone(),
            columns: columns.iter().map(|s| (*s).to_owned()).collect(),
            points,
        }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric value of `name` in every row (`NaN` for nulls).
    pub fn values(&self, name: &str) -> Vec<f64> {
        let Some(k) = self.column(name) else {
            return Vec::new();
        };
        self.points
            .iter()
            .map(|p| p.row[k].as_f64().unwrap_or(f64::NAN))
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for p in &self.points {
            w.write_record(p.row.iter().map(cell)).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("record serializes");
        s.push('\n');
        s
    }

    /// Write `<name>.csv` and `<name>.json` into `dir`; returns both paths.
    pub fn write(&self, dir: &Path) -> anyhow::Result<(PathBuf, PathBuf)> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let csv_path = dir.join(format!("{}.csv", self.experiment));
        let json_path = dir.join(format!("{}.json", self.experiment));
        fs::write(&csv_path, self.to_csv()).with_context(|| format!("writing {}", csv_path.display()))?;
        fs::write(&json_path, self.to_json()).with_context(|| format!("writing {}", json_path.display()))?;
        Ok((csv_path, json_path))
    }
}

/// CSV text of one JSON value; `null` (a non-finite number) prints `NaN`.
pub fn cell(v: &Value) -> String {
    match v {
        Value::Null => "NaN".to_owned(),
        Value::String(s) => s.clone(),
        Value::Number(n) => match (n.as_u64(), n.as_i64()) {
            (Some(u), _) => u.to_string(),
            (None, Some(i)) => i.to_string(),
            _ => format!("{}", n.as_f64().unwrap_or(f64::NAN)),
        },
        other => other.to_string(),
    }
}

/// Number value; non-finite values become `null`.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

/// Content-addressed store of finished grid points.
#[derive(Debug, Clone)]
pub struct PointCache {
    dir: Option<PathBuf>,
    config_hash: String,
}

impl PointCache {
    pub fn new(dir: Option<PathBuf>, config_hash: String) -> Self {
        Self { dir, config_hash }
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        let dir = self.dir.as_ref()?;
        let h = Sha256::digest(format!("{}|{key}", self.config_hash).as_bytes());
        Some(dir.join(format!("{}.json", hex::encode(h))))
    }

    pub fn get<T: for<'de> Deserialize<'de>>(&self, key: &str) -> Option<T> {
        let text = fs::read_to_string(self.path(key)?).ok()?;
        serde_json::from_str(&text).ok()
    }

    pub fn put<T: Serialize>(&self, key: &str, value: &T) -> anyhow::Result<()> {
        let Some(path) = self.path(key) else {
            return Ok(());
        };
        fs::create_dir_all(path.parent().expect("cache file has a parent"))?;
        // write-then-rename so an interrupted run never leaves a torn entry
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, serde_json::to_vec(value)?)?;
        fs::rename(&tmp, &path)?;
        Ok(())
    }

    /// Cached value for `key`, or compute, store and return it.
    pub fn get_or_compute<T, F>(&self, key: &str, f: F) -> anyhow::Result<T>
    where
        T: Serialize + for<'de> Deserialize<'de>,
        F: FnOnce() -> anyhow::Result<T>,
    {
        if let Some(v) = self.get(key) {
            return Ok(v);
        }
        let v = f()?;
        self.put(key, &v)?;
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells() {
        assert_eq!(cell(&num(8.0)), "8");
        assert_eq!(cell(&num(0.1)), "0.1");
        assert_eq!(cell(&num(f64::NAN)), "NaN");
        assert_eq!(cell(&Value::from(12usize)), "12");
        assert_eq!(cell(&Value::from(true)), "true");
        assert_eq!(cell(&Value::from("density")), "density");
    }

    #[test]
    fn cache_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let c = PointCache::new(Some(dir.path().to_owned()), "abc".into());
        let x = vec![0.1 + 0.2, 1e-300, -3.5];
        let mut calls = 0;
        let a: Vec<f64> = c.get_or_compute("p", || {
            calls += 1;
            Ok(x.clone())
        })
        .unwrap();
        let b: Vec<f64> = c.get_or_compute("p", || unreachable!()).unwrap();
        assert_eq!(calls, 1);
        assert_eq!(a, b);
        assert_eq!(b, x);
        let other = PointCache::new(Some(dir.path().to_owned()), "abd".into());
        assert!(other.get::<Vec<f64>>("p").is_none());
    }
}
