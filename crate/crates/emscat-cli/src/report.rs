//! Machine-readable run reports. JSON carries the full nested report with
//! complex numbers as {re, im}; CSV gets one flat file per table with
//! complex columns split into _re/_im pairs. Timing lives in a separate
//! meta file so reports are byte-identical across reruns.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use emscat::{c64, ComplexVec3};

#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub scenario: String,
    pub config: Value,
    pub warnings: Vec<String>,
    pub scalars: BTreeMap<String, Value>,
    pub tables: BTreeMap<String, Table>,
}

impl Report {
    pub fn new(scenario: &str, config: Value) -> Self {
        Report {
            scenario: scenario.to_string(),
            config,
            warnings: Vec::new(),
            scalars: BTreeMap::new(),
            tables: BTreeMap::new(),
        }
    }

    pub fn real(&mut self, name: &str, v: f64) {
        self.scalars.insert(name.to_string(), json!(v));
    }

    pub fn integer(&mut self, name: &str, v: usize) {
        self.scalars.insert(name.to_string(), json!(v));
    }

    pub fn boolean(&mut self, name: &str, v: bool) {
        self.scalars.insert(name.to_string(), json!(v));
    }

    pub fn text(&mut self, name: &str, v: &str) {
        self.scalars.insert(name.to_string(), json!(v));
    }

    pub fn complex(&mut self, name: &str, v: c64) {
        self.scalars.insert(name.to_string(), complex_json(v));
    }

    pub fn complex_vec(&mut self, name: &str, v: ComplexVec3) {
        self.scalars.insert(
            name.to_string(),
            json!({ "x": complex_json(v.x), "y": complex_json(v.y), "z": complex_json(v.z) }),
        );
    }

    pub fn table(&mut self, name: &str, table: Table) {
        self.tables.insert(name.to_string(), table);
    }

    pub fn write_json(&self, path: &Path) -> Result<(), String> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| format!("serialize report: {e}"))?;
        std::fs::write(path, text + "\n")
            .map_err(|e| format!("cannot write {}: {e}", path.display()))
    }

    pub fn write_csv(&self, dir: &Path) -> Result<(), String> {
        for (name, table) in &self.tables {
            let path = dir.join(format!("{name}.csv"));
            let mut w = csv::Writer::from_path(&path)
                .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
            w.write_record(&table.columns).map_err(|e| e.to_string())?;
            for row in &table.rows {
                // f64 Display is shortest round-trip, lossless
                w.write_record(row.iter().map(|v| format!("{v}")))
                    .map_err(|e| e.to_string())?;
            }
            w.flush().map_err(|e| e.to_string())?;
        }
        let path = dir.join("scalars.csv");
        let mut w = csv::Writer::from_path(&path)
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
        w.write_record(["name", "value"]).map_err(|e| e.to_string())?;
        for (name, value) in &self.scalars {
            for (suffix, v) in flatten_scalar(value) {
                w.write_record([format!("{name}{suffix}"), v])
                    .map_err(|e| e.to_string())?;
            }
        }
        w.flush().map_err(|e| e.to_string())
    }
}

pub fn complex_json(v: c64) -> Value {
    json!({ "re": v.re, "im": v.im })
}

fn flatten_scalar(value: &Value) -> Vec<(String, String)> {
    match value {
        Value::Object(map) => map
            .iter()
            .flat_map(|(k, v)| {
                flatten_scalar(v)
                    .into_iter()
                    .map(move |(s, val)| (format!("_{k}{s}"), val))
            })
            .collect(),
        Value::Number(n) => vec![(String::new(), n.to_string())],
        Value::Bool(b) => vec![(String::new(), b.to_string())],
        Value::String(s) => vec![(String::new(), s.clone())],
        _ => vec![(String::new(), value.to_string())],
    }
}

/// Columns x, y, z, <prefix>_{x,y,z}_{re,im} for a field sample row.
pub fn field_columns(prefix: &str) -> Vec<String> {
    let mut cols = vec!["x".into(), "y".into(), "z".into()];
    for comp in ["x", "y", "z"] {
        for part in ["re", "im"] {
            cols.push(format!("{prefix}_{comp}_{part}"));
        }
    }
    cols
}

pub fn field_row(at: emscat::Vec3, e: ComplexVec3) -> Vec<f64> {
    vec![
        at.x, at.y, at.z, e.x.re, e.x.im, e.y.re, e.y.im, e.z.re, e.z.im,
    ]
}
