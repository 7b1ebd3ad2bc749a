//! Tabular results, their renderings and the reproducibility manifest.

use std::collections::BTreeMap;

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Csv,
    Json,
}

/// An assertion that did not hold, with the smallest input showing it.
#[derive(Clone, Debug, PartialEq)]
pub struct Failure {
    pub message: String,
    pub witness: Value,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub command: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub summary: BTreeMap<String, Value>,
    pub failure: Option<Failure>,
}

impl Report {
    pub fn new(command: &str, columns: &[&str]) -> Report {
        Report {
            command: command.to_string(),
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            summary: BTreeMap::new(),
            failure: None,
        }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn note(&mut self, key: &str, value: impl Into<Value>) {
        self.summary.insert(key.to_string(), value.into());
    }

    /// Records a failure; the first one wins.
    pub fn fail(&mut self, message: impl Into<String>, witness: Value) {
        if self.failure.is_none() {
            self.failure = Some(Failure {
                message: message.into(),
                witness,
            });
        }
    }

    fn rows_json(&self) -> Vec<Value> {
        self.rows
            .iter()
            .map(|r| {
                let m: Map<String, Value> = self
                    .columns
                    .iter()
                    .cloned()
                    .zip(r.iter().map(|c| Value::String(c.clone())))
                    .collect();
                Value::Object(m)
            })
            .collect()
    }

    fn failure_json(&self) -> Value {
        match &self.failure {
            Some(f) => json!({"message": f.message, "witness": f.witness}),
            None => Value::Null,
        }
    }

    pub fn render(&self, format: Format) -> Result<String, csv::Error> {
        Ok(match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.columns)?;
                for r in &self.rows {
                    w.write_record(r)?;
                }
                String::from_utf8(w.into_inner().map_err(|e| e.into_error())?)
                    .expect("csv output is utf-8")
            }
            Format::Json => {
                let v = json!({
                    "command": self.command,
                    "columns": self.columns,
                    "rows": self.rows_json(),
                    "summary": self.summary,
                    "failure": self.failure_json(),
                });
                let mut s = serde_json::to_string_pretty(&v).expect("json");
                s.push('\n');
                s
            }
            Format::Text => {
                let mut s = String::new();
                for (k, v) in &self.summary {
                    let shown = match v {
                        Value::String(x) => x.clone(),
                        other => other.to_string(),
                    };
                    s.push_str(&format!("{k}: {shown}\n"));
                }
                if !self.rows.is_empty() {
                    let widths: Vec<usize> = (0..self.columns.len())
                        .map(|i| {
                            self.rows
                                .iter()
                                .map(|r| r[i].len())
                                .chain([self.columns[i].len()])
                                .max()
                                .unwrap()
                        })
                        .collect();
                    let line = |cells: &[String]| {
                        let parts: Vec<String> = cells
                            .iter()
                            .zip(&widths)
                            .map(|(c, w)| format!("{c:<w$}"))
                            .collect();
                        parts.join("  ").trim_end().to_string() + "\n"
                    };
                    s.push_str(&line(&self.columns));
                    for r in &self.rows {
                        s.push_str(&line(r));
                    }
                }
                if let Some(f) = &self.failure {
                    s.push_str(&format!("FAILED: {}\nwitness: {}\n", f.message, f.witness));
                }
                s
            }
        })
    }

    /// Everything needed to rerun the command and check its output.
    pub fn manifest(
        &self,
        config: &BTreeMap<String, String>,
        format: Format,
        output: &str,
    ) -> Value {
        let digest = Sha256::digest(output.as_bytes());
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        json!({
            "tool": "ffcubes",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "config": config,
            "output": {
                "format": format!("{format:?}").to_lowercase(),
                "sha256": hex,
                "bytes": output.len(),
                "rows": self.rows.len(),
            },
            "summary": self.summary,
            "status": if self.failure.is_some() { "assertion-failed" } else { "ok" },
            "failure": self.failure_json(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut r = Report::new("demo", &["B", "count"]);
        r.row(vec!["1".into(), "8".into()]);
        r.row(vec!["2".into(), "64".into()]);
        r.note("slope", 3.0);
        r
    }

    #[test]
    fn renders() {
        let r = sample();
        assert_eq!(r.render(Format::Csv).unwrap(), "B,count\n1,8\n2,64\n");
        let j: Value = serde_json::from_str(&r.render(Format::Json).unwrap()).unwrap();
        assert_eq!(j["rows"][1]["count"], "64");
        assert!(r.render(Format::Text).unwrap().contains("slope: 3.0"));
    }

    #[test]
    fn manifest_hash_tracks_output() {
        let r = sample();
        let out = r.render(Format::Csv).unwrap();
        let a = r.manifest(&BTreeMap::new(), Format::Csv, &out);
        let b = r.manifest(&BTreeMap::new(), Format::Csv, &(out.clone() + " "));
        assert_ne!(a["output"]["sha256"], b["output"]["sha256"]);
        assert_eq!(a["status"], "ok");
    }
}
