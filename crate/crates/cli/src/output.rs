use std::io::Write;

use serde_json::{json, Map, Value};

use crate::config::{Format, Options};
use crate::CliError;

pub fn num(x: f64) -> String {
    format!("{x:e}")
}

/// A report ready for writing: `#` metadata lines, a header row and data rows
/// for CSV, or one JSON object holding the metadata and the payload.
pub struct Document {
    pub meta: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub json: Value,
}

impl Document {
    pub fn new(command: &str) -> Self {
        let meta = vec![
            ("tool".to_string(), format!("cole-lab {}", env!("CARGO_PKG_VERSION"))),
            ("command".to_string(), command.to_string()),
        ];
        Document { meta, header: Vec::new(), rows: Vec::new(), json: Value::Null }
    }

    pub fn meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn table(mut self, header: &[&str], rows: Vec<Vec<String>>) -> Self {
        self.header = header.iter().map(|s| s.to_string()).collect();
        self.rows = rows;
        self
    }

    pub fn header(mut self, header: Vec<String>, rows: Vec<Vec<String>>) -> Self {
        self.header = header;
        self.rows = rows;
        self
    }

    pub fn payload(mut self, v: Value) -> Self {
        self.json = v;
        self
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.meta {
            s.push_str(&format!("# {k}: {v}\n"));
        }
        s.push_str(&self.header.join(","));
        s.push('\n');
        for row in &self.rows {
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self) -> String {
        let meta: Map<String, Value> = self.meta.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
        let doc = json!({ "meta": meta, "data": self.json });
        let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn write(&self, opts: &Options) -> Result<(), CliError> {
        let text = match opts.format() {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        };
        match &opts.out {
            Some(path) => {
                std::fs::write(path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
            }
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string()))
            }
        }
    }
}
