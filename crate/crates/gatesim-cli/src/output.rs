//! Table emission as CSV (with a schema comment line) or JSON.

use serde_json::{json, Map, Value};
use std::fmt::Write as _;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format '{other}' (csv or json)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => {
            if s.contains([',', '"', '\n']) {
                format!("\"{}\"", s.replace('"', "\"\""))
            } else {
                s.clone()
            }
        }
        other => other.to_string(),
    }
}

pub fn render(format: Format, command: &str, config: &Map<String, Value>, table: &Table) -> String {
    match format {
        Format::Json => {
            let rows: Vec<Value> = table
                .rows
                .iter()
                .map(|r| Value::Object(table.columns.iter().map(|c| c.to_string()).zip(r.iter().cloned()).collect()))
                .collect();
            let doc = json!({
                "schema_version": SCHEMA_VERSION,
                "command": command,
                "config": config,
                "rows": rows,
            });
            let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = String::new();
            let cfg = serde_json::to_string(config).expect("serializable");
            writeln!(s, "# gatesim schema_version={SCHEMA_VERSION} command={command} config={cfg}").unwrap();
            writeln!(s, "{}", table.columns.join(",")).unwrap();
            for row in &table.rows {
                writeln!(s, "{}", row.iter().map(csv_cell).collect::<Vec<_>>().join(",")).unwrap();
            }
            s
        }
    }
}

pub fn render_error(kind: &str, message: &str) -> String {
    let doc = json!({ "schema_version": SCHEMA_VERSION, "error": { "kind": kind, "message": message } });
    format!("{}\n", serde_json::to_string(&doc).expect("serializable"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![json!(1.5), json!("x,y")]);
        t.push(vec![json!(null), json!(2)]);
        let out = render(Format::Csv, "demo", &Map::new(), &t);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], "# gatesim schema_version=1 command=demo config={}");
        assert_eq!(lines[1], "a,b");
        assert_eq!(lines[2], "1.5,\"x,y\"");
        assert_eq!(lines[3], ",2");
    }

    #[test]
    fn json_layout() {
        let mut t = Table::new(&["v"]);
        t.push(vec![json!(3)]);
        let doc: Value = serde_json::from_str(&render(Format::Json, "demo", &Map::new(), &t)).unwrap();
        assert_eq!(doc["schema_version"], json!(1));
        assert_eq!(doc["rows"][0]["v"], json!(3));
    }
}
