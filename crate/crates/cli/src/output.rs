use std::fmt::Write as _;
use std::io::Write;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use cme_core::reaction_model::{to_json, ReactionSystem};

use crate::args::{Format, Output};
use crate::error::Failure;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Int(u64),
    Real(f64),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Real(v) => format!("{v:?}"),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Real(v) if v.is_finite() => json!(v),
            Cell::Real(v) => json!(v.to_string()),
        }
    }
}

pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub metadata: serde_json::Map<String, Value>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new(), metadata: Default::default() }
    }

    pub fn with_columns(columns: Vec<String>) -> Self {
        Table { columns, rows: Vec::new(), metadata: Default::default() }
    }

    pub fn meta(&mut self, key: &str, value: Value) {
        self.metadata.insert(key.to_string(), value);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut out = self.columns.join(",");
                out.push('\n');
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(Cell::csv).collect();
                    let _ = writeln!(out, "{}", cells.join(","));
                }
                out
            }
            Format::Json => {
                let mut metadata = self.metadata.clone();
                metadata.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
                let rows: Vec<Value> = self.rows.iter().map(|r| Value::Array(r.iter().map(Cell::json).collect())).collect();
                let doc = json!({"metadata": metadata, "columns": self.columns, "rows": rows});
                let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
                s.push('\n');
                s
            }
        }
    }

    pub fn write(&self, output: &Output) -> Result<(), Failure> {
        let text = self.render(output.format);
        match &output.out {
            Some(path) => std::fs::write(path, text).map_err(|e| Failure::parse(format!("{}: {e}", path.display()))),
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(text.as_bytes()).map_err(|e| Failure::parse(format!("stdout: {e}")))
            }
        }
    }
}

/// SHA-256 of the canonical JSON form of the system, initial state included.
pub fn system_hash(system: &ReactionSystem) -> String {
    let digest = Sha256::digest(to_json(system).to_string().as_bytes());
    digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// `n` for one species, `n_<name>` per species otherwise.
pub fn state_columns(system: &ReactionSystem) -> Vec<String> {
    if system.num_species() == 1 {
        vec!["n".into()]
    } else {
        system.species().iter().map(|s| format!("n_{s}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_and_json() {
        let mut t = Table::new(&["t", "n", "p"]);
        t.rows.push(vec![Cell::Real(0.5), Cell::Int(3), Cell::Real(0.25)]);
        assert_eq!(t.render(Format::Csv), "t,n,p\n0.5,3,0.25\n");
        t.meta("command", json!("x"));
        let v: Value = serde_json::from_str(&t.render(Format::Json)).unwrap();
        assert_eq!(v["rows"][0][1], json!(3));
        assert_eq!(v["metadata"]["command"], json!("x"));
        assert!(v["metadata"]["version"].is_string());
    }

    #[test]
    fn hash_is_stable() {
        let s = cme_core::reaction_model::parse_dsl("A -> 0 @ 4").unwrap();
        assert_eq!(system_hash(&s), system_hash(&s.clone()));
        assert_eq!(system_hash(&s).len(), 64);
    }
}
