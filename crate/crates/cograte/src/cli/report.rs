//! Plot-ready output tables: CSV with a `#`-prefixed metadata header, or a
//! JSON object with `meta` and `rows`. Numbers carry 12 significant digits
//! and the serialization is byte-stable across reruns.

use std::io::Write;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

/// 12 significant digits, scientific; the one float format used everywhere.
pub fn format_sig12(v: f64) -> String {
    format!("{v:.11e}")
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            meta: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl Into<String>) {
        self.meta.push((key.to_string(), value.into()));
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv(&self, w: &mut dyn Write) -> Result<()> {
        for (k, v) in &self.meta {
            if v.contains('\n') {
                writeln!(w, "# {k}:")?;
                for line in v.lines() {
                    writeln!(w, "#   {line}")?;
                }
            } else {
                writeln!(w, "# {k}: {v}")?;
            }
        }
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let line: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Num(v) => format_sig12(*v),
                    Cell::Text(s) => s.clone(),
                })
                .collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn write_json(&self, w: &mut dyn Write) -> Result<()> {
        let mut meta = serde_json::Map::new();
        for (k, v) in &self.meta {
            meta.insert(k.clone(), serde_json::Value::String(v.clone()));
        }
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                serde_json::Value::Array(
                    row.iter()
                        .map(|c| match c {
                            Cell::Num(v) => serde_json::json!(v),
                            Cell::Text(s) => serde_json::Value::String(s.clone()),
                        })
                        .collect(),
                )
            })
            .collect();
        let doc = serde_json::json!({
            "meta": serde_json::Value::Object(meta),
            "columns": self.columns,
            "rows": rows,
        });
        serde_json::to_writer_pretty(&mut *w, &doc)
            .map_err(|e| Error::Io(format!("json write: {e}")))?;
        writeln!(w)?;
        Ok(())
    }

    pub fn write(&self, w: &mut dyn Write, format: &str) -> Result<()> {
        match format {
            "csv" => self.write_csv(w),
            "json" => self.write_json(w),
            other => Err(Error::Config(format!("unknown output format '{other}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(&["x", "label"]);
        t.meta("seed", "42");
        t.push_row(vec![Cell::Num(1.5), Cell::Text("a".into())]);
        t.push_row(vec![Cell::Num(-2.25e-7), Cell::Text("b".into())]);
        t
    }

    #[test]
    fn csv_shape() {
        let mut buf = Vec::new();
        sample().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# seed: 42");
        assert_eq!(lines[1], "x,label");
        assert!(lines[2].starts_with("1.5"));
        assert!(lines[2].ends_with(",a"));
    }

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_sig12(1.0), "1.00000000000e0");
        assert_eq!(format_sig12(0.1 + 0.2), "3.00000000000e-1");
        assert_eq!(format_sig12(123456.789), "1.23456789000e5");
    }

    #[test]
    fn json_round_trips() {
        let mut buf = Vec::new();
        sample().write_json(&mut buf).unwrap();
        let doc: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(doc["meta"]["seed"], "42");
        assert_eq!(doc["columns"][0], "x");
        assert_eq!(doc["rows"][0][0], 1.5);
    }

    #[test]
    fn byte_identical_reruns() {
        let mut a = Vec::new();
        let mut b = Vec::new();
        sample().write_csv(&mut a).unwrap();
        sample().write_csv(&mut b).unwrap();
        assert_eq!(a, b);
    }
}
