use std::fs;
use std::io::Write;
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::config::Format;
use crate::error::CliResult;

pub const SCHEMA: &str = "1";

/// Run metadata written ahead of every output.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub command: String,
    pub seed: u64,
    pub tolerances: Vec<(String, f64)>,
    /// Witness name and its domain, e.g. `("hardy", 0.0, 0.0902)`.
    pub domain: Option<(String, f64, f64)>,
    pub notes: Vec<String>,
}

impl Provenance {
    pub fn new(command: &str, seed: u64) -> Self {
        Provenance {
            command: command.into(),
            seed,
            tolerances: Vec::new(),
            domain: None,
            notes: Vec::new(),
        }
    }

    pub fn tol(mut self, name: &str, v: f64) -> Self {
        self.tolerances.push((name.into(), v));
        self
    }

    pub fn domain(mut self, witness: &str, lo: f64, hi: f64) -> Self {
        self.domain = Some((witness.into(), lo, hi));
        self
    }

    pub fn note(mut self, s: impl Into<String>) -> Self {
        self.notes.push(s.into());
        self
    }

    fn versions() -> Vec<(&'static str, &'static str)> {
        vec![
            ("randcert", env!("CARGO_PKG_VERSION")),
            ("randcert-core", randcert_core::VERSION),
        ]
    }

    pub fn header_lines(&self) -> Vec<String> {
        let mut v = vec![
            format!("schema: {SCHEMA}"),
            format!("command: {}", self.command),
            format!("seed: {}", self.seed),
        ];
        let vers: Vec<String> = Self::versions().iter().map(|(k, v)| format!("{k} {v}")).collect();
        v.push(format!("versions: {}", vers.join(", ")));
        if !self.tolerances.is_empty() {
            let t: Vec<String> = self.tolerances.iter().map(|(k, x)| format!("{k}={x:e}")).collect();
            v.push(format!("tolerances: {}", t.join(", ")));
        }
        if let Some((w, lo, hi)) = &self.domain {
            v.push(format!("witness domain: {w} in [{}, {}]", sig10(*lo), sig10(*hi)));
        }
        for n in &self.notes {
            v.push(format!("note: {n}"));
        }
        v
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("command".into(), json!(self.command));
        m.insert("seed".into(), json!(self.seed));
        let vers: Map<String, Value> = Self::versions().into_iter().map(|(k, v)| (k.into(), json!(v))).collect();
        m.insert("versions".into(), Value::Object(vers));
        let tols: Map<String, Value> = self.tolerances.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
        m.insert("tolerances".into(), Value::Object(tols));
        if let Some((w, lo, hi)) = &self.domain {
            m.insert("witness_domain".into(), json!({ "witness": w, "lo": lo, "hi": hi }));
        }
        if !self.notes.is_empty() {
            m.insert("notes".into(), json!(self.notes));
        }
        Value::Object(m)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    /// Written at 10 significant digits.
    Num(f64),
    /// Written with 4 decimals, for side-by-side comparison with rounded values.
    Round4(f64),
    Int(i64),
    Bool(bool),
    Text(String),
    Empty,
}

impl Cell {
    pub fn text(s: impl Into<String>) -> Self {
        Cell::Text(s.into())
    }

    pub fn opt(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }

    fn render(&self) -> String {
        match self {
            Cell::Num(x) => sig10(*x),
            Cell::Round4(x) => format!("{x:.4}"),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Num(x) if x.is_finite() => json!(x),
            Cell::Round4(x) if x.is_finite() => {
                // round through the decimal string so JSON shows 4 places
                json!(format!("{x:.4}").parse::<f64>().unwrap_or(*x))
            }
            Cell::Num(_) | Cell::Round4(_) | Cell::Empty => Value::Null,
            Cell::Int(i) => json!(i),
            Cell::Bool(b) => json!(b),
            Cell::Text(s) => json!(s),
        }
    }
}

/// Formats `x` with 10 significant digits, in fixed notation when that stays short.
pub fn sig10(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".into();
    }
    let e = x.abs().log10().floor() as i32;
    if (-5..15).contains(&e) {
        let decimals = (9 - e).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{x:.9e}")
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') && !s.contains('e') {
        let t = s.trim_end_matches('0').trim_end_matches('.');
        if t == "-0" { "0".into() } else { t.to_string() }
    } else {
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

/// A finished command result: provenance plus one table.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub provenance: Provenance,
    pub table: Table,
}

impl Report {
    pub fn to_csv(&self) -> CliResult<Vec<u8>> {
        let mut out = Vec::new();
        for l in self.provenance.header_lines() {
            writeln!(out, "# {l}")?;
        }
        {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(&self.table.columns)?;
            for r in &self.table.rows {
                w.write_record(r.iter().map(Cell::render))?;
            }
            w.flush()?;
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .table
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(Cell::to_json).collect()))
            .collect();
        json!({
            "schema": SCHEMA,
            "provenance": self.provenance.to_json(),
            "columns": self.table.columns,
            "rows": rows,
        })
    }

    pub fn render(&self, format: Format) -> CliResult<Vec<u8>> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => {
                let mut v = serde_json::to_vec_pretty(&self.to_json())?;
                v.push(b'\n');
                Ok(v)
            }
        }
    }
}

/// Writes `bytes` to `path`, or to stdout when `path` is `None`.
pub fn emit(bytes: &[u8], path: Option<&Path>) -> CliResult<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(p, bytes)?;
        }
        None => {
            let mut o = std::io::stdout().lock();
            o.write_all(bytes)?;
            o.flush()?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_significant_digits() {
        assert_eq!(sig10(1.678_360_123_456), "1.678360123");
        assert_eq!(sig10(0.000_200_000_000_01), "0.0002");
        assert_eq!(sig10(-0.136_331_234_567_89), "-0.1363312346");
        assert_eq!(sig10(4.0), "4");
        assert_eq!(sig10(0.0), "0");
        assert_eq!(sig10(1.234_567_890_12e-9), "1.234567890e-9");
        assert_eq!(sig10(9.999_999_999_99), "10");
    }

    #[test]
    fn csv_has_header_and_rounded_columns() {
        let mut t = Table::new(&["x", "x_4dp", "ok"]);
        t.push(vec![Cell::Num(1.0 / 3.0), Cell::Round4(1.0 / 3.0), Cell::Bool(true)]);
        let r = Report {
            provenance: Provenance::new("curve", 7).tol("gap", 1e-8).domain("chsh", 2.0, 4.0),
            table: t,
        };
        let s = String::from_utf8(r.to_csv().unwrap()).unwrap();
        assert!(s.starts_with("# schema: 1\n# command: curve\n# seed: 7\n"));
        assert!(s.contains("# tolerances: gap=1e-8\n"));
        assert!(s.contains("# witness domain: chsh in [2, 4]\n"));
        assert!(s.ends_with("x,x_4dp,ok\n0.3333333333,0.3333,true\n"));
        let j = r.to_json();
        assert_eq!(j["schema"], "1");
        assert_eq!(j["rows"][0][1], 0.3333);
        assert_eq!(j["provenance"]["seed"], 7);
    }
}
