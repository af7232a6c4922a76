use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use alphadyn::io::{fmt_f64, write_atomic, Cell, CsvTable};
use alphadyn::Result;
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Output directory plus table format.
#[derive(Debug, Clone)]
pub struct Sink {
    pub dir: PathBuf,
    pub format: Format,
}

impl Sink {
    pub fn new(dir: impl Into<PathBuf>, format: Format) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(Self { dir, format })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn sub(&self, name: &str) -> Result<Self> {
        Self::new(self.dir.join(name), self.format)
    }

    /// Writes `<name>.csv` or `<name>.json`; returns the path.
    pub fn table(&self, name: &str, t: &Table) -> Result<PathBuf> {
        match self.format {
            Format::Csv => {
                let p = self.path(&format!("{name}.csv"));
                t.to_csv().write_atomic(&p)?;
                Ok(p)
            }
            Format::Json => {
                let p = self.path(&format!("{name}.json"));
                let text = serde_json::to_string_pretty(&t.to_json()).expect("json of plain values");
                write_atomic(&p, text.as_bytes())?;
                Ok(p)
            }
        }
    }

    /// Writes `<name>.txt` (always) and `<name>.json` in JSON mode.
    pub fn summary(&self, name: &str, s: &Summary) -> Result<()> {
        write_atomic(&self.path(&format!("{name}.txt")), s.to_text().as_bytes())?;
        if self.format == Format::Json {
            let text = serde_json::to_string_pretty(&s.to_json()).expect("json of plain values");
            write_atomic(&self.path(&format!("{name}.json")), text.as_bytes())?;
        }
        Ok(())
    }

    pub fn text(&self, name: &str, text: &str) -> Result<()> {
        write_atomic(&self.path(name), text.as_bytes())
    }
}

/// Column-named rows, rendered as CSV or as a JSON array of objects.
#[derive(Debug, Clone)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> CsvTable {
        let mut t = CsvTable::new(&self.header);
        for r in &self.rows {
            t.push(r);
        }
        t
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|r| {
                    let mut m = Map::new();
                    for (k, c) in self.header.iter().zip(r) {
                        m.insert((*k).to_string(), cell_json(c));
                    }
                    Value::Object(m)
                })
                .collect(),
        )
    }
}

fn cell_json(c: &Cell) -> Value {
    match c {
        Cell::F(x) => serde_json::Number::from_f64(*x).map_or(Value::Null, Value::Number),
        Cell::I(n) => Value::from(*n),
        Cell::S(s) => Value::from(s.as_str()),
    }
}

/// Ordered `key = value` report.
#[derive(Debug, Clone, Default)]
pub struct Summary {
    pub entries: Vec<(String, SummaryValue)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SummaryValue {
    F(f64),
    I(i64),
    S(String),
    B(bool),
    None,
}

impl Summary {
    pub fn f(&mut self, k: impl Into<String>, v: f64) -> &mut Self {
        self.entries.push((k.into(), SummaryValue::F(v)));
        self
    }

    pub fn i(&mut self, k: impl Into<String>, v: i64) -> &mut Self {
        self.entries.push((k.into(), SummaryValue::I(v)));
        self
    }

    pub fn s(&mut self, k: impl Into<String>, v: impl Into<String>) -> &mut Self {
        self.entries.push((k.into(), SummaryValue::S(v.into())));
        self
    }

    pub fn b(&mut self, k: impl Into<String>, v: bool) -> &mut Self {
        self.entries.push((k.into(), SummaryValue::B(v)));
        self
    }

    pub fn opt(&mut self, k: impl Into<String>, v: Option<f64>) -> &mut Self {
        let v = v.map_or(SummaryValue::None, SummaryValue::F);
        self.entries.push((k.into(), v));
        self
    }

    pub fn get(&self, k: &str) -> Option<&SummaryValue> {
        self.entries.iter().find(|(key, _)| key == k).map(|(_, v)| v)
    }

    pub fn to_text(&self) -> String {
        let mut o = String::new();
        for (k, v) in &self.entries {
            let v = match v {
                SummaryValue::F(x) => fmt_f64(*x),
                SummaryValue::I(n) => n.to_string(),
                SummaryValue::S(s) => s.clone(),
                SummaryValue::B(b) => b.to_string(),
                SummaryValue::None => "none".into(),
            };
            let _ = writeln!(o, "{k} = {v}");
        }
        o
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        for (k, v) in &self.entries {
            let v = match v {
                SummaryValue::F(x) => serde_json::Number::from_f64(*x).map_or(Value::Null, Value::Number),
                SummaryValue::I(n) => Value::from(*n),
                SummaryValue::S(s) => Value::from(s.as_str()),
                SummaryValue::B(b) => Value::from(*b),
                SummaryValue::None => Value::Null,
            };
            m.insert(k.clone(), v);
        }
        Value::Object(m)
    }
}

/// Reads a column by name from a CSV written by this tool.
pub fn csv_column(path: &Path, header: &[String], cols: &[Vec<f64>], name: &str) -> Result<Vec<f64>> {
    header
        .iter()
        .position(|h| h == name)
        .map(|i| cols[i].clone())
        .ok_or_else(|| alphadyn::Error::Parse {
            path: path.to_owned(),
            line: 1,
            msg: format!("missing column `{name}`"),
        })
}
