//! Record emission as JSON lines or CSV.
//!
//! Floats are written with 17 significant digits so they round-trip exactly;
//! non-finite values become `null` in JSON and an empty CSV cell.

use std::io::{self, Write};

use clap::ValueEnum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Jsonl,
    Csv,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Num(f64),
    Int(i64),
    Str(String),
    Bool(bool),
    /// Nested structure: inline in JSON, a quoted JSON string in CSV.
    Json(serde_json::Value),
    Null,
}

impl From<f64> for Field {
    fn from(v: f64) -> Self {
        Field::Num(v)
    }
}

impl From<Option<f64>> for Field {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Field::Null, Field::Num)
    }
}

impl From<i64> for Field {
    fn from(v: i64) -> Self {
        Field::Int(v)
    }
}

impl From<usize> for Field {
    fn from(v: usize) -> Self {
        Field::Int(v as i64)
    }
}

impl From<bool> for Field {
    fn from(v: bool) -> Self {
        Field::Bool(v)
    }
}

impl From<&str> for Field {
    fn from(v: &str) -> Self {
        Field::Str(v.to_string())
    }
}

impl From<String> for Field {
    fn from(v: String) -> Self {
        Field::Str(v)
    }
}

/// An ordered list of named fields.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Record(pub Vec<(String, Field)>);

impl Record {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, v: impl Into<Field>) -> Self {
        self.0.push((key.to_string(), v.into()));
        self
    }
}

pub fn fmt_f64(v: f64) -> Option<String> {
    v.is_finite().then(|| {
        if v == 0.0 {
            "0".to_string()
        } else {
            format!("{v:.16e}")
        }
    })
}

fn json_field(f: &Field) -> String {
    match f {
        Field::Num(v) => fmt_f64(*v).unwrap_or_else(|| "null".into()),
        Field::Int(v) => v.to_string(),
        Field::Str(s) => serde_json::to_string(s).expect("strings serialize"),
        Field::Bool(b) => b.to_string(),
        Field::Json(v) => v.to_string(),
        Field::Null => "null".into(),
    }
}

fn csv_field(f: &Field) -> String {
    match f {
        Field::Num(v) => fmt_f64(*v).unwrap_or_default(),
        Field::Int(v) => v.to_string(),
        Field::Str(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Field::Str(s) => s.clone(),
        Field::Bool(b) => b.to_string(),
        Field::Json(v) => csv_field(&Field::Str(v.to_string())),
        Field::Null => String::new(),
    }
}

pub struct Emitter {
    out: Box<dyn Write>,
    format: Format,
    header: Option<Vec<String>>,
}

impl Emitter {
    pub fn new(out: Box<dyn Write>, format: Format) -> Self {
        Self { out, format, header: None }
    }

    /// Writes one record. In CSV mode the first record fixes the header;
    /// records with a different set of keys start a new header block.
    pub fn emit(&mut self, rec: &Record) -> io::Result<()> {
        match self.format {
            Format::Jsonl => {
                let body: Vec<String> = rec
                    .0
                    .iter()
                    .map(|(k, v)| format!("{}:{}", serde_json::to_string(k).expect("keys serialize"), json_field(v)))
                    .collect();
                writeln!(self.out, "{{{}}}", body.join(","))
            }
            Format::Csv => {
                let keys: Vec<String> = rec.0.iter().map(|(k, _)| k.clone()).collect();
                if self.header.as_ref() != Some(&keys) {
                    writeln!(self.out, "{}", keys.join(","))?;
                    self.header = Some(keys);
                }
                let row: Vec<String> = rec.0.iter().map(|(_, v)| csv_field(v)).collect();
                writeln!(self.out, "{}", row.join(","))
            }
        }
    }

    pub fn flush(&mut self) -> io::Result<()> {
        self.out.flush()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, 5.746958e-3, -2.5e-300, 1e300] {
            let s = fmt_f64(v).unwrap();
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_f64(f64::NAN), None);
    }

    #[test]
    fn csv_quotes_commas() {
        assert_eq!(csv_field(&Field::Str("a,b".into())), "\"a,b\"");
    }
}
