//! Record output in csv, json-lines or aligned-table form.
//!
//! Every stream starts with a header naming the command and seed: a
//! `# metafib <cmd> seed=S …` comment line for csv and table, a JSON object
//! for json. Summary lines follow the records, as `# key=value` comments or a
//! final `{"summary": …}` object.

use std::io::{self, Write};

use clap::ValueEnum;
use serde::Serialize;
use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Table,
}

/// A flat record: serde gives csv and json, `cells` gives the table.
pub trait Record: Serialize {
    const HEADER: &'static [&'static str];
    fn cells(&self) -> Vec<String>;
}

pub struct Header<'a> {
    pub command: &'a str,
    pub seed: u64,
    pub extra: Vec<(&'static str, String)>,
}

impl Header<'_> {
    fn comment(&self) -> String {
        let mut line = format!("# metafib {} seed={}", self.command, self.seed);
        for (k, v) in &self.extra {
            line.push_str(&format!(" {k}={v}"));
        }
        line
    }

    fn json(&self) -> Value {
        let mut obj = Map::new();
        obj.insert("metafib".into(), Value::String(self.command.into()));
        obj.insert("seed".into(), Value::from(self.seed));
        for (k, v) in &self.extra {
            let value = v.parse::<i64>().map(Value::from).unwrap_or_else(|_| Value::String(v.clone()));
            obj.insert((*k).into(), value);
        }
        Value::Object(obj)
    }
}

pub type Summary = Vec<(&'static str, Value)>;

fn plain(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

pub fn emit<R: Record, W: Write>(
    out: &mut W,
    format: Format,
    header: &Header,
    records: &[R],
    summary: &Summary,
) -> io::Result<()> {
    match format {
        Format::Csv => {
            writeln!(out, "{}", header.comment())?;
            {
                let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(&mut *out);
                w.write_record(R::HEADER)?;
                for r in records {
                    w.serialize(r)?;
                }
                w.flush()?;
            }
            for (k, v) in summary {
                writeln!(out, "# {k}={}", plain(v))?;
            }
        }
        Format::Json => {
            writeln!(out, "{}", header.json())?;
            for r in records {
                writeln!(out, "{}", serde_json::to_string(r)?)?;
            }
            if !summary.is_empty() {
                let obj: Map<String, Value> = summary.iter().map(|(k, v)| ((*k).to_string(), v.clone())).collect();
                let mut wrap = Map::new();
                wrap.insert("summary".into(), Value::Object(obj));
                writeln!(out, "{}", Value::Object(wrap))?;
            }
        }
        Format::Table => {
            writeln!(out, "{}", header.comment())?;
            let rows: Vec<Vec<String>> = records.iter().map(|r| r.cells()).collect();
            let mut widths: Vec<usize> = R::HEADER.iter().map(|h| h.len()).collect();
            for row in &rows {
                for (w, c) in widths.iter_mut().zip(row) {
                    *w = (*w).max(c.len());
                }
            }
            let line = |cells: &[String]| {
                let parts: Vec<String> = cells
                    .iter()
                    .zip(&widths)
                    .map(|(c, w)| format!("{c:>w$}", w = *w))
                    .collect();
                parts.join("  ")
            };
            let head: Vec<String> = R::HEADER.iter().map(|s| s.to_string()).collect();
            writeln!(out, "{}", line(&head))?;
            for row in &rows {
                writeln!(out, "{}", line(row))?;
            }
            for (k, v) in summary {
                writeln!(out, "# {k}: {}", plain(v))?;
            }
        }
    }
    Ok(())
}

/// Key/value output for single-report commands.
pub fn emit_report<W: Write>(
    out: &mut W,
    format: Format,
    header: &Header,
    report: &Value,
    fields: &[(&'static str, String)],
) -> io::Result<()> {
    match format {
        Format::Json => {
            writeln!(out, "{}", header.json())?;
            writeln!(out, "{report}")?;
        }
        Format::Csv => {
            writeln!(out, "{}", header.comment())?;
            let mut w = csv::WriterBuilder::new().from_writer(&mut *out);
            w.write_record(fields.iter().map(|(k, _)| *k))?;
            w.write_record(fields.iter().map(|(_, v)| v.as_str()))?;
            w.flush()?;
        }
        Format::Table => {
            writeln!(out, "{}", header.comment())?;
            let width = fields.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
            for (k, v) in fields {
                writeln!(out, "{k:<width$}  {v}")?;
            }
        }
    }
    Ok(())
}
