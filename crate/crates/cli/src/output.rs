//! Line-oriented record output.

use std::io::{self, Write};

use clap::ValueEnum;
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// One JSON object per line.
    Records,
    /// Tab-separated values with a header line.
    Tsv,
}

/// A record with a fixed field order.
#[derive(Debug, Clone, Default)]
pub struct Record(Map<String, Value>);

impl Record {
    pub fn new(command: &str) -> Self {
        let mut r = Record::default();
        r.set("command", command);
        r
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.0.insert(key.to_string(), value.into());
        self
    }
}

pub struct Emitter {
    format: Format,
    header: Option<Vec<String>>,
    out: io::StdoutLock<'static>,
}

impl Emitter {
    pub fn new(format: Format) -> Self {
        Emitter { format, header: None, out: io::stdout().lock() }
    }

    pub fn emit(&mut self, record: &Record) -> io::Result<()> {
        match self.format {
            Format::Records => {
                serde_json::to_writer(&mut self.out, &record.0)?;
                writeln!(self.out)?;
            }
            Format::Tsv => {
                let keys: Vec<String> = record.0.keys().cloned().collect();
                if self.header.as_ref() != Some(&keys) {
                    writeln!(self.out, "{}", keys.join("\t"))?;
                    self.header = Some(keys);
                }
                let cells: Vec<String> = record.0.values().map(tsv_cell).collect();
                writeln!(self.out, "{}", cells.join("\t"))?;
            }
        }
        self.out.flush()
    }
}

fn tsv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.replace(['\t', '\n'], " "),
        other => other.to_string(),
    }
}
