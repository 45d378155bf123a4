use crate::CliError;
use serde_json::Value;
use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

/// A result ready to be written: the JSON document and its CSV rows.
pub struct Table {
    pub json: Value,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

pub fn num(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else if x != 0.0 && (x.abs() < 1e-4 || x.abs() >= 1e15) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn point(mu: &[f64]) -> String {
    mu.iter().map(|v| num(*v)).collect::<Vec<_>>().join(";")
}

pub fn write(table: &Table, csv: bool, out: Option<&Path>) -> Result<(), CliError> {
    let sink: Box<dyn Write> = match out {
        Some(path) => Box::new(File::create(path).map_err(|e| CliError::Io(path.display().to_string(), e))?),
        None => Box::new(io::stdout().lock()),
    };
    if csv {
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(&table.header)?;
        for row in &table.rows {
            w.write_record(row)?;
        }
        w.flush().map_err(|e| CliError::Io("output".into(), e))?;
    } else {
        let mut sink = sink;
        serde_json::to_writer_pretty(&mut sink, &table.json)?;
        writeln!(sink).map_err(|e| CliError::Io("output".into(), e))?;
    }
    Ok(())
}
