//! Rendering of results as JSON or CSV.

use std::fs;
use std::io::Write;

use nclift::C64;
use serde::Serialize;

use crate::{Failure, Format, RunConfig};

/// A float with at most 15 significant digits, in the shortest form that
/// represents the rounded value.
pub fn float(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.14e}").parse().expect("formatted float parses");
    if rounded == 0.0 {
        "0".into()
    } else {
        rounded.to_string()
    }
}

/// The two CSV columns of a complex value.
pub fn complex(z: C64) -> [String; 2] {
    [float(z.re), float(z.im)]
}

/// Rows of a CSV document.
pub struct Csv {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn render(&self) -> Result<String, Failure> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Failure::Input(format!("cannot write CSV: {e}"));
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row).map_err(io)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Failure::Input(format!("cannot write CSV: {e}")))?;
        String::from_utf8(bytes).map_err(|e| Failure::Input(e.to_string()))
    }
}

/// Writes `json` or `csv` (whichever the configuration asks for, `default`
/// if it asks for none) to the output file or standard output.
pub fn emit<T: Serialize>(
    config: &RunConfig,
    default: Format,
    json: &T,
    csv: impl FnOnce() -> Csv,
) -> Result<(), Failure> {
    let text = match config.format.unwrap_or(default) {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(json).map_err(|e| Failure::Input(e.to_string()))?;
            s.push('\n');
            s
        }
        Format::Csv => csv().render()?,
    };
    match &config.out {
        Some(path) => {
            fs::write(path, text).map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))
        }
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Input(format!("cannot write to standard output: {e}"))),
    }
}
