use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use blowup_core::{Error, Result};
use serde::Serialize;

use crate::config::OutputFormat;

/// An oracle value next to a plain-language statement of where it comes from.
#[derive(Debug, Clone, Serialize)]
pub struct Reference {
    pub value: f64,
    pub provenance: String,
}

/// Structured outcome of one subcommand. `errors` holds named relative
/// errors (or outright bounds, where the reference is zero); `pass` is the
/// conjunction of every recorded check.
#[derive(Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub inputs: BTreeMap<String, serde_json::Value>,
    pub results: BTreeMap<String, serde_json::Value>,
    pub references: BTreeMap<String, Reference>,
    pub errors: BTreeMap<String, f64>,
    pub pass: bool,
    pub wall_time: f64,
    #[serde(skip)]
    started: Instant,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.into(),
            inputs: BTreeMap::new(),
            results: BTreeMap::new(),
            references: BTreeMap::new(),
            errors: BTreeMap::new(),
            pass: true,
            wall_time: 0.0,
            started: Instant::now(),
        }
    }

    pub fn input(&mut self, key: &str, value: impl Serialize) {
        self.inputs.insert(
            key.into(),
            serde_json::to_value(value).expect("serializable input"),
        );
    }

    pub fn result(&mut self, key: &str, value: impl Serialize) {
        self.results.insert(
            key.into(),
            serde_json::to_value(value).expect("serializable result"),
        );
    }

    /// Compare `got` against `want` in relative error at tolerance `tol`.
    pub fn check(&mut self, key: &str, got: f64, want: f64, tol: f64, provenance: &str) -> bool {
        let rel = (got - want).abs() / want.abs().max(f64::MIN_POSITIVE);
        self.references.insert(
            key.into(),
            Reference {
                value: want,
                provenance: provenance.into(),
            },
        );
        self.errors.insert(key.into(), rel);
        let ok = rel.is_finite() && rel <= tol;
        self.pass &= ok;
        ok
    }

    /// Require `|value| <= tol` outright; used where the reference is zero.
    pub fn bound(&mut self, key: &str, value: f64, tol: f64, provenance: &str) -> bool {
        self.references.insert(
            key.into(),
            Reference {
                value: 0.0,
                provenance: provenance.into(),
            },
        );
        self.errors.insert(key.into(), value.abs());
        let ok = value.is_finite() && value.abs() <= tol;
        self.pass &= ok;
        ok
    }

    pub fn finish(mut self) -> Self {
        self.wall_time = self.started.elapsed().as_secs_f64();
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// One CSV table: header line plus preformatted rows.
#[derive(Debug, Clone)]
pub struct CsvTable {
    pub header: String,
    pub rows: Vec<String>,
}

impl CsvTable {
    pub fn new(header: &str) -> Self {
        Self {
            header: header.into(),
            rows: Vec::new(),
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::with_capacity((self.rows.len() + 1) * 64);
        out.push_str(&self.header);
        out.push('\n');
        for row in &self.rows {
            out.push_str(row);
            out.push('\n');
        }
        out
    }
}

/// 17 significant digits, '.' decimal separator; round-trips f64 exactly.
pub fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_output(
    path: &Path,
    format: OutputFormat,
    report: &Report,
    table: &CsvTable,
) -> Result<()> {
    let payload = match format {
        OutputFormat::Csv => table.render(),
        OutputFormat::Json => {
            let mut s = report.to_json();
            s.push('\n');
            s
        }
    };
    std::fs::write(path, payload)
        .map_err(|e| Error::Domain(format!("cannot write {}: {e}", path.display())))
}
