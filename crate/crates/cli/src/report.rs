//! Suite records, the JSON report and CSV plot data.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::suites::Suite;

/// Version of the report layout; bumped on incompatible changes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
}

/// A bound a measured value is held to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bound {
    pub relation: Relation,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

impl Bound {
    pub fn holds(&self, x: f64) -> bool {
        match self.relation {
            Relation::AtMost => x <= self.value,
            Relation::AtLeast => x >= self.value,
        }
    }
}

/// Whether a table holds sweep or trajectory data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum PlotKind {
    Sweep,
    Trajectory,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Int(usize),
    Float(f64),
}

/// A CSV file with a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file: String,
    pub kind: PlotKind,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(file: impl Into<String>, kind: PlotKind, header: &[&'static str]) -> Self {
        Self { file: file.into(), kind, header: header.to_vec(), rows: Vec::new() }
    }

    /// Floats as 17 significant digits in scientific notation.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            let fields: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Int(i) => i.to_string(),
                    Cell::Float(x) => format!("{x:.16e}"),
                })
                .collect();
            w.write_record(&fields).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
    }
}

/// Outcome of one suite.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteRecord {
    pub name: Suite,
    pub status: Status,
    pub measured: BTreeMap<String, f64>,
    pub tolerances: BTreeMap<String, Bound>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<String>,
    #[serde(skip)]
    pub runtime_s: f64,
    #[serde(skip)]
    pub tables: Vec<Table>,
}

impl SuiteRecord {
    pub fn new(name: Suite) -> Self {
        Self {
            name,
            status: Status::Pass,
            measured: BTreeMap::new(),
            tolerances: BTreeMap::new(),
            errors: Vec::new(),
            runtime_s: 0.0,
            tables: Vec::new(),
        }
    }

    /// Records `value` without a bound. Non-finite values fail the suite.
    pub fn measure(&mut self, key: impl Into<String>, value: f64) {
        if !value.is_finite() {
            self.status = Status::Fail;
        }
        self.measured.insert(key.into(), value);
    }

    fn check(&mut self, key: impl Into<String>, value: f64, bound: Bound) {
        let key = key.into();
        if !bound.holds(value) {
            self.status = Status::Fail;
        }
        self.measure(key.clone(), value);
        self.tolerances.insert(key, bound);
    }

    pub fn at_most(&mut self, key: impl Into<String>, value: f64, limit: f64) {
        self.check(key, value, Bound { relation: Relation::AtMost, value: limit });
    }

    pub fn at_least(&mut self, key: impl Into<String>, value: f64, limit: f64) {
        self.check(key, value, Bound { relation: Relation::AtLeast, value: limit });
    }

    /// `|value − target| ≤ tol`, recorded as the deviation.
    pub fn near(&mut self, key: impl Into<String>, value: f64, target: f64, tol: f64) {
        let key = key.into();
        self.measure(key.clone(), value);
        self.at_most(format!("{key}_deviation"), (value - target).abs(), tol);
    }

    pub fn fail(&mut self, error: impl ToString) {
        self.status = Status::Fail;
        self.errors.push(error.to_string());
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool_version: &'static str,
    pub determinism: &'static str,
    pub status: Status,
    pub suites: Vec<SuiteRecord>,
}

impl Report {
    pub fn new(suites: Vec<SuiteRecord>) -> Self {
        let status = if suites.iter().all(SuiteRecord::passed) { Status::Pass } else { Status::Fail };
        Self {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION"),
            determinism: "no randomness beyond fixed seeds; runtimes are kept in timings.json",
            status,
            suites,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn timings_json(&self) -> String {
        let mut s = String::from("{\n");
        for (i, r) in self.suites.iter().enumerate() {
            let sep = if i + 1 == self.suites.len() { "" } else { "," };
            let _ = writeln!(s, "  \"{}\": {:.3}{sep}", r.name, r.runtime_s);
        }
        s.push_str("}\n");
        s
    }

    /// Writes report.json, timings.json and every table into `dir`.
    pub fn write(&self, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for (name, body) in [("report.json", self.to_json()), ("timings.json", self.timings_json())] {
            let path = dir.join(name);
            fs::write(&path, body)?;
            written.push(path);
        }
        for kind in [PlotKind::Sweep, PlotKind::Trajectory] {
            if let Ok(paths) = emit_plotdata(self, kind, dir) {
                written.extend(paths);
            }
        }
        Ok(written)
    }
}

/// Writes the tables of `kind` from all suites; errors if there are none.
pub fn emit_plotdata(report: &Report, kind: PlotKind, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let tables: Vec<&Table> = report.suites.iter().flat_map(|r| &r.tables).filter(|t| t.kind == kind).collect();
    if tables.is_empty() {
        return Err(std::io::Error::new(std::io::ErrorKind::NotFound, format!("no {kind:?} data in report")));
    }
    fs::create_dir_all(dir)?;
    let mut out = Vec::new();
    for t in tables {
        let path = dir.join(&t.file);
        fs::write(&path, t.to_csv())?;
        out.push(path);
    }
    Ok(out)
}
