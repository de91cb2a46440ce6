//! CSV and JSON report writers.
//!
//! Each CSV starts with a single `# generated_at=<unix seconds>` line, then a
//! header row. Nothing else in a report depends on the clock.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

use crate::config::CampaignConfig;
use crate::Result;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.into(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: vec![],
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// Shortest round-trip rendering; `inf`, `-inf`, `nan` for the rest.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        orlicz_gn::spec::fmt_num(x)
    }
}

/// Result of one subcommand before it hits the disk.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub command: String,
    pub tables: Vec<Table>,
    pub summary: Value,
    /// One line per failed assertion, naming the offending row.
    pub failures: Vec<String>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Serialize)]
struct JsonReport<'a> {
    schema: u32,
    command: &'a str,
    passed: bool,
    failures: &'a [String],
    config: &'a CampaignConfig,
    result: &'a Value,
}

pub fn json_body(o: &Outcome, config: &CampaignConfig) -> Result<String> {
    let r = JsonReport {
        schema: SCHEMA,
        command: &o.command,
        passed: o.passed(),
        failures: &o.failures,
        config,
        result: &o.summary,
    };
    let mut s = serde_json::to_string_pretty(&r)?;
    s.push('\n');
    Ok(s)
}

pub fn csv_body(t: &Table) -> Result<String> {
    let mut w = csv::Writer::from_writer(vec![]);
    w.write_record(&t.header)?;
    for r in &t.rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Writes `<table>.csv` for every table and `<command>.json`; returns the paths.
pub fn write(o: &Outcome, config: &CampaignConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let stamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let mut paths = vec![];
    for t in &o.tables {
        let path = dir.join(format!("{}.csv", t.name));
        fs::write(&path, format!("# generated_at={stamp}\n{}", csv_body(t)?))?;
        paths.push(path);
    }
    let path = dir.join(format!("{}.json", o.command));
    fs::write(&path, json_body(o, config)?)?;
    paths.push(path);
    Ok(paths)
}
