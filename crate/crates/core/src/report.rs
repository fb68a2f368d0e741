//! Per-user result table: modulation, data size, granted units and the
//! cumulative system state, as CSV or an aligned text table.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scenario::Scenario;
use crate::simengine::Summary;

pub const CSV_HEADER: &str = "user,n_of,n_bit,data_size,allocated_units,system_state";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReportError {
    #[error("unexpected CSV header `{0}`")]
    Header(String),
    #[error("line {line}: {message}")]
    Row { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReportFormat {
    Table,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "table" => Ok(ReportFormat::Table),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(format!("unknown format `{other}` (expected table or csv)")),
        }
    }
}

/// One user's line. Units and bits are floored to whole numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportRow {
    pub user: u32,
    pub n_of: u32,
    pub n_bit: u32,
    pub data_size: u64,
    pub allocated_units: u64,
    /// Bits carried by this user and every user listed before it.
    pub system_state: u64,
}

fn floor_units(v: f64) -> u64 {
    v.max(0.0).floor() as u64
}

/// Rows in ascending user order, one per scenario user.
pub fn build_report(scenario: &Scenario, summary: &Summary) -> Vec<ReportRow> {
    let mobile = scenario.mobile_network();
    let mut cumulative = 0.0;
    scenario
        .users
        .iter()
        .map(|u| {
            let totals = summary.per_user.get(&u.id).copied().unwrap_or_default();
            cumulative += totals.bits;
            let (n_of, n_bit) = u.modulation_at(0, mobile);
            ReportRow {
                user: u.id.0,
                n_of,
                n_bit,
                data_size: u.data_size,
                allocated_units: floor_units(totals.units),
                system_state: floor_units(cumulative),
            }
        })
        .collect()
}

pub fn emit_report(rows: &[ReportRow], format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Csv => emit_csv(rows),
        ReportFormat::Table => emit_table(rows),
    }
    .into_bytes()
}

fn emit_csv(rows: &[ReportRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.user, r.n_of, r.n_bit, r.data_size, r.allocated_units, r.system_state
        );
    }
    out
}

fn emit_table(rows: &[ReportRow]) -> String {
    let header: Vec<&str> = CSV_HEADER.split(',').collect();
    let cells: Vec<[String; 6]> = rows
        .iter()
        .map(|r| {
            [
                r.user.to_string(),
                r.n_of.to_string(),
                r.n_bit.to_string(),
                r.data_size.to_string(),
                r.allocated_units.to_string(),
                r.system_state.to_string(),
            ]
        })
        .collect();
    let widths: Vec<usize> = (0..6)
        .map(|c| cells.iter().map(|row| row[c].len()).chain([header[c].len()]).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    let line = |out: &mut String, vals: &[&str]| {
        let parts: Vec<String> = vals.iter().zip(&widths).map(|(v, w)| format!("{v:>w$}")).collect();
        out.push_str(parts.join("  ").trim_end());
        out.push('\n');
    };
    line(&mut out, &header);
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    out.push_str(&rule.join("  "));
    out.push('\n');
    for row in &cells {
        let vals: Vec<&str> = row.iter().map(String::as_str).collect();
        line(&mut out, &vals);
    }
    out
}

/// Reads back a CSV produced by [`emit_report`].
pub fn parse_csv(text: &str) -> Result<Vec<ReportRow>, ReportError> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    if header != CSV_HEADER {
        return Err(ReportError::Header(header.to_string()));
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| {
            let line = i + 2;
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 6 {
                return Err(ReportError::Row { line, message: format!("expected 6 fields, found {}", f.len()) });
            }
            let bad = |e: std::num::ParseIntError| ReportError::Row { line, message: e.to_string() };
            Ok(ReportRow {
                user: f[0].parse().map_err(bad)?,
                n_of: f[1].parse().map_err(bad)?,
                n_bit: f[2].parse().map_err(bad)?,
                data_size: f[3].parse().map_err(bad)?,
                allocated_units: f[4].parse().map_err(bad)?,
                system_state: f[5].parse().map_err(bad)?,
            })
        })
        .collect()
}
