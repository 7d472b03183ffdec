//! Output records and their CSV / JSON encodings.
//!
//! CSV values carry five significant figures in plain decimal notation;
//! JSON carries full precision.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::config::{Format, GridKey, Method};
use crate::error::Result;

pub const SCHEMA_VERSION: u32 = 1;

/// One `(N, method)` result.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub n: usize,
    pub method: Method,
    pub beta: f64,
    pub gamma: f64,
    pub field: Option<f64>,
    pub tau_p: Option<f64>,
    pub tau_q: Option<f64>,
    pub tau: Option<f64>,
    /// Zero-eigenvalue multiplicity of the Liouvillian (QOME only).
    pub zero_multiplicity: Option<usize>,
    /// Wall-clock seconds of the solver call.
    pub wall_seconds: Option<f64>,
}

pub const RECORD_COLUMNS: [&str; 10] = [
    "n",
    "method",
    "beta",
    "gamma",
    "field",
    "tau_p",
    "tau_q",
    "tau",
    "zero_multiplicity",
    "wall_seconds",
];

pub const TABLE1_COLUMNS: [&str; 10] = [
    "N",
    "lba_tauP",
    "lba_tauQ",
    "lba_num_tauP",
    "lba_num_tauQ",
    "lba_cpu_s",
    "qome_tauP",
    "qome_tauQ",
    "qome_cpu_s",
    "warnings",
];

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Table1Row {
    pub n: usize,
    pub lba_tau_p: f64,
    pub lba_tau_q: f64,
    pub lba_num_tau_p: Option<f64>,
    pub lba_num_tau_q: Option<f64>,
    pub lba_cpu_s: Option<f64>,
    pub qome_tau_p: Option<f64>,
    pub qome_tau_q: Option<f64>,
    pub qome_cpu_s: Option<f64>,
    pub warnings: Vec<String>,
}

/// Five significant figures, never in exponent notation.
pub fn sig5(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (4 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // rounding can carry into a new leading digit, e.g. 9.99996 -> 10.0000
    let rounded: f64 = s.parse().unwrap_or(x);
    if rounded != 0.0 && rounded.abs().log10().floor() as i32 > magnitude && decimals > 0 {
        format!("{x:.prec$}", prec = decimals - 1)
    } else {
        s
    }
}

fn cell(x: Option<f64>) -> String {
    x.map(sig5).unwrap_or_default()
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(std::io::BufWriter::new(std::fs::File::create(path)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

#[derive(Serialize)]
struct RecordReport<'a> {
    schema_version: u32,
    command: &'a str,
    family: &'a str,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    grid_key: Option<GridKey>,
    records: &'a [Record],
}

/// Context echoed in JSON reports.
pub struct ReportMeta<'a> {
    pub command: &'a str,
    pub family: &'a str,
    pub seed: u64,
    pub grid_key: Option<GridKey>,
}

pub fn write_records(
    records: &[Record],
    format: Format,
    meta: &ReportMeta<'_>,
    out: Option<&Path>,
) -> Result<()> {
    let mut w = sink(out)?;
    match format {
        Format::Csv => {
            let mut csv = csv::Writer::from_writer(&mut w);
            csv.write_record(RECORD_COLUMNS)?;
            for r in records {
                csv.write_record([
                    r.n.to_string(),
                    r.method.as_str().to_string(),
                    sig5(r.beta),
                    sig5(r.gamma),
                    cell(r.field),
                    cell(r.tau_p),
                    cell(r.tau_q),
                    cell(r.tau),
                    r.zero_multiplicity
                        .map(|z| z.to_string())
                        .unwrap_or_default(),
                    cell(r.wall_seconds),
                ])?;
            }
            csv.flush()?;
        }
        Format::Json => {
            let report = RecordReport {
                schema_version: SCHEMA_VERSION,
                command: meta.command,
                family: meta.family,
                seed: meta.seed,
                grid_key: meta.grid_key,
                records,
            };
            serde_json::to_writer_pretty(&mut w, &report)?;
            writeln!(w)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_table1(rows: &[Table1Row], out: Option<&Path>) -> Result<()> {
    let mut w = sink(out)?;
    {
        let mut csv = csv::Writer::from_writer(&mut w);
        csv.write_record(TABLE1_COLUMNS)?;
        for r in rows {
            csv.write_record([
                r.n.to_string(),
                sig5(r.lba_tau_p),
                sig5(r.lba_tau_q),
                cell(r.lba_num_tau_p),
                cell(r.lba_num_tau_q),
                cell(r.lba_cpu_s),
                cell(r.qome_tau_p),
                cell(r.qome_tau_q),
                cell(r.qome_cpu_s),
                r.warnings.join("; "),
            ])?;
        }
        csv.flush()?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_significant_figures() {
        assert_eq!(sig5(0.047599), "0.047599");
        assert_eq!(sig5(1f64.tanh() / 16.0), "0.047600");
        assert_eq!(sig5(0.0044328), "0.0044328");
        assert_eq!(sig5(4.45773e-6), "0.0000044577");
        assert_eq!(sig5(84.22), "84.220");
        assert_eq!(sig5(20411.0), "20411");
        assert_eq!(sig5(123456.0), "123456");
        assert_eq!(sig5(9.99996), "10.000");
        assert_eq!(sig5(-0.5), "-0.50000");
        assert_eq!(sig5(0.0), "0");
    }

    #[test]
    fn table1_header_is_stable() {
        let mut buf = Vec::new();
        {
            let mut csv = csv::Writer::from_writer(&mut buf);
            csv.write_record(TABLE1_COLUMNS).unwrap();
        }
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "N,lba_tauP,lba_tauQ,lba_num_tauP,lba_num_tauQ,lba_cpu_s,qome_tauP,qome_tauQ,qome_cpu_s,warnings\n"
        );
    }
}
