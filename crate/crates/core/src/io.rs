//! CSV persistence for traces, snapshots and fit summaries.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::decay::{DecayFit, DecayModel};
use crate::energy::{EnergySample, EnergyTrace};
use crate::error::{Error, Result};
use crate::solver::{Mesh1D, Snapshot};

/// Shortest decimal that reads back to the same `f64`.
pub fn format_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.into(), source }
}

pub fn trace_header(probes: &[usize]) -> Vec<String> {
    EnergySample::COLUMNS
        .iter()
        .map(|c| c.to_string())
        .chain(probes.iter().map(|p| format!("u_p{p}")))
        .collect()
}

pub fn write_trace<W: Write>(mut w: W, trace: &EnergyTrace) -> std::io::Result<()> {
    writeln!(w, "{}", trace_header(&trace.meta.probes).join(","))?;
    for s in &trace.samples {
        let row: Vec<String> = s.values().into_iter().map(format_f64).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()
}

pub fn save_trace(path: &Path, trace: &EnergyTrace) -> Result<()> {
    let f = File::create(path).map_err(io_err(path))?;
    write_trace(BufWriter::new(f), trace).map_err(io_err(path))
}

/// Rows `t, x, u`, one per node per snapshot.
pub fn write_snapshots<W: Write>(mut w: W, mesh: &Mesh1D, snapshots: &[Snapshot]) -> std::io::Result<()> {
    writeln!(w, "t,x,u")?;
    let x = mesh.coordinates();
    for s in snapshots {
        let t = format_f64(s.t);
        for (x, u) in x.iter().zip(&s.u) {
            writeln!(w, "{t},{},{}", format_f64(*x), format_f64(*u))?;
        }
    }
    w.flush()
}

pub fn save_snapshots(path: &Path, mesh: &Mesh1D, snapshots: &[Snapshot]) -> Result<()> {
    let f = File::create(path).map_err(io_err(path))?;
    write_snapshots(BufWriter::new(f), mesh, snapshots).map_err(io_err(path))
}

/// A numeric CSV table with a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

pub fn read_table<R: Read>(reader: R, path: &Path) -> Result<Table> {
    let csv_err = |line: usize, msg: String| Error::Csv { path: path.into(), line, msg };
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| csv_err(1, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.is_empty() {
        return Err(csv_err(1, "empty file".into()));
    }
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            csv_err(line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let row = record
            .iter()
            .map(|f| f.parse::<f64>().map_err(|e| csv_err(line, format!("'{f}': {e}"))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(Table { header, rows })
}

pub fn load_table(path: &Path) -> Result<Table> {
    let f = File::open(path).map_err(io_err(path))?;
    read_table(BufReader::new(f), path)
}

pub const FIT_HEADER: &str = "column,model,parameter,intercept,r_squared,t_lo,t_hi,points,dropped";

pub fn fit_row(column: &str, fit: &DecayFit) -> String {
    let model = match fit.model {
        DecayModel::Power => "power",
        DecayModel::Exponential => "exp",
    };
    format!(
        "{column},{model},{},{},{},{},{},{},{}",
        format_f64(fit.parameter),
        format_f64(fit.intercept),
        format_f64(fit.r_squared),
        format_f64(fit.t_lo),
        format_f64(fit.t_hi),
        fit.points,
        fit.dropped
    )
}
