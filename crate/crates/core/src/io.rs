//! CSV formats.
//!
//! - Profiles: header `d0,d1,…,d{D-1}`, one profile per row.
//! - Matrices: header `c0,…,c{n-1}`, one matrix row per line.
//! - Traces: `policy,trial,round,inst_regret,cum_regret,covered`.
//! - Aggregates: `policy,round,mean_cum_regret,stderr`.
//!
//! Floats are written in Rust's shortest round-trip form, so reading a file
//! back gives the exact values that were written.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use crate::harness::{AggregateReport, RegretTrace, SweepPoint};
use crate::hierarchy::ProfileSet;
use crate::{Error, RealMatrix, RealVector, Result};

pub const TRACE_HEADER: [&str; 6] = ["policy", "trial", "round", "inst_regret", "cum_regret", "covered"];
pub const AGGREGATE_HEADER: [&str; 4] = ["policy", "round", "mean_cum_regret", "stderr"];

fn parse_f64(field: &str, line: usize) -> Result<f64> {
    let v: f64 = field.trim().parse().map_err(|_| Error::Parse(format!("line {line}: `{field}` is not a number")))?;
    if !v.is_finite() {
        return Err(Error::Parse(format!("line {line}: non-finite value `{field}`")));
    }
    Ok(v)
}

fn reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    Ok(csv::ReaderBuilder::new().has_headers(true).from_reader(file))
}

fn numeric_rows(path: &Path, prefix: char) -> Result<(usize, Vec<Vec<f64>>)> {
    let mut rdr = reader(path)?;
    let headers = rdr.headers().map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?.clone();
    for (j, h) in headers.iter().enumerate() {
        if h.trim() != format!("{prefix}{j}") {
            return Err(Error::Parse(format!("{}: header column {j} is `{h}`, expected `{prefix}{j}`", path.display())));
        }
    }
    let cols = headers.len();
    if cols == 0 {
        return Err(Error::Parse(format!("{}: empty header", path.display())));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let line = i + 2;
        if rec.len() != cols {
            return Err(Error::Parse(format!("line {line}: {} fields, expected {cols}", rec.len())));
        }
        rows.push(rec.iter().map(|f| parse_f64(f, line)).collect::<Result<Vec<_>>>()?);
    }
    Ok((cols, rows))
}

/// Reads a profile CSV into a `D × N` profile set.
pub fn read_profiles(path: &Path) -> Result<ProfileSet> {
    let (dim, rows) = numeric_rows(path, 'd')?;
    if rows.is_empty() {
        return Err(Error::Parse(format!("{}: no profiles", path.display())));
    }
    let w = RealMatrix::from_fn(dim, rows.len(), |i, j| rows[j][i]);
    ProfileSet::new(w).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn write_profiles(path: &Path, profiles: &ProfileSet) -> Result<()> {
    write_numeric(path, 'd', &profiles.matrix().transpose())
}

fn write_numeric(path: &Path, prefix: char, m: &RealMatrix) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record((0..m.ncols()).map(|j| format!("{prefix}{j}")))?;
    for row in m.row_iter() {
        w.write_record(row.iter().map(f64::to_string))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_matrix(path: &Path, m: &RealMatrix) -> Result<()> {
    write_numeric(path, 'c', m)
}

pub fn read_matrix(path: &Path) -> Result<RealMatrix> {
    let (cols, rows) = numeric_rows(path, 'c')?;
    Ok(RealMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

/// A vector is written as a one-column matrix.
pub fn write_vector(path: &Path, v: &RealVector) -> Result<()> {
    write_matrix(path, &RealMatrix::from_column_slice(v.len(), 1, v.as_slice()))
}

pub fn write_traces(path: &Path, traces: &[RegretTrace]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(TRACE_HEADER)?;
    for tr in traces {
        let trial = tr.trial.to_string();
        for t in 0..tr.horizon() {
            w.write_record([
                tr.policy.as_str(),
                &trial,
                &(t + 1).to_string(),
                &tr.inst[t].to_string(),
                &tr.cum[t].to_string(),
                if tr.covered[t] { "1" } else { "0" },
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads traces back, one per `(policy, trial)` in order of first appearance.
/// Rounds must be contiguous from 1.
pub fn read_traces(path: &Path) -> Result<Vec<RegretTrace>> {
    let mut rdr = reader(path)?;
    let headers = rdr.headers().map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    if headers.iter().ne(TRACE_HEADER) {
        return Err(Error::Parse(format!("{}: trace header must be `{}`", path.display(), TRACE_HEADER.join(","))));
    }
    let mut traces: Vec<RegretTrace> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let int = |j: usize| {
            rec[j].trim().parse::<usize>().map_err(|_| Error::Parse(format!("line {line}: bad integer `{}`", &rec[j])))
        };
        let (policy, trial, round) = (rec[0].to_string(), int(1)?, int(2)?);
        let covered = match rec[5].trim() {
            "1" | "true" => true,
            "0" | "false" => false,
            other => return Err(Error::Parse(format!("line {line}: bad covered flag `{other}`"))),
        };
        let pos = traces.iter().position(|t| t.policy == policy && t.trial == trial);
        let tr = match pos {
            Some(p) => &mut traces[p],
            None => {
                traces.push(RegretTrace {
                    policy,
                    trial,
                    user: 0,
                    inst: Vec::new(),
                    cum: Vec::new(),
                    covered: Vec::new(),
                    coverage_violations: 0,
                    oracle: None,
                });
                traces.last_mut().unwrap()
            }
        };
        if round != tr.inst.len() + 1 {
            return Err(Error::Parse(format!("line {line}: round {round} out of sequence")));
        }
        tr.inst.push(parse_f64(&rec[3], line)?);
        tr.cum.push(parse_f64(&rec[4], line)?);
        tr.covered.push(covered);
        if !covered {
            tr.coverage_violations += 1;
        }
    }
    Ok(traces)
}

pub fn write_aggregate(path: &Path, report: &AggregateReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(AGGREGATE_HEADER)?;
    for s in &report.series {
        for (t, (m, e)) in s.mean_cum.iter().zip(&s.stderr).enumerate() {
            w.write_record([s.label.as_str(), &(t + 1).to_string(), &m.to_string(), &e.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `round,bound` for rounds `1..=T`.
pub fn write_bound(path: &Path, bound: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["round", "bound"])?;
    for (t, b) in bound.iter().enumerate().skip(1) {
        w.write_record([t.to_string(), b.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Final mean regret per policy at every sweep point.
pub fn write_summary(path: &Path, points: &[SweepPoint]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["param", "value", "policy", "n", "final_mean_cum_regret", "final_stderr"])?;
    for p in points {
        for s in &p.report.series {
            w.write_record([
                p.param.to_string(),
                p.value.to_string(),
                s.label.clone(),
                s.n.to_string(),
                s.final_mean().to_string(),
                s.final_stderr().to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    File::create(path)?.write_all(text.as_bytes())?;
    Ok(())
}
