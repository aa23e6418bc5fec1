//! Run records and their CSV format.
//!
//! Floats are written in their shortest round-trip form, so parsing a
//! written file gives back the same records bit for bit.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

pub const HEADER: [&str; 13] = [
    "instance",
    "mode",
    "reduce",
    "stop_pt",
    "time_s",
    "gap_pct",
    "iterations",
    "cuts",
    "eta",
    "ub",
    "lb",
    "status",
    "verdict",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub instance: String,
    pub mode: String,
    pub reduce: bool,
    pub stop_pt: usize,
    pub time_s: f64,
    pub gap_pct: f64,
    pub iterations: usize,
    pub cuts: usize,
    pub eta: f64,
    pub ub: f64,
    pub lb: f64,
    pub status: String,
    /// Empty unless the run was checked against brute force.
    pub verdict: String,
}

impl RunRecord {
    fn fields(&self) -> [String; 13] {
        [
            self.instance.clone(),
            self.mode.clone(),
            self.reduce.to_string(),
            self.stop_pt.to_string(),
            self.time_s.to_string(),
            self.gap_pct.to_string(),
            self.iterations.to_string(),
            self.cuts.to_string(),
            self.eta.to_string(),
            self.ub.to_string(),
            self.lb.to_string(),
            self.status.clone(),
            self.verdict.clone(),
        ]
    }
}

pub fn write_records(records: &[RunRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    // writing into a Vec cannot fail
    w.write_record(HEADER).expect("in-memory write");
    for r in records {
        w.write_record(r.fields()).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("fields are UTF-8")
}

/// CSV body without the header line, for appending rows to an existing file.
pub fn write_rows(records: &[RunRecord]) -> String {
    let full = write_records(records);
    full.split_once('\n').map(|(_, body)| body.to_string()).unwrap_or_default()
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, idx: usize, line: usize) -> Result<T> {
    let raw = &rec[idx];
    raw.parse()
        .map_err(|_| Error::Parse { line, msg: format!("invalid {} `{raw}`", HEADER[idx]) })
}

pub fn parse_records(text: &str) -> Result<Vec<RunRecord>> {
    let mut rd = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(text.as_bytes());
    let mut rows = rd.records();
    let header = match rows.next() {
        Some(h) => h.map_err(|e| Error::Parse { line: 1, msg: e.to_string() })?,
        None => return Err(Error::Parse { line: 1, msg: "empty report".into() }),
    };
    if header.iter().ne(HEADER.iter().copied()) {
        return Err(Error::Parse { line: 1, msg: format!("expected header `{}`", HEADER.join(",")) });
    }
    let mut out = Vec::new();
    for row in rows {
        let rec = row.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            msg: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != HEADER.len() {
            return Err(Error::Parse { line, msg: format!("expected {} fields, found {}", HEADER.len(), rec.len()) });
        }
        out.push(RunRecord {
            instance: rec[0].to_string(),
            mode: rec[1].to_string(),
            reduce: field(&rec, 2, line)?,
            stop_pt: field(&rec, 3, line)?,
            time_s: field(&rec, 4, line)?,
            gap_pct: field(&rec, 5, line)?,
            iterations: field(&rec, 6, line)?,
            cuts: field(&rec, 7, line)?,
            eta: field(&rec, 8, line)?,
            ub: field(&rec, 9, line)?,
            lb: field(&rec, 10, line)?,
            status: rec[11].to_string(),
            verdict: rec[12].to_string(),
        });
    }
    Ok(out)
}

/// Means per `(mode, reduce, stop_pt)` configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub mode: String,
    pub reduce: bool,
    pub stop_pt: usize,
    pub runs: usize,
    pub optimal: usize,
    pub mean_time_s: f64,
    pub mean_gap_pct: f64,
    pub mean_iterations: f64,
    pub mean_cuts: f64,
}

pub fn aggregate(records: &[RunRecord]) -> Vec<Summary> {
    let mut groups: BTreeMap<(String, bool, usize), Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.mode.clone(), r.reduce, r.stop_pt)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((mode, reduce, stop_pt), rs)| {
            let k = rs.len() as f64;
            let mean = |g: fn(&RunRecord) -> f64| rs.iter().map(|r| g(r)).sum::<f64>() / k;
            Summary {
                runs: rs.len(),
                optimal: rs.iter().filter(|r| r.status == "optimal").count(),
                mean_time_s: mean(|r| r.time_s),
                mean_gap_pct: mean(|r| r.gap_pct),
                mean_iterations: mean(|r| r.iterations as f64),
                mean_cuts: mean(|r| r.cuts as f64),
                mode,
                reduce,
                stop_pt,
            }
        })
        .collect()
}
