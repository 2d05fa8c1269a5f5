//! CSV files written and read by the command-line tools.
//!
//! Floats are written in shortest round-trip form, so re-reading a file
//! reproduces the in-memory values bit for bit.

use crate::ingest::parse_timestamp;
use dstsr_core::evaluate::{BenchmarkReport, StormReport};
use dstsr_core::search::RankedCandidate;
use dstsr_core::{DerivedRecord, ForecastResult, ModelSpec};
use std::io::{Read, Write};

pub const DERIVED_HEADER: [&str; 7] = ["timestamp", "Ey", "Pdyn", "PB", "Dst", "Dst_prev", "dDst_dt"];
pub const CATALOG_HEADER: [&str; 5] = [
    "name",
    "kind",
    "expression_text",
    "reported_complexity",
    "computed_complexity",
];
pub const CANDIDATE_HEADER: [&str; 8] = [
    "rank",
    "equation_text",
    "complexity",
    "l1_loss",
    "parsimony",
    "population_size",
    "run_id",
    "seed",
];
pub const REPORT_HEADER: [&str; 7] = [
    "model",
    "mean_rmse",
    "std_rmse",
    "mean_mae",
    "std_mae",
    "n_windows",
    "n_excluded",
];
pub const FORECAST_HEADER: [&str; 3] = ["timestamp", "predicted_dst", "actual_dst"];

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("header mismatch: expected {expected}, found {found}")]
    Header { expected: String, found: String },
    #[error("line {line}: cannot parse {column} \"{value}\"")]
    Field {
        line: u64,
        column: &'static str,
        value: String,
    },
    #[error("line {line}: {message}")]
    Model { line: u64, message: String },
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

fn check_header<R: Read>(rdr: &mut csv::Reader<R>, expected: &[&str]) -> Result<(), FormatError> {
    let h = rdr.headers()?;
    if h.iter().ne(expected.iter().copied()) {
        return Err(FormatError::Header {
            expected: expected.join(","),
            found: h.iter().collect::<Vec<_>>().join(","),
        });
    }
    Ok(())
}

fn field<T: std::str::FromStr>(row: &csv::StringRecord, i: usize, column: &'static str) -> Result<T, FormatError> {
    let s = row.get(i).unwrap_or("");
    s.parse().map_err(|_| FormatError::Field {
        line: row.position().map_or(0, |p| p.line()),
        column,
        value: s.to_string(),
    })
}

pub fn write_derived<W: Write>(w: W, rows: &[DerivedRecord]) -> Result<(), FormatError> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(DERIVED_HEADER)?;
    for r in rows {
        wtr.write_record([
            r.time.to_string(),
            fmt_f64(r.ey),
            fmt_f64(r.pdyn),
            fmt_f64(r.pb),
            fmt_f64(r.dst),
            fmt_f64(r.dst_prev),
            fmt_f64(r.ddst_dt),
        ])?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_derived<R: Read>(r: R) -> Result<Vec<DerivedRecord>, FormatError> {
    let mut rdr = csv::Reader::from_reader(r);
    check_header(&mut rdr, &DERIVED_HEADER)?;
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let ts = row.get(0).unwrap_or("");
        let time = parse_timestamp(ts).ok_or_else(|| FormatError::Field {
            line: row.position().map_or(0, |p| p.line()),
            column: "timestamp",
            value: ts.to_string(),
        })?;
        out.push(DerivedRecord {
            time,
            ey: field(&row, 1, "Ey")?,
            pdyn: field(&row, 2, "Pdyn")?,
            pb: field(&row, 3, "PB")?,
            dst: field(&row, 4, "Dst")?,
            dst_prev: field(&row, 5, "Dst_prev")?,
            ddst_dt: field(&row, 6, "dDst_dt")?,
        });
    }
    Ok(out)
}

fn opt_u32(x: Option<u32>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

pub fn write_catalog<W: Write>(w: W, models: &[ModelSpec]) -> Result<(), FormatError> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(CATALOG_HEADER)?;
    for m in models {
        let kind = if m.expr().is_some() { "expression" } else { "builtin" };
        wtr.write_record([
            m.name.clone(),
            kind.to_string(),
            m.text(),
            opt_u32(m.reported_complexity),
            opt_u32(m.computed_complexity()),
        ])?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_candidates<W: Write>(w: W, candidates: &[RankedCandidate]) -> Result<(), FormatError> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(CANDIDATE_HEADER)?;
    for c in candidates {
        wtr.write_record([
            c.rank.to_string(),
            c.candidate.expr.to_string(),
            c.candidate.complexity.to_string(),
            fmt_f64(c.candidate.loss),
            fmt_f64(c.parsimony),
            c.population_size.to_string(),
            c.run_id.to_string(),
            c.seed.to_string(),
        ])?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// One row of a candidates file.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateRow {
    pub rank: usize,
    pub model: ModelSpec,
    pub complexity: u32,
    pub l1_loss: f64,
}

/// Reads a candidates file back as expression models named `cand#<rank>`.
pub fn read_candidates<R: Read>(r: R) -> Result<Vec<CandidateRow>, FormatError> {
    let mut rdr = csv::Reader::from_reader(r);
    check_header(&mut rdr, &CANDIDATE_HEADER)?;
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let rank: usize = field(&row, 0, "rank")?;
        let text = row.get(1).unwrap_or("");
        let model = ModelSpec::from_text(format!("cand#{rank}"), text, None).map_err(|e| FormatError::Model {
            line: row.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        out.push(CandidateRow {
            rank,
            model,
            complexity: field(&row, 2, "complexity")?,
            l1_loss: field(&row, 3, "l1_loss")?,
        });
    }
    Ok(out)
}

pub fn write_report<W: Write>(w: W, report: &BenchmarkReport) -> Result<(), FormatError> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(REPORT_HEADER)?;
    for r in &report.rows {
        wtr.write_record([
            r.model.clone(),
            fmt_f64(r.mean_rmse),
            fmt_f64(r.std_rmse),
            fmt_f64(r.mean_mae),
            fmt_f64(r.std_mae),
            r.n_windows.to_string(),
            r.n_excluded.to_string(),
        ])?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// `timestamp, actual, <model>...`. Steps past an invalid trajectory's end
/// are left blank.
pub fn write_storm<W: Write>(w: W, report: &StormReport) -> Result<(), FormatError> {
    let mut wtr = csv::Writer::from_writer(w);
    let mut header = vec!["timestamp".to_string(), "actual".to_string()];
    header.extend(report.results.iter().map(|(f, _)| f.model.clone()));
    wtr.write_record(&header)?;
    let start = report.event.window.start;
    for (k, a) in report.actual.iter().enumerate() {
        let mut rec = vec![start.offset(k as i64).to_string(), fmt_f64(*a)];
        rec.extend(
            report
                .results
                .iter()
                .map(|(f, _)| f.predicted.get(k).map_or_else(String::new, |v| fmt_f64(*v))),
        );
        wtr.write_record(&rec)?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_forecast<W: Write>(w: W, f: &ForecastResult) -> Result<(), FormatError> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(FORECAST_HEADER)?;
    for (k, (t, p)) in f.timestamps().zip(&f.predicted).enumerate() {
        let actual = f
            .actual
            .as_ref()
            .and_then(|a| a.get(k))
            .map_or_else(String::new, |v| fmt_f64(*v));
        wtr.write_record([t.to_string(), fmt_f64(*p), actual])?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use dstsr_core::models::catalog;
    use dstsr_core::Timestamp;

    #[test]
    fn derived_round_trip_is_exact() {
        let rows: Vec<DerivedRecord> = (0..5)
            .map(|i| DerivedRecord {
                time: Timestamp(300_000 + i),
                ey: 0.1 * i as f64 + 1e-17,
                pdyn: 1.0 / 3.0,
                pb: std::f64::consts::PI,
                dst: -12.5,
                dst_prev: -12.0,
                ddst_dt: if i == 4 { f64::NAN } else { -0.25 },
            })
            .collect();
        let mut buf = Vec::new();
        write_derived(&mut buf, &rows).unwrap();
        let back = read_derived(buf.as_slice()).unwrap();
        assert_eq!(back.len(), 5);
        for (a, b) in rows.iter().zip(&back) {
            assert_eq!(a.time, b.time);
            assert_eq!(a.ey.to_bits(), b.ey.to_bits());
            assert_eq!(a.pb, b.pb);
        }
        assert!(back[4].ddst_dt.is_nan());
    }

    #[test]
    fn derived_header_is_checked() {
        let e = read_derived("time,Ey\n".as_bytes()).unwrap_err();
        assert!(matches!(e, FormatError::Header { .. }));
    }

    #[test]
    fn catalog_rows() {
        let mut buf = Vec::new();
        write_catalog(&mut buf, &catalog()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 15);
        assert_eq!(lines[1], "C3,expression,-0.031*Dst,3,3");
        assert!(lines[14].starts_with("OBM,builtin,"));
        assert!(lines[14].ends_with(",,"));
    }
}
