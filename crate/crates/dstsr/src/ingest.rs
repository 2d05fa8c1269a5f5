//! OMNI-style hourly CSV ingestion.

use chrono::{DateTime, NaiveDateTime, Timelike};
use dstsr_core::dataset::{self, DatasetError, RawField};
use dstsr_core::{DerivedRecord, RawRecord, Timestamp};
use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

/// OMNI fill values shared by every column.
pub const DEFAULT_SENTINELS: [f64; 4] = [9999.9, 999.9, 99999.0, 9_999_999.0];

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: {source}")]
    Csv { line: u64, source: csv::Error },
    #[error("missing column \"{0}\" in header")]
    MissingColumn(String),
    #[error("line {line}: cannot parse timestamp \"{value}\"")]
    BadTimestamp { line: u64, value: String },
    #[error("line {line}: timestamp \"{value}\" is not on the hour")]
    NotHourly { line: u64, value: String },
    #[error("line {line}: timestamp {time} does not follow {previous}")]
    NonMonotonic {
        line: u64,
        time: Timestamp,
        previous: Timestamp,
    },
    #[error("line {line}: column {column}: cannot parse \"{value}\" as a number")]
    BadNumber {
        line: u64,
        column: String,
        value: String,
    },
    #[error("no data rows")]
    Empty,
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

/// Column names and fill values for one input file.
#[derive(Debug, Clone, PartialEq)]
pub struct Schema {
    pub timestamp: String,
    pub columns: BTreeMap<RawField, String>,
    pub sentinels: BTreeMap<RawField, Vec<f64>>,
}

impl Default for Schema {
    fn default() -> Self {
        let columns = RawField::ALL
            .iter()
            .map(|&f| (f, f.name().to_string()))
            .collect();
        let sentinels = RawField::ALL
            .iter()
            .map(|&f| {
                let mut s = DEFAULT_SENTINELS.to_vec();
                if f == RawField::Vsw {
                    s.push(9999.0);
                }
                (f, s)
            })
            .collect();
        Schema {
            timestamp: "timestamp".into(),
            columns,
            sentinels,
        }
    }
}

impl Schema {
    fn is_sentinel(&self, field: RawField, v: f64) -> bool {
        self.sentinels
            .get(&field)
            .is_some_and(|s| s.contains(&v))
    }
}

/// Parses `YYYY-MM-DDTHH:MM[:SS][Z|offset]`, the same with a space
/// separator, or `YYYY DOY HR`. Returns `Err(true)` for a valid time that is
/// not on the hour.
fn parse_time(s: &str) -> Result<Timestamp, bool> {
    let s = s.trim();
    let parts: Vec<&str> = s.split_whitespace().collect();
    if parts.len() == 3 && parts.iter().all(|p| p.bytes().all(|b| b.is_ascii_digit())) {
        let y: i32 = parts[0].parse().map_err(|_| false)?;
        let doy: u32 = parts[1].parse().map_err(|_| false)?;
        let hr: u32 = parts[2].parse().map_err(|_| false)?;
        return Timestamp::from_year_doy_hour(y, doy, hr).ok_or(false);
    }
    let dt = DateTime::parse_from_rfc3339(s)
        .map(|d| d.naive_utc())
        .or_else(|_| {
            [
                "%Y-%m-%dT%H:%M:%S",
                "%Y-%m-%d %H:%M:%S",
                "%Y-%m-%dT%H:%M",
                "%Y-%m-%d %H:%M",
            ]
            .iter()
            .find_map(|f| NaiveDateTime::parse_from_str(s.trim_end_matches('Z'), f).ok())
            .ok_or(false)
        })?;
    if dt.minute() != 0 || dt.second() != 0 || dt.nanosecond() != 0 {
        return Err(true);
    }
    Ok(Timestamp(dt.and_utc().timestamp().div_euclid(3600)))
}

/// Parses a timestamp in any accepted input format.
pub fn parse_timestamp(s: &str) -> Option<Timestamp> {
    parse_time(s).ok()
}

/// Reads raw records. Rows keep file order; sentinel, empty and
/// non-finite cells become missing, as do negative densities and field
/// magnitudes.
pub fn load_csv_reader<R: Read>(reader: R, schema: &Schema) -> Result<Vec<RawRecord>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|source| IngestError::Csv { line: 1, source })?
        .clone();
    let find = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| IngestError::MissingColumn(name.to_string()))
    };
    let t_col = find(&schema.timestamp)?;
    let cols: Vec<(RawField, usize, &str)> = RawField::ALL
        .iter()
        .map(|&f| {
            let name = schema.columns.get(&f).map_or(f.name(), String::as_str);
            find(name).map(|i| (f, i, name))
        })
        .collect::<Result<_, _>>()?;

    let mut out: Vec<RawRecord> = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|source| IngestError::Csv {
            line: source.position().map_or(0, |p| p.line()),
            source,
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let ts = row.get(t_col).unwrap_or("");
        let time = parse_time(ts).map_err(|not_hourly| {
            let value = ts.to_string();
            if not_hourly {
                IngestError::NotHourly { line, value }
            } else {
                IngestError::BadTimestamp { line, value }
            }
        })?;
        if let Some(prev) = out.last() {
            if time <= prev.time {
                return Err(IngestError::NonMonotonic {
                    line,
                    time,
                    previous: prev.time,
                });
            }
        }
        let mut rec = RawRecord::empty(time);
        for &(field, i, name) in &cols {
            let cell = row.get(i).unwrap_or("");
            if cell.is_empty() {
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| IngestError::BadNumber {
                line,
                column: name.to_string(),
                value: cell.to_string(),
            })?;
            let negative_magnitude =
                matches!(field, RawField::Nsw | RawField::Bmag | RawField::Tsw) && v < 0.0;
            if v.is_finite() && !schema.is_sentinel(field, v) && !negative_magnitude {
                rec.set(field, Some(v));
            }
        }
        out.push(rec);
    }
    Ok(out)
}

pub fn load_csv(path: &Path, schema: &Schema) -> Result<Vec<RawRecord>, IngestError> {
    let file = std::fs::File::open(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_csv_reader(std::io::BufReader::new(file), schema)
}

/// Inserts all-missing rows for absent hours. Returns the contiguous
/// series and the number of rows inserted.
pub fn fill_time_gaps(records: &[RawRecord]) -> (Vec<RawRecord>, usize) {
    let mut out = Vec::with_capacity(records.len());
    let mut inserted = 0;
    for r in records {
        if let Some(prev) = out.last().map(|p: &RawRecord| p.time) {
            let mut t = prev.offset(1);
            while t < r.time {
                out.push(RawRecord::empty(t));
                inserted += 1;
                t = t.offset(1);
            }
        }
        out.push(*r);
    }
    (out, inserted)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct IngestStats {
    pub rows_read: usize,
    pub rows_inserted: usize,
    /// Missing cells per column before repair, counting inserted rows.
    pub missing: BTreeMap<RawField, usize>,
}

impl std::fmt::Display for IngestStats {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} rows read, {} hourly gaps filled",
            self.rows_read, self.rows_inserted
        )?;
        for (field, n) in &self.missing {
            write!(f, "\n  {:<7} {} missing", field.name(), n)?;
        }
        Ok(())
    }
}

/// Load, fill hourly gaps, repair missing values and derive drivers.
pub fn ingest_records(raw: &[RawRecord]) -> Result<(Vec<DerivedRecord>, IngestStats), IngestError> {
    if raw.is_empty() {
        return Err(IngestError::Empty);
    }
    let (filled, inserted) = fill_time_gaps(raw);
    let missing = RawField::ALL
        .iter()
        .map(|&f| (f, filled.iter().filter(|r| r.get(f).is_none()).count()))
        .collect();
    let repaired = dataset::repair_gaps(&filled)?;
    let derived = dataset::derive(&repaired);
    Ok((
        derived,
        IngestStats {
            rows_read: raw.len(),
            rows_inserted: inserted,
            missing,
        },
    ))
}

pub fn ingest(path: &Path, schema: &Schema) -> Result<(Vec<DerivedRecord>, IngestStats), IngestError> {
    ingest_records(&load_csv(path, schema)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "timestamp,Vsw,Bz_gsm,n_sw,B_mag,T_sw,Dst\n";

    fn load(body: &str) -> Result<Vec<RawRecord>, IngestError> {
        load_csv_reader(format!("{HEADER}{body}").as_bytes(), &Schema::default())
    }

    #[test]
    fn well_formed_rows() {
        let r = load(
            "2015-03-17T00:00:00Z,400,-5,5,10,1e5,-10\n\
             2015-03-17T01:00:00Z,410,-4,5,10,1e5,-12\n\
             2015-03-17T02:00:00Z,420,-3,5,10,1e5,-15\n",
        )
        .unwrap();
        assert_eq!(r.len(), 3);
        assert!(r.iter().all(RawRecord::is_complete));
        assert_eq!(r[0].time, Timestamp::from_ymdh(2015, 3, 17, 0).unwrap());
    }

    #[test]
    fn sentinels_and_blanks_are_missing() {
        let r = load("2015-03-17T00:00:00Z,9999.9,,5,999.9,9999999.,-10\n").unwrap();
        assert_eq!(r[0].vsw, None);
        assert_eq!(r[0].bz, None);
        assert_eq!(r[0].b_mag, None);
        assert_eq!(r[0].t_sw, None);
        assert_eq!(r[0].n_sw, Some(5.0));
        let r = load("2015-03-17T00:00:00Z,9999,1,-2,5,1,-10\n").unwrap();
        assert_eq!((r[0].vsw, r[0].n_sw), (None, None));
    }

    #[test]
    fn column_order_is_free() {
        let text = "Dst,B_mag,T_sw,n_sw,Bz_gsm,Vsw,timestamp\n-7,10,1e5,5,-5,400,2003 302 5\n";
        let r = load_csv_reader(text.as_bytes(), &Schema::default()).unwrap();
        assert_eq!(r[0].dst, Some(-7.0));
        assert_eq!(r[0].vsw, Some(400.0));
        assert_eq!(r[0].time, Timestamp::from_ymdh(2003, 10, 29, 5).unwrap());
    }

    #[test]
    fn schema_errors_name_the_column() {
        let e = load_csv_reader(
            "timestamp,Vsw,Bz_gsm,n_sw,B_mag,T_sw\n".as_bytes(),
            &Schema::default(),
        )
        .unwrap_err();
        assert!(matches!(&e, IngestError::MissingColumn(c) if c == "Dst"));
        assert!(e.to_string().contains("Dst"));
    }

    #[test]
    fn row_errors_carry_line_numbers() {
        let e = load("2015-03-17T00:00:00Z,400,-5,5,10,1e5,-10\n2015-03-17T01:00:00Z,abc,-5,5,10,1e5,-10\n")
            .unwrap_err();
        assert!(matches!(e, IngestError::BadNumber { line: 3, .. }), "{e}");
        let e = load("2015-03-17T01:00:00Z,1,1,1,1,1,1\n2015-03-17T00:00:00Z,1,1,1,1,1,1\n").unwrap_err();
        assert!(matches!(e, IngestError::NonMonotonic { line: 3, .. }), "{e}");
        let e = load("2015-03-17T00:30:00Z,1,1,1,1,1,1\n").unwrap_err();
        assert!(matches!(e, IngestError::NotHourly { line: 2, .. }), "{e}");
        let e = load("yesterday,1,1,1,1,1,1\n").unwrap_err();
        assert!(matches!(e, IngestError::BadTimestamp { line: 2, .. }), "{e}");
        let e = load("2015-03-17T00:00:00Z,1,1,1\n").unwrap_err();
        assert!(matches!(e, IngestError::Csv { line: 2, .. }), "{e}");
    }

    #[test]
    fn timestamp_formats_agree() {
        let t = Timestamp::from_ymdh(2021, 5, 1, 13).unwrap();
        for s in [
            "2021-05-01T13:00:00Z",
            "2021-05-01T13:00:00",
            "2021-05-01 13:00:00",
            "2021-05-01T13:00",
            "2021-05-01T15:00:00+02:00",
            "2021 121 13",
        ] {
            assert_eq!(parse_timestamp(s), Some(t), "{s}");
        }
        assert_eq!(parse_timestamp("2021 400 1"), None);
    }

    #[test]
    fn gaps_become_missing_rows_then_interpolate() {
        let raw = load(
            "2015-03-17T00:00:00Z,400,-5,5,10,1e5,-10\n\
             2015-03-17T03:00:00Z,400,-5,5,10,1e5,-40\n",
        )
        .unwrap();
        let (derived, stats) = ingest_records(&raw).unwrap();
        assert_eq!(derived.len(), 4);
        assert_eq!(stats.rows_inserted, 2);
        assert_eq!(stats.missing[&RawField::Dst], 2);
        let dst: Vec<f64> = derived.iter().map(|r| r.dst).collect();
        assert_eq!(dst, [-10.0, -20.0, -30.0, -40.0]);
    }

    #[test]
    fn all_missing_column_fails() {
        let raw = load("2015-03-17T00:00:00Z,400,-5,5,10,,-10\n2015-03-17T01:00:00Z,400,-5,5,10,,-10\n").unwrap();
        assert!(matches!(
            ingest_records(&raw),
            Err(IngestError::Dataset(DatasetError::AllMissing(RawField::Tsw)))
        ));
    }
}
