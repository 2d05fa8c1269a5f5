//! Hourly solar-wind records, gap repair and derived drivers.

use crate::expr::{FeatureTable, Var};
use crate::time::{TimeRange, Timestamp};
use alloc::vec::Vec;
use core::f64::consts::PI;

/// Proton mass and unit conversion factor: `n [cm^-3] * V^2 [km/s]^2 -> nPa`.
pub const PDYN_FACTOR: f64 = 1.6726e-6;
/// Vacuum permeability, H/m.
pub const MU0: f64 = 4.0 * PI * 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum DatasetError {
    #[error("no records")]
    Empty,
    #[error("column {0} has no valid values")]
    AllMissing(RawField),
    #[error("need at least {needed} rows, got {got}")]
    TooShort { needed: usize, got: usize },
}

/// Columns of a raw hourly record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RawField {
    Vsw,
    Bz,
    Nsw,
    Bmag,
    Tsw,
    Dst,
}

impl RawField {
    pub const ALL: [RawField; 6] = [
        RawField::Vsw,
        RawField::Bz,
        RawField::Nsw,
        RawField::Bmag,
        RawField::Tsw,
        RawField::Dst,
    ];

    /// Default CSV header name.
    pub fn name(self) -> &'static str {
        match self {
            RawField::Vsw => "Vsw",
            RawField::Bz => "Bz_gsm",
            RawField::Nsw => "n_sw",
            RawField::Bmag => "B_mag",
            RawField::Tsw => "T_sw",
            RawField::Dst => "Dst",
        }
    }
}

impl core::fmt::Display for RawField {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

/// One hour of OMNI-style measurements. `None` marks a missing value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawRecord {
    pub time: Timestamp,
    /// Solar-wind speed, km/s.
    pub vsw: Option<f64>,
    /// IMF Bz (GSM), nT.
    pub bz: Option<f64>,
    /// Proton density, cm^-3.
    pub n_sw: Option<f64>,
    /// IMF magnitude, nT.
    pub b_mag: Option<f64>,
    /// Proton temperature, K.
    pub t_sw: Option<f64>,
    /// Dst, nT.
    pub dst: Option<f64>,
}

impl RawRecord {
    /// A record with every field missing.
    pub fn empty(time: Timestamp) -> Self {
        RawRecord {
            time,
            vsw: None,
            bz: None,
            n_sw: None,
            b_mag: None,
            t_sw: None,
            dst: None,
        }
    }

    pub fn get(&self, field: RawField) -> Option<f64> {
        match field {
            RawField::Vsw => self.vsw,
            RawField::Bz => self.bz,
            RawField::Nsw => self.n_sw,
            RawField::Bmag => self.b_mag,
            RawField::Tsw => self.t_sw,
            RawField::Dst => self.dst,
        }
    }

    pub fn set(&mut self, field: RawField, value: Option<f64>) {
        let slot = match field {
            RawField::Vsw => &mut self.vsw,
            RawField::Bz => &mut self.bz,
            RawField::Nsw => &mut self.n_sw,
            RawField::Bmag => &mut self.b_mag,
            RawField::Tsw => &mut self.t_sw,
            RawField::Dst => &mut self.dst,
        };
        *slot = value;
    }

    pub fn is_complete(&self) -> bool {
        RawField::ALL
            .iter()
            .all(|&f| self.get(f).is_some_and(f64::is_finite))
    }
}

/// Derived drivers and target for one hour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedRecord {
    pub time: Timestamp,
    /// Convective electric field, mV/m.
    pub ey: f64,
    /// Dynamic pressure, nPa.
    pub pdyn: f64,
    /// Magnetic pressure, nPa.
    pub pb: f64,
    /// Dst, nT.
    pub dst: f64,
    /// Dst one hour earlier, nT. The first row repeats its own Dst.
    pub dst_prev: f64,
    /// Central-difference dDst/dt, nT/hr.
    pub ddst_dt: f64,
}

impl DerivedRecord {
    /// Model inputs in [`Var::index`] order.
    pub fn point(&self) -> [f64; 4] {
        [self.dst, self.ey, self.pdyn, self.pb]
    }

    pub fn drivers_finite(&self) -> bool {
        self.ey.is_finite() && self.pdyn.is_finite() && self.pb.is_finite() && self.dst.is_finite()
    }
}

/// Anything carrying an hourly timestamp.
pub trait Timed {
    fn time(&self) -> Timestamp;
}

impl Timed for RawRecord {
    fn time(&self) -> Timestamp {
        self.time
    }
}

impl Timed for DerivedRecord {
    fn time(&self) -> Timestamp {
        self.time
    }
}

/// Fills missing values: linear interpolation inside a column, back-fill
/// for a leading run and forward-fill for a trailing run.
///
/// Non-finite values are treated as missing.
pub fn repair_gaps(records: &[RawRecord]) -> Result<Vec<RawRecord>, DatasetError> {
    if records.is_empty() {
        return Err(DatasetError::Empty);
    }
    let mut out = records.to_vec();
    for field in RawField::ALL {
        let known: Vec<(usize, f64)> = records
            .iter()
            .enumerate()
            .filter_map(|(i, r)| r.get(field).filter(|v| v.is_finite()).map(|v| (i, v)))
            .collect();
        let (&(first_i, first_v), &(last_i, last_v)) = match (known.first(), known.last()) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(DatasetError::AllMissing(field)),
        };
        for rec in &mut out[..first_i] {
            rec.set(field, Some(first_v));
        }
        for rec in &mut out[last_i + 1..] {
            rec.set(field, Some(last_v));
        }
        for pair in known.windows(2) {
            let ((i0, v0), (i1, v1)) = (pair[0], pair[1]);
            if i1 == i0 + 1 {
                continue;
            }
            let t0 = records[i0].time.hours() as f64;
            let span = records[i1].time.hours() as f64 - t0;
            for rec in &mut out[i0 + 1..i1] {
                let w = (rec.time.hours() as f64 - t0) / span;
                rec.set(field, Some(v0 + (v1 - v0) * w));
            }
        }
    }
    Ok(out)
}

/// Convective electric field `-V Bz * 1e-3`, mV/m.
pub fn electric_field(vsw: f64, bz: f64) -> f64 {
    -vsw * bz * 1e-3
}

/// Dynamic pressure `1.6726e-6 n V^2`, nPa.
pub fn dynamic_pressure(n_sw: f64, vsw: f64) -> f64 {
    PDYN_FACTOR * n_sw * vsw * vsw
}

/// Magnetic pressure `B^2 / (2 mu0)` for `B` in nT, returned in nPa.
pub fn magnetic_pressure(b_mag: f64) -> f64 {
    let b_tesla = b_mag * 1e-9;
    b_tesla * b_tesla / (2.0 * MU0) * 1e9
}

/// Hourly dDst/dt: central differences inside, one-sided at the ends.
pub fn central_diff_dst(dst: &[f64]) -> Result<Vec<f64>, DatasetError> {
    let n = dst.len();
    if n < 2 {
        return Err(DatasetError::TooShort { needed: 2, got: n });
    }
    let mut out = Vec::with_capacity(n);
    out.push(dst[1] - dst[0]);
    for i in 1..n - 1 {
        out.push((dst[i + 1] - dst[i - 1]) / 2.0);
    }
    out.push(dst[n - 1] - dst[n - 2]);
    Ok(out)
}

/// Computes drivers and the dDst/dt target from gap-repaired records.
///
/// Missing inputs surface as NaN. A single-row series has an undefined
/// derivative, reported as NaN.
pub fn derive(records: &[RawRecord]) -> Vec<DerivedRecord> {
    let val = |v: Option<f64>| v.unwrap_or(f64::NAN);
    let dst: Vec<f64> = records.iter().map(|r| val(r.dst)).collect();
    let rate = central_diff_dst(&dst).unwrap_or_else(|_| alloc::vec![f64::NAN; dst.len()]);
    records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let vsw = val(r.vsw);
            DerivedRecord {
                time: r.time,
                ey: electric_field(vsw, val(r.bz)),
                pdyn: dynamic_pressure(val(r.n_sw), vsw),
                pb: magnetic_pressure(val(r.b_mag)),
                dst: dst[i],
                dst_prev: if i == 0 { dst[0] } else { dst[i - 1] },
                ddst_dt: rate[i],
            }
        })
        .collect()
}

/// Rows with `range.start <= t < range.end`. Input must be time-ordered.
pub fn slice<T: Timed>(series: &[T], range: TimeRange) -> &[T] {
    let lo = series.partition_point(|r| r.time() < range.start);
    let hi = series.partition_point(|r| r.time() < range.end);
    &series[lo..hi.max(lo)]
}

/// Columnar view of the four model variables.
pub fn feature_table(rows: &[DerivedRecord]) -> FeatureTable {
    let col = |f: fn(&DerivedRecord) -> f64| rows.iter().map(f).collect::<Vec<_>>();
    FeatureTable::new(rows.len())
        .with_column(Var::Dst, col(|r| r.dst))
        .with_column(Var::Ey, col(|r| r.ey))
        .with_column(Var::Pdyn, col(|r| r.pdyn))
        .with_column(Var::PB, col(|r| r.pb))
}
