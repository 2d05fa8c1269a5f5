//! Explicit Euler integration of rate models over measured drivers.

use crate::dataset::DerivedRecord;
use crate::models::ModelSpec;
use crate::rng;
use crate::time::Timestamp;
use alloc::string::String;
use alloc::vec::Vec;

/// Integration step, hours.
pub const STEP_HOURS: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum ForecastError {
    #[error("drivers cover {got} hours, need {needed}")]
    InsufficientDrivers { needed: usize, got: usize },
    #[error("driver row {step} is not hourly-contiguous")]
    NotContiguous { step: usize },
    #[error("non-finite driver at step {step}")]
    NonFiniteDriver { step: usize },
    #[error("initial Dst {0} is not finite")]
    NonFiniteInitial(f64),
    #[error("series of {len} rows is too short for horizon {horizon}")]
    SeriesTooShort { len: usize, horizon: usize },
}

/// Predicted Dst trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastResult {
    pub model: String,
    pub start: Timestamp,
    pub horizon: usize,
    /// `predicted[k]` is Dst at `start + k` hours; `predicted[0]` is the
    /// initial value. Length `horizon + 1` unless the run went invalid.
    pub predicted: Vec<f64>,
    /// Measured Dst aligned with `predicted`, when the drivers reach
    /// `start + horizon`.
    pub actual: Option<Vec<f64>>,
    /// Step whose rate was non-finite; `predicted` stops at that step.
    pub invalid_at: Option<usize>,
}

impl ForecastResult {
    pub fn is_valid(&self) -> bool {
        self.invalid_at.is_none()
    }

    pub fn timestamps(&self) -> impl Iterator<Item = Timestamp> + '_ {
        (0..self.predicted.len()).map(|k| self.start.offset(k as i64))
    }
}

/// Integrates `Dst[k+1] = Dst[k] + rate(Dst[k], drivers[k])` for `horizon`
/// hourly steps, starting at `drivers[0].time`.
///
/// Drivers are the measured values at each step. A non-finite rate stops the
/// integration and sets [`ForecastResult::invalid_at`].
pub fn integrate(
    spec: &ModelSpec,
    dst0: f64,
    drivers: &[DerivedRecord],
    horizon: usize,
) -> Result<ForecastResult, ForecastError> {
    if !dst0.is_finite() {
        return Err(ForecastError::NonFiniteInitial(dst0));
    }
    let needed = horizon.max(1);
    if drivers.len() < needed {
        return Err(ForecastError::InsufficientDrivers {
            needed,
            got: drivers.len(),
        });
    }
    let start = drivers[0].time;
    let span = (horizon + 1).min(drivers.len());
    for (k, row) in drivers[..span].iter().enumerate() {
        if row.time != start.offset(k as i64) {
            return Err(ForecastError::NotContiguous { step: k });
        }
    }
    for (k, row) in drivers[..horizon].iter().enumerate() {
        if !(row.ey.is_finite() && row.pdyn.is_finite() && row.pb.is_finite()) {
            return Err(ForecastError::NonFiniteDriver { step: k });
        }
    }

    let mut predicted = Vec::with_capacity(horizon + 1);
    predicted.push(dst0);
    let mut invalid_at = None;
    let mut dst = dst0;
    for (k, row) in drivers[..horizon].iter().enumerate() {
        let next = dst + STEP_HOURS * spec.rate(dst, row.ey, row.pdyn, row.pb);
        if !next.is_finite() {
            invalid_at = Some(k);
            break;
        }
        predicted.push(next);
        dst = next;
    }

    let actual = (drivers.len() > horizon)
        .then(|| drivers[..=horizon].iter().map(|r| r.dst).collect());

    Ok(ForecastResult {
        model: spec.name.clone(),
        start,
        horizon,
        predicted,
        actual,
        invalid_at,
    })
}

/// Integrates from the measured Dst at `series[start]`.
pub fn forecast_at(
    spec: &ModelSpec,
    series: &[DerivedRecord],
    start: usize,
    horizon: usize,
) -> Result<ForecastResult, ForecastError> {
    let drivers = series.get(start..).unwrap_or(&[]);
    let dst0 = drivers.first().map_or(f64::NAN, |r| r.dst);
    integrate(spec, dst0, drivers, horizon)
}

/// Start indices sampled for a benchmark.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowSample {
    /// Sorted ascending, distinct.
    pub starts: Vec<usize>,
    pub requested: usize,
    /// Total number of valid windows in the series.
    pub available: usize,
}

impl WindowSample {
    /// Fewer valid windows existed than were requested.
    pub fn is_short(&self) -> bool {
        self.starts.len() < self.requested
    }
}

/// Whether `series[start..=start + horizon]` is finite and hourly-contiguous.
pub fn window_is_valid(series: &[DerivedRecord], start: usize, horizon: usize) -> bool {
    let Some(rows) = series.get(start..=start + horizon) else {
        return false;
    };
    let t0 = rows[0].time;
    rows.iter()
        .enumerate()
        .all(|(k, r)| r.drivers_finite() && r.time == t0.offset(k as i64))
}

/// Samples `count` distinct valid window starts uniformly without
/// replacement. Returns every valid start when fewer exist.
pub fn valid_windows(
    series: &[DerivedRecord],
    horizon: usize,
    count: usize,
    seed: u64,
) -> Result<WindowSample, ForecastError> {
    if series.len() <= horizon {
        return Err(ForecastError::SeriesTooShort {
            len: series.len(),
            horizon,
        });
    }
    let valid: Vec<usize> = (0..series.len() - horizon)
        .filter(|&s| window_is_valid(series, s, horizon))
        .collect();
    let mut starts: Vec<usize> = if valid.len() <= count {
        valid.clone()
    } else {
        let mut r = rng::stream(seed);
        rand::seq::index::sample(&mut r, valid.len(), count)
            .into_iter()
            .map(|i| valid[i])
            .collect()
    };
    starts.sort_unstable();
    Ok(WindowSample {
        starts,
        requested: count,
        available: valid.len(),
    })
}
