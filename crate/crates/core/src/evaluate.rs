//! Forecast error metrics, the random-window benchmark and storm case studies.

use crate::dataset::DerivedRecord;
use crate::forecast::{self, ForecastError, ForecastResult, WindowSample};
use crate::models::{classify_storm, ModelSpec, StormClass};
use crate::time::{TimeRange, Timestamp};
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

/// Length of a storm case-study window, hours.
pub const STORM_HOURS: usize = 72;
/// Default lead-in before the Dst minimum when a storm window is located
/// automatically.
pub const STORM_LEAD_HOURS: i64 = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    /// nT.
    pub rmse: f64,
    /// nT.
    pub mae: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("length mismatch: {predicted} predicted vs {actual} actual")]
    LengthMismatch { predicted: usize, actual: usize },
    #[error("no points to score")]
    Empty,
}

/// RMSE and MAE of `predicted` against `actual`.
pub fn metrics(predicted: &[f64], actual: &[f64]) -> Result<Metrics, MetricsError> {
    if predicted.len() != actual.len() {
        return Err(MetricsError::LengthMismatch {
            predicted: predicted.len(),
            actual: actual.len(),
        });
    }
    if predicted.is_empty() {
        return Err(MetricsError::Empty);
    }
    let n = predicted.len() as f64;
    let (sq, abs) = predicted
        .iter()
        .zip(actual)
        .fold((0.0, 0.0), |(sq, abs), (p, a)| {
            let e = p - a;
            (sq + e * e, abs + e.abs())
        });
    Ok(Metrics {
        rmse: libm::sqrt(sq / n),
        mae: abs / n,
    })
}

/// Scores a forecast over steps `1..=horizon`, skipping the initial value.
/// `None` when the trajectory is invalid or has no measured counterpart.
pub fn score(result: &ForecastResult) -> Option<Metrics> {
    let actual = result.actual.as_ref()?;
    if !result.is_valid() || result.horizon == 0 {
        return None;
    }
    metrics(&result.predicted[1..], &actual[1..]).ok()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    Rmse,
    Mae,
}

/// Per-model aggregate over the benchmark windows.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelScore {
    pub model: String,
    pub mean_rmse: f64,
    pub std_rmse: f64,
    pub mean_mae: f64,
    pub std_mae: f64,
    /// Windows that produced a valid trajectory.
    pub n_windows: usize,
    /// Windows dropped because the trajectory went non-finite.
    pub n_excluded: usize,
}

impl ModelScore {
    fn mean(&self, metric: MetricKind) -> f64 {
        match metric {
            MetricKind::Rmse => self.mean_rmse,
            MetricKind::Mae => self.mean_mae,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkReport {
    pub horizon: usize,
    pub seed: u64,
    /// The shared window set.
    pub windows: WindowSample,
    /// One row per model, input order.
    pub rows: Vec<ModelScore>,
    /// Model names by ascending mean RMSE.
    pub ranking_rmse: Vec<String>,
    /// Model names by ascending mean MAE.
    pub ranking_mae: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BenchmarkError {
    #[error(transparent)]
    Forecast(#[from] ForecastError),
    #[error("no valid windows of {horizon} hours")]
    NoWindows { horizon: usize },
}

/// Population mean and standard deviation.
fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, libm::sqrt(var))
}

fn score_windows(model: &ModelSpec, series: &[DerivedRecord], starts: &[usize], horizon: usize) -> Vec<Option<Metrics>> {
    let one = |&s: &usize| {
        forecast::forecast_at(model, series, s, horizon)
            .ok()
            .as_ref()
            .and_then(score)
    };
    #[cfg(feature = "std")]
    {
        use rayon::prelude::*;
        starts.par_iter().map(one).collect()
    }
    #[cfg(not(feature = "std"))]
    {
        starts.iter().map(one).collect()
    }
}

/// Runs every model over one shared set of random windows and aggregates
/// RMSE/MAE to mean and standard deviation.
pub fn benchmark(
    models: &[ModelSpec],
    series: &[DerivedRecord],
    horizon: usize,
    count: usize,
    seed: u64,
) -> Result<BenchmarkReport, BenchmarkError> {
    let windows = forecast::valid_windows(series, horizon, count, seed)?;
    if windows.starts.is_empty() {
        return Err(BenchmarkError::NoWindows { horizon });
    }
    let rows: Vec<ModelScore> = models
        .iter()
        .map(|m| {
            let scored = score_windows(m, series, &windows.starts, horizon);
            let ok: Vec<Metrics> = scored.iter().flatten().copied().collect();
            let rmse: Vec<f64> = ok.iter().map(|x| x.rmse).collect();
            let mae: Vec<f64> = ok.iter().map(|x| x.mae).collect();
            let (mean_rmse, std_rmse) = mean_std(&rmse);
            let (mean_mae, std_mae) = mean_std(&mae);
            ModelScore {
                model: m.name.clone(),
                mean_rmse,
                std_rmse,
                mean_mae,
                std_mae,
                n_windows: ok.len(),
                n_excluded: scored.len() - ok.len(),
            }
        })
        .collect();
    let mut report = BenchmarkReport {
        horizon,
        seed,
        windows,
        rows,
        ranking_rmse: Vec::new(),
        ranking_mae: Vec::new(),
    };
    report.ranking_rmse = rank(&report, MetricKind::Rmse, usize::MAX);
    report.ranking_mae = rank(&report, MetricKind::Mae, usize::MAX);
    Ok(report)
}

fn nan_last(a: f64, b: f64) -> Ordering {
    match (a.is_nan(), b.is_nan()) {
        (true, true) => Ordering::Equal,
        (true, false) => Ordering::Greater,
        (false, true) => Ordering::Less,
        (false, false) => a.total_cmp(&b),
    }
}

/// Top `k` model names by ascending mean of `metric`; ties broken by the
/// other metric, then by name. Models without valid windows sort last.
pub fn rank(report: &BenchmarkReport, metric: MetricKind, k: usize) -> Vec<String> {
    let other = match metric {
        MetricKind::Rmse => MetricKind::Mae,
        MetricKind::Mae => MetricKind::Rmse,
    };
    let mut rows: Vec<&ModelScore> = report.rows.iter().collect();
    rows.sort_by(|a, b| {
        nan_last(a.mean(metric), b.mean(metric))
            .then_with(|| nan_last(a.mean(other), b.mean(other)))
            .then_with(|| a.model.cmp(&b.model))
    });
    rows.into_iter().take(k).map(|r| r.model.clone()).collect()
}

/// A storm case study.
#[derive(Debug, Clone, PartialEq)]
pub struct StormEvent {
    pub name: String,
    /// Must span exactly [`STORM_HOURS`].
    pub window: TimeRange,
    /// Class the event is known by, if any.
    pub reference: Option<StormClass>,
}

impl StormEvent {
    pub fn new(name: impl Into<String>, start: Timestamp, reference: Option<StormClass>) -> Self {
        StormEvent {
            name: name.into(),
            window: TimeRange {
                start,
                end: start.offset(STORM_HOURS as i64),
            },
            reference,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StormReport {
    pub event: StormEvent,
    /// Class from the minimum measured Dst over the window.
    pub class: StormClass,
    pub min_dst: f64,
    /// Measured Dst at `start + k`, `k = 0..=72`.
    pub actual: Vec<f64>,
    /// One entry per model, input order. Metrics cover steps 1..=72.
    pub results: Vec<(ForecastResult, Option<Metrics>)>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StormError {
    #[error("storm window must be {STORM_HOURS} h, got {0} h")]
    WrongLength(i64),
    #[error("series does not cover {0}")]
    NotCovered(TimeRange),
    #[error(transparent)]
    Forecast(#[from] ForecastError),
}

/// Integrates each model over the event window from the measured Dst at its
/// start and scores it against the measured trajectory.
pub fn storm_eval(
    models: &[ModelSpec],
    event: &StormEvent,
    series: &[DerivedRecord],
) -> Result<StormReport, StormError> {
    let hours = event.window.hours();
    if hours != STORM_HOURS as i64 {
        return Err(StormError::WrongLength(hours));
    }
    let start = series
        .binary_search_by(|r| r.time.cmp(&event.window.start))
        .map_err(|_| StormError::NotCovered(event.window))?;
    if !forecast::window_is_valid(series, start, STORM_HOURS) {
        return Err(StormError::NotCovered(event.window));
    }
    let actual: Vec<f64> = series[start..=start + STORM_HOURS]
        .iter()
        .map(|r| r.dst)
        .collect();
    let min_dst = actual.iter().copied().fold(f64::INFINITY, f64::min);
    let results = models
        .iter()
        .map(|m| {
            let f = forecast::forecast_at(m, series, start, STORM_HOURS)?;
            let s = score(&f);
            Ok((f, s))
        })
        .collect::<Result<Vec<_>, ForecastError>>()?;
    Ok(StormReport {
        event: event.clone(),
        class: classify_storm(min_dst),
        min_dst,
        actual,
        results,
    })
}

/// A 72 h window starting `lead` hours before the Dst minimum found in
/// `search`. `None` when `search` holds no finite Dst.
pub fn locate_storm_window(series: &[DerivedRecord], search: TimeRange, lead: i64) -> Option<TimeRange> {
    let rows = crate::dataset::slice(series, search);
    let min = rows
        .iter()
        .filter(|r| r.dst.is_finite())
        .min_by(|a, b| a.dst.total_cmp(&b.dst))?;
    let start = min.time.offset(-lead);
    Some(TimeRange {
        start,
        end: start.offset(STORM_HOURS as i64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::catalog;
    use alloc::vec;
    use approx::assert_relative_eq;

    #[test]
    fn metric_examples() {
        let m = metrics(&[0.0, 0.0], &[3.0, 4.0]).unwrap();
        assert_relative_eq!(m.mae, 3.5);
        assert_relative_eq!(m.rmse, libm::sqrt(12.5));
        assert_eq!(metrics(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), Metrics { rmse: 0.0, mae: 0.0 });
        let m = metrics(&[5.0], &[3.0]).unwrap();
        assert_eq!((m.rmse, m.mae), (2.0, 2.0));
        assert!(metrics(&[1.0], &[1.0, 2.0]).is_err());
        assert_eq!(metrics(&[], &[]), Err(MetricsError::Empty));
    }

    fn constant_series(n: usize) -> Vec<DerivedRecord> {
        (0..n)
            .map(|i| DerivedRecord {
                time: Timestamp(i as i64),
                ey: 0.0,
                pdyn: 1.0,
                pb: 0.1,
                dst: -30.0,
                dst_prev: -30.0,
                ddst_dt: 0.0,
            })
            .collect()
    }

    #[test]
    fn zero_rate_model_is_exact_on_constant_dst() {
        let zero = ModelSpec::from_text("zero", "0", None).unwrap();
        let r = benchmark(&[zero.clone(), zero], &constant_series(300), 48, 50, 1).unwrap();
        assert_eq!(r.rows.len(), 2);
        assert_eq!(r.rows[0].mean_rmse, 0.0);
        assert_eq!(r.rows[0].mean_mae, 0.0);
        assert_eq!(r.rows[0].n_windows, 50);
        assert_eq!(r.rows[0].std_mae, 0.0);
        assert_eq!(r.rows[0], ModelScore { model: "zero".into(), ..r.rows[1].clone() });
    }

    #[test]
    fn catalog_benchmark_ranking() {
        let mut series = constant_series(400);
        for (i, r) in series.iter_mut().enumerate() {
            r.ey = libm::sin(i as f64 / 10.0) * 3.0;
            r.dst = -40.0 + 20.0 * libm::cos(i as f64 / 17.0);
        }
        let models = catalog();
        let r = benchmark(&models, &series, 48, 100, 7).unwrap();
        assert_eq!(r.rows.len(), 14);
        let means: Vec<f64> = r
            .ranking_mae
            .iter()
            .map(|n| r.rows.iter().find(|x| &x.model == n).unwrap().mean_mae)
            .collect();
        assert!(means.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(rank(&r, MetricKind::Rmse, 5).len(), 5);
        assert_eq!(rank(&r, MetricKind::Rmse, 99).len(), 14);
        assert_eq!(r, benchmark(&models, &series, 48, 100, 7).unwrap());
    }

    #[test]
    fn ranking_ties_are_deterministic() {
        let row = |name: &str, rmse: f64, mae: f64| ModelScore {
            model: name.into(),
            mean_rmse: rmse,
            std_rmse: 0.0,
            mean_mae: mae,
            std_mae: 0.0,
            n_windows: 1,
            n_excluded: 0,
        };
        let report = BenchmarkReport {
            horizon: 1,
            seed: 0,
            windows: WindowSample { starts: vec![0], requested: 1, available: 1 },
            rows: vec![
                row("b", 1.0, 1.0),
                row("a", 1.0, 1.0),
                row("c", 1.0, 0.5),
                row("nan", f64::NAN, f64::NAN),
                row("best", 0.1, 2.0),
            ],
            ranking_rmse: vec![],
            ranking_mae: vec![],
        };
        assert_eq!(rank(&report, MetricKind::Rmse, 10), ["best", "c", "a", "b", "nan"]);
        assert_eq!(rank(&report, MetricKind::Mae, 1), ["c"]);
    }

    #[test]
    fn storm_window_rules() {
        let series = constant_series(200);
        let models = catalog();
        let ev = StormEvent::new("flat", Timestamp(10), None);
        let rep = storm_eval(&models, &ev, &series).unwrap();
        assert_eq!(rep.actual.len(), 73);
        assert_eq!(rep.class, StormClass::None);
        assert!(rep.results.iter().all(|(f, _)| f.actual.as_deref() == Some(&rep.actual[..])));

        let short = StormEvent {
            window: TimeRange::new(Timestamp(10), Timestamp(10)).unwrap_or(TimeRange {
                start: Timestamp(10),
                end: Timestamp(10),
            }),
            ..ev.clone()
        };
        assert_eq!(storm_eval(&models, &short, &series), Err(StormError::WrongLength(0)));
        let late = StormEvent::new("late", Timestamp(150), None);
        assert!(matches!(storm_eval(&models, &late, &series), Err(StormError::NotCovered(_))));
    }

    #[test]
    fn locate_window_before_minimum() {
        let mut series = constant_series(200);
        series[100].dst = -300.0;
        let w = locate_storm_window(&series, TimeRange::new(Timestamp(0), Timestamp(200)).unwrap(), 12).unwrap();
        assert_eq!(w.start, Timestamp(88));
        assert_eq!(w.hours(), 72);
    }
}
