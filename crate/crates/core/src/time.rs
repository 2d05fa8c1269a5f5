//! Hourly UTC timestamps.

use core::fmt;

/// Whole hours since 1970-01-01T00:00Z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp(pub i64);

impl Timestamp {
    /// Builds a timestamp from a proleptic Gregorian date and hour of day.
    ///
    /// Returns `None` for out-of-range month, day or hour.
    pub fn from_ymdh(year: i32, month: u32, day: u32, hour: u32) -> Option<Self> {
        if !(1..=12).contains(&month) || day == 0 || day > days_in_month(year, month) || hour > 23 {
            return None;
        }
        Some(Timestamp(days_from_civil(year, month, day) * 24 + hour as i64))
    }

    /// Builds a timestamp from a year, 1-based day of year and hour (the
    /// OMNI `YYYY DOY HR` triple).
    pub fn from_year_doy_hour(year: i32, doy: u32, hour: u32) -> Option<Self> {
        let len = if is_leap(year) { 366 } else { 365 };
        if doy == 0 || doy > len || hour > 23 {
            return None;
        }
        Some(Timestamp(
            (days_from_civil(year, 1, 1) + doy as i64 - 1) * 24 + hour as i64,
        ))
    }

    /// `(year, month, day, hour)`.
    pub fn to_ymdh(self) -> (i32, u32, u32, u32) {
        let days = self.0.div_euclid(24);
        let hour = self.0.rem_euclid(24) as u32;
        let (y, m, d) = civil_from_days(days);
        (y, m, d, hour)
    }

    pub fn hours(self) -> i64 {
        self.0
    }

    pub fn offset(self, hours: i64) -> Self {
        Timestamp(self.0 + hours)
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (y, m, d, h) = self.to_ymdh();
        write!(f, "{y:04}-{m:02}-{d:02}T{h:02}:00:00Z")
    }
}

/// Half-open interval `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeRange {
    pub start: Timestamp,
    pub end: Timestamp,
}

impl TimeRange {
    /// Returns `None` unless `start < end`.
    pub fn new(start: Timestamp, end: Timestamp) -> Option<Self> {
        (start < end).then_some(TimeRange { start, end })
    }

    pub fn contains(&self, t: Timestamp) -> bool {
        self.start <= t && t < self.end
    }

    pub fn hours(&self) -> i64 {
        self.end.0 - self.start.0
    }

    pub fn overlaps(&self, other: &TimeRange) -> bool {
        self.start < other.end && other.start < self.end
    }
}

impl fmt::Display for TimeRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.start, self.end)
    }
}

fn is_leap(y: i32) -> bool {
    (y % 4 == 0 && y % 100 != 0) || y % 400 == 0
}

fn days_in_month(y: i32, m: u32) -> u32 {
    match m {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 if is_leap(y) => 29,
        _ => 28,
    }
}

// Howard Hinnant's days_from_civil / civil_from_days.
fn days_from_civil(y: i32, m: u32, d: u32) -> i64 {
    let y = if m <= 2 { y as i64 - 1 } else { y as i64 };
    let era = y.div_euclid(400);
    let yoe = y - era * 400;
    let m = m as i64;
    let doy = (153 * (if m > 2 { m - 3 } else { m + 9 }) + 2) / 5 + d as i64 - 1;
    let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    era * 146_097 + doe - 719_468
}

fn civil_from_days(z: i64) -> (i32, u32, u32) {
    let z = z + 719_468;
    let era = z.div_euclid(146_097);
    let doe = z - era * 146_097;
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let y = yoe + era * 400;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = (doy - (153 * mp + 2) / 5 + 1) as u32;
    let m = if mp < 10 { mp + 3 } else { mp - 9 } as u32;
    ((if m <= 2 { y + 1 } else { y }) as i32, m, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn epoch_and_known_dates() {
        assert_eq!(Timestamp::from_ymdh(1970, 1, 1, 0), Some(Timestamp(0)));
        let t = Timestamp::from_ymdh(2015, 3, 17, 5).unwrap();
        assert_eq!(t.to_ymdh(), (2015, 3, 17, 5));
        assert_eq!(t.to_string(), "2015-03-17T05:00:00Z");
        // 2015-03-17 is day 76
        assert_eq!(Timestamp::from_year_doy_hour(2015, 76, 5), Some(t));
        assert_eq!(
            Timestamp::from_year_doy_hour(2004, 366, 23),
            Timestamp::from_ymdh(2004, 12, 31, 23)
        );
    }

    #[test]
    fn rejects_invalid_fields() {
        assert!(Timestamp::from_ymdh(2021, 2, 29, 0).is_none());
        assert!(Timestamp::from_ymdh(2020, 2, 29, 0).is_some());
        assert!(Timestamp::from_ymdh(2021, 1, 1, 24).is_none());
        assert!(Timestamp::from_year_doy_hour(2021, 366, 0).is_none());
    }

    #[test]
    fn round_trips_across_centuries() {
        for h in (-2_000_000i64..4_000_000).step_by(9973) {
            let (y, m, d, hr) = Timestamp(h).to_ymdh();
            assert_eq!(Timestamp::from_ymdh(y, m, d, hr), Some(Timestamp(h)));
        }
    }

    #[test]
    fn range_is_half_open() {
        let r = TimeRange::new(Timestamp(10), Timestamp(20)).unwrap();
        assert!(r.contains(Timestamp(10)));
        assert!(!r.contains(Timestamp(20)));
        assert!(TimeRange::new(Timestamp(5), Timestamp(5)).is_none());
    }
}
