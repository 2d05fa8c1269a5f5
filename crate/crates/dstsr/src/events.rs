//! Built-in storm case studies and event lookup.

use crate::ingest::parse_timestamp;
use dstsr_core::evaluate::{StormEvent, STORM_HOURS};
use dstsr_core::{StormClass, TimeRange, Timestamp};

/// `(name, start, reference class)` of the built-in 72 h events.
pub const BUILTIN_EVENTS: [(&str, (i32, u32, u32), StormClass); 3] = [
    ("halloween-2003", (2003, 10, 29), StormClass::Extreme),
    ("stpatricks-2015", (2015, 3, 17), StormClass::Intense),
    ("moderate-2017", (2017, 9, 27), StormClass::Moderate),
];

pub fn builtin_events() -> Vec<StormEvent> {
    BUILTIN_EVENTS
        .iter()
        .map(|&(name, (y, m, d), class)| {
            let start = Timestamp::from_ymdh(y, m, d, 0).expect("valid built-in date");
            StormEvent::new(name, start, Some(class))
        })
        .collect()
}

#[derive(Debug, thiserror::Error)]
pub enum EventError {
    #[error("unknown event \"{name}\"; known events: {known}")]
    Unknown { name: String, known: String },
    #[error("event range {0} must span {STORM_HOURS} hours")]
    WrongLength(String),
}

/// Resolves `spec` as a configured event name, a built-in event name, a
/// start timestamp, or `START/END` covering exactly 72 hours.
pub fn resolve(spec: &str, configured: &[StormEvent]) -> Result<StormEvent, EventError> {
    if let Some(e) = configured
        .iter()
        .chain(builtin_events().iter())
        .find(|e| e.name.eq_ignore_ascii_case(spec))
    {
        return Ok(e.clone());
    }
    if let Some((a, b)) = spec.split_once('/') {
        if let (Some(s), Some(e)) = (parse_timestamp(a), parse_timestamp(b)) {
            let range = TimeRange::new(s, e).filter(|r| r.hours() == STORM_HOURS as i64);
            return match range {
                Some(_) => Ok(StormEvent::new(custom_name(s), s, None)),
                None => Err(EventError::WrongLength(spec.into())),
            };
        }
    } else if let Some(s) = parse_timestamp(spec) {
        return Ok(StormEvent::new(custom_name(s), s, None));
    }
    let known = configured
        .iter()
        .map(|e| e.name.clone())
        .chain(BUILTIN_EVENTS.iter().map(|e| e.0.to_string()))
        .collect::<Vec<_>>()
        .join(", ");
    Err(EventError::Unknown {
        name: spec.into(),
        known,
    })
}

fn custom_name(start: Timestamp) -> String {
    let (y, m, d, h) = start.to_ymdh();
    format!("custom-{y:04}{m:02}{d:02}T{h:02}")
}

/// Whether the event window overlaps `fit`, i.e. the models may have been
/// trained on it.
pub fn in_sample(event: &StormEvent, fit: &TimeRange) -> bool {
    event.window.overlaps(fit)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_resolve() {
        let e = resolve("Halloween-2003", &[]).unwrap();
        assert_eq!(e.window.start, Timestamp::from_ymdh(2003, 10, 29, 0).unwrap());
        assert_eq!(e.window.hours(), 72);
        assert_eq!(builtin_events().len(), 3);
    }

    #[test]
    fn ranges_resolve() {
        let e = resolve("2017-09-07T12:00:00Z/2017-09-10T12:00:00Z", &[]).unwrap();
        assert_eq!(e.name, "custom-20170907T12");
        assert!(matches!(
            resolve("2017-09-07T12:00:00Z/2017-09-08T12:00:00Z", &[]),
            Err(EventError::WrongLength(_))
        ));
        assert_eq!(resolve("2017-09-07T12:00:00Z", &[]).unwrap().window.hours(), 72);
    }

    #[test]
    fn unknown_lists_known() {
        let msg = resolve("carrington-1859", &[]).unwrap_err().to_string();
        assert!(msg.contains("halloween-2003") && msg.contains("moderate-2017"));
    }

    #[test]
    fn in_sample_label() {
        let fit = TimeRange::new(
            Timestamp::from_ymdh(1995, 1, 1, 0).unwrap(),
            Timestamp::from_ymdh(2021, 4, 1, 0).unwrap(),
        )
        .unwrap();
        assert!(in_sample(&resolve("stpatricks-2015", &[]).unwrap(), &fit));
        assert!(!in_sample(&resolve("2021-06-01T00:00:00Z", &[]).unwrap(), &fit));
    }
}
