//! TOML run configuration. Unknown keys are rejected; every key is optional.
//!
//! ```toml
//! [spans]
//! fit_start = "1995-01-01T00:00:00Z"
//! fit_end = "2021-04-01T00:00:00Z"
//!
//! [search]
//! n_runs = 100
//! seed = 7
//!
//! [[events]]
//! name = "my-storm"
//! start = "2017-09-07T12:00:00Z"
//! ```

use crate::ingest::parse_timestamp;
use dstsr_core::evaluate::StormEvent;
use dstsr_core::expr::VarSet;
use dstsr_core::search::{HyperparameterRanges, SearchConfig};
use dstsr_core::{StormClass, TimeRange, Timestamp, Var};
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("{key}: cannot parse timestamp \"{value}\"")]
    Timestamp { key: String, value: String },
    #[error("{key}: start must precede end")]
    EmptyRange { key: String },
    #[error("{key}: {message}")]
    Invalid { key: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataSection {
    /// Raw OMNI-style CSV.
    pub input: Option<PathBuf>,
    /// Derived CSV written by `ingest`.
    pub derived: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpanSection {
    pub fit_start: String,
    pub fit_end: String,
    pub holdout_start: String,
    pub holdout_end: String,
}

impl Default for SpanSection {
    fn default() -> Self {
        SpanSection {
            fit_start: "1995-01-01T00:00:00Z".into(),
            fit_end: "2021-04-01T00:00:00Z".into(),
            holdout_start: "2021-05-01T00:00:00Z".into(),
            holdout_end: "2021-10-01T00:00:00Z".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchSection {
    pub n_runs: usize,
    pub iterations: usize,
    pub max_complexity: u32,
    pub seed: u64,
    pub population_count: usize,
    pub tournament_size: usize,
    pub crossover_probability: f64,
    pub constant_rounds: usize,
    pub constant_probability: f64,
    pub parsimony_min: f64,
    pub parsimony_max: f64,
    pub population_min: usize,
    pub population_max: usize,
    /// Variable names available to the search.
    pub features: Vec<String>,
    pub parallel: bool,
}

impl Default for SearchSection {
    fn default() -> Self {
        let base = SearchConfig::default();
        let ranges = HyperparameterRanges::default();
        SearchSection {
            n_runs: 100,
            iterations: base.iterations,
            max_complexity: base.max_complexity,
            seed: 0,
            population_count: base.population_count,
            tournament_size: base.tournament_size,
            crossover_probability: base.crossover_probability,
            constant_rounds: base.constant_rounds,
            constant_probability: base.constant_probability,
            parsimony_min: ranges.parsimony.0,
            parsimony_max: ranges.parsimony.1,
            population_min: ranges.population_size.0,
            population_max: ranges.population_size.1,
            features: Var::ALL.iter().map(|v| v.name().to_string()).collect(),
            parallel: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BenchmarkSection {
    pub horizon: usize,
    pub count: usize,
    pub seed: u64,
}

impl Default for BenchmarkSection {
    fn default() -> Self {
        BenchmarkSection {
            horizon: 48,
            count: 2000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventSection {
    pub name: String,
    pub start: String,
    /// One of none, moderate, intense, extreme.
    pub reference: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub data: DataSection,
    pub spans: SpanSection,
    pub search: SearchSection,
    pub benchmark: BenchmarkSection,
    pub events: Vec<EventSection>,
}

fn timestamp(key: &str, value: &str) -> Result<Timestamp, ConfigError> {
    parse_timestamp(value).ok_or_else(|| ConfigError::Timestamp {
        key: key.into(),
        value: value.into(),
    })
}

fn range(key: &str, start: &str, end: &str) -> Result<TimeRange, ConfigError> {
    let s = timestamp(&format!("{key}_start"), start)?;
    let e = timestamp(&format!("{key}_end"), end)?;
    TimeRange::new(s, e).ok_or_else(|| ConfigError::EmptyRange { key: key.into() })
}

pub fn parse_class(s: &str) -> Option<StormClass> {
    match s.to_ascii_lowercase().as_str() {
        "none" => Some(StormClass::None),
        "moderate" => Some(StormClass::Moderate),
        "intense" => Some(StormClass::Intense),
        "extreme" => Some(StormClass::Extreme),
        _ => None,
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Config = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        self.fit_span()?;
        self.holdout_span()?;
        self.features()?;
        self.events()?;
        let s = &self.search;
        if !(0.0 <= s.parsimony_min && s.parsimony_min <= s.parsimony_max) {
            return Err(ConfigError::Invalid {
                key: "search.parsimony_min".into(),
                message: "need 0 <= parsimony_min <= parsimony_max".into(),
            });
        }
        if !(2 <= s.population_min && s.population_min <= s.population_max) {
            return Err(ConfigError::Invalid {
                key: "search.population_min".into(),
                message: "need 2 <= population_min <= population_max".into(),
            });
        }
        Ok(())
    }

    pub fn fit_span(&self) -> Result<TimeRange, ConfigError> {
        range("spans.fit", &self.spans.fit_start, &self.spans.fit_end)
    }

    pub fn holdout_span(&self) -> Result<TimeRange, ConfigError> {
        range("spans.holdout", &self.spans.holdout_start, &self.spans.holdout_end)
    }

    pub fn features(&self) -> Result<VarSet, ConfigError> {
        self.search.features.iter().try_fold(VarSet::EMPTY, |set, name| {
            Var::from_name(name)
                .map(|v| set.with(v))
                .ok_or_else(|| ConfigError::Invalid {
                    key: "search.features".into(),
                    message: format!("unknown variable \"{name}\""),
                })
        })
    }

    /// Search settings with `seed` in place of the configured one.
    pub fn search_config(&self) -> Result<SearchConfig, ConfigError> {
        let s = &self.search;
        let cfg = SearchConfig {
            population_count: s.population_count,
            iterations: s.iterations,
            max_complexity: s.max_complexity,
            features: self.features()?,
            tournament_size: s.tournament_size,
            crossover_probability: s.crossover_probability,
            constant_rounds: s.constant_rounds,
            constant_probability: s.constant_probability,
            seed: s.seed,
            parallel: s.parallel,
            ..SearchConfig::default()
        };
        cfg.validate().map_err(|e| ConfigError::Invalid {
            key: "search".into(),
            message: e.to_string(),
        })?;
        Ok(cfg)
    }

    pub fn ranges(&self) -> HyperparameterRanges {
        HyperparameterRanges {
            parsimony: (self.search.parsimony_min, self.search.parsimony_max),
            population_size: (self.search.population_min, self.search.population_max),
        }
    }

    /// Events defined in the file.
    pub fn events(&self) -> Result<Vec<StormEvent>, ConfigError> {
        self.events
            .iter()
            .map(|e| {
                let key = format!("events.{}", e.name);
                let start = timestamp(&key, &e.start)?;
                let reference = match &e.reference {
                    None => None,
                    Some(r) => Some(parse_class(r).ok_or_else(|| ConfigError::Invalid {
                        key: key.clone(),
                        message: format!("unknown storm class \"{r}\""),
                    })?),
                };
                Ok(StormEvent::new(e.name.clone(), start, reference))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = Config::from_toml("").unwrap();
        assert_eq!(c.search.n_runs, 100);
        assert_eq!(c.search.max_complexity, 30);
        assert_eq!(c.benchmark.horizon, 48);
        assert_eq!(c.benchmark.count, 2000);
        assert_eq!(c.ranges(), HyperparameterRanges::default());
        let fit = c.fit_span().unwrap();
        assert_eq!(fit.start, Timestamp::from_ymdh(1995, 1, 1, 0).unwrap());
        assert_eq!(fit.end, Timestamp::from_ymdh(2021, 4, 1, 0).unwrap());
        let h = c.holdout_span().unwrap();
        assert_eq!(h.hours(), 153 * 24);
        assert_eq!(c.features().unwrap(), VarSet::ALL);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(Config::from_toml("[search]\nn_run = 3\n").is_err());
        assert!(Config::from_toml("colour = 1\n").is_err());
        assert!(Config::from_toml("[[events]]\nname = \"x\"\nstart = \"2017-09-07T00:00:00Z\"\nend = \"x\"\n").is_err());
    }

    #[test]
    fn bad_values_rejected() {
        assert!(Config::from_toml("[spans]\nfit_start = \"2022-01-01T00:00:00Z\"\n").is_err());
        assert!(Config::from_toml("[search]\nfeatures = [\"Bx\"]\n").is_err());
        assert!(Config::from_toml("[search]\nparsimony_min = 1.0\nparsimony_max = 0.5\n").is_err());
        assert!(Config::from_toml("[[events]]\nname = \"x\"\nstart = \"soon\"\n").is_err());
    }

    #[test]
    fn events_parse() {
        let c = Config::from_toml(
            "[[events]]\nname = \"sep-2017\"\nstart = \"2017-09-07T12:00:00Z\"\nreference = \"Intense\"\n",
        )
        .unwrap();
        let e = c.events().unwrap();
        assert_eq!(e[0].window.hours(), 72);
        assert_eq!(e[0].reference, Some(StormClass::Intense));
    }
}
