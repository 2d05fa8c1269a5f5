//! Discovery, evaluation and forecasting of closed-form rate models for the
//! Dst geomagnetic index.
//!
//! The crate is `no_std` with `alloc`. The default `std` feature only adds
//! rayon-backed parallelism to the search and benchmark loops; results are
//! identical with and without it.
//!
//! - [`expr`]: expression trees over `Dst`, `Ey`, `Pdyn`, `PB` with protected
//!   operators, complexity scoring and a text form.
//! - [`dataset`]: gap repair and the derived solar-wind drivers.
//! - [`models`]: the fixed model catalog, the BMR/OBM baselines and storm classes.
//! - [`search`]: evolutionary symbolic regression with parsimony.
//! - [`forecast`]: explicit Euler integration of a rate model.
//! - [`evaluate`]: RMSE/MAE, random-window benchmark and storm case studies.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod dataset;
pub mod evaluate;
pub mod expr;
pub mod forecast;
pub mod models;
pub mod rng;
pub mod search;
pub mod time;

pub use dataset::{DerivedRecord, RawRecord};
pub use evaluate::{BenchmarkReport, Metrics, StormEvent};
pub use expr::{BinaryOp, Expr, UnaryOp, Var};
pub use forecast::ForecastResult;
pub use models::{ModelSpec, StormClass};
pub use search::{Candidate, HallOfFame, SearchConfig};
pub use time::{TimeRange, Timestamp};
