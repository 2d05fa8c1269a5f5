//! File formats, configuration, charts and the command-line front end for
//! [`dstsr_core`].

pub mod cli;
pub mod config;
pub mod events;
pub mod formats;
pub mod ingest;
pub mod svg;

pub use dstsr_core as core;
