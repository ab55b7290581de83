//! Command-line front end for `ionwire-core`: configuration files, unit
//! parsing, reports, simulation traces and parameter sweeps.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;
pub mod table;
pub mod units;

pub use ionwire_core as core;
