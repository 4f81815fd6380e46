//! File formats, reports and the `motex` command line on top of `motex-core`.
//!
//! Measures are CSV files of `x,weight` lines; costs and study configs are
//! JSON. Text outputs print numbers as plain decimals with 17 significant
//! digits so they read back bit for bit.

pub mod cli;
pub mod format;
pub mod io;
