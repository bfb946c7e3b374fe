//! Library side of the `catclust` command: instance files, JSON reports,
//! seeded instance grids and the command implementations.

pub mod commands;
pub mod format;
pub mod grid;
pub mod report;
pub mod solve;

use clap::ValueEnum;
use serde::Serialize;

/// Size-constraint family selected on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Capacitated,
    Balanced,
    Factor,
    Equal,
    Unconstrained,
}
