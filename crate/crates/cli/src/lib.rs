//! Command-line front end for `hecke-lab`: selects an R-matrix and a field
//! strategy, runs one verification pipeline and produces a [`report::Report`].

pub mod config;
pub mod report;
pub mod run;

pub use config::{Command, FieldStrategy, RunConfig, Source};
pub use report::{Report, Status};
pub use run::{run, RunError};
