//! Library surface of the `thermogauge` batch front end: configuration
//! schema, report/CSV emitters, the run pipeline and the verify suites.
//! The binary in `main.rs` is a thin argument-parsing shell over these.

pub mod config;
pub mod pipeline;
pub mod report;
pub mod suites;
