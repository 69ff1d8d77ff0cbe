//! Configuration files, command dispatch and CSV output for `qotto`.

pub mod config;
pub mod run;
pub mod suite;
pub mod table;

pub use run::{run, Failure, Options, Outcome};
