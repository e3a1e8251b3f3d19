//! File formats, timing, parallel sweeps and the `ukadf` command line on top
//! of [`ukadf_core`].
//!
//! * [`csv_io`] - demand CSV files: a header of station ids with an optional
//!   leading `timestamp` column, one row per time step.
//! * [`artifact_io`] - atomic save / load of `.ukadf` artifact files.
//! * [`report`] - run reports, loss traces and prediction files.
//! * [`runner`] - wall-clock timed runs and the parallel sweep.
//! * [`cli`] - the subcommands.

pub mod artifact_io;
pub mod cli;
pub mod csv_io;
mod error;
pub mod report;
pub mod runner;

pub use error::{Error, Result};
pub use ukadf_core as core_lib;
