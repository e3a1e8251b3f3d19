//! Numeric core for unsupervised knowledge adaptation demand forecasting.
//!
//! A recurrent forecaster is pre-trained on a *source* transport mode, its
//! recurrent cell is exported as a [`artifact::PretrainedArtifact`], and a
//! *target* mode adapts it without ever seeing the source data: the target
//! network splits its input into an individual and a sharing branch and pulls
//! the sharing branch's memory cells toward those the frozen pretrained cell
//! produces on the same encoded input.
//!
//! The crate is `no_std` and needs only `alloc`. File IO, CSV parsing, timing
//! and the command line live in the `ukadf` companion crate.
//!
//! Module map:
//!
//! * [`nn`] - matrices, parameters, dense and LSTM layers with hand-written
//!   backward passes, losses, Adam and finite-difference gradient checking.
//! * [`data`] - demand matrices, station filtering, chronological splits,
//!   min-max scaling, sliding windows, Pearson analysis and a synthetic
//!   multimodal generator.
//! * [`models`] - the pre-training network, the model sharing network, the
//!   ablation variants and the HA / LR baselines.
//! * [`metrics`] - the evaluation suite with zero-masking rules.
//! * [`artifact`] - canonical, checksummed serialization of the shared cell.
//! * [`train`] - run configuration, training loops, variant runs and sweeps.
//! * [`verify`] - gradient checks of every backward pass on tiny networks.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod artifact;
pub mod data;
pub mod error;
pub mod math;
pub mod metrics;
pub mod models;
pub mod nn;
pub mod rng;
pub mod train;
pub mod verify;

pub use error::{Error, Result};
