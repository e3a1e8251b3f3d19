//! Experiment orchestration: preprocessing, mini-batch training with
//! validation checkpointing, evaluation, and loss-weight sweeps.
//!
//! Runs are single-threaded and fully determined by data, configuration
//! and seed.

mod config;
mod fit;
mod pipeline;
mod run;
mod sweep;

pub use config::RunConfig;
pub use fit::{predict_final, train_model, validation_loss, Criterion, EpochRecord, TrainOutcome};
pub use pipeline::{prepare, Prepared};
pub use run::{run_adapt, run_pretrain, run_variant, run_variant_prepared, RunResult, TrainedModel};
pub use sweep::{grid_range, median, sweep, sweep_plan, sweep_point, SweepPoint, SweepResult};
