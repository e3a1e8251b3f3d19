//! Minimal deterministic numeric engine.
//!
//! Every layer carries a hand-derived backward pass; [`gradcheck`] verifies
//! them against central finite differences. All arithmetic is `f64`.

mod adam;
mod dense;
pub mod gradcheck;
mod loss;
mod lstm;
mod matrix;
mod param;

pub use adam::{adam_step, Adam, AdamConfig};
pub use dense::{dense_forward, Dense};
pub use gradcheck::{grad_check, grad_check_with, GradCheckReport, LossValue, ParamCheck};
pub use loss::{mse, mse_grad_into, mse_slices};
pub use lstm::{lstm_step, LstmCell, LstmCellParams, LstmState, LstmTrace, GATES};
pub use matrix::Matrix;
pub use param::{uniform_init, Param, Parameterized};
