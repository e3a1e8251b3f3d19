//! Finite-difference verification of every hand-written backward pass on
//! small random networks.

pub mod dd;
pub mod reference;

use alloc::vec::Vec;

use rand::Rng as _;

use crate::data::WindowBatch;
use crate::error::Result;
use crate::models::{Dims, PretrainNet, RecurrentNet, SharingNet, WindowModel};
use crate::nn::{grad_check_with, mse_grad_into, Dense, GradCheckReport, LstmCell, LstmCellParams, LstmTrace, Matrix, Parameterized};

use dd::Dd;
use reference::{mse, rows, ReferenceLoss, Weights};
use crate::rng::{self, Rng};

/// Maximum accepted relative error.
pub const GRAD_TOLERANCE: f64 = 1e-5;
/// Central-difference step.
pub const GRAD_STEP: f64 = 1e-5;

/// Dimensions of the small networks: `N=4, K=3, m=5, tau=3`, two windows.
pub const TINY: Dims = Dims {
    stations: 4,
    embed: 3,
    hidden: 5,
};
pub const TINY_TAU: usize = 3;
pub const TINY_BATCH: usize = 2;

#[derive(Debug, Clone)]
pub struct SuiteCase {
    pub name: &'static str,
    pub seed: u64,
    pub report: GradCheckReport,
}

impl SuiteCase {
    pub fn passes(&self) -> bool {
        self.report.passes(GRAD_TOLERANCE)
    }
}

/// Mean total loss over windows `0..batch`.
pub fn batch_loss<M: WindowModel>(model: &M, windows: &WindowBatch, batch: usize) -> f64 {
    let mut s = M::Scratch::default();
    let mut sum = 0.0;
    for k in 0..batch {
        model.forward_window(windows.inputs(k), windows.tau(), &mut s);
        sum += model.window_loss(windows.inputs(k), windows.targets(k), &s).total;
    }
    sum / batch as f64
}

/// Replaces the stored gradients with those of [`batch_loss`].
pub fn batch_gradients<M: WindowModel>(model: &mut M, windows: &WindowBatch, batch: usize) {
    let mut s = M::Scratch::default();
    model.zero_grads();
    for k in 0..batch {
        model.forward_window(windows.inputs(k), windows.tau(), &mut s);
        model.backward_window(windows.inputs(k), windows.targets(k), &mut s, 1.0 / batch as f64);
    }
}

/// [`batch_loss`] recomputed in double-double precision.
pub fn reference_batch_loss<M: ReferenceLoss>(model: &M, windows: &WindowBatch, batch: usize) -> Dd {
    let mut sum = Dd::ZERO;
    for k in 0..batch {
        sum = sum + model.reference_loss(windows.inputs(k), windows.targets(k), windows.tau());
    }
    sum / Dd::new(batch as f64)
}

/// Gradient check of the mean window loss over the first `batch` windows.
///
/// The finite differences are taken on the double-double reference loss:
/// in plain double precision the rounding of the loss alone is about
/// `1e-16 L / 2h`, which swamps gradient entries near `1e-9`.
pub fn check_window_model<M: WindowModel + ReferenceLoss>(model: &mut M, windows: &WindowBatch, batch: usize) -> Result<GradCheckReport> {
    batch_gradients(model, windows, batch);
    grad_check_with(model, |m| Ok(reference_batch_loss(m, windows, batch)), GRAD_STEP)
}

/// Random `(tau + batch) x N` series in `[0, 1)` as windows.
pub fn random_windows(stations: usize, tau: usize, batch: usize, rng: &mut Rng) -> WindowBatch {
    let data = (0..(tau + batch) * stations).map(|_| rng.random::<f64>()).collect();
    let series = Matrix::from_vec(tau + batch, stations, data).expect("shape");
    WindowBatch::new(series, tau).expect("enough rows")
}

fn random_vec(len: usize, rng: &mut Rng) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn check_dense(seed: u64) -> Result<GradCheckReport> {
    let mut rng = rng::stream(seed, "verify-dense");
    let mut layer = Dense::new("dense", 4, 3, &mut rng);
    let xs: Vec<Vec<f64>> = (0..3).map(|_| random_vec(4, &mut rng)).collect();
    let target = random_vec(9, &mut rng);
    let target_rows = rows(&target, 3);
    let loss = |l: &Dense| -> Result<Dd> {
        let w = Weights::of(l);
        let out: Vec<Vec<Dd>> = xs.iter().map(|x| w.dense("dense", &rows(x, 4)[0])).collect();
        Ok(mse(&out, &target_rows))
    };
    layer.zero_grads();
    for (j, x) in xs.iter().enumerate() {
        let y = layer.forward(x)?;
        let mut dy = [0.0; 3];
        mse_grad_into(&y, &target[j * 3..(j + 1) * 3], 9, 1.0, &mut dy);
        let mut dz = [0.0; 3];
        layer.backward(x, &y, &dy, None, &mut dz);
    }
    grad_check_with(&mut layer, loss, GRAD_STEP)
}

/// Loss on both the hidden and the cell sequence so both backward inputs
/// are exercised.
fn check_lstm(seed: u64) -> Result<GradCheckReport> {
    let (n, m, tau) = (3, 5, 4);
    let mut rng = rng::stream(seed, "verify-lstm");
    let mut cell = LstmCell::new("lstm", n, m, &mut rng);
    let xs = random_vec(tau * n, &mut rng);
    let h_target = random_vec(tau * m, &mut rng);
    let c_target = random_vec(tau * m, &mut rng);
    let (x_rows, h_rows, c_rows) = (rows(&xs, n), rows(&h_target, m), rows(&c_target, m));
    let loss = |c: &LstmCell| -> Result<Dd> {
        let (hs, cs) = Weights::of(c).lstm("lstm", &x_rows);
        Ok(mse(&hs, &h_rows) + Dd::new(0.5) * mse(&cs, &c_rows))
    };
    let mut trace = LstmTrace::new();
    cell.forward_sequence(&xs, tau, &mut trace);
    let mut dh = alloc::vec![0.0; tau * m];
    mse_grad_into(trace.hiddens(), &h_target, tau * m, 1.0, &mut dh);
    let mut dc = alloc::vec![0.0; tau * m];
    mse_grad_into(trace.cells(), &c_target, tau * m, 0.5, &mut dc);
    cell.zero_grads();
    cell.backward_sequence(&trace, &dh, Some(&dc), None);
    grad_check_with(&mut cell, loss, GRAD_STEP)
}

/// The full model sharing network with decoder, frozen adapter and
/// non-zero loss weights, on `TINY` dimensions.
pub fn tiny_unkadf(seed: u64) -> SharingNet {
    let adapter = LstmCellParams::random(TINY.embed, TINY.hidden, &mut rng::stream(seed, "verify-adapter"));
    SharingNet::new(TINY, Some(&adapter), true, 0.7, 0.9, seed).expect("consistent dims")
}

/// Checks every layer and network on seeds `0..seeds`.
pub fn gradient_suite(seeds: u64) -> Result<Vec<SuiteCase>> {
    let mut cases = Vec::new();
    for seed in 0..seeds {
        let windows = random_windows(TINY.stations, TINY_TAU, TINY_BATCH, &mut rng::stream(seed, "verify-data"));
        cases.push(SuiteCase {
            name: "dense",
            seed,
            report: check_dense(seed)?,
        });
        cases.push(SuiteCase {
            name: "lstm",
            seed,
            report: check_lstm(seed)?,
        });
        let mut net = RecurrentNet::plain_lstm(TINY.stations, TINY.hidden, seed);
        cases.push(SuiteCase {
            name: "plain-lstm",
            seed,
            report: check_window_model(&mut net, &windows, TINY_BATCH)?,
        });
        let mut net = PretrainNet::pretrain(TINY, seed);
        cases.push(SuiteCase {
            name: "pretrain",
            seed,
            report: check_window_model(&mut net, &windows, TINY_BATCH)?,
        });
        let mut net = tiny_unkadf(seed);
        cases.push(SuiteCase {
            name: "unkadf",
            seed,
            report: check_window_model(&mut net, &windows, TINY_BATCH)?,
        });
    }
    Ok(cases)
}
