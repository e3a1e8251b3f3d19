use alloc::format;
use alloc::vec::Vec;

use super::{Dims, LossTerms, WindowModel};
use crate::error::{Error, Result};
use crate::nn::{mse_grad_into, mse_slices, Dense, LstmCell, LstmCellParams, LstmState, LstmTrace, Matrix, Param, Parameterized};
use crate::rng;

/// Single-branch recurrent forecaster.
///
/// Per step: `e = tanh(W_e x + b_e)` (or `e = x` without an encoder),
/// `(h, c) = LSTM(e, h, c)`, prediction `tanh(W_p h + b_p)` and, with a
/// decoder, reconstruction `tanh(W_d e + b_d)`.
#[derive(Debug, Clone)]
pub struct RecurrentNet {
    encoder: Option<Dense>,
    lstm: LstmCell,
    predictor: Dense,
    decoder: Option<Dense>,
}

/// The source pre-training network: encoder, LSTM, predictor and decoder,
/// trained on prediction plus reconstruction error.
pub type PretrainNet = RecurrentNet;

impl RecurrentNet {
    /// Source network with all components, initialised from `seed`.
    pub fn pretrain(dims: Dims, seed: u64) -> Self {
        RecurrentNet {
            encoder: Some(Dense::new("encoder", dims.stations, dims.embed, &mut rng::stream(seed, "encoder"))),
            lstm: LstmCell::new("lstm_a", dims.embed, dims.hidden, &mut rng::stream(seed, "lstm_a")),
            predictor: Dense::new("predictor", dims.hidden, dims.stations, &mut rng::stream(seed, "predictor")),
            decoder: Some(Dense::new("decoder", dims.embed, dims.stations, &mut rng::stream(seed, "decoder"))),
        }
    }

    /// LSTM directly on the raw stations followed by a predictor.
    pub fn plain_lstm(stations: usize, hidden: usize, seed: u64) -> Self {
        RecurrentNet {
            encoder: None,
            lstm: LstmCell::new("lstm", stations, hidden, &mut rng::stream(seed, "lstm_i")),
            predictor: Dense::new("predictor", hidden, stations, &mut rng::stream(seed, "predictor")),
            decoder: None,
        }
    }

    /// Encoder plus an LSTM warm-started from `cell` (all trainable).
    pub fn fine_tune(stations: usize, cell: &LstmCellParams, seed: u64) -> Result<Self> {
        cell.validate()?;
        let (k, m) = (cell.input_dim(), cell.hidden_dim());
        Ok(RecurrentNet {
            encoder: Some(Dense::new("encoder", stations, k, &mut rng::stream(seed, "encoder_i"))),
            lstm: LstmCell::from_params("lstm", cell, false),
            predictor: Dense::new("predictor", m, stations, &mut rng::stream(seed, "predictor")),
            decoder: None,
        })
    }

    /// Assembles a network from explicit components.
    pub fn from_parts(
        encoder: Option<Dense>,
        lstm: LstmCell,
        predictor: Dense,
        decoder: Option<Dense>,
    ) -> Result<Self> {
        let stations = predictor.outputs();
        let feed = match &encoder {
            Some(e) => {
                if e.inputs() != stations {
                    return Err(Error::dim("RecurrentNet", format!("encoder reads {} stations, predictor emits {stations}", e.inputs())));
                }
                e.outputs()
            }
            None => stations,
        };
        if lstm.input_dim() != feed {
            return Err(Error::dim("RecurrentNet", format!("LSTM input {} but feed width {feed}", lstm.input_dim())));
        }
        if predictor.inputs() != lstm.hidden_dim() {
            return Err(Error::dim("RecurrentNet", format!("predictor reads {} but hidden is {}", predictor.inputs(), lstm.hidden_dim())));
        }
        if let Some(d) = &decoder {
            if encoder.is_none() || d.inputs() != feed || d.outputs() != stations {
                return Err(Error::dim("RecurrentNet", "decoder must map the encoding back to the stations"));
            }
        }
        Ok(RecurrentNet { encoder, lstm, predictor, decoder })
    }

    pub fn lstm(&self) -> &LstmCell {
        &self.lstm
    }

    pub fn encoder(&self) -> Option<&Dense> {
        self.encoder.as_ref()
    }

    pub fn has_decoder(&self) -> bool {
        self.decoder.is_some()
    }

    fn feed_width(&self) -> usize {
        self.lstm.input_dim()
    }

    /// Checked forward over a `tau x N` window.
    pub fn forward(&self, window: &Matrix) -> Result<PretrainOutput> {
        if window.cols() != self.stations() {
            return Err(Error::dim("pretrain_forward", format!("window has {} stations, network expects {}", window.cols(), self.stations())));
        }
        let tau = window.rows();
        let mut s = RecurrentScratch::default();
        self.forward_window(window.as_slice(), tau, &mut s);
        let n = self.stations();
        Ok(PretrainOutput {
            predictions: Matrix::from_vec(tau, n, s.pred.clone())?,
            reconstructions: self
                .decoder
                .as_ref()
                .map(|_| Matrix::from_vec(tau, n, s.recon.clone()))
                .transpose()?,
            states: (0..tau).map(|t| s.trace.state(t)).collect(),
        })
    }
}

/// Output of [`RecurrentNet::forward`].
#[derive(Debug, Clone, PartialEq)]
pub struct PretrainOutput {
    pub predictions: Matrix,
    /// `None` when the network has no decoder.
    pub reconstructions: Option<Matrix>,
    pub states: Vec<LstmState>,
}

/// Prediction error plus reconstruction error, each a mean over elements.
pub fn pretrain_loss(
    predictions: &Matrix,
    reconstructions: &Matrix,
    targets: &Matrix,
    inputs: &Matrix,
) -> Result<f64> {
    Ok(crate::nn::mse(predictions, targets)? + crate::nn::mse(reconstructions, inputs)?)
}

#[derive(Debug, Clone, Default)]
pub struct RecurrentScratch {
    tau: usize,
    encoded: Vec<f64>,
    trace: LstmTrace,
    pred: Vec<f64>,
    recon: Vec<f64>,
    d_pred: Vec<f64>,
    d_hidden: Vec<f64>,
    d_encoded: Vec<f64>,
    dz: Vec<f64>,
}

impl WindowModel for RecurrentNet {
    type Scratch = RecurrentScratch;

    fn stations(&self) -> usize {
        self.predictor.outputs()
    }

    fn forward_window(&self, inputs: &[f64], tau: usize, s: &mut RecurrentScratch) {
        let n = self.stations();
        let e = self.feed_width();
        s.tau = tau;
        s.encoded.resize(tau * e, 0.0);
        match &self.encoder {
            Some(enc) => {
                for t in 0..tau {
                    enc.forward_into(&inputs[t * n..(t + 1) * n], &mut s.encoded[t * e..(t + 1) * e]);
                }
            }
            None => s.encoded.copy_from_slice(inputs),
        }
        self.lstm.forward_sequence(&s.encoded, tau, &mut s.trace);
        s.pred.resize(tau * n, 0.0);
        for t in 0..tau {
            self.predictor.forward_into(s.trace.h(t), &mut s.pred[t * n..(t + 1) * n]);
        }
        if let Some(dec) = &self.decoder {
            s.recon.resize(tau * n, 0.0);
            for t in 0..tau {
                dec.forward_into(&s.encoded[t * e..(t + 1) * e], &mut s.recon[t * n..(t + 1) * n]);
            }
        }
    }

    fn predictions<'a>(&self, s: &'a RecurrentScratch) -> &'a [f64] {
        &s.pred
    }

    fn window_loss(&self, inputs: &[f64], targets: &[f64], s: &RecurrentScratch) -> LossTerms {
        let prediction = mse_slices(&s.pred, targets).expect("window shape");
        let reconstruction = match self.decoder {
            Some(_) => mse_slices(&s.recon, inputs).expect("window shape"),
            None => 0.0,
        };
        LossTerms {
            total: prediction + reconstruction,
            prediction,
            reconstruction,
            alignment: 0.0,
        }
    }

    fn backward_window(&mut self, inputs: &[f64], targets: &[f64], s: &mut RecurrentScratch, scale: f64) {
        let tau = s.tau;
        let n = self.stations();
        let e = self.feed_width();
        let m = self.lstm.hidden_dim();
        let count = tau * n;

        s.d_pred.clear();
        s.d_pred.resize(count, 0.0);
        mse_grad_into(&s.pred, targets, count, scale, &mut s.d_pred);
        s.d_hidden.clear();
        s.d_hidden.resize(tau * m, 0.0);
        s.dz.resize(n.max(e).max(m), 0.0);
        for t in 0..tau {
            self.predictor.backward(
                s.trace.h(t),
                &s.pred[t * n..(t + 1) * n],
                &s.d_pred[t * n..(t + 1) * n],
                Some(&mut s.d_hidden[t * m..(t + 1) * m]),
                &mut s.dz[..n],
            );
        }

        s.d_encoded.clear();
        s.d_encoded.resize(tau * e, 0.0);
        if let Some(dec) = &mut self.decoder {
            // reuse d_pred as the reconstruction gradient buffer
            s.d_pred.iter_mut().for_each(|v| *v = 0.0);
            mse_grad_into(&s.recon, inputs, count, scale, &mut s.d_pred);
            for t in 0..tau {
                dec.backward(
                    &s.encoded[t * e..(t + 1) * e],
                    &s.recon[t * n..(t + 1) * n],
                    &s.d_pred[t * n..(t + 1) * n],
                    Some(&mut s.d_encoded[t * e..(t + 1) * e]),
                    &mut s.dz[..n],
                );
            }
        }

        let need_dx = self.encoder.is_some();
        self.lstm.backward_sequence(
            &s.trace,
            &s.d_hidden,
            None,
            if need_dx { Some(&mut s.d_encoded) } else { None },
        );

        if let Some(enc) = &mut self.encoder {
            for t in 0..tau {
                enc.backward(
                    &inputs[t * n..(t + 1) * n],
                    &s.encoded[t * e..(t + 1) * e],
                    &s.d_encoded[t * e..(t + 1) * e],
                    None,
                    &mut s.dz[..e],
                );
            }
        }
    }
}

impl Parameterized for RecurrentNet {
    /// Order: encoder, LSTM, predictor, decoder.
    fn params(&self) -> Vec<&Param> {
        let mut v = Vec::new();
        if let Some(e) = &self.encoder {
            v.extend(e.params());
        }
        v.extend(self.lstm.params());
        v.extend(self.predictor.params());
        if let Some(d) = &self.decoder {
            v.extend(d.params());
        }
        v
    }

    fn params_mut(&mut self) -> Vec<&mut Param> {
        let mut v = Vec::new();
        if let Some(e) = &mut self.encoder {
            v.extend(e.params_mut());
        }
        v.extend(self.lstm.params_mut());
        v.extend(self.predictor.params_mut());
        if let Some(d) = &mut self.decoder {
            v.extend(d.params_mut());
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use crate::nn::Parameterized;

    #[test]
    fn zero_network_outputs_zero() {
        let dims = Dims { stations: 3, embed: 2, hidden: 4 };
        let net = RecurrentNet::from_parts(
            Some(Dense::zeros("e", 3, 2)),
            LstmCell::from_params("l", &LstmCellParams::zeros(2, 4), false),
            Dense::zeros("p", 4, 3),
            Some(Dense::zeros("d", 2, 3)),
        )
        .unwrap();
        let window = Matrix::from_vec(5, dims.stations, (0..15).map(|v| v as f64 / 7.0).collect()).unwrap();
        let out = net.forward(&window).unwrap();
        assert!(out.predictions.as_slice().iter().all(|&v| v == 0.0));
        assert!(out.reconstructions.unwrap().as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn pretrain_loss_examples() {
        let ones = Matrix::from_vec(2, 2, vec![1.0; 4]).unwrap();
        let zeros = Matrix::zeros(2, 2);
        assert_eq!(pretrain_loss(&ones, &ones, &ones, &ones).unwrap(), 0.0);
        assert_eq!(pretrain_loss(&zeros, &zeros, &ones, &ones).unwrap(), 2.0);
    }

    #[test]
    fn plain_lstm_parameter_count() {
        let (n, m) = (4, 64);
        let net = RecurrentNet::plain_lstm(n, m, 1);
        assert_eq!(net.param_count(), 4 * (m * n + m * m + m) + (n * m + n));
    }

    #[test]
    fn forward_is_deterministic_and_bounded() {
        let net = RecurrentNet::pretrain(Dims { stations: 3, embed: 2, hidden: 4 }, 9);
        let window = Matrix::from_vec(4, 3, (0..12).map(|v| (v % 5) as f64 / 4.0).collect()).unwrap();
        let a = net.forward(&window).unwrap();
        let b = net.forward(&window).unwrap();
        assert_eq!(a, b);
        assert!(a.predictions.as_slice().iter().all(|v| v.abs() < 1.0));
        assert!(net.forward(&Matrix::zeros(4, 2)).is_err());
    }
}
