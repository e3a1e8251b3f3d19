use alloc::format;
use alloc::vec::Vec;

use super::{Dims, LossTerms, WindowModel};
use crate::error::{Error, Result};
use crate::nn::{mse, mse_grad_into, mse_slices, Dense, LstmCell, LstmCellParams, LstmTrace, Matrix, Param, Parameterized};
use crate::rng;

/// Target-side model sharing network.
///
/// Per step, with raw demand `x`:
///
/// ```text
/// x_I = tanh(W_PI x + b_PI)            x_H = tanh(W_PH x + b_PH)
/// (h_I, c_I) = LSTM_I(x_I)             (h_H, c_H) = LSTM_H(x_H)
/// (_, c_S)   = LSTM_A(x_H)             frozen, own zero-initialised recurrence
/// prediction     = tanh(W_P  [h_I ; h_H] + b_P)
/// reconstruction = tanh(W_dP [x_I ; x_H] + b_dP)
/// ```
///
/// Loss: `L1 + gamma * L2 + beta * L3` with `L1` the prediction error, `L2`
/// the reconstruction error and `L3` the error between `c_H` and `c_S`. The
/// gradient of `L3` reaches `W_PH` both through `LSTM_H` and through the frozen
/// `LSTM_A`, whose own weights never change.
#[derive(Debug, Clone)]
pub struct SharingNet {
    encoder_i: Dense,
    encoder_h: Dense,
    lstm_i: LstmCell,
    lstm_h: LstmCell,
    adapter: Option<LstmCell>,
    predictor: Dense,
    decoder: Option<Dense>,
    gamma: f64,
    beta: f64,
}

impl SharingNet {
    /// Full network. `adapter` is the pretrained cell and is frozen on entry.
    ///
    /// Each component draws from its own seeded stream, so networks that
    /// differ only in optional components share identical initial weights
    /// for the components they have in common.
    pub fn new(
        dims: Dims,
        adapter: Option<&LstmCellParams>,
        with_decoder: bool,
        gamma: f64,
        beta: f64,
        seed: u64,
    ) -> Result<Self> {
        let Dims { stations: n, embed: k, hidden: m } = dims;
        if let Some(cell) = adapter {
            cell.validate()?;
            if cell.input_dim() != k || cell.hidden_dim() != m {
                return Err(Error::IncompatibleArtifact(format!(
                    "artifact has K={} m={}, network is configured with K={k} m={m}",
                    cell.input_dim(),
                    cell.hidden_dim()
                )));
            }
        }
        check_weights(gamma, beta)?;
        Ok(SharingNet {
            encoder_i: Dense::new("encoder_i", n, k, &mut rng::stream(seed, "encoder_i")),
            encoder_h: Dense::new("encoder_h", n, k, &mut rng::stream(seed, "encoder_h")),
            lstm_i: LstmCell::new("lstm_i", k, m, &mut rng::stream(seed, "lstm_i")),
            lstm_h: LstmCell::new("lstm_h", k, m, &mut rng::stream(seed, "lstm_h")),
            adapter: adapter.map(|c| LstmCell::from_params("lstm_a", c, true)),
            predictor: Dense::new("predictor", 2 * m, n, &mut rng::stream(seed, "predictor")),
            decoder: with_decoder.then(|| Dense::new("decoder", 2 * k, n, &mut rng::stream(seed, "decoder"))),
            gamma,
            beta,
        })
    }

    /// Assembles a network from explicit components; `adapter` is frozen.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        encoder_i: Dense,
        encoder_h: Dense,
        lstm_i: LstmCell,
        lstm_h: LstmCell,
        adapter: Option<&LstmCellParams>,
        predictor: Dense,
        decoder: Option<Dense>,
        gamma: f64,
        beta: f64,
    ) -> Result<Self> {
        let n = predictor.outputs();
        let k = encoder_i.outputs();
        let m = lstm_i.hidden_dim();
        let ok = encoder_i.inputs() == n
            && encoder_h.inputs() == n
            && encoder_h.outputs() == k
            && lstm_i.input_dim() == k
            && lstm_h.input_dim() == k
            && lstm_h.hidden_dim() == m
            && predictor.inputs() == 2 * m
            && decoder.as_ref().map_or(true, |d| d.inputs() == 2 * k && d.outputs() == n);
        if !ok {
            return Err(Error::dim("SharingNet", "component shapes are inconsistent"));
        }
        if let Some(cell) = adapter {
            cell.validate()?;
            if cell.input_dim() != k || cell.hidden_dim() != m {
                return Err(Error::IncompatibleArtifact(format!(
                    "artifact has K={} m={}, network has K={k} m={m}",
                    cell.input_dim(),
                    cell.hidden_dim()
                )));
            }
        }
        check_weights(gamma, beta)?;
        Ok(SharingNet {
            encoder_i,
            encoder_h,
            lstm_i,
            lstm_h,
            adapter: adapter.map(|c| LstmCell::from_params("lstm_a", c, true)),
            predictor,
            decoder,
            gamma,
            beta,
        })
    }

    pub fn dims(&self) -> Dims {
        Dims {
            stations: self.predictor.outputs(),
            embed: self.encoder_i.outputs(),
            hidden: self.lstm_i.hidden_dim(),
        }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn has_decoder(&self) -> bool {
        self.decoder.is_some()
    }

    pub fn has_adapter(&self) -> bool {
        self.adapter.is_some()
    }

    /// Current weights of the frozen adapter cell.
    pub fn adapter_params(&self) -> Option<LstmCellParams> {
        self.adapter.as_ref().map(LstmCell::to_params)
    }

    /// Bitwise comparison of the adapter with `reference`.
    pub fn adapter_matches(&self, reference: &LstmCellParams) -> bool {
        let Some(cell) = &self.adapter else {
            return false;
        };
        let current = cell.to_params();
        let same = |a: &[f64], b: &[f64]| {
            a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
        };
        (0..4).all(|g| {
            same(current.w[g].as_slice(), reference.w[g].as_slice())
                && same(current.u[g].as_slice(), reference.u[g].as_slice())
                && same(&current.b[g], &reference.b[g])
        })
    }

    /// Checked forward over a `tau x N` window.
    pub fn forward(&self, window: &Matrix) -> Result<SharingOutput> {
        let Dims { stations: n, hidden: m, .. } = self.dims();
        if window.cols() != n {
            return Err(Error::dim("sharing_forward", format!("window has {} stations, network expects {n}", window.cols())));
        }
        let tau = window.rows();
        let mut s = SharingScratch::default();
        self.forward_window(window.as_slice(), tau, &mut s);
        let cells = |trace: &LstmTrace| Matrix::from_vec(tau, m, trace.cells().to_vec());
        Ok(SharingOutput {
            predictions: Matrix::from_vec(tau, n, s.pred.clone())?,
            reconstructions: self
                .decoder
                .as_ref()
                .map(|_| Matrix::from_vec(tau, n, s.recon.clone()))
                .transpose()?,
            sharing_cells: cells(&s.trace_h)?,
            adapter_cells: self.adapter.as_ref().map(|_| cells(&s.trace_a)).transpose()?,
        })
    }
}

fn check_weights(gamma: f64, beta: f64) -> Result<()> {
    if !(gamma >= 0.0 && beta >= 0.0 && gamma.is_finite() && beta.is_finite()) {
        return Err(Error::Config(format!("loss weights must be finite and >= 0, got gamma={gamma} beta={beta}")));
    }
    Ok(())
}

/// Output of [`SharingNet::forward`].
#[derive(Debug, Clone, PartialEq)]
pub struct SharingOutput {
    pub predictions: Matrix,
    pub reconstructions: Option<Matrix>,
    /// `c_H` per step, `tau x m`.
    pub sharing_cells: Matrix,
    /// `c_S` per step from the frozen cell, `tau x m`.
    pub adapter_cells: Option<Matrix>,
}

/// `(total, L1, L2, L3)` of a forward output. Missing components contribute 0.
pub fn unkadf_loss(
    out: &SharingOutput,
    inputs: &Matrix,
    targets: &Matrix,
    gamma: f64,
    beta: f64,
) -> Result<LossTerms> {
    check_weights(gamma, beta)?;
    let prediction = mse(&out.predictions, targets)?;
    let reconstruction = match &out.reconstructions {
        Some(r) => mse(r, inputs)?,
        None => 0.0,
    };
    let alignment = match &out.adapter_cells {
        Some(a) => mse(&out.sharing_cells, a)?,
        None => 0.0,
    };
    Ok(LossTerms {
        total: prediction + gamma * reconstruction + beta * alignment,
        prediction,
        reconstruction,
        alignment,
    })
}

#[derive(Debug, Clone, Default)]
pub struct SharingScratch {
    tau: usize,
    /// `tau x 2K`: `[x_I ; x_H]` per step.
    encoded: Vec<f64>,
    xi: Vec<f64>,
    xh: Vec<f64>,
    trace_i: LstmTrace,
    trace_h: LstmTrace,
    trace_a: LstmTrace,
    /// `tau x 2m`: `[h_I ; h_H]` per step.
    joint_hidden: Vec<f64>,
    pred: Vec<f64>,
    recon: Vec<f64>,
    d_out: Vec<f64>,
    d_joint_hidden: Vec<f64>,
    d_encoded: Vec<f64>,
    dh_i: Vec<f64>,
    dh_h: Vec<f64>,
    dc_h: Vec<f64>,
    dc_a: Vec<f64>,
    dh_zero: Vec<f64>,
    dxi: Vec<f64>,
    dxh: Vec<f64>,
    dz: Vec<f64>,
}

impl WindowModel for SharingNet {
    type Scratch = SharingScratch;

    fn stations(&self) -> usize {
        self.predictor.outputs()
    }

    fn forward_window(&self, inputs: &[f64], tau: usize, s: &mut SharingScratch) {
        let Dims { stations: n, embed: k, hidden: m } = self.dims();
        s.tau = tau;
        s.xi.resize(tau * k, 0.0);
        s.xh.resize(tau * k, 0.0);
        s.encoded.resize(tau * 2 * k, 0.0);
        for t in 0..tau {
            let x = &inputs[t * n..(t + 1) * n];
            self.encoder_i.forward_into(x, &mut s.xi[t * k..(t + 1) * k]);
            self.encoder_h.forward_into(x, &mut s.xh[t * k..(t + 1) * k]);
            s.encoded[t * 2 * k..t * 2 * k + k].copy_from_slice(&s.xi[t * k..(t + 1) * k]);
            s.encoded[t * 2 * k + k..(t + 1) * 2 * k].copy_from_slice(&s.xh[t * k..(t + 1) * k]);
        }
        self.lstm_i.forward_sequence(&s.xi, tau, &mut s.trace_i);
        self.lstm_h.forward_sequence(&s.xh, tau, &mut s.trace_h);
        if let Some(a) = &self.adapter {
            a.forward_sequence(&s.xh, tau, &mut s.trace_a);
        }
        s.joint_hidden.resize(tau * 2 * m, 0.0);
        s.pred.resize(tau * n, 0.0);
        for t in 0..tau {
            let joint = &mut s.joint_hidden[t * 2 * m..(t + 1) * 2 * m];
            joint[..m].copy_from_slice(s.trace_i.h(t));
            joint[m..].copy_from_slice(s.trace_h.h(t));
            self.predictor.forward_into(joint, &mut s.pred[t * n..(t + 1) * n]);
        }
        if let Some(dec) = &self.decoder {
            s.recon.resize(tau * n, 0.0);
            for t in 0..tau {
                dec.forward_into(&s.encoded[t * 2 * k..(t + 1) * 2 * k], &mut s.recon[t * n..(t + 1) * n]);
            }
        }
    }

    fn predictions<'a>(&self, s: &'a SharingScratch) -> &'a [f64] {
        &s.pred
    }

    fn window_loss(&self, inputs: &[f64], targets: &[f64], s: &SharingScratch) -> LossTerms {
        let prediction = mse_slices(&s.pred, targets).expect("window shape");
        let reconstruction = match self.decoder {
            Some(_) => mse_slices(&s.recon, inputs).expect("window shape"),
            None => 0.0,
        };
        let alignment = match self.adapter {
            Some(_) => mse_slices(s.trace_h.cells(), s.trace_a.cells()).expect("trace shape"),
            None => 0.0,
        };
        LossTerms {
            total: prediction + self.gamma * reconstruction + self.beta * alignment,
            prediction,
            reconstruction,
            alignment,
        }
    }

    fn backward_window(&mut self, inputs: &[f64], targets: &[f64], s: &mut SharingScratch, scale: f64) {
        let Dims { stations: n, embed: k, hidden: m } = self.dims();
        let tau = s.tau;
        let count = tau * n;
        s.dz.resize(n.max(k), 0.0);

        // prediction head
        s.d_out.clear();
        s.d_out.resize(count, 0.0);
        mse_grad_into(&s.pred, targets, count, scale, &mut s.d_out);
        s.d_joint_hidden.clear();
        s.d_joint_hidden.resize(tau * 2 * m, 0.0);
        for t in 0..tau {
            self.predictor.backward(
                &s.joint_hidden[t * 2 * m..(t + 1) * 2 * m],
                &s.pred[t * n..(t + 1) * n],
                &s.d_out[t * n..(t + 1) * n],
                Some(&mut s.d_joint_hidden[t * 2 * m..(t + 1) * 2 * m]),
                &mut s.dz[..n],
            );
        }
        s.dh_i.resize(tau * m, 0.0);
        s.dh_h.resize(tau * m, 0.0);
        for t in 0..tau {
            let joint = &s.d_joint_hidden[t * 2 * m..(t + 1) * 2 * m];
            s.dh_i[t * m..(t + 1) * m].copy_from_slice(&joint[..m]);
            s.dh_h[t * m..(t + 1) * m].copy_from_slice(&joint[m..]);
        }

        // reconstruction head
        s.dxi.clear();
        s.dxi.resize(tau * k, 0.0);
        s.dxh.clear();
        s.dxh.resize(tau * k, 0.0);
        if let (Some(dec), true) = (&mut self.decoder, self.gamma != 0.0) {
            s.d_out.iter_mut().for_each(|v| *v = 0.0);
            mse_grad_into(&s.recon, inputs, count, scale * self.gamma, &mut s.d_out);
            s.d_encoded.clear();
            s.d_encoded.resize(tau * 2 * k, 0.0);
            for t in 0..tau {
                dec.backward(
                    &s.encoded[t * 2 * k..(t + 1) * 2 * k],
                    &s.recon[t * n..(t + 1) * n],
                    &s.d_out[t * n..(t + 1) * n],
                    Some(&mut s.d_encoded[t * 2 * k..(t + 1) * 2 * k]),
                    &mut s.dz[..n],
                );
            }
            for t in 0..tau {
                let d = &s.d_encoded[t * 2 * k..(t + 1) * 2 * k];
                for j in 0..k {
                    s.dxi[t * k + j] += d[j];
                    s.dxh[t * k + j] += d[k + j];
                }
            }
        }

        // memory-cell alignment, through both cells
        let align = self.adapter.is_some() && self.beta != 0.0;
        if align {
            let cells = tau * m;
            s.dc_h.clear();
            s.dc_h.resize(cells, 0.0);
            mse_grad_into(s.trace_h.cells(), s.trace_a.cells(), cells, scale * self.beta, &mut s.dc_h);
            s.dc_a.clear();
            s.dc_a.extend(s.dc_h.iter().map(|v| -v));
            s.dh_zero.clear();
            s.dh_zero.resize(cells, 0.0);
            let adapter = self.adapter.as_mut().expect("checked above");
            adapter.backward_sequence(&s.trace_a, &s.dh_zero, Some(&s.dc_a), Some(&mut s.dxh));
        }

        self.lstm_h.backward_sequence(
            &s.trace_h,
            &s.dh_h,
            if align { Some(&s.dc_h) } else { None },
            Some(&mut s.dxh),
        );
        self.lstm_i.backward_sequence(&s.trace_i, &s.dh_i, None, Some(&mut s.dxi));

        for t in 0..tau {
            let x = &inputs[t * n..(t + 1) * n];
            self.encoder_i.backward(x, &s.xi[t * k..(t + 1) * k], &s.dxi[t * k..(t + 1) * k], None, &mut s.dz[..k]);
            self.encoder_h.backward(x, &s.xh[t * k..(t + 1) * k], &s.dxh[t * k..(t + 1) * k], None, &mut s.dz[..k]);
        }
    }
}

impl Parameterized for SharingNet {
    /// Order: encoder_i, encoder_h, lstm_i, lstm_h, lstm_a (frozen),
    /// predictor, decoder.
    fn params(&self) -> Vec<&Param> {
        let mut v = Vec::new();
        v.extend(self.encoder_i.params());
        v.extend(self.encoder_h.params());
        v.extend(self.lstm_i.params());
        v.extend(self.lstm_h.params());
        if let Some(a) = &self.adapter {
            v.extend(a.params());
        }
        v.extend(self.predictor.params());
        if let Some(d) = &self.decoder {
            v.extend(d.params());
        }
        v
    }

    fn params_mut(&mut self) -> Vec<&mut Param> {
        let mut v = Vec::new();
        v.extend(self.encoder_i.params_mut());
        v.extend(self.encoder_h.params_mut());
        v.extend(self.lstm_i.params_mut());
        v.extend(self.lstm_h.params_mut());
        if let Some(a) = &mut self.adapter {
            v.extend(a.params_mut());
        }
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

    fn zero_net(n: usize, k: usize, m: usize) -> SharingNet {
        SharingNet::from_parts(
            Dense::zeros("ei", n, k),
            Dense::zeros("eh", n, k),
            LstmCell::from_params("li", &LstmCellParams::zeros(k, m), false),
            LstmCell::from_params("lh", &LstmCellParams::zeros(k, m), false),
            Some(&LstmCellParams::zeros(k, m)),
            Dense::zeros("p", 2 * m, n),
            Some(Dense::zeros("d", 2 * k, n)),
            0.4,
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn zero_network_outputs_zero() {
        let net = zero_net(3, 2, 2);
        let w = Matrix::from_vec(4, 3, (0..12).map(|v| v as f64).collect()).unwrap();
        let out = net.forward(&w).unwrap();
        assert!(out.predictions.as_slice().iter().all(|&v| v == 0.0));
        assert!(out.reconstructions.as_ref().unwrap().as_slice().iter().all(|&v| v == 0.0));
        assert!(out.sharing_cells.as_slice().iter().all(|&v| v == 0.0));
        assert_eq!(Some(&out.sharing_cells), out.adapter_cells.as_ref());
        let l = unkadf_loss(&out, &w, &w, 0.4, 1.0).unwrap();
        assert_eq!(l.alignment, 0.0);
    }

    #[test]
    fn zero_weights_reduce_total_to_prediction() {
        let net = SharingNet::new(Dims { stations: 3, embed: 2, hidden: 3 }, Some(&LstmCellParams::random(2, 3, &mut rng::seeded(3))), true, 0.0, 0.0, 4).unwrap();
        let w = Matrix::from_vec(3, 3, vec![0.1, 0.5, 0.9, 0.2, 0.4, 0.6, 0.3, 0.3, 0.3]).unwrap();
        let out = net.forward(&w).unwrap();
        let l = unkadf_loss(&out, &w, &w, 0.0, 0.0).unwrap();
        assert_eq!(l.total, l.prediction);
        assert!(l.alignment > 0.0);
        assert_eq!(unkadf_loss(&out, &w, &w, -0.1, 0.0).unwrap_err().class(), "config");
    }

    #[test]
    fn incompatible_adapter() {
        let cell = LstmCellParams::zeros(2, 5);
        let err = SharingNet::new(Dims { stations: 3, embed: 2, hidden: 4 }, Some(&cell), true, 0.1, 0.1, 0).unwrap_err();
        assert_eq!(err.class(), "incompatible-artifact");
    }

    #[test]
    fn adapter_is_frozen() {
        let cell = LstmCellParams::random(2, 3, &mut rng::seeded(8));
        let mut net = SharingNet::new(Dims { stations: 3, embed: 2, hidden: 3 }, Some(&cell), true, 0.5, 0.5, 1).unwrap();
        let frozen = net.params().iter().filter(|p| p.is_frozen()).count();
        assert_eq!(frozen, 12);
        for p in net.params_mut() {
            if p.name().starts_with("lstm_a") {
                assert!(p.value_mut().is_none());
            }
        }
        assert!(net.adapter_matches(&cell));
    }
}
