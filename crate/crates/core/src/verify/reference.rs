//! Straight-line forward passes in double-double precision, written against
//! parameter names only, so finite differences of the loss are not limited
//! by double rounding.

use alloc::vec::Vec;

use super::dd::Dd;
use crate::models::{RecurrentNet, SharingNet};
use crate::nn::{Matrix, Parameterized};

/// Name-indexed view of a model's parameters.
pub struct Weights<'a> {
    named: Vec<(&'a str, &'a Matrix)>,
}

impl<'a> Weights<'a> {
    pub fn of<P: Parameterized + ?Sized>(model: &'a P) -> Self {
        Weights {
            named: model.params().into_iter().map(|p| (p.name(), p.value())).collect(),
        }
    }

    pub fn get(&self, name: &str) -> Option<&'a Matrix> {
        self.named.iter().find(|(n, _)| *n == name).map(|(_, m)| *m)
    }

    fn req(&self, prefix: &str, leaf: &str) -> &'a Matrix {
        let name = alloc::format!("{prefix}.{leaf}");
        self.get(&name).unwrap_or_else(|| panic!("missing parameter {name}"))
    }

    pub fn has(&self, prefix: &str) -> bool {
        self.named
            .iter()
            .any(|(n, _)| n.split_once('.').is_some_and(|(p, _)| p == prefix))
    }

    /// Prefix of the first recurrent cell.
    pub fn cell_prefix(&self) -> &'a str {
        self.named
            .iter()
            .find_map(|(n, _)| n.strip_suffix(".W_i"))
            .expect("model has a recurrent cell")
    }

    /// `tanh(W x + b)` of the layer named `prefix`.
    pub fn dense(&self, prefix: &str, x: &[Dd]) -> Vec<Dd> {
        let w = self.req(prefix, "W");
        let b = self.req(prefix, "b");
        (0..w.rows())
            .map(|r| affine(w.row(r), x, b.get(r, 0)).tanh())
            .collect()
    }

    /// Hidden and cell states of the cell named `prefix` over `xs`, starting
    /// from zero.
    pub fn lstm(&self, prefix: &str, xs: &[Vec<Dd>]) -> (Vec<Vec<Dd>>, Vec<Vec<Dd>>) {
        let gate = |g: &str| (self.req(prefix, &alloc::format!("W_{g}")), self.req(prefix, &alloc::format!("U_{g}")), self.req(prefix, &alloc::format!("b_{g}")));
        let [gi, gf, go, gt] = ["i", "f", "o", "theta"].map(gate);
        let m = gi.0.rows();
        let mut h = alloc::vec![Dd::ZERO; m];
        let mut c = alloc::vec![Dd::ZERO; m];
        let (mut hs, mut cs) = (Vec::new(), Vec::new());
        for x in xs {
            let pre = |(w, u, b): (&Matrix, &Matrix, &Matrix), r: usize| affine(w.row(r), x, b.get(r, 0)) + affine(u.row(r), &h, 0.0);
            let mut next_h = Vec::with_capacity(m);
            let mut next_c = Vec::with_capacity(m);
            for r in 0..m {
                let i = pre(gi, r).sigmoid();
                let f = pre(gf, r).sigmoid();
                let o = pre(go, r).sigmoid();
                let th = pre(gt, r).tanh();
                let cr = f * c[r] + i * th;
                next_c.push(cr);
                next_h.push(o * cr.tanh());
            }
            h = next_h;
            c = next_c;
            hs.push(h.clone());
            cs.push(c.clone());
        }
        (hs, cs)
    }
}

fn affine(w: &[f64], x: &[Dd], bias: f64) -> Dd {
    w.iter().zip(x).fold(Dd::new(bias), |acc, (&a, &b)| acc + Dd::new(a) * b)
}

/// Mean squared difference over all elements.
pub fn mse(a: &[Vec<Dd>], b: &[Vec<Dd>]) -> Dd {
    let mut sum = Dd::ZERO;
    let mut count = 0usize;
    for (ra, rb) in a.iter().zip(b) {
        assert_eq!(ra.len(), rb.len(), "mse row length");
        for (&x, &y) in ra.iter().zip(rb) {
            let d = x - y;
            sum = sum + d * d;
            count += 1;
        }
    }
    if count == 0 {
        Dd::ZERO
    } else {
        sum / Dd::new(count as f64)
    }
}

/// `tau` rows of width `width` from a row-major slice.
pub fn rows(values: &[f64], width: usize) -> Vec<Vec<Dd>> {
    values.chunks(width).map(|r| r.iter().map(|&v| Dd::new(v)).collect()).collect()
}

/// Total window loss computed independently of the model's own forward pass.
pub trait ReferenceLoss {
    fn reference_loss(&self, inputs: &[f64], targets: &[f64], tau: usize) -> Dd;
}

impl ReferenceLoss for RecurrentNet {
    fn reference_loss(&self, inputs: &[f64], targets: &[f64], tau: usize) -> Dd {
        let w = Weights::of(self);
        let n = inputs.len() / tau;
        let x = rows(inputs, n);
        let encoded: Vec<Vec<Dd>> = if w.has("encoder") {
            x.iter().map(|r| w.dense("encoder", r)).collect()
        } else {
            x.clone()
        };
        let (hs, _) = w.lstm(w.cell_prefix(), &encoded);
        let pred: Vec<Vec<Dd>> = hs.iter().map(|h| w.dense("predictor", h)).collect();
        let mut total = mse(&pred, &rows(targets, n));
        if w.has("decoder") {
            let recon: Vec<Vec<Dd>> = encoded.iter().map(|e| w.dense("decoder", e)).collect();
            total = total + mse(&recon, &x);
        }
        total
    }
}

impl ReferenceLoss for SharingNet {
    fn reference_loss(&self, inputs: &[f64], targets: &[f64], tau: usize) -> Dd {
        let w = Weights::of(self);
        let n = inputs.len() / tau;
        let x = rows(inputs, n);
        let xi: Vec<Vec<Dd>> = x.iter().map(|r| w.dense("encoder_i", r)).collect();
        let xh: Vec<Vec<Dd>> = x.iter().map(|r| w.dense("encoder_h", r)).collect();
        let (hi, _) = w.lstm("lstm_i", &xi);
        let (hh, ch) = w.lstm("lstm_h", &xh);
        let pred: Vec<Vec<Dd>> = hi
            .iter()
            .zip(&hh)
            .map(|(a, b)| w.dense("predictor", &[a.as_slice(), b.as_slice()].concat()))
            .collect();
        let mut total = mse(&pred, &rows(targets, n));
        if w.has("decoder") {
            let recon: Vec<Vec<Dd>> = xi
                .iter()
                .zip(&xh)
                .map(|(a, b)| w.dense("decoder", &[a.as_slice(), b.as_slice()].concat()))
                .collect();
            total = total + Dd::new(self.gamma()) * mse(&recon, &x);
        }
        if w.has("lstm_a") {
            let (_, ca) = w.lstm("lstm_a", &xh);
            total = total + Dd::new(self.beta()) * mse(&ch, &ca);
        }
        total
    }
}
