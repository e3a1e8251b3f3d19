use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::matrix::dot;
use super::{uniform_init, Matrix, Param, Parameterized};
use crate::error::{Error, Result};
use crate::math::{sigmoid, tanh};
use crate::rng::Rng;

/// Gate order used for every per-gate array: input, forget, output, candidate.
pub const GATES: [&str; 4] = ["i", "f", "o", "theta"];

/// Hidden state and memory cell of an LSTM.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

impl LstmState {
    pub fn zeros(hidden: usize) -> Self {
        LstmState {
            h: vec![0.0; hidden],
            c: vec![0.0; hidden],
        }
    }
}

/// Plain weights of one LSTM cell, in gate order [`GATES`].
///
/// `w[g]` is `m x n`, `u[g]` is `m x m` and `b[g]` has length `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmCellParams {
    pub w: [Matrix; 4],
    pub u: [Matrix; 4],
    pub b: [Vec<f64>; 4],
}

impl LstmCellParams {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        LstmCellParams {
            w: core::array::from_fn(|_| Matrix::zeros(hidden, input)),
            u: core::array::from_fn(|_| Matrix::zeros(hidden, hidden)),
            b: core::array::from_fn(|_| vec![0.0; hidden]),
        }
    }

    pub fn random(input: usize, hidden: usize, rng: &mut Rng) -> Self {
        let cell = LstmCell::new("tmp", input, hidden, rng);
        cell.to_params()
    }

    pub fn input_dim(&self) -> usize {
        self.w[0].cols()
    }

    pub fn hidden_dim(&self) -> usize {
        self.w[0].rows()
    }

    pub fn validate(&self) -> Result<()> {
        let (n, m) = (self.input_dim(), self.hidden_dim());
        for g in 0..4 {
            if self.w[g].shape() != (m, n) {
                return Err(Error::dim(
                    "LstmCellParams",
                    format!("W_{} is {:?}, expected ({m}, {n})", GATES[g], self.w[g].shape()),
                ));
            }
            if self.u[g].shape() != (m, m) {
                return Err(Error::dim(
                    "LstmCellParams",
                    format!("U_{} is {:?}, expected ({m}, {m})", GATES[g], self.u[g].shape()),
                ));
            }
            if self.b[g].len() != m {
                return Err(Error::dim(
                    "LstmCellParams",
                    format!("b_{} has length {}, expected {m}", GATES[g], self.b[g].len()),
                ));
            }
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.w.iter().chain(&self.u).all(Matrix::is_finite)
            && self.b.iter().flatten().all(|v| v.is_finite())
    }
}

/// One LSTM step:
///
/// ```text
/// i = σ(W_i x + U_i h + b_i)      f = σ(W_f x + U_f h + b_f)
/// o = σ(W_o x + U_o h + b_o)      θ = tanh(W_θ x + U_θ h + b_θ)
/// c' = f ⊙ c + i ⊙ θ              h' = o ⊙ tanh(c')
/// ```
pub fn lstm_step(x: &[f64], prev: &LstmState, p: &LstmCellParams) -> Result<LstmState> {
    p.validate()?;
    let (n, m) = (p.input_dim(), p.hidden_dim());
    if x.len() != n {
        return Err(Error::dim(
            "lstm_step",
            format!("input has length {}, cell expects {n}", x.len()),
        ));
    }
    if prev.h.len() != m || prev.c.len() != m {
        return Err(Error::dim(
            "lstm_step",
            format!(
                "state has h {} / c {}, cell hidden size is {m}",
                prev.h.len(),
                prev.c.len()
            ),
        ));
    }
    let mut packed = Vec::new();
    let mut bias = Vec::new();
    pack(
        [&p.w[0], &p.w[1], &p.w[2], &p.w[3]],
        [&p.u[0], &p.u[1], &p.u[2], &p.u[3]],
        [&p.b[0], &p.b[1], &p.b[2], &p.b[3]],
        &mut packed,
        &mut bias,
    );
    let mut xh = x.to_vec();
    xh.extend_from_slice(&prev.h);
    let mut gates = vec![0.0; 4 * m];
    let mut next = LstmState::zeros(m);
    let mut tc = vec![0.0; m];
    step_kernel(&packed, &bias, &xh, &prev.c, &mut gates, &mut next.c, &mut tc, &mut next.h);
    Ok(next)
}

/// Packs the gate weights into one `4m x (n + m)` row-major matrix whose row
/// `g*m + r` is `[W_g row r | U_g row r]`, and the biases into `4m` values.
fn pack(w: [&Matrix; 4], u: [&Matrix; 4], b: [&[f64]; 4], packed: &mut Vec<f64>, bias: &mut Vec<f64>) {
    packed.clear();
    bias.clear();
    for g in 0..4 {
        for r in 0..w[g].rows() {
            packed.extend_from_slice(w[g].row(r));
            packed.extend_from_slice(u[g].row(r));
        }
        bias.extend_from_slice(b[g]);
    }
}

/// One step from the concatenated input `xh = [x ; h_prev]`.
/// `gates` receives i, f, o, θ back to back (each of length m).
#[allow(clippy::too_many_arguments)]
#[inline]
fn step_kernel(
    packed: &[f64],
    bias: &[f64],
    xh: &[f64],
    c_prev: &[f64],
    gates: &mut [f64],
    c: &mut [f64],
    tc: &mut [f64],
    h: &mut [f64],
) {
    let m = c.len();
    let width = xh.len();
    for (r, (z, &br)) in gates.iter_mut().zip(bias).enumerate() {
        let pre = dot(&packed[r * width..(r + 1) * width], xh) + br;
        *z = if r >= 3 * m { tanh(pre) } else { sigmoid(pre) };
    }
    let (i, rest) = gates.split_at(m);
    let (f, rest) = rest.split_at(m);
    let (o, th) = rest.split_at(m);
    for k in 0..m {
        c[k] = f[k] * c_prev[k] + i[k] * th[k];
        tc[k] = tanh(c[k]);
        h[k] = o[k] * tc[k];
    }
}

/// Forward activations of one zero-initialized sequence, kept for BPTT.
#[derive(Debug, Clone, Default)]
pub struct LstmTrace {
    tau: usize,
    n: usize,
    m: usize,
    /// `tau x (n + m)`: input and previous hidden state of every step.
    xh: Vec<f64>,
    packed: Vec<f64>,
    bias: Vec<f64>,
    /// `(tau + 1) x m`; row 0 is the zero initial state.
    h: Vec<f64>,
    c: Vec<f64>,
    /// `tau x 4m`.
    gates: Vec<f64>,
    tc: Vec<f64>,
}

impl LstmTrace {
    pub fn new() -> Self {
        Self::default()
    }

    fn reset(&mut self, tau: usize, n: usize, m: usize) {
        self.tau = tau;
        self.n = n;
        self.m = m;
        self.xh.clear();
        self.xh.resize(tau * (n + m), 0.0);
        self.h.clear();
        self.h.resize((tau + 1) * m, 0.0);
        self.c.clear();
        self.c.resize((tau + 1) * m, 0.0);
        self.gates.resize(tau * 4 * m, 0.0);
        self.tc.resize(tau * m, 0.0);
    }

    pub fn len(&self) -> usize {
        self.tau
    }

    pub fn is_empty(&self) -> bool {
        self.tau == 0
    }

    /// Hidden state after step `t`.
    pub fn h(&self, t: usize) -> &[f64] {
        &self.h[(t + 1) * self.m..(t + 2) * self.m]
    }

    /// Memory cell after step `t`.
    pub fn c(&self, t: usize) -> &[f64] {
        &self.c[(t + 1) * self.m..(t + 2) * self.m]
    }

    /// All emitted hidden states, `tau x m`.
    pub fn hiddens(&self) -> &[f64] {
        &self.h[self.m..]
    }

    /// All emitted memory cells, `tau x m`.
    pub fn cells(&self) -> &[f64] {
        &self.c[self.m..]
    }

    /// State after step `t`.
    pub fn state(&self, t: usize) -> LstmState {
        LstmState {
            h: self.h(t).to_vec(),
            c: self.c(t).to_vec(),
        }
    }
}

/// LSTM layer whose weights are [`Param`]s. When every parameter is frozen the
/// backward pass still propagates gradients to its inputs but leaves the
/// parameter gradients untouched.
#[derive(Debug, Clone)]
pub struct LstmCell {
    w: [Param; 4],
    u: [Param; 4],
    b: [Param; 4],
}

impl LstmCell {
    pub fn new(prefix: &str, input: usize, hidden: usize, rng: &mut Rng) -> Self {
        let w = core::array::from_fn(|_| uniform_init(hidden, input, input, rng));
        let u = core::array::from_fn(|_| uniform_init(hidden, hidden, hidden, rng));
        let b = core::array::from_fn(|_| uniform_init(hidden, 1, input + hidden, rng).into_vec());
        LstmCell::from_params(prefix, &LstmCellParams { w, u, b }, false)
    }

    pub fn from_params(prefix: &str, p: &LstmCellParams, frozen: bool) -> Self {
        let make = |leaf: alloc::string::String, value: Matrix| {
            if frozen {
                Param::frozen(leaf, value)
            } else {
                Param::new(leaf, value)
            }
        };
        LstmCell {
            w: core::array::from_fn(|g| make(format!("{prefix}.W_{}", GATES[g]), p.w[g].clone())),
            u: core::array::from_fn(|g| make(format!("{prefix}.U_{}", GATES[g]), p.u[g].clone())),
            b: core::array::from_fn(|g| {
                make(format!("{prefix}.b_{}", GATES[g]), Matrix::column(&p.b[g]))
            }),
        }
    }

    pub fn to_params(&self) -> LstmCellParams {
        LstmCellParams {
            w: core::array::from_fn(|g| self.w[g].value().clone()),
            u: core::array::from_fn(|g| self.u[g].value().clone()),
            b: core::array::from_fn(|g| self.b[g].value().as_slice().to_vec()),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.w[0].value().cols()
    }

    pub fn hidden_dim(&self) -> usize {
        self.w[0].value().rows()
    }

    pub fn is_frozen(&self) -> bool {
        self.params().iter().all(|p| p.is_frozen())
    }

    /// Runs `tau` steps from the zero state over `xs` (`tau x n`, row-major).
    pub fn forward_sequence(&self, xs: &[f64], tau: usize, trace: &mut LstmTrace) {
        let (n, m) = (self.input_dim(), self.hidden_dim());
        debug_assert_eq!(xs.len(), tau * n);
        trace.reset(tau, n, m);
        pack(
            [self.w[0].value(), self.w[1].value(), self.w[2].value(), self.w[3].value()],
            [self.u[0].value(), self.u[1].value(), self.u[2].value(), self.u[3].value()],
            [
                self.b[0].value().as_slice(),
                self.b[1].value().as_slice(),
                self.b[2].value().as_slice(),
                self.b[3].value().as_slice(),
            ],
            &mut trace.packed,
            &mut trace.bias,
        );
        let width = n + m;
        for t in 0..tau {
            let xh = &mut trace.xh[t * width..(t + 1) * width];
            xh[..n].copy_from_slice(&xs[t * n..(t + 1) * n]);
            xh[n..].copy_from_slice(&trace.h[t * m..(t + 1) * m]);
            let h_next = &mut trace.h[(t + 1) * m..];
            let (c_done, c_next) = trace.c.split_at_mut((t + 1) * m);
            step_kernel(
                &trace.packed,
                &trace.bias,
                &trace.xh[t * width..(t + 1) * width],
                &c_done[t * m..],
                &mut trace.gates[t * 4 * m..(t + 1) * 4 * m],
                &mut c_next[..m],
                &mut trace.tc[t * m..(t + 1) * m],
                &mut h_next[..m],
            );
        }
    }

    /// Backpropagation through time.
    ///
    /// `dh` (`tau x m`) is the loss gradient w.r.t. every emitted hidden state
    /// and `dc`, when present, w.r.t. every emitted memory cell. Gradients for
    /// the inputs are added into `dx` (`tau x n`).
    pub fn backward_sequence(
        &mut self,
        trace: &LstmTrace,
        dh: &[f64],
        dc: Option<&[f64]>,
        mut dx: Option<&mut [f64]>,
    ) {
        let (tau, n, m) = (trace.tau, trace.n, trace.m);
        debug_assert_eq!(dh.len(), tau * m);
        let width = n + m;
        let accumulate = !self.is_frozen();
        let mut d_packed = if accumulate { vec![0.0; 4 * m * width] } else { Vec::new() };
        let mut dh_next = vec![0.0; m];
        let mut dc_next = vec![0.0; m];
        let mut dz = vec![0.0; 4 * m];
        let mut dxh = vec![0.0; width];
        for t in (0..tau).rev() {
            let gates = &trace.gates[t * 4 * m..(t + 1) * 4 * m];
            let (i, rest) = gates.split_at(m);
            let (f, rest) = rest.split_at(m);
            let (o, th) = rest.split_at(m);
            let tc = &trace.tc[t * m..(t + 1) * m];
            let c_prev = &trace.c[t * m..(t + 1) * m];
            let xh = &trace.xh[t * width..(t + 1) * width];
            for k in 0..m {
                let dhk = dh[t * m + k] + dh_next[k];
                let mut dck = dc_next[k] + dhk * o[k] * (1.0 - tc[k] * tc[k]);
                if let Some(dc) = dc {
                    dck += dc[t * m + k];
                }
                let d_o = dhk * tc[k];
                let d_i = dck * th[k];
                let d_th = dck * i[k];
                let d_f = dck * c_prev[k];
                dz[k] = d_i * i[k] * (1.0 - i[k]);
                dz[m + k] = d_f * f[k] * (1.0 - f[k]);
                dz[2 * m + k] = d_o * o[k] * (1.0 - o[k]);
                dz[3 * m + k] = d_th * (1.0 - th[k] * th[k]);
                dc_next[k] = dck * f[k];
            }
            dxh.iter_mut().for_each(|v| *v = 0.0);
            for (r, &z) in dz.iter().enumerate() {
                if z == 0.0 {
                    continue;
                }
                let row = &trace.packed[r * width..(r + 1) * width];
                for (d, &p) in dxh.iter_mut().zip(row) {
                    *d += z * p;
                }
                if accumulate {
                    let grad = &mut d_packed[r * width..(r + 1) * width];
                    for (gr, &v) in grad.iter_mut().zip(xh) {
                        *gr += z * v;
                    }
                }
            }
            if accumulate {
                for g in 0..4 {
                    let gb = self.b[g].grad_mut().as_mut_slice();
                    for (b, &z) in gb.iter_mut().zip(&dz[g * m..(g + 1) * m]) {
                        *b += z;
                    }
                }
            }
            if let Some(dx) = dx.as_deref_mut() {
                for (d, &v) in dx[t * n..(t + 1) * n].iter_mut().zip(&dxh[..n]) {
                    *d += v;
                }
            }
            dh_next.copy_from_slice(&dxh[n..]);
        }
        if accumulate {
            for g in 0..4 {
                let (wg, ug) = (self.w[g].grad_mut(), self.u[g].grad_mut());
                for r in 0..m {
                    let row = &d_packed[(g * m + r) * width..(g * m + r + 1) * width];
                    for (a, &v) in wg.row_mut(r).iter_mut().zip(&row[..n]) {
                        *a += v;
                    }
                    for (a, &v) in ug.row_mut(r).iter_mut().zip(&row[n..]) {
                        *a += v;
                    }
                }
            }
        }
    }
}

impl Parameterized for LstmCell {
    fn params(&self) -> Vec<&Param> {
        self.w.iter().chain(&self.u).chain(&self.b).collect()
    }

    fn params_mut(&mut self) -> Vec<&mut Param> {
        self.w
            .iter_mut()
            .chain(self.u.iter_mut())
            .chain(self.b.iter_mut())
            .collect()
    }
}
