//! The LSTM cell against a scalar-loop implementation written from the gate
//! equations, and against the closed form of the all-zero cell.

use ukadf_core::nn::{lstm_step, LstmCell, LstmCellParams, LstmState, LstmTrace};
use ukadf_core::rng;

fn sig(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// One step with explicit loops over every weight.
fn scalar_step(x: &[f64], h: &[f64], c: &[f64], p: &LstmCellParams) -> (Vec<f64>, Vec<f64>) {
    let m = h.len();
    let mut pre = [vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]];
    for g in 0..4 {
        for r in 0..m {
            let mut s = p.b[g][r];
            for (j, xj) in x.iter().enumerate() {
                s += p.w[g].get(r, j) * xj;
            }
            for (j, hj) in h.iter().enumerate() {
                s += p.u[g].get(r, j) * hj;
            }
            pre[g][r] = s;
        }
    }
    let mut h2 = vec![0.0; m];
    let mut c2 = vec![0.0; m];
    for r in 0..m {
        let i = sig(pre[0][r]);
        let f = sig(pre[1][r]);
        let o = sig(pre[2][r]);
        let th = pre[3][r].tanh();
        c2[r] = f * c[r] + i * th;
        h2[r] = o * c2[r].tanh();
    }
    (h2, c2)
}

fn uniform(len: usize, r: &mut rng::Rng) -> Vec<f64> {
    use rand::Rng as _;
    (0..len).map(|_| r.random_range(-1.0..1.0)).collect()
}

fn close(a: &[f64], b: &[f64], tol: f64) {
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(b) {
        assert!((x - y).abs() <= tol, "{x} vs {y}");
    }
}

#[test]
fn zero_cell_halves_memory() {
    let p = LstmCellParams::zeros(3, 4);
    let prev = LstmState {
        h: vec![0.3, -0.2, 0.9, 0.0],
        c: vec![2.0, -1.0, 0.5, 0.0],
    };
    let next = lstm_step(&[1.0, -4.0, 7.0], &prev, &p).unwrap();
    for k in 0..4 {
        let c = prev.c[k] / 2.0;
        assert!((next.c[k] - c).abs() <= 1e-12);
        assert!((next.h[k] - 0.5 * c.tanh()).abs() <= 1e-12);
    }
}

#[test]
fn random_steps_match_scalar_loops() {
    let mut r = rng::stream(42, "oracle");
    for _ in 0..25 {
        let p = LstmCellParams::random(2, 2, &mut r);
        let x = uniform(2, &mut r);
        let prev = LstmState {
            h: uniform(2, &mut r),
            c: uniform(2, &mut r),
        };
        let got = lstm_step(&x, &prev, &p).unwrap();
        let (h, c) = scalar_step(&x, &prev.h, &prev.c, &p);
        close(&got.h, &h, 1e-12);
        close(&got.c, &c, 1e-12);
    }
}

#[test]
fn sequences_match_scalar_loops() {
    let mut r = rng::stream(42, "oracle-seq");
    for (n, m, tau) in [(2, 2, 5), (3, 5, 12), (1, 4, 1)] {
        let cell = LstmCell::new("lstm", n, m, &mut r);
        let p = cell.to_params();
        let xs = uniform(n * tau, &mut r);
        let mut trace = LstmTrace::new();
        cell.forward_sequence(&xs, tau, &mut trace);
        let (mut h, mut c) = (vec![0.0; m], vec![0.0; m]);
        for t in 0..tau {
            (h, c) = scalar_step(&xs[t * n..(t + 1) * n], &h, &c, &p);
            close(trace.h(t), &h, 1e-12);
            close(trace.c(t), &c, 1e-12);
        }
    }
}

#[test]
fn frozen_cell_keeps_values_and_passes_gradient_to_inputs() {
    let mut r = rng::stream(3, "frozen");
    let p = LstmCellParams::random(3, 4, &mut r);
    let mut cell = LstmCell::from_params("lstm_a", &p, true);
    let xs = uniform(3 * 5, &mut r);
    let mut trace = LstmTrace::new();
    cell.forward_sequence(&xs, 5, &mut trace);
    let dc = vec![1.0; 4 * 5];
    let mut dx = vec![0.0; 3 * 5];
    cell.backward_sequence(&trace, &vec![0.0; 4 * 5], Some(&dc), Some(&mut dx));
    assert_eq!(cell.to_params(), p);
    assert!(dx.iter().any(|v| *v != 0.0));
}
