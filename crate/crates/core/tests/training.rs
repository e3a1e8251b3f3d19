//! Seeded end-to-end runs on small synthetic data.

use ukadf_core::artifact::{ArtifactMetadata, PretrainedArtifact};
use ukadf_core::data::{make_windows, synth_generate, DemandMatrix, SynthConfig};
use ukadf_core::models::{ha_forecast, lr_fit_forecast, LinearAutoregression, VariantKind};
use ukadf_core::nn::Matrix;
use ukadf_core::train::{prepare, run_pretrain, run_variant, sweep, RunConfig};

fn pair(steps: usize) -> Vec<DemandMatrix> {
    synth_generate(&SynthConfig {
        mode_station_counts: vec![4, 3],
        total_steps: steps,
        ..SynthConfig::default()
    })
    .unwrap()
}

fn small(variant: VariantKind) -> RunConfig {
    RunConfig {
        tau: 4,
        batch_size: 16,
        lr: 1e-3,
        epochs: 6,
        embed_dim: 3,
        hidden_dim: 5,
        seed: 5,
        variant,
        ..RunConfig::default()
    }
}

fn pretrained(modes: &[DemandMatrix]) -> PretrainedArtifact {
    run_pretrain(&modes[0], &small(VariantKind::UnKadf), ArtifactMetadata::new("m0", "test"))
        .unwrap()
        .0
}

#[test]
fn pretraining_halves_the_loss() {
    let data = pair(500).remove(0);
    let cfg = RunConfig {
        tau: 3,
        embed_dim: 3,
        hidden_dim: 5,
        epochs: 50,
        lr: 1e-3,
        batch_size: 16,
        patience: None,
        ..RunConfig::default()
    };
    let (artifact, result) = run_pretrain(&data, &cfg, ArtifactMetadata::new("m0", "test")).unwrap();
    assert_eq!(data.stations(), 4);
    assert_eq!(result.trace.len(), 50);
    let first = result.trace[0].train.total;
    let last = result.trace[49].train.total;
    assert!(last < 0.5 * first, "{first} -> {last}");
    assert_eq!((artifact.embed_dim(), artifact.hidden_dim()), (3, 5));
}

#[test]
fn zero_weights_reduce_to_encoder_lstm() {
    let modes = pair(400);
    let artifact = pretrained(&modes);
    let zero = RunConfig {
        gamma: 0.0,
        beta: 0.0,
        ..small(VariantKind::UnKadf)
    };
    let full = run_variant(&modes[1], &zero, Some(&artifact)).unwrap();
    let plain = run_variant(&modes[1], &small(VariantKind::EncoderLstm), None).unwrap();
    assert_eq!(full.trace.len(), plain.trace.len());
    for (a, b) in full.trace.iter().zip(&plain.trace) {
        assert!((a.train.prediction - b.train.prediction).abs() <= 1e-9);
        assert!((a.val_loss - b.val_loss).abs() <= 1e-9);
    }
    for (a, b) in full.test_predictions.as_slice().iter().zip(plain.test_predictions.as_slice()) {
        assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
    }
}

#[test]
fn runs_are_deterministic() {
    let modes = pair(400);
    let artifact = pretrained(&modes);
    assert_eq!(artifact.to_bytes(), pretrained(&modes).to_bytes());
    for kind in VariantKind::ALL {
        let a = run_variant(&modes[1], &small(kind), Some(&artifact)).unwrap();
        let b = run_variant(&modes[1], &small(kind), Some(&artifact)).unwrap();
        assert_eq!(a.to_kv(), b.to_kv(), "{kind}");
        assert_eq!(a.test_predictions, b.test_predictions, "{kind}");
        assert_eq!(a.trace_csv(), b.trace_csv(), "{kind}");
    }
}

#[test]
fn adapter_stays_frozen_at_every_epoch() {
    let modes = pair(400);
    let artifact = pretrained(&modes);
    for kind in [VariantKind::UnKadf, VariantKind::EncoderAdaptation] {
        let r = run_variant(&modes[1], &small(kind), Some(&artifact)).unwrap();
        assert_eq!(r.frozen_checks, r.trace.len() + 1, "{kind}");
    }
    let r = run_variant(&modes[1], &small(VariantKind::EncoderLstm), None).unwrap();
    assert_eq!(r.frozen_checks, 0);
}

#[test]
fn incompatible_artifact_is_rejected() {
    let modes = pair(400);
    let artifact = pretrained(&modes);
    let cfg = RunConfig {
        hidden_dim: 6,
        ..small(VariantKind::UnKadf)
    };
    let err = run_variant(&modes[1], &cfg, Some(&artifact)).unwrap_err();
    assert_eq!(err.class(), "incompatible-artifact");
    let err = run_variant(&modes[1], &small(VariantKind::UnKadf), None).unwrap_err();
    assert_eq!(err.class(), "config");
}

fn constant(t: usize, n: usize, v: f64) -> DemandMatrix {
    DemandMatrix::from_values(Matrix::from_vec(t, n, vec![v; t * n]).unwrap()).unwrap()
}

#[test]
fn historical_average_of_constant_demand() {
    let d = constant(100, 2, 7.0);
    let f = ha_forecast(&d, &[0, 5, 23, 24, 500]);
    assert!(f.as_slice().iter().all(|v| *v == 7.0));
}

#[test]
fn linear_autoregression_recovers_an_exact_recursion() {
    // x[t+1] = 0.5 x[t] + 0.25 x[t-1] + 1, started off its fixed point.
    let mut x = vec![3.0, -2.0];
    for t in 2..200 {
        let next = 0.5 * x[t - 1] + 0.25 * x[t - 2] + 1.0;
        x.push(next + if t % 7 == 0 { 0.5 } else { 0.0 });
    }
    let m = Matrix::from_vec(200, 1, x).unwrap();
    let w = make_windows(&m, 2).unwrap();
    let fit = LinearAutoregression::fit(&w).unwrap();
    let train_pred = lr_fit_forecast(&w, &w).unwrap();
    assert_eq!(train_pred.shape(), (w.len(), 1));
    let coef = fit.coefficients(0);
    assert_eq!(coef.len(), 3);
    let mut sse = 0.0;
    for k in 0..w.len() {
        let target = m.get(w.final_target_row(k), 0);
        sse += (train_pred.get(k, 0) - target).powi(2);
    }
    // The least-squares fit can be no worse than the generating recursion.
    let mut sse_true = 0.0;
    for k in 0..w.len() {
        let inp = w.inputs(k);
        let target = m.get(w.final_target_row(k), 0);
        sse_true += (0.5 * inp[1] + 0.25 * inp[0] + 1.0 - target).powi(2);
    }
    assert!(sse <= sse_true + 1e-9, "{sse} > {sse_true}");
}

#[test]
fn sweep_selects_lowest_validation_loss() {
    let modes = pair(300);
    let artifact = pretrained(&modes);
    let cfg = RunConfig {
        epochs: 3,
        ..small(VariantKind::UnKadf)
    };
    let grid = [0.1, 0.5, 1.0];
    let result = sweep(&modes[1], &artifact, &cfg, &grid, &grid).unwrap();
    assert_eq!(result.points.len(), 9);
    let best = result.best_point();
    for p in &result.points {
        assert!(best.result.best_val_loss.unwrap() <= p.result.best_val_loss.unwrap());
    }
    let seeds: Vec<u64> = result.points.iter().map(|p| p.seed).collect();
    assert_eq!(seeds, (5..14).collect::<Vec<_>>());
    assert!(result.mae_std.is_finite() && result.mae_std >= 0.0);
}

#[test]
fn evaluation_uses_denormalized_test_rows() {
    let modes = pair(400);
    let cfg = small(VariantKind::HistoricalAverage);
    let prepared = prepare(&modes[1], &cfg).unwrap();
    let r = run_variant(&modes[1], &cfg, None).unwrap();
    assert_eq!(r.test_actuals, prepared.test_actuals());
    assert_eq!(r.test_actuals.rows(), prepared.split.test.steps() - cfg.tau);
    assert!(r.test_mae() > 0.0 && r.test_mae() < 50.0);
    assert!(r.trace.is_empty());
}
