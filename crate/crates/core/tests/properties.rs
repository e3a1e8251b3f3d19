use proptest::prelude::*;
use ukadf_core::data::{make_windows, split, DemandMatrix, MinMaxScaler, SplitFractions};
use ukadf_core::metrics::{MaskPolicy, Metric, MetricReport};
use ukadf_core::nn::Matrix;
use ukadf_core::verify::dd::Dd;

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(0.0f64..100.0, rows * cols).prop_map(move |v| Matrix::from_vec(rows, cols, v).unwrap())
}

proptest! {
    #[test]
    fn scaler_inverts(m in matrix(20, 3), extra in matrix(5, 3)) {
        let scaler = MinMaxScaler::fit_matrix(&m);
        for part in [&m, &extra] {
            let back = scaler.invert(&scaler.apply(part));
            for (x, y) in back.as_slice().iter().zip(part.as_slice()) {
                prop_assert!((x - y).abs() <= 1e-9 * y.abs().max(1.0));
            }
        }
    }

    #[test]
    fn window_count(t in 2usize..60, tau in 1usize..12) {
        let m = Matrix::zeros(t, 2);
        match make_windows(&m, tau) {
            Ok(w) => {
                prop_assert!(t > tau);
                prop_assert_eq!(w.len(), t - tau);
            }
            Err(_) => prop_assert!(t <= tau),
        }
    }

    #[test]
    fn split_is_contiguous(t in 30usize..400) {
        let d = DemandMatrix::from_values(Matrix::from_vec(t, 1, (0..t).map(|v| v as f64).collect()).unwrap()).unwrap();
        let s = split(&d, SplitFractions::default(), 2).unwrap();
        prop_assert_eq!(s.train.steps() + s.val.steps() + s.test.steps(), t);
        prop_assert_eq!(s.test.values().get(0, 0) as usize, s.train.steps() + s.val.steps());
    }

    #[test]
    fn metric_invariants(p in matrix(12, 4), a in matrix(12, 4), c in 0.1f64..10.0) {
        let r = MetricReport::evaluate(&p, &a, &MaskPolicy::demand()).unwrap();
        let mae = r.get(Metric::Mae).unwrap();
        prop_assert!(mae <= r.get(Metric::Rmse).unwrap() + 1e-12);
        let rrse = r.get(Metric::Rrse).unwrap();
        prop_assert!((r.get(Metric::R2).unwrap() + rrse * rrse - 1.0).abs() <= 1e-9);
        let pnbi = r.get(Metric::Pnbi).unwrap();
        prop_assert!((0.0..=1.0).contains(&pnbi));

        let scale = |m: &Matrix| Matrix::from_vec(m.rows(), m.cols(), m.as_slice().iter().map(|v| v * c).collect()).unwrap();
        let s = MetricReport::evaluate(&scale(&p), &scale(&a), &MaskPolicy::demand()).unwrap();
        prop_assert!((s.get(Metric::Mae).unwrap() - c * mae).abs() <= 1e-9 * c * mae.max(1.0));
        for m in [Metric::Mape, Metric::Smape, Metric::Rrse, Metric::R2, Metric::Corr, Metric::Pnbi, Metric::Opnbi] {
            let (x, y) = (r.get(m).unwrap(), s.get(m).unwrap());
            prop_assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0), "{m}: {x} vs {y}");
        }
    }

    #[test]
    fn double_double_sums_exactly(a in -1e3f64..1e3, b in -1e-12f64..1e-12) {
        let s = Dd::new(a) + Dd::new(b);
        prop_assert_eq!((s - Dd::new(a)).to_f64(), b);
    }
}
