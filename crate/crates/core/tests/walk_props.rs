use lyaplab::linalg::{GroupMode, Matrix, ProjPoint};
use lyaplab::measures::{Family, MatrixMeasure};
use lyaplab::scalar::PAdic;
use lyaplab::walk::{run_products, WalkConfig};

fn sic() -> MatrixMeasure<f64> {
    MatrixMeasure::uniform(vec![
        Matrix::real([[2.0, 1.0], [1.0, 1.0]], GroupMode::SL).unwrap(),
        Matrix::real([[1.0, 1.0], [1.0, 2.0]], GroupMode::SL).unwrap(),
    ])
    .unwrap()
}

#[test]
fn records_do_not_depend_on_worker_count() {
    let cfg = WalkConfig::new(sic(), 300, 257, 31)
        .with_x0(ProjPoint::new(vec![1.0, 0.0], false).unwrap())
        .with_functional(ProjPoint::new(vec![0.3, 1.0], true).unwrap())
        .with_wedge()
        .with_gamma()
        .with_trace()
        .with_checkpoints(vec![10, 100]);
    let runs: Vec<_> = [1, 4, 16].iter().map(|&w| run_products(&cfg.clone().with_workers(w)).unwrap()).collect();
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0], runs[2]);

    let padic = MatrixMeasure::<PAdic>::family(Family::PadicDiagonal { p: 3, precision: None, law: vec![(0, 0.3), (2, 0.7)] })
        .unwrap();
    let cfg = WalkConfig::new(padic, 200, 100, 8);
    let runs: Vec<_> = [1, 4, 16].iter().map(|&w| run_products(&cfg.clone().with_workers(w)).unwrap()).collect();
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0], runs[2]);
}

fn mean_log_norm(m: &MatrixMeasure<f64>, n: usize, seed: u64) -> (f64, f64) {
    let recs = run_products(&WalkConfig::new(m.clone(), n, 4000, seed)).unwrap();
    let xs: Vec<f64> = recs.iter().map(|r| r.log_norm).collect();
    let (mean, var) = lyaplab::measures::mean_var(&xs);
    // same rounding floor as lyap_top: about d·u per factor
    let floor = n as f64 * m.dim() as f64 * f64::EPSILON / 2.0 * (1.0 + mean.abs() / n as f64);
    (mean, (var / xs.len() as f64).sqrt().hypot(floor))
}

#[test]
fn expected_log_norm_is_subadditive() {
    let measures = vec![
        sic(),
        MatrixMeasure::family(Family::DiagonalLognormal { mean: 0.2, std: 0.8 }).unwrap(),
        MatrixMeasure::family(Family::RotationUniform).unwrap(),
    ];
    for m in &measures {
        for n in [5, 20, 80] {
            let (e1, s1) = mean_log_norm(m, n, 100 + n as u64);
            let (e2, s2) = mean_log_norm(m, 2 * n, 200 + n as u64);
            assert!(e2 <= 2.0 * e1 + 3.0 * s2.hypot(2.0 * s1), "{}: n = {n}", m.describe());
        }
    }
}
