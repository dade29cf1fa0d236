use lyaplab::estimators::{lde_curve, wilson_interval, LdeConfig, LdeStatistic};
use lyaplab::linalg::{GroupMode, Matrix, ProjPoint};
use lyaplab::measures::MatrixMeasure;
use lyaplab::walk::{run_products, WalkConfig};

fn sic() -> MatrixMeasure<f64> {
    MatrixMeasure::uniform(vec![
        Matrix::real([[2.0, 1.0], [1.0, 1.0]], GroupMode::SL).unwrap(),
        Matrix::real([[1.0, 1.0], [1.0, 2.0]], GroupMode::SL).unwrap(),
    ])
    .unwrap()
}

#[test]
fn small_pairings_become_rare() {
    // fraction of trials with f(A_n x)/(‖f‖‖A_n x‖) ≤ e^{−εn}
    let eps = 0.05;
    let f = ProjPoint::new(vec![0.8, -0.6], true).unwrap();
    let x = ProjPoint::new(vec![1.0, 0.2], false).unwrap();
    let mut fracs = Vec::new();
    for (i, n) in [4usize, 8, 16, 32, 64].into_iter().enumerate() {
        let cfg = WalkConfig::new(sic(), n, 20_000, 40 + i as u64).with_x0(x.clone()).with_functional(f.clone());
        let recs = run_products(&cfg).unwrap();
        // unit-norm f, so the coefficient only needs the vector norm removed
        let hits = recs
            .iter()
            .filter(|r| r.log_coeff.unwrap() - r.log_vec_norm.unwrap() <= -eps * n as f64)
            .count();
        fracs.push((hits as u64, recs.len() as u64));
    }
    for w in fracs.windows(2) {
        let (lo_prev, hi_prev) = wilson_interval(w[0].0, w[0].1, 1.96);
        let (lo, _) = wilson_interval(w[1].0, w[1].1, 1.96);
        assert!(lo <= hi_prev + 2.0 * (hi_prev - lo_prev), "{fracs:?}");
    }
    let p = |k: (u64, u64)| k.0 as f64 / k.1 as f64;
    assert!(p(fracs[4]) < 0.5 * p(fracs[0]), "{fracs:?}");
}

#[test]
fn lde_curve_is_non_increasing_up_to_ci_overlap() {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let cfg = LdeConfig::new(sic(), LdeStatistic::VecNorm, 0.15, vec![10, 20, 40, 80], 4000, 3)
        .with_x0(ProjPoint::new(vec![1.0, -phi], false).unwrap());
    let curve = lde_curve(&cfg).unwrap();
    for w in curve.rows.windows(2) {
        let width = w[0].wilson_ci.1 - w[0].wilson_ci.0;
        assert!(w[1].p_hat <= w[0].p_hat + 2.0 * width, "{:?}", curve.rows);
    }
}
