use lyaplab::linalg::{GroupMode, Matrix, RealMatrix};
use lyaplab::measures::{GaugeSpec, MatrixMap, MatrixMeasure};
use lyaplab::rng::CounterRng;
use lyaplab::transport::{cost_matrix, distance_matrix, pushforward, w_concave_exact};
use proptest::prelude::*;

const GAUGES: [GaugeSpec; 5] = [
    GaugeSpec::Log { p: 1.0 },
    GaugeSpec::Log { p: 2.5 },
    GaugeSpec::Slog { delta: 0.5 },
    GaugeSpec::Frac { alpha: 0.3 },
    GaugeSpec::Identity,
];

fn random_sl(rng: &mut CounterRng, d: usize, spread: f64) -> RealMatrix {
    loop {
        let data: Vec<f64> = (0..d * d).map(|_| spread * (2.0 * rng.uniform() - 1.0)).collect();
        let mut m = Matrix::new_unchecked(d, data, GroupMode::GL).unwrap();
        let det = m.det().unwrap();
        if det.abs() < 1e-2 {
            continue;
        }
        if det < 0.0 {
            for j in 0..d {
                let v = -*m.get(0, j);
                m.set(0, j, v);
            }
        }
        m.scale_in_place(det.abs().powf(-1.0 / d as f64));
        return m.with_mode(GroupMode::SL);
    }
}

fn random_measure(rng: &mut CounterRng, atoms: usize) -> MatrixMeasure<f64> {
    let list = (0..atoms).map(|_| (random_sl(rng, 2, 3.0), 0.05 + rng.uniform())).collect::<Vec<_>>();
    let total: f64 = list.iter().map(|x| x.1).sum();
    MatrixMeasure::atoms(list.into_iter().map(|(m, w)| (m, w / total)).collect()).unwrap()
}

fn w(a: &MatrixMeasure<f64>, b: &MatrixMeasure<f64>, g: &GaugeSpec) -> f64 {
    let plan = w_concave_exact(a, b, g).unwrap();
    assert!(plan.duality_gap >= 0.0 && plan.dual_value() <= plan.primal_cost);
    assert!(plan.duality_gap <= 1e-7 * plan.primal_cost.max(1.0));
    plan.value()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn concave_wasserstein_is_a_metric(seed in any::<u64>(), na in 1usize..=16, nb in 1usize..=16, nc in 1usize..=16) {
        let mut rng = CounterRng::new(seed);
        let (a, b, c) = (random_measure(&mut rng, na), random_measure(&mut rng, nb), random_measure(&mut rng, nc));
        for g in &GAUGES {
            let ab = w(&a, &b, g);
            prop_assert!((ab - w(&b, &a, g)).abs() <= 1e-9, "symmetry for {g}");
            prop_assert!(w(&a, &c, g) <= ab + w(&b, &c, g) + 1e-9, "triangle for {g}");
            prop_assert!(w(&a, &a, g).abs() <= 1e-12);
        }
    }
}

#[test]
fn gauge_monotonicity_on_realized_distances() {
    let mut rng = CounterRng::new(77);
    let mut compared = 0usize;
    for _ in 0..60 {
        let na = 1 + rng.below(8);
        let nb = 1 + rng.below(8);
        let (a, b) = (random_measure(&mut rng, na), random_measure(&mut rng, nb));
        let dist: Vec<f64> = distance_matrix(&a, &b).unwrap().into_iter().flatten().collect();
        for g1 in &GAUGES {
            for g2 in &GAUGES {
                if dist.iter().all(|&d| g1.eval(d) <= g2.eval(d)) {
                    compared += 1;
                    assert!(w(&a, &b, g1) <= w(&a, &b, g2) + 1e-9, "{g1} vs {g2}");
                }
            }
        }
    }
    assert!(compared > 300, "only {compared} comparable gauge pairs");
}

#[test]
fn cost_matrix_is_gauge_of_distance() {
    let mut rng = CounterRng::new(3);
    let (a, b) = (random_measure(&mut rng, 5), random_measure(&mut rng, 4));
    let d = distance_matrix(&a, &b).unwrap();
    let g = GaugeSpec::Slog { delta: 0.5 };
    let c = cost_matrix(&a, &b, &g).unwrap();
    for (dr, cr) in d.iter().zip(&c) {
        for (x, y) in dr.iter().zip(cr) {
            assert_eq!(g.eval(*x), *y);
        }
    }
}

#[test]
fn wedge_pushforwards_converge_with_the_measures() {
    // μ_k: every atom of μ perturbed by 2^{−k}·E_i and renormalized to SL₃
    let mut rng = CounterRng::new(2718);
    let base: Vec<RealMatrix> = (0..4).map(|_| random_sl(&mut rng, 3, 2.0)).collect();
    let dirs: Vec<Vec<f64>> = (0..4).map(|_| (0..9).map(|_| 2.0 * rng.uniform() - 1.0).collect()).collect();
    let mu = MatrixMeasure::uniform(base.clone()).unwrap();
    let wedge_mu = pushforward(&mu, MatrixMap::Wedge2).unwrap();
    let (mut slog, mut wedge) = (Vec::new(), Vec::new());
    for k in 1..=14 {
        let eps = 0.5f64.powi(k);
        let atoms: Vec<RealMatrix> = base
            .iter()
            .zip(&dirs)
            .map(|(m, e)| {
                let data: Vec<f64> = m.entries().iter().zip(e).map(|(x, y)| x + eps * y).collect();
                let mut p = Matrix::new_unchecked(3, data, GroupMode::GL).unwrap();
                let det = p.det().unwrap();
                p.scale_in_place(det.powf(-1.0 / 3.0));
                p.with_mode(GroupMode::SL)
            })
            .collect();
        let mu_k = MatrixMeasure::uniform(atoms).unwrap();
        slog.push(w(&mu_k, &mu, &GaugeSpec::Slog { delta: 0.5 }));
        wedge.push(w(&pushforward(&mu_k, MatrixMap::Wedge2).unwrap(), &wedge_mu, &GaugeSpec::Log { p: 1.0 }));
    }
    let burn_in = 3;
    assert!(slog.windows(2).skip(burn_in).all(|p| p[1] < p[0]), "{slog:?}");
    assert!(wedge.windows(2).skip(burn_in).all(|p| p[1] < p[0]), "{wedge:?}");
    assert!(*slog.last().unwrap() < 1e-3 && *wedge.last().unwrap() < 1e-3);
}
