use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ProjPoint;
use crate::measures::{mean_var, Estimate, MatrixMeasure, MeasureField};
use crate::rng::split_seed;
use crate::walk::{chain_fold, run_products, ChainConfig, TrialRecord, WalkConfig, DEFAULT_BURN_IN};

/// Stream index reserved for auxiliary estimates of λ₁.
pub(crate) const LAMBDA_STREAM: u64 = 0x1A4B_DA00;

/// Walk length, trial count, seed and worker count shared by the estimators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    #[serde(default)]
    pub workers: usize,
}

impl Budget {
    pub fn new(n: usize, trials: usize, seed: u64) -> Self {
        Self { n, trials, seed, workers: 0 }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn walk<F: MeasureField>(&self, m: &MatrixMeasure<F>) -> WalkConfig<F> {
        WalkConfig::new(m.clone(), self.n, self.trials, self.seed).with_workers(self.workers)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum LyapMethod {
    /// Mean of `log‖A_n‖ / n` over trials.
    NormMean,
    /// Average of `Φ(g, x)` with `x` from the stationary chain and `g` a fresh draw.
    FurstenbergIntegral,
}

/// Generic start direction `(1, …, 1)`.
pub(crate) fn ones<F: MeasureField>(m: &MatrixMeasure<F>) -> Result<ProjPoint<F>> {
    let ctx = first_ctx(m)?;
    ProjPoint::new(vec![F::one(ctx); m.dim()], false)
}

pub(crate) fn first_ctx<F: MeasureField>(m: &MatrixMeasure<F>) -> Result<F::Ctx> {
    let mut rng = crate::rng::CounterRng::new(0);
    Ok(m.draw(&mut rng)?.matrix().ctx())
}

/// Top Lyapunov exponent.
pub fn lyap_top<F: MeasureField>(m: &MatrixMeasure<F>, budget: Budget, method: LyapMethod) -> Result<Estimate> {
    match method {
        LyapMethod::NormMean => Ok(norm_mean_records(m, budget)?.0),
        LyapMethod::FurstenbergIntegral => {
            if budget.n == 0 || budget.trials == 0 {
                return Err(Error::InvalidArgument("n and trials must be >= 1".into()));
            }
            // Each chain step pairs x_{k−1} with the independent draw g_k; the
            // per-chain averages are independent replicates.
            let cfg = ChainConfig::new(m.clone(), ones(m)?, budget.n, budget.seed)
                .with_chains(budget.trials)
                .with_burn_in(DEFAULT_BURN_IN);
            let cfg = ChainConfig { workers: budget.workers, ..cfg };
            let sums = chain_fold(&cfg, |_| 0.0, |acc: &mut f64, s| {
                *acc += s.cocycle;
                Ok(())
            })?;
            let xs: Vec<f64> = sums.iter().map(|s| s / budget.n as f64).collect();
            Ok(Estimate::from_samples(&xs, budget.seed))
        }
    }
}

/// Norm-mean estimate together with the per-trial records it was built from.
pub fn norm_mean_records<F: MeasureField>(
    m: &MatrixMeasure<F>,
    budget: Budget,
) -> Result<(Estimate, Vec<TrialRecord<F>>)> {
    let recs = run_products(&budget.walk(m))?;
    let xs: Vec<f64> = recs.iter().map(|r| r.log_norm / budget.n as f64).collect();
    let est = Estimate::from_samples(&xs, budget.seed);
    // every factor multiplication carries relative error up to about d·u, so
    // the growth rate is not resolved below that even with zero sample variance
    let floor = m.dim() as f64 * f64::EPSILON / 2.0 * (1.0 + est.point.abs());
    Ok((Estimate::new(est.point, est.stderr.hypot(floor), est.n_samples, est.seed), recs))
}

/// `λ₁`, `λ₁ + λ₂` and the gap from one set of trials with exterior-square
/// tracking.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Spectrum2 {
    pub top: Estimate,
    pub sum2: Estimate,
    pub gap: Estimate,
}

pub fn lyap_spectrum2<F: MeasureField>(m: &MatrixMeasure<F>, budget: Budget) -> Result<Spectrum2> {
    Ok(spectrum2_records(m, budget)?.0)
}

pub fn spectrum2_records<F: MeasureField>(
    m: &MatrixMeasure<F>,
    budget: Budget,
) -> Result<(Spectrum2, Vec<TrialRecord<F>>)> {
    if m.dim() < 2 {
        return Err(Error::InvalidArgument("the exterior square needs dimension >= 2".into()));
    }
    let recs = run_products(&budget.walk(m).with_wedge())?;
    let n = budget.n as f64;
    let top: Vec<f64> = recs.iter().map(|r| r.log_norm / n).collect();
    let sum2: Vec<f64> = recs.iter().map(|r| r.log_wedge_norm.unwrap_or(f64::NAN) / n).collect();
    // per-trial differences carry the covariance between the two statistics
    let gap: Vec<f64> = top.iter().zip(&sum2).map(|(a, b)| 2.0 * a - b).collect();
    let spec = Spectrum2 {
        top: Estimate::from_samples(&top, budget.seed),
        sum2: Estimate::from_samples(&sum2, budget.seed),
        gap: Estimate::from_samples(&gap, budget.seed),
    };
    Ok((spec, recs))
}

pub fn lyap_sum2<F: MeasureField>(m: &MatrixMeasure<F>, budget: Budget) -> Result<Estimate> {
    Ok(lyap_spectrum2(m, budget)?.sum2)
}

/// `λ₁ − λ₂ = 2λ₁ − (λ₁ + λ₂)`.
pub fn gap<F: MeasureField>(m: &MatrixMeasure<F>, budget: Budget) -> Result<Estimate> {
    Ok(lyap_spectrum2(m, budget)?.gap)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SigmaDirect {
    pub sigma: Estimate,
    /// λ̂₁ from the independent seed.
    pub lambda: Estimate,
    pub warnings: Vec<String>,
}

/// Spread of `(log‖A_n x₀‖ − n λ̂₁) / √n` with a jackknife standard error.
pub fn sigma_direct<F: MeasureField>(m: &MatrixMeasure<F>, x0: &ProjPoint<F>, budget: Budget) -> Result<SigmaDirect> {
    let mut warnings = Vec::new();
    if budget.n < 100 {
        warnings.push(format!("n = {} is below 100; the normal approximation may be poor", budget.n));
    }
    if budget.trials < 3 {
        return Err(Error::InvalidArgument("sigma_direct needs at least 3 trials".into()));
    }
    let lambda_budget = budget.with_seed(split_seed(budget.seed, LAMBDA_STREAM));
    let lambda = lyap_top(m, lambda_budget, LyapMethod::NormMean)?;
    let recs = run_products(&budget.walk(m).with_x0(x0.clone()))?;
    let rn = (budget.n as f64).sqrt();
    let zs: Vec<f64> = recs
        .iter()
        .map(|r| (r.log_vec_norm.expect("x0 set") - budget.n as f64 * lambda.point) / rn)
        .collect();
    let (_, var) = mean_var(&zs);
    let sigma = var.max(0.0).sqrt();
    let stderr = jackknife_sd_stderr(&zs);
    Ok(SigmaDirect { sigma: Estimate::new(sigma, stderr, zs.len() as u64, budget.seed), lambda, warnings })
}

/// Jackknife standard error of the sample standard deviation.
pub fn jackknife_sd_stderr(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let shift = xs.iter().sum::<f64>() / n;
    let s1: f64 = xs.iter().map(|x| x - shift).sum();
    let s2: f64 = xs.iter().map(|x| (x - shift) * (x - shift)).sum();
    let loo: Vec<f64> = xs
        .iter()
        .map(|x| {
            let y = x - shift;
            let (a, b) = (s1 - y, s2 - y * y);
            ((b - a * a / (n - 1.0)) / (n - 2.0)).max(0.0).sqrt()
        })
        .collect();
    let mean = loo.iter().sum::<f64>() / n;
    ((n - 1.0) / n * loo.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{GroupMode, RealMatrix};
    use crate::measures::Family;

    fn diag(a: f64) -> RealMatrix {
        RealMatrix::real_diag(&[a, 1.0 / a], GroupMode::SL).unwrap()
    }

    #[test]
    fn deterministic_top_exponent() {
        let m = MatrixMeasure::dirac(diag(2.0));
        for method in [LyapMethod::NormMean, LyapMethod::FurstenbergIntegral] {
            let e = lyap_top(&m, Budget::new(50, 4, 1), method).unwrap();
            assert!((e.point - 2f64.ln()).abs() < 1e-12, "{method:?} {}", e.point);
        }
    }

    #[test]
    fn three_dimensional_gap() {
        let d = RealMatrix::real_diag(&[4.0, 1.0, 0.25], GroupMode::SL).unwrap();
        let s = lyap_spectrum2(&MatrixMeasure::dirac(d), Budget::new(40, 3, 2)).unwrap();
        assert!((s.sum2.point - 4f64.ln()).abs() < 1e-12);
        assert!((s.gap.point - 4f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn sl2_sum_is_exactly_zero() {
        let a = RealMatrix::real([[2.0, 1.0], [1.0, 1.0]], GroupMode::SL).unwrap();
        let b = RealMatrix::real([[1.0, 1.0], [1.0, 2.0]], GroupMode::SL).unwrap();
        let m = MatrixMeasure::uniform(vec![a, b]).unwrap();
        let s = lyap_spectrum2(&m, Budget::new(100, 40, 3)).unwrap();
        assert_eq!(s.sum2.point, 0.0);
        assert_eq!(s.sum2.stderr, 0.0);
        assert_eq!(s.gap.point, 2.0 * s.top.point);
    }

    #[test]
    fn lognormal_sigma_is_the_scalar_spread() {
        let m = MatrixMeasure::family(Family::DiagonalLognormal { mean: 0.5, std: 0.3 }).unwrap();
        let e1 = ProjPoint::new(vec![1.0, 0.0], false).unwrap();
        let s = sigma_direct(&m, &e1, Budget::new(100, 4000, 5)).unwrap();
        assert!((s.sigma.point - 0.3).abs() < 4.0 * s.sigma.stderr + 1e-3, "{:?}", s.sigma);
        assert!(s.sigma.stderr > 0.0 && s.sigma.stderr < 0.01);
    }

    #[test]
    fn deterministic_sigma_is_zero() {
        let m = MatrixMeasure::dirac(diag(3.0));
        let x = ProjPoint::new(vec![1.0, 1.0], false).unwrap();
        let s = sigma_direct(&m, &x, Budget::new(200, 10, 1)).unwrap();
        assert!(s.sigma.point < 1e-9);
    }

    #[test]
    fn padic_valuation_walk() {
        use crate::scalar::PAdic;
        let m: MatrixMeasure<PAdic> = MatrixMeasure::family(Family::PadicDiagonal {
            p: 5,
            precision: None,
            law: vec![(0, 0.5), (1, 0.5)],
        })
        .unwrap();
        let e = lyap_top(&m, Budget::new(400, 200, 9), LyapMethod::NormMean).unwrap();
        let target = 0.5 * 5f64.ln();
        assert!((e.point - target).abs() < 4.0 * e.stderr, "{} vs {target}", e.point);
    }

    #[test]
    fn jackknife_matches_normal_theory() {
        let mut rng = crate::rng::CounterRng::new(4);
        use rand_distr::{Distribution, StandardNormal};
        let xs: Vec<f64> = (0..20_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let se = jackknife_sd_stderr(&xs);
        let theory = 1.0 / (2.0 * 20_000f64).sqrt();
        assert!((se / theory - 1.0).abs() < 0.1, "{se} vs {theory}");
    }
}
