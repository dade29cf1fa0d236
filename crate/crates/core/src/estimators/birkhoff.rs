use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{GroupMode, RealMatrix, RealProjPoint};
use crate::measures::RealMeasure;
use crate::rng::split_seed;
use crate::walk::{chain_fold, cocycle, ChainConfig, DEFAULT_BURN_IN};

use super::lde::{wilson_interval, LdeCurve, LdeRow, LdeStatistic};
use crate::measures::Estimate;

/// Continuous functions on real projective space, evaluated at unit
/// representatives.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChainFunctional {
    Constant { value: f64 },
    /// `x_i²`.
    CoordSquared { i: usize },
    /// `x_i x_j`.
    PairCorrelation { i: usize, j: usize },
    /// `Φ(g, x) = log(‖gx‖/‖x‖)` for a fixed `g`, given by rows.
    CocycleSlice { g: Vec<Vec<f64>> },
}

impl ChainFunctional {
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let coord = |i: usize| {
            x.get(i).copied().ok_or_else(|| Error::InvalidArgument(format!("coordinate {i} out of range")))
        };
        match self {
            ChainFunctional::Constant { value } => Ok(*value),
            ChainFunctional::CoordSquared { i } => Ok(coord(*i)?.powi(2)),
            ChainFunctional::PairCorrelation { i, j } => Ok(coord(*i)? * coord(*j)?),
            ChainFunctional::CocycleSlice { g } => cocycle(&RealMatrix::from_rows(g.clone(), GroupMode::GL)?, x),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BirkhoffConfig {
    pub measure: RealMeasure,
    pub functional: ChainFunctional,
    pub x0: RealProjPoint,
    pub eps: f64,
    pub n_grid: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    /// Length of the independent chain estimating `∫ f dν`.
    pub reference_steps: usize,
    pub workers: usize,
}

impl BirkhoffConfig {
    pub fn new(
        measure: RealMeasure,
        functional: ChainFunctional,
        x0: RealProjPoint,
        eps: f64,
        n_grid: Vec<usize>,
        trials: usize,
        seed: u64,
    ) -> Self {
        Self { measure, functional, x0, eps, n_grid, trials, seed, reference_steps: 200_000, workers: 0 }
    }
}

/// Deviation frequencies of Birkhoff averages `(1/n) Σ_{k≤n} f(x_k)` started
/// at `x₀`, centred at a long-chain estimate of `∫ f dν`.
pub fn birkhoff_lde(cfg: &BirkhoffConfig) -> Result<LdeCurve> {
    if !(cfg.eps >= 0.0) || cfg.n_grid.is_empty() || cfg.trials == 0 || cfg.n_grid.contains(&0) {
        return Err(Error::InvalidArgument("need eps >= 0, a positive grid and trials >= 1".into()));
    }
    let f = &cfg.functional;
    let reference = match f {
        ChainFunctional::Constant { value } => Estimate::exact(*value, 0, cfg.seed),
        _ => {
            let chains = 8;
            let rc = ChainConfig::new(
                cfg.measure.clone(),
                cfg.x0.clone(),
                cfg.reference_steps.div_ceil(chains),
                split_seed(cfg.seed, u64::MAX),
            )
            .with_chains(chains)
            .with_burn_in(DEFAULT_BURN_IN);
            let rc = ChainConfig { workers: cfg.workers, ..rc };
            let sums = chain_fold(&rc, |_| 0.0, |acc: &mut f64, s| {
                *acc += f.eval(s.x_next.coords())?;
                Ok(())
            })?;
            let means: Vec<f64> = sums.iter().map(|s| s / rc.steps as f64).collect();
            Estimate::from_samples(&means, cfg.seed)
        }
    };
    let mut rows = Vec::with_capacity(cfg.n_grid.len());
    for &n in &cfg.n_grid {
        let c = ChainConfig::new(cfg.measure.clone(), cfg.x0.clone(), n, split_seed(cfg.seed, n as u64))
            .with_chains(cfg.trials)
            .with_burn_in(0);
        let c = ChainConfig { workers: cfg.workers, ..c };
        let sums = chain_fold(&c, |_| 0.0, |acc: &mut f64, s| {
            *acc += f.eval(s.x_next.coords())?;
            Ok(())
        })?;
        let k = sums.iter().filter(|s| (*s / n as f64 - reference.point).abs() > cfg.eps).count() as u64;
        let t = sums.len() as u64;
        rows.push(LdeRow {
            n,
            eps: cfg.eps,
            p_hat: k as f64 / t as f64,
            wilson_ci: wilson_interval(k, t, 1.959_963_984_540_054),
            exceedances: k,
            trials: t,
        });
    }
    Ok(LdeCurve {
        rows,
        measure: cfg.measure.describe(),
        statistic: LdeStatistic::Birkhoff,
        lambda: reference,
        warnings: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{Family, MatrixMeasure};

    fn x0() -> RealProjPoint {
        RealProjPoint::new(vec![0.3, 1.0], false).unwrap()
    }

    #[test]
    fn constant_functional_never_deviates() {
        let m = MatrixMeasure::family(Family::RotationUniform).unwrap();
        let cfg = BirkhoffConfig::new(m, ChainFunctional::Constant { value: 2.0 }, x0(), 1e-3, vec![5, 10], 50, 1);
        assert!(birkhoff_lde(&cfg).unwrap().rows.iter().all(|r| r.p_hat == 0.0));
    }

    #[test]
    fn rotation_chain_second_moment() {
        let m = MatrixMeasure::family(Family::RotationUniform).unwrap();
        let mut cfg = BirkhoffConfig::new(m, ChainFunctional::CoordSquared { i: 0 }, x0(), 0.1, vec![5, 20, 80], 2000, 2);
        cfg.reference_steps = 100_000;
        let c = birkhoff_lde(&cfg).unwrap();
        assert!((c.lambda.point - 0.5).abs() < 0.01, "{}", c.lambda.point);
        assert!(c.rows[0].p_hat > c.rows[1].p_hat && c.rows[1].p_hat > c.rows[2].p_hat, "{:?}", c.rows);
    }

    #[test]
    fn contracting_chain_settles_at_the_fixed_point() {
        let d = RealMatrix::real_diag(&[2.0, 0.5], GroupMode::SL).unwrap();
        let m = MatrixMeasure::dirac(d);
        let mut cfg = BirkhoffConfig::new(m, ChainFunctional::CoordSquared { i: 0 }, x0(), 0.05, vec![200], 10, 3);
        cfg.reference_steps = 2000;
        let c = birkhoff_lde(&cfg).unwrap();
        assert!((c.lambda.point - 1.0).abs() < 1e-12);
        assert_eq!(c.rows[0].p_hat, 0.0);
    }
}
