use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ProjPoint;
use crate::measures::{Estimate, MatrixMeasure, MeasureField};
use crate::rng::split_seed;
use crate::walk::{run_products, WalkConfig};

use super::lyapunov::{lyap_top, Budget, LyapMethod, LAMBDA_STREAM};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum LdeStatistic {
    /// `log‖A_n‖`.
    Norm,
    /// `log‖A_n x₀‖`.
    VecNorm,
    /// `log|f(A_n x₀)|`.
    Coeff,
    /// Birkhoff average of a functional along the projective chain.
    Birkhoff,
}

/// Wilson score interval for `k` successes out of `n` at normal quantile `z`.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z / denom * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LdeRow {
    pub n: usize,
    pub eps: f64,
    pub p_hat: f64,
    pub wilson_ci: (f64, f64),
    pub exceedances: u64,
    pub trials: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LdeCurve {
    pub rows: Vec<LdeRow>,
    pub measure: String,
    pub statistic: LdeStatistic,
    /// Centering `λ̂₁`, from a seed independent of the rows.
    pub lambda: Estimate,
    pub warnings: Vec<String>,
}

impl LdeCurve {
    /// CSV with columns `n,eps,p_hat,ci_lo,ci_hi,exceedances,trials`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::InvalidArgument(format!("csv write failed: {e}"));
        w.write_record(["n", "eps", "p_hat", "ci_lo", "ci_hi", "exceedances", "trials"]).map_err(io)?;
        for r in &self.rows {
            w.write_record([
                r.n.to_string(),
                format!("{:.17e}", r.eps),
                format!("{:.17e}", r.p_hat),
                format!("{:.17e}", r.wilson_ci.0),
                format!("{:.17e}", r.wilson_ci.1),
                r.exceedances.to_string(),
                r.trials.to_string(),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::InvalidArgument(format!("csv flush failed: {e}")))?;
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct LdeConfig<F: MeasureField> {
    pub measure: MatrixMeasure<F>,
    pub statistic: LdeStatistic,
    pub eps: f64,
    pub n_grid: Vec<usize>,
    pub trials_per_n: usize,
    pub seed: u64,
    pub x0: Option<ProjPoint<F>>,
    pub functional: Option<ProjPoint<F>>,
    /// Centering value; estimated on an independent stream when absent.
    pub lambda: Option<Estimate>,
    pub workers: usize,
}

impl<F: MeasureField> LdeConfig<F> {
    pub fn new(measure: MatrixMeasure<F>, statistic: LdeStatistic, eps: f64, n_grid: Vec<usize>, trials_per_n: usize, seed: u64) -> Self {
        Self { measure, statistic, eps, n_grid, trials_per_n, seed, x0: None, functional: None, lambda: None, workers: 0 }
    }

    pub fn with_x0(mut self, x0: ProjPoint<F>) -> Self {
        self.x0 = Some(x0);
        self
    }

    pub fn with_functional(mut self, f: ProjPoint<F>) -> Self {
        self.functional = Some(f);
        self
    }

    pub fn with_lambda(mut self, lambda: Estimate) -> Self {
        self.lambda = Some(lambda);
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }
}

/// Deviation frequencies `P̂[|S_n − nλ̂₁| > nε]` along `n_grid`; each grid
/// point uses its own independent trials.
pub fn lde_curve<F: MeasureField>(cfg: &LdeConfig<F>) -> Result<LdeCurve> {
    if !(cfg.eps >= 0.0) || cfg.n_grid.is_empty() || cfg.trials_per_n == 0 {
        return Err(Error::InvalidArgument("need eps >= 0, a nonempty grid and trials >= 1".into()));
    }
    match cfg.statistic {
        LdeStatistic::VecNorm if cfg.x0.is_none() => {
            return Err(Error::InvalidArgument("vec_norm statistic needs x0".into()))
        }
        LdeStatistic::Coeff if cfg.x0.is_none() || cfg.functional.is_none() => {
            return Err(Error::InvalidArgument("coeff statistic needs x0 and a functional".into()))
        }
        LdeStatistic::Birkhoff => {
            return Err(Error::InvalidArgument("Birkhoff curves come from birkhoff_lde".into()))
        }
        _ => {}
    }
    let mut warnings = Vec::new();
    let n_max = *cfg.n_grid.iter().max().expect("nonempty");
    let lambda = match &cfg.lambda {
        Some(l) => l.clone(),
        None => {
            let b = Budget::new(n_max, cfg.trials_per_n.max(30), split_seed(cfg.seed, LAMBDA_STREAM))
                .with_workers(cfg.workers);
            lyap_top(&cfg.measure, b, LyapMethod::NormMean)?
        }
    };
    if cfg.eps > 0.0 && lambda.stderr >= cfg.eps / 10.0 {
        warnings.push(format!("stderr of the centering exponent {:.3e} is not below eps/10", lambda.stderr));
    }
    let mut rows = Vec::with_capacity(cfg.n_grid.len());
    for &n in &cfg.n_grid {
        let mut walk = WalkConfig::new(cfg.measure.clone(), n, cfg.trials_per_n, split_seed(cfg.seed, n as u64))
            .with_workers(cfg.workers);
        if let Some(x) = &cfg.x0 {
            walk = walk.with_x0(x.clone());
        }
        if cfg.statistic == LdeStatistic::Coeff {
            walk = walk.with_functional(cfg.functional.clone().expect("checked"));
        }
        let recs = run_products(&walk)?;
        let centre = n as f64 * lambda.point;
        let bound = n as f64 * cfg.eps;
        let k = recs
            .iter()
            .filter(|r| {
                let s = match cfg.statistic {
                    LdeStatistic::Norm => r.log_norm,
                    LdeStatistic::VecNorm => r.log_vec_norm.expect("x0 set"),
                    LdeStatistic::Coeff => r.log_coeff.expect("functional set"),
                    LdeStatistic::Birkhoff => unreachable!("rejected above"),
                };
                // a vanishing coefficient is an exceedance of every size
                !s.is_finite() || (s - centre).abs() > bound
            })
            .count() as u64;
        let t = recs.len() as u64;
        rows.push(LdeRow {
            n,
            eps: cfg.eps,
            p_hat: k as f64 / t as f64,
            wilson_ci: wilson_interval(k, t, 1.959_963_984_540_054),
            exceedances: k,
            trials: t,
        });
    }
    Ok(LdeCurve { rows, measure: cfg.measure.describe(), statistic: cfg.statistic, lambda, warnings })
}
