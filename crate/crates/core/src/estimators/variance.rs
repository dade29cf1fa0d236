use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::RealProjPoint;
use crate::measures::{Estimate, MatrixMap, RealMeasure};
use crate::rng::split_seed;
use crate::walk::{chain_fold, ChainConfig, ChainDirection, DEFAULT_BURN_IN};

use super::batch_stderr;
use super::lyapunov::ones;

/// Default truncation floor for `log δ` inside the coboundary.
pub const DEFAULT_PSI_FLOOR: f64 = 1e-6;

const CHAINS: usize = 16;
const BATCHES: usize = 32;

/// Samples of the stationary law on hyperplanes (dual points `f`) for which
/// `ψ(x) = ∫ log δ(x, f) dν*(f)` solves the cohomological equation.
///
/// The hyperplane `ker f` moves by `f ↦ (h⁻¹)ᵀ f` under `h`; `ν*` is the
/// stationary law of that action for the inverse pushforward `h = g⁻¹`.
pub fn dual_stationary_sample(m: &RealMeasure, samples: usize, seed: u64, workers: usize) -> Result<Vec<RealProjPoint>> {
    if samples == 0 {
        return Err(Error::InvalidArgument("chain_samples must be >= 1".into()));
    }
    let inv = m.pushforward(MatrixMap::Inverse)?;
    let chains = CHAINS.min(samples);
    let per = samples.div_ceil(chains);
    let cfg = ChainConfig::new(inv, ones(m)?, per, seed)
        .with_chains(chains)
        .with_direction(ChainDirection::InverseTranspose);
    let cfg = ChainConfig { workers, ..cfg };
    let parts = chain_fold(&cfg, |_| Vec::with_capacity(per), |acc: &mut Vec<RealProjPoint>, s| {
        acc.push(s.x_next.clone());
        Ok(())
    })?;
    let mut out: Vec<RealProjPoint> = parts.into_iter().flatten().collect();
    out.truncate(samples);
    Ok(out)
}

/// `log δ(x, f)` for unit representatives.
#[inline]
fn log_delta(x: &[f64], f: &[f64]) -> f64 {
    x.iter().zip(f).map(|(a, b)| a * b).sum::<f64>().abs().ln()
}

fn psi_value(x: &[f64], dual: &[RealProjPoint], log_floor: f64) -> f64 {
    let s: f64 = dual.iter().map(|f| log_delta(x, f.coords()).max(log_floor)).sum();
    s / dual.len() as f64
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PsiEstimate {
    /// `ψ(x)` with the floor `ε_f`.
    pub psi: Estimate,
    pub floor: f64,
    /// `ψ(x)` with the floor `ε_f / 10`.
    pub psi_tenth_floor: f64,
    /// `|ψ(ε_f) − ψ(ε_f/10)|`.
    pub sensitivity: f64,
}

/// `ψ(x)` from given samples of `ν*`.
pub fn psi_from_samples(x: &RealProjPoint, dual: &[RealProjPoint], floor: f64, seed: u64) -> Result<PsiEstimate> {
    if !(floor > 0.0 && floor < 1.0) {
        return Err(Error::InvalidArgument("floor must lie in (0, 1)".into()));
    }
    if dual.is_empty() || dual[0].dim() != x.dim() {
        return Err(Error::InvalidArgument("dual samples missing or of the wrong dimension".into()));
    }
    let lf = floor.ln();
    let vals: Vec<f64> = dual.iter().map(|f| log_delta(x.coords(), f.coords()).max(lf)).collect();
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    let tenth = psi_value(x.coords(), dual, (floor / 10.0).ln());
    Ok(PsiEstimate {
        psi: Estimate::new(mean, batch_stderr(&vals, BATCHES), vals.len() as u64, seed),
        floor,
        psi_tenth_floor: tenth,
        sensitivity: (mean - tenth).abs(),
    })
}

/// Coboundary `ψ(x)` estimated from `chain_samples` points of `ν*`.
pub fn coboundary_psi(
    m: &RealMeasure,
    x: &RealProjPoint,
    chain_samples: usize,
    floor: f64,
    seed: u64,
) -> Result<PsiEstimate> {
    let dual = dual_stationary_sample(m, chain_samples, seed, 0)?;
    psi_from_samples(x, &dual, floor, seed)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoboundaryConfig {
    pub measure: RealMeasure,
    /// Samples of `ν*` used for every evaluation of `ψ`.
    pub n_inner: usize,
    /// Forward-chain pairs `(x, g)` in the outer average.
    pub chain_samples: usize,
    pub floor: f64,
    pub seed: u64,
    pub workers: usize,
}

impl CoboundaryConfig {
    pub fn new(measure: RealMeasure, n_inner: usize, chain_samples: usize, seed: u64) -> Self {
        Self { measure, n_inner, chain_samples, floor: DEFAULT_PSI_FLOOR, seed, workers: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SigmaCoboundary {
    /// Square root of `∫(Φ − ψ + ψ∘g − λ₁)² dμ dν`.
    pub sigma: Estimate,
    /// The integral itself.
    pub sigma_sq: f64,
    /// Mean of `Φ − ψ + ψ∘g`, an estimate of λ₁.
    pub lambda: f64,
    /// Largest floor sensitivity of `ψ` over a few chain points.
    pub psi_sensitivity: f64,
}

/// CLT variance through the coboundary-corrected cocycle.
pub fn sigma_coboundary(cfg: &CoboundaryConfig) -> Result<SigmaCoboundary> {
    if cfg.chain_samples < 2 {
        return Err(Error::InvalidArgument("chain_samples must be >= 2".into()));
    }
    let dual = dual_stationary_sample(&cfg.measure, cfg.n_inner, split_seed(cfg.seed, 1), cfg.workers)?;
    let lf = cfg.floor.ln();
    let chains = CHAINS.min(cfg.chain_samples);
    let per = cfg.chain_samples.div_ceil(chains);
    let chain = ChainConfig::new(cfg.measure.clone(), ones(&cfg.measure)?, per, split_seed(cfg.seed, 2))
        .with_chains(chains)
        .with_burn_in(DEFAULT_BURN_IN);
    let chain = ChainConfig { workers: cfg.workers, ..chain };
    // state: corrected increments and the cached ψ of the current point
    let parts = chain_fold(
        &chain,
        |_| (Vec::with_capacity(per), None::<f64>),
        |(acc, cached), s| {
            let prev = cached.unwrap_or_else(|| psi_value(s.x_prev.coords(), &dual, lf));
            let next = psi_value(s.x_next.coords(), &dual, lf);
            acc.push(s.cocycle - prev + next);
            *cached = Some(next);
            Ok(())
        },
    )?;
    let incs: Vec<f64> = parts.into_iter().flat_map(|p| p.0).take(cfg.chain_samples).collect();
    let n = incs.len() as f64;
    let lambda = incs.iter().sum::<f64>() / n;
    let sq: Vec<f64> = incs.iter().map(|v| (v - lambda) * (v - lambda)).collect();
    let sigma_sq = sq.iter().sum::<f64>() / (n - 1.0);
    let sigma = sigma_sq.sqrt();
    let se_sq = batch_stderr(&sq, BATCHES);
    let stderr = if sigma > 0.0 { se_sq / (2.0 * sigma) } else { se_sq.sqrt() };

    let probes: Vec<RealProjPoint> = dual.iter().step_by((dual.len() / 8).max(1)).map(|f| f.as_dual(false)).collect();
    let psi_sensitivity = probes
        .par_iter()
        .map(|x| psi_from_samples(x, &dual, cfg.floor, cfg.seed).map(|p| p.sensitivity))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(SigmaCoboundary {
        sigma: Estimate::new(sigma, stderr, incs.len() as u64, cfg.seed),
        sigma_sq,
        lambda,
        psi_sensitivity,
    })
}
