use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::lde::LdeCurve;
use super::linear_fit;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum DecayModel {
    /// `C·n^{−q}`.
    Poly,
    /// `C·exp(−c·n^ρ)`.
    Stretched,
    /// `C·exp(−c·n)`.
    Exp,
}

const RHO_RANGE: (f64, f64) = (0.05, 1.5);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub model: DecayModel,
    /// Prefactor `C`.
    pub c_const: f64,
    /// `c` for exp and stretched, `q` for poly.
    pub rate: f64,
    pub rho: Option<f64>,
    /// RMS residual in `log p̂` space.
    pub residual: f64,
    pub n_range: (usize, usize),
    /// Grid points with `p̂ₙ = 0`, excluded from the fit.
    pub dropped: Vec<usize>,
    /// Whether the fitted rate is positive.
    pub converged: bool,
}

fn fit_in(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let (a, b, r) = linear_fit(xs, ys);
    (a, -b, r)
}

/// Fit a decay model to `(n, p̂ₙ)` pairs.
pub fn fit_decay_points(ns: &[usize], ps: &[f64], model: DecayModel) -> Result<DecayFit> {
    if ns.len() != ps.len() {
        return Err(Error::InvalidArgument("grid and probabilities differ in length".into()));
    }
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for (&n, &p) in ns.iter().zip(ps) {
        if p > 0.0 {
            kept.push((n, p));
        } else {
            dropped.push(n);
        }
    }
    if kept.len() < 4 {
        return Err(Error::Degenerate(format!(
            "{} of {} cells have p > 0; at least 4 are needed (raise trials)",
            kept.len(),
            ns.len()
        )));
    }
    let ys: Vec<f64> = kept.iter().map(|k| k.1.ln()).collect();
    let transform = |rho: f64| -> Vec<f64> { kept.iter().map(|k| (k.0 as f64).powf(rho)).collect() };
    let (log_c, rate, residual, rho) = match model {
        DecayModel::Exp => {
            let (a, c, r) = fit_in(&transform(1.0), &ys);
            (a, c, r, None)
        }
        DecayModel::Poly => {
            let xs: Vec<f64> = kept.iter().map(|k| (k.0 as f64).ln()).collect();
            let (a, q, r) = fit_in(&xs, &ys);
            (a, q, r, None)
        }
        DecayModel::Stretched => {
            let resid = |rho: f64| fit_in(&transform(rho), &ys).2;
            // coarse grid, then golden-section refinement around the best cell
            let steps = 145;
            let h = (RHO_RANGE.1 - RHO_RANGE.0) / steps as f64;
            let best = (0..=steps)
                .map(|i| RHO_RANGE.0 + i as f64 * h)
                .min_by(|a, b| resid(*a).total_cmp(&resid(*b)))
                .expect("nonempty grid");
            let (mut lo, mut hi) = ((best - h).max(RHO_RANGE.0), (best + h).min(RHO_RANGE.1));
            let g = (5f64.sqrt() - 1.0) / 2.0;
            for _ in 0..60 {
                let (m1, m2) = (hi - g * (hi - lo), lo + g * (hi - lo));
                if resid(m1) <= resid(m2) {
                    hi = m2;
                } else {
                    lo = m1;
                }
            }
            let rho = 0.5 * (lo + hi);
            let (a, c, r) = fit_in(&transform(rho), &ys);
            (a, c, r, Some(rho))
        }
    };
    Ok(DecayFit {
        model,
        c_const: log_c.exp(),
        rate,
        rho,
        residual,
        n_range: (kept[0].0, kept[kept.len() - 1].0),
        dropped,
        converged: rate > 0.0 && residual.is_finite(),
    })
}

/// Fit a decay model to a deviation curve; zero cells are dropped.
pub fn fit_decay(curve: &LdeCurve, model: DecayModel) -> Result<DecayFit> {
    let ns: Vec<usize> = curve.rows.iter().map(|r| r.n).collect();
    let ps: Vec<f64> = curve.rows.iter().map(|r| r.p_hat).collect();
    fit_decay_points(&ns, &ps, model)
}
