//! Headline statistics built on the walk engine: Lyapunov exponents, gaps,
//! CLT variance, deviation curves and their fits, regularity of stationary
//! measures, martingale diagnostics and family sweeps.

mod birkhoff;
mod diagnostics;
mod family;
mod fit;
mod lde;
mod lyapunov;
mod martingale;
mod regularity;
mod variance;

pub use birkhoff::{birkhoff_lde, BirkhoffConfig, ChainFunctional};
pub use diagnostics::irreducibility_warnings;
pub use family::{family_sweep, EstimatorSpec, FamilyRow, FamilySweep};
pub use fit::{fit_decay, fit_decay_points, DecayFit, DecayModel};
pub use lde::{lde_curve, wilson_interval, LdeConfig, LdeCurve, LdeRow, LdeStatistic};
pub use lyapunov::{
    gap, jackknife_sd_stderr, lyap_spectrum2, lyap_sum2, lyap_top, norm_mean_records, sigma_direct, spectrum2_records,
    Budget, LyapMethod, SigmaDirect, Spectrum2,
};
pub(crate) use lyapunov::LAMBDA_STREAM;
pub use martingale::{martingale_diagnostics, MartingaleDiagnostics};
pub use regularity::{geometric_radii, regularity_report, ModulusFit, RegularityReport};
pub use variance::{
    coboundary_psi, dual_stationary_sample, psi_from_samples, sigma_coboundary, CoboundaryConfig,
    PsiEstimate, SigmaCoboundary, DEFAULT_PSI_FLOOR,
};

use crate::measures::mean_var;

/// Standard error of the mean of a correlated sequence from `batches`
/// contiguous batch means.
pub fn batch_stderr(xs: &[f64], batches: usize) -> f64 {
    let b = batches.min(xs.len()).max(1);
    if b < 2 {
        return 0.0;
    }
    let size = xs.len() / b;
    let means: Vec<f64> = (0..b)
        .map(|i| {
            let chunk = &xs[i * size..if i + 1 == b { xs.len() } else { (i + 1) * size }];
            chunk.iter().sum::<f64>() / chunk.len() as f64
        })
        .collect();
    let (_, var) = mean_var(&means);
    (var / b as f64).sqrt()
}

/// Least-squares line `y = a + b·x`; returns `(a, b, rms residual)`.
pub(crate) fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let a = my - b * mx;
    let ss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - a - b * x).powi(2)).sum();
    (a, b, (ss / n).sqrt())
}

/// Least-squares slope of `y = c·x` through the origin (0 when all `x` vanish).
pub fn linear_fit_through_origin(xs: &[f64], ys: &[f64]) -> f64 {
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    if sxx > 0.0 {
        xs.iter().zip(ys).map(|(x, y)| x * y).sum::<f64>() / sxx
    } else {
        0.0
    }
}
