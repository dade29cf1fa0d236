use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MartingaleDiagnostics {
    pub p: f64,
    pub eps: f64,
    /// Largest block average of `|φ|^p`.
    pub n1_hat: f64,
    /// Smallest `t` on the sample grid with `mean(|φ|·1{|φ| > t}) < ε/3`.
    pub n2_hat: f64,
    pub blocks: usize,
}

/// Empirical moment and tail constants of martingale increments.
pub fn martingale_diagnostics(increments: &[f64], p: f64, eps: f64, blocks: usize) -> Result<MartingaleDiagnostics> {
    if increments.is_empty() || !(p > 0.0) || !(eps > 0.0) || blocks == 0 {
        return Err(Error::InvalidArgument("need increments, p > 0, eps > 0 and blocks >= 1".into()));
    }
    let b = blocks.min(increments.len());
    let size = increments.len() / b;
    let n1_hat = (0..b)
        .map(|i| {
            let end = if i + 1 == b { increments.len() } else { (i + 1) * size };
            let chunk = &increments[i * size..end];
            chunk.iter().map(|x| x.abs().powf(p)).sum::<f64>() / chunk.len() as f64
        })
        .fold(0.0, f64::max);

    let mut a: Vec<f64> = increments.iter().map(|x| x.abs()).collect();
    a.sort_unstable_by(f64::total_cmp);
    let n = a.len() as f64;
    let target = eps / 3.0;
    // tail(t) is a step function of t; its values at 0 and at every sample
    // cover all thresholds
    let mut tail: f64 = a.iter().sum::<f64>() / n;
    let mut n2_hat = if tail < target { 0.0 } else { f64::NAN };
    if n2_hat.is_nan() {
        let mut i = 0;
        while i < a.len() {
            let t = a[i];
            while i < a.len() && a[i] == t {
                tail -= a[i] / n;
                i += 1;
            }
            if tail < target || i == a.len() {
                n2_hat = t;
                break;
            }
        }
    }
    Ok(MartingaleDiagnostics { p, eps, n1_hat, n2_hat, blocks: b })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_and_bounded_increments() {
        let d = martingale_diagnostics(&[0.0; 100], 2.0, 0.1, 10).unwrap();
        assert_eq!((d.n1_hat, d.n2_hat), (0.0, 0.0));
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37 % 101) as f64 / 50.0 - 1.0) * 0.7).collect();
        let d = martingale_diagnostics(&xs, 3.0, 0.01, 10).unwrap();
        assert!(d.n1_hat <= 0.7f64.powi(3) + 1e-12 && d.n2_hat <= 0.7 + 1e-12);
    }

    #[test]
    fn tail_threshold_on_a_two_point_law() {
        // |φ| ∈ {1, 3} equally: tail(t) = 2 for t < 1, 1.5 for 1 <= t < 3
        let xs: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { 1.0 } else { -3.0 }).collect();
        assert_eq!(martingale_diagnostics(&xs, 1.0, 4.6, 5).unwrap().n2_hat, 1.0);
        assert_eq!(martingale_diagnostics(&xs, 1.0, 6.3, 5).unwrap().n2_hat, 0.0);
        assert_eq!(martingale_diagnostics(&xs, 1.0, 3.0, 5).unwrap().n2_hat, 3.0);
    }
}
