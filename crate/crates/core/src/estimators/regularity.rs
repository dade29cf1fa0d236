use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::RealProjPoint;
use crate::rng::CounterRng;

use super::linear_fit;

/// Two fitted parameters of a modulus of continuity plus the RMS residual of
/// the linearized fit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModulusFit {
    pub a: f64,
    pub b: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegularityReport {
    pub radii: Vec<f64>,
    /// `max_x ν̂(B_ε(x))` over the center set.
    pub max_mass: Vec<f64>,
    /// `ε^{α_H}` up to a constant: `a = C`, `b = α_H`.
    pub holder: Option<ModulusFit>,
    /// `exp(−c (log 1/ε)^ρ)`: `a = c`, `b = ρ`.
    pub weak_holder: Option<ModulusFit>,
    /// `C |log ε|^{−α_L}`: `a = C`, `b = α_L`.
    pub log_holder: Option<ModulusFit>,
    /// Masses saturate, so no modulus can be fitted.
    pub degenerate: bool,
    pub n_points: usize,
    pub n_centers: usize,
}

/// `d(x, y)` for unit real representatives.
fn dist(x: &[f64], y: &[f64]) -> f64 {
    let c: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    (1.0 - c * c).max(0.0).sqrt()
}

/// A unit vector orthogonal to `x`, as far from it as the space allows.
fn antipode(x: &[f64], rng: &mut CounterRng) -> Vec<f64> {
    if x.len() == 2 {
        return vec![-x[1], x[0]];
    }
    loop {
        let mut v: Vec<f64> = (0..x.len()).map(|_| rng.uniform() - 0.5).collect();
        let c: f64 = v.iter().zip(x).map(|(a, b)| a * b).sum();
        v.iter_mut().zip(x).for_each(|(a, b)| *a -= c * b);
        let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if n > 1e-6 {
            return v.into_iter().map(|a| a / n).collect();
        }
    }
}

/// Ball-mass profile of an empirical measure on real projective space with
/// three modulus fits.
///
/// Centers are `centers` points subsampled from `nu` plus, for each, a probe
/// orthogonal to it.
pub fn regularity_report(nu: &[RealProjPoint], radii: &[f64], centers: usize, seed: u64) -> Result<RegularityReport> {
    if nu.is_empty() || radii.is_empty() || centers == 0 {
        return Err(Error::InvalidArgument("need points, radii and at least one center".into()));
    }
    if radii.iter().any(|r| !(*r > 0.0)) || radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("radii must be positive and increasing".into()));
    }
    let mut rng = CounterRng::new(seed);
    let mut idx: Vec<usize> = (0..nu.len()).collect();
    let k = centers.min(nu.len());
    for i in 0..k {
        let j = i + rng.below(nu.len() - i);
        idx.swap(i, j);
    }
    let mut cs: Vec<Vec<f64>> = Vec::with_capacity(2 * k);
    for &i in &idx[..k] {
        let c = nu[i].coords().to_vec();
        cs.push(antipode(&c, &mut rng));
        cs.push(c);
    }
    let total = nu.len() as f64;
    let per_center: Vec<Vec<f64>> = cs
        .par_iter()
        .map(|c| {
            let mut ds: Vec<f64> = nu.iter().map(|y| dist(c, y.coords())).collect();
            ds.sort_unstable_by(f64::total_cmp);
            radii.iter().map(|&r| ds.partition_point(|&d| d <= r) as f64 / total).collect()
        })
        .collect();
    let max_mass: Vec<f64> = (0..radii.len())
        .map(|j| per_center.iter().map(|m| m[j]).fold(0.0, f64::max))
        .collect();

    // only unsaturated, nonempty cells below radius 1 carry information
    let usable: Vec<usize> = (0..radii.len())
        .filter(|&j| max_mass[j] > 0.0 && max_mass[j] < 0.99 && radii[j] < 1.0)
        .collect();
    let degenerate = usable.len() < 3;
    let (holder, weak_holder, log_holder) = if degenerate {
        (None, None, None)
    } else {
        let le: Vec<f64> = usable.iter().map(|&j| radii[j].ln()).collect();
        let lm: Vec<f64> = usable.iter().map(|&j| max_mass[j].ln()).collect();
        let (a, b, r) = linear_fit(&le, &lm);
        let holder = ModulusFit { a: a.exp(), b, residual: r };
        // log(−log m) = log c + ρ log log(1/ε)
        let x: Vec<f64> = le.iter().map(|l| (-l).ln()).collect();
        let y: Vec<f64> = lm.iter().map(|l| (-l).ln()).collect();
        let (a, b, r) = linear_fit(&x, &y);
        let weak = ModulusFit { a: a.exp(), b, residual: r };
        // log m = log C − α log|log ε|
        let (a, b, r) = linear_fit(&x, &lm);
        let logh = ModulusFit { a: a.exp(), b: -b, residual: r };
        (Some(holder), Some(weak), Some(logh))
    };
    Ok(RegularityReport {
        radii: radii.to_vec(),
        max_mass,
        holder,
        weak_holder,
        log_holder,
        degenerate,
        n_points: nu.len(),
        n_centers: cs.len(),
    })
}

/// `count` radii spaced geometrically over `[lo, hi]`.
pub fn geometric_radii(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count < 2 {
        return vec![lo];
    }
    let r = (hi / lo).ln() / (count - 1) as f64;
    (0..count).map(|i| lo * (r * i as f64).exp()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle(n: usize, seed: u64) -> Vec<RealProjPoint> {
        let mut rng = CounterRng::new(seed);
        (0..n)
            .map(|_| {
                let t = std::f64::consts::PI * rng.uniform();
                RealProjPoint::new(vec![t.cos(), t.sin()], false).unwrap()
            })
            .collect()
    }

    #[test]
    fn uniform_measure_is_lipschitz() {
        let nu = circle(50_000, 1);
        let rep = regularity_report(&nu, &geometric_radii(0.01, 0.3, 12), 100, 2).unwrap();
        assert!(rep.max_mass.windows(2).all(|w| w[0] <= w[1]));
        let h = rep.holder.unwrap();
        assert!((h.b - 1.0).abs() < 0.1, "{h:?}");
    }

    #[test]
    fn point_mass_is_degenerate() {
        let nu = vec![RealProjPoint::new(vec![1.0, 1e-9], false).unwrap(); 1000];
        let rep = regularity_report(&nu, &geometric_radii(1e-3, 0.5, 8), 10, 3).unwrap();
        assert!(rep.degenerate && rep.holder.is_none());
        assert!(rep.max_mass.iter().all(|&m| m == 1.0));
    }
}
