//! Random words in surface-group representations into SL₂(ℝ).

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::estimators::{jackknife_sd_stderr, linear_fit_through_origin};
use crate::linalg::{group_distance, GroupMode, RealMatrix};
use crate::measures::{mean_var, RealMeasure};
use crate::walk::{run_products, WalkConfig};

/// Letters of the genus-2 octagon relator; `k + 4` is the inverse of letter `k`.
pub const OCTAGON_RELATOR: [usize; 8] = [0, 5, 2, 7, 4, 1, 6, 3];

const RELATOR_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepType {
    Closed,
    Finite,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceRep {
    generators: Vec<RealMatrix>,
    /// Letters sampled by random words; generators then inverses unless built
    /// from an explicit letter list.
    alphabet: Vec<RealMatrix>,
    relator: Option<Vec<usize>>,
    kind: RepType,
    /// Images are defined up to sign (PSL₂), so the relator may give −I.
    projective: bool,
}

fn check_generator(g: &RealMatrix) -> Result<()> {
    if g.dim() != 2 || !g.is_finite() {
        return Err(Error::InvalidRep("generators must be finite 2x2 matrices".into()));
    }
    let det = g.det()?;
    if (det - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidRep(format!("generator determinant {det} is not 1")));
    }
    Ok(())
}

fn symmetric_alphabet(generators: &[RealMatrix]) -> Result<Vec<RealMatrix>> {
    let mut a = generators.to_vec();
    for g in generators {
        a.push(g.inverse()?);
    }
    Ok(a)
}

impl SurfaceRep {
    /// Closed-surface representation; the relator must evaluate to ±I.
    pub fn closed(generators: Vec<RealMatrix>, relator: Vec<usize>) -> Result<Self> {
        let rep = Self::build(generators, Some(relator), RepType::Closed)?;
        let r = rep.relator_residual().expect("relator set");
        if r > RELATOR_TOL {
            return Err(Error::InvalidRep(format!("relator residual {r:.3e} exceeds {RELATOR_TOL:e}")));
        }
        Ok(rep)
    }

    /// Free (finite-type) representation with the symmetric alphabet.
    pub fn free(generators: Vec<RealMatrix>) -> Result<Self> {
        Self::build(generators, None, RepType::Finite)
    }

    /// Words over exactly the given letters (no inverses added).
    pub fn from_letters(letters: Vec<RealMatrix>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::InvalidRep("empty alphabet".into()));
        }
        for g in &letters {
            check_generator(g)?;
        }
        Ok(Self { generators: letters.clone(), alphabet: letters, relator: None, kind: RepType::Finite, projective: true })
    }

    fn build(generators: Vec<RealMatrix>, relator: Option<Vec<usize>>, kind: RepType) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::InvalidRep("no generators".into()));
        }
        for g in &generators {
            check_generator(g)?;
        }
        let alphabet = symmetric_alphabet(&generators)?;
        if let Some(r) = &relator {
            if r.iter().any(|&i| i >= alphabet.len()) {
                return Err(Error::InvalidRep("relator letter outside the alphabet".into()));
            }
        }
        Ok(Self { generators, alphabet, relator, kind, projective: true })
    }

    pub fn generators(&self) -> &[RealMatrix] {
        &self.generators
    }

    pub fn alphabet(&self) -> &[RealMatrix] {
        &self.alphabet
    }

    pub fn relator(&self) -> Option<&[usize]> {
        self.relator.as_deref()
    }

    pub fn kind(&self) -> RepType {
        self.kind
    }

    pub fn is_projective(&self) -> bool {
        self.projective
    }

    /// Product of the letters of `word`, left to right.
    pub fn evaluate(&self, word: &[usize]) -> Result<RealMatrix> {
        let mut p = RealMatrix::identity((), 2, GroupMode::SL);
        for &i in word {
            let l = self.alphabet.get(i).ok_or_else(|| Error::InvalidRep(format!("letter {i} out of range")))?;
            p = p.mul_fast(l);
        }
        Ok(p)
    }

    /// `min ‖R ∓ I‖` for the relator word `R` (only `‖R − I‖` when not projective).
    pub fn relator_residual(&self) -> Option<f64> {
        let word = self.relator.as_ref()?;
        let p = self.evaluate(word).ok()?;
        let id = RealMatrix::identity((), 2, GroupMode::GL);
        let plus = p.diff_lossy(&id).ok()?.operator_norm().ok()?;
        if !self.projective {
            return Some(plus);
        }
        let minus = p.scale(&-1.0).ok()?.diff_lossy(&id).ok()?.operator_norm().ok()?;
        Some(plus.min(minus))
    }

    /// Uniform law on the alphabet.
    pub fn measure(&self) -> Result<RealMeasure> {
        RealMeasure::uniform(self.alphabet.clone())
    }

    /// Same representation with generator `i` replaced; the relator is kept
    /// but not enforced (formal deformation).
    pub fn with_generator(&self, i: usize, g: RealMatrix) -> Result<Self> {
        if i >= self.generators.len() {
            return Err(Error::InvalidRep(format!("generator {i} out of range")));
        }
        check_generator(&g)?;
        let mut out = self.clone();
        let k = self.generators.len();
        out.generators[i] = g.clone();
        if out.alphabet.len() == 2 * k {
            out.alphabet[i + k] = g.inverse()?;
        }
        out.alphabet[i] = g;
        Ok(out)
    }
}

/// Genus-2 representation from the regular octagon with angles π/4: the side
/// pairings are conjugates of one hyperbolic translation `T` by rotations
/// about the center.
pub fn octagon_rep() -> Result<SurfaceRep> {
    // inradius r of the octagon: cosh r = cot(π/8) = 1 + √2; T translates by 2r
    let r = (1.0 + 2f64.sqrt()).acosh();
    let t = RealMatrix::real_diag(&[r.exp(), (-r).exp()], GroupMode::SL)?;
    let generators = (0..4)
        .map(|k| {
            // hyperbolic rotation by kπ/4 about i is the matrix rotation by kπ/8
            let rot = RealMatrix::rotation(k as f64 * std::f64::consts::PI / 8.0);
            Ok(rot.mul_fast(&t).mul_fast(&rot.transpose()))
        })
        .collect::<Result<Vec<_>>>()?;
    SurfaceRep::closed(generators, OCTAGON_RELATOR.to_vec()).map_err(|e| match e {
        Error::InvalidRep(m) => Error::ConstructionError(m),
        other => other,
    })
}

/// Translation length `2·arccosh(|tr M| / 2)`.
pub fn trace_length(m: &RealMatrix) -> Result<f64> {
    let tr = m.trace()?.abs();
    if tr <= 2.0 + 1e-12 {
        return Err(Error::NotHyperbolic(tr));
    }
    Ok(2.0 * (tr / 2.0).acosh())
}

/// Translation length from `log|tr|`, stable for huge traces.
fn trace_length_from_log(log_tr: f64) -> Option<f64> {
    let lx = log_tr - std::f64::consts::LN_2;
    if !(log_tr.exp() > 2.0 + 1e-12) && lx < 1.0 {
        return None;
    }
    let inv_sq = (-2.0 * lx).exp();
    Some(2.0 * (lx + (1.0 + (1.0 - inv_sq).max(0.0).sqrt()).ln()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum LengthMode {
    /// `log‖A‖`.
    Norm,
    /// `2·arccosh(|tr A| / 2)`.
    Translation,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeodesicStats {
    /// Mean length divided by `n`.
    pub l_hat: f64,
    pub l_stderr: f64,
    /// Standard deviation of `(length − n·L̂) / √n`.
    pub sigma_hat: f64,
    pub sigma_stderr: f64,
    /// Fraction of words with `|tr| > 2`.
    pub hyperbolic_fraction: f64,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub mode: LengthMode,
    /// Per-trial lengths (`NaN` for skipped non-hyperbolic words).
    #[serde(skip)]
    pub lengths: Vec<f64>,
}

/// Length statistics of uniform random words of length `n`.
pub fn word_length_stats(
    rep: &SurfaceRep,
    n: usize,
    trials: usize,
    mode: LengthMode,
    seed: u64,
    workers: usize,
) -> Result<GeodesicStats> {
    if n == 0 || trials < 2 {
        return Err(Error::InvalidArgument("need n >= 1 and trials >= 2".into()));
    }
    let cfg = WalkConfig::new(rep.measure()?, n, trials, seed).with_trace().with_workers(workers);
    let recs = run_products(&cfg)?;
    let mut hyperbolic = 0usize;
    let lengths: Vec<f64> = recs
        .iter()
        .map(|r| {
            let lt = r.log_abs_trace.expect("trace recorded");
            let tl = trace_length_from_log(lt);
            if tl.is_some() {
                hyperbolic += 1;
            }
            match mode {
                LengthMode::Norm => r.log_norm,
                LengthMode::Translation => tl.unwrap_or(f64::NAN),
            }
        })
        .collect();
    let used: Vec<f64> = lengths.iter().copied().filter(|x| !x.is_nan()).collect();
    if used.len() < 2 {
        return Err(Error::Degenerate("fewer than two hyperbolic words".into()));
    }
    let nf = n as f64;
    let (mean, var) = mean_var(&used);
    let z: Vec<f64> = used.iter().map(|l| (l - mean) / nf.sqrt()).collect();
    Ok(GeodesicStats {
        l_hat: mean / nf,
        l_stderr: (var / used.len() as f64).sqrt() / nf,
        sigma_hat: var.sqrt() / nf.sqrt(),
        sigma_stderr: jackknife_sd_stderr(&z),
        hyperbolic_fraction: hyperbolic as f64 / trials as f64,
        n,
        trials,
        seed,
        mode,
        lengths,
    })
}

/// `max_h ‖ρ₁(h) − ρ₂(h)‖` over the index-aligned alphabets.
pub fn w_infinity_rep_distance(a: &SurfaceRep, b: &SurfaceRep) -> Result<f64> {
    if a.alphabet.len() != b.alphabet.len() {
        return Err(Error::InvalidRep("alphabets differ in size".into()));
    }
    let mut best = 0.0f64;
    for (x, y) in a.alphabet.iter().zip(&b.alphabet) {
        best = best.max(group_distance(x, y)?);
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub t: f64,
    pub w_infinity: f64,
    pub stats: GeodesicStats,
    /// Standard error of `L̂(t) − L̂(0)` from paired trials.
    pub paired_stderr: f64,
    pub relator_residual: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeformationSweep {
    pub rows: Vec<SweepRow>,
    /// Least-squares slope `C` of `|L̂(t) − L̂(0)| ≈ C·W∞(t)`.
    pub envelope_slope: f64,
}

impl DeformationSweep {
    /// Rows with `|L̂(t) − L̂(0)| > factor·C·W∞ + k·stderr`.
    pub fn envelope_violations(&self, factor: f64, k: f64) -> Vec<f64> {
        let base = self.base().stats.l_hat;
        self.rows
            .iter()
            .filter(|r| (r.stats.l_hat - base).abs() > factor * self.envelope_slope * r.w_infinity + k * r.paired_stderr)
            .map(|r| r.t)
            .collect()
    }

    fn base(&self) -> &SweepRow {
        self.rows.iter().min_by(|a, b| a.t.abs().total_cmp(&b.t.abs())).expect("nonempty sweep")
    }
}

/// Formal deformation `g₁ ↦ diag(e^t, e^{−t})·g₁` with common random numbers
/// across the grid. The first generator is the one deformed.
pub fn deformation_sweep(
    rep: &SurfaceRep,
    t_grid: &[f64],
    n: usize,
    trials: usize,
    mode: LengthMode,
    seed: u64,
    workers: usize,
) -> Result<DeformationSweep> {
    if t_grid.is_empty() || t_grid.iter().any(|t| !(t.abs() <= 0.2)) {
        return Err(Error::InvalidArgument("deformation parameters must satisfy |t| <= 0.2".into()));
    }
    let base_stats = word_length_stats(rep, n, trials, mode, seed, workers)?;
    let mut rows = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let d = RealMatrix::real_diag(&[t.exp(), (-t).exp()], GroupMode::SL)?;
        let deformed = rep.with_generator(0, d.mul_fast(&rep.generators[0]))?;
        let stats = if t == 0.0 { base_stats.clone() } else { word_length_stats(&deformed, n, trials, mode, seed, workers)? };
        let diffs: Vec<f64> = stats
            .lengths
            .iter()
            .zip(&base_stats.lengths)
            .filter(|(a, b)| !a.is_nan() && !b.is_nan())
            .map(|(a, b)| (a - b) / n as f64)
            .collect();
        let (_, var) = mean_var(&diffs);
        rows.push(SweepRow {
            t,
            w_infinity: w_infinity_rep_distance(rep, &deformed)?,
            paired_stderr: (var / diffs.len().max(1) as f64).sqrt(),
            relator_residual: deformed.relator_residual(),
            stats,
        });
    }
    let ws: Vec<f64> = rows.iter().map(|r| r.w_infinity).collect();
    let dl: Vec<f64> = rows.iter().map(|r| (r.stats.l_hat - base_stats.l_hat).abs()).collect();
    Ok(DeformationSweep { rows, envelope_slope: linear_fit_through_origin(&ws, &dl) })
}

/// Anderson–Darling statistic `A²` of `xs` against a normal law with the
/// sample mean and variance, with the small-sample factor `1 + 0.75/n + 2.25/n²`.
pub fn anderson_darling_normal(xs: &[f64]) -> Result<f64> {
    if xs.len() < 8 {
        return Err(Error::InvalidArgument("need at least 8 samples".into()));
    }
    let (mean, var) = mean_var(xs);
    if !(var > 0.0) {
        return Err(Error::Degenerate("zero variance".into()));
    }
    let norm = Normal::new(mean, var.sqrt()).map_err(|e| Error::NumericalFailure(e.to_string()))?;
    let mut s: Vec<f64> = xs.to_vec();
    s.sort_unstable_by(f64::total_cmp);
    let n = s.len();
    let nf = n as f64;
    let clamp = |p: f64| p.clamp(1e-300, 1.0 - 1e-16);
    let sum: f64 = (0..n)
        .map(|i| {
            let a = clamp(norm.cdf(s[i])).ln();
            let b = (1.0 - clamp(norm.cdf(s[n - 1 - i]))).ln();
            (2.0 * i as f64 + 1.0) * (a + b)
        })
        .sum();
    let a2 = -nf - sum / nf;
    Ok(a2 * (1.0 + 0.75 / nf + 2.25 / (nf * nf)))
}

/// Critical value of the adjusted `A²` at the 1% level (estimated parameters).
pub const AD_CRITICAL_1PCT: f64 = 1.035;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn octagon_construction() {
        let rep = octagon_rep().unwrap();
        assert!(rep.relator_residual().unwrap() < 1e-9);
        let traces: Vec<f64> = rep.generators().iter().map(|g| g.trace().unwrap().abs()).collect();
        assert!(traces.iter().all(|t| (t - traces[0]).abs() < 1e-12 && *t > 2.0));
        assert!((traces[0] - 2.0 * (1.0 + 2f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn trace_length_examples() {
        let d = RealMatrix::real_diag(&[1f64.exp(), (-1f64).exp()], GroupMode::SL).unwrap();
        assert!((trace_length(&d).unwrap() - 2.0).abs() < 1e-12);
        let para = RealMatrix::real([[1.0, 1.0], [0.0, 1.0]], GroupMode::SL).unwrap();
        assert!(matches!(trace_length(&para), Err(Error::NotHyperbolic(_))));
        let p = RealMatrix::real([[2.0, 3.0], [1.0, 2.0]], GroupMode::SL).unwrap();
        let m = RealMatrix::real([[3.0, 1.0], [1.0, 0.7]], GroupMode::GL).unwrap();
        let conj = p.mul_fast(&m).mul_fast(&p.inverse().unwrap());
        assert!((trace_length(&conj).unwrap() - trace_length(&m).unwrap()).abs() < 1e-10);
        for lt in [1.0f64, 3.0, 40.0] {
            let tr = lt.exp();
            if tr > 2.0 {
                let direct = 2.0 * (tr / 2.0).acosh();
                assert!((trace_length_from_log(lt).unwrap() - direct).abs() < 1e-9 * direct);
            }
        }
        assert!(trace_length_from_log(0.5).is_none());
    }

    #[test]
    fn bad_relator_is_a_construction_error() {
        let t = RealMatrix::real_diag(&[2.0, 0.5], GroupMode::SL).unwrap();
        let rot = RealMatrix::rotation(0.3);
        let g = rot.mul_fast(&t).mul_fast(&rot.transpose());
        assert!(matches!(SurfaceRep::closed(vec![t, g], vec![0, 1, 2, 3]), Err(Error::InvalidRep(_))));
    }

    #[test]
    fn single_letter_is_deterministic() {
        let t = RealMatrix::real_diag(&[3.0, 1.0 / 3.0], GroupMode::SL).unwrap();
        let rep = SurfaceRep::from_letters(vec![t]).unwrap();
        let s = word_length_stats(&rep, 50, 10, LengthMode::Norm, 1, 0).unwrap();
        assert!((s.l_hat - 3f64.ln()).abs() < 1e-12 && s.sigma_hat < 1e-9);
        assert_eq!(s.hyperbolic_fraction, 1.0);
    }

    #[test]
    fn generator_pair_is_a_reflected_walk() {
        // log‖T^k‖ = |k|·log 3 with k a simple random walk
        let t = RealMatrix::real_diag(&[3.0, 1.0 / 3.0], GroupMode::SL).unwrap();
        let rep = SurfaceRep::free(vec![t]).unwrap();
        let s = word_length_stats(&rep, 400, 20_000, LengthMode::Norm, 2, 0).unwrap();
        let l = 3f64.ln();
        let mean = l * (2.0 / (std::f64::consts::PI * 400.0)).sqrt();
        assert!((s.l_hat - mean).abs() < 4.0 * s.l_stderr + 1e-3, "{} vs {mean}", s.l_hat);
        let sd = l * (1.0 - 2.0 / std::f64::consts::PI).sqrt();
        assert!((s.sigma_hat / sd - 1.0).abs() < 0.05, "{} vs {sd}", s.sigma_hat);
    }

    #[test]
    fn rep_distance_examples() {
        let rep = octagon_rep().unwrap();
        assert_eq!(w_infinity_rep_distance(&rep, &rep).unwrap(), 0.0);
        let mut rng = crate::rng::CounterRng::new(5);
        for _ in 0..20 {
            let k = rng.below(4);
            let s = 1e-3 * (rng.uniform() - 0.5);
            let h = RealMatrix::real([[1.0, s], [0.0, 1.0]], GroupMode::SL).unwrap();
            let g = &rep.generators()[k];
            let moved = h.mul_fast(g).mul_fast(&h.inverse().unwrap());
            let other = rep.with_generator(k, moved.clone()).unwrap();
            let d = w_infinity_rep_distance(&rep, &other).unwrap();
            // for SL₂, ‖A⁻¹ − B⁻¹‖ = ‖A − B‖, so the perturbed letter decides
            assert!((d - group_distance(g, &moved).unwrap()).abs() < 1e-12);
            let general = crate::transport::w_infinity(&rep.measure().unwrap(), &other.measure().unwrap()).unwrap();
            assert!((d - general).abs() < 1e-12, "{d} vs {general}");
        }
    }

    #[test]
    fn anderson_darling_reference() {
        use rand_distr::{Distribution, Exp1, StandardNormal};
        let mut rng = crate::rng::CounterRng::new(3);
        let normal: Vec<f64> = (0..5000).map(|_| StandardNormal.sample(&mut rng)).collect();
        assert!(anderson_darling_normal(&normal).unwrap() < AD_CRITICAL_1PCT);
        let skewed: Vec<f64> = (0..5000).map(|_| Exp1.sample(&mut rng)).collect();
        assert!(anderson_darling_normal(&skewed).unwrap() > 10.0);
    }

    #[test]
    fn length_bound_on_samples() {
        let rep = octagon_rep().unwrap();
        let m = rep.measure().unwrap();
        let mut rng = crate::rng::CounterRng::new(8);
        let mut checked = 0;
        for _ in 0..10_000 {
            let len = 1 + rng.below(6);
            let mut p = RealMatrix::identity((), 2, GroupMode::SL);
            for _ in 0..len {
                p = m.draw(&mut rng).unwrap().matrix().mul_fast(&p);
            }
            if let Ok(tl) = trace_length(&p) {
                checked += 1;
                assert!(tl <= 2.0 * p.operator_norm().unwrap().ln() + 2.0 * 2f64.ln() + 1e-9);
            }
        }
        assert!(checked > 5000);
    }
}
