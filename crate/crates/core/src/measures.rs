//! Probability measures on matrix groups, concave gauges and moment functionals.

use std::borrow::Cow;
use std::f64::consts::{E, TAU};
use std::fmt;
use std::str::FromStr;

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::anderson::PotentialSpec;
use crate::error::{Error, Result};
use crate::linalg::{group_distance, GroupMode, Matrix, RealMatrix, MAX_BASE_DIM};
use crate::rng::CounterRng;
use crate::scalar::{Field, PAdic, PAdicCtx, DEFAULT_PADIC_PRECISION};

const WEIGHT_TOL: f64 = 1e-12;

/// Concave gauge applied to distances or sizes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GaugeSpec {
    /// `log^{p★}`: linear below `e^p`, `log^p` above.
    Log { p: f64 },
    /// `slog^δ`: linear below the knee `x₀`, `exp((log t)^δ)` above.
    Slog { delta: f64 },
    /// `t^α`.
    Frac { alpha: f64 },
    Identity,
}

impl GaugeSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            GaugeSpec::Log { p } => p.is_finite() && p >= 1.0,
            GaugeSpec::Slog { delta } => delta > 0.0 && delta < 1.0,
            GaugeSpec::Frac { alpha } => alpha > 0.0 && alpha <= 1.0,
            GaugeSpec::Identity => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidGauge(format!("parameter out of range in {self}")))
        }
    }

    /// Switch point between the linear and the curved branch, if any.
    pub fn knee(&self) -> Option<f64> {
        match *self {
            GaugeSpec::Log { p } => Some(p.exp()),
            GaugeSpec::Slog { delta } => Some(slog_knee(delta)),
            _ => None,
        }
    }

    /// Evaluate at `t ≥ 0`. Parameters are assumed validated.
    pub fn eval(&self, t: f64) -> f64 {
        debug_assert!(t >= 0.0);
        match *self {
            GaugeSpec::Log { p } => {
                if t < p.exp() {
                    (p / E).powf(p) * t
                } else {
                    t.ln().powf(p)
                }
            }
            GaugeSpec::Slog { delta } => {
                let x0 = slog_knee(delta);
                if t <= x0 {
                    slog_curve(delta, x0) / x0 * t
                } else {
                    slog_curve(delta, t)
                }
            }
            GaugeSpec::Frac { alpha } => t.powf(alpha),
            GaugeSpec::Identity => t,
        }
    }

    pub fn try_eval(&self, t: f64) -> Result<f64> {
        self.validate()?;
        if !(t >= 0.0) {
            return Err(Error::InvalidArgument(format!("gauge argument {t} < 0")));
        }
        Ok(self.eval(t))
    }

    /// Size functional `h(s)` for membership moments, with `s = ‖M‖`
    /// (or `max{‖M‖, ‖M⁻¹‖}` in GL mode).
    pub fn membership(&self, s: f64) -> f64 {
        let l = s.ln().max(0.0);
        match *self {
            GaugeSpec::Log { p } => l.powf(p),
            GaugeSpec::Slog { delta } => l.powf(delta).exp(),
            GaugeSpec::Frac { alpha } => s.powf(alpha),
            GaugeSpec::Identity => s,
        }
    }
}

fn slog_knee(delta: f64) -> f64 {
    delta.powf(1.0 / (1.0 - delta)).exp()
}

fn slog_curve(delta: f64, t: f64) -> f64 {
    t.ln().powf(delta).exp()
}

impl fmt::Display for GaugeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GaugeSpec::Log { p } => write!(f, "log:{p}"),
            GaugeSpec::Slog { delta } => write!(f, "slog:{delta}"),
            GaugeSpec::Frac { alpha } => write!(f, "frac:{alpha}"),
            GaugeSpec::Identity => write!(f, "identity"),
        }
    }
}

/// Parses `log:2`, `slog:0.5`, `frac:0.3` or `identity`.
impl FromStr for GaugeSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidGauge(format!("cannot parse gauge {s:?}"));
        let g = match s.split_once(':') {
            None if s == "identity" => GaugeSpec::Identity,
            None => return Err(bad()),
            Some((kind, v)) => {
                let v: f64 = v.parse().map_err(|_| bad())?;
                match kind {
                    "log" => GaugeSpec::Log { p: v },
                    "slog" => GaugeSpec::Slog { delta: v },
                    "frac" => GaugeSpec::Frac { alpha: v },
                    _ => return Err(bad()),
                }
            }
        };
        g.validate()?;
        Ok(g)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentVariant {
    /// Size moments: `max{0, log‖M‖}^p`, `exp(max{log‖M‖,0}^δ)`, `‖M‖^α`.
    Membership,
    /// `gauge(d(M, I))`.
    Metric,
}

/// Point estimate with standard error and a 95% interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub point: f64,
    pub stderr: f64,
    pub ci95: (f64, f64),
    pub n_samples: u64,
    pub seed: u64,
}

impl Estimate {
    pub fn new(point: f64, stderr: f64, n_samples: u64, seed: u64) -> Self {
        Self { point, stderr, ci95: (point - 1.96 * stderr, point + 1.96 * stderr), n_samples, seed }
    }

    pub fn exact(point: f64, n_samples: u64, seed: u64) -> Self {
        Self::new(point, 0.0, n_samples, seed)
    }

    /// Sample mean with the standard error of the mean.
    pub fn from_samples(xs: &[f64], seed: u64) -> Self {
        let (mean, var) = mean_var(xs);
        Self::new(mean, (var / xs.len() as f64).sqrt(), xs.len() as u64, seed)
    }

    /// Weighted mean of exactly known values (no sampling error).
    pub fn from_weighted(values: &[(f64, f64)], seed: u64) -> Self {
        let mut acc = 0.0;
        for &(v, w) in values {
            if w > 0.0 {
                acc += w * v;
            }
        }
        Self::exact(acc, values.len() as u64, seed)
    }
}

/// Mean and unbiased sample variance (0 for fewer than two values).
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Orientation of the lifted Schrödinger factor.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum LiftOrientation {
    /// `[[E − V, −1], [1, 0]]` (transfer matrix).
    #[default]
    Transfer,
    /// `[[V − E, −1], [1, 0]]` (energy-shift map applied to the potential value).
    Shift,
}

/// Built-in parametric families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum Family {
    /// `diag(e^X, e^{−X})`, `X ~ Normal(mean, std²)`.
    DiagonalLognormal { mean: f64, std: f64 },
    /// Rotation by a uniform angle.
    RotationUniform,
    /// Schrödinger factor with potential drawn from `potential`.
    AndersonLifted {
        potential: PotentialSpec,
        energy: f64,
        #[serde(default)]
        orientation: LiftOrientation,
    },
    /// `diag(p^{−k}, p^k)` over ℚ_p with `k` from a finite law `[(k, weight)]`.
    PadicDiagonal {
        p: u64,
        #[serde(default)]
        precision: Option<u32>,
        law: Vec<(i64, f64)>,
    },
}

impl Family {
    pub fn validate(&self) -> Result<()> {
        match self {
            Family::DiagonalLognormal { mean, std } => {
                if !mean.is_finite() || !(*std >= 0.0) || !std.is_finite() {
                    return Err(Error::InvalidMeasure("diagonal_lognormal needs std >= 0".into()));
                }
            }
            Family::RotationUniform => {}
            Family::AndersonLifted { potential, energy, .. } => {
                potential.validate()?;
                if !energy.is_finite() {
                    return Err(Error::InvalidMeasure("energy must be finite".into()));
                }
            }
            Family::PadicDiagonal { p, precision, law } => {
                PAdicCtx::new(*p, precision.unwrap_or(DEFAULT_PADIC_PRECISION))?;
                check_weights(law.iter().map(|x| x.1))?;
            }
        }
        Ok(())
    }

    fn name(&self) -> &'static str {
        match self {
            Family::DiagonalLognormal { .. } => "diagonal_lognormal",
            Family::RotationUniform => "rotation_uniform",
            Family::AndersonLifted { .. } => "anderson_lifted",
            Family::PadicDiagonal { .. } => "padic_diagonal",
        }
    }
}

/// Maps under which measures are pushed forward.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixMap {
    Wedge2,
    InverseTranspose,
    /// `M ↦ M⁻¹`.
    Inverse,
}

impl MatrixMap {
    pub fn apply<F: Field>(&self, m: &Matrix<F>) -> Result<Matrix<F>> {
        match self {
            MatrixMap::Wedge2 => m.wedge2(),
            MatrixMap::InverseTranspose => m.inverse_transpose(),
            MatrixMap::Inverse => m.inverse(),
        }
    }

    fn out_dim(&self, d: usize) -> usize {
        match self {
            MatrixMap::Wedge2 => d * (d - 1) / 2,
            _ => d,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum MeasureKind<F: Field> {
    Atoms { atoms: Vec<(Matrix<F>, f64)>, cumulative: Vec<f64> },
    Parametric(Family),
    /// Pushforward of a parametric measure, applied draw by draw.
    Mapped { base: Box<MatrixMeasure<F>>, map: MatrixMap },
}

/// A probability measure on SL_d or GL_d over ℝ or ℚ_p.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixMeasure<F: Field> {
    kind: MeasureKind<F>,
    /// Gauge classes the user asserts to have finite moments.
    pub declared: Vec<GaugeSpec>,
}

pub type RealMeasure = MatrixMeasure<f64>;

/// One draw: either an index into the atom list or a freshly built matrix.
pub enum Draw<'a, F: Field> {
    Atom(usize, &'a Matrix<F>),
    Fresh(Matrix<F>),
}

impl<'a, F: Field> Draw<'a, F> {
    pub fn matrix(&self) -> &Matrix<F> {
        match self {
            Draw::Atom(_, m) => m,
            Draw::Fresh(m) => m,
        }
    }

    pub fn into_matrix(self) -> Matrix<F> {
        match self {
            Draw::Atom(_, m) => m.clone(),
            Draw::Fresh(m) => m,
        }
    }
}

fn check_weights(ws: impl Iterator<Item = f64>) -> Result<()> {
    let mut total = 0.0;
    let mut count = 0;
    for w in ws {
        if !(w > 0.0) || !w.is_finite() {
            return Err(Error::InvalidMeasure(format!("weight {w} is not positive")));
        }
        total += w;
        count += 1;
    }
    if count == 0 {
        return Err(Error::InvalidMeasure("empty atom list".into()));
    }
    if (total - 1.0).abs() > WEIGHT_TOL {
        return Err(Error::InvalidMeasure(format!("weights sum to {total}, not 1")));
    }
    Ok(())
}

/// Index of the first cumulative weight exceeding `u`.
fn pick(cumulative: &[f64], u: f64) -> usize {
    cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1)
}

impl<F: MeasureField> MatrixMeasure<F> {
    pub fn atoms(atoms: Vec<(Matrix<F>, f64)>) -> Result<Self> {
        check_weights(atoms.iter().map(|a| a.1))?;
        let d = atoms[0].0.dim();
        let mode = atoms[0].0.mode();
        let ctx = atoms[0].0.ctx();
        if atoms.iter().any(|(m, _)| m.dim() != d || m.mode() != mode || m.ctx() != ctx) {
            return Err(Error::InvalidMeasure("atoms differ in dimension, mode or field".into()));
        }
        let mut cumulative = Vec::with_capacity(atoms.len());
        let mut acc = 0.0;
        for (_, w) in &atoms {
            acc += w;
            cumulative.push(acc);
        }
        Ok(Self { kind: MeasureKind::Atoms { atoms, cumulative }, declared: Vec::new() })
    }

    pub fn uniform(mats: Vec<Matrix<F>>) -> Result<Self> {
        let w = 1.0 / mats.len() as f64;
        Self::atoms(mats.into_iter().map(|m| (m, w)).collect())
    }

    pub fn dirac(m: Matrix<F>) -> Self {
        Self::atoms(vec![(m, 1.0)]).expect("single atom")
    }

    pub fn family(f: Family) -> Result<Self> {
        f.validate()?;
        F::check_family(&f)?;
        Ok(Self { kind: MeasureKind::Parametric(f), declared: Vec::new() })
    }

    pub fn with_declared(mut self, declared: Vec<GaugeSpec>) -> Self {
        self.declared = declared;
        self
    }

    pub fn kind(&self) -> &MeasureKind<F> {
        &self.kind
    }

    pub fn atom_list(&self) -> Option<&[(Matrix<F>, f64)]> {
        match &self.kind {
            MeasureKind::Atoms { atoms, .. } => Some(atoms),
            _ => None,
        }
    }

    pub fn is_atomic(&self) -> bool {
        self.atom_list().is_some()
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            MeasureKind::Atoms { atoms, .. } => atoms[0].0.dim(),
            MeasureKind::Parametric(_) => 2,
            MeasureKind::Mapped { base, map } => map.out_dim(base.dim()),
        }
    }

    pub fn mode(&self) -> GroupMode {
        match &self.kind {
            MeasureKind::Atoms { atoms, .. } => atoms[0].0.mode(),
            MeasureKind::Parametric(_) => GroupMode::SL,
            MeasureKind::Mapped { base, .. } => base.mode(),
        }
    }

    /// Checks the user-facing dimension range 2..=6.
    pub fn validate_base_dim(&self) -> Result<()> {
        let d = self.dim();
        if !(2..=MAX_BASE_DIM).contains(&d) {
            return Err(Error::InvalidMeasure(format!("dimension {d} outside 2..={MAX_BASE_DIM}")));
        }
        Ok(())
    }

    pub fn draw<'a>(&'a self, rng: &mut CounterRng) -> Result<Draw<'a, F>> {
        match &self.kind {
            MeasureKind::Atoms { atoms, cumulative } => {
                if atoms.len() == 1 {
                    return Ok(Draw::Atom(0, &atoms[0].0));
                }
                let i = pick(cumulative, rng.uniform());
                Ok(Draw::Atom(i, &atoms[i].0))
            }
            MeasureKind::Parametric(f) => F::draw_family(f, rng).map(Draw::Fresh),
            MeasureKind::Mapped { base, map } => {
                let m = base.draw(rng)?;
                map.apply(m.matrix()).map(Draw::Fresh)
            }
        }
    }

    /// `count` i.i.d. draws; deterministic in `(seed, count)`.
    pub fn sample(&self, seed: u64, count: usize) -> Result<Vec<Matrix<F>>> {
        let mut rng = CounterRng::new(seed);
        (0..count).map(|_| self.draw(&mut rng).map(Draw::into_matrix)).collect()
    }

    /// Pushforward under `map`; atoms are mapped elementwise with weights kept.
    pub fn pushforward(&self, map: MatrixMap) -> Result<Self> {
        match &self.kind {
            MeasureKind::Atoms { atoms, .. } => {
                let mapped = atoms
                    .iter()
                    .map(|(m, w)| Ok((map.apply(m)?, *w)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Self::atoms(mapped)?.with_declared(self.declared.clone()))
            }
            _ => Ok(Self {
                kind: MeasureKind::Mapped { base: Box::new(self.clone()), map },
                declared: self.declared.clone(),
            }),
        }
    }

    /// Per-sample value of the moment integrand.
    pub fn moment_integrand(m: &Matrix<F>, g: &GaugeSpec, variant: MomentVariant) -> Result<f64> {
        match variant {
            MomentVariant::Membership => {
                let mut s = m.operator_norm()?;
                if m.mode() == GroupMode::GL {
                    s = s.max(m.inverse()?.operator_norm()?);
                }
                Ok(g.membership(s))
            }
            MomentVariant::Metric => {
                let id = Matrix::identity(m.ctx(), m.dim(), m.mode());
                Ok(g.eval(group_distance(m, &id)?))
            }
        }
    }

    fn integrate(
        &self,
        n_samples: usize,
        seed: u64,
        f: impl Fn(&Matrix<F>) -> Result<f64>,
    ) -> Result<Estimate> {
        if let Some(atoms) = self.atom_list() {
            let vals =
                atoms.iter().map(|(m, w)| Ok((f(m)?, *w))).collect::<Result<Vec<_>>>()?;
            return Ok(Estimate::from_weighted(&vals, seed));
        }
        if n_samples == 0 {
            return Err(Error::InvalidArgument("n_samples must be positive".into()));
        }
        let mut rng = CounterRng::new(seed);
        let mut xs = Vec::with_capacity(n_samples);
        for _ in 0..n_samples {
            let d = self.draw(&mut rng)?;
            xs.push(f(d.matrix())?);
        }
        Ok(Estimate::from_samples(&xs, seed))
    }

    /// Gauge moment; exact for atomic measures, Monte Carlo otherwise.
    pub fn moment(
        &self,
        g: &GaugeSpec,
        variant: MomentVariant,
        n_samples: usize,
        seed: u64,
    ) -> Result<Estimate> {
        g.validate()?;
        self.integrate(n_samples, seed, |m| Self::moment_integrand(m, g, variant))
    }

    /// `∫ 1{h(M) > T}·h(M) dμ` with `h` the moment integrand.
    pub fn tail_mass(
        &self,
        g: &GaugeSpec,
        variant: MomentVariant,
        threshold: f64,
        n_samples: usize,
        seed: u64,
    ) -> Result<Estimate> {
        g.validate()?;
        if !(threshold > 0.0) {
            return Err(Error::InvalidArgument("tail threshold must be positive".into()));
        }
        self.integrate(n_samples, seed, |m| {
            let h = Self::moment_integrand(m, g, variant)?;
            Ok(if h > threshold { h } else { 0.0 })
        })
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            MeasureKind::Atoms { atoms, .. } => format!("{} atoms, d={}", atoms.len(), self.dim()),
            MeasureKind::Parametric(f) => f.name().to_string(),
            MeasureKind::Mapped { base, map } => format!("{map:?} of {}", base.describe()),
        }
    }
}

/// Fields that the built-in parametric families can produce.
pub trait MeasureField: Field {
    fn check_family(f: &Family) -> Result<()>;
    fn draw_family(f: &Family, rng: &mut CounterRng) -> Result<Matrix<Self>>;
    /// Whether `a·b` could leave the representable range.
    fn product_at_risk(a: &Matrix<Self>, b: &Matrix<Self>) -> bool;
    /// `a · b` with the field's checked arithmetic.
    fn product(a: &Matrix<Self>, b: &Matrix<Self>) -> Result<Matrix<Self>> {
        a.mul(b)
    }
    /// Real coordinates of a vector, when the field is ℝ.
    fn real_coords(v: &[Self]) -> Option<Vec<f64>>;
}

fn max_abs(m: &RealMatrix) -> f64 {
    m.entries().iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

/// Schrödinger factor for potential value `v` at energy `e`.
pub fn lifted_factor(v: f64, e: f64, orientation: LiftOrientation) -> RealMatrix {
    let a = match orientation {
        LiftOrientation::Transfer => e - v,
        LiftOrientation::Shift => v - e,
    };
    Matrix::new_unchecked(2, vec![a, -1.0, 1.0, 0.0], GroupMode::SL).expect("2x2")
}

impl MeasureField for f64 {
    fn check_family(f: &Family) -> Result<()> {
        if let Family::PadicDiagonal { .. } = f {
            return Err(Error::InvalidMeasure("padic_diagonal is a p-adic family".into()));
        }
        Ok(())
    }

    fn draw_family(f: &Family, rng: &mut CounterRng) -> Result<RealMatrix> {
        match f {
            Family::DiagonalLognormal { mean, std } => {
                let x = Normal::new(*mean, *std)
                    .map_err(|e| Error::InvalidMeasure(e.to_string()))?
                    .sample(rng);
                Matrix::new_unchecked(2, vec![x.exp(), 0.0, 0.0, (-x).exp()], GroupMode::SL)
            }
            Family::RotationUniform => Ok(RealMatrix::rotation(TAU * rng.uniform())),
            Family::AndersonLifted { potential, energy, orientation } => {
                Ok(lifted_factor(potential.sample(rng), *energy, *orientation))
            }
            Family::PadicDiagonal { .. } => {
                Err(Error::InvalidMeasure("padic_diagonal is a p-adic family".into()))
            }
        }
    }

    fn product_at_risk(a: &RealMatrix, b: &RealMatrix) -> bool {
        max_abs(a) * max_abs(b) * a.dim() as f64 > 1e290
    }

    fn product(a: &RealMatrix, b: &RealMatrix) -> Result<RealMatrix> {
        if a.dim() != b.dim() {
            return Err(Error::InvalidArgument("dimension mismatch".into()));
        }
        let p = a.mul_fast(b);
        if p.is_finite() {
            Ok(p)
        } else {
            Err(Error::Overflow)
        }
    }

    fn real_coords(v: &[f64]) -> Option<Vec<f64>> {
        Some(v.to_vec())
    }
}

impl MeasureField for PAdic {
    fn check_family(f: &Family) -> Result<()> {
        match f {
            Family::PadicDiagonal { .. } => Ok(()),
            other => Err(Error::InvalidMeasure(format!("{} is a real family", other.name()))),
        }
    }

    fn draw_family(f: &Family, rng: &mut CounterRng) -> Result<Matrix<PAdic>> {
        match f {
            Family::PadicDiagonal { p, precision, law } => {
                let ctx = PAdicCtx::new(*p, precision.unwrap_or(DEFAULT_PADIC_PRECISION))?;
                let u = rng.uniform();
                let mut acc = 0.0;
                let mut k = law[law.len() - 1].0;
                for &(kk, w) in law {
                    acc += w;
                    if u < acc {
                        k = kk;
                        break;
                    }
                }
                let data = vec![
                    PAdic::power_of_p(ctx, -k),
                    PAdic::zero(ctx),
                    PAdic::zero(ctx),
                    PAdic::power_of_p(ctx, k),
                ];
                Matrix::new_unchecked(2, data, GroupMode::SL)
            }
            other => Err(Error::InvalidMeasure(format!("{} is a real family", other.name()))),
        }
    }

    fn product_at_risk(_: &Matrix<PAdic>, _: &Matrix<PAdic>) -> bool {
        false
    }

    fn real_coords(_: &[PAdic]) -> Option<Vec<f64>> {
        None
    }
}

/// Borrow or build the atoms of an atomic measure.
pub fn require_atoms<F: MeasureField>(m: &MatrixMeasure<F>) -> Result<Cow<'_, [(Matrix<F>, f64)]>> {
    m.atom_list()
        .map(Cow::Borrowed)
        .ok_or_else(|| Error::InvalidMeasure("an atomic measure is required".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn diag(a: f64, b: f64) -> RealMatrix {
        RealMatrix::real_diag(&[a, b], GroupMode::SL).unwrap()
    }

    #[test]
    fn gauge_examples() {
        assert!((GaugeSpec::Log { p: 2.0 }.eval(E * E) - 4.0).abs() < 1e-12);
        assert!((GaugeSpec::Log { p: 1.0 }.eval(E) - 1.0).abs() < 1e-15);
        let s = GaugeSpec::Slog { delta: 0.5 };
        let x0 = s.knee().unwrap();
        assert!((x0 - 0.25f64.exp()).abs() < 1e-15);
        // value at the knee is f(x₀) = exp((1/4)^{1/2})
        assert!((s.eval(x0) - 0.5f64.exp()).abs() < 1e-12);
        assert_eq!(GaugeSpec::Frac { alpha: 0.5 }.eval(4.0), 2.0);
        assert!(GaugeSpec::Log { p: 0.5 }.validate().is_err());
        assert!(GaugeSpec::Slog { delta: 1.0 }.validate().is_err());
        assert!(GaugeSpec::Frac { alpha: 1.5 }.validate().is_err());
        assert_eq!("slog:0.5".parse::<GaugeSpec>().unwrap(), s);
        assert!("log:0.2".parse::<GaugeSpec>().is_err());
    }

    #[test]
    fn slog_knee_is_tangent_point() {
        // x·f'(x) − f(x) vanishes at the knee, by finite differences
        for delta in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let x0 = slog_knee(delta);
            let f = |t: f64| slog_curve(delta, t);
            let h = 1e-6 * x0;
            let fp = (f(x0 + h) - f(x0 - h)) / (2.0 * h);
            assert!((x0 * fp - f(x0)).abs() < 1e-7, "delta {delta}");
            // below the knee the chord slope f(x)/x exceeds f'(x); above it is smaller
            for (x, sign) in [(x0 * 0.9, 1.0), (x0 * 1.5, -1.0)] {
                let fp = (f(x + 1e-7) - f(x - 1e-7)) / 2e-7;
                assert!(sign * (f(x) / x - fp) < 0.0 || x < 1.0);
            }
        }
    }

    #[test]
    fn knee_continuity() {
        for p in [1.0, 1.5, 2.0, 3.0] {
            let g = GaugeSpec::Log { p };
            let k = p.exp();
            assert!(((p / E).powf(p) * k - k.ln().powf(p)).abs() < 1e-12 * k.ln().powf(p));
            assert!((g.eval(k * (1.0 - 1e-14)) - g.eval(k)).abs() < 1e-10);
        }
        for delta in [0.2, 0.5, 0.8] {
            let x0 = slog_knee(delta);
            let lin = slog_curve(delta, x0) / x0 * x0;
            assert!((lin - slog_curve(delta, x0)).abs() < 1e-12);
        }
    }

    fn gauges() -> Vec<GaugeSpec> {
        vec![
            GaugeSpec::Log { p: 1.0 },
            GaugeSpec::Log { p: 2.5 },
            GaugeSpec::Slog { delta: 0.3 },
            GaugeSpec::Slog { delta: 0.7 },
            GaugeSpec::Frac { alpha: 0.4 },
            GaugeSpec::Identity,
        ]
    }

    proptest! {
        #[test]
        fn gauges_concave_increasing(a in 0.0f64..60.0, db in 1e-6f64..60.0, dc in 1e-6f64..60.0) {
            let (b, c) = (a + db, a + db + dc);
            for g in gauges() {
                let (ga, gb, gc) = (g.eval(a), g.eval(b), g.eval(c));
                prop_assert!(gb >= ga + (b - a) / (c - a) * (gc - ga) - 1e-12 * gc.max(1.0));
                prop_assert!(gb > ga && gc > gb);
            }
        }
    }

    #[test]
    fn gauges_vanish_at_zero() {
        for g in gauges() {
            assert_eq!(g.eval(0.0), 0.0);
        }
    }

    #[test]
    fn atom_sampling() {
        let id = RealMatrix::identity((), 2, GroupMode::SL);
        let m = RealMeasure::dirac(id.clone());
        assert!(m.sample(3, 50).unwrap().iter().all(|x| *x == id));

        let a = diag(2.0, 0.5);
        let b = diag(3.0, 1.0 / 3.0);
        let m = RealMeasure::atoms(vec![(a.clone(), 0.5), (b, 0.5)]).unwrap();
        let draws = m.sample(17, 100_000).unwrap();
        let frac = draws.iter().filter(|x| **x == a).count() as f64 / 1e5;
        // binomial 99.9% band: 0.5 ± 3.3·sqrt(0.25/1e5) ≈ 0.5 ± 0.005
        assert!((frac - 0.5).abs() < 0.01, "{frac}");
        assert_eq!(m.sample(17, 100).unwrap(), m.sample(17, 100).unwrap());
    }

    #[test]
    fn weights_validated() {
        let a = diag(2.0, 0.5);
        assert!(RealMeasure::atoms(vec![(a.clone(), 0.5), (a.clone(), 0.4)]).is_err());
        assert!(RealMeasure::atoms(vec![(a.clone(), 1.5), (a, -0.5)]).is_err());
    }

    #[test]
    fn moment_examples() {
        let id = RealMatrix::identity((), 2, GroupMode::SL);
        let e2 = diag(E * E, 1.0 / (E * E));
        for g in gauges() {
            let m = RealMeasure::dirac(id.clone()).moment(&g, MomentVariant::Metric, 0, 1).unwrap();
            assert_eq!(m.point, 0.0);
        }
        let log1 = GaugeSpec::Log { p: 1.0 };
        let m = RealMeasure::dirac(e2.clone()).moment(&log1, MomentVariant::Membership, 0, 1).unwrap();
        assert!((m.point - 2.0).abs() < 1e-12);
        let mix = RealMeasure::atoms(vec![(e2, 0.5), (id, 0.5)]).unwrap();
        let m = mix.moment(&log1, MomentVariant::Membership, 0, 1).unwrap();
        assert!((m.point - 1.0).abs() < 1e-12);
        assert_eq!(m.stderr, 0.0);
    }

    #[test]
    fn gl_membership_uses_inverse_norm() {
        let g = RealMatrix::real_diag(&[1.0, 0.25], GroupMode::GL).unwrap();
        let m = RealMeasure::dirac(g)
            .moment(&GaugeSpec::Log { p: 1.0 }, MomentVariant::Membership, 0, 0)
            .unwrap();
        assert!((m.point - 4f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn membership_moment_monotone_in_p() {
        let atoms = vec![(diag(1.5, 1.0 / 1.5), 0.3), (diag(8.0, 0.125), 0.7)];
        let m = RealMeasure::atoms(atoms).unwrap();
        let mut prev = 0.0;
        for p in [1.0, 1.5, 2.0, 3.0, 4.0] {
            let v = m.moment(&GaugeSpec::Log { p }, MomentVariant::Membership, 0, 0).unwrap().point;
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn tail_mass_examples() {
        let id = RealMatrix::identity((), 2, GroupMode::SL);
        let log1 = GaugeSpec::Log { p: 1.0 };
        let t = RealMeasure::dirac(id).tail_mass(&log1, MomentVariant::Membership, 0.5, 0, 0);
        assert_eq!(t.unwrap().point, 0.0);
        let m = RealMeasure::atoms(vec![(diag(E, 1.0 / E), 0.5), (diag(E * E, 1.0 / E / E), 0.5)])
            .unwrap();
        let t = m.tail_mass(&log1, MomentVariant::Membership, 2.5, 0, 0).unwrap();
        assert_eq!(t.point, 0.0);
        let t = m.tail_mass(&log1, MomentVariant::Membership, 1.5, 0, 0).unwrap();
        assert!((t.point - 1.0).abs() < 1e-12);
    }

    #[test]
    fn parametric_families_respect_fields() {
        assert!(RealMeasure::family(Family::PadicDiagonal { p: 5, precision: None, law: vec![(1, 1.0)] })
            .is_err());
        assert!(MatrixMeasure::<PAdic>::family(Family::RotationUniform).is_err());
        let pm = MatrixMeasure::<PAdic>::family(Family::PadicDiagonal {
            p: 5,
            precision: None,
            law: vec![(0, 0.5), (1, 0.5)],
        })
        .unwrap();
        let draws = pm.sample(4, 200).unwrap();
        assert!(draws.iter().all(|m| m.operator_norm().unwrap() == 1.0 || m.operator_norm().unwrap() == 5.0));
    }

    #[test]
    fn mapped_pushforward_of_family() {
        let m = RealMeasure::family(Family::DiagonalLognormal { mean: 0.3, std: 0.2 }).unwrap();
        let it = m.pushforward(MatrixMap::InverseTranspose).unwrap();
        assert_eq!(it.dim(), 2);
        let a = m.sample(9, 5).unwrap();
        let b = it.sample(9, 5).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x.get(0, 0) * y.get(0, 0) - 1.0).abs() < 1e-12);
        }
        let w = m.pushforward(MatrixMap::Wedge2).unwrap();
        assert_eq!(w.dim(), 1);
        assert!(w.sample(1, 10).unwrap().iter().all(|x| x.entries() == [1.0]));
    }
}
