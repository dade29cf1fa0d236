//! Experiment configuration files: one JSON object per experiment, with a
//! published schema and a canonical hash.

use schemars::JsonSchema;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::anderson::PotentialSpec;
use crate::error::{Error, Result};
use crate::estimators::{ChainFunctional, DecayModel, EstimatorSpec, LdeStatistic, LyapMethod};
use crate::hyperbolic::LengthMode;
use crate::linalg::{GroupMode, Matrix, ProjPoint};
use crate::measures::{Family, GaugeSpec, MatrixMeasure, MeasureField};
use crate::scalar::{Field, PAdic, PAdicCtx, DEFAULT_PADIC_PRECISION};

/// Scalar field of an atomic measure.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldDecl {
    #[default]
    Real,
    Padic {
        p: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        precision: Option<u32>,
    },
}

/// A matrix or vector entry: a JSON number, or a string literal of the field
/// (`"2.5"`, `"5^-1 * 3"`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(untagged)]
pub enum Entry {
    Num(f64),
    Text(String),
}

impl Entry {
    fn parse<F: Field>(&self, ctx: F::Ctx) -> Result<F> {
        match self {
            Entry::Num(x) => F::parse_with(ctx, &x.to_string()),
            Entry::Text(s) => F::parse_with(ctx, s),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct AtomDecl {
    /// Rows of the matrix.
    pub matrix: Vec<Vec<Entry>>,
    pub weight: f64,
}

/// Either a built-in family (`family` + `params`) or a weighted atom list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct MeasureDecl {
    #[serde(default, skip_serializing_if = "is_real")]
    pub field: FieldDecl,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atoms: Option<Vec<AtomDecl>>,
    /// Group of the atoms; `sl` (default) requires determinant 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<GroupMode>,
    /// Rescale real atoms by `|det|^{-1/d}` before use.
    #[serde(default, skip_serializing_if = "is_false")]
    pub normalize: bool,
}

fn is_real(f: &FieldDecl) -> bool {
    *f == FieldDecl::Real
}

fn is_false(b: &bool) -> bool {
    !*b
}

/// A measure over either supported field.
#[derive(Clone, Debug)]
pub enum AnyMeasure {
    Real(MatrixMeasure<f64>),
    Padic(MatrixMeasure<PAdic>),
}

/// Evaluate `$body` with `$v` bound to the concrete measure.
macro_rules! with_measure {
    ($m:expr, $v:ident => $body:expr) => {
        match $m {
            $crate::cli::config::AnyMeasure::Real($v) => $body,
            $crate::cli::config::AnyMeasure::Padic($v) => $body,
        }
    };
}
pub(crate) use with_measure;

impl AnyMeasure {
    pub fn real(self) -> Result<MatrixMeasure<f64>> {
        match self {
            AnyMeasure::Real(m) => Ok(m),
            AnyMeasure::Padic(_) => Err(Error::InvalidMeasure("this experiment needs a real measure".into())),
        }
    }
}

impl MeasureDecl {
    pub fn build(&self) -> Result<AnyMeasure> {
        match (&self.family, &self.atoms) {
            (Some(name), None) => {
                if self.mode.is_some() || self.normalize {
                    return Err(Error::InvalidMeasure("mode and normalize apply to atom lists only".into()));
                }
                let mut obj = serde_json::Map::new();
                obj.insert("family".into(), Value::String(name.clone()));
                if let Some(p) = &self.params {
                    obj.insert("params".into(), p.clone());
                }
                let family: Family = serde_json::from_value(Value::Object(obj))
                    .map_err(|e| Error::Parse(format!("family {name:?}: {e}")))?;
                if let Family::PadicDiagonal { .. } = family {
                    Ok(AnyMeasure::Padic(MatrixMeasure::family(family)?))
                } else {
                    Ok(AnyMeasure::Real(MatrixMeasure::family(family)?))
                }
            }
            (None, Some(atoms)) => {
                if self.params.is_some() {
                    return Err(Error::InvalidMeasure("params apply to families only".into()));
                }
                let mode = self.mode.unwrap_or(GroupMode::SL);
                match self.field {
                    FieldDecl::Real => {
                        let mut list = build_atoms::<f64>((), atoms, mode)?;
                        if self.normalize {
                            for (m, _) in list.iter_mut() {
                                let det = m.det()?;
                                if det == 0.0 {
                                    return Err(Error::SingularMatrix);
                                }
                                let s = det.abs().powf(-1.0 / m.dim() as f64);
                                *m = m.clone().with_mode(GroupMode::GL).scale(&s)?.with_mode(mode);
                                m.validate()?;
                            }
                        }
                        Ok(AnyMeasure::Real(MatrixMeasure::atoms(list)?))
                    }
                    FieldDecl::Padic { p, precision } => {
                        if self.normalize {
                            return Err(Error::InvalidMeasure("normalize is only available over the reals".into()));
                        }
                        let ctx = PAdicCtx::new(p, precision.unwrap_or(DEFAULT_PADIC_PRECISION))?;
                        Ok(AnyMeasure::Padic(MatrixMeasure::atoms(build_atoms::<PAdic>(ctx, atoms, mode)?)?))
                    }
                }
            }
            _ => Err(Error::InvalidMeasure("a measure needs exactly one of `family` or `atoms`".into())),
        }
    }
}

fn build_atoms<F: MeasureField>(ctx: F::Ctx, atoms: &[AtomDecl], mode: GroupMode) -> Result<Vec<(Matrix<F>, f64)>> {
    atoms
        .iter()
        .map(|a| {
            let rows = a
                .matrix
                .iter()
                .map(|r| r.iter().map(|e| e.parse::<F>(ctx)).collect::<Result<Vec<F>>>())
                .collect::<Result<Vec<_>>>()?;
            let m = Matrix::from_rows(rows, mode).map_err(|e| match e {
                Error::SingularMatrix => Error::InvalidMeasure("singular atom".into()),
                other => other,
            })?;
            Ok((m, a.weight))
        })
        .collect()
}

/// Projective point from declared coordinates, in the field of `m`.
pub fn point_for<F: MeasureField>(m: &MatrixMeasure<F>, coords: &[Entry], dual: bool) -> Result<ProjPoint<F>> {
    let mut rng = crate::rng::CounterRng::new(0);
    let ctx = m.draw(&mut rng)?.matrix().ctx();
    if coords.len() != m.dim() {
        return Err(Error::InvalidArgument(format!("expected {} coordinates, got {}", m.dim(), coords.len())));
    }
    ProjPoint::new(coords.iter().map(|e| e.parse::<F>(ctx)).collect::<Result<Vec<F>>>()?, dual)
}

/// Standard basis vector `e₁` in the field of `m`.
pub fn first_basis<F: MeasureField>(m: &MatrixMeasure<F>, dual: bool) -> Result<ProjPoint<F>> {
    let mut rng = crate::rng::CounterRng::new(0);
    let ctx = m.draw(&mut rng)?.matrix().ctx();
    let mut v = vec![F::zero(ctx); m.dim()];
    v[0] = F::one(ctx);
    ProjPoint::new(v, dual)
}

fn default_method() -> LyapMethod {
    LyapMethod::NormMean
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct LyapConfig {
    pub measure: MeasureDecl,
    pub n: usize,
    pub trials: usize,
    #[serde(default = "default_method")]
    pub method: LyapMethod,
    /// Write per-trial records (norm-mean method only).
    #[serde(default = "default_true")]
    pub write_trials: bool,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct GapConfig {
    pub measure: MeasureDecl,
    pub n: usize,
    pub trials: usize,
    #[serde(default = "default_true")]
    pub write_trials: bool,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum VarianceRoute {
    Direct,
    Coboundary,
    #[default]
    Both,
}

fn default_n_inner() -> usize {
    20_000
}

fn default_chain_samples() -> usize {
    50_000
}

fn default_floor() -> f64 {
    crate::estimators::DEFAULT_PSI_FLOOR
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct VarianceConfig {
    pub measure: MeasureDecl,
    #[serde(default)]
    pub route: VarianceRoute,
    /// Walk length and trials of the direct route.
    pub n: usize,
    pub trials: usize,
    /// Start vector of the direct route (default `e₁`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<Entry>>,
    /// Dual stationary samples shared by every evaluation of the coboundary.
    #[serde(default = "default_n_inner")]
    pub n_inner: usize,
    /// Forward-chain pairs in the outer average.
    #[serde(default = "default_chain_samples")]
    pub chain_samples: usize,
    #[serde(default = "default_floor")]
    pub floor: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

fn default_models() -> Vec<DecayModel> {
    vec![DecayModel::Poly, DecayModel::Stretched, DecayModel::Exp]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct LdeFileConfig {
    pub measure: MeasureDecl,
    pub statistic: LdeStatistic,
    /// Absolute deviation threshold; exclusive with `eps_fraction`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    /// Threshold as a fraction of λ̂₁ (estimated first on its own stream).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_fraction: Option<f64>,
    pub n_grid: Vec<usize>,
    pub trials_per_n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<Entry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub functional: Option<Vec<Entry>>,
    /// Functional averaged by the `birkhoff` statistic.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain_functional: Option<ChainFunctional>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_steps: Option<usize>,
    #[serde(default = "default_models")]
    pub fits: Vec<DecayModel>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WdistSolver {
    Exact,
    Entropic {
        eps: f64,
        #[serde(default = "default_tol")]
        tol: f64,
    },
    /// Bottleneck distance; the gauge is not used.
    Winf,
}

fn default_tol() -> f64 {
    1e-9
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct WdistConfig {
    pub a: MeasureDecl,
    pub b: MeasureDecl,
    pub gauge: GaugeSpec,
    pub solver: WdistSolver,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct RadiiDecl {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

fn default_burn_in() -> usize {
    crate::walk::DEFAULT_BURN_IN
}

fn default_centers() -> usize {
    64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct RegularityConfig {
    pub measure: MeasureDecl,
    /// Chain samples forming the empirical stationary measure.
    pub samples: usize,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
    pub radii: RadiiDecl,
    #[serde(default = "default_centers")]
    pub centers: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<Entry>>,
    /// Also report the stationarity defect `W¹(ν̂, μ∗ν̂)`.
    #[serde(default)]
    pub defect: bool,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    pub members: Vec<MeasureDecl>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    pub estimator: EstimatorSpec,
    pub n: usize,
    pub trials: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gauge: Option<GaugeSpec>,
    #[serde(default)]
    pub reference: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct AndersonSweepConfig {
    pub potential: PotentialSpec,
    pub emin: f64,
    pub emax: f64,
    pub count: usize,
    pub n: usize,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

fn e1_2d() -> Vec<f64> {
    vec![1.0, 0.0]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct AndersonLdeConfig {
    pub potential: PotentialSpec,
    pub energy: f64,
    /// Unit start vector (default `e₁`).
    #[serde(default = "e1_2d")]
    pub x: Vec<f64>,
    /// Unit test vector of the coefficient `⟨y, A_n x⟩` (default `e₁`).
    #[serde(default = "e1_2d")]
    pub y: Vec<f64>,
    pub eps: f64,
    pub n_grid: Vec<usize>,
    pub trials: usize,
    #[serde(default = "default_models")]
    pub fits: Vec<DecayModel>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum NamedRep {
    Octagon,
}

/// The built-in genus-2 representation, or explicit SL₂ generators with an
/// optional relator over the alphabet `g₀…g_{k−1}, g₀⁻¹…g_{k−1}⁻¹`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(untagged)]
pub enum RepDecl {
    Named(NamedRep),
    Custom {
        generators: Vec<Vec<Vec<f64>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        relator: Option<Vec<usize>>,
    },
}

fn default_rep() -> RepDecl {
    RepDecl::Named(NamedRep::Octagon)
}

fn default_mode() -> LengthMode {
    LengthMode::Norm
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct HyperbolicCltConfig {
    #[serde(default = "default_rep")]
    pub rep: RepDecl,
    pub n: usize,
    pub trials: usize,
    #[serde(default = "default_mode")]
    pub mode: LengthMode,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct HyperbolicSweepConfig {
    #[serde(default = "default_rep")]
    pub rep: RepDecl,
    /// Grid `t_k = tmax·k/steps`, `k = 0..=steps`.
    pub tmax: f64,
    pub steps: usize,
    pub n: usize,
    pub trials: usize,
    #[serde(default = "default_mode")]
    pub mode: LengthMode,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

/// Shared plumbing of every experiment configuration.
pub trait ExperimentConfig: Serialize + DeserializeOwned + JsonSchema {
    const NAME: &'static str;
    fn seed_mut(&mut self) -> &mut u64;
    fn workers_mut(&mut self) -> &mut Option<usize>;
}

macro_rules! experiment {
    ($t:ty, $name:literal) => {
        impl ExperimentConfig for $t {
            const NAME: &'static str = $name;
            fn seed_mut(&mut self) -> &mut u64 {
                &mut self.seed
            }
            fn workers_mut(&mut self) -> &mut Option<usize> {
                &mut self.workers
            }
        }
    };
}

experiment!(LyapConfig, "lyap");
experiment!(GapConfig, "gap");
experiment!(VarianceConfig, "variance");
experiment!(LdeFileConfig, "lde");
experiment!(WdistConfig, "wdist");
experiment!(RegularityConfig, "regularity");
experiment!(FamilyConfig, "family");
experiment!(AndersonSweepConfig, "anderson_sweep");
experiment!(AndersonLdeConfig, "anderson_lde");
experiment!(HyperbolicCltConfig, "hyperbolic_clt");
experiment!(HyperbolicSweepConfig, "hyperbolic_sweep");

pub const EXPERIMENTS: [&str; 11] = [
    "lyap",
    "gap",
    "variance",
    "lde",
    "wdist",
    "regularity",
    "family",
    "anderson_sweep",
    "anderson_lde",
    "hyperbolic_clt",
    "hyperbolic_sweep",
];

/// Parse a typed config, reporting the failing field path (and the line and
/// column when parsing directly from text).
pub fn parse_text<C: ExperimentConfig>(text: &str) -> Result<C> {
    let mut de = serde_json::Deserializer::from_str(text);
    let c: C = serde_path_to_error::deserialize(&mut de).map_err(|e| diag(C::NAME, e))?;
    de.end().map_err(|e| Error::Parse(format!("{}: {e}", C::NAME)))?;
    Ok(c)
}

pub fn parse_value<C: ExperimentConfig>(v: Value) -> Result<C> {
    serde_path_to_error::deserialize(v).map_err(|e| diag(C::NAME, e))
}

fn diag(name: &str, e: serde_path_to_error::Error<serde_json::Error>) -> Error {
    let path = e.path().to_string();
    let inner = e.into_inner();
    if path == "." {
        Error::Parse(format!("{name} config: {inner}"))
    } else {
        Error::Parse(format!("{name} config, field `{path}`: {inner}"))
    }
}

/// Canonical form: serialized config with the worker count removed (object
/// keys come out sorted).
pub fn canonical<C: ExperimentConfig>(c: &C) -> Result<Value> {
    let mut v = serde_json::to_value(c).map_err(|e| Error::Parse(e.to_string()))?;
    if let Value::Object(map) = &mut v {
        map.remove("workers");
    }
    Ok(v)
}

/// SHA-256 of the experiment name and the canonical config, as lowercase hex.
pub fn config_hash(name: &str, canonical: &Value) -> String {
    let mut h = Sha256::new();
    h.update(name.as_bytes());
    h.update(b"\n");
    h.update(canonical.to_string().as_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Set `path` (dot separated) in `root` to `value`, creating objects on the way.
pub fn set_path(root: &mut Value, path: &str, value: Value) -> Result<()> {
    let mut cur = root;
    let parts: Vec<&str> = path.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Parse(format!("bad override key {path:?}")));
    }
    for (i, part) in parts.iter().enumerate() {
        if !cur.is_object() {
            *cur = Value::Object(Default::default());
        }
        let map = cur.as_object_mut().expect("object");
        if i + 1 == parts.len() {
            map.insert(part.to_string(), value);
            return Ok(());
        }
        cur = map.entry(part.to_string()).or_insert(Value::Object(Default::default()));
    }
    Ok(())
}

/// `KEY=VALUE` with VALUE read as JSON, falling back to a plain string.
pub fn parse_override(s: &str) -> Result<(String, Value)> {
    let (k, v) = s.split_once('=').ok_or_else(|| Error::Parse(format!("override {s:?} is not KEY=VALUE")))?;
    let value = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
    Ok((k.trim().to_string(), value))
}

/// `kind[:a[:b]]` potential shorthand, e.g. `bernoulli:1`, `uniform:-1:1`,
/// `gaussian:0:1`, `log_pareto:2`.
pub fn parse_potential(s: &str) -> Result<Value> {
    let bad = || Error::Parse(format!("bad potential {s:?}"));
    let mut it = s.split(':');
    let kind = it.next().ok_or_else(bad)?;
    let nums = it.map(|x| x.parse::<f64>().map_err(|_| bad())).collect::<Result<Vec<f64>>>()?;
    let v = match (kind, nums.as_slice()) {
        ("bernoulli", [v]) => serde_json::json!({"kind": "bernoulli", "v": v}),
        ("uniform", [a, b]) => serde_json::json!({"kind": "uniform", "a": a, "b": b}),
        ("gaussian", [m, sd]) => serde_json::json!({"kind": "gaussian", "mean": m, "std": sd}),
        ("log_pareto", [p]) => serde_json::json!({"kind": "log_pareto", "p": p}),
        _ => return Err(bad()),
    };
    Ok(v)
}

/// JSON schema of one experiment config.
pub fn schema_of(name: &str) -> Result<Value> {
    fn s<C: JsonSchema>() -> Value {
        serde_json::to_value(schemars::schema_for!(C)).expect("schema serializes")
    }
    Ok(match name {
        "lyap" => s::<LyapConfig>(),
        "gap" => s::<GapConfig>(),
        "variance" => s::<VarianceConfig>(),
        "lde" => s::<LdeFileConfig>(),
        "wdist" => s::<WdistConfig>(),
        "regularity" => s::<RegularityConfig>(),
        "family" => s::<FamilyConfig>(),
        "anderson_sweep" => s::<AndersonSweepConfig>(),
        "anderson_lde" => s::<AndersonLdeConfig>(),
        "hyperbolic_clt" => s::<HyperbolicCltConfig>(),
        "hyperbolic_sweep" => s::<HyperbolicSweepConfig>(),
        other => return Err(Error::Parse(format!("unknown experiment {other:?}"))),
    })
}
