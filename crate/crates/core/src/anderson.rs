//! One-dimensional Anderson model: potentials, transfer products and energy sweeps.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal as NormalDist};

use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::estimators::{lde_curve, LdeConfig, LdeCurve, LdeStatistic};
use crate::linalg::{RealMatrix, RealProjPoint};
use crate::measures::{Estimate, Family, GaugeSpec, LiftOrientation, MatrixMeasure, RealMeasure, lifted_factor};
use crate::rng::{split_seed, CounterRng};
use crate::transport::{energy_shift, w_concave_exact};
use crate::walk::{run_products, TrialRecord, WalkConfig};

/// Largest sampled `log(1 + |V|)` for the log-Pareto family; keeps `|V|` finite.
pub const LOG_PARETO_CAP: f64 = 700.0;

/// Law of the i.i.d. potential values `V_n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    /// `±v` with equal probability.
    Bernoulli { v: f64 },
    Uniform { a: f64, b: f64 },
    Gaussian { mean: f64, std: f64 },
    /// Random sign times `e^L − 1` with `P[L > t] = min(1, t^{−p})`.
    LogPareto { p: f64 },
    /// Finite law `[(value, weight)]`.
    Atoms { atoms: Vec<(f64, f64)> },
}

impl PotentialSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidMeasure(m.to_string()));
        match self {
            PotentialSpec::Bernoulli { v } if !v.is_finite() => bad("bernoulli value must be finite"),
            PotentialSpec::Uniform { a, b } if !(a < b) || !b.is_finite() || !a.is_finite() => {
                bad("uniform potential needs a < b")
            }
            PotentialSpec::Gaussian { mean, std } if !mean.is_finite() || !(*std > 0.0) => {
                bad("gaussian potential needs std > 0")
            }
            PotentialSpec::LogPareto { p } if !(*p > 0.0) || !p.is_finite() => {
                bad("log_pareto needs p > 0")
            }
            PotentialSpec::Atoms { atoms } => {
                if atoms.is_empty() {
                    return bad("empty potential atom list");
                }
                let total: f64 = atoms.iter().map(|a| a.1).sum();
                if atoms.iter().any(|a| !(a.1 > 0.0) || !a.0.is_finite()) || (total - 1.0).abs() > 1e-12 {
                    return bad("potential weights must be positive and sum to 1");
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Errors unless the law charges at least two distinct values.
    pub fn require_nondegenerate(&self) -> Result<()> {
        self.validate()?;
        let degenerate = match self {
            PotentialSpec::Bernoulli { v } => *v == 0.0,
            PotentialSpec::Atoms { atoms } => atoms.iter().all(|a| a.0 == atoms[0].0),
            _ => false,
        };
        if degenerate {
            return Err(Error::InvalidMeasure("potential is supported on a single point".into()));
        }
        Ok(())
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, PotentialSpec::Bernoulli { .. } | PotentialSpec::Atoms { .. })
    }

    /// Whether `V` and `−V` have the same law.
    pub fn is_symmetric(&self) -> bool {
        match self {
            PotentialSpec::Bernoulli { .. } | PotentialSpec::LogPareto { .. } => true,
            PotentialSpec::Uniform { a, b } => a == &-b,
            PotentialSpec::Gaussian { mean, .. } => *mean == 0.0,
            PotentialSpec::Atoms { atoms } => atoms.iter().all(|&(v, w)| {
                atoms.iter().any(|&(u, x)| u == -v && (x - w).abs() <= 1e-12)
            }),
        }
    }

    pub fn sample(&self, rng: &mut CounterRng) -> f64 {
        match self {
            PotentialSpec::Bernoulli { v } => {
                if rng.uniform() < 0.5 {
                    *v
                } else {
                    -*v
                }
            }
            PotentialSpec::Uniform { a, b } => a + (b - a) * rng.uniform(),
            PotentialSpec::Gaussian { mean, std } => {
                Normal::new(*mean, *std).expect("validated").sample(rng)
            }
            PotentialSpec::LogPareto { p } => {
                let negative = rng.uniform() < 0.5;
                let l = rng.uniform_open0().powf(-1.0 / p).min(LOG_PARETO_CAP);
                let mag = l.exp_m1();
                if negative {
                    -mag
                } else {
                    mag
                }
            }
            PotentialSpec::Atoms { atoms } => {
                let u = rng.uniform();
                let mut acc = 0.0;
                for &(v, w) in atoms {
                    acc += w;
                    if u < acc {
                        return v;
                    }
                }
                atoms[atoms.len() - 1].0
            }
        }
    }

    /// Quantile function of `V` at `u ∈ (0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        match self {
            PotentialSpec::Bernoulli { v } => {
                if u < 0.5 {
                    -v.abs()
                } else {
                    v.abs()
                }
            }
            PotentialSpec::Uniform { a, b } => a + (b - a) * u,
            PotentialSpec::Gaussian { mean, std } => {
                NormalDist::new(*mean, *std).expect("validated").inverse_cdf(u)
            }
            PotentialSpec::LogPareto { p } => {
                let w = (2.0 * u - 1.0).abs();
                let l = (1.0 - w).powf(-1.0 / p).min(LOG_PARETO_CAP);
                l.exp_m1().copysign(u - 0.5)
            }
            PotentialSpec::Atoms { atoms } => {
                let mut sorted = atoms.clone();
                sorted.sort_by(|x, y| x.0.total_cmp(&y.0));
                let mut acc = 0.0;
                for &(v, w) in &sorted {
                    acc += w;
                    if u < acc {
                        return v;
                    }
                }
                sorted[sorted.len() - 1].0
            }
        }
    }

    /// Atoms of the law, or `cap` equal-weight midpoint quantiles for continuous laws.
    pub fn discretize(&self, cap: usize) -> Result<Vec<(f64, f64)>> {
        self.validate()?;
        match self {
            PotentialSpec::Bernoulli { v } if *v == 0.0 => Ok(vec![(0.0, 1.0)]),
            PotentialSpec::Bernoulli { v } => Ok(vec![(-v.abs(), 0.5), (v.abs(), 0.5)]),
            PotentialSpec::Atoms { atoms } => Ok(atoms.clone()),
            _ => {
                if cap == 0 {
                    return Err(Error::InvalidArgument("atom cap must be positive".into()));
                }
                let w = 1.0 / cap as f64;
                Ok((0..cap).map(|i| (self.quantile((i as f64 + 0.5) * w), w)).collect())
            }
        }
    }
}

/// Strictly increasing list of energies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyGrid {
    energies: Vec<f64>,
}

impl EnergyGrid {
    pub fn new(energies: Vec<f64>) -> Result<Self> {
        if energies.is_empty() || energies.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidArgument("energy grid must be nonempty and finite".into()));
        }
        if energies.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("energy grid must be strictly increasing".into()));
        }
        Ok(Self { energies })
    }

    /// `count` equally spaced energies from `emin` to `emax` inclusive.
    pub fn linspace(emin: f64, emax: f64, count: usize) -> Result<Self> {
        match count {
            0 => Err(Error::InvalidArgument("energy count must be positive".into())),
            1 => Self::new(vec![emin]),
            _ => {
                let h = (emax - emin) / (count - 1) as f64;
                let mut es: Vec<f64> = (0..count).map(|i| emin + h * i as f64).collect();
                es[count - 1] = emax;
                Self::new(es)
            }
        }
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }
}

/// Law of the transfer factor `[[E − V, −1], [1, 0]]`.
pub fn transfer_measure(spec: &PotentialSpec, energy: f64) -> Result<RealMeasure> {
    MatrixMeasure::family(Family::AndersonLifted {
        potential: spec.clone(),
        energy,
        orientation: LiftOrientation::Transfer,
    })
}

fn e1() -> RealProjPoint {
    RealProjPoint::new(vec![1.0, 0.0], false).expect("nonzero")
}

/// One transfer product `A_n^E = T(V_n)⋯T(V_1)`.
#[derive(Clone, Debug)]
pub struct TransferProduct {
    /// Walk-engine record with `x₀ = e₁`.
    pub record: TrialRecord<f64>,
    /// `A_n^E = e^{log_scale} · matrix`.
    pub matrix: RealMatrix,
    pub log_scale: f64,
    /// `V_1, …, V_n` in draw order.
    pub potentials: Vec<f64>,
}

/// Transfer product of trial 0 under `seed`; the explicit matrix replays the
/// walk engine's draws.
pub fn transfer_product(spec: &PotentialSpec, energy: f64, n: usize, seed: u64) -> Result<TransferProduct> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    let m = transfer_measure(spec, energy)?;
    let cfg = WalkConfig::new(m, n, 1, seed).with_x0(e1());
    let record = run_products(&cfg)?.remove(0);

    let mut rng = CounterRng::new(split_seed(seed, 0));
    let mut matrix = RealMatrix::identity((), 2, crate::linalg::GroupMode::SL);
    let mut log_scale = 0.0;
    let mut potentials = Vec::with_capacity(n);
    for _ in 0..n {
        let v = spec.sample(&mut rng);
        potentials.push(v);
        matrix = lifted_factor(v, energy, LiftOrientation::Transfer).mul_fast(&matrix);
        let big = matrix.entries().iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if big > 1e100 {
            matrix.scale_in_place(1.0 / big);
            log_scale += big.ln();
        }
        if !matrix.is_finite() {
            return Err(Error::NumericalFailure("transfer product is not finite".into()));
        }
    }
    Ok(TransferProduct { record, matrix, log_scale, potentials })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergyRow {
    pub energy: f64,
    pub lambda: Estimate,
}

/// `λ̂(E)` from `log‖A_n^E e₁‖ / n` at every grid energy; energy `i` uses the
/// stream `split_seed(seed, i)`.
pub fn lyap_vs_energy(
    spec: &PotentialSpec,
    grid: &EnergyGrid,
    n: usize,
    trials: usize,
    seed: u64,
    workers: usize,
) -> Result<Vec<EnergyRow>> {
    spec.require_nondegenerate()?;
    grid.energies()
        .iter()
        .enumerate()
        .map(|(i, &e)| {
            let s = split_seed(seed, i as u64);
            let cfg = WalkConfig::new(transfer_measure(spec, e)?, n, trials, s).with_x0(e1()).with_workers(workers);
            let xs: Vec<f64> =
                run_products(&cfg)?.iter().map(|r| r.log_vec_norm.expect("x0 set") / n as f64).collect();
            Ok(EnergyRow { energy: e, lambda: Estimate::from_samples(&xs, s) })
        })
        .collect()
}

/// Deviation curve of `log|⟨y, A_n^E x⟩|`.
#[allow(clippy::too_many_arguments)]
pub fn coeff_lde(
    spec: &PotentialSpec,
    energy: f64,
    x: &[f64],
    y: &[f64],
    eps: f64,
    n_grid: Vec<usize>,
    trials: usize,
    seed: u64,
) -> Result<LdeCurve> {
    for v in [x, y] {
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if v.len() != 2 || (norm - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument("x and y must be unit vectors in R^2".into()));
        }
    }
    spec.require_nondegenerate()?;
    let cfg = LdeConfig::new(transfer_measure(spec, energy)?, LdeStatistic::Coeff, eps, n_grid, trials, seed)
        .with_x0(RealProjPoint::new(x.to_vec(), false)?)
        .with_functional(RealProjPoint::new(y.to_vec(), true)?);
    lde_curve(&cfg)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PushforwardDistance {
    pub computed: f64,
    /// `gauge(|E₁ − E₂|)`, the cost of the diagonal coupling.
    pub bound: f64,
}

/// Concave Wasserstein distance between the energy-shifted lifts of the
/// potential law at `e1` and `e2`, with the diagonal-coupling bound.
pub fn energy_pushforward_distance(
    spec: &PotentialSpec,
    e1: f64,
    e2: f64,
    gauge: &GaugeSpec,
    atom_cap: usize,
) -> Result<PushforwardDistance> {
    gauge.validate()?;
    let a = energy_shift(spec, e1, atom_cap)?;
    let b = energy_shift(spec, e2, atom_cap)?;
    let computed = w_concave_exact(&a, &b, gauge)?.value();
    let bound = gauge.eval((e1 - e2).abs());
    if computed > bound + 1e-9 {
        return Err(Error::BoundViolated { computed, bound });
    }
    Ok(PushforwardDistance { computed, bound })
}
