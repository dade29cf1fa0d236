//! Random matrix products, projective chains and the cocycle decomposition.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{projective_distance, Matrix, ProjPoint};
use crate::measures::{Draw, MatrixMap, MatrixMeasure, MeasureField};
use crate::rng::{split_seed, CounterRng};
use crate::scalar::{Field, LogAccumulator};
use crate::transport::{w1_points, EXACT_ATOM_CAP};

pub const DEFAULT_RENORM_PERIOD: usize = 8;
pub const DEFAULT_BURN_IN: usize = 1000;
/// Angular bins used for the stationarity defect of large planar samples.
pub const DEFECT_BINS: usize = 512;

#[derive(Clone, Debug)]
pub struct WalkConfig<F: MeasureField> {
    pub measure: MatrixMeasure<F>,
    pub n: usize,
    pub trials: usize,
    pub master_seed: u64,
    pub x0: Option<ProjPoint<F>>,
    /// Dual point `f` for the coefficient statistic `log|f(A_n x₀)|`.
    pub functional: Option<ProjPoint<F>>,
    pub renorm_period: usize,
    pub record_wedge: bool,
    pub record_gamma: bool,
    /// Record `log|tr A_n|`.
    pub record_trace: bool,
    /// Keep the per-step cocycle increments `log(‖A_k x₀‖ / ‖A_{k−1} x₀‖)`.
    pub record_path: bool,
    /// Intermediate lengths at which statistics are also recorded.
    pub checkpoints: Vec<usize>,
    /// Worker threads; 0 uses the global pool.
    pub workers: usize,
}

impl<F: MeasureField> WalkConfig<F> {
    pub fn new(measure: MatrixMeasure<F>, n: usize, trials: usize, master_seed: u64) -> Self {
        Self {
            measure,
            n,
            trials,
            master_seed,
            x0: None,
            functional: None,
            renorm_period: DEFAULT_RENORM_PERIOD,
            record_wedge: false,
            record_gamma: false,
            record_trace: false,
            record_path: false,
            checkpoints: Vec::new(),
            workers: 0,
        }
    }

    pub fn with_x0(mut self, x0: ProjPoint<F>) -> Self {
        self.x0 = Some(x0);
        self
    }

    pub fn with_functional(mut self, f: ProjPoint<F>) -> Self {
        self.functional = Some(f.as_dual(true));
        self
    }

    pub fn with_wedge(mut self) -> Self {
        self.record_wedge = true;
        self
    }

    pub fn with_gamma(mut self) -> Self {
        self.record_gamma = true;
        self
    }

    pub fn with_trace(mut self) -> Self {
        self.record_trace = true;
        self
    }

    pub fn with_path(mut self) -> Self {
        self.record_path = true;
        self
    }

    pub fn with_checkpoints(mut self, cps: Vec<usize>) -> Self {
        self.checkpoints = cps;
        self
    }

    pub fn with_renorm_period(mut self, p: usize) -> Self {
        self.renorm_period = p;
        self
    }

    pub fn with_workers(mut self, w: usize) -> Self {
        self.workers = w;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.trials == 0 || self.renorm_period == 0 {
            return Err(Error::InvalidArgument("n, trials and renorm_period must be >= 1".into()));
        }
        let d = self.measure.dim();
        for p in self.x0.iter().chain(self.functional.iter()) {
            if p.dim() != d {
                return Err(Error::InvalidArgument("start direction dimension mismatch".into()));
            }
        }
        if self.functional.is_some() && self.x0.is_none() {
            return Err(Error::InvalidArgument("the coefficient statistic needs x0".into()));
        }
        if self.checkpoints.iter().any(|&c| c == 0 || c > self.n) {
            return Err(Error::InvalidArgument("checkpoints must lie in 1..=n".into()));
        }
        Ok(())
    }
}

/// Statistics at an intermediate length.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Snapshot {
    pub n: usize,
    pub log_norm: f64,
    pub log_vec_norm: Option<f64>,
    pub log_coeff: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord<F: Field> {
    pub trial: u64,
    pub n: usize,
    pub log_norm: f64,
    pub log_vec_norm: Option<f64>,
    pub log_coeff: Option<f64>,
    pub log_wedge_norm: Option<f64>,
    pub gamma_n: Option<f64>,
    pub log_abs_trace: Option<f64>,
    pub endpoint: Option<ProjPoint<F>>,
    pub trial_seed: u64,
    pub path: Option<Vec<f64>>,
    pub snapshots: Vec<Snapshot>,
}

/// Run `f` on a pool with `workers` threads (0: global pool).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Simulate `trials` independent products; records come back in trial order
/// and depend only on `(master_seed, trial index)`.
pub fn run_products<F: MeasureField>(cfg: &WalkConfig<F>) -> Result<Vec<TrialRecord<F>>> {
    cfg.validate()?;
    let wedge_atoms: Option<Vec<Matrix<F>>> = match (cfg.record_wedge, cfg.measure.atom_list()) {
        (true, Some(atoms)) => Some(atoms.iter().map(|(m, _)| m.wedge2()).collect::<Result<_>>()?),
        _ => None,
    };
    let results: Vec<Result<TrialRecord<F>>> = with_workers(cfg.workers, || {
        (0..cfg.trials as u64)
            .into_par_iter()
            .map(|t| run_trial(cfg, wedge_atoms.as_deref(), t))
            .collect()
    })?;
    results.into_iter().collect()
}

fn coeff_of<F: Field>(f: &ProjPoint<F>, v: &[F]) -> Result<f64> {
    let ctx = v[0].ctx();
    let mut acc = F::zero(ctx);
    for (a, b) in f.coords().iter().zip(v) {
        acc = match acc.add(&a.mul(b)?) {
            Err(Error::PrecisionLoss) => F::zero(ctx),
            r => r?,
        };
    }
    Ok(acc.log_abs())
}

struct Stream<F: Field> {
    prod: Option<Matrix<F>>,
    acc: LogAccumulator,
}

impl<F: MeasureField> Stream<F> {
    fn new() -> Self {
        Self { prod: None, acc: LogAccumulator::new() }
    }

    fn step(&mut self, m: &Matrix<F>, renorm: bool) -> Result<()> {
        let next = match self.prod.take() {
            None => m.clone(),
            Some(mut p) => {
                if F::product_at_risk(m, &p) {
                    self.acc.push(F::renormalize_matrix(&mut p)?);
                }
                F::product(m, &p)?
            }
        };
        self.prod = Some(next);
        if renorm {
            self.acc.push(F::renormalize_matrix(self.prod.as_mut().unwrap())?);
        }
        Ok(())
    }

    fn log_norm(&self) -> Result<f64> {
        let p = self.prod.as_ref().expect("at least one step");
        Ok(self.acc.value() + p.operator_norm()?.ln())
    }
}

fn run_trial<F: MeasureField>(
    cfg: &WalkConfig<F>,
    wedge_atoms: Option<&[Matrix<F>]>,
    trial: u64,
) -> Result<TrialRecord<F>> {
    let seed = split_seed(cfg.master_seed, trial);
    let fail = |e: Error| Error::TrialFailure { trial, seed, reason: e.to_string() };
    let mut rng = CounterRng::new(seed);
    let mut main = Stream::new();
    let mut wedge = Stream::new();
    let mut v: Option<Vec<F>> = cfg.x0.as_ref().map(|x| x.coords().to_vec());
    let mut vacc = LogAccumulator::new();
    let mut path = cfg.record_path.then(|| Vec::with_capacity(cfg.n));
    let mut snapshots = Vec::new();
    let mut cps = cfg.checkpoints.clone();
    cps.sort_unstable();
    cps.dedup();
    let mut next_cp = cps.iter().peekable();

    for step in 1..=cfg.n {
        let draw = cfg.measure.draw(&mut rng).map_err(fail)?;
        let m = draw.matrix();
        let renorm = step % cfg.renorm_period == 0;
        main.step(m, renorm).map_err(fail)?;
        if cfg.record_wedge {
            let w = match (&draw, wedge_atoms) {
                (Draw::Atom(i, _), Some(ws)) => ws[*i].clone(),
                _ => m.wedge2().map_err(fail)?,
            };
            wedge.step(&w, renorm).map_err(fail)?;
        }
        if let Some(vec) = v.as_mut() {
            let mut nv = m.mul_vec(vec).map_err(fail)?;
            let s = F::renormalize_vector(&mut nv).map_err(fail)?;
            vacc.push(s);
            if let Some(p) = path.as_mut() {
                p.push(s.value());
            }
            *vec = nv;
        }
        if next_cp.peek() == Some(&&step) {
            next_cp.next();
            let log_coeff = match (&cfg.functional, &v) {
                (Some(f), Some(vec)) => Some(vacc.value() + coeff_of(f, vec).map_err(fail)?),
                _ => None,
            };
            snapshots.push(Snapshot {
                n: step,
                log_norm: main.log_norm().map_err(fail)?,
                log_vec_norm: v.as_ref().map(|_| vacc.value()),
                log_coeff,
            });
        }
    }

    let log_norm = main.log_norm().map_err(fail)?;
    if !log_norm.is_finite() {
        return Err(fail(Error::NumericalFailure(format!("log-norm {log_norm}"))));
    }
    let log_wedge_norm = if cfg.record_wedge { Some(wedge.log_norm().map_err(fail)?) } else { None };
    let gamma_n = if cfg.record_gamma {
        // the rescaled product has lost det = 1, so leave SL mode before ∧²
        let mut p = main.prod.clone().unwrap().with_mode(crate::linalg::GroupMode::GL);
        F::renormalize_matrix(&mut p).map_err(fail)?;
        let pn = p.operator_norm().map_err(fail)?;
        Some(p.wedge2().map_err(fail)?.operator_norm().map_err(fail)? / (pn * pn))
    } else {
        None
    };
    let log_abs_trace = if cfg.record_trace {
        let p = main.prod.as_ref().unwrap();
        Some(main.acc.value() + p.trace().map_err(fail)?.log_abs())
    } else {
        None
    };
    let log_coeff = match (&cfg.functional, &v) {
        (Some(f), Some(vec)) => Some(vacc.value() + coeff_of(f, vec).map_err(fail)?),
        _ => None,
    };
    let endpoint = match v {
        Some(vec) => Some(ProjPoint::new(vec, false).map_err(fail)?),
        None => None,
    };
    Ok(TrialRecord {
        trial,
        n: cfg.n,
        log_norm,
        log_vec_norm: cfg.x0.as_ref().map(|_| vacc.value()),
        log_coeff,
        log_wedge_norm,
        gamma_n,
        log_abs_trace,
        endpoint,
        trial_seed: seed,
        path,
        snapshots,
    })
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.17e}")).unwrap_or_default()
}

/// Fixed schema: `trial,n,log_norm,log_vec_norm,log_coeff,log_wedge,gamma_n`.
pub fn write_trials_csv<F: Field, W: Write>(records: &[TrialRecord<F>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::InvalidArgument(format!("csv write failed: {e}"));
    w.write_record(["trial", "n", "log_norm", "log_vec_norm", "log_coeff", "log_wedge", "gamma_n"])
        .map_err(io)?;
    for r in records {
        w.write_record([
            r.trial.to_string(),
            r.n.to_string(),
            format!("{:.17e}", r.log_norm),
            opt(r.log_vec_norm),
            opt(r.log_coeff),
            opt(r.log_wedge_norm),
            opt(r.gamma_n),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::InvalidArgument(format!("csv flush failed: {e}")))?;
    Ok(())
}

/// Log-norm cocycle `Φ(g, x) = log(‖gx‖ / ‖x‖)`.
pub fn cocycle<F: Field>(g: &Matrix<F>, x: &[F]) -> Result<f64> {
    let gx = g.mul_vec(x)?;
    Ok((F::vec_norm(&gx) / F::vec_norm(x)).ln())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainDirection {
    /// `x_k = g_k x_{k−1}`.
    Forward,
    /// `x_k = (g_k⁻¹)ᵀ x_{k−1}`.
    InverseTranspose,
}

#[derive(Clone, Debug)]
pub struct ChainConfig<F: MeasureField> {
    pub measure: MatrixMeasure<F>,
    pub x0: ProjPoint<F>,
    pub burn_in: usize,
    /// Recorded steps per chain.
    pub steps: usize,
    pub chains: usize,
    pub master_seed: u64,
    pub direction: ChainDirection,
    pub workers: usize,
}

impl<F: MeasureField> ChainConfig<F> {
    pub fn new(measure: MatrixMeasure<F>, x0: ProjPoint<F>, steps: usize, master_seed: u64) -> Self {
        Self {
            measure,
            x0,
            burn_in: DEFAULT_BURN_IN,
            steps,
            chains: 1,
            master_seed,
            direction: ChainDirection::Forward,
            workers: 0,
        }
    }

    pub fn with_direction(mut self, d: ChainDirection) -> Self {
        self.direction = d;
        self
    }

    pub fn with_burn_in(mut self, b: usize) -> Self {
        self.burn_in = b;
        self
    }

    pub fn with_chains(mut self, c: usize) -> Self {
        self.chains = c;
        self
    }
}

/// One recorded transition `x_prev → x_next = g·x_prev`.
#[derive(Clone, Debug)]
pub struct ChainStep<F: Field> {
    pub x_prev: ProjPoint<F>,
    pub g: Matrix<F>,
    pub x_next: ProjPoint<F>,
    /// `Φ(g, x_prev)`.
    pub cocycle: f64,
}

#[derive(Clone, Debug)]
pub struct ChainOutput<F: Field> {
    pub steps: Vec<ChainStep<F>>,
}

impl<F: Field> ChainOutput<F> {
    /// Visited points after burn-in (the `x_next` of every step).
    pub fn points(&self) -> Vec<ProjPoint<F>> {
        self.steps.iter().map(|s| s.x_next.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Borrowed view of one chain transition.
pub struct StepRef<'a, F: Field> {
    pub index: usize,
    pub x_prev: &'a ProjPoint<F>,
    pub g: &'a Matrix<F>,
    pub x_next: &'a ProjPoint<F>,
    pub cocycle: f64,
}

/// Run every chain of `cfg`, folding its recorded steps into a per-chain state.
/// Chains run in parallel on disjoint seed streams; results are in chain order.
pub fn chain_fold<F, T, I, S>(cfg: &ChainConfig<F>, init: I, step: S) -> Result<Vec<T>>
where
    F: MeasureField,
    T: Send,
    I: Fn(u64) -> T + Sync,
    S: Fn(&mut T, &StepRef<'_, F>) -> Result<()> + Sync,
{
    if cfg.x0.dim() != cfg.measure.dim() {
        return Err(Error::InvalidArgument("start direction dimension mismatch".into()));
    }
    let measure = match cfg.direction {
        ChainDirection::Forward => cfg.measure.clone(),
        ChainDirection::InverseTranspose => cfg.measure.pushforward(MatrixMap::InverseTranspose)?,
    };
    let dual = cfg.direction == ChainDirection::InverseTranspose;
    let parts: Vec<Result<T>> = with_workers(cfg.workers, || {
        (0..cfg.chains.max(1) as u64)
            .into_par_iter()
            .map(|c| {
                let seed = split_seed(cfg.master_seed ^ 0xC4A1_0000_0000_0000, c);
                let mut rng = CounterRng::new(seed);
                let mut state = init(c);
                let mut x = cfg.x0.as_dual(dual);
                for k in 0..cfg.burn_in + cfg.steps {
                    let draw = measure.draw(&mut rng)?;
                    let g = draw.matrix();
                    let gx = g.mul_vec(x.coords())?;
                    let phi = (F::vec_norm(&gx) / F::vec_norm(x.coords())).ln();
                    let next = ProjPoint::new(gx, dual)?;
                    if k >= cfg.burn_in {
                        let r = StepRef { index: k - cfg.burn_in, x_prev: &x, g, x_next: &next, cocycle: phi };
                        step(&mut state, &r)?;
                    }
                    x = next;
                }
                Ok(state)
            })
            .collect()
    })?;
    parts.into_iter().collect()
}

/// Projective Markov chain driven by i.i.d. draws; chains are concatenated in
/// chain order.
pub fn projective_chain<F: MeasureField>(cfg: &ChainConfig<F>) -> Result<ChainOutput<F>> {
    let parts = chain_fold(
        cfg,
        |_| Vec::with_capacity(cfg.steps),
        |acc: &mut Vec<ChainStep<F>>, s| {
            acc.push(ChainStep {
                x_prev: s.x_prev.clone(),
                g: s.g.clone(),
                x_next: s.x_next.clone(),
                cocycle: s.cocycle,
            });
            Ok(())
        },
    )?;
    Ok(ChainOutput { steps: parts.into_iter().flatten().collect() })
}

/// Visited points of a chain, without keeping the factors.
pub fn chain_points<F: MeasureField>(cfg: &ChainConfig<F>) -> Result<Vec<ProjPoint<F>>> {
    let parts = chain_fold(
        cfg,
        |_| Vec::with_capacity(cfg.steps),
        |acc: &mut Vec<ProjPoint<F>>, s| {
            acc.push(s.x_next.clone());
            Ok(())
        },
    )?;
    Ok(parts.into_iter().flatten().collect())
}

/// Martingale increment and Markov term of one chain step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Decomposed {
    /// `φ_k = Φ(g_k, x_{k−1}) − P̂Φ(x_{k−1})`.
    pub phi: f64,
    /// `P̂Φ(x_{k−1}) = ∫ Φ(g, x_{k−1}) dμ(g)`.
    pub markov: f64,
}

/// Split the cocycle along a forward chain into a martingale difference and a
/// function of the previous state. The conditional mean is exact for atomic
/// measures and a Monte Carlo average of `inner_samples` draws otherwise.
pub fn cocycle_decompose<F: MeasureField>(
    m: &MatrixMeasure<F>,
    chain: &ChainOutput<F>,
    inner_samples: usize,
    seed: u64,
) -> Result<Vec<Decomposed>> {
    if inner_samples == 0 && !m.is_atomic() {
        return Err(Error::InvalidArgument("inner_samples must be >= 1".into()));
    }
    chain
        .steps
        .par_iter()
        .enumerate()
        .map(|(k, s)| {
            let markov = match m.atom_list() {
                Some(atoms) => {
                    let mut acc = 0.0;
                    for (a, w) in atoms {
                        acc += w * cocycle(a, s.x_prev.coords())?;
                    }
                    acc
                }
                None => {
                    let mut rng = CounterRng::new(split_seed(seed, k as u64));
                    let mut acc = 0.0;
                    for _ in 0..inner_samples {
                        acc += cocycle(m.draw(&mut rng)?.matrix(), s.x_prev.coords())?;
                    }
                    acc / inner_samples as f64
                }
            };
            Ok(Decomposed { phi: s.cocycle - markov, markov })
        })
        .collect()
}

/// `W¹(ν̂, μ∗ν̂)` under the projective metric.
///
/// Exact when both measures are atomic with at most 512 product atoms.
/// Otherwise one `g` is drawn per atom of `ν̂`; planar real samples are then
/// binned into 512 angular cells, other samples are subsampled to 512 points.
pub fn stationarity_defect<F: MeasureField>(
    nu: &[ProjPoint<F>],
    m: &MatrixMeasure<F>,
    seed: u64,
) -> Result<f64> {
    if nu.is_empty() {
        return Err(Error::InvalidArgument("empty empirical measure".into()));
    }
    let dist = |x: &ProjPoint<F>, y: &ProjPoint<F>| projective_distance(x, y);
    let wn = 1.0 / nu.len() as f64;
    if let Some(atoms) = m.atom_list() {
        if atoms.len() * nu.len() <= EXACT_ATOM_CAP {
            let src: Vec<(ProjPoint<F>, f64)> = nu.iter().map(|x| (x.clone(), wn)).collect();
            let mut img = Vec::new();
            for x in nu {
                for (a, w) in atoms {
                    img.push((ProjPoint::new(a.mul_vec(x.coords())?, x.is_dual())?, w * wn));
                }
            }
            return Ok(w1_points(&src, &img, dist)?.primal_cost.max(0.0));
        }
    }
    let images: Vec<ProjPoint<F>> = nu
        .par_iter()
        .enumerate()
        .map(|(k, x)| {
            let mut rng = CounterRng::new(split_seed(seed, k as u64));
            let g = m.draw(&mut rng)?;
            ProjPoint::new(g.matrix().mul_vec(x.coords())?, x.is_dual())
        })
        .collect::<Result<_>>()?;
    if nu.len() <= EXACT_ATOM_CAP {
        let a: Vec<_> = nu.iter().map(|x| (x.clone(), wn)).collect();
        let b: Vec<_> = images.into_iter().map(|x| (x, wn)).collect();
        return Ok(w1_points(&a, &b, dist)?.primal_cost.max(0.0));
    }
    if nu[0].dim() == 2 && F::real_coords(nu[0].coords()).is_some() {
        let ha = angular_histogram(nu);
        let hb = angular_histogram(&images);
        return binned_w1(&ha, &hb);
    }
    // subsample paired atoms
    let mut rng = CounterRng::new(split_seed(seed, u64::MAX));
    let w = 1.0 / EXACT_ATOM_CAP as f64;
    let picks: Vec<usize> = (0..EXACT_ATOM_CAP).map(|_| rng.below(nu.len())).collect();
    let a: Vec<_> = picks.iter().map(|&i| (nu[i].clone(), w)).collect();
    let b: Vec<_> = picks.iter().map(|&i| (images[i].clone(), w)).collect();
    Ok(w1_points(&a, &b, dist)?.primal_cost.max(0.0))
}

/// Angle in `[0, π)` of a real planar projective point.
pub fn angle_of<F: MeasureField>(x: &ProjPoint<F>) -> Option<f64> {
    let c = F::real_coords(x.coords())?;
    let t = c[1].atan2(c[0]);
    Some(t.rem_euclid(std::f64::consts::PI))
}

fn angular_histogram<F: MeasureField>(pts: &[ProjPoint<F>]) -> Vec<f64> {
    let mut h = vec![0.0; DEFECT_BINS];
    let w = 1.0 / pts.len() as f64;
    for p in pts {
        let t = angle_of(p).expect("real planar point");
        let k = ((t / std::f64::consts::PI) * DEFECT_BINS as f64) as usize;
        h[k.min(DEFECT_BINS - 1)] += w;
    }
    h
}

fn binned_w1(a: &[f64], b: &[f64]) -> Result<f64> {
    let centre = |k: usize| (k as f64 + 0.5) * std::f64::consts::PI / DEFECT_BINS as f64;
    let ia: Vec<usize> = (0..a.len()).filter(|&k| a[k] > 0.0).collect();
    let ib: Vec<usize> = (0..b.len()).filter(|&k| b[k] > 0.0).collect();
    let wa: Vec<f64> = ia.iter().map(|&k| a[k]).collect();
    let wb: Vec<f64> = ib.iter().map(|&k| b[k]).collect();
    // renormalize away summation drift
    let (sa, sb): (f64, f64) = (wa.iter().sum(), wb.iter().sum());
    let wa: Vec<f64> = wa.iter().map(|x| x / sa).collect();
    let wb: Vec<f64> = wb.iter().map(|x| x / sb).collect();
    // projective distance between directions at angles s, t is |sin(s − t)|
    let cost: Vec<Vec<f64>> =
        ia.iter().map(|&i| ib.iter().map(|&j| (centre(i) - centre(j)).sin().abs()).collect()).collect();
    Ok(crate::transport::solve_exact(&wa, &wb, &cost)?.primal_cost.max(0.0))
}
