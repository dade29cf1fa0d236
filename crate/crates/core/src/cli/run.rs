//! Experiment runners: each turns a typed config into a results object and a
//! set of CSV files.

use serde::Serialize;
use serde_json::{json, Value};

use crate::anderson::{coeff_lde, lyap_vs_energy, EnergyGrid};
use crate::error::{Error, Result};
use crate::estimators::{
    birkhoff_lde, family_sweep, fit_decay, geometric_radii, lde_curve, lyap_top, norm_mean_records,
    regularity_report, sigma_coboundary, sigma_direct, spectrum2_records, BirkhoffConfig, Budget,
    CoboundaryConfig, DecayModel, LdeConfig, LdeCurve, LdeStatistic, LyapMethod,
};
use crate::hyperbolic::{
    anderson_darling_normal, deformation_sweep, octagon_rep, word_length_stats, SurfaceRep, AD_CRITICAL_1PCT,
};
use crate::linalg::{GroupMode, RealMatrix};
use crate::measures::{MatrixMeasure, MeasureField};
use crate::rng::split_seed;
use crate::transport::{cost_matrix, w_concave_entropic, w_concave_exact, w_infinity_detail};
use crate::walk::{chain_points, stationarity_defect, write_trials_csv, ChainConfig};

use super::config::*;

/// Results object plus named output files.
#[derive(Debug, Default)]
pub struct Outcome {
    pub results: Value,
    pub files: Vec<(String, Vec<u8>)>,
    /// Gnuplot script body, written only when requested.
    pub plot: Option<String>,
}

fn to_json<T: Serialize>(t: &T) -> Result<Value> {
    serde_json::to_value(t).map_err(|e| Error::NumericalFailure(format!("result serialization: {e}")))
}

fn csv_bytes(write: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    Ok(buf)
}

fn table(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    csv_bytes(|buf| {
        let mut w = csv::Writer::from_writer(buf);
        let io = |e: csv::Error| Error::InvalidArgument(format!("csv write failed: {e}"));
        w.write_record(header).map_err(io)?;
        for r in rows {
            w.write_record(r).map_err(io)?;
        }
        w.flush().map_err(|e| Error::InvalidArgument(format!("csv flush failed: {e}")))?;
        Ok(())
    })
}

fn num(x: f64) -> String {
    format!("{x:.17e}")
}

const PLOT_HEAD: &str = "set datafile separator ','\n";

fn lde_plot(csv: &str) -> String {
    format!(
        "{PLOT_HEAD}set logscale y\nset xlabel 'n'\nset ylabel 'P[deviation > n eps]'\n\
         plot '{csv}' every ::1 using 1:3:4:5 with yerrorbars title 'p_hat'\n"
    )
}

fn fits_json(curve: &LdeCurve, models: &[DecayModel]) -> Result<Value> {
    let mut out = Vec::new();
    for &m in models {
        out.push(match fit_decay(curve, m) {
            Ok(f) => to_json(&f)?,
            Err(e) => json!({ "model": m, "error": e.to_string() }),
        });
    }
    Ok(Value::Array(out))
}

pub fn lyap(c: &LyapConfig, workers: usize) -> Result<Outcome> {
    let budget = Budget::new(c.n, c.trials, c.seed).with_workers(workers);
    with_measure!(c.measure.build()?, m => {
        let mut out = Outcome::default();
        let est = match c.method {
            LyapMethod::NormMean => {
                let (est, recs) = norm_mean_records(&m, budget)?;
                if c.write_trials {
                    out.files.push(("trials.csv".into(), csv_bytes(|b| write_trials_csv(&recs, b))?));
                    out.plot = Some(format!(
                        "{PLOT_HEAD}set xlabel 'trial'\nplot 'trials.csv' every ::1 using 1:($3/$2) with dots title 'log|A_n|/n'\n"
                    ));
                }
                est
            }
            method => lyap_top(&m, budget, method)?,
        };
        out.results = json!({ "measure": m.describe(), "method": c.method, "lambda1": est });
        Ok(out)
    })
}

pub fn gap(c: &GapConfig, workers: usize) -> Result<Outcome> {
    let budget = Budget::new(c.n, c.trials, c.seed).with_workers(workers);
    with_measure!(c.measure.build()?, m => {
        let (spec, recs) = spectrum2_records(&m, budget)?;
        let mut out = Outcome { results: json!({ "measure": m.describe(), "spectrum": to_json(&spec)? }), ..Default::default() };
        if c.write_trials {
            out.files.push(("trials.csv".into(), csv_bytes(|b| write_trials_csv(&recs, b))?));
        }
        Ok(out)
    })
}

pub fn variance(c: &VarianceConfig, workers: usize) -> Result<Outcome> {
    let m = c.measure.build()?.real()?;
    let mut results = serde_json::Map::new();
    results.insert("measure".into(), Value::String(m.describe()));
    let direct = if c.route != VarianceRoute::Coboundary {
        let x0 = match &c.x0 {
            Some(v) => point_for(&m, v, false)?,
            None => first_basis(&m, false)?,
        };
        let d = sigma_direct(&m, &x0, Budget::new(c.n, c.trials, c.seed).with_workers(workers))?;
        results.insert("direct".into(), to_json(&d)?);
        Some(d.sigma.point)
    } else {
        None
    };
    let cob = if c.route != VarianceRoute::Direct {
        let mut cfg = CoboundaryConfig::new(m.clone(), c.n_inner, c.chain_samples, split_seed(c.seed, 1));
        cfg.floor = c.floor;
        cfg.workers = workers;
        let s = sigma_coboundary(&cfg)?;
        results.insert("coboundary".into(), to_json(&s)?);
        Some(s.sigma.point)
    } else {
        None
    };
    if let (Some(a), Some(b)) = (direct, cob) {
        results.insert("relative_difference".into(), json!((a - b).abs() / b.abs().max(f64::MIN_POSITIVE)));
    }
    Ok(Outcome { results: Value::Object(results), ..Default::default() })
}

fn lde_generic<F: MeasureField>(m: MatrixMeasure<F>, c: &LdeFileConfig, workers: usize) -> Result<(LdeCurve, f64)> {
    let max_n = c.n_grid.iter().copied().max().ok_or_else(|| Error::InvalidArgument("empty n_grid".into()))?;
    let mut cfg = LdeConfig::new(m.clone(), c.statistic, 0.0, c.n_grid.clone(), c.trials_per_n, c.seed).with_workers(workers);
    if let Some(x0) = &c.x0 {
        cfg = cfg.with_x0(point_for(&m, x0, false)?);
    } else if c.statistic != LdeStatistic::Norm {
        cfg = cfg.with_x0(first_basis(&m, false)?);
    }
    if let Some(f) = &c.functional {
        cfg = cfg.with_functional(point_for(&m, f, true)?);
    } else if c.statistic == LdeStatistic::Coeff {
        cfg = cfg.with_functional(first_basis(&m, true)?);
    }
    cfg.eps = match (c.eps, c.eps_fraction) {
        (Some(e), None) => e,
        (None, Some(frac)) => {
            let budget = Budget::new(max_n, c.trials_per_n, split_seed(c.seed, crate::estimators::LAMBDA_STREAM))
                .with_workers(workers);
            let lambda = lyap_top(&m, budget, LyapMethod::NormMean)?;
            let eps = frac * lambda.point;
            cfg = cfg.with_lambda(lambda);
            eps
        }
        _ => return Err(Error::InvalidArgument("give exactly one of `eps` and `eps_fraction`".into())),
    };
    let eps = cfg.eps;
    Ok((lde_curve(&cfg)?, eps))
}

pub fn lde(c: &LdeFileConfig, workers: usize) -> Result<Outcome> {
    let measure = c.measure.build()?;
    let (curve, eps) = if c.statistic == LdeStatistic::Birkhoff {
        let m = measure.real()?;
        let functional = c
            .chain_functional
            .clone()
            .ok_or_else(|| Error::InvalidArgument("the birkhoff statistic needs `chain_functional`".into()))?;
        let eps = match (c.eps, c.eps_fraction) {
            (Some(e), None) => e,
            _ => return Err(Error::InvalidArgument("the birkhoff statistic needs an absolute `eps`".into())),
        };
        let x0 = match &c.x0 {
            Some(v) => point_for(&m, v, false)?,
            None => first_basis(&m, false)?,
        };
        let mut cfg = BirkhoffConfig::new(m, functional, x0, eps, c.n_grid.clone(), c.trials_per_n, c.seed);
        cfg.workers = workers;
        if let Some(r) = c.reference_steps {
            cfg.reference_steps = r;
        }
        (birkhoff_lde(&cfg)?, eps)
    } else {
        if c.chain_functional.is_some() || c.reference_steps.is_some() {
            return Err(Error::InvalidArgument("chain_functional and reference_steps need the birkhoff statistic".into()));
        }
        with_measure!(measure, m => lde_generic(m, c, workers)?)
    };
    Ok(Outcome {
        results: json!({ "eps": eps, "curve": to_json(&curve)?, "fits": fits_json(&curve, &c.fits)? }),
        files: vec![("lde.csv".into(), csv_bytes(|b| curve.write_csv(b))?)],
        plot: Some(lde_plot("lde.csv")),
    })
}

fn wdist_generic<F: MeasureField>(a: &MatrixMeasure<F>, b: &MatrixMeasure<F>, c: &WdistConfig) -> Result<Outcome> {
    let mut out = Outcome::default();
    match c.solver {
        WdistSolver::Winf => {
            let w = w_infinity_detail(a, b)?;
            out.results = json!({ "solver": c.solver, "value": w.value, "detail": to_json(&w)? });
        }
        solver => {
            let plan = match solver {
                WdistSolver::Entropic { eps, tol } => w_concave_entropic(a, b, &c.gauge, eps, tol)?,
                _ => w_concave_exact(a, b, &c.gauge)?,
            };
            let cost = cost_matrix(a, b, &c.gauge)?;
            out.files.push(("plan.csv".into(), csv_bytes(|buf| plan.write_csv(buf, &cost))?));
            out.results = json!({
                "solver": c.solver,
                "gauge": c.gauge,
                "value": plan.value(),
                "dual_value": plan.dual_value(),
                "duality_gap": plan.duality_gap,
                "bracket": plan.bracket,
            });
        }
    }
    Ok(out)
}

pub fn wdist(c: &WdistConfig, _workers: usize) -> Result<Outcome> {
    match (c.a.build()?, c.b.build()?) {
        (AnyMeasure::Real(a), AnyMeasure::Real(b)) => wdist_generic(&a, &b, c),
        (AnyMeasure::Padic(a), AnyMeasure::Padic(b)) => wdist_generic(&a, &b, c),
        _ => Err(Error::InvalidMeasure("both measures must live over the same field".into())),
    }
}

pub fn regularity(c: &RegularityConfig, workers: usize) -> Result<Outcome> {
    let m = c.measure.build()?.real()?;
    let x0 = match &c.x0 {
        Some(v) => point_for(&m, v, false)?,
        None => first_basis(&m, false)?,
    };
    let mut chain = ChainConfig::new(m.clone(), x0, c.samples, c.seed).with_burn_in(c.burn_in);
    chain.workers = workers;
    let points = chain_points(&chain)?;
    let radii = geometric_radii(c.radii.lo, c.radii.hi, c.radii.count);
    let report = regularity_report(&points, &radii, c.centers, split_seed(c.seed, 1))?;
    let defect = if c.defect { Some(stationarity_defect(&points, &m, split_seed(c.seed, 2))?) } else { None };
    let rows: Vec<Vec<String>> = report.radii.iter().zip(&report.max_mass).map(|(r, p)| vec![num(*r), num(*p)]).collect();
    Ok(Outcome {
        results: json!({ "measure": m.describe(), "report": to_json(&report)?, "stationarity_defect": defect }),
        files: vec![("masses.csv".into(), table(&["radius", "max_mass"], &rows)?)],
        plot: Some(format!(
            "{PLOT_HEAD}set logscale xy\nset xlabel 'radius'\nset ylabel 'max ball mass'\n\
             plot 'masses.csv' every ::1 using 1:2 with linespoints title 'max mass'\n"
        )),
    })
}

fn family_generic<F: MeasureField>(members: Vec<MatrixMeasure<F>>, c: &FamilyConfig, workers: usize) -> Result<Outcome> {
    // common random numbers: every member uses the same master seed
    let budget = Budget::new(c.n, c.trials, c.seed).with_workers(workers);
    let mut sweep = family_sweep(&members, |_, m| c.estimator.run(m, budget), c.gauge.as_ref(), c.reference)?;
    if let Some(labels) = &c.labels {
        if labels.len() != sweep.rows.len() {
            return Err(Error::InvalidArgument("one label per family member".into()));
        }
        for (r, l) in sweep.rows.iter_mut().zip(labels) {
            r.label = l.clone();
        }
    }
    let rows: Vec<Vec<String>> = sweep
        .rows
        .iter()
        .map(|r| {
            vec![
                r.index.to_string(),
                r.label.clone(),
                num(r.estimate.point),
                num(r.estimate.stderr),
                r.distance_to_reference.map(num).unwrap_or_default(),
            ]
        })
        .collect();
    Ok(Outcome {
        results: json!({ "estimator": c.estimator, "sweep": to_json(&sweep)? }),
        files: vec![("family.csv".into(), table(&["index", "label", "point", "stderr", "distance"], &rows)?)],
        plot: Some(format!(
            "{PLOT_HEAD}set xlabel 'distance to reference'\nset ylabel 'estimate'\n\
             plot 'family.csv' every ::1 using 5:3:4 with yerrorbars title 'estimate'\n"
        )),
    })
}

pub fn family(c: &FamilyConfig, workers: usize) -> Result<Outcome> {
    let built = c.members.iter().map(|d| d.build()).collect::<Result<Vec<_>>>()?;
    if built.iter().all(|m| matches!(m, AnyMeasure::Real(_))) {
        family_generic(built.into_iter().map(|m| m.real()).collect::<Result<Vec<_>>>()?, c, workers)
    } else {
        let padic = built
            .into_iter()
            .map(|m| match m {
                AnyMeasure::Padic(p) => Ok(p),
                AnyMeasure::Real(_) => Err(Error::InvalidMeasure("family members must share a field".into())),
            })
            .collect::<Result<Vec<_>>>()?;
        family_generic(padic, c, workers)
    }
}

pub fn anderson_sweep(c: &AndersonSweepConfig, workers: usize) -> Result<Outcome> {
    let grid = EnergyGrid::linspace(c.emin, c.emax, c.count)?;
    let rows = lyap_vs_energy(&c.potential, &grid, c.n, c.trials, c.seed, workers)?;
    let csv_rows: Vec<Vec<String>> =
        rows.iter().map(|r| vec![num(r.energy), num(r.lambda.point), num(r.lambda.stderr)]).collect();
    Ok(Outcome {
        results: json!({ "potential": c.potential, "rows": to_json(&rows)? }),
        files: vec![("energy.csv".into(), table(&["E", "lambda", "stderr"], &csv_rows)?)],
        plot: Some(format!(
            "{PLOT_HEAD}set xlabel 'E'\nset ylabel 'lambda'\nplot 'energy.csv' every ::1 using 1:2:3 with yerrorbars title 'lambda(E)'\n"
        )),
    })
}

pub fn anderson_lde(c: &AndersonLdeConfig, _workers: usize) -> Result<Outcome> {
    let curve = coeff_lde(&c.potential, c.energy, &c.x, &c.y, c.eps, c.n_grid.clone(), c.trials, c.seed)?;
    Ok(Outcome {
        results: json!({ "eps": c.eps, "curve": to_json(&curve)?, "fits": fits_json(&curve, &c.fits)? }),
        files: vec![("lde.csv".into(), csv_bytes(|b| curve.write_csv(b))?)],
        plot: Some(lde_plot("lde.csv")),
    })
}

fn build_rep(r: &RepDecl) -> Result<SurfaceRep> {
    match r {
        RepDecl::Named(NamedRep::Octagon) => octagon_rep(),
        RepDecl::Custom { generators, relator } => {
            let gens = generators
                .iter()
                .map(|g| RealMatrix::from_rows(g.clone(), GroupMode::SL))
                .collect::<Result<Vec<_>>>()
                .map_err(|e| Error::InvalidRep(e.to_string()))?;
            match relator {
                Some(rel) => SurfaceRep::closed(gens, rel.clone()),
                None => SurfaceRep::free(gens),
            }
        }
    }
}

pub fn hyperbolic_clt(c: &HyperbolicCltConfig, workers: usize) -> Result<Outcome> {
    let rep = build_rep(&c.rep)?;
    let stats = word_length_stats(&rep, c.n, c.trials, c.mode, c.seed, workers)?;
    let finite: Vec<f64> = stats.lengths.iter().copied().filter(|x| !x.is_nan()).collect();
    let ad = anderson_darling_normal(&finite).ok();
    let rows: Vec<Vec<String>> = stats
        .lengths
        .iter()
        .enumerate()
        .map(|(i, l)| vec![i.to_string(), if l.is_nan() { String::new() } else { num(*l) }])
        .collect();
    Ok(Outcome {
        results: json!({
            "relator_residual": rep.relator_residual(),
            "stats": to_json(&stats)?,
            "anderson_darling": ad,
            "ad_critical_1pct": AD_CRITICAL_1PCT,
            "normal_at_1pct": ad.map(|a| a < AD_CRITICAL_1PCT),
        }),
        files: vec![("lengths.csv".into(), table(&["trial", "length"], &rows)?)],
        plot: Some(format!(
            "{PLOT_HEAD}set xlabel 'length'\nbin(x) = 0.5*floor(x/0.5)\n\
             plot 'lengths.csv' every ::1 using (bin($2)):(1.0) smooth frequency with boxes title 'lengths'\n"
        )),
    })
}

pub fn hyperbolic_sweep(c: &HyperbolicSweepConfig, workers: usize) -> Result<Outcome> {
    if c.steps == 0 {
        return Err(Error::InvalidArgument("steps must be >= 1".into()));
    }
    let rep = build_rep(&c.rep)?;
    let grid: Vec<f64> = (0..=c.steps).map(|k| c.tmax * k as f64 / c.steps as f64).collect();
    let sweep = deformation_sweep(&rep, &grid, c.n, c.trials, c.mode, c.seed, workers)?;
    let rows: Vec<Vec<String>> = sweep
        .rows
        .iter()
        .map(|r| {
            vec![
                num(r.t),
                num(r.w_infinity),
                num(r.stats.l_hat),
                num(r.stats.l_stderr),
                num(r.stats.sigma_hat),
                num(r.paired_stderr),
                r.relator_residual.map(num).unwrap_or_default(),
            ]
        })
        .collect();
    Ok(Outcome {
        results: json!({
            "label": "formal deformation",
            "sweep": to_json(&sweep)?,
            "envelope_violations": sweep.envelope_violations(1.5, 3.0),
        }),
        files: vec![(
            "sweep.csv".into(),
            table(&["t", "w_infinity", "l_hat", "l_stderr", "sigma_hat", "paired_stderr", "relator_residual"], &rows)?,
        )],
        plot: Some(format!(
            "{PLOT_HEAD}set xlabel 'W_infinity'\nset ylabel 'L_hat'\n\
             plot 'sweep.csv' every ::1 using 2:3:6 with yerrorbars title 'L_hat(t)'\n"
        )),
    })
}
