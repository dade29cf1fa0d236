use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ProjPoint;
use crate::measures::{Estimate, GaugeSpec, MatrixMeasure, MeasureField};
use crate::transport::w_concave_exact;

use super::lyapunov::{gap, lyap_top, sigma_direct, Budget, LyapMethod};

/// Estimator applied to every member of a family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(tag = "estimator", rename_all = "snake_case")]
pub enum EstimatorSpec {
    LyapTop { method: LyapMethod },
    Gap,
    /// Direct CLT spread from the start direction `(1, 0, …, 0)`.
    SigmaDirect,
}

impl EstimatorSpec {
    pub fn run<F: MeasureField>(&self, m: &MatrixMeasure<F>, budget: Budget) -> Result<Estimate> {
        match self {
            EstimatorSpec::LyapTop { method } => lyap_top(m, budget, *method),
            EstimatorSpec::Gap => gap(m, budget),
            EstimatorSpec::SigmaDirect => {
                let ctx = super::lyapunov::first_ctx(m)?;
                let mut v = vec![F::zero(ctx); m.dim()];
                v[0] = F::one(ctx);
                Ok(sigma_direct(m, &ProjPoint::new(v, false)?, budget)?.sigma)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyRow {
    pub index: usize,
    pub label: String,
    pub estimate: Estimate,
    /// Concave Wasserstein distance to the reference member.
    pub distance_to_reference: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilySweep {
    pub rows: Vec<FamilyRow>,
    /// Index of the smallest and largest point estimate.
    pub inf: usize,
    pub sup: usize,
    pub reference: usize,
    pub gauge: Option<GaugeSpec>,
    /// Pairwise distances, when every member is atomic.
    pub distances: Option<Vec<Vec<f64>>>,
}

impl FamilySweep {
    pub fn inf_estimate(&self) -> &Estimate {
        &self.rows[self.inf].estimate
    }

    pub fn sup_estimate(&self) -> &Estimate {
        &self.rows[self.sup].estimate
    }
}

/// Run `estimator` on every measure and tabulate estimates against the
/// distance to `reference`.
pub fn family_sweep<F, E>(
    measures: &[MatrixMeasure<F>],
    estimator: E,
    gauge: Option<&GaugeSpec>,
    reference: usize,
) -> Result<FamilySweep>
where
    F: MeasureField,
    E: Fn(usize, &MatrixMeasure<F>) -> Result<Estimate>,
{
    if measures.is_empty() || reference >= measures.len() {
        return Err(Error::InvalidArgument("need a nonempty family and a valid reference index".into()));
    }
    let d = measures[0].dim();
    if measures.iter().any(|m| m.dim() != d) {
        return Err(Error::InvalidArgument("family members must share a dimension".into()));
    }
    let distances = match gauge {
        Some(g) if measures.iter().all(|m| m.is_atomic()) => {
            let k = measures.len();
            let mut dm = vec![vec![0.0; k]; k];
            for i in 0..k {
                for j in i + 1..k {
                    let v = w_concave_exact(&measures[i], &measures[j], g)?.value();
                    dm[i][j] = v;
                    dm[j][i] = v;
                }
            }
            Some(dm)
        }
        _ => None,
    };
    let mut rows = Vec::with_capacity(measures.len());
    for (i, m) in measures.iter().enumerate() {
        rows.push(FamilyRow {
            index: i,
            label: m.describe(),
            estimate: estimator(i, m)?,
            distance_to_reference: distances.as_ref().map(|dm| dm[reference][i]),
        });
    }
    let by = |a: &&FamilyRow, b: &&FamilyRow| a.estimate.point.total_cmp(&b.estimate.point);
    let inf = rows.iter().min_by(by).expect("nonempty").index;
    let sup = rows.iter().max_by(by).expect("nonempty").index;
    Ok(FamilySweep { rows, inf, sup, reference, gauge: gauge.cloned(), distances })
}
