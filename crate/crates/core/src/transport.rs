//! Concave Wasserstein distances between atomic matrix measures.

use std::collections::VecDeque;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::anderson::PotentialSpec;
use crate::error::{Error, Result};
use crate::linalg::{group_distance, Matrix, RealMatrix};
use crate::measures::{
    lifted_factor, GaugeSpec, LiftOrientation, MatrixMap, MatrixMeasure, MeasureField, RealMeasure,
};

/// Largest support handled by the exact solver.
pub const EXACT_ATOM_CAP: usize = 512;
const MARGINAL_TOL: f64 = 1e-10;
const WINF_GRID: u64 = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "solver", rename_all = "snake_case")]
pub enum SolverTag {
    Exact,
    Entropic { eps: f64 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TransportPlan {
    /// Row-major `n₁ × n₂` coupling.
    pub coupling: Vec<Vec<f64>>,
    pub primal_cost: f64,
    pub dual_potentials: (Vec<f64>, Vec<f64>),
    /// Primal cost minus the dual objective of a feasible dual pair.
    pub duality_gap: f64,
    pub solver: SolverTag,
    /// Certified `[lower, upper]` bracket on the exact value.
    pub bracket: (f64, f64),
}

impl TransportPlan {
    pub fn value(&self) -> f64 {
        self.primal_cost
    }

    pub fn dual_value(&self) -> f64 {
        self.primal_cost - self.duality_gap
    }

    /// Writes `i,j,mass,cost` for every positive coupling entry.
    pub fn write_csv<W: Write>(&self, out: W, cost: &[Vec<f64>]) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::InvalidArgument(format!("csv write failed: {e}"));
        w.write_record(["i", "j", "mass", "cost"]).map_err(io)?;
        for (i, row) in self.coupling.iter().enumerate() {
            for (j, &m) in row.iter().enumerate() {
                if m > 0.0 {
                    w.serialize((i, j, m, cost[i][j])).map_err(io)?;
                }
            }
        }
        w.flush().map_err(|e| Error::InvalidArgument(format!("csv flush failed: {e}")))?;
        Ok(())
    }
}

fn check_marginal(w: &[f64]) -> Result<()> {
    if w.is_empty() || w.iter().any(|x| !(*x >= 0.0)) {
        return Err(Error::InvalidMeasure("marginal weights must be nonnegative".into()));
    }
    let s: f64 = w.iter().sum();
    if (s - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidMeasure(format!("marginal sums to {s}")));
    }
    Ok(())
}

fn dual_objective(a: &[f64], b: &[f64], u: &[f64], v: &[f64]) -> f64 {
    a.iter().zip(u).map(|(x, y)| x * y).sum::<f64>() + b.iter().zip(v).map(|(x, y)| x * y).sum::<f64>()
}

/// `v_j = min_i (c_ij − u_i)`: the best dual partner of `u`, feasible by construction.
fn c_transform(cost: &[Vec<f64>], u: &[f64]) -> Vec<f64> {
    let n = cost[0].len();
    (0..n)
        .map(|j| cost.iter().zip(u).map(|(row, ui)| row[j] - ui).fold(f64::INFINITY, f64::min))
        .collect()
}

/// Exact discrete optimal transport by the transportation (network) simplex
/// method: northwest-corner start, Bland's rule for entering and leaving cells.
pub fn solve_exact(a: &[f64], b: &[f64], cost: &[Vec<f64>]) -> Result<TransportPlan> {
    check_marginal(a)?;
    check_marginal(b)?;
    let (m, n) = (a.len(), b.len());
    if cost.len() != m || cost.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidArgument("cost matrix shape mismatch".into()));
    }
    if cost.iter().flatten().any(|c| !c.is_finite()) {
        return Err(Error::NumericalFailure("non-finite ground cost".into()));
    }
    let cmax = cost.iter().flatten().fold(0.0f64, |x, c| x.max(c.abs()));
    let tol = 1e-13 * cmax.max(1.0);

    let mut x = vec![vec![0.0f64; n]; m];
    let mut basic = vec![vec![false; n]; m];
    // northwest corner
    {
        let mut ra = a.to_vec();
        let mut rb = b.to_vec();
        let (mut i, mut j) = (0, 0);
        loop {
            let q = ra[i].min(rb[j]).max(0.0);
            x[i][j] = q;
            basic[i][j] = true;
            ra[i] -= q;
            rb[j] -= q;
            if i == m - 1 && j == n - 1 {
                break;
            }
            if j == n - 1 || (i < m - 1 && ra[i] <= rb[j]) {
                i += 1;
            } else {
                j += 1;
            }
        }
    }
    // final cell absorbs rounding residue so marginals match
    let mut u = vec![0.0; m];
    let mut v = vec![0.0; n];
    let max_iter = 50 * (m + n) * (m + n) + 1000;
    let mut iter = 0;
    loop {
        iter += 1;
        if iter > max_iter {
            return Err(Error::NumericalFailure("network simplex iteration cap reached".into()));
        }
        potentials(cost, &basic, &mut u, &mut v);
        // Bland: first cell in row-major order with negative reduced cost
        let mut entering = None;
        'scan: for i in 0..m {
            for j in 0..n {
                if !basic[i][j] && cost[i][j] - u[i] - v[j] < -tol {
                    entering = Some((i, j));
                    break 'scan;
                }
            }
        }
        let Some((ei, ej)) = entering else { break };
        let path = tree_path(&basic, ei, ej);
        // path alternates −, +, −, … starting at the entering row
        let mut theta = f64::INFINITY;
        let mut leave = None;
        for (k, &(pi, pj)) in path.iter().enumerate() {
            if k % 2 == 0 {
                let f = x[pi][pj];
                let idx = pi * n + pj;
                let better = match leave {
                    None => true,
                    Some((li, lj)) => f < theta || (f == theta && idx < li * n + lj),
                };
                if better {
                    theta = f;
                    leave = Some((pi, pj));
                }
            }
        }
        let (li, lj) = leave.expect("cycle has a decreasing cell");
        for (k, &(pi, pj)) in path.iter().enumerate() {
            if k % 2 == 0 {
                x[pi][pj] -= theta;
            } else {
                x[pi][pj] += theta;
            }
        }
        x[ei][ej] = theta;
        basic[ei][ej] = true;
        basic[li][lj] = false;
        x[li][lj] = 0.0;
    }
    for row in x.iter_mut() {
        for e in row.iter_mut() {
            if *e < 0.0 {
                *e = 0.0;
            }
        }
    }
    let primal: f64 = x.iter().zip(cost).map(|(xr, cr)| xr.iter().zip(cr).map(|(p, c)| p * c).sum::<f64>()).sum();
    let v = c_transform(cost, &u);
    let dual = dual_objective(a, b, &u, &v);
    let gap = (primal - dual).max(0.0);
    Ok(TransportPlan {
        coupling: x,
        primal_cost: primal,
        dual_potentials: (u, v),
        duality_gap: gap,
        solver: SolverTag::Exact,
        bracket: (dual.min(primal), primal),
    })
}

/// Solve `u_i + v_j = c_ij` on the basic spanning tree with `u_0 = 0`.
fn potentials(cost: &[Vec<f64>], basic: &[Vec<bool>], u: &mut [f64], v: &mut [f64]) {
    let (m, n) = (u.len(), v.len());
    let mut seen_r = vec![false; m];
    let mut seen_c = vec![false; n];
    let mut queue = VecDeque::new();
    u[0] = 0.0;
    seen_r[0] = true;
    queue.push_back((true, 0usize));
    while let Some((is_row, k)) = queue.pop_front() {
        if is_row {
            for j in 0..n {
                if basic[k][j] && !seen_c[j] {
                    v[j] = cost[k][j] - u[k];
                    seen_c[j] = true;
                    queue.push_back((false, j));
                }
            }
        } else {
            for i in 0..m {
                if basic[i][k] && !seen_r[i] {
                    u[i] = cost[i][k] - v[k];
                    seen_r[i] = true;
                    queue.push_back((true, i));
                }
            }
        }
    }
}

/// Cells on the tree path from row `ei` to column `ej`, in order from the row.
fn tree_path(basic: &[Vec<bool>], ei: usize, ej: usize) -> Vec<(usize, usize)> {
    let (m, n) = (basic.len(), basic[0].len());
    // nodes: rows 0..m, columns m..m+n
    let mut parent = vec![usize::MAX; m + n];
    let mut queue = VecDeque::new();
    parent[ei] = ei;
    queue.push_back(ei);
    while let Some(node) = queue.pop_front() {
        if node == m + ej {
            break;
        }
        if node < m {
            for j in 0..n {
                if basic[node][j] && parent[m + j] == usize::MAX {
                    parent[m + j] = node;
                    queue.push_back(m + j);
                }
            }
        } else {
            let j = node - m;
            for i in 0..m {
                if basic[i][j] && parent[i] == usize::MAX {
                    parent[i] = node;
                    queue.push_back(i);
                }
            }
        }
    }
    let mut cells = Vec::new();
    let mut node = m + ej;
    while node != ei {
        let p = parent[node];
        let cell = if node >= m { (p, node - m) } else { (node, p - m) };
        cells.push(cell);
        node = p;
    }
    cells.reverse();
    cells
}

/// Log-domain Sinkhorn with a certified bracket `[dual lower bound, rounded-plan cost]`.
pub fn solve_entropic(
    a: &[f64],
    b: &[f64],
    cost: &[Vec<f64>],
    eps: f64,
    tol: f64,
    max_iter: usize,
) -> Result<TransportPlan> {
    check_marginal(a)?;
    check_marginal(b)?;
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument("entropic regularization must be positive".into()));
    }
    let (m, n) = (a.len(), b.len());
    let la: Vec<f64> = a.iter().map(|x| x.ln()).collect();
    let lb: Vec<f64> = b.iter().map(|x| x.ln()).collect();
    let mut f = vec![0.0; m];
    let mut g = vec![0.0; n];
    let lse = |it: &mut dyn Iterator<Item = f64>| {
        let vals: Vec<f64> = it.collect();
        let mx = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if mx == f64::NEG_INFINITY {
            return mx;
        }
        mx + vals.iter().map(|v| (v - mx).exp()).sum::<f64>().ln()
    };
    let plan_of = |f: &[f64], g: &[f64]| -> Vec<Vec<f64>> {
        (0..m)
            .map(|i| (0..n).map(|j| ((f[i] + g[j] - cost[i][j]) / eps + la[i] + lb[j]).exp()).collect())
            .collect()
    };
    let mut converged = false;
    let mut violation = f64::INFINITY;
    for _ in 0..max_iter {
        for i in 0..m {
            let s = lse(&mut (0..n).map(|j| (g[j] - cost[i][j]) / eps + lb[j]));
            f[i] = -eps * s;
        }
        for j in 0..n {
            let s = lse(&mut (0..m).map(|i| (f[i] - cost[i][j]) / eps + la[i]));
            g[j] = -eps * s;
        }
        let p = plan_of(&f, &g);
        violation = p.iter().zip(a).map(|(r, ai)| (r.iter().sum::<f64>() - ai).abs()).sum();
        if violation < tol {
            converged = true;
            break;
        }
    }
    let p = plan_of(&f, &g);
    let rounded = round_to_marginals(p, a, b);
    let upper: f64 = rounded.iter().zip(cost).map(|(xr, cr)| xr.iter().zip(cr).map(|(x, c)| x * c).sum::<f64>()).sum();
    let gt = c_transform(cost, &f);
    let lower = dual_objective(a, b, &f, &gt).max(0.0).min(upper);
    if !converged {
        return Err(Error::NumericalFailure(format!(
            "Sinkhorn did not reach tolerance {tol} (marginal violation {violation:.3e}); best bracket [{lower}, {upper}]"
        )));
    }
    Ok(TransportPlan {
        coupling: rounded,
        primal_cost: upper,
        dual_potentials: (f, gt),
        duality_gap: upper - lower,
        solver: SolverTag::Entropic { eps },
        bracket: (lower, upper),
    })
}

/// Project a near-feasible plan onto the transport polytope (row/column
/// scaling followed by a rank-one correction).
fn round_to_marginals(mut p: Vec<Vec<f64>>, a: &[f64], b: &[f64]) -> Vec<Vec<f64>> {
    let (m, n) = (a.len(), b.len());
    for i in 0..m {
        let r: f64 = p[i].iter().sum();
        if r > a[i] {
            let s = a[i] / r;
            p[i].iter_mut().for_each(|x| *x *= s);
        }
    }
    for j in 0..n {
        let c: f64 = (0..m).map(|i| p[i][j]).sum();
        if c > b[j] {
            let s = b[j] / c;
            (0..m).for_each(|i| p[i][j] *= s);
        }
    }
    let er: Vec<f64> = (0..m).map(|i| (a[i] - p[i].iter().sum::<f64>()).max(0.0)).collect();
    let ec: Vec<f64> = (0..n).map(|j| (b[j] - (0..m).map(|i| p[i][j]).sum::<f64>()).max(0.0)).collect();
    let tot: f64 = er.iter().sum();
    if tot > 0.0 {
        for i in 0..m {
            for j in 0..n {
                p[i][j] += er[i] * ec[j] / tot;
            }
        }
    }
    p
}

fn atoms_of<F: MeasureField>(m: &MatrixMeasure<F>) -> Result<&[(Matrix<F>, f64)]> {
    m.atom_list().ok_or_else(|| Error::InvalidMeasure("an atomic measure is required".into()))
}

fn check_compatible<F: MeasureField>(a: &MatrixMeasure<F>, b: &MatrixMeasure<F>) -> Result<()> {
    let (x, y) = (atoms_of(a)?, atoms_of(b)?);
    if a.dim() != b.dim() || a.mode() != b.mode() || x[0].0.ctx() != y[0].0.ctx() {
        return Err(Error::InvalidMeasure("measures differ in dimension, mode or field".into()));
    }
    Ok(())
}

/// Pairwise group distances, assembled by rows in parallel.
pub fn distance_matrix<F: MeasureField>(a: &MatrixMeasure<F>, b: &MatrixMeasure<F>) -> Result<Vec<Vec<f64>>> {
    check_compatible(a, b)?;
    let (x, y) = (atoms_of(a)?, atoms_of(b)?);
    x.par_iter()
        .map(|(ai, _)| y.iter().map(|(bj, _)| group_distance(ai, bj)).collect::<Result<Vec<_>>>())
        .collect()
}

pub fn cost_matrix<F: MeasureField>(
    a: &MatrixMeasure<F>,
    b: &MatrixMeasure<F>,
    g: &GaugeSpec,
) -> Result<Vec<Vec<f64>>> {
    g.validate()?;
    Ok(distance_matrix(a, b)?
        .into_iter()
        .map(|r| r.into_iter().map(|d| g.eval(d)).collect())
        .collect())
}

fn weights<F: MeasureField>(m: &MatrixMeasure<F>) -> Result<Vec<f64>> {
    Ok(atoms_of(m)?.iter().map(|x| x.1).collect())
}

/// Concave Wasserstein distance with ground cost `gauge(d(A_i, B_j))`, solved exactly.
pub fn w_concave_exact<F: MeasureField>(
    a: &MatrixMeasure<F>,
    b: &MatrixMeasure<F>,
    g: &GaugeSpec,
) -> Result<TransportPlan> {
    let (na, nb) = (atoms_of(a)?.len(), atoms_of(b)?.len());
    if na.max(nb) > EXACT_ATOM_CAP {
        return Err(Error::TooLarge(na.max(nb), EXACT_ATOM_CAP));
    }
    let cost = cost_matrix(a, b, g)?;
    solve_exact(&weights(a)?, &weights(b)?, &cost)
}

/// Entropic approximation with a certified bracket around the exact value.
pub fn w_concave_entropic<F: MeasureField>(
    a: &MatrixMeasure<F>,
    b: &MatrixMeasure<F>,
    g: &GaugeSpec,
    eps: f64,
    tol: f64,
) -> Result<TransportPlan> {
    let cost = cost_matrix(a, b, g)?;
    solve_entropic(&weights(a)?, &weights(b)?, &cost, eps, tol, 100_000)
}

/// Integer masses on a common grid.
#[derive(Clone, Debug, PartialEq)]
pub struct IntegerWeights {
    pub denominator: u64,
    pub masses: Vec<u64>,
    /// Largest `|w_i − k_i/q|`.
    pub rounding_radius: f64,
}

/// Exact common denominator `q ≤ 1024` when every weight is `k/q` to 1e−9,
/// otherwise largest-remainder rounding to the 1/1024 grid.
pub fn integer_weights(ws: &[f64], q_hint: Option<u64>) -> IntegerWeights {
    let candidates: Vec<u64> = match q_hint {
        Some(q) => vec![q],
        None => (1..=WINF_GRID).collect(),
    };
    for q in candidates {
        let qf = q as f64;
        let ks: Vec<f64> = ws.iter().map(|w| (w * qf).round()).collect();
        if ws.iter().zip(&ks).all(|(w, k)| (w * qf - k).abs() <= 1e-9 * qf)
            && ks.iter().sum::<f64>() == qf
        {
            return IntegerWeights { denominator: q, masses: ks.iter().map(|k| *k as u64).collect(), rounding_radius: 0.0 };
        }
    }
    let q = q_hint.unwrap_or(WINF_GRID);
    let qf = q as f64;
    let mut ks: Vec<u64> = ws.iter().map(|w| (w * qf).floor() as u64).collect();
    let mut rest = q.saturating_sub(ks.iter().sum());
    let mut order: Vec<usize> = (0..ws.len()).collect();
    order.sort_by(|&i, &j| {
        let fi = ws[i] * qf - ks[i] as f64;
        let fj = ws[j] * qf - ks[j] as f64;
        fj.total_cmp(&fi).then(i.cmp(&j))
    });
    for &i in order.iter().cycle() {
        if rest == 0 {
            break;
        }
        ks[i] += 1;
        rest -= 1;
    }
    let radius = ws.iter().zip(&ks).map(|(w, k)| (w - *k as f64 / qf).abs()).fold(0.0, f64::max);
    IntegerWeights { denominator: q, masses: ks, rounding_radius: radius }
}

/// Dinic max-flow on a small dense graph.
struct FlowNet {
    n: usize,
    adj: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<u64>,
}

impl FlowNet {
    fn new(n: usize) -> Self {
        Self { n, adj: vec![Vec::new(); n], to: Vec::new(), cap: Vec::new() }
    }

    fn edge(&mut self, u: usize, v: usize, c: u64) {
        self.adj[u].push(self.to.len());
        self.to.push(v);
        self.cap.push(c);
        self.adj[v].push(self.to.len());
        self.to.push(u);
        self.cap.push(0);
    }

    fn max_flow(&mut self, s: usize, t: usize) -> u64 {
        let mut total = 0;
        loop {
            let mut level = vec![usize::MAX; self.n];
            level[s] = 0;
            let mut q = VecDeque::from([s]);
            while let Some(u) = q.pop_front() {
                for &e in &self.adj[u] {
                    if self.cap[e] > 0 && level[self.to[e]] == usize::MAX {
                        level[self.to[e]] = level[u] + 1;
                        q.push_back(self.to[e]);
                    }
                }
            }
            if level[t] == usize::MAX {
                return total;
            }
            let mut it = vec![0usize; self.n];
            loop {
                let f = self.augment(s, t, u64::MAX, &level, &mut it);
                if f == 0 {
                    break;
                }
                total += f;
            }
        }
    }

    fn augment(&mut self, u: usize, t: usize, f: u64, level: &[usize], it: &mut [usize]) -> u64 {
        if u == t {
            return f;
        }
        while it[u] < self.adj[u].len() {
            let e = self.adj[u][it[u]];
            let v = self.to[e];
            if self.cap[e] > 0 && level[v] == level[u] + 1 {
                let d = self.augment(v, t, f.min(self.cap[e]), level, it);
                if d > 0 {
                    self.cap[e] -= d;
                    self.cap[e ^ 1] += d;
                    return d;
                }
            }
            it[u] += 1;
        }
        0
    }
}

fn bottleneck_feasible(dist: &[Vec<f64>], ka: &[u64], kb: &[u64], r: f64, q: u64) -> bool {
    let (m, n) = (ka.len(), kb.len());
    let (s, t) = (m + n, m + n + 1);
    let mut net = FlowNet::new(m + n + 2);
    for i in 0..m {
        net.edge(s, i, ka[i]);
        for j in 0..n {
            if dist[i][j] <= r {
                net.edge(i, m + j, q);
            }
        }
    }
    for j in 0..n {
        net.edge(m + j, t, kb[j]);
    }
    net.max_flow(s, t) == q
}

/// Bottleneck value for a distance matrix and integer masses.
pub fn bottleneck(dist: &[Vec<f64>], ka: &[u64], kb: &[u64]) -> Result<f64> {
    let q: u64 = ka.iter().sum();
    if q != kb.iter().sum::<u64>() || q == 0 {
        return Err(Error::InvalidMeasure("integer masses must have equal positive totals".into()));
    }
    let mut cands: Vec<f64> = dist.iter().flatten().copied().collect();
    cands.sort_by(f64::total_cmp);
    cands.dedup();
    let (mut lo, mut hi) = (0usize, cands.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if bottleneck_feasible(dist, ka, kb, cands[mid], q) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(cands[lo])
}

#[derive(Clone, Debug, Serialize)]
pub struct WInfinity {
    pub value: f64,
    pub denominator: u64,
    pub rounding_radius: f64,
}

/// `W∞` between atomic measures under the group metric.
pub fn w_infinity_detail<F: MeasureField>(a: &MatrixMeasure<F>, b: &MatrixMeasure<F>) -> Result<WInfinity> {
    let dist = distance_matrix(a, b)?;
    let wa = integer_weights(&weights(a)?, None);
    let wb = integer_weights(&weights(b)?, None);
    // bring both to one denominator
    let (wa, wb) = if wa.denominator == wb.denominator {
        (wa, wb)
    } else {
        let l = lcm(wa.denominator, wb.denominator);
        if l <= WINF_GRID * WINF_GRID {
            let sa = l / wa.denominator;
            let sb = l / wb.denominator;
            (
                IntegerWeights { denominator: l, masses: wa.masses.iter().map(|k| k * sa).collect(), ..wa },
                IntegerWeights { denominator: l, masses: wb.masses.iter().map(|k| k * sb).collect(), ..wb },
            )
        } else {
            (
                integer_weights(&weights(a)?, Some(WINF_GRID)),
                integer_weights(&weights(b)?, Some(WINF_GRID)),
            )
        }
    };
    let value = bottleneck(&dist, &wa.masses, &wb.masses)?;
    Ok(WInfinity {
        value,
        denominator: wa.denominator,
        rounding_radius: wa.rounding_radius.max(wb.rounding_radius),
    })
}

pub fn w_infinity<F: MeasureField>(a: &MatrixMeasure<F>, b: &MatrixMeasure<F>) -> Result<f64> {
    Ok(w_infinity_detail(a, b)?.value)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// Pushforward of a matrix measure (atoms mapped elementwise, weights kept).
pub fn pushforward<F: MeasureField>(m: &MatrixMeasure<F>, map: MatrixMap) -> Result<MatrixMeasure<F>> {
    m.pushforward(map)
}

/// Lift of a potential law by `x ↦ [[x − E, −1], [1, 0]]`. Continuous laws are
/// discretized to `atom_cap` quantiles.
pub fn energy_shift(potential: &PotentialSpec, energy: f64, atom_cap: usize) -> Result<RealMeasure> {
    let atoms: Vec<(RealMatrix, f64)> = potential
        .discretize(atom_cap)?
        .into_iter()
        .map(|(x, w)| (lifted_factor(x, energy, LiftOrientation::Shift), w))
        .collect();
    RealMeasure::atoms(atoms)
}

/// Exact `W¹` between two weighted point clouds under a caller-supplied metric.
pub fn w1_points<T: Sync>(
    a: &[(T, f64)],
    b: &[(T, f64)],
    dist: impl Fn(&T, &T) -> Result<f64> + Sync,
) -> Result<TransportPlan> {
    if a.len().max(b.len()) > EXACT_ATOM_CAP {
        return Err(Error::TooLarge(a.len().max(b.len()), EXACT_ATOM_CAP));
    }
    let cost: Vec<Vec<f64>> = a
        .par_iter()
        .map(|(x, _)| b.iter().map(|(y, _)| dist(x, y)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let wa: Vec<f64> = a.iter().map(|x| x.1).collect();
    let wb: Vec<f64> = b.iter().map(|x| x.1).collect();
    solve_exact(&wa, &wb, &cost)
}

/// Row and column sums of a coupling agree with the marginals.
pub fn marginals_ok(plan: &TransportPlan, a: &[f64], b: &[f64]) -> bool {
    let rows_ok = plan.coupling.iter().zip(a).all(|(r, ai)| (r.iter().sum::<f64>() - ai).abs() <= MARGINAL_TOL);
    let cols_ok = (0..b.len()).all(|j| (plan.coupling.iter().map(|r| r[j]).sum::<f64>() - b[j]).abs() <= MARGINAL_TOL);
    rows_ok && cols_ok
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::GroupMode;
    use crate::rng::CounterRng;

    fn diag(a: f64) -> RealMatrix {
        RealMatrix::real_diag(&[a, 1.0 / a], GroupMode::SL).unwrap()
    }

    #[test]
    fn identical_measures_cost_zero() {
        let m = RealMeasure::uniform(vec![diag(2.0), diag(3.0), diag(0.7)]).unwrap();
        let p = w_concave_exact(&m, &m, &GaugeSpec::Log { p: 1.0 }).unwrap();
        assert!(p.primal_cost.abs() < 1e-15);
        for i in 0..3 {
            assert!((p.coupling[i][i] - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn dirac_cost_is_gauge_of_distance() {
        let (a, b) = (diag(2.0), diag(5.0));
        let g = GaugeSpec::Slog { delta: 0.5 };
        let p = w_concave_exact(&RealMeasure::dirac(a.clone()), &RealMeasure::dirac(b.clone()), &g).unwrap();
        assert!((p.primal_cost - g.eval(group_distance(&a, &b).unwrap())).abs() < 1e-15);
    }

    #[test]
    fn simplex_matches_brute_force_on_random_costs() {
        let mut rng = CounterRng::new(8);
        for _ in 0..300 {
            let n = 2 + rng.below(5);
            let cost: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.uniform()).collect()).collect();
            let w = vec![1.0 / n as f64; n];
            let p = solve_exact(&w, &w, &cost).unwrap();
            let best = permutations(n)
                .iter()
                .map(|perm| perm.iter().enumerate().map(|(i, &j)| cost[i][j]).sum::<f64>() / n as f64)
                .fold(f64::INFINITY, f64::min);
            assert!((p.primal_cost - best).abs() < 1e-12);
            assert!(p.duality_gap <= 1e-7 * p.primal_cost.max(1.0));
            assert!(marginals_ok(&p, &w, &w));
        }
    }

    #[test]
    fn simplex_handles_unequal_supports_and_degeneracy() {
        let a = [0.5, 0.5];
        let b = [0.25, 0.25, 0.25, 0.25];
        let cost = vec![vec![0.0, 1.0, 0.0, 1.0], vec![1.0, 0.0, 1.0, 0.0]];
        let p = solve_exact(&a, &b, &cost).unwrap();
        assert!(p.primal_cost.abs() < 1e-15);
        assert!(marginals_ok(&p, &a, &b));
    }

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 1 {
            return vec![vec![0]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for k in 0..n {
                let mut q = p.clone();
                q.insert(k, n - 1);
                out.push(q);
            }
        }
        out
    }

    #[test]
    fn entropic_bracket_contains_exact() {
        let mut rng = CounterRng::new(21);
        let n = 64;
        let a: Vec<(RealMatrix, f64)> = (0..n).map(|_| (diag(1.0 + 3.0 * rng.uniform()), 1.0 / n as f64)).collect();
        let b: Vec<(RealMatrix, f64)> = (0..n).map(|_| (diag(1.0 + 3.0 * rng.uniform()), 1.0 / n as f64)).collect();
        let (a, b) = (RealMeasure::atoms(a).unwrap(), RealMeasure::atoms(b).unwrap());
        let g = GaugeSpec::Log { p: 1.0 };
        let exact = w_concave_exact(&a, &b, &g).unwrap().primal_cost;
        let ent = w_concave_entropic(&a, &b, &g, 0.01, 1e-9).unwrap();
        assert!(ent.bracket.0 <= exact + 1e-12 && exact <= ent.bracket.1 + 1e-12, "{:?} {exact}", ent.bracket);
    }

    #[test]
    fn entropic_identical_and_dirac() {
        let m = RealMeasure::uniform(vec![diag(2.0), diag(3.0), diag(0.7), diag(1.1)]).unwrap();
        let g = GaugeSpec::Identity;
        let eps = 0.01;
        let p = w_concave_entropic(&m, &m, &g, eps, 1e-10).unwrap();
        assert!(p.bracket.0 >= 0.0);
        assert!(p.bracket.1 <= eps * 4f64.ln() + 1e-6);
        let (x, y) = (diag(2.0), diag(4.0));
        let p = w_concave_entropic(&RealMeasure::dirac(x.clone()), &RealMeasure::dirac(y.clone()), &g, eps, 1e-10)
            .unwrap();
        let d = group_distance(&x, &y).unwrap();
        assert!(p.bracket.0 <= d + 1e-12 && d <= p.bracket.1 + 1e-12);
    }

    #[test]
    fn winf_examples() {
        let (x, y) = (diag(2.0), diag(4.0));
        let d = group_distance(&x, &y).unwrap();
        assert_eq!(w_infinity(&RealMeasure::dirac(x.clone()), &RealMeasure::dirac(y)).unwrap(), d);
        let m = RealMeasure::uniform(vec![x, diag(3.0)]).unwrap();
        assert_eq!(w_infinity(&m, &m).unwrap(), 0.0);
    }

    #[test]
    fn integer_weight_grids() {
        let w = integer_weights(&[1.0 / 3.0, 2.0 / 3.0], None);
        assert_eq!((w.denominator, w.masses.clone(), w.rounding_radius), (3, vec![1, 2], 0.0));
        let w = integer_weights(&[0.1234567, 0.8765433], None);
        assert_eq!(w.denominator, 1024);
        assert_eq!(w.masses.iter().sum::<u64>(), 1024);
        assert!(w.rounding_radius <= 1.0 / 1024.0);
    }

    #[test]
    fn energy_shift_of_dirac_zero() {
        let m = energy_shift(&PotentialSpec::Atoms { atoms: vec![(0.0, 1.0)] }, 0.0, 1).unwrap();
        let atoms = m.atom_list().unwrap();
        assert_eq!(atoms[0].0.entries(), &[0.0, -1.0, 1.0, 0.0]);
    }

    #[test]
    fn pushforward_examples() {
        let m = RealMeasure::uniform(vec![diag(2.0), RealMatrix::rotation(0.4)]).unwrap();
        let w = pushforward(&m, MatrixMap::Wedge2).unwrap();
        assert!(w.atom_list().unwrap().iter().all(|(a, _)| a.entries() == [1.0]));
        let it = pushforward(&RealMeasure::dirac(diag(2.0)), MatrixMap::InverseTranspose).unwrap();
        assert_eq!(it.atom_list().unwrap()[0].0, diag(0.5));
    }

    #[test]
    fn csv_export() {
        let a = [0.5, 0.5];
        let cost = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        let p = solve_exact(&a, &a, &cost).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf, &cost).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("i,j,mass,cost\n0,0,0.5,0.0\n"));
    }
}
