//! Small dense square matrices over ℝ or ℚ_p.
//!
//! Base matrices have dimension 2..=6; exterior squares of those reach
//! C(6,2) = 15, and the exterior square of an SL₂ matrix is 1×1, so the
//! container accepts 1..=15.

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::scalar::Field;

pub const MAX_DIM: usize = 15;
pub const MAX_BASE_DIM: usize = 6;

const SVD_MAX_SWEEPS: usize = 30;
const SVD_TOL: f64 = 1e-14;
const TIE_TOL: f64 = 1e-10;
const SL_DET_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(rename_all = "lowercase")]
pub enum GroupMode {
    SL,
    GL,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<F: Field> {
    d: usize,
    data: SmallVec<[F; 9]>,
    mode: GroupMode,
}

pub type RealMatrix = Matrix<f64>;

impl<F: Field> Matrix<F> {
    /// Row-major constructor; validates the group-mode invariant.
    pub fn new(d: usize, data: Vec<F>, mode: GroupMode) -> Result<Self> {
        let m = Self::new_unchecked(d, data, mode)?;
        m.validate()?;
        Ok(m)
    }

    /// Shape check only; the determinant condition of `mode` is not verified.
    pub fn new_unchecked(d: usize, data: Vec<F>, mode: GroupMode) -> Result<Self> {
        if d == 0 || d > MAX_DIM {
            return Err(Error::InvalidArgument(format!("dimension {d} outside 1..={MAX_DIM}")));
        }
        if data.len() != d * d {
            return Err(Error::InvalidArgument(format!(
                "expected {} entries for a {d}x{d} matrix, got {}",
                d * d,
                data.len()
            )));
        }
        Ok(Self { d, data: SmallVec::from_vec(data), mode })
    }

    pub fn from_rows(rows: Vec<Vec<F>>, mode: GroupMode) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidArgument("matrix rows must form a square".into()));
        }
        Self::new(d, rows.into_iter().flatten().collect(), mode)
    }

    pub fn identity(ctx: F::Ctx, d: usize, mode: GroupMode) -> Self {
        let mut data = vec![F::zero(ctx); d * d];
        for i in 0..d {
            data[i * d + i] = F::one(ctx);
        }
        Self { d, data: SmallVec::from_vec(data), mode }
    }

    pub fn diag(entries: Vec<F>, mode: GroupMode) -> Result<Self> {
        let d = entries.len();
        let ctx = entries
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty diagonal".into()))?
            .ctx();
        let mut data = vec![F::zero(ctx); d * d];
        for (i, e) in entries.into_iter().enumerate() {
            data[i * d + i] = e;
        }
        Self::new(d, data, mode)
    }

    /// Checks the SL / GL determinant condition.
    pub fn validate(&self) -> Result<()> {
        let det = self.det()?;
        let one = F::one(det.ctx());
        match self.mode {
            GroupMode::GL => {
                if det.is_zero() {
                    return Err(Error::SingularMatrix);
                }
            }
            GroupMode::SL => {
                // real: |det - 1| small; p-adic: det == 1 at working precision
                if det.abs_diff_one(&one) > SL_DET_TOL {
                    return Err(Error::InvalidArgument(format!(
                        "determinant {det} is not 1 (SL mode)"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn mode(&self) -> GroupMode {
        self.mode
    }

    pub fn with_mode(mut self, mode: GroupMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn ctx(&self) -> F::Ctx {
        self.data[0].ctx()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &F {
        &self.data[i * self.d + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: F) {
        self.data[i * self.d + j] = v;
    }

    pub fn entries(&self) -> &[F] {
        &self.data
    }

    pub fn entries_mut(&mut self) -> &mut [F] {
        &mut self.data
    }

    pub fn rows(&self) -> Vec<Vec<F>> {
        self.data.chunks(self.d).map(|r| r.to_vec()).collect()
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.d != other.d {
            return Err(Error::InvalidArgument(format!(
                "dimension mismatch: {} vs {}",
                self.d, other.d
            )));
        }
        Ok(())
    }

    /// `self · other`; the result keeps `self`'s group mode.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let d = self.d;
        let ctx = self.ctx();
        let mut data: SmallVec<[F; 9]> = SmallVec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let mut acc = F::zero(ctx);
                for k in 0..d {
                    let t = self.data[i * d + k].mul(&other.data[k * d + j])?;
                    acc = add_or_zero(&acc, &t)?;
                }
                data.push(acc);
            }
        }
        Ok(Self { d, data, mode: self.mode })
    }

    pub fn mul_vec(&self, v: &[F]) -> Result<Vec<F>> {
        if v.len() != self.d {
            return Err(Error::InvalidArgument("vector length mismatch".into()));
        }
        let d = self.d;
        let ctx = self.ctx();
        (0..d)
            .map(|i| {
                let mut acc = F::zero(ctx);
                for k in 0..d {
                    acc = add_or_zero(&acc, &self.data[i * d + k].mul(&v[k])?)?;
                }
                Ok(acc)
            })
            .collect()
    }

    /// Row vector times matrix: the functional `f ∘ self`.
    pub fn vec_mul(&self, f: &[F]) -> Result<Vec<F>> {
        self.transpose().mul_vec(f)
    }

    pub fn transpose(&self) -> Self {
        let d = self.d;
        let mut data = self.data.clone();
        for i in 0..d {
            for j in 0..d {
                data[j * d + i] = self.data[i * d + j].clone();
            }
        }
        Self { d, data, mode: self.mode }
    }

    /// Entrywise difference with total cancellation read as exact zero.
    pub fn diff_lossy(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let data = self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a.sub_lossy(b))
            .collect();
        Ok(Self { d: self.d, data, mode: GroupMode::GL })
    }

    pub fn trace(&self) -> Result<F> {
        let mut acc = F::zero(self.ctx());
        for i in 0..self.d {
            acc = acc.add(self.get(i, i))?;
        }
        Ok(acc)
    }

    /// Determinant by elimination with largest-absolute-value pivots.
    pub fn det(&self) -> Result<F> {
        let d = self.d;
        let ctx = self.ctx();
        if d == 1 {
            return Ok(self.data[0].clone());
        }
        if d == 2 {
            let ad = self.data[0].mul(&self.data[3])?;
            let bc = self.data[1].mul(&self.data[2])?;
            return Ok(ad.sub_lossy(&bc));
        }
        let mut a: Vec<F> = self.data.to_vec();
        let mut det = F::one(ctx);
        for col in 0..d {
            let piv = (col..d)
                .max_by(|&r1, &r2| a[r1 * d + col].abs().total_cmp(&a[r2 * d + col].abs()))
                .unwrap();
            if a[piv * d + col].is_zero() {
                return Ok(F::zero(ctx));
            }
            if piv != col {
                for j in 0..d {
                    a.swap(col * d + j, piv * d + j);
                }
                det = det.neg();
            }
            let pinv = a[col * d + col].inv()?;
            det = det.mul(&a[col * d + col])?;
            for r in col + 1..d {
                let factor = a[r * d + col].mul(&pinv)?;
                if factor.is_zero() {
                    continue;
                }
                for j in col..d {
                    let t = factor.mul(&a[col * d + j])?;
                    a[r * d + j] = a[r * d + j].sub_lossy(&t);
                }
            }
        }
        Ok(det)
    }

    /// Inverse by Gauss–Jordan elimination.
    pub fn inverse(&self) -> Result<Self> {
        let d = self.d;
        let ctx = self.ctx();
        if d == 2 {
            let det = self.det()?;
            if det.is_zero() {
                return Err(Error::SingularMatrix);
            }
            let di = det.inv()?;
            let [a, b, c, e] = [&self.data[0], &self.data[1], &self.data[2], &self.data[3]];
            let data = vec![e.mul(&di)?, b.neg().mul(&di)?, c.neg().mul(&di)?, a.mul(&di)?];
            return Ok(Self { d, data: SmallVec::from_vec(data), mode: self.mode });
        }
        let mut a: Vec<F> = self.data.to_vec();
        let mut inv: Vec<F> = Self::identity(ctx, d, self.mode).data.to_vec();
        for col in 0..d {
            let piv = (col..d)
                .max_by(|&r1, &r2| a[r1 * d + col].abs().total_cmp(&a[r2 * d + col].abs()))
                .unwrap();
            if a[piv * d + col].is_zero() {
                return Err(Error::SingularMatrix);
            }
            if piv != col {
                for j in 0..d {
                    a.swap(col * d + j, piv * d + j);
                    inv.swap(col * d + j, piv * d + j);
                }
            }
            let pinv = a[col * d + col].inv()?;
            for j in 0..d {
                a[col * d + j] = a[col * d + j].mul(&pinv)?;
                inv[col * d + j] = inv[col * d + j].mul(&pinv)?;
            }
            for r in 0..d {
                if r == col || a[r * d + col].is_zero() {
                    continue;
                }
                let factor = a[r * d + col].clone();
                for j in 0..d {
                    let t = factor.mul(&a[col * d + j])?;
                    a[r * d + j] = a[r * d + j].sub_lossy(&t);
                    let t = factor.mul(&inv[col * d + j])?;
                    inv[r * d + j] = inv[r * d + j].sub_lossy(&t);
                }
            }
        }
        Ok(Self { d, data: SmallVec::from_vec(inv), mode: self.mode })
    }

    /// `(M⁻¹)ᵀ`, the contragredient action on the dual space.
    pub fn inverse_transpose(&self) -> Result<Self> {
        Ok(self.inverse()?.transpose())
    }

    pub fn scale(&self, s: &F) -> Result<Self> {
        let data = self.data.iter().map(|x| x.mul(s)).collect::<Result<_>>()?;
        Ok(Self { d: self.d, data, mode: self.mode })
    }

    /// Matrix of the induced map on Λ²𝕂^d in the lexicographic basis
    /// `e_i ∧ e_j`, `i < j`. For SL₂ this is `[det] = [1]`, returned exactly.
    pub fn wedge2(&self) -> Result<Self> {
        let d = self.d;
        let ctx = self.ctx();
        if d < 2 {
            return Err(Error::InvalidArgument("wedge2 needs d >= 2".into()));
        }
        if d == 2 && self.mode == GroupMode::SL {
            return Ok(Self::identity(ctx, 1, GroupMode::SL));
        }
        let pairs: Vec<(usize, usize)> =
            (0..d).flat_map(|i| (i + 1..d).map(move |j| (i, j))).collect();
        let n = pairs.len();
        let mut data = Vec::with_capacity(n * n);
        for &(i, j) in &pairs {
            for &(k, l) in &pairs {
                let a = self.get(i, k).mul(self.get(j, l))?;
                let b = self.get(i, l).mul(self.get(j, k))?;
                data.push(a.sub_lossy(&b));
            }
        }
        Ok(Self { d: n, data: SmallVec::from_vec(data), mode: self.mode })
    }
}

/// Sum in which cancellation of every tracked digit yields an exact zero.
#[inline]
fn add_or_zero<F: Field>(a: &F, b: &F) -> Result<F> {
    match a.add(b) {
        Err(Error::PrecisionLoss) => Ok(F::zero(a.ctx())),
        r => r,
    }
}

impl<F: Field> Matrix<F> {
    pub fn operator_norm(&self) -> Result<f64> {
        F::operator_norm(self)
    }
}

/// Helper on scalars used by SL validation: `|x - 1|` with exact-zero cancellation.
trait AbsDiffOne {
    fn abs_diff_one(&self, one: &Self) -> f64;
}

impl<F: Field> AbsDiffOne for F {
    fn abs_diff_one(&self, one: &Self) -> f64 {
        self.sub_lossy(one).abs()
    }
}

impl Matrix<f64> {
    /// Real matrix from nested arrays (convenience for literals).
    pub fn real<const N: usize>(rows: [[f64; N]; N], mode: GroupMode) -> Result<Self> {
        Self::new(N, rows.iter().flatten().copied().collect(), mode)
    }

    pub fn real_diag(entries: &[f64], mode: GroupMode) -> Result<Self> {
        Self::diag(entries.to_vec(), mode)
    }

    pub fn scale_in_place(&mut self, s: f64) {
        for x in self.data.iter_mut() {
            *x *= s;
        }
    }

    /// `2x2` rotation by angle `theta` (counterclockwise on ℝ²).
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self { d: 2, data: SmallVec::from_vec(vec![c, -s, s, c]), mode: GroupMode::SL }
    }

    /// `self · other` without per-entry overflow checks; callers check finiteness.
    #[inline]
    pub fn mul_fast(&self, other: &Self) -> Self {
        let d = self.d;
        if d == 2 {
            let a = &self.data;
            let b = &other.data;
            let data = smallvec::smallvec![
                a[0] * b[0] + a[1] * b[2],
                a[0] * b[1] + a[1] * b[3],
                a[2] * b[0] + a[3] * b[2],
                a[2] * b[1] + a[3] * b[3],
            ];
            return Self { d, data, mode: self.mode };
        }
        let mut data: SmallVec<[f64; 9]> = SmallVec::from_elem(0.0, d * d);
        for i in 0..d {
            for k in 0..d {
                let a = self.data[i * d + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..d {
                    data[i * d + j] += a * other.data[k * d + j];
                }
            }
        }
        Self { d, data, mode: self.mode }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

/// Singular value decomposition `M = U · diag(s) · Vᵀ`, `s` descending.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: Vec<Vec<f64>>,
    pub s: Vec<f64>,
    pub v: Vec<Vec<f64>>,
}

impl Svd {
    /// Column `k` of U.
    pub fn left(&self, k: usize) -> Vec<f64> {
        self.u.iter().map(|r| r[k]).collect()
    }

    /// Column `k` of V.
    pub fn right(&self, k: usize) -> Vec<f64> {
        self.v.iter().map(|r| r[k]).collect()
    }
}

/// One-sided Jacobi SVD with a fixed sweep cap.
pub fn svd(m: &RealMatrix) -> Result<Svd> {
    let d = m.dim();
    // columns of A, rotated in place; V accumulates the rotations
    let mut a: Vec<Vec<f64>> = (0..d).map(|j| (0..d).map(|i| *m.get(i, j)).collect()).collect();
    let mut v: Vec<Vec<f64>> =
        (0..d).map(|j| (0..d).map(|i| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    let mut converged = d == 1;
    // columns below this squared norm are numerically zero
    let floor = a.iter().flatten().map(|x| x * x).sum::<f64>() * 1e-30;
    for _ in 0..SVD_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..d {
            for q in p + 1..d {
                let alpha: f64 = a[p].iter().map(|x| x * x).sum();
                let beta: f64 = a[q].iter().map(|x| x * x).sum();
                let gamma: f64 = a[p].iter().zip(&a[q]).map(|(x, y)| x * y).sum();
                if gamma == 0.0
                    || alpha <= floor
                    || beta <= floor
                    || gamma.abs() <= SVD_TOL * (alpha * beta).sqrt()
                {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..d {
                    let (x, y) = (a[p][i], a[q][i]);
                    a[p][i] = c * x - s * y;
                    a[q][i] = s * x + c * y;
                    let (x, y) = (v[p][i], v[q][i]);
                    v[p][i] = c * x - s * y;
                    v[q][i] = s * x + c * y;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NumericalFailure(format!(
            "Jacobi SVD did not converge in {SVD_MAX_SWEEPS} sweeps"
        )));
    }
    let norms: Vec<f64> = a.iter().map(|col| f64::vec_norm(col)).collect();
    if norms.iter().any(|x| !x.is_finite()) {
        return Err(Error::NumericalFailure("non-finite singular value".into()));
    }
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));
    let s: Vec<f64> = order.iter().map(|&k| norms[k]).collect();
    let mut ucols: Vec<Option<Vec<f64>>> = order
        .iter()
        .map(|&k| {
            if norms[k] > 0.0 {
                Some(a[k].iter().map(|x| x / norms[k]).collect())
            } else {
                None
            }
        })
        .collect();
    complete_orthonormal(&mut ucols, d);
    let vcols: Vec<&Vec<f64>> = order.iter().map(|&k| &v[k]).collect();
    let ucols: Vec<Vec<f64>> = ucols.into_iter().map(|c| c.unwrap()).collect();
    let u = (0..d).map(|i| (0..d).map(|j| ucols[j][i]).collect()).collect();
    let v = (0..d).map(|i| (0..d).map(|j| vcols[j][i]).collect()).collect();
    Ok(Svd { u, s, v })
}

/// Fill missing columns with an orthonormal completion (Gram–Schmidt on e_k).
fn complete_orthonormal(cols: &mut [Option<Vec<f64>>], d: usize) {
    let mut basis_idx = 0;
    for j in 0..cols.len() {
        if cols[j].is_some() {
            continue;
        }
        while basis_idx < d {
            let mut w: Vec<f64> = (0..d).map(|i| if i == basis_idx { 1.0 } else { 0.0 }).collect();
            basis_idx += 1;
            for c in cols.iter().flatten() {
                let dot: f64 = c.iter().zip(&w).map(|(x, y)| x * y).sum();
                for i in 0..d {
                    w[i] -= dot * c[i];
                }
            }
            let n = f64::vec_norm(&w);
            if n > 1e-8 {
                cols[j] = Some(w.iter().map(|x| x / n).collect());
                break;
            }
        }
    }
}

/// Largest singular value. 2×2 uses the closed-form singular values.
pub fn spectral_norm(m: &RealMatrix) -> Result<f64> {
    let s = match m.dim() {
        1 => m.entries()[0].abs(),
        2 => {
            let e = m.entries();
            let (a, b, c, d) = (e[0], e[1], e[2], e[3]);
            let scale = a.abs().max(b.abs()).max(c.abs()).max(d.abs());
            if scale == 0.0 {
                return Ok(0.0);
            }
            let (a, b, c, d) = (a / scale, b / scale, c / scale, d / scale);
            let p = (a + d).hypot(c - b);
            let q = (a - d).hypot(b + c);
            0.5 * (p + q) * scale
        }
        _ => svd(m)?.s[0],
    };
    if s.is_finite() {
        Ok(s)
    } else {
        Err(Error::Overflow)
    }
}

/// Singular values (descending).
pub fn singular_values(m: &RealMatrix) -> Result<Vec<f64>> {
    Ok(svd(m)?.s)
}

/// Metric on the group: `‖A − B‖` in SL mode, `max{‖A−B‖, ‖A⁻¹−B⁻¹‖}` in GL mode.
pub fn group_distance<F: Field>(a: &Matrix<F>, b: &Matrix<F>) -> Result<f64> {
    if a.mode() != b.mode() {
        return Err(Error::InvalidArgument("group modes differ".into()));
    }
    let direct = a.diff_lossy(b)?.operator_norm()?;
    match a.mode() {
        GroupMode::SL => Ok(direct),
        GroupMode::GL => {
            let ai = a.inverse()?;
            let bi = b.inverse()?;
            Ok(direct.max(ai.diff_lossy(&bi)?.operator_norm()?))
        }
    }
}

/// Point of ℙ(𝕂^d) (or of the dual projective space when `dual` is set).
///
/// Representatives are canonical: unit norm, and the first coordinate of
/// largest magnitude is positive (ℝ) or exactly 1 (ℚ_p).
#[derive(Clone, Debug, PartialEq)]
pub struct ProjPoint<F: Field> {
    coords: Vec<F>,
    dual: bool,
}

pub type RealProjPoint = ProjPoint<f64>;

fn leading_index(mags: &[f64]) -> usize {
    let max = mags.iter().copied().fold(0.0, f64::max);
    mags.iter().position(|&m| m >= max * (1.0 - 1e-12)).unwrap_or(0)
}

impl<F: Field> ProjPoint<F> {
    pub fn new(v: Vec<F>, dual: bool) -> Result<Self> {
        if v.is_empty() || v.iter().all(|x| x.is_zero()) {
            return Err(Error::InvalidArgument("projective point needs a nonzero vector".into()));
        }
        let mags: Vec<f64> = v.iter().map(|x| x.abs()).collect();
        let lead = leading_index(&mags);
        let coords = F::canonicalize(v, lead)?;
        Ok(Self { coords, dual })
    }

    pub fn coords(&self) -> &[F] {
        &self.coords
    }

    pub fn is_dual(&self) -> bool {
        self.dual
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Same point flagged as a functional (or back).
    pub fn as_dual(&self, dual: bool) -> Self {
        Self { coords: self.coords.clone(), dual }
    }

    /// Image under `m` (uses `m` itself; pass `(M⁻¹)ᵀ` for the dual action).
    pub fn image(&self, m: &Matrix<F>) -> Result<Self> {
        Self::new(m.mul_vec(&self.coords)?, self.dual)
    }
}

/// `‖x ∧ y‖ / (‖x‖‖y‖)`, in [0, 1].
pub fn projective_distance<F: Field>(x: &ProjPoint<F>, y: &ProjPoint<F>) -> Result<f64> {
    if x.dim() != y.dim() || x.dual != y.dual {
        return Err(Error::InvalidArgument("projective points live in different spaces".into()));
    }
    let (a, b) = (&x.coords, &y.coords);
    let d = a.len();
    let mut w = Vec::with_capacity(d * (d - 1) / 2);
    for i in 0..d {
        for j in i + 1..d {
            w.push(a[i].mul(&b[j])?.sub_lossy(&a[j].mul(&b[i])?));
        }
    }
    let r = F::vec_norm(&w) / (F::vec_norm(a) * F::vec_norm(b));
    Ok(r.clamp(0.0, 1.0))
}

/// Normalized pairing `|f(x)| / (‖f‖‖x‖)` of a functional with a point.
pub fn pairing<F: Field>(f: &ProjPoint<F>, x: &ProjPoint<F>) -> Result<f64> {
    if f.dim() != x.dim() {
        return Err(Error::InvalidArgument("pairing dimension mismatch".into()));
    }
    let ctx = x.coords[0].ctx();
    let mut acc = F::zero(ctx);
    for (a, b) in f.coords.iter().zip(&x.coords) {
        acc = match acc.add(&a.mul(b)?) {
            Ok(s) => s,
            Err(Error::PrecisionLoss) => F::zero(ctx),
            Err(e) => return Err(e),
        };
    }
    Ok((acc.abs() / (F::vec_norm(&f.coords) * F::vec_norm(&x.coords))).clamp(0.0, 1.0))
}

/// KAK-derived data of a real matrix.
#[derive(Clone, Debug)]
pub struct KakData {
    /// Multiplicative gap `s₂ / s₁`.
    pub gamma: f64,
    /// Outgoing density point: top left singular direction.
    pub omega: RealProjPoint,
    /// Incoming density point: top right singular direction, as a functional.
    pub iota: RealProjPoint,
    pub singular_values: Vec<f64>,
    /// Set when `s₁ = s₂` within tolerance; the directions are then a tie-break.
    pub non_unique: bool,
}

pub fn kak(m: &RealMatrix) -> Result<KakData> {
    if m.dim() < 2 {
        return Err(Error::InvalidArgument("kak needs d >= 2".into()));
    }
    let dec = svd(m)?;
    let s = dec.s.clone();
    if s[0] == 0.0 {
        return Err(Error::SingularMatrix);
    }
    let tied: Vec<usize> = (0..s.len()).filter(|&k| s[0] - s[k] <= TIE_TOL * s[0]).collect();
    let non_unique = tied.len() > 1;
    let mut best = tied[0];
    let mut best_u = ProjPoint::new(dec.left(best), false)?;
    for &k in &tied[1..] {
        let cand = ProjPoint::new(dec.left(k), false)?;
        if lex_greater(cand.coords(), best_u.coords()) {
            best = k;
            best_u = cand;
        }
    }
    let iota = ProjPoint::new(dec.right(best), true)?;
    Ok(KakData { gamma: s[1] / s[0], omega: best_u, iota, singular_values: s, non_unique })
}

fn lex_greater(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if (x - y).abs() > 1e-12 {
            return x > y;
        }
    }
    false
}
