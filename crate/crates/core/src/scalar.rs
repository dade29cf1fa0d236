//! Scalars over the two supported local fields.
//!
//! Real scalars are plain `f64` values that must stay finite; every checked
//! operation reports a non-finite result as [`Error::Overflow`].
//!
//! p-adic scalars are stored as `p^v · u` where the unit `u` is known modulo
//! `p^prec`. Precision is tracked per element (relative precision, capped by
//! the context): multiplication keeps the smaller precision, addition of
//! operands with valuation gap `d` keeps `min(prec_x, prec_y + d)`, and
//! cancellation of `k` leading digits costs `k` digits. An addition that
//! cancels every tracked digit raises [`Error::PrecisionLoss`].

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Log of a scale factor removed by renormalization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LogScale {
    Real(f64),
    /// `shift · log p`, kept as an integer so sums stay exact.
    Valuation { shift: i64, log_p: f64 },
}

impl LogScale {
    pub fn value(&self) -> f64 {
        match *self {
            LogScale::Real(x) => x,
            LogScale::Valuation { shift, log_p } => shift as f64 * log_p,
        }
    }
}

/// Compensated accumulator for logs of removed scale factors.
#[derive(Clone, Copy, Debug, Default)]
pub struct LogAccumulator {
    sum: f64,
    comp: f64,
    shifts: i64,
    log_p: f64,
}

impl LogAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, s: LogScale) {
        match s {
            LogScale::Real(x) => self.push_real(x),
            LogScale::Valuation { shift, log_p } => {
                self.shifts += shift;
                self.log_p = log_p;
            }
        }
    }

    /// Kahan summation step.
    pub fn push_real(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        if self.shifts == 0 {
            self.sum
        } else {
            self.shifts as f64 * self.log_p + self.sum
        }
    }
}

/// Arithmetic shared by the real and p-adic fields.
pub trait Field: Clone + fmt::Debug + fmt::Display + PartialEq + Send + Sync + 'static {
    type Ctx: Copy + fmt::Debug + PartialEq + Send + Sync + 'static;

    fn ctx(&self) -> Self::Ctx;
    fn zero(ctx: Self::Ctx) -> Self;
    fn one(ctx: Self::Ctx) -> Self;
    fn from_i64(ctx: Self::Ctx, v: i64) -> Self;
    fn is_zero(&self) -> bool;

    fn add(&self, other: &Self) -> Result<Self>;
    fn neg(&self) -> Self;
    fn mul(&self, other: &Self) -> Result<Self>;
    fn inv(&self) -> Result<Self>;

    fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    /// Difference where total cancellation is read as an exact zero. Used
    /// for metric quantities, where "equal at working precision" means 0.
    fn sub_lossy(&self, other: &Self) -> Self;

    fn abs(&self) -> f64;
    /// `log |x|`; `-inf` for zero.
    fn log_abs(&self) -> f64;

    /// Field norm of a vector: Euclidean over ℝ, max-norm over ℚ_p.
    fn vec_norm(v: &[Self]) -> f64;

    /// Operator norm of a matrix for the norm [`Field::vec_norm`].
    fn operator_norm(m: &Matrix<Self>) -> Result<f64>;

    /// Divide `m` by (a scalar of the size of) its operator norm, returning
    /// the removed log scale. Afterwards `operator_norm(m) == 1` (ℚ_p: exactly).
    fn renormalize_matrix(m: &mut Matrix<Self>) -> Result<LogScale>;

    /// Same as [`Field::renormalize_matrix`] for vectors.
    fn renormalize_vector(v: &mut [Self]) -> Result<LogScale>;

    /// Rescale a nonzero vector to the canonical representative of its
    /// projective class; `lead` is the first coordinate of largest magnitude.
    fn canonicalize(v: Vec<Self>, lead: usize) -> Result<Vec<Self>>;

    fn parse_with(ctx: Self::Ctx, s: &str) -> Result<Self>;
}

/// `|x|` of a field element.
pub fn abs_value<F: Field>(x: &F) -> f64 {
    x.abs()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Mul,
    Inv,
}

/// Checked field arithmetic; `y` is ignored for `Inv`.
pub fn field_arith<F: Field>(op: ArithOp, x: &F, y: &F) -> Result<F> {
    match op {
        ArithOp::Add => x.add(y),
        ArithOp::Mul => x.mul(y),
        ArithOp::Inv => x.inv(),
    }
}

#[inline]
fn finite(x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::Overflow)
    }
}

impl Field for f64 {
    type Ctx = ();

    fn ctx(&self) {}
    fn zero(_: ()) -> Self {
        0.0
    }
    fn one(_: ()) -> Self {
        1.0
    }
    fn from_i64(_: (), v: i64) -> Self {
        v as f64
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    #[inline]
    fn add(&self, other: &Self) -> Result<Self> {
        finite(self + other)
    }
    #[inline]
    fn neg(&self) -> Self {
        -self
    }
    #[inline]
    fn mul(&self, other: &Self) -> Result<Self> {
        finite(self * other)
    }
    fn inv(&self) -> Result<Self> {
        if *self == 0.0 {
            return Err(Error::DivisionByZero);
        }
        finite(1.0 / self)
    }
    fn sub_lossy(&self, other: &Self) -> Self {
        self - other
    }
    fn abs(&self) -> f64 {
        f64::abs(*self)
    }
    fn log_abs(&self) -> f64 {
        f64::abs(*self).ln()
    }
    fn vec_norm(v: &[Self]) -> f64 {
        // scaled to avoid overflow on large entries
        let m = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if m == 0.0 || !m.is_finite() {
            return m;
        }
        m * v.iter().map(|x| (x / m) * (x / m)).sum::<f64>().sqrt()
    }
    fn operator_norm(m: &Matrix<Self>) -> Result<f64> {
        crate::linalg::spectral_norm(m)
    }
    fn renormalize_matrix(m: &mut Matrix<Self>) -> Result<LogScale> {
        let s = crate::linalg::spectral_norm(m)?;
        if s == 0.0 {
            return Err(Error::SingularMatrix);
        }
        m.scale_in_place(1.0 / s);
        Ok(LogScale::Real(s.ln()))
    }
    fn renormalize_vector(v: &mut [Self]) -> Result<LogScale> {
        let s = Self::vec_norm(v);
        if s == 0.0 || !s.is_finite() {
            return Err(Error::NumericalFailure(format!("vector norm {s}")));
        }
        for x in v.iter_mut() {
            *x /= s;
        }
        Ok(LogScale::Real(s.ln()))
    }
    fn canonicalize(v: Vec<f64>, lead: usize) -> Result<Vec<f64>> {
        let n = Self::vec_norm(&v);
        let s = if v[lead] < 0.0 { -1.0 / n } else { 1.0 / n };
        Ok(v.into_iter().map(|x| x * s).collect())
    }
    fn parse_with(_: (), s: &str) -> Result<Self> {
        let x: f64 = s
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("not a real number: {s:?}")))?;
        finite(x).map_err(|_| Error::Parse(format!("non-finite real: {s:?}")))
    }
}

/// Prime and precision cap shared by compatible p-adic scalars.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PAdicCtx {
    pub p: u64,
    pub cap: u32,
}

pub const DEFAULT_PADIC_PRECISION: u32 = 32;

/// Largest supported modulus `p^cap` (keeps chunked 128-bit products exact).
const MAX_MODULUS_BITS: u32 = 100;

impl PAdicCtx {
    pub fn new(p: u64, cap: u32) -> Result<Self> {
        if p < 2 || !is_prime(p) {
            return Err(Error::InvalidArgument(format!("{p} is not a prime")));
        }
        if cap == 0 {
            return Err(Error::InvalidArgument("p-adic precision must be positive".into()));
        }
        let bits = (cap as f64) * (p as f64).log2();
        if bits >= MAX_MODULUS_BITS as f64 {
            return Err(Error::InvalidArgument(format!(
                "{p}^{cap} exceeds the 2^{MAX_MODULUS_BITS} modulus limit"
            )));
        }
        Ok(Self { p, cap })
    }

    pub fn with_default_precision(p: u64) -> Result<Self> {
        Self::new(p, DEFAULT_PADIC_PRECISION)
    }

    pub fn log_p(&self) -> f64 {
        (self.p as f64).ln()
    }

    fn modulus(&self, digits: u32) -> u128 {
        (self.p as u128).pow(digits)
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// `a · b mod m` for `a, b < m < 2^100`.
#[inline]
fn mulmod(a: u128, b: u128, m: u128) -> u128 {
    if a == 1 {
        return b % m;
    }
    if b == 1 {
        return a % m;
    }
    if a < (1u128 << 64) && b < (1u128 << 64) {
        return (a * b) % m;
    }
    let mut r = 0u128;
    for shift in (0..7).rev() {
        let chunk = (b >> (16 * shift)) & 0xFFFF;
        r = (r << 16) % m;
        r = (r + (a * chunk) % m) % m;
    }
    r
}

/// Inverse of `a` modulo `m` (gcd(a, m) = 1), by the extended Euclidean algorithm.
fn invmod(a: u128, m: u128) -> u128 {
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    debug_assert_eq!(old_r, 1);
    old_s.rem_euclid(m as i128) as u128
}

/// Fixed-precision element of ℚ_p in canonical form `p^val · unit`.
///
/// `unit == 0` encodes the exact zero; otherwise `unit` is not divisible by `p`
/// and is reduced modulo `p^prec`.
#[derive(Clone, Copy, Debug)]
pub struct PAdic {
    ctx: PAdicCtx,
    val: i64,
    unit: u128,
    prec: u32,
}

impl PAdic {
    /// `p^val · unit` at full precision; `unit` may contain factors of `p`.
    pub fn new(ctx: PAdicCtx, val: i64, unit: i128) -> Self {
        if unit == 0 {
            return Self::zero(ctx);
        }
        let p = ctx.p as i128;
        let mut v = val;
        let mut u = unit;
        while u % p == 0 {
            u /= p;
            v += 1;
        }
        let m = ctx.modulus(ctx.cap);
        let u = u.rem_euclid(m as i128) as u128;
        Self { ctx, val: v, unit: u, prec: ctx.cap }
    }

    /// `p^k` exactly.
    pub fn power_of_p(ctx: PAdicCtx, k: i64) -> Self {
        Self { ctx, val: k, unit: 1, prec: ctx.cap }
    }

    pub fn valuation(&self) -> Option<i64> {
        if self.unit == 0 {
            None
        } else {
            Some(self.val)
        }
    }

    pub fn unit(&self) -> u128 {
        self.unit
    }

    /// Tracked relative precision (digits of the unit).
    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn prime(&self) -> u64 {
        self.ctx.p
    }

    fn check_ctx(&self, other: &Self) -> Result<()> {
        if self.ctx.p != other.ctx.p {
            return Err(Error::InvalidArgument(format!(
                "mixed primes {} and {}",
                self.ctx.p, other.ctx.p
            )));
        }
        Ok(())
    }

    /// Multiply by `p^k` (exact).
    pub fn shift(&self, k: i64) -> Self {
        let mut out = *self;
        if out.unit != 0 {
            out.val += k;
        }
        out
    }
}

impl PartialEq for PAdic {
    fn eq(&self, other: &Self) -> bool {
        if self.ctx.p != other.ctx.p {
            return false;
        }
        match (self.unit == 0, other.unit == 0) {
            (true, true) => true,
            (false, false) => {
                let m = self.ctx.modulus(self.prec.min(other.prec));
                self.val == other.val && self.unit % m == other.unit % m
            }
            _ => false,
        }
    }
}

impl fmt::Display for PAdic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.unit == 0 {
            write!(f, "0")
        } else {
            write!(f, "{}^{} * {}", self.ctx.p, self.val, self.unit)
        }
    }
}

impl Field for PAdic {
    type Ctx = PAdicCtx;

    fn ctx(&self) -> PAdicCtx {
        self.ctx
    }

    fn zero(ctx: PAdicCtx) -> Self {
        Self { ctx, val: 0, unit: 0, prec: ctx.cap }
    }

    fn one(ctx: PAdicCtx) -> Self {
        Self { ctx, val: 0, unit: 1, prec: ctx.cap }
    }

    fn from_i64(ctx: PAdicCtx, v: i64) -> Self {
        Self::new(ctx, 0, v as i128)
    }

    fn is_zero(&self) -> bool {
        self.unit == 0
    }

    fn add(&self, other: &Self) -> Result<Self> {
        self.check_ctx(other)?;
        if self.unit == 0 {
            return Ok(*other);
        }
        if other.unit == 0 {
            return Ok(*self);
        }
        let (lo, hi) = if self.val <= other.val { (self, other) } else { (other, self) };
        let p = self.ctx.p as u128;
        let d = hi.val - lo.val;
        if d > 0 {
            let prec = if d >= lo.prec as i64 {
                lo.prec
            } else {
                lo.prec.min(hi.prec + d as u32)
            };
            let m = self.ctx.modulus(prec);
            let mut unit = lo.unit % m;
            if (d as u32) < prec {
                let pd = p.pow(d as u32);
                unit = (unit + mulmod(pd, hi.unit % m, m)) % m;
            }
            return Ok(Self { ctx: self.ctx, val: lo.val, unit, prec });
        }
        let prec = lo.prec.min(hi.prec);
        let m = self.ctx.modulus(prec);
        let mut s = (lo.unit % m + hi.unit % m) % m;
        if s == 0 {
            return Err(Error::PrecisionLoss);
        }
        let mut k = 0u32;
        while s % p == 0 {
            s /= p;
            k += 1;
        }
        Ok(Self { ctx: self.ctx, val: lo.val + k as i64, unit: s, prec: prec - k })
    }

    fn neg(&self) -> Self {
        if self.unit == 0 {
            return *self;
        }
        let m = self.ctx.modulus(self.prec);
        Self { unit: m - self.unit % m, ..*self }
    }

    fn mul(&self, other: &Self) -> Result<Self> {
        self.check_ctx(other)?;
        if self.unit == 0 || other.unit == 0 {
            return Ok(Self::zero(self.ctx));
        }
        let prec = self.prec.min(other.prec);
        let unit = if self.unit == 1 && other.prec == prec {
            other.unit
        } else if other.unit == 1 && self.prec == prec {
            self.unit
        } else {
            mulmod(self.unit, other.unit, self.ctx.modulus(prec))
        };
        Ok(Self { ctx: self.ctx, val: self.val + other.val, unit, prec })
    }

    fn inv(&self) -> Result<Self> {
        if self.unit == 0 {
            return Err(Error::DivisionByZero);
        }
        let unit = if self.unit == 1 { 1 } else { invmod(self.unit, self.ctx.modulus(self.prec)) };
        Ok(Self { ctx: self.ctx, val: -self.val, unit, prec: self.prec })
    }

    fn sub_lossy(&self, other: &Self) -> Self {
        match self.sub(other) {
            Ok(x) => x,
            Err(_) => Self::zero(self.ctx),
        }
    }

    fn abs(&self) -> f64 {
        if self.unit == 0 {
            0.0
        } else {
            (self.ctx.p as f64).powf(-(self.val as f64))
        }
    }

    fn log_abs(&self) -> f64 {
        if self.unit == 0 {
            f64::NEG_INFINITY
        } else {
            -(self.val as f64) * self.ctx.log_p()
        }
    }

    fn vec_norm(v: &[Self]) -> f64 {
        v.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }

    fn operator_norm(m: &Matrix<Self>) -> Result<f64> {
        Ok(m.entries().iter().map(|x| x.abs()).fold(0.0, f64::max))
    }

    fn renormalize_matrix(m: &mut Matrix<Self>) -> Result<LogScale> {
        let (ctx, vmin) = min_valuation(m.entries()).ok_or(Error::SingularMatrix)?;
        for x in m.entries_mut() {
            *x = x.shift(-vmin);
        }
        Ok(LogScale::Valuation { shift: -vmin, log_p: ctx.log_p() })
    }

    fn renormalize_vector(v: &mut [Self]) -> Result<LogScale> {
        let (ctx, vmin) =
            min_valuation(v).ok_or_else(|| Error::NumericalFailure("zero vector".into()))?;
        for x in v.iter_mut() {
            *x = x.shift(-vmin);
        }
        Ok(LogScale::Valuation { shift: -vmin, log_p: ctx.log_p() })
    }

    fn canonicalize(v: Vec<Self>, lead: usize) -> Result<Vec<Self>> {
        let s = v[lead].inv()?;
        v.iter().map(|x| x.mul(&s)).collect()
    }

    /// Parses `"p^v * u"` (e.g. `"5^-1 * 3"`) or a bare decimal integer `"u"`.
    fn parse_with(ctx: PAdicCtx, s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("malformed p-adic literal {s:?}"));
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let (val, unit_str) = match t.split_once('*') {
            Some((pow, u)) => {
                let (base, exp) = pow.split_once('^').ok_or_else(bad)?;
                let base: u64 = base.parse().map_err(|_| bad())?;
                if base != ctx.p {
                    return Err(Error::Parse(format!(
                        "literal {s:?} has prime {base}, expected {}",
                        ctx.p
                    )));
                }
                (exp.parse::<i64>().map_err(|_| bad())?, u)
            }
            None => (0, t.as_str()),
        };
        let unit: i128 = unit_str.parse().map_err(|_| bad())?;
        Ok(Self::new(ctx, val, unit))
    }
}

fn min_valuation(v: &[PAdic]) -> Option<(PAdicCtx, i64)> {
    let ctx = v.first()?.ctx;
    v.iter().filter_map(|x| x.valuation()).min().map(|m| (ctx, m))
}
