//! Truncated Laurent series over exact rationals or p-adic scalars.
//!
//! A series stores coefficients for exponents `ord .. ord + len` and is
//! known modulo `q^trunc`; stored-but-absent exponents below `trunc` are
//! exact zeros. Polynomials use `trunc = EXACT`.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::{max, min};
use core::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::padic::{kronecker_symbol, PadicError, PadicScalar};

/// Truncation of a series known exactly.
pub const EXACT: i64 = i64::MAX / 8;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SeriesError {
    #[error("coefficient rings differ")]
    RingMismatch,
    #[error("leading coefficient is not invertible")]
    NotInvertible,
    #[error("inner series has order {0}, composition needs order >= 1")]
    InnerOrder(i64),
    #[error("series must be q + O(q^2) to be reversed")]
    NotReversible,
    #[error("constant term is nonzero and cannot be integrated")]
    NonzeroConstantTerm,
    #[error("series has no known nonzero coefficient")]
    Vanishing,
    #[error(transparent)]
    Padic(#[from] PadicError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RingTag {
    Rational,
    Padic,
}

/// Coefficient rings the series engine works over.
pub trait Coeff: Clone + fmt::Debug + PartialEq {
    type Ctx: Clone + fmt::Debug;
    const RING: RingTag;

    fn compatible(a: &Self::Ctx, b: &Self::Ctx) -> bool;
    fn zero(ctx: &Self::Ctx) -> Self;
    fn one(ctx: &Self::Ctx) -> Self;
    fn from_rational(ctx: &Self::Ctx, r: &BigRational) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn inv(&self) -> Result<Self, SeriesError>;
    fn mul_int(&self, n: i64) -> Self;
    fn div_int(&self, n: i64) -> Result<Self, SeriesError>;
    /// True for exact zeros; these are skipped in products and sums.
    fn is_exact_zero(&self) -> bool;
    /// True when no nonzero digit is known.
    fn is_zero_like(&self) -> bool;
}

impl Coeff for BigRational {
    type Ctx = ();
    const RING: RingTag = RingTag::Rational;

    fn compatible(_: &(), _: &()) -> bool {
        true
    }
    fn zero(_: &()) -> Self {
        <BigRational as Zero>::zero()
    }
    fn one(_: &()) -> Self {
        <BigRational as One>::one()
    }
    fn from_rational(_: &(), r: &BigRational) -> Self {
        r.clone()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Result<Self, SeriesError> {
        if self.is_zero() {
            Err(SeriesError::NotInvertible)
        } else {
            Ok(self.recip())
        }
    }
    fn mul_int(&self, n: i64) -> Self {
        self * BigRational::from_integer(BigInt::from(n))
    }
    fn div_int(&self, n: i64) -> Result<Self, SeriesError> {
        if n == 0 {
            return Err(SeriesError::NotInvertible);
        }
        Ok(self / BigRational::from_integer(BigInt::from(n)))
    }
    fn is_exact_zero(&self) -> bool {
        self.is_zero()
    }
    fn is_zero_like(&self) -> bool {
        self.is_zero()
    }
}

/// Prime and default absolute precision used to embed constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PadicCtx {
    pub p: u64,
    pub prec: i64,
}

impl Coeff for PadicScalar {
    type Ctx = PadicCtx;
    const RING: RingTag = RingTag::Padic;

    fn compatible(a: &PadicCtx, b: &PadicCtx) -> bool {
        a.p == b.p
    }
    fn zero(ctx: &PadicCtx) -> Self {
        PadicScalar::exact_zero(ctx.p)
    }
    fn one(ctx: &PadicCtx) -> Self {
        PadicScalar::one(ctx.p, ctx.prec)
    }
    fn from_rational(ctx: &PadicCtx, r: &BigRational) -> Self {
        PadicScalar::from_rational(ctx.p, r, ctx.prec)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Result<Self, SeriesError> {
        Ok(PadicScalar::inv(self)?)
    }
    fn mul_int(&self, n: i64) -> Self {
        PadicScalar::mul_int(self, &BigInt::from(n))
    }
    fn div_int(&self, n: i64) -> Result<Self, SeriesError> {
        Ok(PadicScalar::div_int(self, &BigInt::from(n))?)
    }
    fn is_exact_zero(&self) -> bool {
        PadicScalar::is_exact_zero(self)
    }
    fn is_zero_like(&self) -> bool {
        PadicScalar::is_zero(self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LaurentSeries<C: Coeff> {
    ctx: C::Ctx,
    ord: i64,
    coeffs: Vec<C>,
    trunc: i64,
}

pub type RationalSeries = LaurentSeries<BigRational>;
pub type PadicSeries = LaurentSeries<PadicScalar>;

impl<C: Coeff> LaurentSeries<C> {
    /// Series with coefficients starting at `q^ord`, known modulo `q^trunc`.
    ///
    /// Coefficients at or beyond `trunc` are dropped.
    pub fn new(ctx: C::Ctx, ord: i64, mut coeffs: Vec<C>, trunc: i64) -> Self {
        let room = max(trunc - ord, 0) as usize;
        coeffs.truncate(room);
        LaurentSeries {
            ctx,
            ord,
            coeffs,
            trunc,
        }
    }

    pub fn zero(ctx: C::Ctx, trunc: i64) -> Self {
        Self::new(ctx, 0, Vec::new(), trunc)
    }

    pub fn monomial(ctx: C::Ctx, c: C, n: i64, trunc: i64) -> Self {
        Self::new(ctx, n, vec![c], trunc)
    }

    pub fn from_fn(ctx: C::Ctx, ord: i64, trunc: i64, f: impl FnMut(i64) -> C) -> Self {
        let coeffs = (ord..trunc).map(f).collect();
        Self::new(ctx, ord, coeffs, trunc)
    }

    pub fn ctx(&self) -> &C::Ctx {
        &self.ctx
    }

    pub fn ord(&self) -> i64 {
        self.ord
    }

    pub fn trunc(&self) -> i64 {
        self.trunc
    }

    pub fn ring(&self) -> RingTag {
        C::RING
    }

    /// Exponent just past the last stored coefficient.
    pub fn stored_end(&self) -> i64 {
        self.ord + self.coeffs.len() as i64
    }

    /// Coefficient of `q^n`; `None` at or beyond the truncation.
    pub fn get(&self, n: i64) -> Option<C> {
        if n >= self.trunc {
            return None;
        }
        if n < self.ord || n >= self.stored_end() {
            return Some(C::zero(&self.ctx));
        }
        Some(self.coeffs[(n - self.ord) as usize].clone())
    }

    /// Coefficient of `q^n`, panicking past the truncation.
    pub fn coeff(&self, n: i64) -> C {
        self.get(n)
            .unwrap_or_else(|| panic!("coefficient q^{n} is beyond truncation {}", self.trunc))
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &C)> {
        let ord = self.ord;
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, c)| (ord + i as i64, c))
    }

    /// Exponent of the first coefficient that is not zero-like.
    pub fn valuation(&self) -> Option<i64> {
        self.terms().find(|(_, c)| !c.is_zero_like()).map(|(n, _)| n)
    }

    fn check(&self, other: &Self) -> Result<(), SeriesError> {
        if C::compatible(&self.ctx, &other.ctx) {
            Ok(())
        } else {
            Err(SeriesError::RingMismatch)
        }
    }

    /// Drops stored leading exact zeros.
    pub fn trimmed(&self) -> Self {
        let skip = self
            .coeffs
            .iter()
            .position(|c| !c.is_exact_zero())
            .unwrap_or(self.coeffs.len());
        Self::new(
            self.ctx.clone(),
            self.ord + skip as i64,
            self.coeffs[skip..].to_vec(),
            self.trunc,
        )
    }

    pub fn truncate(&self, t: i64) -> Self {
        Self::new(self.ctx.clone(), self.ord, self.coeffs.clone(), min(t, self.trunc))
    }

    pub fn map(&self, mut f: impl FnMut(i64, &C) -> C) -> Self {
        let coeffs = self.terms().map(|(n, c)| f(n, c)).collect();
        Self::new(self.ctx.clone(), self.ord, coeffs, self.trunc)
    }

    pub fn add(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check(other)?;
        let trunc = min(self.trunc, other.trunc);
        let lo = min(self.ord, other.ord);
        let hi = min(max(self.stored_end(), other.stored_end()), trunc);
        let zero = C::zero(&self.ctx);
        let pick = |s: &Self, n: i64| -> C {
            if n < s.ord || n >= s.stored_end() {
                zero.clone()
            } else {
                s.coeffs[(n - s.ord) as usize].clone()
            }
        };
        let coeffs = (lo..hi).map(|n| pick(self, n).add(&pick(other, n))).collect();
        Ok(Self::new(self.ctx.clone(), lo, coeffs, trunc))
    }

    pub fn neg(&self) -> Self {
        self.map(|_, c| c.neg())
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SeriesError> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &C) -> Self {
        self.map(|_, x| x.mul(c))
    }

    pub fn scale_rational(&self, r: &BigRational) -> Self {
        let c = C::from_rational(&self.ctx, r);
        self.scale(&c)
    }

    /// Multiplies by `q^k`.
    pub fn shift(&self, k: i64) -> Self {
        Self::new(
            self.ctx.clone(),
            self.ord + k,
            self.coeffs.clone(),
            self.trunc.saturating_add(k).min(EXACT),
        )
    }

    /// Cauchy product truncated to `min(T_A + ord_B, T_B + ord_A)`.
    pub fn mul(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check(other)?;
        let trunc = min(
            self.trunc.saturating_add(other.ord),
            other.trunc.saturating_add(self.ord),
        )
        .min(EXACT);
        let ord = self.ord + other.ord;
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Ok(Self::new(self.ctx.clone(), ord, Vec::new(), trunc));
        }
        let len = min(
            self.coeffs.len() + other.coeffs.len() - 1,
            max(trunc - ord, 0) as usize,
        );
        let mut out = vec![C::zero(&self.ctx); len];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_exact_zero() || i >= len {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(len - i) {
                if b.is_exact_zero() {
                    continue;
                }
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        Ok(Self::new(self.ctx.clone(), ord, out, trunc))
    }

    /// Multiplicative inverse; the truncation drops to `T - 2 ord`.
    pub fn inv(&self) -> Result<Self, SeriesError> {
        let s = self.trimmed();
        let lead = s.coeffs.first().ok_or(SeriesError::Vanishing)?;
        let li = lead.inv()?;
        let v = s.ord;
        let trunc = if s.trunc >= EXACT { EXACT } else { s.trunc - 2 * v };
        let len = if trunc >= EXACT {
            // The inverse of an exact non-monomial is infinite; cap it at the stored length.
            if s.coeffs.len() == 1 {
                1
            } else {
                return Err(SeriesError::NotInvertible);
            }
        } else {
            max(trunc + v, 0) as usize
        };
        let mut out: Vec<C> = Vec::with_capacity(len);
        for n in 0..len {
            if n == 0 {
                out.push(li.clone());
                continue;
            }
            let mut acc = C::zero(&s.ctx);
            for k in 1..=min(n, s.coeffs.len() - 1) {
                let a = &s.coeffs[k];
                if a.is_exact_zero() {
                    continue;
                }
                acc = acc.add(&a.mul(&out[n - k]));
            }
            out.push(acc.mul(&li).neg());
        }
        Ok(Self::new(s.ctx.clone(), -v, out, trunc))
    }

    pub fn div(&self, other: &Self) -> Result<Self, SeriesError> {
        self.mul(&other.inv()?)
    }

    /// Integer power for `e >= 0`.
    pub fn pow(&self, e: u32) -> Result<Self, SeriesError> {
        let mut acc = Self::monomial(self.ctx.clone(), C::one(&self.ctx), 0, EXACT);
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Adds a constant `c` to the coefficient of `q^0`.
    fn add_constant(&self, c: &C) -> Result<Self, SeriesError> {
        let k = Self::monomial(self.ctx.clone(), c.clone(), 0, EXACT);
        self.add(&k)
    }

    /// `sum_j coeffs[j] * y^j` by Horner's rule.
    fn horner(&self, coeffs: &[C], y: &Self) -> Result<Self, SeriesError> {
        let Some((top, rest)) = coeffs.split_last() else {
            return Ok(Self::zero(self.ctx.clone(), EXACT));
        };
        let mut acc = Self::monomial(self.ctx.clone(), top.clone(), 0, EXACT);
        for c in rest.iter().rev() {
            acc = acc.mul(y)?.add_constant(c)?;
        }
        Ok(acc)
    }

    /// `A(B(q))` for `ord(B) >= 1`; a finite principal part of `A` is
    /// composed through `inv(B)`.
    pub fn compose(&self, inner: &Self) -> Result<Self, SeriesError> {
        self.check(inner)?;
        let b_ser = inner.trimmed();
        let b = b_ser.valuation().ok_or(SeriesError::Vanishing)?;
        if b < 1 || b_ser.ord < 1 {
            return Err(SeriesError::InnerOrder(min(b, b_ser.ord)));
        }
        let a = self.trimmed();
        let nonconst: Vec<i64> = a
            .terms()
            .filter(|(n, c)| *n != 0 && !c.is_exact_zero())
            .map(|(n, _)| n)
            .collect();
        let mut trunc = if a.trunc >= EXACT { EXACT } else { b * a.trunc };
        if let Some(&nmin) = nonconst.first() {
            if b_ser.trunc < EXACT {
                trunc = min(trunc, b_ser.trunc + b * (nmin - 1));
            }
        }
        let zero = C::zero(&self.ctx);
        let mut result = Self::monomial(self.ctx.clone(), a.get(0).unwrap_or(zero.clone()), 0, EXACT);
        // Non-negative part: B^e0 * P(B^d).
        let pos: Vec<i64> = nonconst.iter().copied().filter(|&n| n > 0).collect();
        if let Some(&e0) = pos.first() {
            let d = pos.iter().fold(0i64, |g, &n| g.gcd(&(n - e0)));
            let d = if d == 0 { 1 } else { d };
            let last = *pos.last().unwrap();
            let poly: Vec<C> = (0..=(last - e0) / d)
                .map(|j| a.get(e0 + j * d).unwrap_or(zero.clone()))
                .collect();
            let bt = b_ser.truncate(trunc.saturating_add(b));
            let y = bt.pow(d as u32)?.truncate(trunc);
            let inner_poly = a.horner(&poly, &y)?;
            let part = bt.pow(e0 as u32)?.mul(&inner_poly)?;
            result = result.add(&part)?;
        }
        // Principal part through the inverse.
        let neg: Vec<i64> = nonconst.iter().copied().filter(|&n| n < 0).collect();
        if let Some(&nmin) = neg.first() {
            let binv = b_ser.inv()?;
            let poly: Vec<C> = (1..=-nmin)
                .map(|k| a.get(-k).unwrap_or(zero.clone()))
                .collect();
            let part = a.horner(&poly, &binv)?.mul(&binv)?;
            result = result.add(&part)?;
        }
        Ok(result.truncate(trunc))
    }

    /// Compositional inverse of `q + O(q^2)`.
    pub fn reverse(&self) -> Result<Self, SeriesError> {
        let a = self.trimmed();
        let lead_is_one = a
            .coeffs
            .first()
            .is_some_and(|c| c.sub(&C::one(&a.ctx)).is_zero_like());
        if a.ord != 1 || !lead_is_one {
            return Err(SeriesError::NotReversible);
        }
        let t = a.trunc;
        let ctx = a.ctx.clone();
        let q = Self::monomial(ctx.clone(), C::one(&ctx), 1, EXACT);
        let da = a.derive_q();
        let mut r = q.truncate(2);
        let mut k = 2;
        while k < t {
            let k2 = min(2 * k, t);
            // The current approximation is treated as a guess modulo q^k2.
            let rk = Self::new(ctx.clone(), r.ord, r.coeffs.clone(), k2);
            let ar = a.truncate(k2).compose(&rk)?;
            let dar = da.truncate(k2 - 1).compose(&rk)?;
            // A(R) - q vanishes below q^k by the previous step.
            let diff = ar.sub(&q)?;
            let tail = (k..diff.trunc()).map(|n| diff.coeff(n)).collect();
            let err = Self::new(ctx.clone(), k, tail, diff.trunc());
            let corr = err.mul(&dar.inv()?)?;
            r = rk.sub(&corr)?.truncate(k2);
            k = k2;
        }
        Ok(r.truncate(t))
    }

    /// `d/dq`.
    pub fn derive_q(&self) -> Self {
        let coeffs: Vec<C> = self.terms().map(|(n, c)| c.mul_int(n)).collect();
        let trunc = if self.trunc >= EXACT { EXACT } else { self.trunc - 1 };
        if self.ord == 0 {
            Self::new(self.ctx.clone(), 0, coeffs.into_iter().skip(1).collect(), trunc)
        } else {
            Self::new(self.ctx.clone(), self.ord - 1, coeffs, trunc)
        }
    }

    /// `D = q d/dq`: `a(n) -> n a(n)`.
    pub fn derive_d(&self) -> Self {
        self.map(|n, c| c.mul_int(n))
    }

    /// Inverse of `D` on series without constant term: `a(n) -> a(n)/n`.
    pub fn antiderive_d(&self) -> Result<Self, SeriesError> {
        if let Some(c) = self.get(0) {
            if !c.is_zero_like() {
                return Err(SeriesError::NonzeroConstantTerm);
            }
        }
        let zero = C::zero(&self.ctx);
        let coeffs = self
            .terms()
            .map(|(n, c)| if n == 0 { Ok(zero.clone()) } else { c.div_int(n) })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::new(self.ctx.clone(), self.ord, coeffs, self.trunc))
    }

    /// `U_p`: `a(n) -> a(pn)`.
    pub fn op_up(&self, p: u64) -> Self {
        let p = p as i64;
        let ord = ceil_div(self.ord, p);
        let trunc = if self.trunc >= EXACT { EXACT } else { ceil_div(self.trunc, p) };
        let end = ceil_div(self.stored_end(), p);
        let zero = C::zero(&self.ctx);
        let coeffs = (ord..end)
            .map(|n| self.get(p * n).unwrap_or(zero.clone()))
            .collect();
        Self::new(self.ctx.clone(), ord, coeffs, trunc)
    }

    /// `V_p`: `a(n) -> a(n/p)`.
    pub fn op_vp(&self, p: u64) -> Self {
        let pi = p as i64;
        let trunc = if self.trunc >= EXACT {
            EXACT
        } else {
            self.trunc.saturating_mul(pi).min(EXACT)
        };
        let zero = C::zero(&self.ctx);
        let mut coeffs = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                coeffs.extend(core::iter::repeat_n(zero.clone(), p as usize - 1));
            }
            coeffs.push(c.clone());
        }
        Self::new(self.ctx.clone(), self.ord * pi, coeffs, trunc)
    }

    /// `T_{k,p} = U_p + p^(k-1) V_p`.
    pub fn op_tkp(&self, k: u32, p: u64) -> Result<Self, SeriesError> {
        let pk = (p as i64).pow(k - 1);
        self.op_up(p).add(&self.op_vp(p).map(|_, c| c.mul_int(pk)))
    }

    /// `a(n) -> chi_D(n) a(n)` with the Kronecker character of `d`.
    pub fn twist(&self, d: i64) -> Self {
        let chi_m1: i8 = if d < 0 { -1 } else { 1 };
        self.map(|n, c| {
            let chi = match n {
                0 => kronecker_symbol(d, 0),
                n if n > 0 => kronecker_symbol(d, n as u64),
                n => chi_m1 * kronecker_symbol(d, n.unsigned_abs()),
            };
            match chi {
                1 => c.clone(),
                -1 => c.neg(),
                _ => C::zero(&self.ctx),
            }
        })
    }
}

fn ceil_div(a: i64, b: i64) -> i64 {
    -((-a).div_euclid(b))
}

impl LaurentSeries<PadicScalar> {
    /// Minimum certified valuation over exponents in `[lo, hi)`; `None` if all are exact zeros.
    pub fn min_valuation(&self, lo: i64, hi: i64) -> Option<i64> {
        self.terms()
            .filter(|(n, _)| *n >= lo && *n < hi)
            .filter_map(|(_, c)| c.valuation_bound())
            .min()
    }

    /// Embeds an exact rational series with absolute precision `prec` per coefficient.
    pub fn from_rational_series(p: u64, prec: i64, s: &RationalSeries) -> Self {
        let ctx = PadicCtx { p, prec };
        let coeffs = s
            .terms()
            .map(|(_, r)| PadicScalar::from_rational(p, r, prec))
            .collect();
        Self::new(ctx, s.ord(), coeffs, s.trunc())
    }

    pub fn prime(&self) -> u64 {
        self.ctx.p
    }
}

impl LaurentSeries<BigRational> {
    pub fn from_integers(ord: i64, coeffs: &[i64], trunc: i64) -> Self {
        let c = coeffs
            .iter()
            .map(|&n| BigRational::from_integer(BigInt::from(n)))
            .collect();
        Self::new((), ord, c, trunc)
    }

    /// Largest p-power dividing a denominator among the stored coefficients.
    pub fn p_integral(&self, p: u64) -> bool {
        let pb = BigInt::from(p);
        self.terms().all(|(_, c)| !c.denom().is_multiple_of(&pb))
    }

    pub fn is_integral(&self) -> bool {
        self.terms().all(|(_, c)| c.is_integer())
    }

    pub fn abs_max(&self) -> BigRational {
        self.terms()
            .map(|(_, c)| c.abs())
            .fold(<BigRational as Zero>::zero(), |a, b| if b > a { b } else { a })
    }
}

/// Bivariate series truncated to total degree `< deg`, `coeffs[i][j]` at `X^i Y^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct BivariateSeries {
    pub deg: usize,
    pub coeffs: Vec<Vec<BigRational>>,
}

impl BivariateSeries {
    pub fn zero(deg: usize) -> Self {
        BivariateSeries {
            deg,
            coeffs: (0..deg).map(|i| vec![<BigRational as Zero>::zero(); deg - i]).collect(),
        }
    }

    /// `c * X^i Y^j`-free embedding of a univariate series in `X` (or `Y`).
    pub fn from_univariate(s: &RationalSeries, deg: usize, in_y: bool) -> Self {
        let mut out = Self::zero(deg);
        for (n, c) in s.terms() {
            if n < 0 || n as usize >= deg {
                continue;
            }
            let n = n as usize;
            if in_y {
                out.coeffs[0][n] = c.clone();
            } else {
                out.coeffs[n][0] = c.clone();
            }
        }
        out
    }

    pub fn get(&self, i: usize, j: usize) -> BigRational {
        if i + j < self.deg {
            self.coeffs[i][j].clone()
        } else {
            <BigRational as Zero>::zero()
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for i in 0..self.deg {
            for j in 0..self.deg - i {
                out.coeffs[i][j] = &self.coeffs[i][j] + o.get(i, j);
            }
        }
        out
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = Self::zero(self.deg);
        for i in 0..self.deg {
            for j in 0..self.deg - i {
                let a = &self.coeffs[i][j];
                if a.is_zero() {
                    continue;
                }
                for k in 0..self.deg - i - j {
                    for l in 0..self.deg - i - j - k {
                        let b = o.get(k, l);
                        if !b.is_zero() {
                            out.coeffs[i + k][j + l] += a * b;
                        }
                    }
                }
            }
        }
        out
    }

    /// `f(S)` for a univariate `f` with `f(0) = 0` and `S` without constant term.
    pub fn substitute_into(f: &RationalSeries, s: &Self) -> Self {
        let mut acc = Self::zero(s.deg);
        for n in (1..s.deg as i64).rev() {
            acc = acc.mul(s);
            let c = f.get(n).unwrap_or_else(<BigRational as Zero>::zero);
            acc.coeffs[0][0] += c;
        }
        acc.mul(s)
    }

    /// All coefficients free of `p` in their denominators.
    pub fn p_integral(&self, p: u64) -> bool {
        let pb = BigInt::from(p);
        self.coeffs
            .iter()
            .flatten()
            .all(|c| !c.denom().is_multiple_of(&pb))
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.deg).all(|i| (0..self.deg - i).all(|j| self.get(i, j) == self.get(j, i)))
    }
}

#[cfg(test)]
mod tests {
    extern crate std;
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn catalan(n: u64) -> i64 {
        let mut c: u128 = 1;
        for k in 0..n as u128 {
            c = c * 2 * (2 * k + 1) / (k + 2);
        }
        c as i64
    }

    #[test]
    fn laurent_product() {
        let a = RationalSeries::from_integers(-1, &[1, 1], EXACT);
        let b = RationalSeries::from_integers(1, &[1, -1], 20);
        let c = a.mul(&b).unwrap();
        assert_eq!(c.trunc(), 19);
        assert_eq!(c.coeff(0), q(1, 1));
        assert_eq!(c.coeff(1), q(0, 1));
        assert_eq!(c.coeff(2), q(-1, 1));
        assert_eq!(c.coeff(3), q(0, 1));
    }

    #[test]
    fn reverse_gives_signed_catalan_numbers() {
        let a = RationalSeries::from_integers(1, &[1, 1], 30);
        let r = a.reverse().unwrap();
        assert_eq!(r.trunc(), 30);
        for n in 1..30 {
            let sign = if n % 2 == 1 { 1 } else { -1 };
            assert_eq!(r.coeff(n), q(sign * catalan(n as u64 - 1), 1), "n={n}");
        }
    }

    #[test]
    fn inverse_of_laurent() {
        let a = RationalSeries::from_integers(1, &[1, 2, 3, 4, 5], 12);
        let ai = a.inv().unwrap();
        assert_eq!(ai.ord(), -1);
        assert_eq!(ai.trunc(), 10);
        let one = a.mul(&ai).unwrap();
        assert_eq!(one.trunc(), 11);
        for n in 0..11 {
            assert_eq!(one.coeff(n), q((n == 0) as i64, 1));
        }
    }

    #[test]
    fn compose_principal_part() {
        let z_inv = RationalSeries::from_integers(-1, &[1], EXACT);
        let e = RationalSeries::from_integers(1, &[1, 3, -2, 5], 10);
        let c = z_inv.compose(&e).unwrap();
        assert_eq!(c.valuation(), Some(-1));
        assert_eq!(c.coeff(-1), q(1, 1));
        assert_eq!(c.coeff(0), q(-3, 1));
        assert_eq!(c.trunc(), 8);
    }

    #[test]
    fn compose_rejects_order_zero() {
        let a = RationalSeries::from_integers(1, &[1], EXACT);
        let b = RationalSeries::from_integers(0, &[1, 1], 5);
        assert!(matches!(a.compose(&b), Err(SeriesError::InnerOrder(0))));
    }

    #[test]
    fn twist_and_operators() {
        let a = RationalSeries::from_integers(1, &[1, 1, 1], EXACT);
        let t = a.twist(-4);
        assert_eq!(t.coeff(1), q(1, 1));
        assert_eq!(t.coeff(2), q(0, 1));
        assert_eq!(t.coeff(3), q(-1, 1));
        let v = RationalSeries::from_integers(1, &[1], 5).op_vp(7);
        assert_eq!(v.ord(), 7);
        assert_eq!(v.coeff(7), q(1, 1));
        assert_eq!(v.trunc(), 35);
    }

    #[test]
    fn antiderive_rejects_constant() {
        let a = RationalSeries::from_integers(0, &[1, 1], 5);
        assert_eq!(a.antiderive_d(), Err(SeriesError::NonzeroConstantTerm));
    }

    #[test]
    fn padic_antiderive_loses_precision_at_p_multiples() {
        let ctx = PadicCtx { p: 7, prec: 10 };
        let s = PadicSeries::from_fn(ctx, 1, 50, |_| PadicScalar::one(7, 10));
        let a = s.antiderive_d().unwrap();
        assert_eq!(a.coeff(6).precision(), Some(10));
        assert_eq!(a.coeff(7).precision(), Some(9));
        assert_eq!(a.coeff(49).precision(), Some(8));
        assert_eq!(a.coeff(49).valuation().unwrap(), -2);
    }

    #[test]
    fn ring_mismatch_between_primes() {
        let a = PadicSeries::zero(PadicCtx { p: 5, prec: 4 }, 5);
        let b = PadicSeries::zero(PadicCtx { p: 7, prec: 4 }, 5);
        assert_eq!(a.mul(&b), Err(SeriesError::RingMismatch));
    }

    #[test]
    fn bivariate_substitution() {
        // exp-free check: f(X + Y) with f(z) = z + z^2.
        let f = RationalSeries::from_integers(1, &[1, 1], EXACT);
        let x = RationalSeries::from_integers(1, &[1], EXACT);
        let s = BivariateSeries::from_univariate(&x, 5, false)
            .add(&BivariateSeries::from_univariate(&x, 5, true));
        let r = BivariateSeries::substitute_into(&f, &s);
        assert_eq!(r.get(1, 0), q(1, 1));
        assert_eq!(r.get(1, 1), q(2, 1));
        assert_eq!(r.get(2, 0), q(1, 1));
        assert_eq!(r.get(3, 0), q(0, 1));
        assert!(r.is_symmetric());
    }

    fn rseries(ord: i64, len: usize) -> impl Strategy<Value = RationalSeries> {
        proptest::collection::vec((-20i64..20, 1i64..6), len..=len).prop_map(move |v| {
            let c = v.into_iter().map(|(a, b)| q(a, b)).collect();
            RationalSeries::new((), ord, c, ord + len as i64)
        })
    }

    fn unit_lead(s: RationalSeries, lead: i64) -> RationalSeries {
        let mut c: Vec<BigRational> = s.terms().map(|(_, c)| c.clone()).collect();
        c[0] = q(lead, 1);
        RationalSeries::new((), s.ord(), c, s.trunc())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn reverse_composes_to_identity(s in rseries(1, 12)) {
            let a = unit_lead(s, 1);
            let r = a.reverse().unwrap();
            let id = a.compose(&r).unwrap();
            prop_assert_eq!(id.trunc(), 13);
            for n in 1..13 {
                prop_assert_eq!(id.coeff(n), q((n == 1) as i64, 1));
            }
            let id2 = r.compose(&a).unwrap();
            for n in 1..id2.trunc() {
                prop_assert_eq!(id2.coeff(n), q((n == 1) as i64, 1));
            }
        }

        #[test]
        fn antiderive_inverts_derive(s in rseries(-3, 15)) {
            let back = s.derive_d().antiderive_d().unwrap();
            for n in -3..12 {
                let want = if n == 0 { q(0, 1) } else { s.coeff(n) };
                prop_assert_eq!(back.coeff(n), want);
            }
        }

        #[test]
        fn compose_is_associative(a in rseries(1, 8), b in rseries(1, 8), c in rseries(1, 8)) {
            let (a, b, c) = (unit_lead(a, 2), unit_lead(b, 1), unit_lead(c, 3));
            let l = a.compose(&b).unwrap().compose(&c).unwrap();
            let r = a.compose(&b.compose(&c).unwrap()).unwrap();
            let t = l.trunc().min(r.trunc());
            prop_assert!(t >= 9);
            for n in 1..t {
                prop_assert_eq!(l.coeff(n), r.coeff(n));
            }
        }

        #[test]
        fn mul_commutes_and_associates(a in rseries(-2, 10), b in rseries(0, 10), c in rseries(1, 10)) {
            let ab = a.mul(&b).unwrap();
            prop_assert_eq!(&ab, &b.mul(&a).unwrap());
            let l = ab.mul(&c).unwrap();
            let r = a.mul(&b.mul(&c).unwrap()).unwrap();
            prop_assert_eq!(l.trunc(), r.trunc());
            for n in l.ord()..l.trunc() {
                prop_assert_eq!(l.coeff(n), r.coeff(n));
            }
        }

        #[test]
        fn up_after_vp_is_identity(s in rseries(-2, 20), p in prop::sample::select(vec![5u64, 7, 11])) {
            let back = s.op_vp(p).op_up(p);
            prop_assert_eq!(back.trunc(), s.trunc());
            for n in -2..18 {
                prop_assert_eq!(back.coeff(n), s.coeff(n));
            }
        }

        #[test]
        fn padic_mode_tracks_rational_mode(a in rseries(0, 12), b in rseries(1, 12)) {
            let b = unit_lead(b, 1);
            let p = 5;
            let exact = a.compose(&b).unwrap().mul(&b.inv().unwrap()).unwrap();
            let pa = PadicSeries::from_rational_series(p, 12, &a);
            let pb = PadicSeries::from_rational_series(p, 12, &b);
            let approx = pa.compose(&pb).unwrap().mul(&pb.inv().unwrap()).unwrap();
            prop_assert_eq!(approx.trunc(), exact.trunc());
            for n in exact.ord()..exact.trunc() {
                let want = PadicScalar::from_rational(p, &exact.coeff(n), 40);
                prop_assert!(approx.coeff(n).congruent(&want), "n={}", n);
            }
        }
    }
}
