//! p-adic scalars with absolute precision tracking.
//!
//! A nonzero scalar is `u * p^v` known modulo `p^A`, with `p` not dividing
//! `u` and `v < A`. Zeros come in two flavours: an exact zero, and an
//! inexact zero that only knows its value is `0 mod p^A`.

use core::cmp::{min, Ordering};
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PadicError {
    #[error("precision exhausted: value cannot be distinguished from zero")]
    PrecisionExhausted,
    #[error("division by exact zero")]
    DivisionByZero,
    #[error("no small rational at this precision")]
    NoSmallRational,
    #[error("relative precision {0} is too small for reconstruction")]
    InsufficientPrecision(i64),
    #[error("non-canonical p-adic digits: {0}")]
    NonCanonical(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Kind {
    ExactZero,
    Zero { prec: i64 },
    Unit { v: i64, u: BigUint, prec: i64 },
}

/// An element of Q_p known to a fixed absolute precision.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PadicScalar {
    p: u64,
    kind: Kind,
}

pub(crate) fn p_pow(p: u64, k: i64) -> BigUint {
    debug_assert!(k >= 0);
    BigUint::from(p).pow(k as u32)
}

/// Splits a nonzero integer into `p^k * m` with `p` not dividing `m`.
fn split_p(p: u64, n: &BigInt) -> (i64, BigInt) {
    debug_assert!(!n.is_zero());
    let pb = BigInt::from(p);
    let mut k = 0;
    let mut m = n.clone();
    loop {
        let (q, r) = m.div_rem(&pb);
        if !r.is_zero() {
            return (k, m);
        }
        m = q;
        k += 1;
    }
}

fn reduce_mod(n: &BigInt, modulus: &BigUint) -> BigUint {
    let m = BigInt::from_biguint(Sign::Plus, modulus.clone());
    n.mod_floor(&m).to_biguint().expect("mod_floor is nonnegative")
}

impl PadicScalar {
    fn check_prime(&self, other: &Self) {
        assert_eq!(
            self.p, other.p,
            "p-adic scalars over different primes cannot be combined"
        );
    }

    fn from_kind(p: u64, kind: Kind) -> Self {
        PadicScalar { p, kind }
    }

    /// `m * p^scale mod p^prec`; collapses to an inexact zero when no digit survives.
    fn lossy(p: u64, m: &BigInt, scale: i64, prec: i64) -> Self {
        if m.is_zero() {
            return Self::zero(p, prec);
        }
        let (k, unit) = split_p(p, m);
        let v = scale + k;
        if v >= prec {
            return Self::zero(p, prec);
        }
        let u = reduce_mod(&unit, &p_pow(p, prec - v));
        Self::from_kind(p, Kind::Unit { v, u, prec })
    }

    pub fn exact_zero(p: u64) -> Self {
        Self::from_kind(p, Kind::ExactZero)
    }

    /// A zero known only modulo `p^prec`.
    pub fn zero(p: u64, prec: i64) -> Self {
        Self::from_kind(p, Kind::Zero { prec })
    }

    pub fn one(p: u64, prec: i64) -> Self {
        Self::from_i64(p, 1, prec)
    }

    pub fn from_i64(p: u64, n: i64, prec: i64) -> Self {
        Self::from_bigint(p, &BigInt::from(n), prec)
    }

    /// Embeds an integer; zero embeds as an exact zero.
    pub fn from_bigint(p: u64, n: &BigInt, prec: i64) -> Self {
        if n.is_zero() {
            return Self::exact_zero(p);
        }
        Self::lossy(p, n, 0, prec)
    }

    /// Embeds a rational number known exactly, truncated to absolute precision `prec`.
    pub fn from_rational(p: u64, r: &BigRational, prec: i64) -> Self {
        if r.is_zero() {
            return Self::exact_zero(p);
        }
        let (a, num) = split_p(p, r.numer());
        let (b, den) = split_p(p, r.denom());
        let v = a - b;
        if v >= prec {
            return Self::zero(p, prec);
        }
        let m = p_pow(p, prec - v);
        let num = reduce_mod(&num, &m);
        let den = reduce_mod(&den, &m);
        let inv = den.modinv(&m).expect("denominator unit is invertible");
        let u = (num * inv) % &m;
        Self::from_kind(p, Kind::Unit { v, u, prec })
    }

    /// Canonical scalar for `m * p^scale mod p^prec`.
    ///
    /// `m = 0` gives the exact zero. A nonzero `m` whose digits all vanish
    /// below `p^prec` is rejected.
    pub fn normalize(m: &BigInt, scale: i64, p: u64, prec: i64) -> Result<Self, PadicError> {
        if m.is_zero() {
            return Ok(Self::exact_zero(p));
        }
        let x = Self::lossy(p, m, scale, prec);
        if x.is_zero() {
            return Err(PadicError::PrecisionExhausted);
        }
        Ok(x)
    }

    /// Builds a scalar from explicit digits, checking the canonical form.
    pub fn from_parts(p: u64, v: i64, u: BigUint, prec: i64) -> Result<Self, PadicError> {
        if u.is_zero() {
            return Err(PadicError::NonCanonical("zero mantissa"));
        }
        if prec <= v {
            return Err(PadicError::NonCanonical("precision not above valuation"));
        }
        if (&u % p).is_zero() {
            return Err(PadicError::NonCanonical("mantissa divisible by p"));
        }
        if u >= p_pow(p, prec - v) {
            return Err(PadicError::NonCanonical("mantissa exceeds p^(A-v)"));
        }
        Ok(Self::from_kind(p, Kind::Unit { v, u, prec }))
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn is_zero(&self) -> bool {
        !matches!(self.kind, Kind::Unit { .. })
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(self.kind, Kind::ExactZero)
    }

    /// Absolute precision, `None` for the exact zero.
    pub fn precision(&self) -> Option<i64> {
        match self.kind {
            Kind::ExactZero => None,
            Kind::Zero { prec } | Kind::Unit { prec, .. } => Some(prec),
        }
    }

    pub fn relative_precision(&self) -> Option<i64> {
        match self.kind {
            Kind::Unit { v, prec, .. } => Some(prec - v),
            _ => None,
        }
    }

    /// Exact valuation; zeros have none.
    pub fn valuation(&self) -> Result<i64, PadicError> {
        match self.kind {
            Kind::Unit { v, .. } => Ok(v),
            _ => Err(PadicError::PrecisionExhausted),
        }
    }

    /// Certified lower bound on the valuation (`None` means infinite).
    pub fn valuation_bound(&self) -> Option<i64> {
        match self.kind {
            Kind::ExactZero => None,
            Kind::Zero { prec } => Some(prec),
            Kind::Unit { v, .. } => Some(v),
        }
    }

    pub fn unit(&self) -> Option<&BigUint> {
        match &self.kind {
            Kind::Unit { u, .. } => Some(u),
            _ => None,
        }
    }

    /// `Some(true)` when certainly in Z_p, `Some(false)` when certainly not,
    /// `None` for an inexact zero below precision 0.
    pub fn is_integral(&self) -> Option<bool> {
        match self.kind {
            Kind::ExactZero => Some(true),
            Kind::Zero { prec } => (prec >= 0).then_some(true),
            Kind::Unit { v, .. } => Some(v >= 0),
        }
    }

    /// Lowers the absolute precision to at most `prec`.
    pub fn with_precision(&self, prec: i64) -> Self {
        match &self.kind {
            Kind::ExactZero => Self::zero(self.p, prec),
            Kind::Zero { prec: a } => Self::zero(self.p, min(*a, prec)),
            Kind::Unit { v, u, prec: a } => {
                let a = min(*a, prec);
                if *v >= a {
                    Self::zero(self.p, a)
                } else {
                    let u = u % p_pow(self.p, a - v);
                    Self::from_kind(self.p, Kind::Unit { v: *v, u, prec: a })
                }
            }
        }
    }

    /// Multiplies by `p^k`.
    pub fn shift(&self, k: i64) -> Self {
        let kind = match &self.kind {
            Kind::ExactZero => Kind::ExactZero,
            Kind::Zero { prec } => Kind::Zero { prec: prec + k },
            Kind::Unit { v, u, prec } => Kind::Unit {
                v: v + k,
                u: u.clone(),
                prec: prec + k,
            },
        };
        Self::from_kind(self.p, kind)
    }

    /// Multiplies by an exactly known integer.
    pub fn mul_int(&self, n: &BigInt) -> Self {
        if n.is_zero() {
            return Self::exact_zero(self.p);
        }
        let (k, m) = split_p(self.p, n);
        match &self.kind {
            Kind::Unit { v, u, prec } => {
                let modulus = p_pow(self.p, prec - v);
                let u = reduce_mod(&(BigInt::from(u.clone()) * m), &modulus);
                Self::from_kind(
                    self.p,
                    Kind::Unit {
                        v: v + k,
                        u,
                        prec: prec + k,
                    },
                )
            }
            _ => self.shift(k),
        }
    }

    /// Divides by an exactly known nonzero integer.
    pub fn div_int(&self, n: &BigInt) -> Result<Self, PadicError> {
        if n.is_zero() {
            return Err(PadicError::DivisionByZero);
        }
        let (k, m) = split_p(self.p, n);
        match &self.kind {
            Kind::Unit { v, u, prec } => {
                let modulus = p_pow(self.p, prec - v);
                let mi = reduce_mod(&m, &modulus)
                    .modinv(&modulus)
                    .expect("unit part is invertible");
                let u = (u * mi) % &modulus;
                Ok(Self::from_kind(
                    self.p,
                    Kind::Unit {
                        v: v - k,
                        u,
                        prec: prec - k,
                    },
                ))
            }
            _ => Ok(self.shift(-k)),
        }
    }

    /// Multiplies by an exactly known rational.
    pub fn mul_rational(&self, r: &BigRational) -> Self {
        if r.is_zero() {
            return Self::exact_zero(self.p);
        }
        self.mul_int(r.numer())
            .div_int(r.denom())
            .expect("nonzero denominator")
    }

    pub fn inv(&self) -> Result<Self, PadicError> {
        match &self.kind {
            Kind::ExactZero => Err(PadicError::DivisionByZero),
            Kind::Zero { .. } => Err(PadicError::PrecisionExhausted),
            Kind::Unit { v, u, prec } => {
                let rel = prec - v;
                let modulus = p_pow(self.p, rel);
                let u = u.modinv(&modulus).expect("unit is invertible");
                Ok(Self::from_kind(
                    self.p,
                    Kind::Unit {
                        v: -v,
                        u,
                        prec: rel - v,
                    },
                ))
            }
        }
    }

    pub fn div(&self, other: &Self) -> Result<Self, PadicError> {
        self.check_prime(other);
        Ok(self * &other.inv()?)
    }

    pub fn pow(&self, e: u32) -> Self {
        if e == 0 {
            return Self::one(self.p, self.precision().unwrap_or(i64::MAX / 4));
        }
        let mut acc = self.clone();
        for _ in 1..e {
            acc = &acc * self;
        }
        acc
    }

    /// Equality modulo the smaller of the two precisions.
    pub fn congruent(&self, other: &Self) -> bool {
        (self - other).is_zero()
    }

    /// `u * p^v` as a rational representative of the class.
    pub fn lift(&self) -> BigRational {
        match &self.kind {
            Kind::Unit { v, u, .. } => {
                let n = BigInt::from(u.clone());
                if *v >= 0 {
                    BigRational::from_integer(n * BigInt::from(p_pow(self.p, *v)))
                } else {
                    BigRational::new(n, BigInt::from(p_pow(self.p, -v)))
                }
            }
            _ => BigRational::zero(),
        }
    }

    /// Value modulo `p^k` for an integral scalar; `None` when not certainly integral.
    pub fn residue(&self, k: u32) -> Option<BigUint> {
        match &self.kind {
            Kind::ExactZero | Kind::Zero { .. } => {
                (self.is_integral() == Some(true)).then(BigUint::zero)
            }
            Kind::Unit { v, u, .. } => {
                if *v < 0 {
                    return None;
                }
                let m = p_pow(self.p, k as i64);
                Some((u * p_pow(self.p, *v)) % m)
            }
        }
    }

    /// Value of an integral scalar as a `u64` residue modulo `p^k`.
    pub fn residue_u64(&self, k: u32) -> Option<u64> {
        self.residue(k).and_then(|r| r.to_u64())
    }
}

impl Add for &PadicScalar {
    type Output = PadicScalar;
    fn add(self, rhs: &PadicScalar) -> PadicScalar {
        self.check_prime(rhs);
        let p = self.p;
        match (&self.kind, &rhs.kind) {
            (Kind::ExactZero, _) => rhs.clone(),
            (_, Kind::ExactZero) => self.clone(),
            (Kind::Zero { prec: a }, Kind::Zero { prec: b }) => PadicScalar::zero(p, min(*a, *b)),
            (Kind::Zero { prec: a }, Kind::Unit { .. }) => rhs.with_precision(*a),
            (Kind::Unit { .. }, Kind::Zero { prec: b }) => self.with_precision(*b),
            (
                Kind::Unit {
                    v: vx,
                    u: ux,
                    prec: ax,
                },
                Kind::Unit {
                    v: vy,
                    u: uy,
                    prec: ay,
                },
            ) => {
                let prec = min(*ax, *ay);
                let vm = min(*vx, *vy);
                if vm >= prec {
                    return PadicScalar::zero(p, prec);
                }
                let n = ux * p_pow(p, vx - vm) + uy * p_pow(p, vy - vm);
                PadicScalar::lossy(p, &BigInt::from(n), vm, prec)
            }
        }
    }
}

impl Neg for &PadicScalar {
    type Output = PadicScalar;
    fn neg(self) -> PadicScalar {
        match &self.kind {
            Kind::Unit { v, u, prec } => {
                let m = p_pow(self.p, prec - v);
                PadicScalar::from_kind(
                    self.p,
                    Kind::Unit {
                        v: *v,
                        u: m - u,
                        prec: *prec,
                    },
                )
            }
            _ => self.clone(),
        }
    }
}

impl Sub for &PadicScalar {
    type Output = PadicScalar;
    fn sub(self, rhs: &PadicScalar) -> PadicScalar {
        self + &(-rhs)
    }
}

impl Mul for &PadicScalar {
    type Output = PadicScalar;
    fn mul(self, rhs: &PadicScalar) -> PadicScalar {
        self.check_prime(rhs);
        let p = self.p;
        match (&self.kind, &rhs.kind) {
            (Kind::ExactZero, _) | (_, Kind::ExactZero) => PadicScalar::exact_zero(p),
            (Kind::Zero { prec: a }, Kind::Zero { prec: b }) => PadicScalar::zero(p, a + b),
            (Kind::Zero { prec: a }, Kind::Unit { v, .. })
            | (Kind::Unit { v, .. }, Kind::Zero { prec: a }) => PadicScalar::zero(p, a + v),
            (
                Kind::Unit {
                    v: vx,
                    u: ux,
                    prec: ax,
                },
                Kind::Unit {
                    v: vy,
                    u: uy,
                    prec: ay,
                },
            ) => {
                let v = vx + vy;
                let prec = min(vx + ay, vy + ax);
                let u = (ux * uy) % p_pow(p, prec - v);
                PadicScalar::from_kind(p, Kind::Unit { v, u, prec })
            }
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for PadicScalar {
            type Output = PadicScalar;
            fn $m(self, rhs: PadicScalar) -> PadicScalar {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&PadicScalar> for PadicScalar {
            type Output = PadicScalar;
            fn $m(self, rhs: &PadicScalar) -> PadicScalar {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for PadicScalar {
    type Output = PadicScalar;
    fn neg(self) -> PadicScalar {
        -&self
    }
}

impl fmt::Display for PadicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.p;
        match &self.kind {
            Kind::ExactZero => write!(f, "0"),
            Kind::Zero { prec } => write!(f, "0 (mod {p}^{prec})"),
            Kind::Unit { v, u, prec } => write!(f, "{u} * {p}^{v} (mod {p}^{prec})"),
        }
    }
}

/// The Kronecker symbol `(d/n)` for `n >= 0`.
pub fn kronecker_symbol(d: i64, n: u64) -> i8 {
    if n == 0 {
        return if d == 1 || d == -1 { 1 } else { 0 };
    }
    let mut result: i8 = 1;
    let tz = n.trailing_zeros();
    let mut n = n >> tz;
    if tz > 0 {
        if d % 2 == 0 {
            return 0;
        }
        let r = d.rem_euclid(8);
        if tz % 2 == 1 && (r == 3 || r == 5) {
            result = -result;
        }
    }
    if n == 1 {
        return result;
    }
    let mut a = (d as i128).rem_euclid(n as i128) as u64;
    while a != 0 {
        while a.is_multiple_of(2) {
            a /= 2;
            let r = n % 8;
            if r == 3 || r == 5 {
                result = -result;
            }
        }
        core::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        a %= n;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

/// Recovers `a/b` with `|a|, |b| <= sqrt(p^M / 2)` congruent to `x`.
pub fn rational_reconstruct(x: &PadicScalar) -> Result<BigRational, PadicError> {
    let (v, u, rel) = match &x.kind {
        Kind::ExactZero | Kind::Zero { .. } => return Ok(BigRational::zero()),
        Kind::Unit { v, u, prec } => (*v, u, prec - v),
    };
    if rel < 2 {
        return Err(PadicError::InsufficientPrecision(rel));
    }
    let m = p_pow(x.p, rel);
    let bound = BigInt::from((&m >> 1u32).sqrt());
    let (mut r0, mut r1) = (BigInt::from(m), BigInt::from(u.clone()));
    let (mut s0, mut s1) = (BigInt::zero(), BigInt::one());
    while r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let s2 = &s0 - &q * &s1;
        r0 = core::mem::replace(&mut r1, r2);
        s0 = core::mem::replace(&mut s1, s2);
    }
    if s1.abs() > bound || !r1.gcd(&s1).is_one() {
        return Err(PadicError::NoSmallRational);
    }
    if (&s1 % BigInt::from(x.p)).is_zero() {
        return Err(PadicError::NoSmallRational);
    }
    let base = BigRational::new(r1, s1);
    let scale = BigInt::from(p_pow(x.p, v.abs()));
    Ok(match v.cmp(&0) {
        Ordering::Less => base / BigRational::from_integer(scale),
        _ => base * BigRational::from_integer(scale),
    })
}

#[cfg(test)]
mod tests {
    extern crate std;
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn kronecker_small_cases() {
        assert_eq!(kronecker_symbol(-4, 7), -1);
        assert_eq!(kronecker_symbol(-4, 2), 0);
        assert_eq!(kronecker_symbol(-4, 5), 1);
        assert_eq!(kronecker_symbol(-3, 2), -1);
        assert_eq!(kronecker_symbol(-7, 2), 1);
        assert_eq!(kronecker_symbol(-7, 11), 1);
        assert_eq!(kronecker_symbol(-7, 13), -1);
    }

    #[test]
    fn kronecker_matches_euler_criterion() {
        for &d in &[-3i64, -4, -7, -8, 5, 12, 13] {
            for n in [5u64, 7, 11, 13, 17, 19, 23, 29, 31, 101] {
                let r = d.rem_euclid(n as i64) as u64;
                let e = if r == 0 {
                    0
                } else {
                    let mut acc = 1u64;
                    for _ in 0..(n - 1) / 2 {
                        acc = acc * r % n;
                    }
                    if acc == 1 {
                        1
                    } else {
                        -1
                    }
                };
                assert_eq!(kronecker_symbol(d, n), e, "d={d} n={n}");
            }
        }
    }

    #[test]
    fn normalize_examples() {
        let x = PadicScalar::normalize(&BigInt::from(14), 0, 7, 5).unwrap();
        assert_eq!(x.valuation().unwrap(), 1);
        assert_eq!(x.unit().unwrap(), &BigUint::from(2u32));
        assert_eq!(x.precision(), Some(5));
        assert!(PadicScalar::normalize(&BigInt::zero(), 0, 7, 5)
            .unwrap()
            .is_exact_zero());
        let y = PadicScalar::normalize(&BigInt::from(49), -2, 7, 3).unwrap();
        assert_eq!(y.valuation().unwrap(), 0);
        assert_eq!(y.unit().unwrap(), &BigUint::one());
        assert_eq!(y.precision(), Some(3));
        assert_eq!(
            PadicScalar::normalize(&BigInt::from(7 * 7 * 7), 0, 7, 3),
            Err(PadicError::PrecisionExhausted)
        );
    }

    #[test]
    fn reconstruct_examples() {
        assert_eq!(
            rational_reconstruct(&PadicScalar::exact_zero(7)).unwrap(),
            BigRational::zero()
        );
        let m = 7u64.pow(6);
        // 3^-1 mod 7^6 by the extended Euclidean algorithm.
        let (g, s, _) = egcd(3, m as i64);
        assert_eq!(g, 1);
        let inv = s.rem_euclid(m as i64);
        assert_eq!(inv * 3 % m as i64, 1);
        let x = PadicScalar::from_i64(7, inv, 6);
        assert_eq!(rational_reconstruct(&x).unwrap(), q(1, 3));
    }

    fn egcd(a: i64, b: i64) -> (i64, i64, i64) {
        if b == 0 {
            (a, 1, 0)
        } else {
            let (g, s, t) = egcd(b, a % b);
            (g, t, s - (a / b) * t)
        }
    }

    #[test]
    fn reconstruct_fails_on_residue_without_small_representative() {
        // Brute force over |a|, |b| <= 13 = floor(sqrt(343/2)) confirms 15 has no
        // small representative mod 7^3.
        let m = 343i64;
        let r = 15i64;
        for b in 1..=13i64 {
            for a in -13..=13i64 {
                if b % 7 != 0 {
                    assert_ne!((a - r * b).rem_euclid(m), 0);
                }
            }
        }
        let x = PadicScalar::from_i64(7, r, 3);
        assert_eq!(rational_reconstruct(&x), Err(PadicError::NoSmallRational));
    }

    #[test]
    fn reconstruct_with_negative_valuation() {
        let r = q(-5, 49);
        let x = PadicScalar::from_rational(7, &r, 8);
        assert_eq!(x.valuation().unwrap(), -2);
        assert_eq!(rational_reconstruct(&x).unwrap(), r);
    }

    #[test]
    fn precision_rules() {
        let a = PadicScalar::from_i64(7, 3, 5);
        let b = PadicScalar::from_i64(7, 14, 4);
        let s = &a + &b;
        assert_eq!(s.precision(), Some(4));
        let m = &a * &b;
        assert_eq!(m.valuation().unwrap(), 1);
        assert_eq!(m.precision(), Some(min(4, 1 + 5)));
        let z = PadicScalar::zero(7, 3);
        assert_eq!((&z * &b).precision(), Some(4));
        assert!((&z * &b).is_zero());
        let i = b.inv().unwrap();
        assert_eq!(i.valuation().unwrap(), -1);
        assert_eq!(i.precision(), Some(2));
        let c = PadicScalar::from_i64(7, 49 * 5, 6).div_int(&BigInt::from(49)).unwrap();
        assert_eq!(c, PadicScalar::from_i64(7, 5, 4));
        assert!(matches!(z.valuation(), Err(PadicError::PrecisionExhausted)));
        assert_eq!(
            PadicScalar::exact_zero(7).inv(),
            Err(PadicError::DivisionByZero)
        );
    }

    #[test]
    #[should_panic]
    fn mixing_primes_is_fatal() {
        let _ = &PadicScalar::one(5, 3) + &PadicScalar::one(7, 3);
    }

    #[test]
    fn display_form() {
        let x = PadicScalar::from_i64(7, 14, 5);
        assert_eq!(std::format!("{x}"), "2 * 7^1 (mod 7^5)");
    }

    fn scalar(p: u64) -> impl Strategy<Value = PadicScalar> {
        (-1000i64..1000, 1i64..500, 3i64..9).prop_map(move |(n, d, prec)| {
            PadicScalar::from_rational(p, &q(n, d), prec)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn distributive_mod_precision(x in scalar(7), y in scalar(7), z in scalar(7)) {
            let l = &(&x + &y) * &z;
            let r = &(&x * &z) + &(&y * &z);
            prop_assert!(l.congruent(&r));
        }

        #[test]
        fn valuation_is_additive(x in scalar(5), y in scalar(5)) {
            if let (Ok(a), Ok(b)) = (x.valuation(), y.valuation()) {
                prop_assert_eq!((&x * &y).valuation().unwrap(), a + b);
            }
        }

        #[test]
        fn embedding_matches_rational_arithmetic(a in -500i64..500, b in 1i64..300, c in -500i64..500, d in 1i64..300) {
            let (r, s) = (q(a, b), q(c, d));
            let p = 11;
            let emb = |t: &BigRational| PadicScalar::from_rational(p, t, 12);
            prop_assert!((&emb(&r) * &emb(&s)).congruent(&emb(&(&r * &s))));
            prop_assert!((&emb(&r) + &emb(&s)).congruent(&emb(&(&r + &s))));
        }

        #[test]
        fn reconstruct_inverts_embedding(a in -150i64..150, b in 1i64..150) {
            let r = q(a, b);
            prop_assume!(b % 13 != 0);
            // 13^5 / 2 > 150^2, so every such fraction is within the bound.
            let x = PadicScalar::from_rational(13, &r, 5 + x_val(&r));
            prop_assert_eq!(rational_reconstruct(&x).unwrap(), r);
        }
    }

    fn x_val(r: &BigRational) -> i64 {
        if r.is_zero() {
            0
        } else {
            split_p(13, r.numer()).0
        }
    }
}
