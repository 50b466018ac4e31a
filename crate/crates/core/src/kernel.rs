//! Fixed-point arithmetic modulo `p^W` and the power-series kernels used by
//! the long q- and t-expansions.
//!
//! Residues are `u64` below `2^50`, so a product fits in `u128` with room
//! for `2^27` lazy additions before a reduction is needed.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::padic::PadicScalar;

const MODULUS_BITS: u32 = 50;
const KARATSUBA_CUTOFF: usize = 32;
/// Safe number of unreduced `u128` products for any modulus below `2^50`.
const LAZY_TERMS: usize = 1 << 27;

/// The ring `Z / p^W` with `p^W < 2^50`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZpW {
    p: u64,
    w: u32,
    m: u64,
}

impl ZpW {
    pub fn new(p: u64, w: u32) -> Self {
        assert!(p >= 2 && w >= 1);
        let m = (p as u128).pow(w);
        assert!(m < 1u128 << MODULUS_BITS, "p^W must stay below 2^50");
        ZpW { p, w, m: m as u64 }
    }

    /// Largest `W` with `p^W < 2^50`.
    pub fn default_width(p: u64) -> u32 {
        let mut w = 0;
        let mut m: u128 = 1;
        while m * (p as u128) < 1u128 << MODULUS_BITS {
            m *= p as u128;
            w += 1;
        }
        w
    }

    pub fn for_prime(p: u64) -> Self {
        Self::new(p, Self::default_width(p))
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn width(&self) -> u32 {
        self.w
    }

    pub fn modulus(&self) -> u64 {
        self.m
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.m {
            s - self.m
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.m - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.m - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.m as u128) as u64
    }

    #[inline]
    fn reduce(&self, x: u128) -> u64 {
        (x % self.m as u128) as u64
    }

    pub fn from_i64(&self, n: i64) -> u64 {
        n.rem_euclid(self.m as i64) as u64
    }

    pub fn from_bigint(&self, n: &BigInt) -> u64 {
        n.mod_floor(&BigInt::from(self.m))
            .to_u64()
            .expect("reduced residue fits")
    }

    /// Image of a p-integral rational; `None` if `p` divides the denominator.
    pub fn from_rational(&self, r: &BigRational) -> Option<u64> {
        let d = self.from_bigint(r.denom());
        let di = self.inv(d)?;
        Some(self.mul(self.from_bigint(r.numer()), di))
    }

    /// Inverse of a unit residue.
    pub fn inv(&self, a: u64) -> Option<u64> {
        if a.is_multiple_of(self.p) {
            return None;
        }
        let (mut r0, mut r1) = (self.m as i128, a as i128);
        let (mut s0, mut s1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (s0, s1) = (s1, s0 - q * s1);
        }
        Some(s0.rem_euclid(self.m as i128) as u64)
    }

    pub fn pow(&self, mut a: u64, mut e: u64) -> u64 {
        let mut acc = 1 % self.m;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        acc
    }

    /// `v_p` of a residue, capped at `W` for zero.
    pub fn val(&self, mut a: u64) -> u32 {
        if a == 0 {
            return self.w;
        }
        let mut k = 0;
        while a.is_multiple_of(self.p) {
            a /= self.p;
            k += 1;
        }
        k
    }

    /// Splits `n` into `p^k * n'` with `p` not dividing `n'`.
    pub fn split(&self, mut n: u64) -> (u32, u64) {
        let mut k = 0;
        while n.is_multiple_of(self.p) {
            n /= self.p;
            k += 1;
        }
        (k, n)
    }

    /// Divides a residue by the positive integer `n = p^k n'`.
    ///
    /// Requires `p^k | a`; the quotient is only meaningful modulo
    /// `p^(W-k)`, which callers must account for.
    pub fn div_int(&self, a: u64, n: u64) -> Option<u64> {
        let (k, unit) = self.split(n);
        let pk = self.p.pow(k);
        if !a.is_multiple_of(pk) {
            return None;
        }
        let ui = self.inv(unit % self.m)?;
        Some(self.mul(a / pk, ui))
    }

    /// Signed lift of a residue into `(-m/2, m/2]`.
    pub fn signed(&self, a: u64) -> i64 {
        if a > self.m / 2 {
            a as i64 - self.m as i64
        } else {
            a as i64
        }
    }

    /// The residue as a p-adic scalar known modulo `p^prec` (`prec <= W`).
    pub fn to_padic(&self, a: u64, prec: i64) -> PadicScalar {
        debug_assert!(prec <= self.w as i64);
        let n = BigInt::from(a);
        if prec <= 0 {
            return PadicScalar::zero(self.p, prec);
        }
        let x = PadicScalar::from_bigint(self.p, &n, prec);
        if x.is_exact_zero() {
            PadicScalar::zero(self.p, prec)
        } else {
            x
        }
    }

    /// Residue of an integral p-adic scalar.
    pub fn from_padic(&self, x: &PadicScalar) -> Option<u64> {
        x.residue_u64(self.w)
    }

    /// Residue of an arbitrary signed integer.
    pub fn from_signed(&self, n: &BigInt) -> u64 {
        if n.is_negative() {
            self.neg(self.from_bigint(&-n))
        } else {
            self.from_bigint(n)
        }
    }

    pub fn is_zero(&self, a: u64) -> bool {
        a.is_zero()
    }
}

fn naive(z: &ZpW, a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut acc = vec![0u128; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        let x = x as u128;
        for (slot, &y) in acc[i..].iter_mut().zip(b) {
            *slot += x * y as u128;
        }
    }
    acc.into_iter().map(|s| z.reduce(s)).collect()
}

fn add_into(z: &ZpW, dst: &mut [u64], src: &[u64]) {
    for (d, &s) in dst.iter_mut().zip(src) {
        *d = z.add(*d, s);
    }
}

fn sub_into(z: &ZpW, dst: &mut [u64], src: &[u64]) {
    for (d, &s) in dst.iter_mut().zip(src) {
        *d = z.sub(*d, s);
    }
}

fn padded_sum(z: &ZpW, a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut out = a.to_vec();
    if b.len() > out.len() {
        out.resize(b.len(), 0);
    }
    add_into(z, &mut out, b);
    out
}

fn karatsuba(z: &ZpW, a: &[u64], b: &[u64]) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    if a.len().min(b.len()) <= KARATSUBA_CUTOFF {
        return naive(z, a, b);
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    let h = a.len().max(b.len()) / 2;
    if a.len() <= h || b.len() <= h {
        let (s, l) = if a.len() <= b.len() { (a, b) } else { (b, a) };
        for (ci, chunk) in l.chunks(s.len()).enumerate() {
            let part = karatsuba(z, s, chunk);
            add_into(z, &mut out[ci * s.len()..], &part);
        }
        return out;
    }
    let (a0, a1) = a.split_at(h);
    let (b0, b1) = b.split_at(h);
    let z0 = karatsuba(z, a0, b0);
    let z2 = karatsuba(z, a1, b1);
    let mut z1 = karatsuba(z, &padded_sum(z, a0, a1), &padded_sum(z, b0, b1));
    sub_into(z, &mut z1, &z0);
    sub_into(z, &mut z1, &z2);
    add_into(z, &mut out, &z0);
    add_into(z, &mut out[2 * h..], &z2);
    add_into(z, &mut out[h..], &z1);
    out
}

/// Full product of two polynomials.
pub fn mul_full(z: &ZpW, a: &[u64], b: &[u64]) -> Vec<u64> {
    karatsuba(z, a, b)
}

/// Product of two power series modulo `t^n`.
pub fn mul_trunc(z: &ZpW, a: &[u64], b: &[u64], n: usize) -> Vec<u64> {
    let a = &a[..a.len().min(n)];
    let b = &b[..b.len().min(n)];
    let mut out = karatsuba(z, a, b);
    out.resize(n, 0);
    out
}

/// Dot product `sum a[i] * b[i]` with lazy reduction.
pub fn dot(z: &ZpW, a: &[u64], b: &[u64]) -> u64 {
    let mut total = 0u64;
    for (ca, cb) in a.chunks(LAZY_TERMS).zip(b.chunks(LAZY_TERMS)) {
        let s: u128 = ca.iter().zip(cb).map(|(&x, &y)| x as u128 * y as u128).sum();
        total = z.add(total, z.reduce(s));
    }
    total
}

/// `sum_{0<i<k} a[i] * b[k-i]`, the inner part of a Cauchy product.
pub fn inner_conv(z: &ZpW, a: &[u64], b: &[u64], k: usize) -> u64 {
    if k < 2 {
        return 0;
    }
    let mut s: u128 = 0;
    let mut count = 0usize;
    let mut total = 0u64;
    for i in 1..k {
        s += a[i] as u128 * b[k - i] as u128;
        count += 1;
        if count == LAZY_TERMS {
            total = z.add(total, z.reduce(s));
            s = 0;
            count = 0;
        }
    }
    z.add(total, z.reduce(s))
}

/// Inverse of a power series with unit constant term, modulo `t^n`.
pub fn inv_series(z: &ZpW, a: &[u64], n: usize) -> Option<Vec<u64>> {
    let c = z.inv(*a.first()?)?;
    let mut b = vec![c];
    let mut k = 1;
    while k < n {
        let k2 = (2 * k).min(n);
        let mut e = mul_trunc(z, &a[..a.len().min(k2)], &b, k2);
        for x in e.iter_mut() {
            *x = z.neg(*x);
        }
        e[0] = z.add(e[0], 2);
        b = mul_trunc(z, &b, &e, k2);
        k = k2;
    }
    b.truncate(n);
    Some(b)
}

/// `a^e` modulo `t^n`.
pub fn pow_series(z: &ZpW, a: &[u64], mut e: u64, n: usize) -> Vec<u64> {
    let mut acc = vec![0u64; n];
    if n > 0 {
        acc[0] = 1 % z.modulus();
    }
    let mut base = a[..a.len().min(n)].to_vec();
    base.resize(n, 0);
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_trunc(z, &acc, &base, n);
        }
        e >>= 1;
        if e > 0 {
            base = mul_trunc(z, &base, &base, n);
        }
    }
    acc
}

/// `f(h(t))` modulo `t^n` for `h(0) = 0`, by Paterson-Stockmeyer.
pub fn compose(z: &ZpW, f: &[u64], h: &[u64], n: usize) -> Vec<u64> {
    assert!(h.first().is_none_or(|&c| c == 0), "inner series must vanish at 0");
    let mut out = vec![0u64; n];
    if n == 0 || f.is_empty() {
        return out;
    }
    let r = match h.iter().take(n).position(|&c| c != 0) {
        Some(r) => r,
        None => {
            out[0] = f[0];
            return out;
        }
    };
    let terms = f.len().min((n - 1) / r + 1);
    let f = &f[..terms];
    let m = (libm::sqrt(terms as f64) as usize).max(1);
    let mut powers: Vec<Vec<u64>> = Vec::with_capacity(m + 1);
    let mut one = vec![0u64; n];
    one[0] = 1 % z.modulus();
    powers.push(one);
    let mut hn = h[..h.len().min(n)].to_vec();
    hn.resize(n, 0);
    for i in 1..=m {
        let next = if i == 1 {
            hn.clone()
        } else {
            mul_trunc(z, &powers[i - 1], &hn, n)
        };
        powers.push(next);
    }
    let blocks = terms.div_ceil(m);
    let giant = &powers[m];
    for j in (0..blocks).rev() {
        if j + 1 < blocks {
            out = mul_trunc(z, &out, giant, n);
        }
        let mut acc = vec![0u128; n];
        for (i, &c) in f[j * m..terms.min((j + 1) * m)].iter().enumerate() {
            if c == 0 {
                continue;
            }
            for (slot, &x) in acc.iter_mut().zip(&powers[i]) {
                *slot += c as u128 * x as u128;
            }
        }
        for (o, s) in out.iter_mut().zip(acc) {
            *o = z.add(*o, z.reduce(s));
        }
    }
    out
}

/// `d/dt` of a power series.
pub fn deriv(z: &ZpW, a: &[u64]) -> Vec<u64> {
    a.iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| z.mul(c, i as u64 % z.modulus()))
        .collect()
}

/// `t d/dt` of a power series whose index 0 sits at exponent `shift`.
pub fn theta(z: &ZpW, a: &[u64], shift: i64) -> Vec<u64> {
    a.iter()
        .enumerate()
        .map(|(i, &c)| z.mul(c, z.from_i64(i as i64 + shift)))
        .collect()
}

#[cfg(test)]
mod tests {
    extern crate std;
    use super::*;
    use proptest::prelude::*;

    fn schoolbook(z: &ZpW, a: &[u64], b: &[u64], n: usize) -> Vec<u64> {
        let mut out = vec![0u64; n];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                if i + j < n {
                    out[i + j] = z.add(out[i + j], z.mul(x, y));
                }
            }
        }
        out
    }

    #[test]
    fn widths() {
        assert_eq!(ZpW::default_width(5), 21);
        assert_eq!(ZpW::default_width(7), 17);
        assert_eq!(ZpW::default_width(11), 14);
        assert_eq!(ZpW::default_width(13), 13);
    }

    #[test]
    fn inverse_and_division() {
        let z = ZpW::new(7, 6);
        for a in [1u64, 2, 3, 100, 117648] {
            assert_eq!(z.mul(a, z.inv(a).unwrap()), 1);
        }
        assert_eq!(z.inv(49), None);
        // The quotient is only defined modulo 7^(6-2).
        let d = z.div_int(z.from_i64(-98), 49).unwrap();
        assert_eq!(d % 2401, 2401 - 2);
        assert_eq!(z.div_int(5, 7), None);
    }

    #[test]
    fn compose_with_geometric_series() {
        // 1/(1-h) for h = t gives all ones.
        let z = ZpW::new(11, 5);
        let f = vec![1u64; 40];
        let out = compose(&z, &f, &[0, 1], 40);
        assert!(out.iter().all(|&c| c == 1));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn karatsuba_matches_schoolbook(a in proptest::collection::vec(0u64..1_000_000, 1..300),
                                        b in proptest::collection::vec(0u64..1_000_000, 1..300)) {
            let z = ZpW::new(7, 17);
            let n = a.len() + b.len() - 1;
            prop_assert_eq!(mul_trunc(&z, &a, &b, n), schoolbook(&z, &a, &b, n));
        }

        #[test]
        fn series_inverse(a in proptest::collection::vec(0u64..1_000_000, 1..200)) {
            let z = ZpW::new(5, 21);
            let mut a = a;
            a[0] = a[0] * 5 + 1;
            let n = a.len();
            let b = inv_series(&z, &a, n).unwrap();
            let mut one = vec![0u64; n];
            one[0] = 1;
            prop_assert_eq!(mul_trunc(&z, &a, &b, n), one);
        }

        #[test]
        fn compose_matches_horner(f in proptest::collection::vec(0u64..1000, 1..60),
                                  h in proptest::collection::vec(0u64..1000, 1..60)) {
            let z = ZpW::new(13, 13);
            let mut h = h;
            h[0] = 0;
            let n = 70;
            let mut acc = vec![0u64; n];
            for &c in f.iter().rev() {
                acc = mul_trunc(&z, &acc, &h, n);
                acc[0] = z.add(acc[0], c);
            }
            prop_assert_eq!(compose(&z, &f, &h, n), acc);
        }
    }
}
