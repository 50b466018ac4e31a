//! CM elliptic curves over Q and the coefficients of their newforms.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::padic::kronecker_symbol;
use crate::series::RationalSeries;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CurveError {
    #[error("unknown curve label {0}")]
    UnknownLabel(String),
    #[error("invariant check failed for {name}: {what}")]
    Invariant { name: String, what: &'static str },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CmError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{0} is a prime of bad reduction")]
    BadPrime(u64),
    #[error("no representation 4*{0} = t^2 + |D| u^2 for a split prime")]
    Cornacchia(u64),
    #[error("inconsistent sign calibration at {0}")]
    CalibrationConflict(u64),
    #[error("truncation {0} exceeds the supported prime table")]
    TooLarge(usize),
}

/// Largest truncation `hecke_expand` sieves to.
pub const MAX_TRUNC: usize = 20_000_000;

/// A rational elliptic curve with complex multiplication.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurveData {
    pub name: String,
    pub ainvs: [i64; 5],
    pub c4: i64,
    pub c6: i64,
    pub disc: i64,
    pub conductor: u64,
    pub cm_disc: i64,
    pub modular_degree: u64,
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `(c4, c6, disc)` of a Weierstrass equation.
pub fn invariants(a: &[i64; 5]) -> (i128, i128, i128) {
    let [a1, a2, a3, a4, a6] = a.map(|x| x as i128);
    let b2 = a1 * a1 + 4 * a2;
    let b4 = 2 * a4 + a1 * a3;
    let b6 = a3 * a3 + 4 * a6;
    let b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4;
    let c4 = b2 * b2 - 24 * b4;
    let c6 = -b2 * b2 * b2 + 36 * b2 * b4 - 216 * b6;
    let disc = -b2 * b2 * b8 - 8 * b4 * b4 * b4 - 27 * b6 * b6 + 9 * b2 * b4 * b6;
    (c4, c6, disc)
}

/// `(label, ainvs, c4, c6, disc, conductor, cm_disc, modular_degree)`.
type BuiltinRow = (&'static str, [i64; 5], i64, i64, i64, u64, i64, u64);

const BUILTIN: [BuiltinRow; 4] = [
    ("27a1", [0, 0, 1, 0, -7], 0, 5832, -19683, 27, -3, 1),
    ("32a1", [0, 0, 0, 4, 0], -192, 0, -4096, 32, -4, 1),
    ("36a1", [0, 0, 0, 0, 1], 0, -864, -432, 36, -3, 1),
    ("49a1", [1, -1, 0, -2, -1], 105, 1323, -343, 49, -7, 1),
];

pub fn builtin_labels() -> impl Iterator<Item = &'static str> {
    BUILTIN.iter().map(|r| r.0)
}

/// Built-in curve by label.
pub fn load_curve(label: &str) -> Result<CurveData, CurveError> {
    let row = BUILTIN
        .iter()
        .find(|r| r.0 == label)
        .ok_or_else(|| CurveError::UnknownLabel(label.to_string()))?;
    let (name, a, c4, c6, disc, n, d, cg) = *row;
    CurveData::with_invariants(name, a, c4, c6, disc, n, d, cg)
}

impl CurveData {
    /// Curve from a-invariants; `c4`, `c6` and the discriminant are derived.
    pub fn from_ainvs(
        name: &str,
        ainvs: [i64; 5],
        conductor: u64,
        cm_disc: i64,
        modular_degree: u64,
    ) -> Result<Self, CurveError> {
        let (c4, c6, disc) = invariants(&ainvs);
        let fit = |x: i128| i64::try_from(x).ok();
        let bad = |what| CurveError::Invariant {
            name: name.to_string(),
            what,
        };
        let (c4, c6, disc) = match (fit(c4), fit(c6), fit(disc)) {
            (Some(a), Some(b), Some(c)) => (a, b, c),
            _ => return Err(bad("invariants overflow 64 bits")),
        };
        Self::with_invariants(name, ainvs, c4, c6, disc, conductor, cm_disc, modular_degree)
    }

    /// Curve from fully explicit data, validated against the a-invariants.
    #[allow(clippy::too_many_arguments)]
    pub fn with_invariants(
        name: &str,
        ainvs: [i64; 5],
        c4: i64,
        c6: i64,
        disc: i64,
        conductor: u64,
        cm_disc: i64,
        modular_degree: u64,
    ) -> Result<Self, CurveError> {
        let bad = |what| CurveError::Invariant {
            name: name.to_string(),
            what,
        };
        let (c4i, c6i, di) = (c4 as i128, c6 as i128, disc as i128);
        if c4i * c4i * c4i - c6i * c6i != 1728 * di {
            return Err(bad("c4^3 - c6^2 != 1728 disc"));
        }
        if disc == 0 {
            return Err(bad("singular model"));
        }
        let (e4, e6, ed) = invariants(&ainvs);
        if (e4, e6, ed) != (c4i, c6i, di) {
            return Err(bad("c4, c6, disc do not match the a-invariants"));
        }
        if !(cm_disc < 0 && matches!(cm_disc.rem_euclid(4), 0 | 1)) {
            return Err(bad("CM discriminant must be a negative discriminant"));
        }
        if conductor == 0 || modular_degree == 0 {
            return Err(bad("conductor and modular degree must be positive"));
        }
        Ok(CurveData {
            name: name.to_string(),
            ainvs,
            c4,
            c6,
            disc,
            conductor,
            cm_disc,
            modular_degree,
        })
    }

    pub fn g2(&self) -> BigRational {
        rat(self.c4, 12)
    }

    pub fn g3(&self) -> BigRational {
        rat(self.c6, 216)
    }

    /// j-invariant `c4^3 / disc`.
    pub fn j_invariant(&self) -> BigRational {
        let c4 = BigInt::from(self.c4);
        BigRational::new(&c4 * &c4 * &c4, BigInt::from(self.disc))
    }

    /// Coefficients `(A, B)` of the halved short model `y^2 = x^3 + A x + B`.
    pub fn short_model(&self) -> (BigRational, BigRational) {
        (rat(-self.c4, 48), rat(-self.c6, 864))
    }

    /// `b2 / 12`, the x-shift from the minimal to the short model.
    pub fn x_shift(&self) -> BigRational {
        let [a1, a2, ..] = self.ainvs;
        rat(a1 * a1 + 4 * a2, 12)
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Hypotheses at `p` for the main computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContextVerdict {
    pub p: u64,
    pub prime: bool,
    pub large_enough: bool,
    pub good: bool,
    pub chi: i8,
}

impl ContextVerdict {
    pub fn inert(&self) -> bool {
        self.chi == -1
    }

    pub fn admissible(&self) -> bool {
        self.prime && self.large_enough && self.good && self.inert()
    }

    /// First failed hypothesis, in a fixed order.
    pub fn reason(&self) -> Option<&'static str> {
        if !self.prime {
            Some("p is not prime")
        } else if !self.large_enough {
            Some("p < 5")
        } else if !self.good {
            Some("bad reduction at p")
        } else if self.chi == 1 {
            Some("p splits in O_K")
        } else if self.chi == 0 {
            Some("p ramifies in O_K")
        } else {
            None
        }
    }
}

pub fn check_context(curve: &CurveData, p: u64) -> ContextVerdict {
    let good = p != 0
        && !curve.disc.unsigned_abs().is_multiple_of(p)
        && !curve.conductor.is_multiple_of(p);
    ContextVerdict {
        p,
        prime: is_prime(p),
        large_enough: p >= 5,
        good,
        chi: kronecker_symbol(curve.cm_disc, p),
    }
}

/// Number of projective points of the minimal model over `F_l`, singular point included.
pub fn count_points(curve: &CurveData, l: u64) -> u64 {
    let li = l as i64;
    let [a1, a2, a3, a4, a6] = curve.ainvs.map(|a| a.rem_euclid(li));
    if l == 2 {
        let mut n = 1;
        for x in 0..2 {
            for y in 0..2 {
                let lhs = y * y + a1 * x * y + a3 * y;
                let rhs = x * x * x + a2 * x * x + a4 * x + a6;
                if (lhs - rhs).rem_euclid(2) == 0 {
                    n += 1;
                }
            }
        }
        return n;
    }
    let mut chi = vec![-1i8; l as usize];
    chi[0] = 0;
    for y in 1..l {
        chi[(y * y % l) as usize] = 1;
    }
    let mut n: i64 = 1;
    for x in 0..li {
        let h = (a1 * x + a3) % li;
        let f = (((x * x % li) * x + a2 * (x * x % li) + a4 * x + a6) % li + li) % li;
        let d = (h * h + 4 * f) % li;
        n += 1 + chi[d as usize] as i64;
    }
    n as u64
}

/// `l + 1 - #E(F_l)` by enumeration at a good prime.
pub fn a_ell_pointcount(curve: &CurveData, l: u64) -> Result<i64, CmError> {
    if !is_prime(l) {
        return Err(CmError::NotPrime(l));
    }
    if curve.disc.unsigned_abs().is_multiple_of(l) {
        return Err(CmError::BadPrime(l));
    }
    Ok(l as i64 + 1 - count_points(curve, l) as i64)
}

/// Trace of Frobenius at a bad prime from the reduction type.
pub fn a_ell_bad(curve: &CurveData, l: u64) -> i64 {
    if curve.conductor.is_multiple_of(l * l) {
        0
    } else {
        l as i64 + 1 - count_points(curve, l) as i64
    }
}

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    (a as u128 * b as u128 % m as u128) as u64
}

fn powmod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a, m);
        }
        a = mulmod(a, a, m);
        e >>= 1;
    }
    r
}

/// Square root of a quadratic residue modulo an odd prime (Tonelli-Shanks).
pub fn sqrt_mod(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    if powmod(a, (p - 1) / 2, p) != 1 {
        return None;
    }
    let (mut q, mut s) = (p - 1, 0);
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let mut z = 2;
    while powmod(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let (mut m, mut c, mut t, mut r) = (s, powmod(z, q, p), powmod(a, q, p), powmod(a, q.div_ceil(2), p));
    while t != 1 {
        let mut i = 0;
        let mut tt = t;
        while tt != 1 {
            tt = mulmod(tt, tt, p);
            i += 1;
        }
        let b = powmod(c, 1 << (m - i - 1), p);
        m = i;
        c = mulmod(b, b, p);
        t = mulmod(t, c, p);
        r = mulmod(r, b, p);
    }
    Some(r)
}

fn isqrt(n: u64) -> u64 {
    let mut r = libm::sqrt(n as f64) as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Solves `4l = t^2 + |d| u^2` with `t, u >= 0` (modified Cornacchia).
pub fn cornacchia(d: i64, l: u64) -> Option<(i64, i64)> {
    let dd = d.unsigned_abs();
    if l == 2 {
        for u in 0..=isqrt(8 / dd.max(1)) {
            let rest = 8i64 - (dd * u * u) as i64;
            if rest >= 0 {
                let t = isqrt(rest as u64);
                if t * t == rest as u64 {
                    return Some((t as i64, u as i64));
                }
            }
        }
        return None;
    }
    let mut x0 = sqrt_mod(d.rem_euclid(l as i64) as u64, l)?;
    if (x0 as i64 - d).rem_euclid(2) != 0 {
        x0 = l - x0;
    }
    let (mut a, mut b) = (2 * l, x0);
    let bound = isqrt(4 * l);
    while b > bound {
        (a, b) = (b, a % b);
    }
    let rest = 4 * l - b * b;
    if !rest.is_multiple_of(dd) {
        return None;
    }
    let c = isqrt(rest / dd);
    (c * c == rest / dd).then_some((b as i64, c as i64))
}

/// Element `(t + u sqrt(D)) / 2` of the CM order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Elt(i64, i64);

impl Elt {
    fn mul(self, o: Elt, d: i64) -> Elt {
        Elt((self.0 * o.0 + d * self.1 * o.1) / 2, (self.0 * o.1 + o.0 * self.1) / 2)
    }
    fn conj(self) -> Elt {
        Elt(self.0, -self.1)
    }
}

fn units(d: i64) -> Vec<Elt> {
    let gen = match d {
        -3 => Elt(1, 1),
        -4 => Elt(0, 1),
        _ => Elt(-2, 0),
    };
    let mut out = vec![Elt(2, 0)];
    loop {
        let next = out.last().unwrap().mul(gen, d);
        if next == Elt(2, 0) {
            return out;
        }
        out.push(next);
    }
}

/// Unit normalisation of Frobenius elements, keyed by residues of `(t, u)`.
///
/// The key is `(t mod a, u mod b)` for the coarsest `a, b | 2N/|D|` that
/// stays consistent on the calibration primes.
#[derive(Debug, Clone)]
pub struct CmCalibration {
    d: i64,
    modulus: (i64, i64),
    units: Vec<Elt>,
    table: BTreeMap<(i64, i64), usize>,
}

impl CmCalibration {
    fn key(&self, e: Elt) -> (i64, i64) {
        (e.0.rem_euclid(self.modulus.0), e.1.rem_euclid(self.modulus.1))
    }

    fn unit_index(&self, e: Elt) -> usize {
        self.units.iter().position(|&u| u == e).expect("unit")
    }

    fn record(&mut self, pi: Elt, zeta: usize) -> bool {
        let d = self.d;
        let n = self.units.len();
        for k in 0..n {
            let eps = self.units[k];
            let eps_inv = self.units[(n - k) % n];
            let moved = eps.mul(pi, d);
            let z = self.units[zeta].mul(eps_inv, d);
            for (elt, unit) in [(moved, z), (moved.conj(), z.conj())] {
                let key = self.key(elt);
                let idx = self.unit_index(unit);
                if *self.table.entry(key).or_insert(idx) != idx {
                    return false;
                }
            }
        }
        true
    }

    /// Learns the normalisation from point counts at split good primes below `bound`.
    pub fn calibrate(curve: &CurveData, bound: u64) -> Result<Self, CmError> {
        let d = curve.cm_disc;
        let m = if curve.conductor.is_multiple_of(d.unsigned_abs()) {
            curve.conductor / d.unsigned_abs()
        } else {
            curve.conductor
        };
        let units = units(d);
        let mut seen = Vec::new();
        let mut last = 0;
        for l in 2..bound {
            if !is_prime(l) || curve.conductor.is_multiple_of(l) || kronecker_symbol(d, l) != 1 {
                continue;
            }
            let a = a_ell_pointcount(curve, l)?;
            let (t, u) = cornacchia(d, l).ok_or(CmError::Cornacchia(l))?;
            let pi = Elt(t, u);
            let hits: Vec<usize> = (0..units.len()).filter(|&k| units[k].mul(pi, d).0 == a).collect();
            if let [zeta] = hits[..] {
                seen.push((pi, zeta));
            }
            last = l;
        }
        let full = 2 * m as i64;
        let divs: Vec<i64> = (1..=full).filter(|x| full % x == 0).collect();
        let mut shapes: Vec<(i64, i64)> = divs.iter().flat_map(|&a| divs.iter().map(move |&b| (a, b))).collect();
        shapes.sort_by_key(|&(a, b)| (a * b, a));
        for modulus in shapes {
            let mut cal = CmCalibration {
                d,
                modulus,
                units: units.clone(),
                table: BTreeMap::new(),
            };
            if seen.iter().all(|&(pi, z)| cal.record(pi, z)) {
                return Ok(cal);
            }
        }
        Err(CmError::CalibrationConflict(last))
    }

    /// `a(l)` for a good split prime, if the residue class was seen.
    pub fn trace(&self, l: u64) -> Result<Option<i64>, CmError> {
        let (t, u) = cornacchia(self.d, l).ok_or(CmError::Cornacchia(l))?;
        let pi = Elt(t, u);
        Ok(self
            .table
            .get(&self.key(pi))
            .map(|&k| self.units[k].mul(pi, self.d).0))
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }
}

/// Calibration bound for the sign rule.
pub const CALIBRATION_BOUND: u64 = 2000;

/// `a(l)` through the CM structure; falls back to point counting for unseen classes.
pub fn a_ell_cm(curve: &CurveData, cal: &CmCalibration, l: u64) -> Result<(i64, Provenance), CmError> {
    if !is_prime(l) {
        return Err(CmError::NotPrime(l));
    }
    if curve.conductor.is_multiple_of(l) || curve.disc.unsigned_abs().is_multiple_of(l) {
        return Err(CmError::BadPrime(l));
    }
    match kronecker_symbol(curve.cm_disc, l) {
        -1 => Ok((0, Provenance::Cornacchia)),
        _ => match cal.trace(l)? {
            Some(a) => Ok((a, Provenance::Cornacchia)),
            None => Ok((a_ell_pointcount(curve, l)?, Provenance::PointCount)),
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    PointCount,
    Cornacchia,
    BadPrime,
}

/// Coefficients `a(0..=T)` of the newform attached to a curve (`a(0) = 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct NewformCoeffs {
    pub curve: String,
    pub a: Vec<i64>,
    pub provenance: BTreeMap<u64, Provenance>,
}

impl NewformCoeffs {
    pub fn trunc(&self) -> usize {
        self.a.len() - 1
    }

    pub fn get(&self, n: usize) -> i64 {
        self.a[n]
    }

    /// `g = sum a(n) q^n` known modulo `q^(T+1)`.
    pub fn series(&self) -> RationalSeries {
        RationalSeries::from_integers(0, &self.a, self.a.len() as i64)
    }
}

/// Newform coefficients up to `T` from prime traces and the Hecke relations.
pub fn hecke_expand(curve: &CurveData, t: usize) -> Result<NewformCoeffs, CmError> {
    if t > MAX_TRUNC {
        return Err(CmError::TooLarge(t));
    }
    let cal = CmCalibration::calibrate(curve, CALIBRATION_BOUND)?;
    let mut spf = vec![0u32; t + 1];
    let mut primes = Vec::new();
    for n in 2..=t {
        if spf[n] == 0 {
            primes.push(n);
            let mut m = n;
            while m <= t {
                if spf[m] == 0 {
                    spf[m] = n as u32;
                }
                m += n;
            }
        }
    }
    let mut a = vec![0i64; t + 1];
    let mut provenance = BTreeMap::new();
    if t >= 1 {
        a[1] = 1;
    }
    let mut ap = BTreeMap::new();
    for &l in &primes {
        let l64 = l as u64;
        let (v, prov) = if curve.conductor.is_multiple_of(l64) {
            (a_ell_bad(curve, l64), Provenance::BadPrime)
        } else {
            a_ell_cm(curve, &cal, l64)?
        };
        ap.insert(l, v);
        provenance.insert(l64, prov);
    }
    for n in 2..=t {
        let l = spf[n] as usize;
        let mut m = n;
        let mut k = 0u32;
        while m % l == 0 {
            m /= l;
            k += 1;
        }
        let pk = n / m;
        if m > 1 {
            a[n] = a[pk] * a[m];
            continue;
        }
        let al = ap[&l];
        a[n] = if k == 1 {
            al
        } else if curve.conductor.is_multiple_of(l as u64) {
            al * a[n / l]
        } else {
            al * a[n / l] - l as i64 * a[n / l / l]
        };
    }
    Ok(NewformCoeffs {
        curve: curve.name.clone(),
        a,
        provenance,
    })
}

/// `E_g = sum a(n)/n q^n` modulo `q^T`.
pub fn eichler_integral(coeffs: &NewformCoeffs, t: usize) -> RationalSeries {
    assert!(t <= coeffs.a.len(), "coefficients not available to the truncation");
    let c = (1..t).map(|n| rat(coeffs.a[n], n as i64)).collect();
    RationalSeries::new((), 1, c, t as i64)
}

/// `(E_g, E_g|V_p)` modulo `q^T`, where `E_g|V_p = sum a(n)/(pn) q^(pn)`.
pub fn eichler(coeffs: &NewformCoeffs, p: u64, t: usize) -> (RationalSeries, RationalSeries) {
    let eg = eichler_integral(coeffs, t);
    let pi = p as i64;
    let tail_end = (t as i64 - 1) / pi + 1;
    let short = eichler_integral(coeffs, tail_end as usize);
    let egv = short
        .map(|_, c| c / BigRational::from_integer(BigInt::from(pi)))
        .op_vp(p)
        .truncate(t as i64);
    (eg, egv)
}

/// True when `a(l) = 0` for every inert good prime and Hasse holds at every good prime.
pub fn structural_checks(curve: &CurveData, coeffs: &NewformCoeffs) -> bool {
    let t = coeffs.trunc();
    (2..=t as u64).filter(|&l| is_prime(l)).all(|l| {
        let a = coeffs.a[l as usize];
        if curve.conductor.is_multiple_of(l) {
            return true;
        }
        let hasse = (a * a) as u64 <= 4 * l;
        let inert = kronecker_symbol(curve.cm_disc, l) != -1 || a == 0;
        hasse && inert
    })
}
