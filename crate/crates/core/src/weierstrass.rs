//! Weierstrass functions of the lattice attached to a curve: Laurent tables,
//! the q-expansions `x(q) = P(E_g(q))` and `Z(q) = zeta(E_g(q))`, and the
//! archimedean period lattice.
//!
//! The q-side recursion solves `(D x)^2 = (4x^3 - g2 x - g3) g^2` for
//! `x = q^-2 X` in `Z / p^W`. Each step divides by `4(k+1)`, so the
//! computed `X` is exact to `p^(W-L)` with `L = max v_p(k+1)`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cmforms::{eichler_integral, CurveData, NewformCoeffs};
use crate::kernel::{self, ZpW};
use crate::padic::PadicScalar;
use crate::series::{PadicCtx, PadicSeries, RationalSeries, SeriesError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WeierstrassError {
    #[error("x(q) is not p-integral at q^{0}")]
    Integrality(i64),
    #[error("g2, g3 are not p-integral")]
    NotIntegral,
    #[error("working width {w} is too small for loss {loss}")]
    Width { w: u32, loss: u32 },
    #[error("newform coefficients end before q^{0}")]
    ShortCoefficients(usize),
    #[error("recursion disagrees with direct composition at q^{0}")]
    CrossCheck(i64),
    #[error("residue of x g is nonzero; the recursion is inconsistent")]
    Degenerate,
    #[error("AGM did not converge")]
    AgmNonConvergence,
    #[error("no period pair reproduces g2, g3")]
    NoLattice,
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// `g2`, `g3` and the Laurent coefficients `c_k` of `P(z) = z^-2 + sum c_k z^(2k-2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeInvariants {
    pub g2: BigRational,
    pub g3: BigRational,
    /// `c[k]` for `k = 0..=K`; entries 0 and 1 are unused zeros.
    pub c: Vec<BigRational>,
}

/// Laurent coefficients of `P` and `zeta` to `K` terms.
pub fn wp_zeta_laurent(g2: &BigRational, g3: &BigRational, k: usize) -> LatticeInvariants {
    assert!(k >= 2);
    let mut c = vec![BigRational::zero(); k + 1];
    c[2] = g2 / BigRational::from_integer(20.into());
    if k >= 3 {
        c[3] = g3 / BigRational::from_integer(28.into());
    }
    for n in 4..=k {
        let mut s = BigRational::zero();
        for m in 2..=n - 2 {
            s += &c[m] * &c[n - m];
        }
        let d = BigInt::from((2 * n + 1) * (n - 3));
        c[n] = s * BigRational::new(3.into(), d);
    }
    LatticeInvariants {
        g2: g2.clone(),
        g3: g3.clone(),
        c,
    }
}

impl LatticeInvariants {
    pub fn for_curve(curve: &CurveData, k: usize) -> Self {
        wp_zeta_laurent(&curve.g2(), &curve.g3(), k)
    }

    pub fn terms(&self) -> usize {
        self.c.len() - 1
    }

    /// `P(z)` modulo `z^(2K)`.
    pub fn wp_series(&self) -> RationalSeries {
        let k = self.terms();
        let mut coeffs = vec![BigRational::zero(); 2 * k + 2];
        coeffs[0] = BigRational::one();
        for n in 2..=k {
            coeffs[2 * n] = self.c[n].clone();
        }
        RationalSeries::new((), -2, coeffs, 2 * k as i64)
    }

    /// `zeta(z) = 1/z - sum c_k z^(2k-1)/(2k-1)` modulo `z^(2K+1)`.
    pub fn zeta_series(&self) -> RationalSeries {
        let k = self.terms();
        let mut coeffs = vec![BigRational::zero(); 2 * k + 1];
        coeffs[0] = BigRational::one();
        for n in 2..=k {
            let d = BigRational::from_integer(BigInt::from(2 * n as i64 - 1));
            coeffs[2 * n] = -(&self.c[n] / d);
        }
        RationalSeries::new((), -1, coeffs, 2 * k as i64 + 1)
    }

    /// `c_k` as complex doubles.
    pub fn c_f64(&self) -> Vec<f64> {
        self.c.iter().map(|r| r.to_f64().unwrap_or(0.0)).collect()
    }
}

/// Laurent table of `P` in doubles, for evaluation far beyond rational sizes.
pub fn wp_coeffs_f64(g2: f64, g3: f64, k: usize) -> Vec<f64> {
    let mut c = vec![0.0; k + 1];
    if k >= 2 {
        c[2] = g2 / 20.0;
    }
    if k >= 3 {
        c[3] = g3 / 28.0;
    }
    for n in 4..=k {
        let s: f64 = (2..=n - 2).map(|m| c[m] * c[n - m]).sum();
        c[n] = 3.0 * s / ((2 * n + 1) as f64 * (n - 3) as f64);
    }
    c
}

/// Working precision of the q-side kernel.
pub fn loss_for(p: u64, t: usize) -> u32 {
    let mut l = 0;
    let mut m = p as u128;
    while m <= t as u128 + 2 {
        m *= p as u128;
        l += 1;
    }
    l
}

/// Residue data of `x(q) = q^-2 X(q)` and `g(q) = q G(q)`.
#[derive(Debug, Clone)]
pub struct QExpansion {
    pub zp: ZpW,
    pub t: usize,
    pub loss: u32,
    /// `X_k` for `k = 0..=T+1`.
    pub big_x: Vec<u64>,
    /// `G_k = a(k+1)` for `k = 0..=T+1`.
    pub big_g: Vec<u64>,
    /// `[X G]_k` for `k = 0..=T+1`.
    pub xg: Vec<u64>,
    /// Constant term of `zeta(E_g(q))`.
    pub z0: BigRational,
}

/// Solves the x(q) recursion modulo `p^W`.
pub fn q_expansion(
    curve: &CurveData,
    coeffs: &NewformCoeffs,
    p: u64,
    t: usize,
    width: Option<u32>,
) -> Result<QExpansion, WeierstrassError> {
    let zp = match width {
        Some(w) => ZpW::new(p, w),
        None => ZpW::for_prime(p),
    };
    let loss = loss_for(p, t);
    if zp.width() < 2 * loss + 1 {
        return Err(WeierstrassError::Width {
            w: zp.width(),
            loss,
        });
    }
    let n = t + 2;
    if coeffs.a.len() < n + 1 {
        return Err(WeierstrassError::ShortCoefficients(n));
    }
    let g2 = zp
        .from_rational(&curve.g2())
        .ok_or(WeierstrassError::NotIntegral)?;
    let g3 = zp
        .from_rational(&curve.g3())
        .ok_or(WeierstrassError::NotIntegral)?;
    let big_g: Vec<u64> = (0..n).map(|k| zp.from_i64(coeffs.a[k + 1])).collect();
    let h = kernel::mul_trunc(&zp, &big_g, &big_g, n);

    let mut x = vec![0u64; n];
    let mut pv = vec![0u64; n];
    let mut x2 = vec![0u64; n];
    let mut r = vec![0u64; n];
    x[0] = 1;
    pv[0] = zp.neg(2);
    x2[0] = 1;
    r[0] = 4;
    for k in 1..n {
        let lp = kernel::inner_conv(&zp, &pv, &pv, k);
        let s2 = kernel::inner_conv(&zp, &x, &x, k);
        let s3 = kernel::inner_conv(&zp, &x, &x2, k);
        // R_k without its 12 X_k part, then the H-convolution.
        let mut rk = zp.mul(4, zp.add(s2, s3));
        if k >= 4 {
            rk = zp.sub(rk, zp.mul(g2, x[k - 4]));
        }
        if k == 6 {
            rk = zp.sub(rk, g3);
        }
        let hr = zp.add(kernel::inner_conv(&zp, &h, &r, k), zp.mul(h[k], r[0]));
        let rprime = zp.add(rk, hr);
        let num = zp.sub(lp, rprime);
        let xk = zp
            .div_int(num, 4 * (k as u64 + 1))
            .ok_or(WeierstrassError::Integrality(k as i64 - 2))?;
        x[k] = xk;
        pv[k] = zp.mul(xk, zp.from_i64(k as i64 - 2));
        x2[k] = zp.add(zp.mul(2, xk), s2);
        r[k] = zp.add(rk, zp.mul(12, xk));
    }
    let xg = kernel::mul_trunc(&zp, &x, &big_g, n);
    if xg.len() > 1 && xg[1] != 0 {
        return Err(WeierstrassError::Degenerate);
    }
    let z0 = zeta_constant_term(curve, coeffs)?;
    Ok(QExpansion {
        zp,
        t,
        loss,
        big_x: x,
        big_g,
        xg,
        z0,
    })
}

/// Constant term of `zeta(E_g(q))` by exact low-order composition.
fn zeta_constant_term(curve: &CurveData, coeffs: &NewformCoeffs) -> Result<BigRational, WeierstrassError> {
    let lat = LatticeInvariants::for_curve(curve, 2);
    let eg = eichler_integral(coeffs, 4);
    let z = lat.zeta_series().compose(&eg)?;
    Ok(z.coeff(0))
}

impl QExpansion {
    /// Certified absolute precision of `x`, `f` and the integrand of `Z`.
    pub fn precision(&self) -> i64 {
        self.zp.width() as i64 - self.loss as i64
    }

    pub fn prime(&self) -> u64 {
        self.zp.prime()
    }

    fn ctx(&self) -> PadicCtx {
        PadicCtx {
            p: self.prime(),
            prec: self.precision(),
        }
    }

    /// `x(q)` modulo `q^T`.
    pub fn x_series(&self) -> PadicSeries {
        let prec = self.precision();
        let coeffs = (0..self.t + 2)
            .map(|k| self.zp.to_padic(self.big_x[k], prec))
            .collect();
        PadicSeries::new(self.ctx(), -2, coeffs, self.t as i64)
    }

    /// `Z(q) = zeta(E_g(q))` modulo `q^T`: `Z_n = -[x g]_n / n`, constant term patched.
    pub fn zeta_series(&self) -> Result<PadicSeries, WeierstrassError> {
        let prec = self.precision();
        let p = self.prime();
        let mut coeffs = Vec::with_capacity(self.t + 1);
        for n in -1..self.t as i64 {
            let c = if n == 0 {
                PadicScalar::from_rational(p, &self.z0, prec)
            } else {
                let v = self.zp.neg(self.xg[(n + 1) as usize]);
                self.zp
                    .to_padic(v, prec)
                    .div_int(&BigInt::from(n))
                    .map_err(SeriesError::from)?
            };
            coeffs.push(c);
        }
        Ok(PadicSeries::new(self.ctx(), -1, coeffs, self.t as i64))
    }

    /// `x(q) g(q)` modulo `q^T`.
    pub fn xg_series(&self) -> PadicSeries {
        let prec = self.precision();
        let coeffs = (0..self.t + 1)
            .map(|k| self.zp.to_padic(self.xg[k], prec))
            .collect();
        PadicSeries::new(self.ctx(), -1, coeffs, self.t as i64)
    }

    /// Residues of `f(q) = -2 x g / D x = -2 q X G / (D X - 2 X)` for exponents `0..T`.
    pub fn f_residues(&self) -> Vec<u64> {
        let zp = &self.zp;
        let n = self.t;
        let pv: Vec<u64> = self
            .big_x
            .iter()
            .take(n)
            .enumerate()
            .map(|(k, &v)| zp.mul(v, zp.from_i64(k as i64 - 2)))
            .collect();
        let pinv = kernel::inv_series(zp, &pv, n).expect("D X - 2 X starts with the unit -2");
        let num: Vec<u64> = self.xg.iter().take(n).map(|&c| zp.mul(c, zp.neg(2))).collect();
        let body = kernel::mul_trunc(zp, &num, &pinv, n);
        let mut f = vec![0u64; n];
        f[1..n].copy_from_slice(&body[..n - 1]);
        f
    }

    /// `f(q)` as a p-adic series modulo `q^T`.
    pub fn f_series(&self) -> PadicSeries {
        let prec = self.precision();
        let coeffs = self
            .f_residues()
            .into_iter()
            .map(|c| self.zp.to_padic(c, prec))
            .collect();
        PadicSeries::new(self.ctx(), 0, coeffs, self.t as i64)
    }
}

/// Largest exponent cross-checked against exact composition at run time.
pub const RUNTIME_CROSS_CHECK: usize = 40;

/// `P(E_g(q))` by exact composition, modulo `q^T`.
pub fn x_by_composition(curve: &CurveData, coeffs: &NewformCoeffs, t: usize) -> Result<RationalSeries, WeierstrassError> {
    let lat = LatticeInvariants::for_curve(curve, t / 2 + 2);
    let eg = eichler_integral(coeffs, t + 3);
    Ok(lat.wp_series().compose(&eg)?.truncate(t as i64))
}

/// `zeta(E_g(q))` by exact composition, modulo `q^T`.
pub fn zeta_by_composition(curve: &CurveData, coeffs: &NewformCoeffs, t: usize) -> Result<RationalSeries, WeierstrassError> {
    let lat = LatticeInvariants::for_curve(curve, t / 2 + 2);
    let eg = eichler_integral(coeffs, t + 2);
    Ok(lat.zeta_series().compose(&eg)?.truncate(t as i64))
}

fn cross_check(a: &PadicSeries, b: &RationalSeries) -> Result<(), WeierstrassError> {
    for n in b.ord()..b.trunc().min(a.trunc()) {
        let want = PadicScalar::from_rational(a.prime(), &b.coeff(n), a.coeff(n).precision().unwrap_or(64));
        if !a.coeff(n).congruent(&want) {
            return Err(WeierstrassError::CrossCheck(n));
        }
    }
    Ok(())
}

fn coefficients_for(curve: &CurveData, t: usize) -> Result<NewformCoeffs, WeierstrassError> {
    crate::cmforms::hecke_expand(curve, t + 3).map_err(|_| WeierstrassError::ShortCoefficients(t + 3))
}

/// `x(q)` modulo `q^T`, cross-checked against exact composition at low order.
pub fn x_series_of_q(curve: &CurveData, p: u64, t: usize) -> Result<PadicSeries, WeierstrassError> {
    let coeffs = coefficients_for(curve, t)?;
    let qe = q_expansion(curve, &coeffs, p, t, None)?;
    let x = qe.x_series();
    cross_check(&x, &x_by_composition(curve, &coeffs, t.min(RUNTIME_CROSS_CHECK))?)?;
    Ok(x)
}

/// `Z(q) = zeta(E_g(q))` modulo `q^T`, cross-checked at low order.
pub fn zeta_series_of_q(curve: &CurveData, p: u64, t: usize) -> Result<PadicSeries, WeierstrassError> {
    let coeffs = coefficients_for(curve, t)?;
    let qe = q_expansion(curve, &coeffs, p, t, None)?;
    let z = qe.zeta_series()?;
    cross_check(&z, &zeta_by_composition(curve, &coeffs, t.min(RUNTIME_CROSS_CHECK))?)?;
    Ok(z)
}

/// `N+ = Z - S E_g`.
pub fn weierstrass_mock(z: &PadicSeries, eg: &PadicSeries, s: &BigRational) -> Result<PadicSeries, WeierstrassError> {
    Ok(z.sub(&eg.scale_rational(s))?)
}

/// Period lattice of `y^2 = 4x^3 - g2 x - g3` in double precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArchimedeanLattice {
    pub omega1: Complex64,
    pub omega2: Complex64,
    pub eta1: Complex64,
    pub eta2: Complex64,
    pub area: f64,
    pub s_numeric: Complex64,
    pub g2: f64,
    pub g3: f64,
}

fn cubic_roots(g2: f64, g3: f64) -> [Complex64; 3] {
    // Durand-Kerner on x^3 - (g2/4) x - g3/4.
    let f = |x: Complex64| x * x * x - x * (g2 / 4.0) - g3 / 4.0;
    let seed = Complex64::new(0.4, 0.9);
    let scale = 1.0 + libm::fabs(g2).max(libm::fabs(g3));
    let mut r = [seed * scale, seed * seed * scale, seed * seed * seed * scale];
    for _ in 0..2000 {
        let old = r;
        for i in 0..3 {
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..3 {
                if i != j {
                    den *= r[i] - r[j];
                }
            }
            r[i] -= f(r[i]) / den;
        }
        let moved: f64 = (0..3).map(|i| (r[i] - old[i]).norm()).sum();
        if moved < 1e-16 * scale {
            break;
        }
    }
    r
}

fn agm(mut a: Complex64, mut b: Complex64) -> Result<Complex64, WeierstrassError> {
    for _ in 0..200 {
        let a1 = (a + b) / 2.0;
        let mut b1 = (a * b).sqrt();
        if (a1 - b1).norm() > (a1 + b1).norm() {
            b1 = -b1;
        }
        a = a1;
        b = b1;
        if (a - b).norm() <= 1e-15 * a.norm() {
            return Ok(a);
        }
    }
    Err(WeierstrassError::AgmNonConvergence)
}

/// `sum sigma_1(n) q^n` style Eisenstein values at `tau`: `(E2, E4, E6)`.
fn eisenstein(tau: Complex64) -> (Complex64, Complex64, Complex64) {
    let q = (Complex64::new(0.0, 2.0 * PI) * tau).exp();
    let (mut s1, mut s3, mut s5) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    let mut qn = Complex64::new(1.0, 0.0);
    for n in 1..200u32 {
        qn *= q;
        if qn.norm() < 1e-30 {
            break;
        }
        let (mut d1, mut d3, mut d5) = (0.0f64, 0.0f64, 0.0f64);
        for d in 1..=n {
            if n % d == 0 {
                let df = d as f64;
                d1 += df;
                d3 += df * df * df;
                d5 += df * df * df * df * df;
            }
        }
        s1 += qn * d1;
        s3 += qn * d3;
        s5 += qn * d5;
    }
    (1.0 - 24.0 * s1, 1.0 + 240.0 * s3, 1.0 - 504.0 * s5)
}

/// Lagrange-Gauss reduction of a period basis, oriented so `Im(w2/w1) > 0`.
fn reduce_basis(mut w1: Complex64, mut w2: Complex64) -> (Complex64, Complex64) {
    loop {
        if w2.norm() < w1.norm() {
            core::mem::swap(&mut w1, &mut w2);
        }
        let mu = libm::round((w2 / w1).re);
        if mu == 0.0 {
            break;
        }
        w2 -= w1 * mu;
        if w2.norm() >= w1.norm() {
            break;
        }
    }
    if (w2 / w1).im < 0.0 {
        w2 = -w2;
    }
    (w1, w2)
}

fn invariants_from_basis(w1: Complex64, tau: Complex64) -> (Complex64, Complex64) {
    let (_, e4, e6) = eisenstein(tau);
    let pi4 = PI * PI * PI * PI;
    let pi6 = pi4 * PI * PI;
    (
        e4 * (4.0 * pi4 / 3.0) / w1.powi(4),
        e6 * (8.0 * pi6 / 27.0) / w1.powi(6),
    )
}

/// Periods by complex AGM, quasi-periods from `E2`, and the constant `S`.
pub fn periods_agm(curve: &CurveData) -> Result<ArchimedeanLattice, WeierstrassError> {
    let g2 = curve.g2().to_f64().unwrap_or(0.0);
    let g3 = curve.g3().to_f64().unwrap_or(0.0);
    lattice_from_invariants(g2, g3)
}

pub fn lattice_from_invariants(g2: f64, g3: f64) -> Result<ArchimedeanLattice, WeierstrassError> {
    let e = cubic_roots(g2, g3);
    let mut cands = Vec::new();
    for i in 0..3 {
        for (j, k) in [(1usize, 2usize), (2, 1)] {
            let (j, k) = ((i + j) % 3, (i + k) % 3);
            let m = agm((e[i] - e[j]).sqrt(), (e[i] - e[k]).sqrt())?;
            cands.push(Complex64::new(PI, 0.0) / m);
        }
    }
    let scale = 1.0 + libm::fabs(g2).max(libm::fabs(g3));
    let mut best: Option<(f64, Complex64, Complex64)> = None;
    let n = cands.len();
    for a in 0..n {
        for b in 0..n {
            let (w1, w2) = (cands[a], cands[b]);
            if (w2 / w1).im.abs() < 1e-6 {
                continue;
            }
            let (w1, w2) = reduce_basis(w1, w2);
            let (h2, h3) = invariants_from_basis(w1, w2 / w1);
            let err = ((h2 - g2).norm() + (h3 - g3).norm()) / scale;
            if best.is_none_or(|(e0, ..)| err < e0) {
                best = Some((err, w1, w2));
            }
        }
    }
    let (err, w1, w2) = best.ok_or(WeierstrassError::NoLattice)?;
    if err > 1e-8 {
        return Err(WeierstrassError::NoLattice);
    }
    let tau = w2 / w1;
    let (e2, ..) = eisenstein(tau);
    let eta1 = e2 * (PI * PI / 3.0) / w1;
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);
    let eta2 = (eta1 * w2 - two_pi_i) / w1;
    let area = (w1.conj() * w2).im.abs();
    let kappa = PI / area;
    let s_numeric = (eta1 - w1.conj() * kappa) / w1;
    Ok(ArchimedeanLattice {
        omega1: w1,
        omega2: w2,
        eta1,
        eta2,
        area,
        s_numeric,
        g2,
        g3,
    })
}

impl ArchimedeanLattice {
    /// `|eta1 w2 - eta2 w1 - 2 pi i| / 2 pi`.
    pub fn legendre_defect(&self) -> f64 {
        (self.eta1 * self.omega2 - self.eta2 * self.omega1 - Complex64::new(0.0, 2.0 * PI)).norm()
            / (2.0 * PI)
    }

    pub fn tau(&self) -> Complex64 {
        self.omega2 / self.omega1
    }

    fn shortest(&self) -> f64 {
        self.omega1.norm().min(self.omega2.norm())
    }
}

/// Evaluates `zeta` from its Laurent table; valid well inside the disc of radius `|w_min|`.
pub struct ZetaEvaluator {
    c: Vec<f64>,
    radius: f64,
}

impl ZetaEvaluator {
    pub fn new(lat: &ArchimedeanLattice) -> Self {
        ZetaEvaluator {
            c: wp_coeffs_f64(lat.g2, lat.g3, 160),
            radius: lat.shortest(),
        }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let z2 = z * z;
        let mut acc = Complex64::new(0.0, 0.0);
        for k in (2..self.c.len()).rev() {
            acc = acc * z2 + self.c[k] / (2 * k - 1) as f64;
        }
        // acc = sum c_k z^(2k-4) / (2k-1)
        z.inv() - acc * z2 * z
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

/// Max over samples of `|R(z + w) - R(z)|` with `R(z) = zeta(z) - S z - (pi/a) conj(z)`.
///
/// Samples sit near `-w/2` so both `z` and `z + w` lie in the disc where
/// the Laurent expansion converges quickly; no quasi-period is used to
/// evaluate `zeta`.
pub fn check_r_periodicity(
    lat: &ArchimedeanLattice,
    s: Complex64,
    shifts: &[Complex64],
    samples: usize,
    seed: u64,
) -> f64 {
    let ev = ZetaEvaluator::new(lat);
    let kappa = PI / lat.area;
    let limit = 0.8 * ev.radius();
    let r = |z: Complex64| ev.eval(z) - s * z - kappa * z.conj();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for &w in shifts {
        if w.norm() == 0.0 {
            continue;
        }
        let rho = limit - w.norm() / 2.0;
        if rho <= 0.05 * ev.radius() {
            continue;
        }
        for _ in 0..samples {
            let z = loop {
                let rad = rho * libm::sqrt(rng.gen::<f64>());
                let ang = 2.0 * PI * rng.gen::<f64>();
                let z = -w / 2.0 + Complex64::from_polar(rad, ang);
                // Resample near the poles at 0 and -w.
                if z.norm() > 0.05 * ev.radius() && (z + w).norm() > 0.05 * ev.radius() {
                    break z;
                }
            };
            worst = worst.max((r(z + w) - r(z)).norm());
        }
    }
    worst
}

/// Lattice vectors usable as shifts by `check_r_periodicity`.
pub fn standard_shifts(lat: &ArchimedeanLattice) -> Vec<Complex64> {
    let (w1, w2) = (lat.omega1, lat.omega2);
    let limit = 1.5 * lat.shortest();
    [w1, w2, w2 - w1, w1 + w2]
        .into_iter()
        .filter(|w| w.norm() < limit)
        .collect()
}

/// Best rational with denominator at most `max_den`, if within `tol` of `x`.
pub fn rationalize(x: f64, max_den: i64, tol: f64) -> Option<BigRational> {
    let (mut h0, mut h1) = (0i64, 1i64);
    let (mut k0, mut k1) = (1i64, 0i64);
    let mut y = x;
    for _ in 0..64 {
        let a = libm::floor(y);
        let ai = a as i64;
        let h2 = ai.checked_mul(h1)?.checked_add(h0)?;
        let k2 = ai.checked_mul(k1)?.checked_add(k0)?;
        if k2 > max_den {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if libm::fabs(x - h1 as f64 / k1 as f64) <= tol {
            return Some(BigRational::new(h1.into(), k1.into()));
        }
        let frac = y - a;
        if frac.abs() < 1e-300 {
            break;
        }
        y = 1.0 / frac;
    }
    None
}

/// Absolute difference between a rational and a double.
pub fn rational_distance(r: &BigRational, x: f64) -> f64 {
    libm::fabs(r.to_f64().unwrap_or(f64::NAN) - x)
}

/// Signed-size helper used by reports.
pub fn rational_is_small(r: &BigRational, bound: i64) -> bool {
    r.numer().abs() <= BigInt::from(bound) && r.denom() <= &BigInt::from(bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmforms::{hecke_expand, load_curve};
    use crate::series::EXACT;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn laurent_examples() {
        let l = wp_zeta_laurent(&q(4, 1), &q(0, 1), 6);
        assert_eq!(l.c[2], q(1, 5));
        assert_eq!(l.c[3], q(0, 1));
        assert_eq!(l.c[4], q(1, 75));
        let zero = wp_zeta_laurent(&q(0, 1), &q(0, 1), 8);
        assert!(zero.c.iter().all(|c| c.is_zero()));
    }

    #[test]
    fn wp_satisfies_its_differential_equation() {
        let l = wp_zeta_laurent(&q(7, 3), &q(-5, 2), 12);
        let wp = l.wp_series();
        let d = wp.derive_q();
        let lhs = d.mul(&d).unwrap();
        let wp3 = wp.mul(&wp).unwrap().mul(&wp).unwrap();
        let rhs = wp3
            .scale_rational(&q(4, 1))
            .sub(&wp.scale_rational(&l.g2))
            .unwrap()
            .sub(&RationalSeries::monomial((), l.g3.clone(), 0, EXACT))
            .unwrap();
        let diff = lhs.sub(&rhs).unwrap();
        assert!(diff.trunc() >= 2 * 12 - 8);
        for n in diff.ord()..diff.trunc() {
            assert!(diff.coeff(n).is_zero(), "z^{n}");
        }
        // zeta' = -P
        let z = l.zeta_series().derive_q().add(&wp).unwrap();
        for n in z.ord()..z.trunc() {
            assert!(z.coeff(n).is_zero());
        }
    }

    #[test]
    fn x_and_zeta_match_composition_for_32a1() {
        let c = load_curve("32a1").unwrap();
        let g = hecke_expand(&c, 80).unwrap();
        let qe = q_expansion(&c, &g, 7, 60, None).unwrap();
        cross_check(&qe.x_series(), &x_by_composition(&c, &g, 60).unwrap()).unwrap();
        cross_check(&qe.zeta_series().unwrap(), &zeta_by_composition(&c, &g, 60).unwrap()).unwrap();
    }

    #[test]
    fn lemniscate_period() {
        let lat = lattice_from_invariants(4.0, 0.0).unwrap();
        assert!((lat.omega1.norm() - 2.622_057_554_292_119_8).abs() < 1e-10);
        assert!(lat.s_numeric.norm() < 1e-10);
        assert!(lat.legendre_defect() < 1e-10);
    }

    #[test]
    fn rationalize_small() {
        assert_eq!(rationalize(0.25, 1000, 1e-9), Some(q(1, 4)));
        assert_eq!(rationalize(-0.0, 1000, 1e-9), Some(q(0, 1)));
        assert_eq!(rationalize(core::f64::consts::PI, 1000, 1e-9), None);
    }
}
