use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use mockalpha_core::cmforms::{
    a_ell_cm, a_ell_pointcount, hecke_expand, is_prime, load_curve, CmCalibration, Provenance,
};
use mockalpha_core::decomp::{alpha_g_pipeline, s_number_padic, AlphaReport};
use mockalpha_core::formalgroup::{
    build_formal_group, group_law_from_log, honda_defect, honda_residual, iso_f, rational_log,
};
use mockalpha_core::series::{PadicSeries, RationalSeries};
use mockalpha_core::weierstrass::{
    check_r_periodicity, periods_agm, q_expansion, standard_shifts, x_by_composition, x_series_of_q,
    zeta_by_composition, zeta_series_of_q,
};
use mockalpha_core::{BigInt, BigRational, PadicScalar};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MATRIX: [(&str, u64); 8] = [
    ("27a1", 5),
    ("27a1", 11),
    ("32a1", 7),
    ("32a1", 11),
    ("36a1", 5),
    ("36a1", 11),
    ("49a1", 5),
    ("49a1", 13),
];

fn matrix_reports() -> Vec<(AlphaReport, Duration)> {
    MATRIX
        .iter()
        .map(|&(c, p)| {
            let t0 = Instant::now();
            let r = alpha_g_pipeline(&load_curve(c).unwrap(), p, 1).unwrap();
            (r, t0.elapsed())
        })
        .collect()
}

fn criterion_1(reports: &[(AlphaReport, Duration)]) {
    for (r, dt) in reports {
        let cell = format!("{}x{}", r.curve, r.p);
        assert_eq!(r.c_g, 1, "{cell}");
        assert!(r.failures().is_empty(), "{cell}: {:?}", r.failures());
        assert_eq!(r.cg_alpha_valuation, Some(0), "{cell}");
        assert!(r.cg_alpha.precision().unwrap() >= 2, "{cell}");
        assert!(*dt < Duration::from_secs(10), "{cell} took {dt:?}");
    }
    let t0 = Instant::now();
    let deep = alpha_g_pipeline(&load_curve("32a1").unwrap(), 7, 2).unwrap();
    let dt = t0.elapsed();
    assert_eq!(deep.t_q, 16808);
    assert!(deep.failures().is_empty(), "{:?}", deep.failures());
    assert!(deep.methods_agree);
    assert!(deep.agree_mod >= 3);
    assert!(deep.cg_alpha.precision().unwrap() >= 3);
    assert!(dt < Duration::from_secs(120), "deep run took {dt:?}");
    // the shallow digits are a prefix of the deep ones
    let shallow = reports.iter().find(|(r, _)| r.curve == "32a1" && r.p == 7).unwrap();
    assert!(deep.cg_alpha.congruent(&shallow.0.cg_alpha));
}

fn criterion_2() {
    for &(c, p) in &MATRIX[..6] {
        let s = s_number_padic(&load_curve(c).unwrap(), p, 2).unwrap();
        assert!(s.lambda.is_zero(), "{c}x{p}: lambda = {}", s.lambda);
        assert!(s.lambda.precision().unwrap() >= 2, "{c}x{p}");
        assert_eq!(s.s_rational, BigRational::from_integer(0.into()));
        assert!(s.s_numeric.norm() < 1e-8);
    }
    let c = load_curve("49a1").unwrap();
    let a = s_number_padic(&c, 5, 3).unwrap();
    let b = s_number_padic(&c, 13, 2).unwrap();
    assert!(a.lambda.precision().unwrap() >= 2 && b.lambda.precision().unwrap() >= 2);
    assert_eq!(a.s_rational, b.s_rational);
    let sf = num_traits::ToPrimitive::to_f64(&a.s_rational).unwrap();
    assert!((a.s_numeric - Complex64::new(sf, 0.0)).norm() < 1e-8);
    // archimedean side: Legendre relation and R-periodicity on every curve
    for name in ["27a1", "32a1", "36a1", "49a1"] {
        let lat = periods_agm(&load_curve(name).unwrap()).unwrap();
        assert!(lat.legendre_defect() < 1e-10, "{name}");
        assert!(lat.area > 0.0);
        let shifts = standard_shifts(&lat);
        let d = check_r_periodicity(&lat, lat.s_numeric, &shifts, 100, 7);
        assert!(d < 1e-8, "{name}: defect {d}");
        let off = check_r_periodicity(&lat, lat.s_numeric + 1.0, &shifts, 100, 7);
        assert!(off > 0.1 * lat.omega1.norm(), "{name}: perturbed defect {off}");
        assert_eq!(check_r_periodicity(&lat, lat.s_numeric, &[Complex64::new(0.0, 0.0)], 100, 7), 0.0);
    }
}

fn criterion_3() {
    for &(c, p) in &MATRIX {
        let curve = load_curve(c).unwrap();
        let g = hecke_expand(&curve, 5001).unwrap();
        let eg = rational_log(&g, 5001);
        let res = honda_residual(&eg, p);
        for n in 1..5001i64 {
            let want = if n % p as i64 == 0 {
                BigRational::from_integer(0.into())
            } else {
                BigRational::new(BigInt::from(p as i64 * g.a[n as usize]), BigInt::from(n))
            };
            assert_eq!(res.coeff(n), want, "{c}x{p} q^{n}");
        }
        let egp = PadicSeries::from_rational_series(p, 24, &eg);
        assert!(honda_defect(&egp, 5001).unwrap() >= 1, "{c}x{p}");
        let fg = build_formal_group(&curve, p, 2001).unwrap();
        assert!(honda_defect(&fg.log_series().unwrap(), 2001).unwrap() >= 1, "{c}x{p}");
    }
}

fn criterion_4() {
    for &(c, p) in &MATRIX {
        let curve = load_curve(c).unwrap();
        let g = hecke_expand(&curve, 2003).unwrap();
        let qe = q_expansion(&curve, &g, p, 2000, None).unwrap();
        let fg = build_formal_group(&curve, p, 2000).unwrap();
        let iso = iso_f(&qe, &fg, &g).unwrap();
        assert_eq!(iso.log_checked, 2000);
        let f = &iso.series;
        assert!(f.trunc() >= 2000);
        for n in 0..2000 {
            let cf = f.coeff(n);
            assert!(cf.is_zero() || cf.is_integral() == Some(true), "{c}x{p} q^{n}");
        }
        assert!(f.coeff(1).congruent(&PadicScalar::one(p, 5)));
        let gl = group_law_from_log(&rational_log(&g, 12), p, 12).unwrap();
        assert!(gl.integral, "{c}x{p}");
        assert!(gl.law.is_symmetric());
    }
}

fn criterion_5(reports: &[(AlphaReport, Duration)]) {
    for (r, _) in reports {
        let cell = format!("{}x{}", r.curve, r.p);
        assert_eq!(r.cris.a2.valuation().unwrap(), 0, "{cell}");
        assert_eq!(r.e.valuation().unwrap(), 0, "{cell}");
        assert!(r.methods_agree, "{cell}: {} vs {}", r.method_a, r.method_b);
        assert!(r.agree_mod >= 2, "{cell}");
        assert!(r.e_lambda.is_zero(), "{cell}");
        assert!(r.certificates.residual_min_val >= 0, "{cell}");
        assert!(r.shadow.checked as i64 >= r.t_q as i64 - 1, "{cell}");
        assert!(r.certificates.t_residual_min_val >= 0, "{cell}");
    }
}

fn criterion_6() {
    let curve = load_curve("32a1").unwrap();
    let g = hecke_expand(&curve, 2405).unwrap();
    let qe = q_expansion(&curve, &g, 7, 2402, None).unwrap();
    let z = qe.zeta_series().unwrap();
    for n in [49, 2401] {
        let c = z.coeff(n);
        assert!(c.is_zero() || c.is_integral() == Some(true), "q^{n}: {c}");
        assert!(c.precision().unwrap() >= 1);
    }
}

fn random_series(rng: &mut ChaCha8Rng, ord: i64, len: usize, trunc: i64) -> RationalSeries {
    let c: Vec<i64> = (0..len).map(|i| if i == 0 { 1 } else { rng.gen_range(-9..=9) }).collect();
    let mut s = RationalSeries::from_integers(ord, &c, trunc);
    if rng.gen_bool(0.5) {
        s = s.scale_rational(&BigRational::new(1.into(), BigInt::from(rng.gen_range(1..6i64))));
        s = s.map(|n, c| if n == ord { BigRational::from_integer(1.into()) } else { c.clone() });
    }
    s
}

fn criterion_7() {
    // CM traces: calibrated below 400, verified against point counts below 2000.
    for name in ["27a1", "32a1", "36a1", "49a1"] {
        let curve = load_curve(name).unwrap();
        let cal = CmCalibration::calibrate(&curve, 400).unwrap();
        let mut from_cm = 0;
        for l in 2..2000u64 {
            if !is_prime(l) || curve.conductor.is_multiple_of(l) {
                continue;
            }
            let (a, prov) = a_ell_cm(&curve, &cal, l).unwrap();
            assert_eq!(a, a_ell_pointcount(&curve, l).unwrap(), "{name} l={l}");
            if l >= 400 && prov == Provenance::Cornacchia {
                from_cm += 1;
            }
            assert!(l < 400 || prov == Provenance::Cornacchia, "{name} l={l} fell back to counting");
        }
        assert!(from_cm > 100);
    }
    // q-expansions against exact composition
    for (name, p) in [("32a1", 7), ("27a1", 5), ("36a1", 11), ("49a1", 13)] {
        let curve = load_curve(name).unwrap();
        let g = hecke_expand(&curve, 210).unwrap();
        let x = x_series_of_q(&curve, p, 200).unwrap();
        let xr = x_by_composition(&curve, &g, 200).unwrap();
        let z = zeta_series_of_q(&curve, p, 200).unwrap();
        let zr = zeta_by_composition(&curve, &g, 200).unwrap();
        for n in -2..200 {
            let want = PadicScalar::from_rational(p, &xr.coeff(n), 40);
            assert!(x.coeff(n).congruent(&want), "{name} x q^{n}");
            assert!(x.coeff(n).precision().unwrap() >= 5);
        }
        for n in -1..200 {
            let want = PadicScalar::from_rational(p, &zr.coeff(n), 40);
            assert!(z.coeff(n).congruent(&want), "{name} Z q^{n}");
        }
    }
    // series identities on seeded random inputs
    let mut rng = ChaCha8Rng::seed_from_u64(20261018);
    let q = RationalSeries::from_integers(1, &[1], 14);
    for case in 0..120 {
        let f = random_series(&mut rng, 1, 14, 14);
        let g = random_series(&mut rng, 1, 14, 14);
        let h = random_series(&mut rng, 1, 14, 14);
        let r = f.reverse().unwrap();
        assert_eq!(f.compose(&r).unwrap().sub(&q).unwrap().valuation(), None, "case {case}");
        assert_eq!(r.compose(&f).unwrap().sub(&q).unwrap().valuation(), None, "case {case}");
        let left = f.compose(&g).unwrap().compose(&h).unwrap();
        let right = f.compose(&g.compose(&h).unwrap()).unwrap();
        assert_eq!(left.sub(&right).unwrap().valuation(), None, "case {case}");
        let back = f.derive_d().antiderive_d().unwrap();
        assert_eq!(back.sub(&f).unwrap().valuation(), None, "case {case}");
    }
}

fn criterion_8(reports: &[(AlphaReport, Duration)]) {
    for (r, _) in reports {
        let cell = format!("{}x{}", r.curve, r.p);
        assert!(r.uv.v_is_minus_u(), "{cell}");
        assert!(r.uv.lambda.is_rational() && r.uv.lambda.a.is_zero(), "{cell}");
        assert!(r.uv.mu.is_rational(), "{cell}");
        assert!(r.uv.mu.a.congruent(&r.shadow.mu), "{cell}");
        assert!(r.uv.mu.a.congruent(&r.method_b), "{cell}");
        assert!(r.uv.mu.a.precision().unwrap() >= 2, "{cell}");
    }
}

fn run(n: u32, name: &str, f: impl FnOnce()) -> bool {
    let t0 = Instant::now();
    let ok = catch_unwind(AssertUnwindSafe(f)).is_ok();
    println!(
        "criterion {n}: {} ({name}, {:.1}s)",
        if ok { "PASS" } else { "FAIL" },
        t0.elapsed().as_secs_f64()
    );
    ok
}

fn main() {
    // A pipeline panic fails the criteria that use the matrix, not the whole run.
    let reports = catch_unwind(matrix_reports).ok();
    let matrix = || reports.as_deref().expect("matrix pipeline runs on every cell");
    let results = [
        run(1, "Cg*alpha_g is a p-adic unit on every matrix cell and the deep run", || {
            criterion_1(matrix())
        }),
        run(2, "lambda of Z equals S(Lambda)", criterion_2),
        run(3, "Honda type X^2+p for E_g and the formal logarithm", criterion_3),
        run(4, "f(q) in Z_p[[q]], log(f) = E_g, integral group law", criterion_4),
        run(5, "crystalline decomposition and mu = -e*A2", || criterion_5(matrix())),
        run(6, "Z is 7-integral at q^49 and q^2401 for 32a1", criterion_6),
        run(7, "oracle equivalences", criterion_7),
        run(8, "uv structure v = -u", || criterion_8(matrix())),
    ];
    let failed: Vec<usize> = (1..=8).filter(|&i| !results[i - 1]).collect();
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
    println!("acceptance: all 8 criteria pass");
}
