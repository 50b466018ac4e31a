use crate::config::{Command, RunConfig};
use crate::curves::CurveTable;
use crate::report::{Output, PadicJson};
use crate::seriesfile::{self, format_padic, format_rational};
use mockalpha_core::cmforms::{
    a_ell_pointcount, check_context, hecke_expand, is_prime, structural_checks, CmError,
    CurveData, CALIBRATION_BOUND,
};
use mockalpha_core::decomp::{
    alpha_g_pipeline, s_number_padic, shadow_decompose, shadow_estimate, AlphaReport, DecompError,
};
use mockalpha_core::formalgroup::{
    build_formal_group, cris_decompose_t, group_law_from_log, honda_defect, iso_f, rational_log,
    FormalGroupError,
};
use mockalpha_core::padic::rational_reconstruct;
use mockalpha_core::series::PadicSeries;
use mockalpha_core::weierstrass::{check_r_periodicity, periods_agm, q_expansion, standard_shifts, WeierstrassError};
use num_complex::Complex64;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

/// Why a command stopped; each kind has a stable exit code.
#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(#[from] anyhow::Error),
    #[error("inadmissible: {0}")]
    Inadmissible(String),
    #[error("certificate failure: {0}")]
    Certificate(String),
    #[error("precision exhausted: {0}")]
    Precision(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Input(_) => 1,
            Failure::Inadmissible(_) => 2,
            Failure::Certificate(_) => 3,
            Failure::Precision(_) => 4,
            Failure::Usage(_) => 64,
        }
    }
}

fn from_cm(e: CmError) -> Failure {
    match e {
        CmError::NotPrime(_) | CmError::BadPrime(_) => Failure::Inadmissible(e.to_string()),
        CmError::TooLarge(_) => Failure::Precision(e.to_string()),
        _ => Failure::Certificate(e.to_string()),
    }
}

fn from_weierstrass(e: WeierstrassError) -> Failure {
    match e {
        WeierstrassError::NotIntegral => Failure::Inadmissible(e.to_string()),
        WeierstrassError::Width { .. } | WeierstrassError::ShortCoefficients(_) => Failure::Precision(e.to_string()),
        _ => Failure::Certificate(e.to_string()),
    }
}

fn from_formal(e: FormalGroupError) -> Failure {
    match e {
        FormalGroupError::Inadmissible(_) | FormalGroupError::NotIntegralModel | FormalGroupError::NotHeightTwo(_) => {
            Failure::Inadmissible(e.to_string())
        }
        FormalGroupError::InsufficientPrecision(_) | FormalGroupError::Padic(_) => Failure::Precision(e.to_string()),
        FormalGroupError::Weierstrass(w) => from_weierstrass(w),
        _ => Failure::Certificate(e.to_string()),
    }
}

fn from_decomp(e: DecompError) -> Failure {
    if e.is_precision() {
        return Failure::Precision(e.to_string());
    }
    match e {
        DecompError::Inadmissible(r) => Failure::Inadmissible(r.to_string()),
        DecompError::Cm(c) => from_cm(c),
        DecompError::Weierstrass(w) => from_weierstrass(w),
        DecompError::FormalGroup(f) => from_formal(f),
        DecompError::Padic(_) => Failure::Precision(e.to_string()),
        _ => Failure::Certificate(e.to_string()),
    }
}

/// A rendered result plus the names of checks that failed (exit 3 when nonempty).
pub struct Outcome {
    pub output: Output,
    pub failures: Vec<String>,
}

impl Outcome {
    fn clean(output: Output) -> Self {
        Outcome {
            output,
            failures: Vec::new(),
        }
    }
}

pub fn dispatch(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let table = match &cfg.curve_json {
        Some(path) => CurveTable::with_overrides(path)?,
        None => CurveTable::builtin(),
    };
    match cfg.command {
        Command::Alpha => cmd_alpha(cfg, &table),
        Command::Matrix => cmd_matrix(cfg, &table),
        Command::Coeffs => cmd_coeffs(cfg, &table),
        Command::Snumber => cmd_snumber(cfg, &table),
        Command::Checks => cmd_checks(cfg, &table),
        Command::Decompose => cmd_decompose(cfg, &table),
    }
}

fn need<T: Clone>(v: &Option<T>, flag: &str) -> Result<T, Failure> {
    v.clone().ok_or_else(|| Failure::Usage(format!("{flag} is required")))
}

fn curve<'a>(cfg: &RunConfig, table: &'a CurveTable) -> Result<&'a CurveData, Failure> {
    Ok(table.get(&need(&cfg.curve, "--curve")?)?)
}

fn admissible(c: &CurveData, p: u64) -> Result<(), Failure> {
    match check_context(c, p).reason() {
        Some(r) => Err(Failure::Inadmissible(r.to_string())),
        None => Ok(()),
    }
}

fn rational_string(r: &Option<mockalpha_core::BigRational>) -> Option<String> {
    r.as_ref().map(format_rational)
}

#[derive(Serialize)]
struct HondaDefects {
    #[serde(rename = "E_g")]
    e_g: i64,
    log: i64,
}

#[derive(Serialize)]
struct AlphaCertificates {
    residual_min_val: i64,
    honda_defects: HondaDefects,
    f_integral: bool,
}

#[derive(Serialize)]
struct AlphaJson {
    curve: String,
    p: u64,
    #[serde(rename = "K")]
    k: u32,
    /// Depth actually decomposed; the q-truncation may reach further prime powers.
    #[serde(rename = "K_used")]
    k_used: u32,
    #[serde(rename = "T")]
    t: usize,
    alpha_g: PadicJson,
    #[serde(rename = "Cg_alpha_valuation")]
    cg_alpha_valuation: Option<i64>,
    lambda: PadicJson,
    #[serde(rename = "S_rational")]
    s_rational: Option<String>,
    /// Rationalized archimedean S, present when it is congruent to lambda.
    #[serde(rename = "S_archimedean")]
    s_archimedean: Option<String>,
    #[serde(rename = "methodA")]
    method_a: PadicJson,
    #[serde(rename = "methodB")]
    method_b: PadicJson,
    agree_mod: i64,
    certificates: AlphaCertificates,
    failures: Vec<String>,
}

fn certified_s(r: &AlphaReport) -> Option<String> {
    r.s_candidate
        .as_ref()
        .filter(|_| r.lambda_matches_s)
        .map(format_rational)
}

fn alpha_json(r: &AlphaReport, depth: u32) -> AlphaJson {
    AlphaJson {
        curve: r.curve.clone(),
        p: r.p,
        k: depth,
        k_used: r.k,
        t: r.t_q,
        alpha_g: (&r.alpha_g).into(),
        cg_alpha_valuation: r.cg_alpha_valuation,
        lambda: (&r.shadow.lambda).into(),
        s_rational: rational_string(&r.s_rational),
        s_archimedean: certified_s(r),
        method_a: (&r.method_a).into(),
        method_b: (&r.method_b).into(),
        agree_mod: r.agree_mod,
        certificates: AlphaCertificates {
            residual_min_val: r.certificates.residual_min_val,
            honda_defects: HondaDefects {
                e_g: r.certificates.honda_eg,
                log: r.certificates.honda_log,
            },
            f_integral: r.certificates.f_integral,
        },
        failures: r.failures().into_iter().map(String::from).collect(),
    }
}

fn cmd_alpha(cfg: &RunConfig, table: &CurveTable) -> Result<Outcome, Failure> {
    let c = curve(cfg, table)?;
    let p = need(&cfg.p, "--p")?;
    let depth = cfg.depth.unwrap_or(2);
    let r = alpha_g_pipeline(c, p, depth).map_err(from_decomp)?;
    let json = alpha_json(&r, depth);
    let failures = json.failures.clone();
    Ok(Outcome {
        output: Output::record(&json),
        failures,
    })
}

/// The acceptance matrix, run at depth 1.
pub const MATRIX: [(&str, u64); 8] = [
    ("27a1", 5),
    ("27a1", 11),
    ("32a1", 7),
    ("32a1", 11),
    ("36a1", 5),
    ("36a1", 11),
    ("49a1", 5),
    ("49a1", 13),
];

/// The deep run, at `--depth` (default 2).
pub const DEEP_RUN: (&str, u64) = ("32a1", 7);

#[derive(Serialize)]
#[allow(non_snake_case)]
struct MatrixRow {
    curve: String,
    p: u64,
    K: u32,
    vp_Cg_alpha: Option<i64>,
    lambda: String,
    S: Option<String>,
    hondaE: i64,
    hondaLog: i64,
    fint: bool,
    ab_agree: bool,
}

fn cmd_matrix(cfg: &RunConfig, table: &CurveTable) -> Result<Outcome, Failure> {
    let deep = cfg.depth.unwrap_or(2);
    let jobs: Vec<(&CurveData, u64, u32)> = MATRIX
        .iter()
        .map(|&(c, p)| (c, p, 1))
        .chain(std::iter::once((DEEP_RUN.0, DEEP_RUN.1, deep)))
        .map(|(c, p, k)| Ok((table.get(c)?, p, k)))
        .collect::<anyhow::Result<_>>()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(anyhow::Error::from)?;
    let results: Vec<_> = pool.install(|| {
        jobs.par_iter()
            .map(|&(c, p, k)| (c, p, k, alpha_g_pipeline(c, p, k)))
            .collect()
    });
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut first_error = None;
    for (c, p, k, r) in results {
        match r {
            Ok(r) => {
                failures.extend(r.failures().iter().map(|f| format!("{}x{p}: {f}", c.name)));
                rows.push(MatrixRow {
                    curve: r.curve.clone(),
                    p,
                    K: k,
                    vp_Cg_alpha: r.cg_alpha_valuation,
                    lambda: format_padic(&r.shadow.lambda),
                    S: rational_string(&r.s_rational).or_else(|| certified_s(&r)),
                    hondaE: r.certificates.honda_eg,
                    hondaLog: r.certificates.honda_log,
                    fint: r.certificates.f_integral,
                    ab_agree: r.methods_agree,
                });
            }
            Err(e) => {
                let f = from_decomp(e);
                failures.push(format!("{}x{p}: {f}", c.name));
                first_error.get_or_insert(f);
            }
        }
    }
    if let Some(e) = first_error {
        if rows.is_empty() {
            return Err(e);
        }
    }
    Ok(Outcome {
        output: Output::rows(&rows),
        failures,
    })
}

#[derive(Serialize)]
struct CoeffRow {
    n: usize,
    a_n: i64,
}

#[derive(Serialize)]
struct CoeffsJson {
    curve: String,
    #[serde(rename = "T")]
    t: usize,
    a: Vec<i64>,
}

fn cmd_coeffs(cfg: &RunConfig, table: &CurveTable) -> Result<Outcome, Failure> {
    let c = curve(cfg, table)?;
    let t = cfg.trunc.unwrap_or(100);
    let g = hecke_expand(c, t).map_err(from_cm)?;
    // Every good prime up to the calibration bound is re-derived by point counting.
    for l in (2..=t.min(CALIBRATION_BOUND as usize) as u64).filter(|&l| is_prime(l)) {
        if c.conductor % l == 0 {
            continue;
        }
        let want = a_ell_pointcount(c, l).map_err(from_cm)?;
        if g.get(l as usize) != want {
            return Err(Failure::Certificate(format!("a({l}) disagrees with the point count {want}")));
        }
    }
    if !structural_checks(c, &g) {
        return Err(Failure::Certificate("inert-prime vanishing or the Hasse bound fails".into()));
    }
    let rows: Vec<CoeffRow> = g.a.iter().enumerate().map(|(n, &a_n)| CoeffRow { n, a_n }).collect();
    let mut output = Output::rows(&rows);
    output.json = serde_json::to_value(CoeffsJson {
        curve: c.name.clone(),
        t,
        a: g.a.clone(),
    })
    .expect("reports serialize");
    output.series = Some(seriesfile::write_rational(&g.series(), cfg.p.unwrap_or(0)));
    Ok(Outcome::clean(output))
}

#[derive(Serialize)]
struct SnumberJson {
    curve: String,
    p: u64,
    #[serde(rename = "K")]
    k: u32,
    #[serde(rename = "S_rational")]
    s_rational: String,
    #[serde(rename = "S_numeric_re")]
    s_numeric_re: f64,
    #[serde(rename = "S_numeric_im")]
    s_numeric_im: f64,
    defect: f64,
}

/// Largest `p^(2k)` tried when searching for a reconstructing depth.
const SNUMBER_MAX_T: u64 = 40_000;
const PERIODICITY_SAMPLES: usize = 64;

fn cmd_snumber(cfg: &RunConfig, table: &CurveTable) -> Result<Outcome, Failure> {
    let c = curve(cfg, table)?;
    let p = need(&cfg.p, "--p")?;
    admissible(c, p)?;
    let depths: Vec<u32> = match cfg.depth {
        Some(k) => vec![k],
        None => (1..).take_while(|&k| p.pow(2 * k) <= SNUMBER_MAX_T).collect(),
    };
    let mut last = Failure::Precision(format!("p^2 exceeds {SNUMBER_MAX_T}"));
    for k in depths {
        match s_number_padic(c, p, k) {
            Ok(s) => {
                let lat = periods_agm(c).map_err(from_weierstrass)?;
                let sf = s.s_rational.to_f64().unwrap_or(f64::NAN);
                let defect = check_r_periodicity(
                    &lat,
                    Complex64::new(sf, 0.0),
                    &standard_shifts(&lat),
                    PERIODICITY_SAMPLES,
                    cfg.seed,
                );
                let json = SnumberJson {
                    curve: c.name.clone(),
                    p,
                    k,
                    s_rational: format_rational(&s.s_rational),
                    s_numeric_re: s.s_numeric.re,
                    s_numeric_im: s.s_numeric.im,
                    defect,
                };
                return Ok(Outcome::clean(Output::record(&json)));
            }
            // A short lambda can reconstruct to the wrong small rational; go deeper.
            Err(e @ DecompError::SMismatch(_)) if cfg.depth.is_none() => last = Failure::Precision(e.to_string()),
            Err(e) if cfg.depth.is_none() && e.is_precision() => last = from_decomp(e),
            Err(e) => return Err(from_decomp(e)),
        }
    }
    Err(last)
}

#[derive(Serialize)]
struct CheckRow {
    check: &'static str,
    curve: String,
    p: u64,
    verdict: &'static str,
    precision: Option<i64>,
}

const GROUP_LAW_DEGREE: usize = 12;

fn cmd_checks(cfg: &RunConfig, table: &CurveTable) -> Result<Outcome, Failure> {
    let c = curve(cfg, table)?;
    let p = need(&cfg.p, "--p")?;
    admissible(c, p)?;
    let k = cfg.depth.unwrap_or(1);
    let t = cfg.trunc.unwrap_or(2000);
    let t_t = (t + 1).max(p.pow(2 * k + 2) as usize + 2);
    let g = hecke_expand(c, t + 3).map_err(from_cm)?;
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut row = |check: &'static str, result: Result<(bool, Option<i64>), Failure>| {
        let (ok, precision) = match result {
            Ok(v) => v,
            Err(e) => {
                failures.push(format!("{check}: {e}"));
                (false, None)
            }
        };
        if !ok && !failures.iter().any(|f| f.starts_with(check)) {
            failures.push(check.to_string());
        }
        rows.push(CheckRow {
            check,
            curve: c.name.clone(),
            p,
            verdict: if ok { "pass" } else { "fail" },
            precision,
        });
    };

    let eg = PadicSeries::from_rational_series(p, 24, &rational_log(&g, t + 1));
    row(
        "honda_E_g",
        honda_defect(&eg, t as i64 + 1)
            .map(|d| (d >= 1, Some(d)))
            .map_err(from_formal),
    );
    let fg = build_formal_group(c, p, t_t).map_err(from_formal)?;
    let log = fg.log_series().map_err(from_formal)?;
    row(
        "honda_log",
        honda_defect(&log, t as i64 + 1)
            .map(|d| (d >= 1, Some(d)))
            .map_err(from_formal),
    );
    let iso = q_expansion(c, &g, p, t, None)
        .map_err(from_weierstrass)
        .and_then(|qe| iso_f(&qe, &fg, &g).map_err(from_formal));
    row(
        "iso_f_integrality",
        iso.map(|f| {
            let integral = (0..f.series.trunc()).all(|n| {
                let x = f.series.coeff(n);
                x.is_zero() || x.is_integral() == Some(true)
            });
            (integral, Some(f.precision))
        }),
    );
    row(
        "group_law_integrality",
        group_law_from_log(&rational_log(&g, GROUP_LAW_DEGREE), p, GROUP_LAW_DEGREE)
            .map(|gl| (gl.integral, None))
            .map_err(from_formal),
    );
    let cris = fg
        .eta0_primitive()
        .and_then(|eta| cris_decompose_t(&eta, &log, k))
        .map_err(from_formal);
    row(
        "cris_decompose_t",
        cris.map(|d| {
            let unit = d.a2.valuation().ok() == Some(0);
            (unit && d.residual_min_val >= 0, d.a2.precision())
        }),
    );
    Ok(Outcome {
        output: Output::rows(&rows),
        failures,
    })
}

#[derive(Serialize)]
struct DecomposeJson {
    p: u64,
    #[serde(rename = "K")]
    k: u32,
    #[serde(rename = "T")]
    t: i64,
    lambda: PadicJson,
    mu: PadicJson,
    lambda_rational: Option<String>,
    mu_rational: Option<String>,
    /// Basis curve for the residual check, when one was given.
    curve: Option<String>,
    residual_min_val: Option<i64>,
}

fn cmd_decompose(cfg: &RunConfig, table: &CurveTable) -> Result<Outcome, Failure> {
    let path = need(&cfg.file, "--file")?;
    let p = need(&cfg.p, "--p")?;
    let text = std::fs::read_to_string(&path)
        .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))?;
    let file = seriesfile::parse(&text).map_err(anyhow::Error::from)?;
    file.require_prime(p).map_err(anyhow::Error::from)?;
    let t = file.trunc();
    let k = match cfg.depth {
        Some(k) => k,
        None => (1..)
            .take_while(|&k| (p as i64).checked_pow(2 * k).is_some_and(|n| n < t))
            .last()
            .ok_or_else(|| Failure::Precision(format!("truncation {t} does not reach q^(p^2)")))?,
    };
    let h = file.to_padic(p, 2 * k as i64 + 2);
    let basis = cfg.curve.as_ref().map(|name| table.get(name)).transpose()?;
    let (lambda, mu, residual) = match basis {
        Some(c) => {
            let g = hecke_expand(c, t.max(1) as usize).map_err(from_cm)?;
            let d = shadow_decompose(&h, &g, k).map_err(from_decomp)?;
            (d.lambda, d.mu, Some(d.residual_min_val))
        }
        None => {
            let e = shadow_estimate(&h, k).map_err(from_decomp)?;
            (e.lambda, e.mu, None)
        }
    };
    let reconstruct = |x| rational_reconstruct(x).ok().as_ref().map(format_rational);
    let json = DecomposeJson {
        p,
        k,
        t,
        lambda: (&lambda).into(),
        mu: (&mu).into(),
        lambda_rational: reconstruct(&lambda),
        mu_rational: reconstruct(&mu),
        curve: basis.map(|c| c.name.clone()),
        residual_min_val: residual,
    };
    let failures = match residual {
        Some(v) if v < 0 => vec![format!("residual has valuation {v}")],
        _ => Vec::new(),
    };
    Ok(Outcome {
        output: Output::record(&json),
        failures,
    })
}
