//! Plain-text series files: a header `# ring=<rational|padic> p=<p> ord=<o> trunc=<T>`,
//! then one `n<TAB>value` line for every exponent `o <= n < T`.
//!
//! Rational values are `num/den` or `num`; p-adic values are `u*p^v%p^A`,
//! `0%p^A` for a zero known modulo `p^A`, or `0` for an exact zero.

use mockalpha_core::series::{PadicCtx, PadicSeries, RationalSeries};
use mockalpha_core::{BigInt, BigRational, BigUint, PadicScalar};
use num_traits::Zero;
use std::fmt::Write as _;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("series file is for p = {found}, but p = {wanted} was requested")]
    PrimeMismatch { found: u64, wanted: u64 },
}

fn syntax(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Syntax { line, msg: msg.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ring {
    Rational,
    Padic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Header {
    pub ring: Ring,
    /// `0` for a rational series not tied to a prime.
    pub p: u64,
    pub ord: i64,
    pub trunc: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SeriesFile {
    Rational { p: u64, series: RationalSeries },
    Padic(PadicSeries),
}

impl SeriesFile {
    pub fn prime(&self) -> u64 {
        match self {
            SeriesFile::Rational { p, .. } => *p,
            SeriesFile::Padic(s) => s.prime(),
        }
    }

    pub fn trunc(&self) -> i64 {
        match self {
            SeriesFile::Rational { series, .. } => series.trunc(),
            SeriesFile::Padic(s) => s.trunc(),
        }
    }

    /// Rejects files written for another prime.
    pub fn require_prime(&self, p: u64) -> Result<(), FormatError> {
        match self.prime() {
            found if found == p => Ok(()),
            found => Err(FormatError::PrimeMismatch { found, wanted: p }),
        }
    }

    /// The series over `Q_p`; rational coefficients are embedded to absolute precision `prec`.
    pub fn to_padic(&self, p: u64, prec: i64) -> PadicSeries {
        match self {
            SeriesFile::Rational { series, .. } => PadicSeries::from_rational_series(p, prec, series),
            SeriesFile::Padic(s) => s.clone(),
        }
    }
}

/// `u*p^v%p^A`, `0%p^A` or `0`.
pub fn format_padic(x: &PadicScalar) -> String {
    let p = x.prime();
    match (x.unit(), x.precision()) {
        (Some(u), Some(a)) => format!("{u}*{p}^{}%{p}^{a}", x.valuation().unwrap_or(a)),
        (None, Some(a)) => format!("0%{p}^{a}"),
        _ => "0".to_string(),
    }
}

pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn header_line(ring: Ring, p: u64, ord: i64, trunc: i64) -> String {
    let ring = match ring {
        Ring::Rational => "rational",
        Ring::Padic => "padic",
    };
    format!("# ring={ring} p={p} ord={ord} trunc={trunc}\n")
}

pub fn write_rational(s: &RationalSeries, p: u64) -> String {
    let mut out = header_line(Ring::Rational, p, s.ord(), s.trunc());
    for n in s.ord()..s.trunc() {
        let _ = writeln!(out, "{n}\t{}", format_rational(&s.coeff(n)));
    }
    out
}

pub fn write_padic(s: &PadicSeries) -> String {
    let mut out = header_line(Ring::Padic, s.prime(), s.ord(), s.trunc());
    for n in s.ord()..s.trunc() {
        let _ = writeln!(out, "{n}\t{}", format_padic(&s.coeff(n)));
    }
    out
}

fn parse_header(line: &str) -> Result<Header, FormatError> {
    let body = line
        .strip_prefix('#')
        .ok_or_else(|| syntax(1, "missing '# ring=... p=... ord=... trunc=...' header"))?;
    let (mut ring, mut p, mut ord, mut trunc) = (None, None, None, None);
    for field in body.split_whitespace() {
        let (k, v) = field
            .split_once('=')
            .ok_or_else(|| syntax(1, format!("malformed header field '{field}'")))?;
        let bad = |_| syntax(1, format!("bad value for '{k}'"));
        match k {
            "ring" => {
                ring = Some(match v {
                    "rational" => Ring::Rational,
                    "padic" => Ring::Padic,
                    _ => return Err(syntax(1, format!("unknown ring '{v}'"))),
                })
            }
            "p" => p = Some(v.parse::<u64>().map_err(bad)?),
            "ord" => ord = Some(v.parse::<i64>().map_err(bad)?),
            "trunc" => trunc = Some(v.parse::<i64>().map_err(bad)?),
            _ => return Err(syntax(1, format!("unknown header field '{k}'"))),
        }
    }
    let missing = |what: &str| syntax(1, format!("header lacks '{what}'"));
    let h = Header {
        ring: ring.ok_or_else(|| missing("ring"))?,
        p: p.ok_or_else(|| missing("p"))?,
        ord: ord.ok_or_else(|| missing("ord"))?,
        trunc: trunc.ok_or_else(|| missing("trunc"))?,
    };
    if h.trunc < h.ord {
        return Err(syntax(1, "trunc is below ord"));
    }
    if h.ring == Ring::Padic && h.p < 2 {
        return Err(syntax(1, "a p-adic series needs a prime"));
    }
    Ok(h)
}

fn parse_rational(s: &str, line: usize) -> Result<BigRational, FormatError> {
    let int = |t: &str| t.parse::<BigInt>().map_err(|_| syntax(line, format!("bad integer '{t}'")));
    match s.split_once('/') {
        Some((n, d)) => {
            let d = int(d)?;
            if d.is_zero() {
                return Err(syntax(line, "zero denominator"));
            }
            Ok(BigRational::new(int(n)?, d))
        }
        None => Ok(BigRational::from_integer(int(s)?)),
    }
}

/// Parses `p^e` and checks the base.
fn parse_power(s: &str, p: u64, line: usize) -> Result<i64, FormatError> {
    let (base, e) = s
        .split_once('^')
        .ok_or_else(|| syntax(line, format!("expected p^e, found '{s}'")))?;
    if base.parse::<u64>().ok() != Some(p) {
        return Err(syntax(line, format!("base '{base}' differs from p = {p}")));
    }
    e.parse::<i64>().map_err(|_| syntax(line, format!("bad exponent '{e}'")))
}

fn parse_padic(s: &str, p: u64, line: usize) -> Result<PadicScalar, FormatError> {
    if s == "0" {
        return Ok(PadicScalar::exact_zero(p));
    }
    let (head, modulus) = s
        .split_once('%')
        .ok_or_else(|| syntax(line, format!("expected u*p^v%p^A, found '{s}'")))?;
    let a = parse_power(modulus, p, line)?;
    if head == "0" {
        return Ok(PadicScalar::zero(p, a));
    }
    let (u, pv) = head
        .split_once('*')
        .ok_or_else(|| syntax(line, format!("expected u*p^v, found '{head}'")))?;
    let u = u
        .parse::<BigUint>()
        .map_err(|_| syntax(line, format!("bad unit '{u}'")))?;
    let v = parse_power(pv, p, line)?;
    PadicScalar::from_parts(p, v, u, a).map_err(|e| syntax(line, e.to_string()))
}

/// Reads a series file; every exponent in `[ord, trunc)` must appear once, in order.
pub fn parse(text: &str) -> Result<SeriesFile, FormatError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end()));
    let (_, first) = lines.next().ok_or_else(|| syntax(1, "empty file"))?;
    let h = parse_header(first)?;
    let mut expect = h.ord;
    let mut rational = Vec::new();
    let mut padic = Vec::new();
    for (no, l) in lines.filter(|(_, l)| !l.is_empty()) {
        let (n, value) = l
            .split_once('\t')
            .ok_or_else(|| syntax(no, "expected 'n<TAB>value'"))?;
        let n = n
            .trim()
            .parse::<i64>()
            .map_err(|_| syntax(no, format!("bad exponent '{n}'")))?;
        if n != expect || n >= h.trunc {
            return Err(syntax(no, format!("expected exponent {expect}, found {n}")));
        }
        expect += 1;
        let value = value.trim();
        match h.ring {
            Ring::Rational => rational.push(parse_rational(value, no)?),
            Ring::Padic => padic.push(parse_padic(value, h.p, no)?),
        }
    }
    if expect != h.trunc {
        return Err(syntax(
            text.lines().count(),
            format!("missing exponents {expect}..{}", h.trunc),
        ));
    }
    Ok(match h.ring {
        Ring::Rational => SeriesFile::Rational {
            p: h.p,
            series: RationalSeries::new((), h.ord, rational, h.trunc),
        },
        Ring::Padic => {
            let prec = padic.iter().filter_map(|c| c.precision()).min().unwrap_or(0);
            SeriesFile::Padic(PadicSeries::new(PadicCtx { p: h.p, prec }, h.ord, padic, h.trunc))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_round_trip() {
        let c = vec![
            BigRational::new(1.into(), 1.into()),
            BigRational::zero(),
            BigRational::new((-3).into(), 4.into()),
        ];
        let s = RationalSeries::new((), -1, c, 2);
        let text = write_rational(&s, 7);
        assert!(text.starts_with("# ring=rational p=7 ord=-1 trunc=2\n"));
        assert!(text.contains("1\t-3/4\n"));
        match parse(&text).unwrap() {
            SeriesFile::Rational { p, series } => {
                assert_eq!(p, 7);
                assert_eq!(series, s);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn padic_round_trip() {
        let c = vec![
            PadicScalar::from_i64(5, 3, 4),
            PadicScalar::zero(5, 2),
            PadicScalar::exact_zero(5),
            PadicScalar::from_rational(5, &BigRational::new(2.into(), 25.into()), 3),
        ];
        let s = PadicSeries::new(PadicCtx { p: 5, prec: 2 }, 0, c.clone(), 4);
        let text = write_padic(&s);
        assert!(text.contains("0\t3*5^0%5^4\n1\t0%5^2\n2\t0\n"));
        let SeriesFile::Padic(back) = parse(&text).unwrap() else {
            panic!("ring changed")
        };
        for (n, want) in c.iter().enumerate() {
            assert_eq!(&back.coeff(n as i64), want);
        }
    }

    #[test]
    fn rejects_malformed_files() {
        assert!(parse("").is_err());
        assert!(parse("ring=rational p=7 ord=0 trunc=1\n0\t1\n").is_err());
        assert!(parse("# ring=rational p=7 ord=0 trunc=2\n0\t1\n").is_err());
        assert!(parse("# ring=rational p=7 ord=0 trunc=2\n1\t1\n0\t1\n").is_err());
        assert!(parse("# ring=rational p=7 ord=0 trunc=1\n0\t1/0\n").is_err());
        assert!(parse("# ring=padic p=7 ord=0 trunc=1\n0\t3*5^0%5^2\n").is_err());
        assert!(parse("# ring=padic p=7 ord=0 trunc=1\n0\t7*7^0%7^2\n").is_err());
        assert!(parse("# ring=quaternion p=7 ord=0 trunc=1\n0\t1\n").is_err());
    }

    #[test]
    fn prime_is_checked() {
        let f = parse("# ring=rational p=7 ord=0 trunc=1\n0\t1\n").unwrap();
        assert!(f.require_prime(7).is_ok());
        assert!(matches!(
            f.require_prime(5),
            Err(FormatError::PrimeMismatch { found: 7, wanted: 5 })
        ));
    }
}
