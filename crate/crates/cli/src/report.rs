use crate::config::Format;
use mockalpha_core::PadicScalar;
use serde::Serialize;
use serde_json::Value;

/// A p-adic scalar as decimal strings: `x = u * p^v (mod p^A)`.
///
/// Exact zero is `{"u": "0", "v": "inf", "A": "inf"}`; a zero known modulo
/// `p^A` has `u = "0"` and `v = A`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PadicJson {
    pub u: String,
    pub v: String,
    #[serde(rename = "A")]
    pub a: String,
}

impl From<&PadicScalar> for PadicJson {
    fn from(x: &PadicScalar) -> Self {
        match (x.unit(), x.precision()) {
            (Some(u), Some(a)) => PadicJson {
                u: u.to_string(),
                v: x.valuation().unwrap_or(a).to_string(),
                a: a.to_string(),
            },
            (None, Some(a)) => PadicJson {
                u: "0".into(),
                v: a.to_string(),
                a: a.to_string(),
            },
            _ => PadicJson {
                u: "0".into(),
                v: "inf".into(),
                a: "inf".into(),
            },
        }
    }
}

/// A command's result in every supported rendering.
#[derive(Debug, Clone)]
pub struct Output {
    pub json: Value,
    /// Header and rows.
    pub table: Vec<Vec<String>>,
    pub series: Option<String>,
}

impl Output {
    /// One JSON object, tabulated as a single CSV row.
    pub fn record<T: Serialize>(value: &T) -> Self {
        let json = serde_json::to_value(value).expect("reports serialize");
        let table = tabulate(std::slice::from_ref(&json));
        Output {
            json,
            table,
            series: None,
        }
    }

    /// A list of flat records.
    pub fn rows<T: Serialize>(values: &[T]) -> Self {
        let rows: Vec<Value> = values
            .iter()
            .map(|v| serde_json::to_value(v).expect("reports serialize"))
            .collect();
        let table = tabulate(&rows);
        Output {
            json: Value::Array(rows),
            table,
            series: None,
        }
    }

    pub fn render(&self, format: Format) -> anyhow::Result<String> {
        Ok(match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json)?;
                s.push('\n');
                s
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                for row in &self.table {
                    w.write_record(row)?;
                }
                String::from_utf8(w.into_inner()?)?
            }
            Format::Text => render_text(&self.table),
            Format::Series => self
                .series
                .clone()
                .ok_or_else(|| anyhow::anyhow!("no series output for this command"))?,
        })
    }
}

/// Flattens nested objects into dotted column names.
fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                flatten(&key(k), x, out);
            }
        }
        _ => out.push((prefix.to_string(), cell(v))),
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Array(xs) => xs.iter().map(cell).collect::<Vec<_>>().join(";"),
        other => other.to_string(),
    }
}

fn tabulate(rows: &[Value]) -> Vec<Vec<String>> {
    let mut table = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        let mut flat = Vec::new();
        flatten("", r, &mut flat);
        if i == 0 {
            table.push(flat.iter().map(|(k, _)| k.clone()).collect());
        }
        table.push(flat.into_iter().map(|(_, v)| v).collect());
    }
    table
}

fn render_text(table: &[Vec<String>]) -> String {
    let Some((head, rows)) = table.split_first() else {
        return String::new();
    };
    let mut out = String::new();
    for (i, row) in rows.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let width = head.iter().map(|h| h.len()).max().unwrap_or(0);
        for (h, v) in head.iter().zip(row) {
            out.push_str(&format!("{h:width$}  {v}\n"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Inner {
        a: i64,
        b: bool,
    }

    #[derive(Serialize)]
    struct Rec {
        name: &'static str,
        inner: Inner,
        missing: Option<i64>,
    }

    #[test]
    fn padic_json_forms() {
        let u = PadicJson::from(&PadicScalar::from_i64(7, 98, 4));
        assert_eq!((u.u.as_str(), u.v.as_str(), u.a.as_str()), ("2", "2", "4"));
        let z = PadicJson::from(&PadicScalar::zero(7, 3));
        assert_eq!((z.u.as_str(), z.v.as_str(), z.a.as_str()), ("0", "3", "3"));
        let e = PadicJson::from(&PadicScalar::exact_zero(7));
        assert_eq!(e.a, "inf");
    }

    #[test]
    fn nested_records_flatten_to_csv() {
        let out = Output::record(&Rec {
            name: "x",
            inner: Inner { a: -3, b: true },
            missing: None,
        });
        assert_eq!(out.render(Format::Csv).unwrap(), "name,inner.a,inner.b,missing\nx,-3,true,\n");
        assert!(out.render(Format::Text).unwrap().contains("inner.a  -3"));
        assert!(out.render(Format::Series).is_err());
    }
}
