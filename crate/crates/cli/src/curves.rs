//! The curve table: built-in rows, optionally overridden by a JSON file.
//!
//! The file holds an array of rows
//! `{"name", "ainvs", "c4", "c6", "disc", "conductor", "cm_disc", "modular_degree"}`.
//! Rows replace built-ins of the same name; every row is validated on load.

use mockalpha_core::cmforms::{builtin_labels, load_curve, CurveData};
use serde::Deserialize;
use std::path::Path;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CurveRow {
    name: String,
    ainvs: [i64; 5],
    c4: i64,
    c6: i64,
    disc: i64,
    conductor: u64,
    cm_disc: i64,
    modular_degree: u64,
}

#[derive(Debug, Clone)]
pub struct CurveTable {
    rows: Vec<CurveData>,
}

impl CurveTable {
    pub fn builtin() -> Self {
        let rows = builtin_labels()
            .map(|l| load_curve(l).expect("built-in curves are valid"))
            .collect();
        CurveTable { rows }
    }

    /// Built-ins overridden by the rows of `path`.
    pub fn with_overrides(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))?;
        Self::builtin().merge_json(&text)
    }

    pub fn merge_json(mut self, text: &str) -> anyhow::Result<Self> {
        let rows: Vec<CurveRow> =
            serde_json::from_str(text).map_err(|e| anyhow::anyhow!("curve table: {e}"))?;
        for r in rows {
            let c = CurveData::with_invariants(
                &r.name,
                r.ainvs,
                r.c4,
                r.c6,
                r.disc,
                r.conductor,
                r.cm_disc,
                r.modular_degree,
            )?;
            match self.rows.iter_mut().find(|x| x.name == c.name) {
                Some(slot) => *slot = c,
                None => self.rows.push(c),
            }
        }
        Ok(self)
    }

    pub fn get(&self, name: &str) -> anyhow::Result<&CurveData> {
        self.rows.iter().find(|c| c.name == name).ok_or_else(|| {
            let known: Vec<_> = self.rows.iter().map(|c| c.name.as_str()).collect();
            anyhow::anyhow!("unknown curve '{name}' (known: {})", known.join(", "))
        })
    }
}
