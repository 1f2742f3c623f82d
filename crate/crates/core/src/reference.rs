//! Published fit parameters for the `S0 (1 + (T/T0)^beta)` law, one row per
//! trap and cooldown. `S0` is stored in units of 1e-15 V²/m²/Hz.

use serde::{Deserialize, Serialize};

use crate::dutta_horn::DuttaHornParams;
use crate::{Error, Result};

/// Display unit of the `s0` columns.
pub const S0_UNIT: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRow {
    pub label: String,
    pub s0: f64,
    pub s0_err: f64,
    pub t0: f64,
    pub t0_err: f64,
    pub beta: f64,
    pub beta_err: f64,
    pub note: String,
}

impl ReferenceRow {
    /// `[s0, t0, beta]` with `s0` in V²/m²/Hz.
    pub fn params_si(&self) -> [f64; 3] {
        [self.s0 * S0_UNIT, self.t0, self.beta]
    }

    pub fn dutta_horn(&self) -> DuttaHornParams {
        let mut p = DuttaHornParams::new(self.beta, self.t0);
        p.s0 = self.s0 * S0_UNIT;
        p
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceTable {
    pub rows: Vec<ReferenceRow>,
}

impl ReferenceTable {
    /// Looks a row up by label, ignoring spaces and case ("III e" == "IIIe").
    pub fn row(&self, label: &str) -> Result<&ReferenceRow> {
        let key = normalize(label);
        self.rows
            .iter()
            .find(|r| normalize(&r.label) == key)
            .ok_or_else(|| Error::invalid("trap", format!("no reference row labelled {label:?}")))
    }

    pub fn labels(&self) -> Vec<&str> {
        self.rows.iter().map(|r| r.label.as_str()).collect()
    }
}

fn normalize(s: &str) -> String {
    s.chars().filter(|c| !c.is_whitespace()).flat_map(char::to_lowercase).collect()
}

const ROWS: [(&str, f64, f64, f64, f64, f64, f64, &str); 8] = [
    ("I", 65.0, 3.0, 73.0, 3.0, 3.0, 0.2, "6th cooldown"),
    ("II", 42.0, 2.0, 46.0, 1.0, 4.1, 0.1, "Initial cooldown"),
    ("III a", 167.0, 7.0, 46.0, 1.0, 3.6, 0.2, "Initial cooldown"),
    ("III b", 120.0, 10.0, 45.0, 3.0, 3.5, 0.2, "Temperature cycle to 130K while in vacuum"),
    ("III c", 54.0, 3.0, 44.0, 2.0, 3.2, 0.1, "Temperature cycle to 340K while in vacuum"),
    ("III d", 60.0, 4.0, 49.0, 4.0, 2.1, 0.1, "Recleaning in lab solvents in air"),
    ("III e", 18.0, 3.0, 17.0, 3.0, 1.8, 0.1, "Recleaning in lab solvents in air"),
    ("IV", 3300.0, 40.0, 73.0, 1.0, 3.2, 0.1, "Following the room temperature measurements"),
];

pub fn load_reference_table() -> ReferenceTable {
    ReferenceTable {
        rows: ROWS
            .iter()
            .map(|&(label, s0, s0_err, t0, t0_err, beta, beta_err, note)| ReferenceRow {
                label: label.to_string(),
                s0,
                s0_err,
                t0,
                t0_err,
                beta,
                beta_err,
                note: note.to_string(),
            })
            .collect(),
    }
}
