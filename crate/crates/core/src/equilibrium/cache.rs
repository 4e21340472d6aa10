use std::path::Path;

use rug::Float;
use serde::{Deserialize, Serialize};

use super::{EqError, EquilibriumData, Potential};

pub const CACHE_VERSION: u32 = 1;

/// JSON form of [`EquilibriumData`]; numbers are decimal strings carrying
/// every bit of the working precision.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumRecord {
    pub version: u32,
    pub potential: Vec<String>,
    pub digits: u32,
    pub t: String,
    pub c0: String,
    pub c1: String,
    pub s_b: String,
    pub a: String,
    pub b: String,
    pub alpha: String,
    pub beta: String,
    pub p: String,
    pub q: String,
    pub ell: String,
    pub x_min: String,
    pub x_hat_min: String,
}

fn enc(x: &Float) -> String {
    x.to_string_radix(10, None)
}

fn dec(s: &str, prec: u32) -> Result<Float, EqError> {
    Float::parse(s)
        .map(|v| Float::with_val(prec, v))
        .map_err(|e| EqError::Cache(format!("bad number {s:?}: {e}")))
}

impl EquilibriumRecord {
    pub fn new(v: &Potential, data: &EquilibriumData, digits: u32) -> Self {
        EquilibriumRecord {
            version: CACHE_VERSION,
            potential: v.coeff_strings(),
            digits,
            t: enc(&data.t),
            c0: enc(&data.c0),
            c1: enc(&data.c1),
            s_b: enc(&data.s_b),
            a: enc(&data.a),
            b: enc(&data.b),
            alpha: enc(&data.alpha),
            beta: enc(&data.beta),
            p: enc(&data.p),
            q: enc(&data.q),
            ell: enc(&data.ell),
            x_min: enc(&data.x_min),
            x_hat_min: enc(&data.x_hat_min),
        }
    }

    pub fn to_data(&self, prec: u32) -> Result<EquilibriumData, EqError> {
        if self.version != CACHE_VERSION {
            return Err(EqError::Cache(format!(
                "version {} does not match {}",
                self.version, CACHE_VERSION
            )));
        }
        Ok(EquilibriumData {
            t: dec(&self.t, prec)?,
            c0: dec(&self.c0, prec)?,
            c1: dec(&self.c1, prec)?,
            s_b: dec(&self.s_b, prec)?,
            a: dec(&self.a, prec)?,
            b: dec(&self.b, prec)?,
            alpha: dec(&self.alpha, prec)?,
            beta: dec(&self.beta, prec)?,
            p: dec(&self.p, prec)?,
            q: dec(&self.q, prec)?,
            ell: dec(&self.ell, prec)?,
            x_min: dec(&self.x_min, prec)?,
            x_hat_min: dec(&self.x_hat_min, prec)?,
        })
    }

    /// Whether the record was produced for this potential, `t` and digits.
    pub fn matches(&self, v: &Potential, t: &Float, digits: u32) -> bool {
        self.version == CACHE_VERSION
            && self.digits == digits
            && self.potential == v.coeff_strings()
            && Float::parse(&self.t).map(|x| Float::with_val(t.prec(), x) == *t).unwrap_or(false)
    }
}

pub fn save_equilibrium(path: &Path, v: &Potential, data: &EquilibriumData, digits: u32) -> Result<(), EqError> {
    let rec = EquilibriumRecord::new(v, data, digits);
    let text = serde_json::to_string_pretty(&rec).map_err(|e| EqError::Cache(e.to_string()))?;
    std::fs::write(path, text).map_err(|e| EqError::Cache(format!("{}: {e}", path.display())))
}

/// Cached data for `(v, t, digits)`, or `None` if the file is missing or
/// belongs to a different problem.
pub fn load_equilibrium(path: &Path, v: &Potential, t: &Float, digits: u32, prec: u32) -> Result<Option<EquilibriumData>, EqError> {
    let text = match std::fs::read_to_string(path) {
        Ok(s) => s,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(EqError::Cache(format!("{}: {e}", path.display()))),
    };
    let rec: EquilibriumRecord = serde_json::from_str(&text).map_err(|e| EqError::Cache(e.to_string()))?;
    if !rec.matches(v, t, digits) {
        return Ok(None);
    }
    rec.to_data(prec).map(Some)
}
