use std::path::Path;

use rug::Float;
use serde::{Deserialize, Serialize};

use super::{BiorthoError, BiorthoSystem};
use crate::equilibrium::Potential;
use crate::mpnum::{PrecisionContext, RealInterval};

pub const BIORTHO_VERSION: u32 = 1;

/// JSON form of a [`BiorthoSystem`]. Coefficients and norming constants
/// are decimal strings at full working precision.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiorthoRecord {
    pub version: u32,
    pub n: u32,
    pub m: usize,
    pub digits: u32,
    pub quad_tol_exp10: i32,
    pub potential: Vec<String>,
    pub window_lo: String,
    pub window_hi: String,
    pub steps: usize,
    pub p: Vec<Vec<String>>,
    pub q: Vec<Vec<String>>,
    pub h: Vec<String>,
}

fn enc(x: &Float) -> String {
    x.to_string_radix(10, None)
}

fn dec(s: &str, prec: u32) -> Result<Float, BiorthoError> {
    Float::parse(s)
        .map(|v| Float::with_val(prec, v))
        .map_err(|e| BiorthoError::Io(format!("bad number {s:?}: {e}")))
}

fn dec_all(v: &[String], prec: u32) -> Result<Vec<Float>, BiorthoError> {
    v.iter().map(|s| dec(s, prec)).collect()
}

impl BiorthoRecord {
    pub fn new(sys: &BiorthoSystem) -> Self {
        let m = sys.max_degree();
        let tol = sys.context().quad_rel_tol.clone().log10().to_f64();
        BiorthoRecord {
            version: BIORTHO_VERSION,
            n: sys.n(),
            m,
            digits: sys.context().digits,
            quad_tol_exp10: tol.round() as i32,
            potential: sys.potential().coeff_strings(),
            window_lo: enc(&sys.window().lo),
            window_hi: enc(&sys.window().hi),
            steps: sys.steps(),
            p: (0..=m).map(|j| sys.p_coeffs(j).iter().map(enc).collect()).collect(),
            q: (0..=m).map(|j| sys.q_coeffs(j).iter().map(enc).collect()).collect(),
            h: sys.norming_constants().iter().map(enc).collect(),
        }
    }

    /// Rebuilds the system; fails if the orthogonality defect no longer
    /// meets the construction bound.
    pub fn to_system(&self) -> Result<BiorthoSystem, BiorthoError> {
        if self.version != BIORTHO_VERSION {
            return Err(BiorthoError::Io(format!("version {} does not match {}", self.version, BIORTHO_VERSION)));
        }
        if self.p.len() != self.m + 1 || self.q.len() != self.m + 1 || self.h.len() != self.m + 1 {
            return Err(BiorthoError::Io("degree count does not match m".into()));
        }
        let ctx = PrecisionContext::new(self.digits)?.with_quad_tol_exp10(self.quad_tol_exp10)?;
        let prec = ctx.prec();
        let v = Potential::from_decimal_strs(&self.potential)?;
        let p = self.p.iter().map(|c| dec_all(c, prec)).collect::<Result<Vec<_>, _>>()?;
        let q = self.q.iter().map(|c| dec_all(c, prec)).collect::<Result<Vec<_>, _>>()?;
        for (j, (pc, qc)) in p.iter().zip(&q).enumerate() {
            if pc.len() != j + 1 || qc.len() != j + 1 || pc[j] != 1 || qc[j] != 1 {
                return Err(BiorthoError::Io(format!("degree {j} polynomials are not monic of exact degree")));
            }
        }
        let h = dec_all(&self.h, prec)?;
        let window = RealInterval::new(dec(&self.window_lo, prec)?, dec(&self.window_hi, prec)?)?;
        BiorthoSystem::from_parts(&v, self.n, &ctx, p, q, h, window, self.steps)
    }
}

pub fn save_system(path: &Path, sys: &BiorthoSystem) -> Result<(), BiorthoError> {
    let text = serde_json::to_string_pretty(&BiorthoRecord::new(sys)).map_err(|e| BiorthoError::Io(e.to_string()))?;
    std::fs::write(path, text).map_err(|e| BiorthoError::Io(format!("{}: {e}", path.display())))
}

pub fn load_system(path: &Path) -> Result<BiorthoSystem, BiorthoError> {
    let text = std::fs::read_to_string(path).map_err(|e| BiorthoError::Io(format!("{}: {e}", path.display())))?;
    let rec: BiorthoRecord = serde_json::from_str(&text).map_err(|e| BiorthoError::Io(e.to_string()))?;
    rec.to_system()
}
