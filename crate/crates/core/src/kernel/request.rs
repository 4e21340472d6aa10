use std::time::Instant;

use rayon::prelude::*;
use rug::Float;
use serde::{Deserialize, Serialize};

use super::scaled::{bulk_scaled_with, edge_scaled_with, BulkScale};
use super::{kernel_conjugated, kernel_raw, EdgeSide, KernelError};
use crate::biortho::BiorthoSystem;
use crate::equilibrium::Equilibrium;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Bulk,
    /// Bulk scaling by `ψ(x*)n` instead of `πψ(x*)n`.
    BulkDensity,
    EdgeRight,
    EdgeLeft,
    /// `K_n` at unscaled points; the reference is the unconjugated kernel.
    Raw,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Bulk => "bulk",
            Regime::BulkDensity => "bulk_density",
            Regime::EdgeRight => "edge_right",
            Regime::EdgeLeft => "edge_left",
            Regime::Raw => "raw",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Regime {
    type Err = KernelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bulk" => Ok(Regime::Bulk),
            "bulk_density" => Ok(Regime::BulkDensity),
            "edge_right" => Ok(Regime::EdgeRight),
            "edge_left" => Ok(Regime::EdgeLeft),
            "raw" => Ok(Regime::Raw),
            _ => Err(KernelError::InvalidParameter(format!("unknown regime {s:?}"))),
        }
    }
}

/// A batch of kernel evaluations at local coordinates `(ξ, η)`.
///
/// The `eq` passed to [`evaluate`] is the `t = 1` equilibrium of the
/// system's potential, except for [`Regime::EdgeLeft`] where it is that
/// of the reflected potential (see [`super::edge_scaled`]).
#[derive(Clone, Debug)]
pub struct KernelRequest {
    pub n: u32,
    pub regime: Regime,
    pub x_star: Option<Float>,
    pub grid: Vec<(Float, Float)>,
    /// Include `e^{nF(u)} · e^{−nF(v)}`.
    pub conjugate: bool,
}

#[derive(Clone, Debug)]
pub struct KernelRow {
    pub regime: Regime,
    pub n: u32,
    pub xi: Float,
    pub eta: Float,
    pub value: Float,
    pub reference: Float,
    pub abs_err: f64,
    /// `abs_err / max(|reference|, 0.05)`.
    pub rel_err: f64,
}

pub const REL_ERR_FLOOR: f64 = 0.05;

impl KernelRow {
    pub const HEADER: [&'static str; 8] = ["regime", "n", "xi", "eta", "value", "reference", "abs_err", "rel_err"];

    /// Decimal strings in [`KernelRow::HEADER`] order; `digits` significant
    /// digits for the multiprecision columns.
    pub fn fields(&self, digits: usize) -> [String; 8] {
        let dec = |x: &Float| x.to_string_radix(10, Some(digits));
        [
            self.regime.to_string(),
            self.n.to_string(),
            dec(&self.xi),
            dec(&self.eta),
            dec(&self.value),
            dec(&self.reference),
            format!("{:e}", self.abs_err),
            format!("{:e}", self.rel_err),
        ]
    }
}

#[derive(Clone, Debug)]
pub struct KernelResult {
    pub rows: Vec<KernelRow>,
    pub runtime_ms: u128,
    pub digits: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSummary {
    pub regime: Regime,
    pub n: u32,
    pub points: usize,
    pub digits: u32,
    pub max_abs_err: f64,
    pub median_abs_err: f64,
    pub max_rel_err: f64,
    pub median_rel_err: f64,
    pub runtime_ms: u128,
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(|a, b| a.total_cmp(b));
    let k = v.len() / 2;
    if v.len() % 2 == 1 {
        v[k]
    } else {
        (v[k - 1] + v[k]) / 2.0
    }
}

impl KernelResult {
    pub fn summary(&self, regime: Regime, n: u32) -> KernelSummary {
        let abs: Vec<f64> = self.rows.iter().map(|r| r.abs_err).collect();
        let rel: Vec<f64> = self.rows.iter().map(|r| r.rel_err).collect();
        KernelSummary {
            regime,
            n,
            points: self.rows.len(),
            digits: self.digits,
            max_abs_err: abs.iter().copied().fold(0.0, f64::max),
            median_abs_err: median(abs),
            max_rel_err: rel.iter().copied().fold(0.0, f64::max),
            median_rel_err: median(rel),
            runtime_ms: self.runtime_ms,
        }
    }
}

fn point(req: &KernelRequest, sys: &BiorthoSystem, eq: &Equilibrium, xi: &Float, eta: &Float) -> Result<(Float, Float), KernelError> {
    match req.regime {
        Regime::Bulk | Regime::BulkDensity => {
            let x_star = req
                .x_star
                .as_ref()
                .ok_or_else(|| KernelError::InvalidParameter("bulk regime needs x_star".into()))?;
            let kind = if req.regime == Regime::Bulk { BulkScale::Literal } else { BulkScale::Density };
            bulk_scaled_with(sys, eq, x_star, xi, eta, kind, req.conjugate)
        }
        Regime::EdgeRight => edge_scaled_with(sys, eq, EdgeSide::Right, xi, eta, req.conjugate),
        Regime::EdgeLeft => edge_scaled_with(sys, eq, EdgeSide::Left, xi, eta, req.conjugate),
        Regime::Raw => {
            let reference = kernel_raw(sys, xi, eta)?;
            let value = if req.conjugate {
                kernel_conjugated(sys, eq, xi, eta)?
            } else {
                reference.clone()
            };
            Ok((value, reference))
        }
    }
}

/// Evaluates every grid point in parallel.
pub fn evaluate(req: &KernelRequest, sys: &BiorthoSystem, eq: &Equilibrium) -> Result<KernelResult, KernelError> {
    if req.grid.is_empty() {
        return Err(KernelError::InvalidParameter("empty grid".into()));
    }
    if req.n != sys.n() {
        return Err(KernelError::InvalidParameter(format!("request for n = {} given a system with n = {}", req.n, sys.n())));
    }
    let start = Instant::now();
    let rows = req
        .grid
        .par_iter()
        .map(|(xi, eta)| {
            let (value, reference) = point(req, sys, eq, xi, eta)?;
            if !value.is_finite() || !reference.is_finite() {
                return Err(KernelError::InvalidParameter(format!("non-finite kernel value at ({}, {})", xi.to_f64(), eta.to_f64())));
            }
            let abs_err = Float::with_val(sys.prec(), &value - &reference).abs().to_f64();
            let rel_err = abs_err / reference.to_f64().abs().max(REL_ERR_FLOOR);
            Ok(KernelRow {
                regime: req.regime,
                n: req.n,
                xi: xi.clone(),
                eta: eta.clone(),
                value,
                reference,
                abs_err,
                rel_err,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(KernelResult {
        rows,
        runtime_ms: start.elapsed().as_millis(),
        digits: sys.context().digits,
    })
}
