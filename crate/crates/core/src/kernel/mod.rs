//! Correlation kernel
//! `K_n(x, y) = Σ_{j<n} p_j(x) q_j(eʸ) e^{−n(V(x)+V(y))/2} / h_j`,
//! its conjugation by `e^{nF}`, the bulk and edge rescalings, and the
//! diagnostic decompositions used to study them at finite `n`.
//!
//! Every quantity here except the individual expansion coefficients
//! `a_{j,k}`, `b_{j,k}` is independent of the degree-dependent gauge in
//! [`crate::biortho::Gauge`], since `p̃_j q̃_j = p_j q_j(e^·) w^{1/2} w^{1/2} / h_j`.

mod cd;
mod request;
mod scaled;
mod split;

pub use cd::{alpha_limit, cd_coefficients, cd_decomposition, CdDiagnostics, CdTerms};
pub use request::{evaluate, KernelRequest, KernelResult, KernelRow, KernelSummary, Regime, REL_ERR_FLOOR};
pub use scaled::{bulk_scaled, bulk_scaled_conjugated, bulk_scaled_density, edge_scaled, EdgeSide};
pub use split::{kernel_split, split_windows, SplitParts};

use rug::Float;
use thiserror::Error;

use crate::biortho::{BiorthoError, BiorthoSystem};
use crate::equilibrium::{EqError, Equilibrium};
use crate::mpnum::{airy, integrate_gauss_legendre, Cpx, MpError, PrecisionContext, RealInterval};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error(transparent)]
    Biortho(#[from] BiorthoError),
    #[error(transparent)]
    Equilibrium(#[from] EqError),
    #[error(transparent)]
    Mp(#[from] MpError),
    #[error("x* = {x_star} is not inside the support ({a}, {b})")]
    OutsideBulk { x_star: f64, a: f64, b: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub(crate) fn require_degree(sys: &BiorthoSystem, top: usize) -> Result<(), KernelError> {
    if sys.max_degree() < top {
        return Err(KernelError::InvalidParameter(format!(
            "degree {top} needed but the system stops at {}",
            sys.max_degree()
        )));
    }
    Ok(())
}

pub(crate) fn require_t_one(eq: &Equilibrium) -> Result<(), KernelError> {
    if eq.data.t != 1 {
        return Err(KernelError::InvalidParameter(format!(
            "conjugation needs the t = 1 equilibrium, got t = {}",
            eq.data.t.to_f64()
        )));
    }
    Ok(())
}

/// `Σ_{j=lo}^{hi} p_j(x) q_j(eʸ) / h_j`, without the weight.
pub(crate) fn partial_sum(sys: &BiorthoSystem, lo: usize, hi: usize, x: &Float, y: &Float) -> Float {
    let prec = sys.prec();
    let xs = Float::with_val(prec, x);
    let ey = Float::with_val(prec, y.exp_ref());
    let mut acc = Float::new(prec);
    for j in lo..=hi {
        let pq = Float::with_val(prec, crate::biortho::eval_poly(sys.p_coeffs(j), &xs) * crate::biortho::eval_poly(sys.q_coeffs(j), &ey));
        acc += pq / sys.h(j);
    }
    acc
}

/// `K_n(x, y)`.
pub fn kernel_raw(sys: &BiorthoSystem, x: &Float, y: &Float) -> Result<Float, KernelError> {
    let n = sys.n() as usize;
    require_degree(sys, n - 1)?;
    Ok(partial_sum(sys, 0, n - 1, x, y) * sys.half_weight(x) * sys.half_weight(y))
}

/// `K_n(z, w)` for complex arguments.
pub fn kernel_raw_c(sys: &BiorthoSystem, z: &Cpx, w: &Cpx) -> Result<Cpx, KernelError> {
    let n = sys.n() as usize;
    require_degree(sys, n - 1)?;
    let ps = sys.p_all_c(z);
    let qs = sys.q_exp_all_c(w);
    let mut acc = Cpx::zero(sys.prec());
    for j in 0..n {
        acc = &acc + &(&ps[j] * &qs[j]).scale(&Float::with_val(sys.prec(), sys.h(j).recip_ref()));
    }
    Ok(&(&acc * &sys.half_weight_c(z)) * &sys.half_weight_c(w))
}

/// `e^{n(F(x) − F(y))}` with `F = F_1`.
pub fn conjugation_factor(sys: &BiorthoSystem, eq: &Equilibrium, x: &Float, y: &Float) -> Result<Float, KernelError> {
    require_t_one(eq)?;
    let prec = sys.prec();
    let d = Float::with_val(prec, eq.f_real(x) - eq.f_real(y)) * sys.n();
    Ok(d.exp())
}

/// `e^{n(F(z) − F(w))}` for complex arguments in the strip `|Im| < π`.
pub fn conjugation_factor_c(sys: &BiorthoSystem, eq: &Equilibrium, z: &Cpx, w: &Cpx) -> Result<Cpx, KernelError> {
    require_t_one(eq)?;
    let mut d = &eq.f(z)? - &eq.f(w)?;
    d.set_prec(sys.prec());
    Ok(d.scale(&Float::with_val(sys.prec(), sys.n())).exp())
}

/// `e^{nF(x)} K_n(x, y) e^{−nF(y)}`.
pub fn kernel_conjugated(sys: &BiorthoSystem, eq: &Equilibrium, x: &Float, y: &Float) -> Result<Float, KernelError> {
    Ok(kernel_raw(sys, x, y)? * conjugation_factor(sys, eq, x, y)?)
}

/// `∫ K_n(x, x) dx` on the system's quadrature grid; equals `n`.
pub fn kernel_trace(sys: &BiorthoSystem) -> Result<Float, KernelError> {
    let n = sys.n() as usize;
    require_degree(sys, n - 1)?;
    let grid = sys.grid(sys.steps(), false);
    let mut acc = Float::new(sys.prec());
    for k in 0..grid.len() {
        // the grid weight already carries e^{−nV}
        acc += partial_sum(sys, 0, n - 1, &grid.nodes[k], &grid.nodes[k]) * &grid.weights[k];
    }
    Ok(acc)
}

/// `∫ K_n(x, s) K_n(s, y) ds − K_n(x, y)`.
pub fn reproducing_residual(sys: &BiorthoSystem, x: &Float, y: &Float) -> Result<Float, KernelError> {
    let n = sys.n() as usize;
    require_degree(sys, n - 1)?;
    let grid = sys.grid(sys.steps(), false);
    let mut acc = Float::new(sys.prec());
    for k in 0..grid.len() {
        let s = &grid.nodes[k];
        acc += partial_sum(sys, 0, n - 1, x, s) * partial_sum(sys, 0, n - 1, s, y) * &grid.weights[k];
    }
    let direct = partial_sum(sys, 0, n - 1, x, y);
    Ok((acc - direct) * sys.half_weight(x) * sys.half_weight(y))
}

/// `sin π(ξ−η) / (π(ξ−η))`, equal to 1 on the diagonal.
pub fn sine_kernel(xi: &Float, eta: &Float) -> Float {
    let prec = xi.prec().max(eta.prec());
    if xi == eta {
        return Float::with_val(prec, 1u32);
    }
    let d = Float::with_val(prec, xi - eta) * Float::with_val(prec, rug::float::Constant::Pi);
    Float::with_val(prec, d.sin_ref()) / d
}

/// `∫₀^L Ai(ξ+y) Ai(η+y) dy` by adaptive Gauss–Legendre quadrature.
pub fn airy_cd_integral(xi: &Float, eta: &Float, l: &Float, ctx: &PrecisionContext) -> Result<Float, KernelError> {
    let prec = ctx.prec();
    let iv = RealInterval::new(Float::new(prec), Float::with_val(prec, l))?;
    let f = |y: &Float| {
        let a = airy(&Float::with_val(prec, xi + y), ctx).0;
        let b = airy(&Float::with_val(prec, eta + y), ctx).0;
        a * b
    };
    Ok(integrate_gauss_legendre(f, &iv, ctx)?)
}

/// `exp_k(x) = Σ_{i≤k} xⁱ/i!`.
pub fn exp_truncated(k: usize, x: &Float) -> Float {
    let prec = x.prec();
    let mut term = Float::with_val(prec, 1u32);
    let mut acc = term.clone();
    for i in 1..=k {
        term *= x;
        term /= i as u32;
        acc += &term;
    }
    acc
}

pub fn exp_truncated_c(k: usize, z: &Cpx) -> Cpx {
    let prec = z.prec();
    let mut term = Cpx::from_real(Float::with_val(prec, 1u32));
    let mut acc = term.clone();
    for i in 1..=k {
        term = (&term * z).scale(&Float::with_val(prec, i as u32).recip());
        acc = &acc + &term;
    }
    acc
}
