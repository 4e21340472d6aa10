//! Configurable-precision numerical substrate.
//!
//! Everything above this module works with [`rug::Float`] values whose
//! precision is derived from a [`PrecisionContext`]. The services offered
//! here are deliberately small: adaptive Gauss–Legendre and tanh-sinh
//! quadrature, spectrally accurate trapezoidal contour integrals on circles,
//! Newton iterations in real and complex arithmetic, an unpivoted LDU
//! factorization and the Airy function.

mod airy;
mod complex;
mod linalg;
mod newton;
mod quad;

pub use airy::{airy, airy_kernel};
pub use complex::Cpx;
pub use linalg::{ldu_bidiagonalize, lower_unit_inverse, solve_dense, upper_unit_inverse, Ldu, Matrix};
pub use newton::{complex_newton, newton_solve};
pub use quad::{
    integrate_circle, integrate_circle_vec, integrate_gauss_legendre, integrate_gauss_legendre_vec,
    integrate_tanh_sinh, GaussLegendreRule,
};

use rug::float::Constant;
use rug::Float;
use thiserror::Error;

/// Guard bits carried on top of the requested decimal digits.
const GUARD_BITS: u32 = 32;

/// Failure modes of the numerical substrate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum MpError {
    #[error("{what} did not converge: {detail}")]
    NonConvergent { what: &'static str, detail: String },
    #[error("singular Jacobian in Newton iteration")]
    SingularJacobian,
    #[error("leading principal minor {0} is numerically zero")]
    SingularMinor(usize),
    #[error("invalid precision context: {0}")]
    InvalidPrecision(String),
    #[error("invalid interval: lo must be strictly below hi")]
    InvalidInterval,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl MpError {
    pub(crate) fn nonconvergent(what: &'static str, detail: impl Into<String>) -> Self {
        MpError::NonConvergent {
            what,
            detail: detail.into(),
        }
    }
}

/// Working precision and iteration tolerances.
///
/// Tolerances are stored as low-precision [`Float`]s so that values such as
/// `1e-400` remain representable.
#[derive(Clone, Debug, PartialEq)]
pub struct PrecisionContext {
    pub digits: u32,
    pub quad_rel_tol: Float,
    pub max_panel_doublings: u32,
    pub newton_tol: Float,
    pub newton_max_iter: u32,
}

impl PrecisionContext {
    /// Context with default tolerances: quadrature to `10^-(3d/4)`, Newton
    /// residuals to `10^-(3d/5)`.
    pub fn new(digits: u32) -> Result<Self, MpError> {
        let ctx = PrecisionContext {
            digits,
            quad_rel_tol: pow10(-((3 * digits / 4) as i32)),
            max_panel_doublings: 14,
            newton_tol: pow10(-((3 * digits / 5) as i32)),
            newton_max_iter: 80,
        };
        ctx.validate()?;
        Ok(ctx)
    }

    pub fn with_quad_tol_exp10(mut self, exp10: i32) -> Result<Self, MpError> {
        self.quad_rel_tol = pow10(exp10);
        self.validate()?;
        Ok(self)
    }

    pub fn with_newton_tol_exp10(mut self, exp10: i32) -> Result<Self, MpError> {
        self.newton_tol = pow10(exp10);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), MpError> {
        if self.digits < 32 {
            return Err(MpError::InvalidPrecision(format!(
                "digits = {} but at least 32 are required",
                self.digits
            )));
        }
        let floor = pow10(-(self.digits as i32) + 8);
        if self.quad_rel_tol < floor {
            return Err(MpError::InvalidPrecision(format!(
                "quad_rel_tol {:.3e} is tighter than 10^-(digits-8)",
                self.quad_rel_tol.to_f64()
            )));
        }
        if self.newton_tol <= 0 || self.max_panel_doublings == 0 || self.newton_max_iter == 0 {
            return Err(MpError::InvalidPrecision(
                "tolerances and iteration limits must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Binary precision of working values.
    pub fn prec(&self) -> u32 {
        digits_to_bits(self.digits) + GUARD_BITS
    }

    /// A copy with `extra` more decimal digits; tolerances are kept.
    pub fn raised(&self, extra: u32) -> Self {
        PrecisionContext {
            digits: self.digits + extra,
            ..self.clone()
        }
    }

    pub fn float<T>(&self, v: T) -> Float
    where
        Float: rug::Assign<T>,
    {
        Float::with_val(self.prec(), v)
    }

    pub fn zero(&self) -> Float {
        Float::new(self.prec())
    }

    pub fn pi(&self) -> Float {
        Float::with_val(self.prec(), Constant::Pi)
    }

    /// `10^e` at working precision.
    pub fn pow10(&self, e: i32) -> Float {
        pow10_prec(self.prec(), e)
    }
}

/// `10^e` at precision `prec`.
pub fn pow10_prec(prec: u32, e: i32) -> Float {
    let v = Float::with_val(prec, Float::i_pow_u(10, e.unsigned_abs()));
    if e < 0 {
        v.recip()
    } else {
        v
    }
}

/// `10^e` at 64-bit precision, used for tolerances.
pub fn pow10(e: i32) -> Float {
    pow10_prec(64, e)
}

pub fn digits_to_bits(digits: u32) -> u32 {
    (digits as f64 * std::f64::consts::LOG2_10).ceil() as u32
}

/// Closed real interval with `lo < hi`.
#[derive(Clone, Debug, PartialEq)]
pub struct RealInterval {
    pub lo: Float,
    pub hi: Float,
}

impl RealInterval {
    pub fn new(lo: Float, hi: Float) -> Result<Self, MpError> {
        if lo < hi {
            Ok(RealInterval { lo, hi })
        } else {
            Err(MpError::InvalidInterval)
        }
    }

    pub fn from_f64(prec: u32, lo: f64, hi: f64) -> Result<Self, MpError> {
        Self::new(Float::with_val(prec, lo), Float::with_val(prec, hi))
    }

    pub fn width(&self) -> Float {
        Float::with_val(self.lo.prec().max(self.hi.prec()), &self.hi - &self.lo)
    }

    pub fn contains(&self, x: &Float) -> bool {
        *x >= self.lo && *x <= self.hi
    }
}

/// `true` when `new` and `old` agree within `tol·(1 + |new|)`.
pub(crate) fn agrees(new: &Float, old: &Float, tol: &Float) -> bool {
    let diff = Float::with_val(new.prec(), new - old).abs();
    let scale = Float::with_val(new.prec(), new.abs_ref()) + 1u32;
    diff <= scale * tol
}
