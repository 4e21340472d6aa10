use rug::float::Constant;
use rug::Float;

use super::jmap::{Branch, InverseMap};
use super::potential::Potential;
use super::{EqError, SupportData};
use crate::mpnum::{integrate_tanh_sinh, MpError, PrecisionContext, RealInterval};

/// Pointwise density
/// `ψ(x) = (1/2π²t) ∫_a^b V''(u) log|(I₊(u) − I₋(x))/(I₊(u) − I₊(x))| du`,
/// with the interval split at `u = x` and tanh-sinh quadrature on each
/// half. Zero outside `[a, b]`.
///
/// This is the slow reference evaluator; [`super::DensityTable`] is the
/// one used for integration.
pub fn density(support: &SupportData, v: &Potential, x: &Float, ctx: &PrecisionContext) -> Result<Float, EqError> {
    let p = ctx.prec();
    if *x <= support.a || *x >= support.b {
        return Ok(Float::new(p));
    }
    let imap = InverseMap::new(&support.c1, &support.c0)?;
    let ve = v.at_prec(p);
    let zx = imap.solve(x, Branch::Plus, ctx)?;
    let zx_bar = zx.conj();
    let mut failure: Option<EqError> = None;
    let mut integrand = |u: &Float| -> Float {
        match imap.solve(u, Branch::Plus, ctx) {
            Ok(zu) => {
                let num = (&zu - &zx_bar).norm_sqr();
                let den = (&zu - &zx).norm_sqr();
                let ratio = Float::with_val(p, num / den).ln() / 2u32;
                ratio * ve.d2v(u)
            }
            Err(e) => {
                failure.get_or_insert(e);
                Float::with_val(p, rug::float::Special::Nan)
            }
        }
    };
    let left = RealInterval::new(Float::with_val(p, &support.a), Float::with_val(p, x))?;
    let right = RealInterval::new(Float::with_val(p, x), Float::with_val(p, &support.b))?;
    let total = integrate_tanh_sinh(&mut integrand, &left, ctx).and_then(|l| {
        let r = integrate_tanh_sinh(&mut integrand, &right, ctx)?;
        Ok::<Float, MpError>(l + r)
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let pi2 = Float::with_val(p, Constant::Pi).square() * 2u32 * &support.t;
    Ok(total? / pi2)
}
