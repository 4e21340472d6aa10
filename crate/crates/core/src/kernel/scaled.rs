use rug::float::Constant;
use rug::Float;

use super::{kernel_raw, require_t_one, sine_kernel, KernelError};
use crate::biortho::BiorthoSystem;
use crate::equilibrium::{reflect_potential, Equilibrium};
use crate::mpnum::airy_kernel;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeSide {
    Right,
    Left,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum BulkScale {
    /// `πψ(x*)n`, as in the statement of the limit.
    Literal,
    /// `ψ(x*)n`, the local mean spacing of an `n`-point process with
    /// density `ψ`.
    Density,
}

struct BulkFrame {
    scale: Float,
    u: Float,
    v: Float,
}

fn bulk_frame(sys: &BiorthoSystem, eq: &Equilibrium, x_star: &Float, xi: &Float, eta: &Float, kind: BulkScale) -> Result<BulkFrame, KernelError> {
    require_t_one(eq)?;
    let d = &eq.data;
    if *x_star <= d.a || *x_star >= d.b {
        return Err(KernelError::OutsideBulk {
            x_star: x_star.to_f64(),
            a: d.a.to_f64(),
            b: d.b.to_f64(),
        });
    }
    let prec = sys.prec();
    let psi = Float::with_val(prec, eq.psi(x_star));
    let mut scale = psi * sys.n();
    if kind == BulkScale::Literal {
        scale *= Float::with_val(prec, Constant::Pi);
    }
    let u = Float::with_val(prec, xi / &scale) + x_star;
    let v = Float::with_val(prec, eta / &scale) + x_star;
    Ok(BulkFrame { scale, u, v })
}

/// Left side of the bulk limit taken literally:
/// `e^{F′(x*)(ξ−η)/(πψ(x*))} K_n(u, v) / (πψ(x*)n)` with
/// `u = x* + ξ/(πψ(x*)n)`, `v = x* + η/(πψ(x*)n)`, and the sine kernel
/// as reference.
pub fn bulk_scaled(sys: &BiorthoSystem, eq: &Equilibrium, x_star: &Float, xi: &Float, eta: &Float) -> Result<(Float, Float), KernelError> {
    bulk_scaled_with(sys, eq, x_star, xi, eta, BulkScale::Literal, true)
}

/// [`bulk_scaled`] with `πψ(x*)n` replaced by `ψ(x*)n` in both the
/// prefactor and the arguments, i.e. `e^{F′(x*)(ξ−η)/ψ(x*)} K_n(u, v) / (ψ(x*)n)`
/// at `u = x* + ξ/(ψ(x*)n)`.
///
/// Since `K_n(x, x) ≈ nψ(x)`, this is the normalisation under which the
/// sine kernel is approached; with the literal `πψ(x*)n` the left side
/// tends to `sin(ξ−η)/(π(ξ−η))` instead.
pub fn bulk_scaled_density(sys: &BiorthoSystem, eq: &Equilibrium, x_star: &Float, xi: &Float, eta: &Float) -> Result<(Float, Float), KernelError> {
    bulk_scaled_with(sys, eq, x_star, xi, eta, BulkScale::Density, true)
}

pub(crate) fn bulk_scaled_with(
    sys: &BiorthoSystem,
    eq: &Equilibrium,
    x_star: &Float,
    xi: &Float,
    eta: &Float,
    kind: BulkScale,
    conjugate: bool,
) -> Result<(Float, Float), KernelError> {
    let fr = bulk_frame(sys, eq, x_star, xi, eta, kind)?;
    let prec = sys.prec();
    let mut value = kernel_raw(sys, &fr.u, &fr.v)? / &fr.scale;
    if conjugate {
        let fp = Float::with_val(prec, eq.f_prime(x_star));
        // (ξ−η)/(πψ) = n·(u − v), or (ξ−η)/ψ for the density scale
        let expo = fp * Float::with_val(prec, &fr.u - &fr.v) * sys.n();
        value *= expo.exp();
    }
    Ok((value, sine_kernel(xi, eta)))
}

/// Same scaling with the exact conjugation `e^{n(F(u) − F(v))}` in place
/// of its linearisation at `x*`.
pub fn bulk_scaled_conjugated(sys: &BiorthoSystem, eq: &Equilibrium, x_star: &Float, xi: &Float, eta: &Float) -> Result<(Float, Float), KernelError> {
    let fr = bulk_frame(sys, eq, x_star, xi, eta, BulkScale::Literal)?;
    let value = super::kernel_conjugated(sys, eq, &fr.u, &fr.v)? / &fr.scale;
    Ok((value, sine_kernel(xi, eta)))
}

/// Edge rescaling `e^{n(F(u)−F(v))} K(u, v) / (πβn)^{2/3}` at
/// `u = b + ξ/(πβn)^{2/3}`, `v = b + η/(πβn)^{2/3}`, with the Airy kernel
/// as reference.
///
/// For [`EdgeSide::Right`], `eq` is the `t = 1` equilibrium of the
/// system's potential. For [`EdgeSide::Left`], `eq` must be the `t = 1`
/// equilibrium of the reflected potential `R(x) = V(−x) + ((n−1)/n)x`;
/// the kernel of the reflected ensemble is obtained exactly from the
/// system's kernel through `K_R(−X, −Y) = e^{(n−1)(X−Y)/2} K_V(X, Y)`,
/// so the left edge of `V` is measured at the right edge of `R`.
pub fn edge_scaled(sys: &BiorthoSystem, eq: &Equilibrium, side: EdgeSide, xi: &Float, eta: &Float) -> Result<(Float, Float), KernelError> {
    edge_scaled_with(sys, eq, side, xi, eta, true)
}

pub(crate) fn edge_scaled_with(
    sys: &BiorthoSystem,
    eq: &Equilibrium,
    side: EdgeSide,
    xi: &Float,
    eta: &Float,
    conjugate: bool,
) -> Result<(Float, Float), KernelError> {
    require_t_one(eq)?;
    let n = sys.n();
    let expected = match side {
        EdgeSide::Right => sys.potential().clone(),
        EdgeSide::Left => reflect_potential(sys.potential(), n),
    };
    if eq.potential.coeff_strings() != expected.coeff_strings() {
        return Err(KernelError::InvalidParameter(format!(
            "equilibrium potential {:?} does not match the {side:?} edge potential {:?}",
            eq.potential.coeff_strings(),
            expected.coeff_strings()
        )));
    }
    let prec = sys.prec();
    let d = &eq.data;
    let scale = (Float::with_val(prec, Constant::Pi) * &d.beta * n).cbrt().square();
    let u = Float::with_val(prec, xi / &scale) + &d.b;
    let v = Float::with_val(prec, eta / &scale) + &d.b;
    let k = match side {
        EdgeSide::Right => kernel_raw(sys, &u, &v)?,
        EdgeSide::Left => {
            let x = Float::with_val(prec, -&u);
            let y = Float::with_val(prec, -&v);
            let shift = Float::with_val(prec, &v - &u) * (n - 1) / 2u32;
            kernel_raw(sys, &x, &y)? * shift.exp()
        }
    };
    let mut value = k / scale;
    if conjugate {
        let conj = Float::with_val(prec, eq.f_real(&u) - eq.f_real(&v)) * n;
        value *= conj.exp();
    }
    Ok((value, airy_kernel(xi, eta, eq.context())))
}
