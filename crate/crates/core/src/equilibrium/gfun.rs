use rug::float::Constant;
use rug::Float;

use super::potential::PotentialEval;
use super::table::DensityTable;
use super::EqError;
use crate::mpnum::Cpx;

/// `log E(w)` with `E(w) = (eʷ − 1)/w`, real argument.
pub(crate) fn log_e_real(w: &Float) -> Float {
    let p = w.prec();
    if w.is_zero() {
        return Float::new(p);
    }
    let e = Float::with_val(p, w.exp_m1_ref()) / w;
    e.ln()
}

/// Principal `Log E(w)`; `E` has positive real part for `|Im w| < π`.
pub(crate) fn log_e_complex(w: &Cpx) -> Cpx {
    let p = w.prec();
    let small = w.norm_sqr() < 0.015625f64;
    let e = if small {
        // Σ wʲ/(j+1)!
        let eps = Float::with_val(p, Float::i_exp(1, -(p as i32) - 4));
        let mut term = Cpx::from_real(Float::with_val(p, 1));
        let mut acc = term.clone();
        let mut j = 1u32;
        loop {
            term = (&term * w).scale(&Float::with_val(p, j + 1).recip());
            acc = &acc + &term;
            if term.abs() < eps {
                break;
            }
            j += 1;
        }
        acc
    } else {
        let one = Float::with_val(p, 1);
        &w.exp().add_real(&(-one)) / w
    };
    e.ln()
}

/// `(g(z), g̃(z)) = (∫ log(z − s) dμ, ∫ log(eᶻ − eˢ) dμ)` with principal
/// logarithms, for `z` off `(−∞, b]`.
pub fn g_functions(table: &DensityTable, b: &Float, z: &Cpx) -> Result<(Cpx, Cpx), EqError> {
    if z.im.is_zero() && z.re <= *b {
        return Err(EqError::InvalidParameter("g-functions need z off (-inf, b]".into()));
    }
    let ez = z.exp();
    let g = table.integrate_c(|s| z.add_real(&Float::with_val(z.prec(), -s)).ln());
    let gt = table.integrate_c(|s| ez.add_real(&(-Float::with_val(z.prec(), s.exp_ref()))).ln());
    Ok((g, gt))
}

/// `F_t(z) = (t/2)(z + ∫ Log E(s − z) dμ(s))` for `|Im z| < π`. On the real
/// line this is `(t/2) ∫ log|(eˣ − eˢ)/(x − s)| dμ(s)`.
pub fn f_function(table: &DensityTable, t: &Float, z: &Cpx) -> Result<Cpx, EqError> {
    let p = z.prec();
    let pi = Float::with_val(p, Constant::Pi);
    if Float::with_val(p, z.im.abs_ref()) >= pi {
        return Err(EqError::InvalidParameter("F needs |Im z| < pi".into()));
    }
    if z.im.is_zero() {
        return Ok(Cpx::from_real(f_real(table, t, &z.re)));
    }
    let neg_z = -z;
    let integral = table.integrate_c(|s| log_e_complex(&neg_z.add_real(s)));
    Ok((z + &integral).scale(&Float::with_val(p, t / 2u32)))
}

/// Real-axis `F_t(x)`.
pub fn f_real(table: &DensityTable, t: &Float, x: &Float) -> Float {
    let p = x.prec();
    let integral = table.integrate(|s| log_e_real(&Float::with_val(p, s - x)));
    (integral + x) * Float::with_val(p, t / 2u32)
}

/// `F_t'(x)` by a central difference with step `10^-(digits/4)`.
pub fn f_prime(table: &DensityTable, t: &Float, x: &Float, digits: u32) -> Float {
    let p = x.prec();
    let h = crate::mpnum::pow10_prec(p, -((digits / 4) as i32));
    let fp = f_real(table, t, &Float::with_val(p, x + &h));
    let fm = f_real(table, t, &Float::with_val(p, x - &h));
    (fp - fm) / (h * 2u32)
}

/// `log|x − y| + log|eˣ − eʸ|` integrated against `μ` in `x`, minus
/// `V(y)/t`. Equals the Lagrange constant on the support.
pub(crate) fn variational_sum(table: &DensityTable, ve: &PotentialEval, t: &Float, y: &Float) -> Float {
    let p = y.prec();
    let u = table.log_potential(y);
    // log|eˢ − eʸ| = log|s − y| + y + log E(s − y)
    let corr = table.integrate(|s| log_e_real(&Float::with_val(p, s - y)));
    let mass_y = Float::with_val(p, y * table.mass_check());
    u * 2u32 + mass_y + corr - Float::with_val(p, ve.v(y) / t)
}
