use std::cell::RefCell;

use rug::Float;

use super::jmap::{branch_point, j_value};
use super::potential::{Potential, PotentialEval};
use super::EqError;
use crate::mpnum::{integrate_circle_vec, newton_solve, Cpx, Matrix, MpError, PrecisionContext};

/// Contour integrals over a circle enclosing `[−½, ½]`:
/// `u = (c₁/2πi)∮V'(J)`, `v = (1/2πi)∮V'(J)/(s−½)`,
/// `p = (1/2πi)∮V''(J)/(s−½)`, `q = (1/2πi)∮V''(J)/(s+½)`.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Moments {
    pub u: Float,
    pub v: Float,
    pub p: Float,
    pub q: Float,
}

pub(crate) fn contour_radius(c1: &Float) -> Float {
    let s_b = branch_point(c1);
    let r = s_b * 0.75f64 + 0.5f64;
    if r < 1 {
        Float::with_val(c1.prec(), 1)
    } else {
        r
    }
}

pub(crate) fn moments(ve: &PotentialEval, c1: &Float, c0: &Float, ctx: &PrecisionContext) -> Result<Moments, EqError> {
    if *c1 <= 0 || !c1.is_finite() || !c0.is_finite() {
        return Err(EqError::Mp(MpError::nonconvergent(
            "coefficient solve",
            format!("iterate left the admissible region (c1 = {:.3e})", c1.to_f64()),
        )));
    }
    let p = ctx.prec();
    let half = Float::with_val(p, 0.5);
    let mhalf = Float::with_val(p, -0.5);
    let radius = contour_radius(c1);
    let vals = integrate_circle_vec(
        |s| {
            let j = j_value(c1, c0, s);
            let v1 = ve.dv_c(&j);
            let v2 = ve.d2v_c(&j);
            let rm = s.add_real(&mhalf).recip();
            let rp = s.add_real(&half).recip();
            vec![v1.clone(), &v1 * &rm, &v2 * &rm, &v2 * &rp]
        },
        &radius,
        ctx,
    )?;
    let re = |z: &Cpx| z.re.clone();
    Ok(Moments {
        u: Float::with_val(p, c1 * re(&vals[0])),
        v: re(&vals[1]),
        p: re(&vals[2]),
        q: re(&vals[3]),
    })
}

fn jacobian(m: &Moments, c1: &Float) -> Matrix {
    let p = c1.prec();
    let pq = Float::with_val(p, &m.p - &m.q);
    let sum = Float::with_val(p, &m.p + &m.q) / 2u32;
    let lower_left = Float::with_val(p, &pq / c1) + Float::with_val(p, &m.p / 2u32);
    Matrix::from_rows(vec![vec![sum, pq], vec![lower_left, m.p.clone()]])
}

fn solve_from(ve: &PotentialEval, t: &Float, guess: (&Float, &Float), ctx: &PrecisionContext) -> Result<(Float, Float), EqError> {
    let p = ctx.prec();
    let cache: RefCell<Option<(Vec<Float>, Moments)>> = RefCell::new(None);
    let eval = |x: &[Float]| -> Result<Moments, MpError> {
        if let Some((key, m)) = cache.borrow().as_ref() {
            if key.as_slice() == x {
                return Ok(m.clone());
            }
        }
        let m = moments(ve, &x[0], &x[1], ctx).map_err(|e| match e {
            EqError::Mp(inner) => inner,
            other => MpError::nonconvergent("coefficient solve", other.to_string()),
        })?;
        *cache.borrow_mut() = Some((x.to_vec(), m.clone()));
        Ok(m)
    };
    let mut tight = ctx.clone();
    tight.newton_tol = crate::mpnum::pow10(-((3 * ctx.digits / 4) as i32) + 4);
    tight.newton_max_iter = 60;
    let x = newton_solve(
        |x| {
            let m = eval(x)?;
            Ok(vec![Float::with_val(p, &m.u - t), Float::with_val(p, &m.v - t)])
        },
        |x| Ok(jacobian(&eval(x)?, &x[0])),
        &[guess.0.clone(), guess.1.clone()],
        &tight,
    )?;
    let mut it = x.into_iter();
    Ok((it.next().expect("c1"), it.next().expect("c0")))
}

/// Solves `(c₁/2πi)∮V'(J) = t` and `(1/2πi)∮V'(J)/(s−½) = t` for
/// `(c₁, c₀)` by Newton's method. The initial guess `(t, t/2)` is exact
/// for `V = x²/2`; if it fails, the solution at `t/2` is used as the
/// starting point.
pub fn solve_coefficients(v: &Potential, t: &Float, ctx: &PrecisionContext) -> Result<(Float, Float), EqError> {
    if *t <= 0 || !t.is_finite() {
        return Err(EqError::InvalidParameter(format!("t = {} must be positive", t.to_f64())));
    }
    let ve = v.at_prec(ctx.prec());
    let t = Float::with_val(ctx.prec(), t);
    solve_continued(&ve, &t, ctx, 0)
}

fn solve_continued(ve: &PotentialEval, t: &Float, ctx: &PrecisionContext, depth: u32) -> Result<(Float, Float), EqError> {
    let p = ctx.prec();
    let half_t = Float::with_val(p, t / 2u32);
    match solve_from(ve, t, (t, &half_t), ctx) {
        Ok(sol) => Ok(sol),
        Err(e) if depth >= 12 => Err(e),
        Err(_) => {
            let (c1, c0) = solve_continued(ve, &half_t, ctx, depth + 1)?;
            // c1 and c0 scale roughly linearly in t along the path
            let g1 = Float::with_val(p, &c1 * 2u32);
            let g0 = Float::with_val(p, &c0 * 2u32);
            solve_from(ve, t, (&g1, &g0), ctx).or_else(|_| solve_from(ve, t, (&c1, &c0), ctx))
        }
    }
}

/// Edge constants `(α, β)` of the normalised density from the contour
/// integrals `P`, `Q`.
pub(crate) fn alpha_beta(p_: &Float, q_: &Float, s_b: &Float, t: &Float) -> (Float, Float) {
    let p = s_b.prec();
    let pi = Float::with_val(p, rug::float::Constant::Pi);
    let denom = pi * Float::with_val(p, s_b.sqrt_ref()) * t;
    let lo = Float::with_val(p, 0.5f64 - s_b.clone());
    let hi = Float::with_val(p, s_b.clone() + 0.5f64);
    let alpha = (Float::with_val(p, &lo * p_) + Float::with_val(p, &hi * q_)) / &denom;
    let beta = (Float::with_val(p, &hi * p_) + Float::with_val(p, &lo * q_)) / &denom;
    (alpha, beta)
}

/// `(c₁', c₀')` from implicit differentiation of the coefficient equations.
pub(crate) fn coefficient_derivatives(p_: &Float, q_: &Float, c1: &Float) -> (Float, Float) {
    let p = c1.prec();
    let pq = Float::with_val(p, p_ - q_);
    let det = Float::with_val(p, p_ * q_) - Float::with_val(p, pq.square_ref()) / c1;
    let dc1 = Float::with_val(p, q_ / &det);
    let dc0 = (Float::with_val(p, q_ / 2u32) - Float::with_val(p, &pq / c1)) / &det;
    (dc1, dc0)
}
