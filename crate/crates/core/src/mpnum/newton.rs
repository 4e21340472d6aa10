//! Newton iterations for real systems and single complex equations.

use rug::Float;

use super::{solve_dense, Cpx, Matrix, MpError, PrecisionContext};

fn sup_norm(v: &[Float]) -> Float {
    let prec = v.first().map_or(64, Float::prec);
    v.iter()
        .fold(Float::new(prec), |m, x| m.max(&Float::with_val(prec, x.abs_ref())))
}

/// Newton's method for `F(x) = 0` in `k` real unknowns with an explicit
/// Jacobian. Stops once `‖F(x)‖∞ ≤ newton_tol`.
pub fn newton_solve<F, J>(mut f: F, mut jac: J, x0: &[Float], ctx: &PrecisionContext) -> Result<Vec<Float>, MpError>
where
    F: FnMut(&[Float]) -> Result<Vec<Float>, MpError>,
    J: FnMut(&[Float]) -> Result<Matrix, MpError>,
{
    let prec = ctx.prec();
    let mut x: Vec<Float> = x0.iter().map(|v| Float::with_val(prec, v)).collect();
    let mut fx = f(&x)?;
    for _ in 0..ctx.newton_max_iter {
        if sup_norm(&fx) <= ctx.newton_tol {
            return Ok(x);
        }
        let jx = jac(&x)?;
        let neg: Vec<Float> = fx.iter().map(|v| Float::with_val(prec, -v)).collect();
        let step = solve_dense(&jx, &neg).map_err(|_| MpError::SingularJacobian)?;
        if step.iter().any(|s| !s.is_finite()) {
            return Err(MpError::SingularJacobian);
        }
        for (xi, si) in x.iter_mut().zip(&step) {
            *xi += si;
        }
        fx = f(&x)?;
    }
    if sup_norm(&fx) <= ctx.newton_tol {
        return Ok(x);
    }
    Err(MpError::nonconvergent(
        "Newton iteration",
        format!("residual {:.3e} after {} steps", sup_norm(&fx).to_f64(), ctx.newton_max_iter),
    ))
}

/// Newton's method for one complex equation. `f` returns the value and the
/// derivative; steps that increase `|F|` are halved up to 30 times.
pub fn complex_newton<F>(mut f: F, z0: &Cpx, ctx: &PrecisionContext) -> Result<Cpx, MpError>
where
    F: FnMut(&Cpx) -> Result<(Cpx, Cpx), MpError>,
{
    let prec = ctx.prec();
    let mut z = z0.clone();
    z.set_prec(prec);
    let (mut fz, mut dz) = f(&z)?;
    let mut res = fz.abs();
    for _ in 0..ctx.newton_max_iter {
        if res <= ctx.newton_tol {
            return Ok(z);
        }
        if dz.norm_sqr().is_zero() {
            return Err(MpError::SingularJacobian);
        }
        let mut step = &fz / &dz;
        let mut accepted = false;
        for _ in 0..30 {
            let trial = &z - &step;
            match f(&trial) {
                Ok((ft, dt)) if ft.is_finite() => {
                    let rt = ft.abs();
                    if rt < res {
                        z = trial;
                        fz = ft;
                        dz = dt;
                        res = rt;
                        accepted = true;
                        break;
                    }
                }
                _ => {}
            }
            step = step.scale(&Float::with_val(prec, 0.5));
        }
        if !accepted {
            break;
        }
    }
    if res <= ctx.newton_tol {
        return Ok(z);
    }
    Err(MpError::nonconvergent(
        "complex Newton iteration",
        format!("residual {:.3e}", res.to_f64()),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(40).unwrap()
    }

    #[test]
    fn scalar_square_root() {
        let c = ctx();
        let p = c.prec();
        let x = newton_solve(
            |x| Ok(vec![Float::with_val(p, x[0].square_ref()) - 2u32]),
            |x| Ok(Matrix::from_rows(vec![vec![Float::with_val(p, &x[0] * 2u32)]])),
            &[Float::with_val(p, 1)],
            &c,
        )
        .unwrap();
        let err = Float::with_val(p, &x[0] - Float::with_val(p, 2).sqrt()).abs();
        assert!(err < 1e-30);
    }

    #[test]
    fn linear_system_in_one_step() {
        let c = ctx();
        let p = c.prec();
        let x = newton_solve(
            |x| {
                Ok(vec![
                    Float::with_val(p, &x[0] + &x[1]) - 3u32,
                    Float::with_val(p, &x[0] - &x[1]) - 1u32,
                ])
            },
            |_| Ok(Matrix::from_f64(p, &[&[1.0, 1.0], &[1.0, -1.0]])),
            &[Float::new(p), Float::new(p)],
            &c,
        )
        .unwrap();
        assert_eq!(x[0], 2);
        assert_eq!(x[1], 1);
    }

    // bisection oracle for the fixed point of cos
    fn cos_fixed_point() -> f64 {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid - mid.cos() > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn cosine_fixed_point() {
        let c = ctx();
        let p = c.prec();
        let x = newton_solve(
            |x| Ok(vec![Float::with_val(p, &x[0] - Float::with_val(p, x[0].cos_ref()))]),
            |x| Ok(Matrix::from_rows(vec![vec![Float::with_val(p, x[0].sin_ref()) + 1u32]])),
            &[Float::with_val(p, 1)],
            &c,
        )
        .unwrap();
        let oracle = cos_fixed_point();
        assert!((x[0].to_f64() - oracle).abs() < 1e-15);
        assert!((oracle - 0.7390851332).abs() < 1e-10);
    }

    #[test]
    fn singular_jacobian_detected() {
        let c = ctx();
        let p = c.prec();
        let r = newton_solve(
            |x| Ok(vec![Float::with_val(p, x[0].square_ref()) + 1u32]),
            |_| Ok(Matrix::zeros(1, 1, p)),
            &[Float::new(p)],
            &c,
        );
        assert_eq!(r, Err(MpError::SingularJacobian));
    }

    #[test]
    fn complex_examples() {
        let c = ctx();
        let p = c.prec();
        let one = Cpx::with_val(p, 1.0, 0.0);
        let z = complex_newton(
            |z| Ok((&(z * z) + &one, z.scale(&Float::with_val(p, 2)))),
            &Cpx::with_val(p, 0.0, 0.5),
            &c,
        )
        .unwrap();
        assert!((z.re.to_f64()).abs() < 1e-30 && (z.im.to_f64() - 1.0).abs() < 1e-30);

        let z = complex_newton(|z| Ok((&z.exp() - &one, z.exp())), &Cpx::with_val(p, 0.1, 0.0), &c).unwrap();
        assert!(z.abs() < 1e-30);

        // real cube root of 2 as the oracle
        let two = Cpx::with_val(p, 2.0, 0.0);
        let z = complex_newton(
            |z| Ok((&z.powu(3) - &two, z.powu(2).scale(&Float::with_val(p, 3)))),
            &Cpx::with_val(p, 1.0, 0.1),
            &c,
        )
        .unwrap();
        let cbrt = Float::with_val(p, 2).cbrt();
        assert!(Float::with_val(p, &z.re - &cbrt).abs() < 1e-30 && z.im.clone().abs() < 1e-30);
    }
}
