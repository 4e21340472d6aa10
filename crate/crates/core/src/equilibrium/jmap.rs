use rug::Float;

use super::EqError;
use crate::mpnum::{complex_newton, Cpx, MpError, PrecisionContext};

/// Which boundary value of the inverse of `J` on the support.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    /// Upper half-plane, `I₊`.
    Plus,
    /// Lower half-plane, `I₋ = conj(I₊)`.
    Minus,
}

/// `J(s) = c₁s + c₀ − log((s−½)/(s+½))`, undefined on `[−½, ½]`.
pub fn map_j(c1: &Float, c0: &Float, s: &Cpx, ctx: &PrecisionContext) -> Result<Cpx, EqError> {
    let eps = ctx.pow10(-(ctx.digits as i32) + 8);
    let half = Float::with_val(ctx.prec(), 0.5) + &eps;
    if Float::with_val(ctx.prec(), s.im.abs_ref()) <= eps && Float::with_val(ctx.prec(), s.re.abs_ref()) <= half {
        return Err(EqError::OnBranchCut);
    }
    Ok(j_value(c1, c0, s))
}

pub(crate) fn j_value(c1: &Float, c0: &Float, s: &Cpx) -> Cpx {
    let p = s.prec();
    let half = Float::with_val(p, 0.5);
    let lm = s.add_real(&Float::with_val(p, -&half)).ln();
    let lp = s.add_real(&half).ln();
    // arg(s-1/2) - arg(s+1/2) stays in (-π, π) off the cut, so the
    // difference of logs is the principal log of the quotient
    (&s.scale(c1) - &(&lm - &lp)).add_real(c0)
}

/// `J'(s) = c₁ − 1/(s−½) + 1/(s+½)`.
pub(crate) fn j_prime(c1: &Float, s: &Cpx) -> Cpx {
    let p = s.prec();
    let half = Float::with_val(p, 0.5);
    let rm = s.add_real(&Float::with_val(p, -&half)).recip();
    let rp = s.add_real(&half).recip();
    (&rp - &rm).add_real(c1)
}

/// `s_b = √(¼ + 1/c₁)`, the positive zero of `J'`.
pub fn branch_point(c1: &Float) -> Float {
    let p = c1.prec();
    (Float::with_val(p, c1.recip_ref()) + 0.25f64).sqrt()
}

/// `J''(s_b) = 1/(s_b−½)² − 1/(s_b+½)²`, which is positive.
pub(crate) fn j_second_at_sb(s_b: &Float) -> Float {
    let p = s_b.prec();
    let m = Float::with_val(p, s_b - 0.5f64).square().recip();
    let q = Float::with_val(p, s_b + 0.5f64).square().recip();
    m - q
}

/// `(a, b) = (J(−s_b), J(s_b))`.
pub fn support_from_coefficients(c1: &Float, c0: &Float) -> (Float, Float, Float) {
    let p = c1.prec();
    let s_b = branch_point(c1);
    let lr = Float::with_val(p, Float::with_val(p, s_b.clone() - 0.5f64) / Float::with_val(p, s_b.clone() + 0.5f64)).ln();
    let cs = Float::with_val(p, c1 * &s_b);
    let b = Float::with_val(p, &cs + c0) - &lr;
    let a = Float::with_val(p, c0 - &cs) + &lr;
    (s_b, a, b)
}

const TRACE_POINTS: usize = 200;
const TRACE_PREC: u32 = 64;

/// Inverse of `J` on `[a, b]` with boundary values on the curve `γ₁`
/// joining `s_b` to `−s_b` in the upper half-plane.
///
/// Seeds come from a low-precision trace of `γ₁` parametrised by
/// `x = c + r cos θ`; near the endpoints the square-root expansion of `J`
/// is used instead.
#[derive(Clone, Debug)]
pub struct InverseMap {
    c1: Float,
    c0: Float,
    s_b: Float,
    a: Float,
    b: Float,
    jpp: Float,
    trace: Vec<Cpx>,
}

impl InverseMap {
    pub fn new(c1: &Float, c0: &Float) -> Result<Self, EqError> {
        let (s_b, a, b) = support_from_coefficients(c1, c0);
        let jpp = j_second_at_sb(&s_b);
        let mut map = InverseMap {
            c1: c1.clone(),
            c0: c0.clone(),
            s_b,
            a,
            b,
            jpp,
            trace: Vec::new(),
        };
        map.trace = map.build_trace()?;
        Ok(map)
    }

    pub fn support(&self) -> (&Float, &Float) {
        (&self.a, &self.b)
    }

    pub fn s_b(&self) -> &Float {
        &self.s_b
    }

    /// The low-precision trace of `γ₁`, from `s_b` to `−s_b`.
    pub fn trace(&self) -> &[Cpx] {
        &self.trace
    }

    fn theta_to_x(&self, theta: f64, prec: u32) -> Float {
        let p = prec;
        let c = Float::with_val(p, &self.a + &self.b) / 2u32;
        let r = Float::with_val(p, &self.b - &self.a) / 2u32;
        c + r * Float::with_val(p, theta).cos()
    }

    fn endpoint_seed(&self, x: &Float, right: bool, prec: u32) -> Cpx {
        let p = prec;
        let dist = if right {
            Float::with_val(p, &self.b - x)
        } else {
            Float::with_val(p, x - &self.a)
        };
        let im = (dist * 2u32 / &self.jpp).abs().sqrt();
        let re = if right {
            Float::with_val(p, &self.s_b)
        } else {
            Float::with_val(p, -&self.s_b)
        };
        Cpx::new(re, im)
    }

    fn polish(&self, x: &Float, seed: &Cpx, ctx: &PrecisionContext) -> Result<Cpx, MpError> {
        let p = ctx.prec();
        let c1 = Float::with_val(p, &self.c1);
        let c0 = Float::with_val(p, &self.c0);
        let x = Float::with_val(p, x);
        complex_newton(
            |s| {
                let f = j_value(&c1, &c0, s).add_real(&Float::with_val(p, -&x));
                Ok((f, j_prime(&c1, s)))
            },
            seed,
            ctx,
        )
    }

    fn build_trace(&self) -> Result<Vec<Cpx>, EqError> {
        let ctx = trace_context();
        let n = TRACE_POINTS;
        let h = std::f64::consts::PI / (n - 1) as f64;
        let mut out = Vec::with_capacity(n);
        out.push(Cpx::from_real(Float::with_val(TRACE_PREC, &self.s_b)));
        for j in 1..n - 1 {
            let x = self.theta_to_x(j as f64 * h, TRACE_PREC);
            let seed = if j == 1 {
                self.endpoint_seed(&x, true, TRACE_PREC)
            } else {
                let two = Float::with_val(TRACE_PREC, 2);
                &out[j - 1].scale(&two) - &out[j - 2]
            };
            let z = self.polish(&x, &seed, &ctx)?;
            if z.im <= 0 {
                return Err(EqError::BranchEscape);
            }
            out.push(z);
        }
        out.push(Cpx::from_real(Float::with_val(TRACE_PREC, -&self.s_b)));
        Ok(out)
    }

    /// Seed for `I₊(x)` from the trace.
    pub(crate) fn seed(&self, x: &Float, prec: u32) -> Cpx {
        let n = TRACE_POINTS;
        let h = std::f64::consts::PI / (n - 1) as f64;
        let c = 0.5 * (self.a.to_f64() + self.b.to_f64());
        let r = 0.5 * (self.b.to_f64() - self.a.to_f64());
        let theta = ((x.to_f64() - c) / r).clamp(-1.0, 1.0).acos();
        if theta < h {
            return self.endpoint_seed(x, true, prec);
        }
        if theta > std::f64::consts::PI - h {
            return self.endpoint_seed(x, false, prec);
        }
        let pos = theta / h;
        let j = (pos.floor() as usize).min(n - 2);
        let w = pos - j as f64;
        let (r0, i0) = self.trace[j].to_f64();
        let (r1, i1) = self.trace[j + 1].to_f64();
        Cpx::with_val(prec, r0 + w * (r1 - r0), i0 + w * (i1 - i0))
    }

    /// Other solutions of `J(s) = x` in the upper half-plane exist; the one
    /// on `γ₁` is the one close to the trace.
    fn near_trace(&self, x: &Float, z: &Cpx) -> bool {
        let (sr, si) = self.seed(x, TRACE_PREC).to_f64();
        let (zr, zi) = z.to_f64();
        let step = self.s_b.to_f64() * std::f64::consts::PI / (TRACE_POINTS - 1) as f64;
        ((zr - sr).powi(2) + (zi - si).powi(2)).sqrt() <= 2.0 * step
    }

    /// `I±(x)` for `x ∈ [a, b]`, with `J(I±(x)) = x` to about
    /// `10^-(digits-10)`.
    pub fn solve(&self, x: &Float, branch: Branch, ctx: &PrecisionContext) -> Result<Cpx, EqError> {
        let seed = self.seed(x, ctx.prec());
        self.solve_from(x, &seed, branch, ctx)
    }

    /// As [`InverseMap::solve`] but starting Newton from `seed`.
    pub(crate) fn solve_from(&self, x: &Float, seed: &Cpx, branch: Branch, ctx: &PrecisionContext) -> Result<Cpx, EqError> {
        let p = ctx.prec();
        if *x < self.a || *x > self.b {
            return Err(EqError::InvalidParameter(format!(
                "x = {:.6e} lies outside the support",
                x.to_f64()
            )));
        }
        let z = if *x == self.b {
            Cpx::from_real(Float::with_val(p, &self.s_b))
        } else if *x == self.a {
            Cpx::from_real(Float::with_val(p, -&self.s_b))
        } else {
            let tight = inverse_context(ctx);
            let z = self.polish(x, seed, &tight)?;
            if z.im <= 0 || !self.near_trace(x, &z) {
                return Err(EqError::BranchEscape);
            }
            z
        };
        Ok(match branch {
            Branch::Plus => z,
            Branch::Minus => z.conj(),
        })
    }
}

fn trace_context() -> PrecisionContext {
    PrecisionContext::new(32)
        .and_then(|c| c.with_newton_tol_exp10(-14))
        .expect("static trace context")
}

pub(crate) fn inverse_context(ctx: &PrecisionContext) -> PrecisionContext {
    let mut tight = ctx.clone();
    tight.newton_tol = crate::mpnum::pow10(-(ctx.digits as i32) + 10);
    tight
}

/// Convenience wrapper building the trace on every call.
pub fn inverse_map(c1: &Float, c0: &Float, x: &Float, branch: Branch, ctx: &PrecisionContext) -> Result<Cpx, EqError> {
    InverseMap::new(c1, c0)?.solve(x, branch, ctx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(40).unwrap()
    }

    #[test]
    fn branch_cut_is_rejected() {
        let c = ctx();
        let p = c.prec();
        let one = c.float(1);
        let r = map_j(&one, &one, &Cpx::with_val(p, 0.25, 0.0), &c);
        assert_eq!(r, Err(EqError::OnBranchCut));
        assert!(map_j(&one, &one, &Cpx::with_val(p, 0.25, 1e-3), &c).is_ok());
    }

    #[test]
    fn quadratic_support() {
        // c1 = 1, c0 = 1/2: s_b = √5/2 and b - a = 2(s_b + log((s_b+½)/(s_b-½)))
        let c = ctx();
        let (s_b, a, b) = support_from_coefficients(&c.float(1), &c.float(0.5));
        let sb = 5f64.sqrt() / 2.0;
        assert!((s_b.to_f64() - sb).abs() < 1e-15);
        let w = 2.0 * (sb + ((sb + 0.5) / (sb - 0.5)).ln());
        assert!(((b.to_f64() - a.to_f64()) - w).abs() < 1e-14);
        assert!(((a.to_f64() + b.to_f64()) / 2.0 - 0.5).abs() < 1e-15);
        assert!((a.to_f64() + 1.5804578).abs() < 1e-6);
        assert!((b.to_f64() - 2.5804578).abs() < 1e-6);
        // J'(s_b) = 0
        let jp = j_prime(&c.float(1), &Cpx::from_real(s_b));
        assert!(jp.abs() < 1e-40);
    }

    #[test]
    fn inverse_round_trip() {
        let c = ctx();
        let p = c.prec();
        let (c1, c0) = (c.float(1), c.float(0.5));
        let map = InverseMap::new(&c1, &c0).unwrap();
        let (a, b) = (map.support().0.to_f64(), map.support().1.to_f64());
        for frac in [1e-9, 1e-4, 0.01, 0.3, 0.5, 0.77, 0.999, 1.0 - 1e-7] {
            let x = c.float(a + frac * (b - a));
            let z = map.solve(&x, Branch::Plus, &c).unwrap();
            assert!(z.im > 0);
            let back = j_value(&c1, &c0, &z);
            let err = Float::with_val(p, &back.re - &x).abs() + back.im.clone().abs();
            assert!(err < 1e-28, "frac {frac}: {}", err.to_f64());
            let zm = map.solve(&x, Branch::Minus, &c).unwrap();
            assert_eq!(zm, z.conj());
        }
        let z = map.solve(map.support().1, Branch::Plus, &c).unwrap();
        assert_eq!(z.re, *map.s_b());
        assert!(map.solve(&c.float(b + 0.1), Branch::Plus, &c).is_err());
    }
}
