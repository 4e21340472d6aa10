//! Airy function from its Maclaurin series.

use rug::ops::Pow;
use rug::Float;

use super::PrecisionContext;

/// `(Ai(x), Ai'(x))` rounded to the context precision.
///
/// The two power series `f` and `g` with `Ai = c₁f − c₂g` grow like
/// `exp(⅔|x|^{3/2})` while `Ai` itself is O(1) or smaller, so the sum is
/// carried out with extra bits proportional to `|x|^{3/2}`.
pub fn airy(x: &Float, ctx: &PrecisionContext) -> (Float, Float) {
    let out_prec = ctx.prec();
    let ax = x.to_f64().abs();
    let boost = (4.0 / 3.0 * ax.powf(1.5) * std::f64::consts::LOG2_E).ceil() as u32 + 32;
    let wp = out_prec + boost;
    let x = Float::with_val(wp, x);
    let x3 = Float::with_val(wp, (&x).pow(3u32));

    let third = Float::with_val(wp, 1) / 3u32;
    let two_thirds = Float::with_val(wp, 2) / 3u32;
    // c1 = Ai(0) = 3^{-2/3}/Γ(2/3), c2 = -Ai'(0) = 3^{-1/3}/Γ(1/3)
    let three = Float::with_val(wp, 3);
    let c1 = Float::with_val(wp, (&three).pow(&-two_thirds.clone())) / Float::with_val(wp, two_thirds.gamma_ref());
    let c2 = Float::with_val(wp, (&three).pow(&-third.clone())) / Float::with_val(wp, third.gamma_ref());

    let eps = Float::with_val(wp, Float::i_exp(1, -(wp as i32)));
    let mut f = Float::with_val(wp, 1);
    let mut g = x.clone();
    let mut fp = Float::new(wp);
    let mut gp = Float::with_val(wp, 1);
    let mut tf = Float::with_val(wp, 1);
    let mut tg = x.clone();
    let mut tfp = Float::with_val(wp, x.square_ref()) / 2u32;
    let mut tgp = Float::with_val(wp, 1);
    fp += &tfp;
    let mut k: u32 = 0;
    loop {
        let k3 = 3 * k;
        tf *= &x3;
        tf /= (k3 + 2) * (k3 + 3);
        tg *= &x3;
        tg /= (k3 + 3) * (k3 + 4);
        tgp *= &x3;
        tgp /= (k3 + 1) * (k3 + 3);
        f += &tf;
        g += &tg;
        gp += &tgp;
        if k >= 1 {
            tfp *= &x3;
            tfp /= k3 * (k3 + 2);
            fp += &tfp;
        }
        k += 1;
        let scale = Float::with_val(wp, f.abs_ref()) + Float::with_val(wp, g.abs_ref()) + 1u32;
        let biggest = Float::with_val(wp, tf.abs_ref())
            .max(&Float::with_val(wp, tg.abs_ref()))
            .max(&Float::with_val(wp, tfp.abs_ref()))
            .max(&Float::with_val(wp, tgp.abs_ref()));
        if k > 2 && biggest <= scale * &eps {
            break;
        }
    }
    let ai = Float::with_val(wp, &c1 * &f) - Float::with_val(wp, &c2 * &g);
    let aip = Float::with_val(wp, &c1 * &fp) - Float::with_val(wp, &c2 * &gp);
    (Float::with_val(out_prec, ai), Float::with_val(out_prec, aip))
}

/// Airy kernel `(Ai(ξ)Ai'(η) − Ai'(ξ)Ai(η))/(ξ − η)`, with the diagonal
/// value `Ai'(ξ)² − ξAi(ξ)²` when `ξ = η`.
pub fn airy_kernel(xi: &Float, eta: &Float, ctx: &PrecisionContext) -> Float {
    let prec = ctx.prec();
    let (a1, d1) = airy(xi, ctx);
    if xi == eta {
        let d2 = Float::with_val(prec, d1.square_ref());
        let a2 = Float::with_val(prec, a1.square_ref()) * xi;
        return d2 - a2;
    }
    let (a2, d2) = airy(eta, ctx);
    let num = Float::with_val(prec, &a1 * &d2) - Float::with_val(prec, &d1 * &a2);
    num / Float::with_val(prec, xi - eta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(40).unwrap()
    }

    #[test]
    fn values_at_zero() {
        let c = ctx();
        let (ai, aip) = airy(&c.zero(), &c);
        assert!((ai.to_f64() - 0.3550280538878172).abs() < 1e-15);
        assert!((aip.to_f64() + 0.2588194037928068).abs() < 1e-15);
    }

    #[test]
    fn value_at_one_matches_doubled_precision() {
        let c = ctx();
        let x = c.float(1);
        let (ai, _) = airy(&x, &c);
        assert!((ai.to_f64() - 0.1352924163).abs() < 1e-10);
        let hi = PrecisionContext::new(80).unwrap();
        let (ai_hi, _) = airy(&hi.float(1), &hi);
        let diff = Float::with_val(hi.prec(), &ai_hi - &ai).abs();
        assert!(diff < 1e-38);
    }

    #[test]
    fn tabulated_values() {
        let c = ctx();
        for (x, ai, aip) in [
            (-5.0, 0.3507610090241142, 0.3271928185544435),
            (2.0, 0.03492413042327437, -0.05309038443365363),
            (-10.0, 0.04024123848644319, 0.9962650441327901),
        ] {
            let (a, d) = airy(&c.float(x), &c);
            assert!((a.to_f64() - ai).abs() < 1e-14, "Ai({x})");
            assert!((d.to_f64() - aip).abs() < 1e-13, "Ai'({x})");
        }
    }

    #[test]
    fn ode_residual() {
        let c = ctx();
        let p = c.prec();
        let h = c.pow10(-(c.digits as i32) / 4);
        for x in [-3.0, -0.7, 0.4, 2.5] {
            let x = c.float(x);
            let (a0, _) = airy(&x, &c);
            let (ap, _) = airy(&Float::with_val(p, &x + &h), &c);
            let (am, _) = airy(&Float::with_val(p, &x - &h), &c);
            let second = (ap + am - Float::with_val(p, &a0 * 2u32)) / Float::with_val(p, h.square_ref());
            let resid = (second - Float::with_val(p, &x * &a0)).abs();
            assert!(resid < c.pow10(-(c.digits as i32) / 2));
        }
    }

    #[test]
    fn kernel_diagonal() {
        let c = ctx();
        let k = airy_kernel(&c.zero(), &c.zero(), &c);
        assert!((k.to_f64() - 0.06698748).abs() < 1e-7);
        let near = airy_kernel(&c.float(0.5), &c.float(0.5 + 1e-12), &c);
        let diag = airy_kernel(&c.float(0.5), &c.float(0.5), &c);
        assert!((near.to_f64() - diag.to_f64()).abs() < 1e-10);
    }
}
