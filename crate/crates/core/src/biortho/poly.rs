use rug::Float;

use crate::mpnum::Cpx;

/// `Σ c_k x^k` by Horner's rule.
pub fn eval(coeffs: &[Float], x: &Float) -> Float {
    let p = x.prec();
    let mut acc = Float::new(p);
    for c in coeffs.iter().rev() {
        acc *= x;
        acc += c;
    }
    acc
}

/// Value and derivative.
pub fn eval_with_derivative(coeffs: &[Float], x: &Float) -> (Float, Float) {
    let p = x.prec();
    let mut v = Float::new(p);
    let mut d = Float::new(p);
    for c in coeffs.iter().rev() {
        d *= x;
        d += &v;
        v *= x;
        v += c;
    }
    (v, d)
}

pub fn eval_c(coeffs: &[Float], z: &Cpx) -> Cpx {
    let mut acc = Cpx::zero(z.prec());
    for c in coeffs.iter().rev() {
        acc = (&acc * z).add_real(c);
    }
    acc
}

/// Coefficients of `x ↦ P(c + r x)`.
pub fn shift_scale(coeffs: &[Float], c: &Float, r: &Float) -> Vec<Float> {
    let p = c.prec();
    let mut b: Vec<Float> = coeffs.iter().map(|v| Float::with_val(p, v)).collect();
    let deg = b.len() - 1;
    for i in 0..deg {
        for k in (i..deg).rev() {
            let add = Float::with_val(p, &b[k + 1] * c);
            b[k] += add;
        }
    }
    let mut rk = Float::with_val(p, 1u32);
    for v in b.iter_mut() {
        *v *= &rk;
        rk *= r;
    }
    b
}
