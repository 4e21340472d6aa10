use std::ops::{Add, Div, Mul, Neg, Sub};

use rug::Float;

/// Complex number with [`Float`] parts.
///
/// Both parts carry the same precision. Only the handful of operations the
/// crate needs are implemented; transcendental functions use principal
/// branches (argument in `(-π, π]`).
#[derive(Clone, Debug, PartialEq)]
pub struct Cpx {
    pub re: Float,
    pub im: Float,
}

impl Cpx {
    pub fn new(re: Float, im: Float) -> Self {
        Cpx { re, im }
    }

    pub fn with_val(prec: u32, re: f64, im: f64) -> Self {
        Cpx {
            re: Float::with_val(prec, re),
            im: Float::with_val(prec, im),
        }
    }

    pub fn zero(prec: u32) -> Self {
        Cpx {
            re: Float::new(prec),
            im: Float::new(prec),
        }
    }

    pub fn from_real(re: Float) -> Self {
        let im = Float::new(re.prec());
        Cpx { re, im }
    }

    pub fn i(prec: u32) -> Self {
        Cpx::with_val(prec, 0.0, 1.0)
    }

    pub fn prec(&self) -> u32 {
        self.re.prec()
    }

    pub fn conj(&self) -> Cpx {
        Cpx {
            re: self.re.clone(),
            im: Float::with_val(self.prec(), -&self.im),
        }
    }

    pub fn norm_sqr(&self) -> Float {
        let p = self.prec();
        Float::with_val(p, self.re.square_ref()) + Float::with_val(p, self.im.square_ref())
    }

    pub fn abs(&self) -> Float {
        Float::with_val(self.prec(), self.re.hypot_ref(&self.im))
    }

    /// Principal argument in `(-π, π]`.
    pub fn arg(&self) -> Float {
        Float::with_val(self.prec(), self.im.atan2_ref(&self.re))
    }

    pub fn ln(&self) -> Cpx {
        let p = self.prec();
        let modulus = self.abs();
        Cpx {
            re: Float::with_val(p, modulus.ln_ref()),
            im: self.arg(),
        }
    }

    pub fn exp(&self) -> Cpx {
        let p = self.prec();
        let r = Float::with_val(p, self.re.exp_ref());
        let (s, c) = self.im.clone().sin_cos(Float::new(p));
        Cpx {
            re: Float::with_val(p, &r * &c),
            im: r * s,
        }
    }

    /// Principal square root (branch cut along the negative reals).
    pub fn sqrt(&self) -> Cpx {
        let p = self.prec();
        if self.re.is_zero() && self.im.is_zero() {
            return Cpx::zero(p);
        }
        let modulus = self.abs();
        let mut re = Float::with_val(p, &modulus + &self.re);
        re /= 2u32;
        let mut re = re.sqrt();
        let mut im = Float::with_val(p, &modulus - &self.re);
        im /= 2u32;
        let mut im = im.sqrt();
        if self.im.is_sign_negative() {
            im = -im;
        }
        if re.is_zero() && im.is_zero() {
            re = Float::new(p);
            im = Float::new(p);
        }
        Cpx { re, im }
    }

    pub fn recip(&self) -> Cpx {
        let p = self.prec();
        let d = self.norm_sqr();
        Cpx {
            re: Float::with_val(p, &self.re / &d),
            im: Float::with_val(p, -&self.im) / d,
        }
    }

    pub fn scale(&self, k: &Float) -> Cpx {
        let p = self.prec();
        Cpx {
            re: Float::with_val(p, &self.re * k),
            im: Float::with_val(p, &self.im * k),
        }
    }

    pub fn add_real(&self, k: &Float) -> Cpx {
        Cpx {
            re: Float::with_val(self.prec(), &self.re + k),
            im: self.im.clone(),
        }
    }

    pub fn powu(&self, k: u32) -> Cpx {
        let mut acc = Cpx::from_real(Float::with_val(self.prec(), 1));
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }

    pub fn set_prec(&mut self, prec: u32) {
        self.re.set_prec(prec);
        self.im.set_prec(prec);
    }
}

impl Add for &Cpx {
    type Output = Cpx;
    fn add(self, rhs: &Cpx) -> Cpx {
        let p = self.prec();
        Cpx {
            re: Float::with_val(p, &self.re + &rhs.re),
            im: Float::with_val(p, &self.im + &rhs.im),
        }
    }
}

impl Sub for &Cpx {
    type Output = Cpx;
    fn sub(self, rhs: &Cpx) -> Cpx {
        let p = self.prec();
        Cpx {
            re: Float::with_val(p, &self.re - &rhs.re),
            im: Float::with_val(p, &self.im - &rhs.im),
        }
    }
}

impl Mul for &Cpx {
    type Output = Cpx;
    fn mul(self, rhs: &Cpx) -> Cpx {
        let p = self.prec();
        let rr = Float::with_val(p, &self.re * &rhs.re);
        let ii = Float::with_val(p, &self.im * &rhs.im);
        let ri = Float::with_val(p, &self.re * &rhs.im);
        let ir = Float::with_val(p, &self.im * &rhs.re);
        Cpx {
            re: rr - ii,
            im: ri + ir,
        }
    }
}

impl Div for &Cpx {
    type Output = Cpx;
    fn div(self, rhs: &Cpx) -> Cpx {
        self * &rhs.recip()
    }
}

impl Neg for &Cpx {
    type Output = Cpx;
    fn neg(self) -> Cpx {
        let p = self.prec();
        Cpx {
            re: Float::with_val(p, -&self.re),
            im: Float::with_val(p, -&self.im),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Cpx {
            type Output = Cpx;
            fn $m(self, rhs: Cpx) -> Cpx {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Cpx> for Cpx {
            type Output = Cpx;
            fn $m(self, rhs: &Cpx) -> Cpx {
                (&self).$m(rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &Cpx, re: f64, im: f64) -> bool {
        (a.re.to_f64() - re).abs() < 1e-14 && (a.im.to_f64() - im).abs() < 1e-14
    }

    #[test]
    fn arithmetic_and_branches() {
        let p = 128;
        let z = Cpx::with_val(p, 3.0, -4.0);
        assert_eq!(z.abs().to_f64(), 5.0);
        assert!(close(&(&z * &z.recip()), 1.0, 0.0));
        assert!(close(&z.sqrt(), 2.0, -1.0));
        // principal log of a negative real has argument +π
        let neg = Cpx::with_val(p, -1.0, 0.0);
        assert!(close(&neg.ln(), 0.0, std::f64::consts::PI));
        let w = Cpx::with_val(p, 0.3, 1.1);
        assert!(close(&w.ln().exp(), 0.3, 1.1));
        assert!(close(&w.powu(3), (&(&w * &w) * &w).re.to_f64(), (&(&w * &w) * &w).im.to_f64()));
    }
}
