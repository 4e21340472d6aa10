use rug::{Float, Integer, Rational};

use super::EqError;
use crate::mpnum::Cpx;

/// Strongly convex polynomial external field with exact rational
/// coefficients (ascending degree).
#[derive(Clone, Debug, PartialEq)]
pub struct Potential {
    coeffs: Vec<Rational>,
    convexity_floor: f64,
}

impl Potential {
    pub fn new(coeffs: Vec<Rational>) -> Result<Self, EqError> {
        let mut coeffs = coeffs;
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| *c == 0) {
            coeffs.pop();
        }
        let degree = coeffs.len().saturating_sub(1);
        if degree < 2 || degree % 2 == 1 {
            return Err(EqError::NonConvex(format!(
                "degree must be even and at least 2, got {degree}"
            )));
        }
        if coeffs[degree] <= 0 {
            return Err(EqError::NonConvex("leading coefficient must be positive".into()));
        }
        let floor = second_derivative_floor(&coeffs);
        if !(floor > 0.0) {
            return Err(EqError::NonConvex(format!(
                "convexity violated: min V'' = {floor:.6e} is not positive"
            )));
        }
        Ok(Potential {
            coeffs,
            convexity_floor: floor,
        })
    }

    /// Parses decimal strings such as `"0.5"`, `"-1.25e-2"` or `"1/20"`.
    pub fn from_decimal_strs<S: AsRef<str>>(coeffs: &[S]) -> Result<Self, EqError> {
        let parsed = coeffs
            .iter()
            .map(|s| {
                parse_decimal(s.as_ref())
                    .ok_or_else(|| EqError::InvalidParameter(format!("bad coefficient {:?}", s.as_ref())))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Potential::new(parsed)
    }

    /// `V(x) = x²/2`.
    pub fn quadratic() -> Self {
        Potential::new(vec![Rational::new(), Rational::new(), Rational::from((1, 2))]).expect("x^2/2 is convex")
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn convexity_floor(&self) -> f64 {
        self.convexity_floor
    }

    /// Coefficients rendered as exact decimal or fraction strings.
    pub fn coeff_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(rational_to_string).collect()
    }

    /// `V(−x) + shift·x`.
    pub fn reflected(&self, shift: &Rational) -> Potential {
        let mut coeffs: Vec<Rational> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| if k % 2 == 1 { Rational::from(-c) } else { c.clone() })
            .collect();
        coeffs[1] += shift;
        // V'' is unchanged up to x -> -x, so the floor carries over
        Potential {
            coeffs,
            convexity_floor: self.convexity_floor,
        }
    }

    /// Floating-point evaluator at precision `prec`.
    pub fn at_prec(&self, prec: u32) -> PotentialEval {
        let c: Vec<Float> = self.coeffs.iter().map(|r| Float::with_val(prec, r)).collect();
        let d1: Vec<Float> = c
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, v)| Float::with_val(prec, v * k as u32))
            .collect();
        let d2: Vec<Float> = d1
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, v)| Float::with_val(prec, v * k as u32))
            .collect();
        PotentialEval { prec, c, d1, d2 }
    }

    /// Unique minimiser of `V(x) − t·x`.
    pub fn argmin_shifted(&self, t: &Float, prec: u32) -> Float {
        let ev = self.at_prec(prec);
        // V' is strictly increasing; bracket V'(x) = t and polish by Newton
        let mut lo = Float::with_val(prec, -1);
        let mut hi = Float::with_val(prec, 1);
        while ev.dv(&lo) > *t {
            lo *= 2u32;
        }
        while ev.dv(&hi) < *t {
            hi *= 2u32;
        }
        let mut x = Float::with_val(prec, &lo + &hi) / 2u32;
        let eps = Float::with_val(prec, Float::i_exp(1, -(prec as i32) + 8));
        for _ in 0..(4 * prec) {
            let f = Float::with_val(prec, ev.dv(&x) - t);
            if f.is_zero() {
                break;
            }
            if f > 0 {
                hi = x.clone();
            } else {
                lo = x.clone();
            }
            let step = f / ev.d2v(&x);
            let cand = Float::with_val(prec, &x - &step);
            let next = if cand > lo && cand < hi {
                cand
            } else {
                Float::with_val(prec, &lo + &hi) / 2u32
            };
            let moved = Float::with_val(prec, &next - &x).abs();
            x = next;
            if moved <= Float::with_val(prec, x.abs_ref()).max(&Float::with_val(prec, 1)) * &eps {
                break;
            }
        }
        x
    }
}

/// `V`, `V'` and `V''` at a fixed precision.
#[derive(Clone, Debug)]
pub struct PotentialEval {
    prec: u32,
    c: Vec<Float>,
    d1: Vec<Float>,
    d2: Vec<Float>,
}

fn horner(coeffs: &[Float], x: &Float, prec: u32) -> Float {
    let mut acc = Float::new(prec);
    for c in coeffs.iter().rev() {
        acc *= x;
        acc += c;
    }
    acc
}

fn horner_c(coeffs: &[Float], z: &Cpx, prec: u32) -> Cpx {
    let mut acc = Cpx::zero(prec);
    for c in coeffs.iter().rev() {
        acc = (&acc * z).add_real(c);
    }
    acc
}

impl PotentialEval {
    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn degree(&self) -> usize {
        self.c.len() - 1
    }

    pub fn v(&self, x: &Float) -> Float {
        horner(&self.c, x, self.prec)
    }

    pub fn dv(&self, x: &Float) -> Float {
        horner(&self.d1, x, self.prec)
    }

    pub fn d2v(&self, x: &Float) -> Float {
        horner(&self.d2, x, self.prec)
    }

    pub fn v_c(&self, z: &Cpx) -> Cpx {
        horner_c(&self.c, z, self.prec)
    }

    pub fn dv_c(&self, z: &Cpx) -> Cpx {
        horner_c(&self.d1, z, self.prec)
    }

    pub fn d2v_c(&self, z: &Cpx) -> Cpx {
        horner_c(&self.d2, z, self.prec)
    }
}

fn second_derivative_floor(coeffs: &[Rational]) -> f64 {
    let d2: Vec<f64> = coeffs
        .iter()
        .enumerate()
        .skip(2)
        .map(|(k, c)| c.to_f64() * (k * (k - 1)) as f64)
        .collect();
    let eval = |x: f64| d2.iter().rev().fold(0.0, |acc, c| acc * x + c);
    if d2.len() == 1 {
        return d2[0];
    }
    // the minimum sits at a root of V''', inside its Cauchy bound
    let d3: Vec<f64> = d2.iter().enumerate().skip(1).map(|(k, c)| c * k as f64).collect();
    let lead = d3.last().copied().unwrap_or(1.0).abs();
    let bound = 1.0 + d3[..d3.len() - 1].iter().fold(0.0f64, |m, c| m.max(c.abs() / lead));
    let steps = 4000;
    let mut best = (0.0, f64::INFINITY);
    for i in 0..=steps {
        let x = -bound + 2.0 * bound * i as f64 / steps as f64;
        let v = eval(x);
        if v < best.1 {
            best = (x, v);
        }
    }
    // golden-section refinement around the best grid point
    let h = 2.0 * bound / steps as f64;
    let (mut lo, mut hi) = (best.0 - h, best.0 + h);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let m1 = hi - g * (hi - lo);
        let m2 = lo + g * (hi - lo);
        if eval(m1) < eval(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let refined = eval(0.5 * (lo + hi)).min(best.1);
    refined * (1.0 - 1e-9)
}

/// Exact parse of a decimal literal (optional sign, fraction, exponent) or
/// of a fraction `p/q`.
pub fn parse_decimal(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: Integer = p.trim().parse().ok()?;
        let q: Integer = q.trim().parse().ok()?;
        if q == 0 {
            return None;
        }
        return Some(Rational::from((p, q)));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all = format!("{int_part}{frac_part}");
    let mut num: Integer = if all.is_empty() { Integer::new() } else { all.parse().ok()? };
    if neg {
        num = -num;
    }
    let scale = exp - frac_part.len() as i32;
    let r = if scale >= 0 {
        Rational::from(num * Integer::from(Integer::u_pow_u(10, scale as u32)))
    } else {
        Rational::from((num, Integer::from(Integer::u_pow_u(10, (-scale) as u32))))
    };
    Some(r)
}

/// Exact decimal rendering when the denominator divides a power of ten,
/// otherwise `p/q`.
pub fn rational_to_string(r: &Rational) -> String {
    let mut den = r.denom().clone();
    let mut twos = 0u32;
    let mut fives = 0u32;
    while den.is_divisible_u(2) {
        den /= 2;
        twos += 1;
    }
    while den.is_divisible_u(5) {
        den /= 5;
        fives += 1;
    }
    if den != 1 {
        return format!("{}/{}", r.numer(), r.denom());
    }
    let k = twos.max(fives);
    if k == 0 {
        return r.numer().to_string();
    }
    let scaled = Integer::from(r.numer() * Integer::from(Integer::u_pow_u(10, k))) / r.denom().clone();
    let neg = scaled < 0;
    let digits = Integer::from(scaled.abs_ref()).to_string();
    let padded = format!("{:0>width$}", digits, width = k as usize + 1);
    let (ip, fp) = padded.split_at(padded.len() - k as usize);
    let fp = fp.trim_end_matches('0');
    let sign = if neg { "-" } else { "" };
    if fp.is_empty() {
        format!("{sign}{ip}")
    } else {
        format!("{sign}{ip}.{fp}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_parsing_is_exact() {
        assert_eq!(parse_decimal("0.05"), Some(Rational::from((1, 20))));
        assert_eq!(parse_decimal("-1.25e-2"), Some(Rational::from((-1, 80))));
        assert_eq!(parse_decimal("3"), Some(Rational::from(3)));
        assert_eq!(parse_decimal("1/3"), Some(Rational::from((1, 3))));
        assert_eq!(parse_decimal("2e3"), Some(Rational::from(2000)));
        assert_eq!(parse_decimal("x"), None);
        for s in ["0.05", "-1.25", "7", "1/3", "0.5"] {
            assert_eq!(rational_to_string(&parse_decimal(s).unwrap()), s);
        }
    }

    #[test]
    fn validation() {
        assert!(Potential::from_decimal_strs(&["0", "0", "-0.5"]).is_err());
        assert!(Potential::from_decimal_strs(&["0", "0", "0", "1"]).is_err());
        // x^4 - x^2 is not convex near 0
        let e = Potential::from_decimal_strs(&["0", "0", "-1", "0", "1"]).unwrap_err();
        assert!(e.to_string().contains("convexity"));
        let v = Potential::from_decimal_strs(&["0", "0", "0.5", "0", "0.05"]).unwrap();
        assert!((v.convexity_floor() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn reflection_is_an_involution() {
        let v = Potential::from_decimal_strs(&["0.1", "0.3", "0.5", "0.02", "0.05"]).unwrap();
        let shift = Rational::from((31, 32));
        let twice = v.reflected(&shift).reflected(&shift);
        assert_eq!(twice.coeffs(), v.coeffs());
        assert_eq!(v.reflected(&shift).convexity_floor(), v.convexity_floor());
    }

    #[test]
    fn shifted_minimiser() {
        let v = Potential::quadratic();
        let p = 200;
        assert_eq!(v.argmin_shifted(&Float::with_val(p, 0), p), 0);
        let x = v.argmin_shifted(&Float::with_val(p, 0.75), p);
        assert!((x.to_f64() - 0.75).abs() < 1e-50);
    }
}
