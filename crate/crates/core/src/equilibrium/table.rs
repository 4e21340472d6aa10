use rug::float::Constant;
use rug::Float;

use super::jmap::{j_prime, Branch, InverseMap};
use super::potential::PotentialEval;
use super::EqError;
use crate::mpnum::{Cpx, PrecisionContext};

/// Density sampled on a Chebyshev–Lobatto grid of the support together
/// with the quadrature data needed to integrate against it.
///
/// With `x = c + r cos θ` the boundary value `I₊(x)` extends to a smooth
/// periodic function of `θ` (`I₊` on `[0, π]`, `I₋` on `[−π, 0]`), and the
/// density becomes
/// `ψ(x(φ)) = −(1/2π²t) ∫_{−π}^{π} V''(x(θ)) r sin θ log|I(θ) − I(φ)| dθ`.
/// The logarithmic singularity is split off as `log|2 sin((θ−φ)/2)|`, whose
/// integral against the sine polynomial `V''(x(θ)) r sin θ` is exact; the
/// remainder is smooth and periodic, so the trapezoidal rule on the grid
/// converges geometrically.
#[derive(Clone, Debug)]
pub struct DensityTable {
    nodes: Vec<Float>,
    values: Vec<Float>,
    mass_check: Float,
    weights: Vec<Float>,
    cos_coeffs: Vec<Float>,
    h: Vec<Float>,
    z: Vec<Cpx>,
    a: Float,
    b: Float,
    center: Float,
    half_width: Float,
}

pub const DEFAULT_TABLE_NODES: usize = 512;

impl DensityTable {
    pub(crate) fn build(imap: &InverseMap, c1: &Float, t: &Float, ve: &PotentialEval, m: usize, ctx: &PrecisionContext) -> Result<Self, EqError> {
        if m < 8 {
            return Err(EqError::InvalidParameter(format!("density table needs at least 8 nodes, got {m}")));
        }
        let p = ctx.prec();
        let big_n = 2 * (m - 1);
        let (a, b) = imap.support();
        let a = Float::with_val(p, a);
        let b = Float::with_val(p, b);
        let center = Float::with_val(p, &a + &b) / 2u32;
        let r = Float::with_val(p, &b - &a) / 2u32;
        let pi = Float::with_val(p, Constant::Pi);
        let two_pi = Float::with_val(p, &pi * 2u32);

        let mut cs = Vec::with_capacity(big_n);
        let mut sn = Vec::with_capacity(big_n);
        for j in 0..big_n {
            let th = Float::with_val(p, &two_pi * j as u64) / big_n as u64;
            let (s, c) = th.sin_cos(Float::new(p));
            cs.push(c);
            sn.push(s);
        }
        let mut xs: Vec<Float> = (0..big_n)
            .map(|j| (Float::with_val(p, &r * &cs[j]) + &center).clamp(&a, &b))
            .collect();
        xs[0] = b.clone();

        // I₊ at the nodes on [0, π]
        let mut z: Vec<Cpx> = Vec::with_capacity(m);
        z.push(imap.solve(&xs[0], Branch::Plus, ctx)?);
        for k in 1..m - 1 {
            z.push(imap.solve(&xs[k], Branch::Plus, ctx)?);
        }
        z.push(imap.solve(&a, Branch::Plus, ctx)?);
        let zfull: Vec<Cpx> = (0..big_n).map(|j| if j < m { z[j].clone() } else { z[big_n - j].conj() }).collect();

        let w: Vec<Float> = (0..big_n).map(|j| ve.d2v(&xs[j]) * &r * &sn[j]).collect();
        let degree = ve.degree();
        let wq: Vec<Float> = (1..=degree.max(1))
            .map(|q| {
                let mut acc = Float::new(p);
                for j in 0..big_n {
                    acc += Float::with_val(p, &w[j] * &sn[(q * j) % big_n]);
                }
                acc * 2u32 / big_n as u64
            })
            .collect();
        let log_two_sin: Vec<Float> = (0..big_n)
            .map(|d| {
                if d == 0 {
                    return Float::new(p);
                }
                let arg = Float::with_val(p, &pi * d as u64) / big_n as u64;
                (arg.sin() * 2u32).abs().ln()
            })
            .collect();

        let scale = Float::with_val(p, &two_pi / big_n as u64);
        let pref = -(Float::with_val(p, pi.square_ref()) * 2u32 * t).recip();
        let mut values = vec![Float::new(p); m];
        for i in 1..m - 1 {
            let zi = &z[i];
            let dz = j_prime(c1, zi).recip().scale(&(-Float::with_val(p, &r * &sn[i])));
            let mut smooth = Float::new(p);
            for j in 0..big_n {
                let rij = if j == i {
                    Float::with_val(p, dz.norm_sqr().ln_ref()) / 2u32
                } else {
                    let d = &zfull[j] - zi;
                    let half_log = Float::with_val(p, d.norm_sqr().ln_ref()) / 2u32;
                    half_log - &log_two_sin[(j + big_n - i) % big_n]
                };
                smooth += rij * &w[j];
            }
            smooth *= &scale;
            let mut singular = Float::new(p);
            for (q0, wqv) in wq.iter().enumerate() {
                let q = q0 + 1;
                singular += Float::with_val(p, wqv * &sn[(q * i) % big_n]) / q as u64;
            }
            singular *= &pi;
            singular = -singular;
            values[i] = Float::with_val(p, &smooth + &singular) * &pref;
        }

        let weights: Vec<Float> = (0..m).map(|k| Float::with_val(p, &scale * &r) * &sn[k] * &values[k]).collect();
        let mass_check = weights.iter().fold(Float::new(p), |acc, w| acc + w);

        // cosine coefficients g_k of the even weight g(θ) with dμ = g dθ
        let cos_coeffs: Vec<Float> = (0..m - 1)
            .map(|k| {
                let mut acc = Float::new(p);
                for (kk, wk) in weights.iter().enumerate().take(m - 1).skip(1) {
                    acc += Float::with_val(p, wk * &cs[(k * kk) % big_n]);
                }
                acc / &pi
            })
            .collect();

        // h = ψ/√((x−a)(b−x)); endpoint limits from the sine series of ψ(θ)
        let mut h = vec![Float::new(p); m];
        for k in 1..m - 1 {
            h[k] = Float::with_val(p, &values[k] / &r) / &sn[k];
        }
        let mut right = Float::new(p);
        let mut left = Float::new(p);
        for q in 1..m - 1 {
            let mut sq = Float::new(p);
            for k in 1..m - 1 {
                sq += Float::with_val(p, &values[k] * &sn[(q * k) % big_n]);
            }
            sq = sq * 4u32 / big_n as u64;
            let term = sq * q as u64;
            if q % 2 == 1 {
                left += &term;
            } else {
                left -= &term;
            }
            right += term;
        }
        h[0] = right / &r;
        h[m - 1] = left / &r;

        Ok(DensityTable {
            nodes: xs[..m].to_vec(),
            values,
            mass_check,
            weights,
            cos_coeffs,
            h,
            z,
            a,
            b,
            center,
            half_width: r,
        })
    }

    /// Grid points `c + r cos(πk/(m−1))`, from `b` down to `a`.
    pub fn nodes(&self) -> &[Float] {
        &self.nodes
    }

    /// `ψ` at the grid points.
    pub fn values(&self) -> &[Float] {
        &self.values
    }

    /// `∫ψ` computed from the table.
    pub fn mass_check(&self) -> &Float {
        &self.mass_check
    }

    /// `I₊` at the grid points.
    pub fn inverse_values(&self) -> &[Cpx] {
        &self.z
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn prec(&self) -> u32 {
        self.center.prec()
    }

    /// `∫ f dμ` by the periodic trapezoidal rule.
    pub fn integrate<F: FnMut(&Float) -> Float>(&self, mut f: F) -> Float {
        let p = self.prec();
        let mut acc = Float::new(p);
        for (x, w) in self.nodes.iter().zip(&self.weights).skip(1).take(self.len() - 2) {
            acc += f(x) * w;
        }
        acc
    }

    pub fn integrate_c<F: FnMut(&Float) -> Cpx>(&self, mut f: F) -> Cpx {
        let p = self.prec();
        let mut acc = Cpx::zero(p);
        for (x, w) in self.nodes.iter().zip(&self.weights).skip(1).take(self.len() - 2) {
            acc = &acc + &f(x).scale(w);
        }
        acc
    }

    /// `ψ(x)` by barycentric interpolation of `ψ/√((x−a)(b−x))`; zero off
    /// the support.
    pub fn psi(&self, x: &Float) -> Float {
        let p = self.prec();
        if *x <= self.a || *x >= self.b {
            return Float::new(p);
        }
        let root = (Float::with_val(p, x - &self.a) * Float::with_val(p, &self.b - x)).sqrt();
        self.interpolate_h(x) * root
    }

    /// The smooth factor `ψ(x)/√((x−a)(b−x))`, including its endpoint limits.
    pub fn interpolate_h(&self, x: &Float) -> Float {
        let p = self.prec();
        let m = self.len();
        let mut num = Float::new(p);
        let mut den = Float::new(p);
        for k in 0..m {
            let d = Float::with_val(p, x - &self.nodes[k]);
            if d.is_zero() {
                return self.h[k].clone();
            }
            let mut wk = d.recip();
            if k == 0 || k == m - 1 {
                wk /= 2u32;
            }
            if k % 2 == 1 {
                wk = -wk;
            }
            num += Float::with_val(p, &wk * &self.h[k]);
            den += wk;
        }
        num / den
    }

    /// `∫ log|x − y| dμ(x)` for real `y`, from the cosine coefficients of
    /// the density in the angle variable.
    pub fn log_potential(&self, y: &Float) -> Float {
        let p = self.prec();
        let w = Float::with_val(p, y - &self.center) / &self.half_width;
        let base = Float::with_val(p, &self.half_width / 2u32).ln() * &self.mass_check;
        let pi2 = Float::with_val(p, Constant::Pi) * 2u32;
        let mut series = Float::new(p);
        let abs_w = Float::with_val(p, w.abs_ref());
        if abs_w <= 1 {
            // Chebyshev recurrence for cos(kφ), cos φ = w
            let mut prev = Float::with_val(p, 1);
            let mut cur = w.clone();
            for (k, gk) in self.cos_coeffs.iter().enumerate().skip(1) {
                series += Float::with_val(p, gk * &cur) / k as u64;
                let next = Float::with_val(p, &w * &cur) * 2u32 - &prev;
                prev = cur;
                cur = next;
            }
            base - series * pi2
        } else {
            let eta_exp = Float::with_val(p, &abs_w - (Float::with_val(p, abs_w.square_ref()) - 1u32).sqrt());
            let rho = if w < 0 { -eta_exp.clone() } else { eta_exp.clone() };
            let mut pow = rho.clone();
            for (k, gk) in self.cos_coeffs.iter().enumerate().skip(1) {
                series += Float::with_val(p, gk * &pow) / k as u64;
                pow *= &rho;
            }
            let eta = -eta_exp.ln();
            base + eta * &self.mass_check - series * pi2
        }
    }
}
