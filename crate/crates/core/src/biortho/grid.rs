use rayon::prelude::*;
use rug::Float;

use super::BiorthoError;
use crate::equilibrium::{Potential, PotentialEval};
use crate::mpnum::RealInterval;

/// `[x₋, x₊]` outside of which every integrand `x^i e^{jx} e^{−nV(x)}` with
/// `i, j ≤ m` stays below `10^-(digits+10)` times the peak of `e^{−nV}`.
///
/// The envelope `m·max(x, 0) + m·log max(1, |x|) − nV(x)` dominates all of
/// the integrands; its level crossings are found by bisection in `f64`.
pub fn support_window(v: &Potential, n: u32, m: usize, digits: u32) -> (f64, f64) {
    let c: Vec<f64> = v.coeffs().iter().map(|r| r.to_f64()).collect();
    let vf = |x: f64| c.iter().rev().fold(0.0, |acc, k| acc * x + k);
    let x_min = v.argmin_shifted(&Float::new(64), 64).to_f64();
    let nf = n as f64;
    let mf = m as f64;
    let envelope = |x: f64| mf * x.max(0.0) + mf * x.abs().max(1.0).ln() - nf * vf(x);
    let level = -nf * vf(x_min) - (digits as f64 + 10.0) * std::f64::consts::LN_10;
    let crossing = |dir: f64| {
        let mut inner = x_min;
        let mut step = 1.0;
        let mut outer = x_min + dir * step;
        while envelope(outer) >= level {
            inner = outer;
            step *= 2.0;
            outer = x_min + dir * step;
        }
        for _ in 0..80 {
            let mid = 0.5 * (inner + outer);
            if envelope(mid) >= level {
                inner = mid;
            } else {
                outer = mid;
            }
        }
        outer
    };
    (crossing(-1.0), crossing(1.0))
}

/// Trapezoid nodes on the window with the weight `e^{−nV}` folded into
/// the quadrature weights. The integrands met here are entire and decay
/// like `e^{−nV}`, so the rule converges super-exponentially in the step.
/// The shifted variant uses the midpoints and serves as an independent
/// check at the same resolution.
#[derive(Clone, Debug)]
pub(crate) struct WeightedGrid {
    pub nodes: Vec<Float>,
    pub weights: Vec<Float>,
    pub exps: Vec<Float>,
}

/// Starting step count for a window of the given width.
pub(crate) fn initial_steps(width: f64, n: u32) -> usize {
    ((width * (n as f64).sqrt() * 2.0).ceil() as usize).max(16)
}

impl WeightedGrid {
    pub fn new(window: &RealInterval, steps: usize, shifted: bool, ve: &PotentialEval, n: u32) -> Self {
        let p = ve.prec();
        let h = window.width() / steps as u32;
        let count = if shifted { steps } else { steps + 1 };
        let built: Vec<(Float, Float, Float)> = (0..count)
            .into_par_iter()
            .map(|k| {
                let mut x = Float::with_val(p, &h * k as u32) + &window.lo;
                if shifted {
                    x += Float::with_val(p, &h / 2u32);
                }
                let nv = ve.v(&x) * n;
                let weight = Float::with_val(p, (-nv).exp_ref()) * &h;
                let e = Float::with_val(p, x.exp_ref());
                (x, weight, e)
            })
            .collect();
        let mut nodes = Vec::with_capacity(built.len());
        let mut weights = Vec::with_capacity(built.len());
        let mut exps = Vec::with_capacity(built.len());
        for (x, w, e) in built {
            nodes.push(x);
            weights.push(w);
            exps.push(e);
        }
        WeightedGrid { nodes, weights, exps }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// `Σ_q w_q a_i(x_q) b_j(x_q)` for all `i < rows`, `j < cols`, with
    /// the per-node vectors produced by `fa` and `fb`.
    pub fn outer_sums<A, B>(&self, rows: usize, cols: usize, fa: A, fb: B) -> Vec<Vec<Float>>
    where
        A: Fn(usize) -> Vec<Float> + Sync,
        B: Fn(usize) -> Vec<Float> + Sync,
    {
        let p = self.nodes.first().map(|x| x.prec()).unwrap_or(64);
        let zero = || vec![vec![Float::new(p); cols]; rows];
        let chunk = (self.len() / (4 * rayon::current_num_threads()).max(1)).max(8);
        let idx: Vec<usize> = (0..self.len()).collect();
        idx.par_chunks(chunk)
            .map(|ks| {
                let mut acc = zero();
                for &k in ks {
                    let mut a = fa(k);
                    for v in a.iter_mut() {
                        *v *= &self.weights[k];
                    }
                    let b = fb(k);
                    for (row, ai) in acc.iter_mut().zip(&a) {
                        for (cell, bj) in row.iter_mut().zip(&b) {
                            *cell += ai * bj;
                        }
                    }
                }
                acc
            })
            .reduce(zero, |mut x, y| {
                for (rx, ry) in x.iter_mut().zip(&y) {
                    for (cx, cy) in rx.iter_mut().zip(ry) {
                        *cx += cy;
                    }
                }
                x
            })
    }
}

/// `[1, x, …, x^k]`.
pub(crate) fn powers(x: &Float, k: usize) -> Vec<Float> {
    let mut out = Vec::with_capacity(k + 1);
    out.push(Float::with_val(x.prec(), 1u32));
    for i in 1..=k {
        let next = Float::with_val(x.prec(), &out[i - 1] * x);
        out.push(next);
    }
    out
}

pub(crate) fn window_interval(lo: f64, hi: f64, prec: u32) -> Result<RealInterval, BiorthoError> {
    Ok(RealInterval::from_f64(prec, lo, hi)?)
}
