//! Adaptive quadrature at configurable precision.

use rug::float::Constant;
use rug::Float;

use super::{agrees, Cpx, MpError, PrecisionContext, RealInterval};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendreRule {
    nodes: Vec<Float>,
    weights: Vec<Float>,
}

impl GaussLegendreRule {
    /// Nodes are the roots of `P_order`, polished by Newton's method from
    /// the usual asymptotic guesses.
    pub fn new(order: usize, prec: u32) -> Self {
        assert!(order >= 1, "Gauss-Legendre order must be positive");
        let mut nodes = Vec::with_capacity(order);
        let mut weights = Vec::with_capacity(order);
        let half = order.div_ceil(2);
        let target = Float::with_val(prec, Float::i_exp(1, -(prec as i32) + 4));
        for i in 0..half {
            let guess = (std::f64::consts::PI * (i as f64 + 0.75) / (order as f64 + 0.5)).cos();
            let mut x = Float::with_val(prec, guess);
            let mut dp = Float::new(prec);
            for _ in 0..200 {
                let (p, d) = legendre_with_derivative(order, &x);
                let step = Float::with_val(prec, &p / &d);
                x -= &step;
                dp = d;
                if step.abs() <= target {
                    let (_, d) = legendre_with_derivative(order, &x);
                    dp = d;
                    break;
                }
            }
            let one_minus = Float::with_val(prec, 1u32) - Float::with_val(prec, x.square_ref());
            let w = Float::with_val(prec, 2u32) / (one_minus * Float::with_val(prec, dp.square_ref()));
            nodes.push(x);
            weights.push(w);
        }
        // mirror to the negative half; the middle node of odd orders is 0
        let mut all_nodes = Vec::with_capacity(order);
        let mut all_weights = Vec::with_capacity(order);
        for i in 0..half {
            if order % 2 == 1 && i == half - 1 {
                continue;
            }
            all_nodes.push(Float::with_val(prec, -&nodes[i]));
            all_weights.push(weights[i].clone());
        }
        for i in (0..half).rev() {
            if order % 2 == 1 && i == half - 1 {
                all_nodes.push(Float::new(prec));
            } else {
                all_nodes.push(nodes[i].clone());
            }
            all_weights.push(weights[i].clone());
        }
        GaussLegendreRule {
            nodes: all_nodes,
            weights: all_weights,
        }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[Float] {
        &self.nodes
    }

    pub fn weights(&self) -> &[Float] {
        &self.weights
    }

    /// Physical nodes and weights for `panels` equal panels of `iv`.
    pub fn composite(&self, iv: &RealInterval, panels: usize) -> Vec<(Float, Float)> {
        let prec = self.nodes.first().map(|x| x.prec()).unwrap_or(64);
        let width = Float::with_val(prec, &iv.hi - &iv.lo) / panels as u32;
        let half = Float::with_val(prec, &width / 2u32);
        let mut out = Vec::with_capacity(panels * self.order());
        for k in 0..panels {
            let lo = Float::with_val(prec, &iv.lo + Float::with_val(prec, &width * k as u32));
            let mid = Float::with_val(prec, &lo + &half);
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                let node = Float::with_val(prec, &mid + Float::with_val(prec, &half * x));
                out.push((node, Float::with_val(prec, w * &half)));
            }
        }
        out
    }
}

fn legendre_with_derivative(order: usize, x: &Float) -> (Float, Float) {
    let prec = x.prec();
    let mut p0 = Float::with_val(prec, 1u32);
    let mut p1 = x.clone();
    for k in 2..=order {
        // k P_k = (2k-1) x P_{k-1} - (k-1) P_{k-2}
        let mut pk = Float::with_val(prec, x * &p1) * (2 * k - 1) as u32;
        pk -= Float::with_val(prec, &p0 * (k - 1) as u32);
        pk /= k as u32;
        p0 = p1;
        p1 = pk;
    }
    if order == 1 {
        return (x.clone(), Float::with_val(prec, 1u32));
    }
    // (1 - x^2) P_n' = n (P_{n-1} - x P_n)
    let num = (p0 - Float::with_val(prec, x * &p1)) * order as u32;
    let den = Float::with_val(prec, 1u32) - Float::with_val(prec, x.square_ref());
    (p1, num / den)
}

fn gl_order(ctx: &PrecisionContext) -> usize {
    ((ctx.digits / 3) as usize).clamp(16, 160)
}

/// Composite Gauss–Legendre quadrature with panel doubling.
pub fn integrate_gauss_legendre<F>(mut f: F, iv: &RealInterval, ctx: &PrecisionContext) -> Result<Float, MpError>
where
    F: FnMut(&Float) -> Float,
{
    let out = integrate_gauss_legendre_vec(|x| vec![f(x)], iv, ctx)?;
    Ok(out.into_iter().next().expect("one component"))
}

/// Vector-valued variant: every component must meet the agreement test.
pub fn integrate_gauss_legendre_vec<F>(
    mut f: F,
    iv: &RealInterval,
    ctx: &PrecisionContext,
) -> Result<Vec<Float>, MpError>
where
    F: FnMut(&Float) -> Vec<Float>,
{
    let prec = ctx.prec();
    let rule = GaussLegendreRule::new(gl_order(ctx), prec);
    let mut previous: Option<Vec<Float>> = None;
    let mut panels = 1usize;
    for _ in 0..=ctx.max_panel_doublings {
        let mut acc: Vec<Float> = Vec::new();
        for (x, w) in rule.composite(iv, panels) {
            let vals = f(&x);
            if acc.is_empty() {
                acc = vec![Float::new(prec); vals.len()];
            }
            for (a, v) in acc.iter_mut().zip(&vals) {
                if !v.is_finite() {
                    return Err(MpError::nonconvergent(
                        "Gauss-Legendre quadrature",
                        format!("non-finite integrand at x = {:.6e}", x.to_f64()),
                    ));
                }
                *a += Float::with_val(prec, v * &w);
            }
        }
        if let Some(prev) = &previous {
            if acc.iter().zip(prev).all(|(n, o)| agrees(n, o, &ctx.quad_rel_tol)) {
                return Ok(acc);
            }
        }
        previous = Some(acc);
        panels *= 2;
    }
    Err(MpError::nonconvergent(
        "Gauss-Legendre quadrature",
        format!("no agreement after {} panel doublings", ctx.max_panel_doublings),
    ))
}

/// Double-exponential (tanh-sinh) quadrature; tolerates integrable
/// singularities at the interval ends.
pub fn integrate_tanh_sinh<F>(mut f: F, iv: &RealInterval, ctx: &PrecisionContext) -> Result<Float, MpError>
where
    F: FnMut(&Float) -> Float,
{
    let prec = ctx.prec();
    let half_pi = Float::with_val(prec, Constant::Pi) / 2u32;
    let radius = Float::with_val(prec, &iv.hi - &iv.lo) / 2u32;

    // Truncate once the endpoint distance falls to about 2^(-2·prec)·r, which
    // keeps the tails of x^(-1/2)-type singularities below the tolerance.
    // Nodes that round onto an endpoint are skipped.
    let u_max = prec as f64 * std::f64::consts::LN_2 + 1.0;
    let t_max = (2.0 * u_max / std::f64::consts::PI).asinh();

    // Contribution of the symmetric node pair at parameter t.
    let mut pair = |t: &Float| -> Result<Float, MpError> {
        let u = Float::with_val(prec, t.sinh_ref()) * &half_pi;
        let cosh_u = Float::with_val(prec, u.cosh_ref());
        // distance of both nodes to their endpoint: r (1 - tanh u) = r e^{-u} / cosh u
        let dist = Float::with_val(prec, (-u.clone()).exp()) / &cosh_u * &radius;
        let w = Float::with_val(prec, t.cosh_ref()) * &half_pi / Float::with_val(prec, cosh_u.square_ref());
        let mut s = Float::new(prec);
        if t.is_zero() {
            let x = Float::with_val(prec, &iv.lo + &radius);
            let v = f(&x);
            check_finite(&v, &x)?;
            s += v;
        } else {
            let right = Float::with_val(prec, &iv.hi - &dist);
            let left = Float::with_val(prec, &iv.lo + &dist);
            for x in [left, right] {
                if x <= iv.lo || x >= iv.hi {
                    continue;
                }
                let v = f(&x);
                check_finite(&v, &x)?;
                s += v;
            }
        }
        Ok(s * w)
    };

    let mut sum = Float::new(prec);
    let mut h = Float::with_val(prec, 1u32);
    // level 0: t = 0, ±1, ±2, ...
    let mut k = 0u32;
    while (k as f64) <= t_max {
        let t = Float::with_val(prec, k);
        sum += pair(&t)?;
        k += 1;
    }
    let mut estimate = Float::with_val(prec, &sum * &h) * &radius;
    for level in 1..=ctx.max_panel_doublings {
        h /= 2u32;
        let steps = (t_max / h.to_f64()).ceil() as u64;
        let mut j = 1u64;
        while j <= steps {
            let t = Float::with_val(prec, &h * j);
            sum += pair(&t)?;
            j += 2;
        }
        let next = Float::with_val(prec, &sum * &h) * &radius;
        if level >= 3 && agrees(&next, &estimate, &ctx.quad_rel_tol) {
            return Ok(next);
        }
        estimate = next;
    }
    Err(MpError::nonconvergent(
        "tanh-sinh quadrature",
        format!("no agreement after {} levels", ctx.max_panel_doublings),
    ))
}

fn check_finite(v: &Float, x: &Float) -> Result<(), MpError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(MpError::nonconvergent(
            "tanh-sinh quadrature",
            format!("non-finite integrand at x = {:.6e}", x.to_f64()),
        ))
    }
}

/// `(1/2πi) ∮_{|s|=radius} g(s) ds` by the trapezoidal rule with node
/// doubling.
pub fn integrate_circle<G>(mut g: G, radius: &Float, ctx: &PrecisionContext) -> Result<Cpx, MpError>
where
    G: FnMut(&Cpx) -> Cpx,
{
    let out = integrate_circle_vec(|s| vec![g(s)], radius, ctx)?;
    Ok(out.into_iter().next().expect("one component"))
}

/// Vector-valued contour integral sharing the nodes between components.
pub fn integrate_circle_vec<G>(mut g: G, radius: &Float, ctx: &PrecisionContext) -> Result<Vec<Cpx>, MpError>
where
    G: FnMut(&Cpx) -> Vec<Cpx>,
{
    if *radius <= 0.5 {
        return Err(MpError::InvalidArgument(format!(
            "contour radius {} must exceed 1/2",
            radius.to_f64()
        )));
    }
    let prec = ctx.prec();
    let two_pi = Float::with_val(prec, Constant::Pi) * 2u32;
    let node = |k: u64, n: u64| -> Cpx {
        let theta = Float::with_val(prec, &two_pi * k) / n;
        let (s, c) = theta.sin_cos(Float::new(prec));
        Cpx::new(c * radius, s * radius)
    };
    // sums of g(s_k) s_k
    let mut sums: Vec<Cpx> = Vec::new();
    let mut accumulate = |sums: &mut Vec<Cpx>, s: &Cpx| -> Result<(), MpError> {
        let vals = g(s);
        if sums.is_empty() {
            *sums = vec![Cpx::zero(prec); vals.len()];
        }
        for (acc, v) in sums.iter_mut().zip(vals) {
            let term = &v * s;
            if !term.is_finite() {
                return Err(MpError::nonconvergent(
                    "circle quadrature",
                    "non-finite integrand on the contour",
                ));
            }
            *acc = &*acc + &term;
        }
        Ok(())
    };
    let mut n: u64 = 16;
    for k in 0..n {
        accumulate(&mut sums, &node(k, n))?;
    }
    let mut previous: Vec<Cpx> = sums.iter().map(|v| v.scale(&Float::with_val(prec, n).recip())).collect();
    for _ in 0..=ctx.max_panel_doublings {
        let m = 2 * n;
        let mut k = 1;
        while k < m {
            accumulate(&mut sums, &node(k, m))?;
            k += 2;
        }
        n = m;
        let inv_n = Float::with_val(prec, n).recip();
        let current: Vec<Cpx> = sums.iter().map(|v| v.scale(&inv_n)).collect();
        let converged = current.iter().zip(&previous).all(|(c, p)| {
            let diff = (c - p).abs();
            diff <= (c.abs() + 1u32) * &ctx.quad_rel_tol
        });
        if converged {
            return Ok(current);
        }
        previous = current;
    }
    Err(MpError::nonconvergent(
        "circle quadrature",
        format!("no agreement with {} nodes", n),
    ))
}
