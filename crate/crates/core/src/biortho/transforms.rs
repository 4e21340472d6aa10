use rug::Float;

use super::{poly, BiorthoError, BiorthoSystem};
use crate::equilibrium::{Equilibrium, EquilibriumData, Potential};
use crate::mpnum::{Cpx, MpError, PrecisionContext};

/// `Cq_j(z) = (i/2π) ∫ q_j(eˢ) e^{−nV(s)} / (z − s) ds` for `z` off the
/// real line, on the system's quadrature grid with step halving until
/// two levels agree relative to `∫|q_j(eˢ)| w / |z − s|`.
pub fn cauchy_transform_q(sys: &BiorthoSystem, j: usize, z: &Cpx) -> Result<Cpx, BiorthoError> {
    if j > sys.max_degree() {
        return Err(BiorthoError::InvalidParameter(format!("degree {j} exceeds {}", sys.max_degree())));
    }
    if z.im.is_zero() {
        return Err(BiorthoError::InvalidParameter("z must lie off the real axis".into()));
    }
    let prec = sys.prec();
    let ctx = sys.context();
    let mut z = z.clone();
    z.set_prec(prec);
    let coeffs = sys.q_coeffs(j);
    let mut steps = sys.steps();
    let mut previous: Option<Cpx> = None;
    for _ in 0..=ctx.max_panel_doublings {
        let grid = sys.grid(steps, false);
        let mut sum = Cpx::zero(prec);
        let mut mag = Float::new(prec);
        for k in 0..grid.len() {
            let f = Float::with_val(prec, poly::eval(coeffs, &grid.exps[k]) * &grid.weights[k]);
            let d = z.add_real(&Float::with_val(prec, -&grid.nodes[k]));
            let r = d.recip();
            mag += Float::with_val(prec, f.abs_ref()) * r.abs();
            sum = &sum + &r.scale(&f);
        }
        if let Some(prev) = &previous {
            let diff = (&sum - prev).abs();
            if diff <= mag * &ctx.quad_rel_tol {
                let factor = Float::with_val(prec, 2u32) * ctx.pi();
                let i_over = Cpx::new(Float::new(prec), factor.recip());
                return Ok(&i_over * &sum);
            }
        }
        previous = Some(sum);
        steps *= 2;
    }
    Err(MpError::nonconvergent("Cauchy transform", format!("no agreement after {} step halvings", ctx.max_panel_doublings)).into())
}

/// `(p̃_j(x), q̃_j(x))` with `p̃_j = e^{−(j/2)ℓ_t} e^{−nV/2} p_j` and
/// `q̃_j = e^{(j/2)ℓ_t} e^{−nV/2} q_j(eˣ) / h_j`, where `eq` is the
/// equilibrium data at `t = j/n`. For `j = 0` the data is not used.
pub fn conjugated_pair(sys: &BiorthoSystem, eq: &EquilibriumData, j: usize, x: &Float) -> Result<(Float, Float), BiorthoError> {
    if j > sys.max_degree() {
        return Err(BiorthoError::InvalidParameter(format!("degree {j} exceeds {}", sys.max_degree())));
    }
    let prec = sys.prec();
    let log_gamma = if j == 0 {
        Float::new(prec)
    } else {
        let t = Float::with_val(prec, j as u32) / sys.n();
        let off = Float::with_val(prec, &eq.t - &t).abs();
        if off > 1e-12 {
            return Err(BiorthoError::InvalidParameter(format!(
                "equilibrium data is for t = {}, degree {j} needs t = {}",
                eq.t.to_f64(),
                t.to_f64()
            )));
        }
        Float::with_val(prec, &eq.ell * j as u32) / 2u32
    };
    Ok(pair(sys, j, x, &log_gamma))
}

fn pair(sys: &BiorthoSystem, j: usize, x: &Float, log_gamma: &Float) -> (Float, Float) {
    let prec = sys.prec();
    let hw = sys.half_weight(x);
    let g = Float::with_val(prec, log_gamma.exp_ref());
    let pt = Float::with_val(prec, sys.p(j, x) * &hw) / &g;
    let qt = Float::with_val(prec, sys.q_exp(j, x) * &hw) * &g / sys.h(j);
    (pt, qt)
}

/// Degree-dependent gauge `γ_j = e^{(j/2)ℓ_{j/n}}` stored as `log γ_j`.
/// Degrees that were not solved are absent.
#[derive(Clone, Debug, PartialEq)]
pub struct Gauge {
    n: u32,
    log_gamma: Vec<Option<Float>>,
}

impl Gauge {
    /// Solves the equilibrium problem at `t = j/n` for every requested
    /// degree. `ctx` may be cheaper than the system's context; `γ` enters
    /// gauge-invariant quantities only through cancelling pairs.
    pub fn solve(v: &Potential, n: u32, degrees: &[usize], ctx: &PrecisionContext, nodes: usize) -> Result<Self, BiorthoError> {
        let top = degrees.iter().copied().max().unwrap_or(0);
        let mut log_gamma = vec![None; top + 1];
        for &j in degrees {
            if j == 0 {
                log_gamma[0] = Some(Float::new(ctx.prec()));
                continue;
            }
            let t = Float::with_val(ctx.prec(), j as u32) / n;
            let eq = Equilibrium::solve_with_nodes(v, &t, ctx, nodes)?;
            log_gamma[j] = Some(Float::with_val(ctx.prec(), &eq.data.ell * j as u32) / 2u32);
        }
        Ok(Gauge { n, log_gamma })
    }

    /// `γ_j = 1` for `j ≤ m`.
    pub fn unit(n: u32, m: usize) -> Self {
        Gauge {
            n,
            log_gamma: vec![Some(Float::new(64)); m + 1],
        }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn log_gamma(&self, j: usize) -> Result<&Float, BiorthoError> {
        self.log_gamma
            .get(j)
            .and_then(|g| g.as_ref())
            .ok_or_else(|| BiorthoError::InvalidParameter(format!("gauge not solved for degree {j}")))
    }

    pub fn pair(&self, sys: &BiorthoSystem, j: usize, x: &Float) -> Result<(Float, Float), BiorthoError> {
        let lg = Float::with_val(sys.prec(), self.log_gamma(j)?);
        Ok(pair(sys, j, x, &lg))
    }

    /// `p̃_j(x)` for `j ∈ lo..=hi`.
    pub fn p_tilde_range(&self, sys: &BiorthoSystem, lo: usize, hi: usize, x: &Float) -> Result<Vec<Float>, BiorthoError> {
        let prec = sys.prec();
        let hw = sys.half_weight(x);
        let xs = Float::with_val(prec, x);
        (lo..=hi)
            .map(|j| {
                let g = Float::with_val(prec, self.log_gamma(j)?.exp_ref());
                Ok(Float::with_val(prec, poly::eval(sys.p_coeffs(j), &xs) * &hw) / g)
            })
            .collect()
    }

    /// `q̃_j(x)` for `j ∈ lo..=hi`.
    pub fn q_tilde_range(&self, sys: &BiorthoSystem, lo: usize, hi: usize, x: &Float) -> Result<Vec<Float>, BiorthoError> {
        let prec = sys.prec();
        let hw = sys.half_weight(x);
        let y = Float::with_val(prec, x.exp_ref());
        (lo..=hi)
            .map(|j| {
                let g = Float::with_val(prec, self.log_gamma(j)?.exp_ref());
                Ok(Float::with_val(prec, poly::eval(sys.q_coeffs(j), &y) * &hw) * g / sys.h(j))
            })
            .collect()
    }

    /// Complex versions of the two ranges.
    pub fn tilde_range_c(&self, sys: &BiorthoSystem, lo: usize, hi: usize, z: &Cpx) -> Result<(Vec<Cpx>, Vec<Cpx>), BiorthoError> {
        let prec = sys.prec();
        let hw = sys.half_weight_c(z);
        let mut zs = z.clone();
        zs.set_prec(prec);
        let ez = zs.exp();
        let mut ps = Vec::with_capacity(hi + 1 - lo);
        let mut qs = Vec::with_capacity(hi + 1 - lo);
        for j in lo..=hi {
            let g = Float::with_val(prec, self.log_gamma(j)?.exp_ref());
            let p = &poly::eval_c(sys.p_coeffs(j), &zs) * &hw;
            ps.push(p.scale(&g.clone().recip()));
            let q = &poly::eval_c(sys.q_coeffs(j), &ez) * &hw;
            qs.push(q.scale(&(g / sys.h(j))));
        }
        Ok((ps, qs))
    }
}
