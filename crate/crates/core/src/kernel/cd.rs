use rug::Float;

use super::{conjugation_factor_c, exp_truncated, exp_truncated_c, kernel_raw_c, require_degree, require_t_one, KernelError};
use crate::biortho::{BiorthoSystem, Gauge};
use crate::equilibrium::{Equilibrium, EquilibriumData};
use crate::mpnum::{Cpx, MpError};

/// Expansion coefficients of `eˣ q̃_j` in the `q̃_k` and of
/// `exp_d(x) p̃_j` in the `p̃_k`, with `d = ⌊δn⌋`.
///
/// Entries are stored in the unit gauge (`γ ≡ 1`); [`CdDiagnostics::a`]
/// and [`CdDiagnostics::b`] rescale by `γ_j/γ_k` or `γ_k/γ_j` for the
/// attached gauge. The limits [`alpha_limit`] refer to the unit gauge:
/// with `γ_j = e^{(j/2)ℓ_{j/n}}` the ratio `γ_{n−1}/γ_n` does not tend
/// to 1 (for `V = x²/2`, `a_{n−1,n} → e^{1/2}` rather than `e`).
#[derive(Clone, Debug)]
pub struct CdDiagnostics {
    pub n: u32,
    pub delta: f64,
    /// `⌊δn⌋`.
    pub d: usize,
    /// Highest degree covered: both matrices are `(m+1) × (m+1)`.
    pub m: usize,
    /// `a_raw[j][k] = ∫ p_k q_j(eˣ) eˣ w / h_j`.
    pub a_raw: Vec<Vec<Float>>,
    /// `b_raw[j][k] = ∫ p_j q_k(eˣ) exp_d(x) w / h_k`.
    pub b_raw: Vec<Vec<Float>>,
    /// Largest disagreement between the node and midpoint rules.
    pub quad_error: Float,
    pub gauge: Gauge,
}

impl CdDiagnostics {
    fn ratio(&self, num: usize, den: usize) -> Result<Float, KernelError> {
        let p = self.a_raw[0][0].prec();
        let lg = Float::with_val(p, self.gauge.log_gamma(num)?) - Float::with_val(p, self.gauge.log_gamma(den)?);
        Ok(lg.exp())
    }

    fn check(&self, j: usize, k: usize) -> Result<(), KernelError> {
        if j > self.m || k > self.m {
            return Err(KernelError::InvalidParameter(format!("({j}, {k}) outside 0..={}", self.m)));
        }
        Ok(())
    }

    /// `a_{j,k} = ∫ p̃_k q̃_j eˣ dx`.
    pub fn a(&self, j: usize, k: usize) -> Result<Float, KernelError> {
        self.check(j, k)?;
        Ok(self.ratio(j, k)? * &self.a_raw[j][k])
    }

    /// `b_{j,k} = ∫ p̃_j q̃_k exp_d(x) dx`.
    pub fn b(&self, j: usize, k: usize) -> Result<Float, KernelError> {
        self.check(j, k)?;
        Ok(self.ratio(k, j)? * &self.b_raw[j][k])
    }
}

/// All `a_{j,k}`, `b_{j,k}` with `j, k ≤ max_degree` from one pass over the
/// system's grid, checked against the midpoint rule at
/// `10^{−digits/3}` relative to `1 + |entry|`, doubling the step count
/// until they agree.
pub fn cd_coefficients(sys: &BiorthoSystem, gauge: Gauge, delta: f64) -> Result<CdDiagnostics, KernelError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(KernelError::InvalidParameter(format!("δ must lie in (0, 1), got {delta}")));
    }
    if gauge.n() != sys.n() {
        return Err(KernelError::InvalidParameter(format!("gauge for n = {} used with n = {}", gauge.n(), sys.n())));
    }
    let n = sys.n();
    let d = (delta * n as f64).floor() as usize;
    let m = sys.max_degree();
    require_degree(sys, n as usize)?;
    let prec = sys.prec();
    let ctx = sys.context();
    let tol = ctx.pow10(-((ctx.digits / 3) as i32));

    let pass = |steps: usize, shifted: bool| {
        let grid = sys.grid(steps, shifted);
        let sums = grid.outer_sums(
            2 * (m + 1),
            m + 1,
            |k| {
                let x = &grid.nodes[k];
                let ps = sys.p_all(x);
                let ed = exp_truncated(d, x);
                let mut out: Vec<Float> = ps.iter().map(|p| Float::with_val(prec, p * &grid.exps[k])).collect();
                out.extend(ps.iter().map(|p| Float::with_val(prec, p * &ed)));
                out
            },
            |k| sys.q_exp_all(&grid.nodes[k]),
        );
        let a: Vec<Vec<Float>> = (0..=m)
            .map(|j| (0..=m).map(|k| Float::with_val(prec, &sums[k][j] / sys.h(j))).collect())
            .collect();
        let b: Vec<Vec<Float>> = (0..=m)
            .map(|j| (0..=m).map(|k| Float::with_val(prec, &sums[m + 1 + j][k] / sys.h(k))).collect())
            .collect();
        (a, b)
    };

    let mut steps = sys.steps();
    for _ in 0..=ctx.max_panel_doublings {
        let (a0, b0) = pass(steps, false);
        let (a1, b1) = pass(steps, true);
        let mut worst = Float::new(prec);
        let mut ok = true;
        for (x0, x1) in a0.iter().flatten().zip(a1.iter().flatten()).chain(b0.iter().flatten().zip(b1.iter().flatten())) {
            let diff = Float::with_val(prec, x0 - x1).abs();
            let bound = Float::with_val(prec, x0.abs_ref()) + 1u32;
            if diff > Float::with_val(prec, &bound * &tol) {
                ok = false;
            }
            if diff > worst {
                worst = diff;
            }
        }
        if ok {
            let avg = |x: Vec<Vec<Float>>, y: Vec<Vec<Float>>| -> Vec<Vec<Float>> {
                x.into_iter()
                    .zip(y)
                    .map(|(r, s)| r.into_iter().zip(s).map(|(u, v)| (u + v) / 2u32).collect())
                    .collect()
            };
            return Ok(CdDiagnostics {
                n,
                delta,
                d,
                m,
                a_raw: avg(a0, a1),
                b_raw: avg(b0, b1),
                quad_error: worst,
                gauge,
            });
        }
        steps *= 2;
    }
    Err(MpError::nonconvergent("expansion coefficients", format!("no agreement after {} step doublings", ctx.max_panel_doublings)).into())
}

/// Both sides of
/// `(exp_d(u) − eᵛ) K_n(u, v) = J1 + J2 − a_{n−1,n} p̃_{n−1}(u) q̃_n(v)`
/// and the truncated double sum that carries the main contribution.
/// All values are unconjugated; multiply by `conjugation` for
/// `e^{n(F(u)−F(v))}` times the value.
#[derive(Clone, Debug)]
pub struct CdTerms {
    pub j1: Cpx,
    pub j2: Cpx,
    /// `a_{n−1,n} p̃_{n−1}(u) q̃_n(v)`.
    pub correction: Cpx,
    /// `Σ_{j=n−M}^{n−1} Σ_{k=n}^{j+M} a_{k,j} p̃_k(u) q̃_j(v) − correction`.
    pub main_term: Cpx,
    /// `(exp_d(u) − eᵛ) K_n(u, v)`.
    pub lhs: Cpx,
    /// `|lhs − (J1 + J2 − correction)|`.
    pub residual: Float,
    pub conjugation: Cpx,
}

impl CdTerms {
    pub fn conjugated(&self, value: &Cpx) -> Cpx {
        value * &self.conjugation
    }
}

/// Evaluates [`CdTerms`] at complex `u`, `v` with the main-term window `M`.
/// The sums are gauge independent, so they are formed in the unit gauge.
pub fn cd_decomposition(sys: &BiorthoSystem, diag: &CdDiagnostics, eq: &Equilibrium, big_m: usize, u: &Cpx, v: &Cpx) -> Result<CdTerms, KernelError> {
    require_t_one(eq)?;
    let n = sys.n() as usize;
    if diag.n != sys.n() || diag.m != sys.max_degree() {
        return Err(KernelError::InvalidParameter("diagnostics were computed for another system".into()));
    }
    if big_m == 0 || big_m > n {
        return Err(KernelError::InvalidParameter(format!("M must lie in 1..={n}, got {big_m}")));
    }
    let d = diag.d;
    let top = n - 1 + d.max(big_m);
    require_degree(sys, top)?;
    let prec = sys.prec();
    let unit = Gauge::unit(sys.n(), top);
    let (pt, _) = unit.tilde_range_c(sys, 0, top, u)?;
    let (_, qv) = unit.tilde_range_c(sys, 0, top, v)?;
    let a = &diag.a_raw;
    let b = &diag.b_raw;
    let zero = || Cpx::zero(prec);
    let term = |c: &Float, j: usize, k: usize| (&pt[j] * &qv[k]).scale(c);

    let mut j1 = zero();
    for j in 0..n {
        for k in 0..n {
            let c = Float::with_val(prec, &b[k][j] - &a[j][k]);
            j1 = &j1 + &term(&c, j, k);
        }
    }
    let mut j2 = zero();
    for j in n.saturating_sub(d)..n {
        for k in n..=j + d {
            j2 = &j2 + &term(&b[j][k], k, j);
        }
    }
    let correction = term(&a[n - 1][n], n - 1, n);
    let mut main_term = zero();
    for j in n - big_m..n {
        for k in n..=j + big_m {
            main_term = &main_term + &term(&a[k][j], k, j);
        }
    }
    main_term = &main_term - &correction;

    let mut uu = u.clone();
    uu.set_prec(prec);
    let mut vv = v.clone();
    vv.set_prec(prec);
    let factor = &exp_truncated_c(d, &uu) - &vv.exp();
    let lhs = &factor * &kernel_raw_c(sys, &uu, &vv)?;
    let residual = (&lhs - &(&(&j1 + &j2) - &correction)).abs();
    let conjugation = conjugation_factor_c(sys, eq, &uu, &vv)?;
    Ok(CdTerms {
        j1,
        j2,
        correction,
        main_term,
        lhs,
        residual,
        conjugation,
    })
}

/// `α_l = (c1/(l+1)! + 1/l!) e^{c1/2 + c0}` for `l ≥ 0` and
/// `α_{−1} = c1 e^{c1/2 + c0}`: the large-`n` limit of `a_{n+j, n−k}`
/// with `j + k = l`, so `a_{n−1,n} → α_{−1}`.
pub fn alpha_limit(l: i32, data: &EquilibriumData) -> Result<Float, KernelError> {
    if l < -1 {
        return Err(KernelError::InvalidParameter(format!("α_l needs l ≥ −1, got {l}")));
    }
    let prec = data.c1.prec();
    let e = Float::with_val(prec, &data.c1 / 2u32) + &data.c0;
    let e = e.exp();
    if l == -1 {
        return Ok(Float::with_val(prec, &data.c1 * &e));
    }
    let l = l as u32;
    let fact = |k: u32| Float::with_val(prec, rug::Integer::from(rug::Integer::factorial(k)));
    let s = Float::with_val(prec, &data.c1 / fact(l + 1)) + fact(l).recip();
    Ok(s * e)
}
