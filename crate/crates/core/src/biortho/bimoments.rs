use rug::Float;

use super::grid::{initial_steps, powers, support_window, window_interval, WeightedGrid};
use super::BiorthoError;
use crate::equilibrium::Potential;
use crate::mpnum::{ldu_bidiagonalize, Ldu, Matrix, MpError, PrecisionContext, RealInterval};

/// `M[i][j] = ∫ x^i e^{jx} e^{−nV(x)} dx` for `0 ≤ i, j ≤ m`.
#[derive(Clone, Debug)]
pub struct BimomentMatrix {
    pub n: u32,
    pub entries: Matrix,
    pub(crate) window: RealInterval,
    pub(crate) steps: usize,
    pub(crate) ldu: Ldu,
}

impl BimomentMatrix {
    pub fn size(&self) -> usize {
        self.entries.rows()
    }

    pub fn window(&self) -> &RealInterval {
        &self.window
    }

    /// Leading principal minors `det M[0..k, 0..k]`, `k = 1..=m+1`.
    pub fn leading_minors(&self) -> Vec<Float> {
        let mut acc = Float::with_val(self.ldu.d[0].prec(), 1u32);
        self.ldu
            .d
            .iter()
            .map(|d| {
                acc *= d;
                acc.clone()
            })
            .collect()
    }
}

/// Bimoment matrix by the trapezoid rule over the truncation window,
/// halving the step until two levels agree to
/// `quad_rel_tol` entrywise. Odd rows are compared against the
/// Cauchy–Schwarz bound `(M[i−1][j]M[i+1][j])^½` of `∫|x|^i e^{jx}w`.
pub fn bimoments(v: &Potential, n: u32, m: usize, ctx: &PrecisionContext) -> Result<BimomentMatrix, BiorthoError> {
    if n == 0 {
        return Err(BiorthoError::InvalidParameter("n must be positive".into()));
    }
    if m > n as usize + 8 {
        return Err(BiorthoError::InvalidParameter(format!(
            "at most n + 8 = {} degrees are supported, got {m}",
            n + 8
        )));
    }
    let p = ctx.prec();
    let (lo, hi) = support_window(v, n, m + 1, ctx.digits);
    let window = window_interval(lo, hi, p)?;
    let ve = v.at_prec(p);
    let mut steps = initial_steps(hi - lo, n);
    let mut previous: Option<Vec<Vec<Float>>> = None;
    for _ in 0..=ctx.max_panel_doublings {
        let grid = WeightedGrid::new(&window, steps, false, &ve, n);
        let sums = grid.outer_sums(m + 2, m + 1, |k| powers(&grid.nodes[k], m + 1), |k| powers(&grid.exps[k], m));
        if let Some(prev) = &previous {
            if converged(&sums, prev, m, &ctx.quad_rel_tol) {
                let entries = Matrix::from_rows(sums.into_iter().take(m + 1).collect());
                let ldu = ldu_bidiagonalize(&entries, ctx).map_err(|e| match e {
                    MpError::SingularMinor(k) => BiorthoError::SingularMinor(k),
                    other => other.into(),
                })?;
                if let Some(k) = ldu.d.iter().position(|d| *d <= 0) {
                    return Err(BiorthoError::NonPositiveMinor(k));
                }
                return Ok(BimomentMatrix {
                    n,
                    entries,
                    window,
                    steps,
                    ldu,
                });
            }
        }
        previous = Some(sums);
        steps *= 2;
    }
    Err(MpError::nonconvergent(
        "bimoment quadrature",
        format!("no agreement after {} step halvings", ctx.max_panel_doublings),
    )
    .into())
}

fn converged(new: &[Vec<Float>], old: &[Vec<Float>], m: usize, tol: &Float) -> bool {
    for i in 0..=m {
        for j in 0..=m {
            let scale = if i % 2 == 0 {
                Float::with_val(new[i][j].prec(), new[i][j].abs_ref())
            } else {
                Float::with_val(new[i][j].prec(), &new[i - 1][j] * &new[i + 1][j]).sqrt()
            };
            let diff = Float::with_val(new[i][j].prec(), &new[i][j] - &old[i][j]).abs();
            if diff > scale * tol {
                return false;
            }
        }
    }
    true
}

