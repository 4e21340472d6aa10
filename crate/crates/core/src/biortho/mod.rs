//! Monic biorthogonal polynomials for the weight `e^{−nV(x)}` on the real
//! line: `p_j(x)` and `q_j(y)` with
//! `∫ p_i(x) q_j(eˣ) e^{−nV(x)} dx = h_i δ_ij`.
//!
//! Both families come from one unpivoted LDU factorization of the
//! bimoment matrix `M = L·D·U`: the rows of `L⁻¹` are the coefficients of
//! `p_j`, the columns of `U⁻¹` those of `q_j`, and `h_j = D_jj`. The
//! matrix is extremely ill conditioned, so `12·n` digits are used by
//! default.

mod bimoments;
mod grid;
mod io;
mod poly;
mod transforms;
mod zeros;

pub use bimoments::{bimoments, BimomentMatrix};
pub use grid::support_window;
pub use io::{load_system, save_system, BiorthoRecord, BIORTHO_VERSION};
pub use poly::{eval as eval_poly, eval_c as eval_poly_c};
pub use transforms::{cauchy_transform_q, conjugated_pair, Gauge};
pub use zeros::{interlaces, zeros, ZeroSet};

use rug::Float;
use thiserror::Error;

use crate::equilibrium::{EqError, Potential, PotentialEval};
use crate::mpnum::{lower_unit_inverse, upper_unit_inverse, Cpx, MpError, PrecisionContext, RealInterval};
use grid::WeightedGrid;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BiorthoError {
    #[error(transparent)]
    Mp(#[from] MpError),
    #[error(transparent)]
    Equilibrium(#[from] EqError),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("leading principal minor {0} is not positive; raise the working precision")]
    NonPositiveMinor(usize),
    #[error("leading principal minor {0} vanished numerically; raise the working precision")]
    SingularMinor(usize),
    #[error("complex or multiple zeros found at degree {degree}; precision too low")]
    ComplexRootDetected { degree: usize },
    #[error("orthogonality defect {defect:.3e} exceeds {tol:.3e}")]
    Defect { defect: f64, tol: f64 },
    #[error("i/o: {0}")]
    Io(String),
}

/// `12·n` digits (at least 40), quadrature tolerance `10^-(digits−8)`.
pub fn default_context(n: u32) -> PrecisionContext {
    let digits = (12 * n).max(40);
    PrecisionContext::new(digits)
        .and_then(|c| c.with_quad_tol_exp10(-(digits as i32) + 8))
        .expect("valid default precision")
}

/// Biorthogonal families of degrees `0..=m` for fixed `n`.
#[derive(Clone, Debug)]
pub struct BiorthoSystem {
    n: u32,
    potential: Potential,
    ctx: PrecisionContext,
    ve: PotentialEval,
    p: Vec<Vec<Float>>,
    q: Vec<Vec<Float>>,
    h: Vec<Float>,
    window: RealInterval,
    steps: usize,
    defect: Float,
}

/// Builds `p_0..p_m`, `q_0..q_m` and `h_0..h_m` from the LDU factors of
/// the bimoment matrix and checks the orthogonality defect on an
/// independent (midpoint-shifted) quadrature grid.
pub fn construct(v: &Potential, n: u32, m: usize, ctx: &PrecisionContext) -> Result<BiorthoSystem, BiorthoError> {
    let bm = bimoments(v, n, m, ctx)?;
    let pmat = lower_unit_inverse(&bm.ldu.l);
    let qmat = upper_unit_inverse(&bm.ldu.u);
    let p: Vec<Vec<Float>> = (0..=m).map(|i| (0..=i).map(|k| pmat[(i, k)].clone()).collect()).collect();
    let q: Vec<Vec<Float>> = (0..=m).map(|j| (0..=j).map(|l| qmat[(l, j)].clone()).collect()).collect();
    BiorthoSystem::from_parts(v, n, ctx, p, q, bm.ldu.d.clone(), bm.window.clone(), bm.steps)
}

impl BiorthoSystem {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_parts(
        v: &Potential,
        n: u32,
        ctx: &PrecisionContext,
        p: Vec<Vec<Float>>,
        q: Vec<Vec<Float>>,
        h: Vec<Float>,
        window: RealInterval,
        steps: usize,
    ) -> Result<Self, BiorthoError> {
        let prec = ctx.prec();
        let mut sys = BiorthoSystem {
            n,
            potential: v.clone(),
            ctx: ctx.clone(),
            ve: v.at_prec(prec),
            p,
            q,
            h,
            window,
            steps,
            defect: Float::new(prec),
        };
        if let Some(j) = sys.h.iter().position(|h| *h <= 0) {
            return Err(BiorthoError::NonPositiveMinor(j));
        }
        sys.defect = sys.orthogonality_defect(steps, true);
        let tol = ctx.pow10(-((ctx.digits / 3) as i32));
        if sys.defect > tol || !sys.defect.is_finite() {
            return Err(BiorthoError::Defect {
                defect: sys.defect.to_f64(),
                tol: tol.to_f64(),
            });
        }
        Ok(sys)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Highest available degree `m`.
    pub fn max_degree(&self) -> usize {
        self.h.len() - 1
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn context(&self) -> &PrecisionContext {
        &self.ctx
    }

    pub fn prec(&self) -> u32 {
        self.ctx.prec()
    }

    pub fn window(&self) -> &RealInterval {
        &self.window
    }

    /// Trapezoid step count over the window used at construction.
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// `max |∫p_i q_j(eˣ) w − h_i δ_ij| / max h` as measured at construction.
    pub fn defect(&self) -> &Float {
        &self.defect
    }

    /// Ascending coefficients of `p_j`.
    pub fn p_coeffs(&self, j: usize) -> &[Float] {
        &self.p[j]
    }

    /// Ascending coefficients of `q_j` as a polynomial in `y = eˣ`.
    pub fn q_coeffs(&self, j: usize) -> &[Float] {
        &self.q[j]
    }

    pub fn h(&self, j: usize) -> &Float {
        &self.h[j]
    }

    pub fn norming_constants(&self) -> &[Float] {
        &self.h
    }

    pub fn p(&self, j: usize, x: &Float) -> Float {
        poly::eval(&self.p[j], &self.at(x))
    }

    pub fn q(&self, j: usize, y: &Float) -> Float {
        poly::eval(&self.q[j], &self.at(y))
    }

    /// `q_j(eˣ)`.
    pub fn q_exp(&self, j: usize, x: &Float) -> Float {
        let y = Float::with_val(self.prec(), x.exp_ref());
        poly::eval(&self.q[j], &y)
    }

    pub fn p_c(&self, j: usize, z: &Cpx) -> Cpx {
        poly::eval_c(&self.p[j], &self.at_c(z))
    }

    pub fn q_exp_c(&self, j: usize, z: &Cpx) -> Cpx {
        poly::eval_c(&self.q[j], &self.at_c(z).exp())
    }

    /// `p_0(x), …, p_m(x)`.
    pub fn p_all(&self, x: &Float) -> Vec<Float> {
        let x = self.at(x);
        self.p.iter().map(|c| poly::eval(c, &x)).collect()
    }

    /// `q_0(eˣ), …, q_m(eˣ)`.
    pub fn q_exp_all(&self, x: &Float) -> Vec<Float> {
        let y = Float::with_val(self.prec(), x.exp_ref());
        self.q.iter().map(|c| poly::eval(c, &y)).collect()
    }

    pub fn p_all_c(&self, z: &Cpx) -> Vec<Cpx> {
        let z = self.at_c(z);
        self.p.iter().map(|c| poly::eval_c(c, &z)).collect()
    }

    pub fn q_exp_all_c(&self, z: &Cpx) -> Vec<Cpx> {
        let y = self.at_c(z).exp();
        self.q.iter().map(|c| poly::eval_c(c, &y)).collect()
    }

    /// `e^{−nV(x)/2}`.
    pub fn half_weight(&self, x: &Float) -> Float {
        let nv = self.ve.v(&self.at(x)) * self.n / 2u32;
        (-nv).exp()
    }

    pub fn half_weight_c(&self, z: &Cpx) -> Cpx {
        let nv = self.ve.v_c(&self.at_c(z));
        let half = Float::with_val(self.prec(), self.n) / 2u32;
        (-&nv.scale(&half)).exp()
    }

    pub(crate) fn grid(&self, steps: usize, shifted: bool) -> WeightedGrid {
        WeightedGrid::new(&self.window, steps, shifted, &self.ve, self.n)
    }

    /// Normalised orthogonality defect on a trapezoid grid with `steps`
    /// steps, optionally at the midpoints.
    pub fn orthogonality_defect(&self, steps: usize, shifted: bool) -> Float {
        let grid = self.grid(steps, shifted);
        let m = self.max_degree();
        let pairing = grid.outer_sums(m + 1, m + 1, |k| self.p_all(&grid.nodes[k]), |k| {
            self.q.iter().map(|c| poly::eval(c, &grid.exps[k])).collect()
        });
        let prec = self.prec();
        let h_max = self.h.iter().fold(Float::new(prec), |a, h| a.max(h));
        let mut worst = Float::new(prec);
        for (i, row) in pairing.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let mut d = Float::with_val(prec, v);
                if i == j {
                    d -= &self.h[i];
                }
                worst = worst.max(&d.abs());
            }
        }
        worst / h_max
    }

    fn at(&self, x: &Float) -> Float {
        Float::with_val(self.prec(), x)
    }

    fn at_c(&self, z: &Cpx) -> Cpx {
        let mut z = z.clone();
        z.set_prec(self.prec());
        z
    }
}

#[cfg(test)]
mod tests;
