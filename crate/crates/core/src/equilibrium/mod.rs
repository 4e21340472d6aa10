//! Equilibrium measure of the two-logarithm energy
//! `½∬log|x−y|⁻¹ + ½∬log|eˣ−eʸ|⁻¹ + ∫V/t` for a convex polynomial `V`.
//!
//! The support `[a, b]` and the density are described through the map
//! `J(s) = c₁s + c₀ − log((s−½)/(s+½))`, whose coefficients solve two
//! contour-integral equations. Everything is computed at the precision of
//! the [`PrecisionContext`] handed in; 64 digits is the usual choice.

mod cache;
mod coefficients;
mod density;
mod gfun;
mod jmap;
mod potential;
mod table;

pub use cache::{load_equilibrium, save_equilibrium, EquilibriumRecord, CACHE_VERSION};
pub use coefficients::solve_coefficients;
pub use density::density;
pub use gfun::{f_function, f_prime, f_real, g_functions};
pub use jmap::{branch_point, inverse_map, map_j, support_from_coefficients, Branch, InverseMap};
pub use potential::{parse_decimal, rational_to_string, Potential, PotentialEval};
pub use table::{DensityTable, DEFAULT_TABLE_NODES};

use rug::float::Constant;
use rug::{Float, Rational};
use thiserror::Error;

use crate::mpnum::{Cpx, MpError, PrecisionContext};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EqError {
    #[error(transparent)]
    Mp(#[from] MpError),
    #[error("point lies on the branch cut [-1/2, 1/2]")]
    OnBranchCut,
    #[error("inverse map left the upper half-plane")]
    BranchEscape,
    #[error("potential rejected: {0}")]
    NonConvex(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("variational condition violated: spread {spread:.3e} exceeds {tol:.3e}")]
    VariationalViolation { spread: f64, tol: f64 },
    #[error("cache: {0}")]
    Cache(String),
}

/// Coefficients of `J`, support and edge data at one value of `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct SupportData {
    pub t: Float,
    pub c1: Float,
    pub c0: Float,
    pub s_b: Float,
    pub a: Float,
    pub b: Float,
    /// `(1/2πi)∮V''(J)/(s−½)`.
    pub p: Float,
    /// `(1/2πi)∮V''(J)/(s+½)`.
    pub q: Float,
    pub alpha: Float,
    pub beta: Float,
}

/// Full equilibrium data, including the Lagrange constant and the
/// minimisers of `V` and `V − t·x`.
#[derive(Clone, Debug, PartialEq)]
pub struct EquilibriumData {
    pub t: Float,
    pub c0: Float,
    pub c1: Float,
    pub s_b: Float,
    pub a: Float,
    pub b: Float,
    pub alpha: Float,
    pub beta: Float,
    pub p: Float,
    pub q: Float,
    pub ell: Float,
    pub x_min: Float,
    pub x_hat_min: Float,
}

impl EquilibriumData {
    pub fn support(&self) -> SupportData {
        SupportData {
            t: self.t.clone(),
            c1: self.c1.clone(),
            c0: self.c0.clone(),
            s_b: self.s_b.clone(),
            a: self.a.clone(),
            b: self.b.clone(),
            p: self.p.clone(),
            q: self.q.clone(),
            alpha: self.alpha.clone(),
            beta: self.beta.clone(),
        }
    }
}

/// Coefficients, endpoints and edge constants; no density is built.
pub fn solve_support(v: &Potential, t: &Float, ctx: &PrecisionContext) -> Result<SupportData, EqError> {
    let p = ctx.prec();
    let t = Float::with_val(p, t);
    let (c1, c0) = solve_coefficients(v, &t, ctx)?;
    let (s_b, a, b) = support_from_coefficients(&c1, &c0);
    let m = coefficients::moments(&v.at_prec(p), &c1, &c0, ctx)?;
    let (alpha, beta) = coefficients::alpha_beta(&m.p, &m.q, &s_b, &t);
    Ok(SupportData {
        t,
        c1,
        c0,
        s_b,
        a,
        b,
        p: m.p,
        q: m.q,
        alpha,
        beta,
    })
}

/// `(a, b) = (J(−s_b), J(s_b))`.
pub fn endpoints(support: &SupportData) -> (Float, Float) {
    (support.a.clone(), support.b.clone())
}

/// Edge constants with `ψ(x) ~ α√(x−a)` and `ψ(x) ~ β√(b−x)`.
pub fn edge_constants(support: &SupportData) -> (Float, Float) {
    (support.alpha.clone(), support.beta.clone())
}

/// `(a'(t), b'(t)) = ((½−s_b)/(πtα√s_b), (½+s_b)/(πtβ√s_b))`.
pub fn endpoint_derivatives(support: &SupportData) -> (Float, Float) {
    let p = support.s_b.prec();
    let pi = Float::with_val(p, Constant::Pi) * &support.t;
    let root = Float::with_val(p, support.s_b.sqrt_ref());
    let lo = Float::with_val(p, 0.5f64 - support.s_b.clone());
    let hi = Float::with_val(p, support.s_b.clone() + 0.5f64);
    let da = lo / (Float::with_val(p, &pi * &support.alpha) * &root);
    let db = hi / (Float::with_val(p, &pi * &support.beta) * &root);
    (da, db)
}

/// `(c₁'(t), c₀'(t))`.
pub fn coefficient_derivatives(support: &SupportData) -> (Float, Float) {
    coefficients::coefficient_derivatives(&support.p, &support.q, &support.c1)
}

/// `V(−x) + ((n−1)/n)x`, the field seen by the reflected ensemble.
pub fn reflect_potential(v: &Potential, n: u32) -> Potential {
    v.reflected(&Rational::from((n as i64 - 1, n as i64)))
}

/// Lagrange constant evaluated at the centre of the support and checked at
/// the quarter points. Fails when the three values spread by more than
/// `10^-(digits/4)`.
pub fn lagrange_constant(
    support: &SupportData,
    table: &DensityTable,
    v: &Potential,
    ctx: &PrecisionContext,
) -> Result<Float, EqError> {
    let p = ctx.prec();
    let ve = v.at_prec(p);
    let c = Float::with_val(p, &support.a + &support.b) / 2u32;
    let quarter = Float::with_val(p, &support.b - &support.a) / 4u32;
    let ell = gfun::variational_sum(table, &ve, &support.t, &c);
    let mut spread = Float::new(p);
    for y in [Float::with_val(p, &c - &quarter), Float::with_val(p, &c + &quarter)] {
        let other = gfun::variational_sum(table, &ve, &support.t, &y);
        spread = spread.max(&Float::with_val(p, &other - &ell).abs());
    }
    let tol = ctx.pow10(-((ctx.digits / 4) as i32));
    if spread > tol {
        return Err(EqError::VariationalViolation {
            spread: spread.to_f64(),
            tol: tol.to_f64(),
        });
    }
    Ok(ell)
}

/// Solved equilibrium problem at one `t`: data, density table and the
/// machinery for `I±`, `g`, `g̃` and `F`.
#[derive(Clone, Debug)]
pub struct Equilibrium {
    pub potential: Potential,
    pub data: EquilibriumData,
    pub table: DensityTable,
    imap: InverseMap,
    ve: PotentialEval,
    ctx: PrecisionContext,
}

impl Equilibrium {
    pub fn solve(v: &Potential, t: &Float, ctx: &PrecisionContext) -> Result<Self, EqError> {
        Self::solve_with_nodes(v, t, ctx, DEFAULT_TABLE_NODES)
    }

    pub fn solve_with_nodes(v: &Potential, t: &Float, ctx: &PrecisionContext, nodes: usize) -> Result<Self, EqError> {
        let support = solve_support(v, t, ctx)?;
        let p = ctx.prec();
        let imap = InverseMap::new(&support.c1, &support.c0)?;
        let ve = v.at_prec(p);
        let table = DensityTable::build(&imap, &support.c1, &support.t, &ve, nodes, ctx)?;
        let ell = lagrange_constant(&support, &table, v, ctx)?;
        let x_min = v.argmin_shifted(&Float::new(p), p);
        let x_hat_min = v.argmin_shifted(&support.t, p);
        let data = EquilibriumData {
            t: support.t,
            c0: support.c0,
            c1: support.c1,
            s_b: support.s_b,
            a: support.a,
            b: support.b,
            alpha: support.alpha,
            beta: support.beta,
            p: support.p,
            q: support.q,
            ell,
            x_min,
            x_hat_min,
        };
        Ok(Equilibrium {
            potential: v.clone(),
            data,
            table,
            imap,
            ve,
            ctx: ctx.clone(),
        })
    }

    pub fn context(&self) -> &PrecisionContext {
        &self.ctx
    }

    pub fn support(&self) -> SupportData {
        self.data.support()
    }

    pub fn psi(&self, x: &Float) -> Float {
        self.table.psi(&Float::with_val(self.ctx.prec(), x))
    }

    pub fn inverse_map(&self, x: &Float, branch: Branch) -> Result<Cpx, EqError> {
        self.imap.solve(&Float::with_val(self.ctx.prec(), x), branch, &self.ctx)
    }

    pub fn inverse(&self) -> &InverseMap {
        &self.imap
    }

    pub fn g_functions(&self, z: &Cpx) -> Result<(Cpx, Cpx), EqError> {
        let mut z = z.clone();
        z.set_prec(self.ctx.prec());
        g_functions(&self.table, &self.data.b, &z)
    }

    pub fn f(&self, z: &Cpx) -> Result<Cpx, EqError> {
        let mut z = z.clone();
        z.set_prec(self.ctx.prec());
        f_function(&self.table, &self.data.t, &z)
    }

    pub fn f_real(&self, x: &Float) -> Float {
        f_real(&self.table, &self.data.t, &Float::with_val(self.ctx.prec(), x))
    }

    pub fn f_prime(&self, x: &Float) -> Float {
        f_prime(&self.table, &self.data.t, &Float::with_val(self.ctx.prec(), x), self.ctx.digits)
    }

    /// `∫log|x−y|dμ + ∫log|eˣ−eʸ|dμ − V(y)/t − ℓ`: zero on the support,
    /// negative off it.
    pub fn effective_potential(&self, y: &Float) -> Float {
        let y = Float::with_val(self.ctx.prec(), y);
        gfun::variational_sum(&self.table, &self.ve, &self.data.t, &y) - &self.data.ell
    }

    /// `∫ f dμ`.
    pub fn integrate<F: FnMut(&Float) -> Float>(&self, f: F) -> Float {
        self.table.integrate(f)
    }
}
