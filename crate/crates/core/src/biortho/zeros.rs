use nalgebra::DMatrix;
use rug::Float;

use super::poly::{eval, eval_with_derivative, shift_scale};
use super::{BiorthoError, BiorthoSystem};

/// Zeros of `p_j(x)` and of `q_j(eˣ)` (in `x`), sorted ascending.
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroSet {
    pub degree: usize,
    pub zeros_p: Vec<Float>,
    pub zeros_qx: Vec<Float>,
}

/// Companion-matrix eigenvalues in `f64` after centring and scaling the
/// polynomial, then Newton polishing at full precision. Falls back to a
/// sign-change scan when the eigenvalues are not `j` distinct reals.
pub fn zeros(sys: &BiorthoSystem, j: usize) -> Result<ZeroSet, BiorthoError> {
    if j > sys.max_degree() {
        return Err(BiorthoError::InvalidParameter(format!(
            "degree {j} exceeds the available {}",
            sys.max_degree()
        )));
    }
    let prec = sys.prec();
    let tol = sys.context().pow10(-(sys.context().digits as i32) + 10);
    let gap = sys.context().pow10(-((sys.context().digits / 4) as i32));
    let lo = sys.window().lo.clone();
    let hi = sys.window().hi.clone();

    let pc = sys.p_coeffs(j);
    let f_p = |x: &Float| eval_with_derivative(pc, x);
    let zeros_p = find_real_roots(pc, &f_p, &lo, &hi, j, &tol, &gap, prec, false)
        .ok_or(BiorthoError::ComplexRootDetected { degree: j })?;

    let qc = sys.q_coeffs(j);
    let f_q = |x: &Float| {
        let y = Float::with_val(prec, x.exp_ref());
        let (v, d) = eval_with_derivative(qc, &y);
        (v, d * y)
    };
    let zeros_qx = find_real_roots(qc, &f_q, &lo, &hi, j, &tol, &gap, prec, true)
        .ok_or(BiorthoError::ComplexRootDetected { degree: j })?;

    Ok(ZeroSet {
        degree: j,
        zeros_p,
        zeros_qx,
    })
}

/// `lower` has degree `j−1`, `upper` degree `j`; strict interlacing of
/// both families.
pub fn interlaces(lower: &ZeroSet, upper: &ZeroSet) -> bool {
    fn check(a: &[Float], b: &[Float]) -> bool {
        b.len() == a.len() + 1 && a.iter().enumerate().all(|(i, z)| b[i] < *z && *z < b[i + 1])
    }
    check(&lower.zeros_p, &upper.zeros_p) && check(&lower.zeros_qx, &upper.zeros_qx)
}

#[allow(clippy::too_many_arguments)]
fn find_real_roots<F>(
    coeffs: &[Float],
    f: &F,
    lo: &Float,
    hi: &Float,
    j: usize,
    tol: &Float,
    gap: &Float,
    prec: u32,
    in_exp: bool,
) -> Option<Vec<Float>>
where
    F: Fn(&Float) -> (Float, Float),
{
    if j == 0 {
        return Some(Vec::new());
    }
    if let Some(seeds) = companion_seeds(coeffs, in_exp) {
        let mut roots: Vec<Float> = seeds
            .into_iter()
            .filter_map(|s| polish(f, Float::with_val(prec, s), tol))
            .collect();
        roots.sort_by(|a, b| a.partial_cmp(b).expect("finite roots"));
        if distinct(&roots, gap) && roots.len() == j {
            return Some(roots);
        }
    }
    scan_roots(f, lo, hi, j, tol, prec)
}

/// Real parts of the companion eigenvalues, mapped back to `x`; `None`
/// when an eigenvalue is clearly complex (or non-positive for a
/// polynomial in `y = eˣ`).
fn companion_seeds(coeffs: &[Float], in_exp: bool) -> Option<Vec<f64>> {
    let prec = coeffs[0].prec();
    let deg = coeffs.len() - 1;
    let lead = &coeffs[deg];
    // centre and spread of the roots from the two leading coefficients
    let e1 = -Float::with_val(prec, &coeffs[deg - 1] / lead);
    let e2 = if deg >= 2 {
        Float::with_val(prec, &coeffs[deg - 2] / lead)
    } else {
        Float::new(prec)
    };
    let centre = Float::with_val(prec, &e1 / deg as u32);
    let mean_sq = (Float::with_val(prec, e1.square_ref()) - Float::with_val(prec, &e2 * 2u32)) / deg as u32;
    let var = mean_sq - Float::with_val(prec, centre.square_ref());
    let spread = var.to_f64().max(0.0).sqrt().max(1e-6) * 1.5;
    let r = Float::with_val(prec, spread);
    let scaled = shift_scale(coeffs, &centre, &r);
    let lead = scaled[deg].clone();
    let monic: Vec<f64> = scaled.iter().map(|c| Float::with_val(prec, c / &lead).to_f64()).collect();
    if monic.iter().any(|c| !c.is_finite()) {
        return None;
    }
    let mut comp = DMatrix::<f64>::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -monic[i];
    }
    let eig = comp.complex_eigenvalues();
    let c = centre.to_f64();
    let mut out = Vec::with_capacity(deg);
    for z in eig.iter() {
        if z.im.abs() > 1e-4 * (1.0 + z.re.abs()) {
            return None;
        }
        let v = c + spread * z.re;
        if in_exp {
            if v <= 0.0 {
                return None;
            }
            out.push(v.ln());
        } else {
            out.push(v);
        }
    }
    Some(out)
}

fn polish<F>(f: &F, mut x: Float, tol: &Float) -> Option<Float>
where
    F: Fn(&Float) -> (Float, Float),
{
    for _ in 0..200 {
        let (v, d) = f(&x);
        if d.is_zero() || !d.is_finite() {
            return None;
        }
        let step = Float::with_val(x.prec(), &v / &d);
        x -= &step;
        if !x.is_finite() {
            return None;
        }
        let scale = Float::with_val(x.prec(), x.abs_ref()).max(&Float::with_val(x.prec(), 1u32));
        if step.abs() <= scale * tol {
            return Some(x);
        }
    }
    None
}

fn distinct(roots: &[Float], gap: &Float) -> bool {
    roots.windows(2).all(|w| Float::with_val(w[0].prec(), &w[1] - &w[0]) > *gap)
}

/// Sign changes on a uniform grid, each bracket refined by bisection and
/// Newton.
fn scan_roots<F>(f: &F, lo: &Float, hi: &Float, j: usize, tol: &Float, prec: u32) -> Option<Vec<Float>>
where
    F: Fn(&Float) -> (Float, Float),
{
    let steps = 400 * (j + 1);
    let width = Float::with_val(prec, hi - lo) / steps as u32;
    let point = |k: usize| Float::with_val(prec, lo + Float::with_val(prec, &width * k as u32));
    let mut roots = Vec::new();
    let mut prev_x = point(0);
    let mut prev_v = f(&prev_x).0;
    for k in 1..=steps {
        let x = point(k);
        let v = f(&x).0;
        if v.is_zero() {
            roots.push(x.clone());
        } else if !prev_v.is_zero() && (prev_v.is_sign_negative() != v.is_sign_negative()) {
            let (mut a, mut b) = (prev_x.clone(), x.clone());
            let neg_left = prev_v.is_sign_negative();
            for _ in 0..60 {
                let mid = Float::with_val(prec, &a + &b) / 2u32;
                if f(&mid).0.is_sign_negative() == neg_left {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            let mid = Float::with_val(prec, &a + &b) / 2u32;
            roots.push(polish(f, mid.clone(), tol).unwrap_or(mid));
        }
        prev_x = x;
        prev_v = v;
    }
    (roots.len() == j).then_some(roots)
}

#[allow(dead_code)]
pub(crate) fn residual(coeffs: &[Float], x: &Float) -> Float {
    eval(coeffs, x)
}
