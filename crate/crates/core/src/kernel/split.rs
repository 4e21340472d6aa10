use std::ops::RangeInclusive;

use rug::Float;

use super::{conjugation_factor, partial_sum, require_degree, KernelError};
use crate::biortho::BiorthoSystem;
use crate::equilibrium::Equilibrium;

/// The four index blocks `0..=e1`, `e1+1..=e2`, `e2+1..=e3`, `e3+1..=n−1`
/// with `e1 = ⌊δn⌋`, `e2 = ⌊(1−δ′)n⌋` and `e3 = ⌊n − M n^{1/3}⌋`.
///
/// The cut points are clamped to be nondecreasing and to stay below `n`,
/// so at small `n` some blocks come out empty.
pub fn split_windows(n: u32, delta: f64, delta_prime: f64, big_m: f64) -> Result<[Option<RangeInclusive<usize>>; 4], KernelError> {
    if n == 0 {
        return Err(KernelError::InvalidParameter("n must be positive".into()));
    }
    if !(delta > 0.0 && delta < 1.0 && delta_prime > 0.0 && delta_prime < 1.0 && big_m > 0.0) {
        return Err(KernelError::InvalidParameter(format!(
            "need 0 < δ, δ′ < 1 and M > 0, got δ = {delta}, δ′ = {delta_prime}, M = {big_m}"
        )));
    }
    let nf = n as f64;
    let top = n as i64 - 1;
    let cut = |x: f64| (x.floor() as i64).clamp(-1, top);
    let e1 = cut(delta * nf).max(0);
    let e3 = cut(nf - big_m * nf.cbrt()).max(e1);
    let e2 = cut((1.0 - delta_prime) * nf).clamp(e1, e3);
    let block = |lo: i64, hi: i64| (lo <= hi).then(|| lo as usize..=hi as usize);
    Ok([block(0, e1), block(e1 + 1, e2), block(e2 + 1, e3), block(e3 + 1, top)])
}

#[derive(Clone, Debug)]
pub struct SplitParts {
    pub windows: [Option<RangeInclusive<usize>>; 4],
    /// `K⁽ⁱ⁾(u, v)`.
    pub raw: [Float; 4],
    /// `e^{n(F(u)−F(v))} K⁽ⁱ⁾(u, v)`.
    pub conjugated: [Float; 4],
}

impl SplitParts {
    pub fn total(&self) -> Float {
        let p = self.raw[0].prec();
        self.raw.iter().fold(Float::new(p), |acc, k| acc + k)
    }
}

/// Splits `K_n(u, v)` into the four index blocks of [`split_windows`].
pub fn kernel_split(
    sys: &BiorthoSystem,
    eq: &Equilibrium,
    delta: f64,
    delta_prime: f64,
    big_m: f64,
    u: &Float,
    v: &Float,
) -> Result<SplitParts, KernelError> {
    let n = sys.n();
    require_degree(sys, n as usize - 1)?;
    let windows = split_windows(n, delta, delta_prime, big_m)?;
    let conj = conjugation_factor(sys, eq, u, v)?;
    let weight = sys.half_weight(u) * sys.half_weight(v);
    let prec = sys.prec();
    let raw: [Float; 4] = std::array::from_fn(|i| match &windows[i] {
        Some(r) => partial_sum(sys, *r.start(), *r.end(), u, v) * &weight,
        None => Float::new(prec),
    });
    let conjugated = std::array::from_fn(|i| Float::with_val(prec, &raw[i] * &conj));
    Ok(SplitParts { windows, raw, conjugated })
}
