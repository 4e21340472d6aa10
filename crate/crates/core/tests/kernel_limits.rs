use std::f64::consts::{E, PI};
use std::sync::OnceLock;

use extsource::biortho::{construct, default_context, BiorthoSystem, Gauge};
use extsource::equilibrium::{endpoint_derivatives, reflect_potential, Equilibrium, Potential};
use extsource::kernel::*;
use extsource::mpnum::Cpx;
use extsource::PrecisionContext;
use rug::Float;

const NS: [u32; 4] = [12, 18, 24, 32];

fn eq_ctx() -> PrecisionContext {
    PrecisionContext::new(60).unwrap()
}

fn system(n: u32) -> &'static BiorthoSystem {
    static CELLS: [OnceLock<BiorthoSystem>; 5] = [OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new()];
    let slot = match n {
        12 => 0,
        16 => 1,
        18 => 2,
        24 => 3,
        32 => 4,
        _ => unreachable!(),
    };
    CELLS[slot].get_or_init(|| construct(&Potential::quadratic(), n, n as usize + 8, &default_context(n)).unwrap())
}

fn eq1() -> &'static Equilibrium {
    static CELL: OnceLock<Equilibrium> = OnceLock::new();
    CELL.get_or_init(|| {
        let c = eq_ctx();
        Equilibrium::solve(&Potential::quadratic(), &c.float(1), &c).unwrap()
    })
}

fn x_star() -> f64 {
    let d = &eq1().data;
    (d.a.to_f64() + d.b.to_f64()) / 2.0
}

fn fl(sys: &BiorthoSystem, x: f64) -> Float {
    Float::with_val(sys.prec(), x)
}

type Scaled = fn(&BiorthoSystem, &Equilibrium, &Float, &Float, &Float) -> Result<(Float, Float), KernelError>;

fn bulk_grid_error(n: u32, f: Scaled, reference: impl Fn(f64, f64) -> f64) -> f64 {
    let sys = system(n);
    let xs = fl(sys, x_star());
    let pts = [-0.5, 0.0, 0.5];
    let mut worst = 0f64;
    for &xi in &pts {
        for &eta in &pts {
            let (v, _) = f(sys, eq1(), &xs, &fl(sys, xi), &fl(sys, eta)).unwrap();
            worst = worst.max((v.to_f64() - reference(xi, eta)).abs());
        }
    }
    worst
}

fn sinc(d: f64) -> f64 {
    if d == 0.0 {
        1.0
    } else {
        d.sin() / d
    }
}

fn nonincreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] <= w[0])
}

#[test]
fn bulk_density_scaling_approaches_the_sine_kernel() {
    let errs: Vec<f64> = NS.iter().map(|&n| bulk_grid_error(n, bulk_scaled_density, |x, y| sinc(PI * (x - y)))).collect();
    assert!(nonincreasing(&errs), "{errs:?}");
    assert!(errs[3] < 0.05, "{errs:?}");

    let sys = system(32);
    let xs = fl(sys, x_star());
    let one = |n: u32| {
        let s = system(n);
        let (v, r) = bulk_scaled_density(s, eq1(), &fl(s, x_star()), &fl(s, 0.25), &fl(s, -0.25)).unwrap();
        (v.to_f64() - r.to_f64()).abs()
    };
    assert!(one(32) < one(12));
    let (_, r) = bulk_scaled_density(sys, eq1(), &xs, &fl(sys, 0.3), &fl(sys, 0.3)).unwrap();
    assert_eq!(r, 1);
}

#[test]
fn literal_bulk_scaling_tends_to_a_dilated_sine() {
    // with πψn in place of ψn the arguments are π times too close, so the
    // limit is sin(ξ−η)/(π(ξ−η)) rather than the sine kernel
    let errs: Vec<f64> = NS.iter().map(|&n| bulk_grid_error(n, bulk_scaled, |x, y| sinc(x - y) / PI)).collect();
    assert!(nonincreasing(&errs), "{errs:?}");
    assert!(errs[3] < 0.01, "{errs:?}");
    let off: Vec<f64> = NS.iter().map(|&n| bulk_grid_error(n, bulk_scaled, |x, y| sinc(PI * (x - y)))).collect();
    assert!(off.iter().all(|e| *e > 0.6), "{off:?}");
}

#[test]
fn linearised_and_exact_bulk_conjugation_agree() {
    let sys = system(32);
    let xs = fl(sys, x_star());
    for (xi, eta) in [(0.5, -0.5), (0.0, 0.5)] {
        let (a, _) = bulk_scaled(sys, eq1(), &xs, &fl(sys, xi), &fl(sys, eta)).unwrap();
        let (b, _) = bulk_scaled_conjugated(sys, eq1(), &xs, &fl(sys, xi), &fl(sys, eta)).unwrap();
        assert!((a.to_f64() - b.to_f64()).abs() < 1e-3);
    }
    assert!(matches!(
        bulk_scaled(sys, eq1(), &fl(sys, 10.0), &fl(sys, 0.0), &fl(sys, 0.0)),
        Err(KernelError::OutsideBulk { .. })
    ));
}

#[test]
fn conjugated_kernel_stays_finite_near_the_diagonal() {
    let sys = system(32);
    let xs = fl(sys, x_star());
    let y = fl(sys, x_star() + 1e-3);
    let raw = kernel_raw(sys, &xs, &y).unwrap().to_f64();
    let cj = kernel_conjugated(sys, eq1(), &xs, &y).unwrap().to_f64();
    assert!(raw.is_finite() && cj.is_finite());
    // both are close to K(x*, x*) = nψ(x*) at this separation
    let diag = 32.0 * eq1().psi(&eq_ctx().float(x_star())).to_f64();
    assert!((cj / diag - 1.0).abs() < 0.05 && (raw / diag - 1.0).abs() < 0.05);
}

fn edge_grid_error(n: u32, shift: f64) -> f64 {
    let sys = system(n);
    let d = &eq1().data;
    let scale = (PI * d.beta.to_f64() * n as f64).powf(2.0 / 3.0);
    let pts = [0.0, 0.5, 1.0];
    let mut worst = 0f64;
    for &xi in &pts {
        for &eta in &pts {
            // moving the edge by `shift` is the same as moving (ξ, η) by shift·scale
            let s = shift * scale;
            let (v, _) = edge_scaled(sys, eq1(), EdgeSide::Right, &fl(sys, xi + s), &fl(sys, eta + s)).unwrap();
            let r = extsource::mpnum::airy_kernel(&eq_ctx().float(xi), &eq_ctx().float(eta), &eq_ctx()).to_f64();
            worst = worst.max((v.to_f64() - r).abs());
        }
    }
    worst
}

#[test]
fn right_edge_error_decreases() {
    let errs: Vec<f64> = NS.iter().map(|&n| edge_grid_error(n, 0.0)).collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    // the decay is n^{-1/3}: err·n^{1/3} is flat to a few percent
    let c: Vec<f64> = NS.iter().zip(&errs).map(|(&n, e)| e * (n as f64).cbrt()).collect();
    assert!(c.iter().all(|x| (x / c[0] - 1.0).abs() < 0.05), "{c:?}");
    // and it is almost entirely an O(1/n) displacement of the edge
    let shifted = edge_grid_error(32, -0.5 / 32.0);
    assert!(shifted < 0.2 * errs[3], "{shifted} vs {}", errs[3]);

    let sys = system(32);
    let (v, r) = edge_scaled(sys, eq1(), EdgeSide::Right, &fl(sys, 0.0), &fl(sys, 0.0)).unwrap();
    assert!((r.to_f64() - 0.06699).abs() < 1e-5);
    assert!(v.to_f64() > 0.0);
}

#[test]
fn left_edge_matches_reflected_right_edge() {
    let n = 16;
    let sys = system(n);
    let c = eq_ctx();
    let r = reflect_potential(sys.potential(), n);
    let eq_r = Equilibrium::solve(&r, &c.float(1), &c).unwrap();
    let sys_r = construct(&r, n, n as usize, &default_context(n)).unwrap();
    for (xi, eta) in [(0.0, 0.0), (0.5, 1.0), (-1.0, 0.3)] {
        let (left, _) = edge_scaled(sys, &eq_r, EdgeSide::Left, &fl(sys, xi), &fl(sys, eta)).unwrap();
        let (right, reference) = edge_scaled(&sys_r, &eq_r, EdgeSide::Right, &fl(&sys_r, xi), &fl(&sys_r, eta)).unwrap();
        assert!((left.to_f64() - right.to_f64()).abs() < 1e-6 * (1.0 + reference.to_f64().abs()));
    }
}

#[test]
fn split_blocks_near_the_right_edge() {
    let d = &eq1().data;
    let (_, bp) = endpoint_derivatives(&eq1().support());
    let l = (PI * d.beta.to_f64()).powf(2.0 / 3.0) * bp.to_f64() * 4.0;
    let c = eq_ctx();
    let target = airy_cd_integral(&c.float(0), &c.float(0), &c.float(l), &c).unwrap().to_f64();
    let mut ratios = Vec::new();
    for n in NS {
        let sys = system(n);
        let scale = (PI * d.beta.to_f64() * n as f64).powf(2.0 / 3.0);
        let b = fl(sys, d.b.to_f64());
        let parts = kernel_split(sys, eq1(), 0.1, 0.2, 4.0, &b, &b).unwrap();
        let k = kernel_raw(sys, &b, &b).unwrap();
        assert!((parts.total() - &k).abs().to_f64() < 1e-40);
        assert!(parts.conjugated[0].to_f64().abs() < parts.conjugated[3].to_f64().abs());
        ratios.push(parts.conjugated[3].to_f64() / scale / target);
    }
    // the upper block carries a growing share of the Airy integral
    assert!(ratios.windows(2).all(|w| w[1] > w[0]), "{ratios:?}");
    assert!(ratios[3] > 0.7 && ratios[3] < 1.0, "{ratios:?}");
}

fn diagnostics(n: u32) -> CdDiagnostics {
    cd_coefficients(system(n), Gauge::unit(n, n as usize + 8), 0.15).unwrap()
}

#[test]
fn christoffel_darboux_surrogate_identity_n16() {
    let sys = system(16);
    let diag = diagnostics(16);
    assert_eq!(diag.d, 2);
    for j in 0..=diag.m {
        for k in 0..=diag.m {
            if k > j + 1 {
                assert!(diag.a(j, k).unwrap().abs().to_f64() < 1e-15);
            }
            if k > j + diag.d {
                assert!(diag.b(j, k).unwrap().abs().to_f64() < 1e-15);
            }
        }
    }
    let tol = 10f64.powi(-((sys.context().digits / 4) as i32));
    let p = sys.prec();
    let psi_n = eq1().psi(&eq_ctx().float(x_star())).to_f64() * 16.0;
    for (xi, eta) in [(0.25, -0.25), (0.4, 0.1)] {
        let u = Cpx::with_val(p, x_star() + xi / psi_n, 0.1 / psi_n);
        let v = Cpx::with_val(p, x_star() + eta / psi_n, -0.05 / psi_n);
        let t = cd_decomposition(sys, &diag, eq1(), 6, &u, &v).unwrap();
        assert!(t.residual.to_f64() < tol, "{:e}", t.residual.to_f64());
    }
}

#[test]
fn leading_coefficient_tends_to_alpha_minus_one() {
    let alpha = alpha_limit(-1, &eq1().data).unwrap().to_f64();
    assert!((alpha - E).abs() < 1e-12);
    let dev: Vec<f64> = [12u32, 18, 24]
        .iter()
        .map(|&n| (diagnostics(n).a(n as usize - 1, n as usize).unwrap().to_f64() - alpha).abs())
        .collect();
    assert!(dev.windows(2).all(|w| w[1] < w[0]), "{dev:?}");
    assert!(dev[2] < 0.15 * alpha);
    // neighbouring coefficients follow α_{j+k}
    let d24 = diagnostics(24);
    for (j, k, l) in [(24usize, 23usize, 1), (25, 23, 2)] {
        let want = alpha_limit(l, &eq1().data).unwrap().to_f64();
        assert!((d24.a(j, k).unwrap().to_f64() / want - 1.0).abs() < 0.05);
    }
}

#[test]
fn gauged_coefficient_carries_the_gauge_ratio() {
    let n = 12u32;
    let c = PrecisionContext::new(40).unwrap();
    let gauge = Gauge::solve(&Potential::quadratic(), n, &[11, 12], &c, 128).unwrap();
    let mut diag = diagnostics(n);
    let unit = diag.a(11, 12).unwrap().to_f64();
    diag.gauge = gauge.clone();
    let gauged = diag.a(11, 12).unwrap().to_f64();
    let ratio = (gauge.log_gamma(11).unwrap().to_f64() - gauge.log_gamma(12).unwrap().to_f64()).exp();
    assert!((gauged - ratio * unit).abs() < 1e-12 * unit);
    // γ_{n−1}/γ_n is near e^{−1/2} for the quadratic, so in this gauge
    // a_{n−1,n} does not approach α_{−1}
    assert!((ratio - (-0.5f64).exp()).abs() < 0.05, "{ratio}");
    assert!((gauged - E).abs() > 0.9);
}

#[test]
fn j1_decays_and_main_term_reaches_the_sine_target() {
    let p_of = |n: u32| system(n).prec();
    let psi = eq1().psi(&eq_ctx().float(x_star())).to_f64();
    let (xi, eta) = (0.25, -0.25);
    let mut j1 = Vec::new();
    for n in [12u32, 18, 24] {
        let sys = system(n);
        let diag = diagnostics(n);
        let s = psi * n as f64;
        let u = Cpx::with_val(p_of(n), x_star() + xi / s, 0.0);
        let v = Cpx::with_val(p_of(n), x_star() + eta / s, 0.0);
        let t = cd_decomposition(sys, &diag, eq1(), 6, &u, &v).unwrap();
        j1.push(t.conjugated(&t.j1).abs().to_f64());
        if n == 24 {
            let target = x_star().exp() / PI * (PI * (xi - eta)).sin();
            let main = t.conjugated(&t.main_term);
            assert!((main.re.to_f64() - target).abs() < 0.2 * target);
            assert!(main.im.to_f64().abs() < 1e-20);
            // at the literal bulk scale the same sum tends to (e^{x*}/π) sin(ξ−η)
            let s = PI * s;
            let u = Cpx::with_val(p_of(n), x_star() + xi / s, 0.0);
            let v = Cpx::with_val(p_of(n), x_star() + eta / s, 0.0);
            let t = cd_decomposition(sys, &diag, eq1(), 6, &u, &v).unwrap();
            let dilated = x_star().exp() / PI * (xi - eta).sin();
            assert!((t.conjugated(&t.main_term).re.to_f64() - dilated).abs() < 0.05 * dilated);
        }
    }
    assert!(j1.windows(2).all(|w| w[1] < w[0]), "{j1:?}");
}
