use std::sync::OnceLock;

use proptest::prelude::*;

use super::*;
use crate::mpnum::{integrate_tanh_sinh, RealInterval};

fn absdiff(a: &Float, b: &Float) -> f64 {
    Float::with_val(a.prec(), a - b).abs().to_f64()
}

fn rel(a: &Float, b: &Float) -> f64 {
    absdiff(a, b) / b.to_f64().abs()
}

fn gaussian(n: u32, m: usize) -> BiorthoSystem {
    construct(&Potential::quadratic(), n, m, &default_context(n)).unwrap()
}

#[test]
fn gaussian_bimoments_n1() {
    let ctx = default_context(1);
    let bm = bimoments(&Potential::quadratic(), 1, 2, &ctx).unwrap();
    let p = ctx.prec();
    let root = Float::with_val(p, 2u32 * ctx.pi()).sqrt();
    let half_exp = Float::with_val(p, 0.5f64).exp();
    assert!(rel(&bm.entries[(0, 0)], &root) < 1e-35);
    assert!(rel(&bm.entries[(0, 1)], &Float::with_val(p, &root * &half_exp)) < 1e-35);
    assert_eq!(bm.size(), 3);
    assert!(bm.leading_minors().iter().all(|d| *d > 0));
}

#[test]
fn gaussian_bimoment_closed_form_n4() {
    let ctx = default_context(4);
    let bm = bimoments(&Potential::quadratic(), 4, 2, &ctx).unwrap();
    let p = ctx.prec();
    // e^{j²/2n} √(2π/n) E[(Z + j/n)²] with Var Z = 1/n, (i, j) = (2, 1)
    let pref = Float::with_val(p, 0.125f64).exp() * Float::with_val(p, ctx.pi() / 2u32).sqrt();
    let expect = pref * Float::with_val(p, 0.3125f64);
    assert!(rel(&bm.entries[(2, 1)], &expect) < 1e-35);
}

#[test]
fn bimoment_degree_limit() {
    let ctx = default_context(2);
    assert!(matches!(
        bimoments(&Potential::quadratic(), 2, 11, &ctx),
        Err(BiorthoError::InvalidParameter(_))
    ));
    assert!(matches!(
        bimoments(&Potential::quadratic(), 0, 1, &ctx),
        Err(BiorthoError::InvalidParameter(_))
    ));
}

#[test]
fn gaussian_low_degrees_n1() {
    let sys = gaussian(1, 2);
    let p = sys.prec();
    let root = Float::with_val(p, 2u32 * sys.context().pi()).sqrt();
    assert!(rel(sys.h(0), &root) < 1e-35);
    assert_eq!(sys.p_coeffs(0).len(), 1);
    assert!(sys.p_coeffs(1)[0].to_f64().abs() < 1e-35);
    assert_eq!(sys.p_coeffs(1)[1], 1);
    let e_half = Float::with_val(p, 0.5f64).exp();
    assert!(absdiff(&Float::with_val(p, -&sys.q_coeffs(1)[0]), &e_half) < 1e-35);
    assert_eq!(sys.q_coeffs(1)[1], 1);

    let z = zeros(&sys, 1).unwrap();
    assert!(z.zeros_p[0].to_f64().abs() < 1e-30);
    assert!((z.zeros_qx[0].to_f64() - 0.5).abs() < 1e-30);
    assert!(zeros(&sys, 0).unwrap().zeros_p.is_empty());
    assert!(zeros(&sys, 3).is_err());
}

fn quartic() -> Potential {
    Potential::from_decimal_strs(&["0", "0", "0.5", "0", "0.05"]).unwrap()
}

/// Systems shared by the invariant tests.
fn systems() -> &'static Vec<BiorthoSystem> {
    static CELL: OnceLock<Vec<BiorthoSystem>> = OnceLock::new();
    CELL.get_or_init(|| {
        vec![
            construct(&Potential::quadratic(), 8, 8, &default_context(8)).unwrap(),
            construct(&Potential::quadratic(), 16, 16, &default_context(16)).unwrap(),
            construct(&quartic(), 8, 8, &default_context(8)).unwrap(),
        ]
    })
}

/// Pairing matrices on a grid with a step unrelated to the construction
/// grid.
fn pairings() -> &'static Vec<Vec<Vec<Float>>> {
    static CELL: OnceLock<Vec<Vec<Vec<Float>>>> = OnceLock::new();
    CELL.get_or_init(|| {
        systems()
            .iter()
            .map(|s| {
                let g = s.grid(s.steps() * 3 / 2 + 1, false);
                let m = s.max_degree();
                g.outer_sums(m + 1, m + 1, |k| s.p_all(&g.nodes[k]), |k| s.q_exp_all(&g.nodes[k]))
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn orthogonality_defect_bound(case in 0usize..3, i in 0usize..17, j in 0usize..17) {
        let sys = &systems()[case];
        let m = sys.max_degree();
        let (i, j) = (i % (m + 1), j % (m + 1));
        let pr = sys.prec();
        let mut d = Float::with_val(pr, &pairings()[case][i][j]);
        if i == j {
            d -= sys.h(i);
        }
        let h_max = sys.norming_constants().iter().fold(Float::new(pr), |a, h| a.max(h));
        let tol = sys.context().pow10(-((sys.context().digits / 3) as i32)) * h_max;
        prop_assert!(d.abs() <= tol);
    }
}

#[test]
fn norming_constants_positive_with_lower_bound() {
    for sys in systems() {
        let p = sys.prec();
        let ve = sys.potential().at_prec(p);
        let xm = sys.potential().argmin_shifted(&Float::new(p), p);
        let floor = Float::with_val(p, -(ve.v(&xm) + 10u32) * sys.n()).exp();
        for h in sys.norming_constants() {
            assert!(*h > floor);
        }
        assert!(sys.defect().to_f64() < 1e-20);
    }
}

#[test]
fn zeros_interlace() {
    for sys in systems() {
        let mut prev = zeros(sys, 0).unwrap();
        for j in 1..=sys.max_degree() {
            let next = zeros(sys, j).unwrap();
            assert_eq!(next.zeros_p.len(), j);
            assert!(interlaces(&prev, &next), "degree {j}");
            prev = next;
        }
    }
}

#[test]
fn cauchy_transform_properties() {
    let sys = &systems()[0];
    let p = sys.prec();
    for j in [0usize, 3] {
        let z = Cpx::with_val(p, 0.3, 0.7);
        let a = cauchy_transform_q(sys, j, &z).unwrap();
        let b = cauchy_transform_q(sys, j, &z.conj()).unwrap();
        // the i/2π prefactor turns conjugation into a sign flip
        assert!((&a.conj() + &b).abs().to_f64() < 1e-30 * a.abs().to_f64());
    }
    // z·Cq_0(z) → (i/2π) h_0 along the imaginary axis
    let limit = Float::with_val(p, sys.h(0) / (2u32 * sys.context().pi()));
    for y in [1e3, 1e4] {
        let z = Cpx::with_val(p, 0.0, y);
        let zc = &z * &cauchy_transform_q(sys, 0, &z).unwrap();
        assert!(zc.re.to_f64().abs() < 1e-2 * limit.to_f64());
        assert!(rel(&zc.im, &limit) < 1e-2);
    }
    let z = Cpx::with_val(p, 0.0, 1e4);
    let far = (&z * &cauchy_transform_q(sys, 3, &z).unwrap()).abs().to_f64();
    assert!(far.is_finite() && far < 1.0);
    assert!(cauchy_transform_q(sys, 0, &Cpx::with_val(p, 0.5, 0.0)).is_err());
}

#[test]
fn cauchy_transform_gaussian_against_tanh_sinh() {
    let sys = gaussian(1, 1);
    let got = cauchy_transform_q(&sys, 0, &Cpx::with_val(sys.prec(), 0.0, 2.0)).unwrap();
    // (i/2π) ∫ e^{−x²/2} (−x − 2i)/(x² + 4) dx at doubled precision
    let hi = sys.context().raised(sys.context().digits);
    let iv = RealInterval::from_f64(hi.prec(), -30.0, 30.0).unwrap();
    let w = |x: &Float| (-Float::with_val(hi.prec(), x.square_ref()) / 2u32).exp() / (Float::with_val(hi.prec(), x.square_ref()) + 4u32);
    let re_int = integrate_tanh_sinh(|x| -w(x) * x, &iv, &hi).unwrap();
    let im_int = integrate_tanh_sinh(|x| -w(x) * 2u32, &iv, &hi).unwrap();
    let two_pi = Float::with_val(hi.prec(), 2u32 * hi.pi());
    // i(re + i·im) = −im + i·re
    let want_re = -Float::with_val(hi.prec(), &im_int / &two_pi);
    let want_im = Float::with_val(hi.prec(), &re_int / &two_pi);
    assert!(absdiff(&got.re, &want_re) < 1e-10);
    assert!(absdiff(&got.im, &want_im) < 1e-10);
    assert!(want_re.to_f64() > 0.0);
}

#[test]
fn conjugated_pairs_biorthonormal() {
    let sys = gaussian(4, 4);
    let ectx = PrecisionContext::new(40).unwrap();
    let gauge = Gauge::solve(sys.potential(), 4, &[0, 1, 2, 3, 4], &ectx, 64).unwrap();
    let ctx = sys.context().clone().with_quad_tol_exp10(-30).unwrap();
    let iv = sys.window().clone();
    for i in 0..=4 {
        for j in 0..=4 {
            let v = crate::mpnum::integrate_gauss_legendre(
                |x| {
                    let (p, _) = gauge.pair(&sys, i, x).unwrap();
                    let (_, q) = gauge.pair(&sys, j, x).unwrap();
                    p * q
                },
                &iv,
                &ctx,
            )
            .unwrap()
            .to_f64();
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((v - want).abs() < 1e-15, "({i}, {j}) gives {v}");
        }
    }
    let t = Float::with_val(sys.prec(), 0.5f64);
    let eq = crate::equilibrium::Equilibrium::solve_with_nodes(sys.potential(), &t, &ectx, 64).unwrap();
    let x = Float::with_val(sys.prec(), 0.3f64);
    let (p2, q2) = conjugated_pair(&sys, &eq.data, 2, &x).unwrap();
    let (g2, h2) = gauge.pair(&sys, 2, &x).unwrap();
    assert!(rel(&p2, &g2) < 1e-30 && rel(&q2, &h2) < 1e-30);
    assert!(conjugated_pair(&sys, &eq.data, 3, &x).is_err());
}

#[test]
fn json_round_trip_and_tamper_check() {
    let sys = &systems()[0];
    let dir = std::env::temp_dir().join(format!("biortho-io-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("sys.json");
    save_system(&path, sys).unwrap();
    let back = load_system(&path).unwrap();
    assert_eq!(back.max_degree(), sys.max_degree());
    for j in 0..=sys.max_degree() {
        assert!(rel(back.h(j), sys.h(j)) < 1e-60);
    }
    let mut rec = BiorthoRecord::new(sys);
    rec.h[3] = (Float::with_val(sys.prec(), sys.h(3)) * 1.001f64).to_string_radix(10, None);
    assert!(matches!(rec.to_system(), Err(BiorthoError::Defect { .. })));
    std::fs::remove_dir_all(&dir).ok();
}
