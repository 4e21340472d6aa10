use std::sync::OnceLock;

use extsource::biortho::{construct, default_context, zeros, BiorthoSystem, Gauge};
use extsource::equilibrium::{map_j, Branch, Equilibrium, Potential};
use extsource::mpnum::{airy, complex_newton, Cpx, MpError};
use extsource::PrecisionContext;
use rug::Float;

fn eq_ctx() -> PrecisionContext {
    PrecisionContext::new(60).unwrap()
}

fn system32() -> &'static BiorthoSystem {
    static CELL: OnceLock<BiorthoSystem> = OnceLock::new();
    CELL.get_or_init(|| construct(&Potential::quadratic(), 32, 32, &default_context(32)).unwrap())
}

fn eq1() -> &'static Equilibrium {
    static CELL: OnceLock<Equilibrium> = OnceLock::new();
    CELL.get_or_init(|| {
        let c = eq_ctx();
        Equilibrium::solve(&Potential::quadratic(), &c.float(1), &c).unwrap()
    })
}

/// `e^{nF_1(x)} p̃_n(x)`.
fn scaled_p(sys: &BiorthoSystem, gauge: &Gauge, eq: &Equilibrium, x: f64) -> f64 {
    let n = sys.n();
    let xf = Float::with_val(sys.prec(), x);
    let (pt, _) = gauge.pair(sys, n as usize, &xf).unwrap();
    let f = eq.f_real(&Float::with_val(eq.context().prec(), x)).to_f64();
    pt.to_f64() * (n as f64 * f).exp()
}

fn gauge_n(sys: &BiorthoSystem) -> Gauge {
    Gauge::solve(sys.potential(), sys.n(), &[sys.n() as usize], &eq_ctx(), 512).unwrap()
}

#[test]
fn bulk_amplitude_of_p_n() {
    let sys = system32();
    let eq = eq1();
    let gauge = gauge_n(sys);
    let d = &eq.data;
    let x_star = (d.a.to_f64() + d.b.to_f64()) / 2.0;
    let psi = eq.psi(&Float::with_val(eq.context().prec(), x_star)).to_f64();
    let period = 2.0 / (sys.n() as f64 * psi);
    let amp = (0..96)
        .map(|k| scaled_p(sys, &gauge, eq, x_star + period * (k as f64 / 96.0 - 0.5)).abs())
        .fold(0.0, f64::max);
    // 2|s + ½| / |s² − ¼ − 1/c1|^½ at s = I₊(x*)
    let s = eq.inverse_map(&Float::with_val(eq.context().prec(), x_star), Branch::Plus).unwrap();
    let (sr, si) = s.to_f64();
    let c1 = d.c1.to_f64();
    let num = ((sr + 0.5).powi(2) + si * si).sqrt();
    let (dr, di) = (sr * sr - si * si - 0.25 - 1.0 / c1, 2.0 * sr * si);
    let predicted = 2.0 * num / (dr * dr + di * di).sqrt().sqrt();
    assert!((amp - predicted).abs() < 0.1 * predicted, "amplitude {amp} vs {predicted}");
}

#[test]
fn right_edge_airy_profile_of_p_n() {
    let sys = system32();
    let eq = eq1();
    let gauge = gauge_n(sys);
    let d = &eq.data;
    let n = sys.n() as f64;
    let scale = (std::f64::consts::PI * d.beta.to_f64() * n).powf(2.0 / 3.0);
    let (c1, sb) = (d.c1.to_f64(), d.s_b.to_f64());
    let pref = (2.0 * std::f64::consts::PI).sqrt() / (c1.sqrt() * (sb - 0.5) * sb.powf(0.25));
    let actx = eq_ctx();
    let mut worst = 0.0f64;
    let mut peak = 0.0f64;
    for k in 0..=12 {
        let u = -1.0 + 0.25 * k as f64;
        let got = scaled_p(sys, &gauge, eq, d.b.to_f64() + u / scale) / scale.powf(0.25);
        let pred = pref * airy(&actx.float(u), &actx).0.to_f64();
        worst = worst.max((got - pred).abs());
        peak = peak.max(pred.abs());
    }
    assert!(worst < 0.15 * peak, "edge error {worst} vs peak {peak}");
}

#[test]
fn low_degree_zeros_cluster_at_the_minimum() {
    let sys = system32();
    for j in 1..=4 {
        let z = zeros(sys, j).unwrap();
        for x in z.zeros_p.iter().chain(&z.zeros_qx) {
            assert!(x.to_f64().abs() < 0.5, "degree {j} zero at {}", x.to_f64());
        }
    }
}

#[test]
fn top_degree_zeros_inside_the_support_n24() {
    let sys = construct(&Potential::quadratic(), 24, 24, &default_context(24)).unwrap();
    let c = eq_ctx();
    let eq = Equilibrium::solve(&Potential::quadratic(), &c.float(1), &c).unwrap();
    let (a, b) = (eq.data.a.to_f64(), eq.data.b.to_f64());
    let z = zeros(&sys, 24).unwrap();
    for x in z.zeros_p.iter().chain(&z.zeros_qx) {
        let x = x.to_f64();
        assert!(x > a - 0.2 && x < b + 0.2, "zero {x} outside [{a}, {b}]");
    }
}

#[test]
fn cauchy_transform_outer_asymptotics() {
    // |Cq_n(z)| against |i e^{−n g(z) + nℓ} / (c1^½ (s² − ¼ − 1/c1)^½)| away from the support
    let sys = system32();
    let eq = eq1();
    let p = sys.prec();
    let z = Cpx::with_val(p, 0.5, 1.5);
    let cq = extsource::biortho::cauchy_transform_q(sys, 32, &z).unwrap().abs().to_f64();
    let zc = Cpx::with_val(eq.context().prec(), 0.5, 1.5);
    let (g, _) = eq.g_functions(&zc).unwrap();
    let (c1f, c0f) = (eq.data.c1.clone(), eq.data.c0.clone());
    let ctx = eq.context();
    let half = ctx.float(0.5);
    let s0 = (&zc.add_real(&Float::with_val(ctx.prec(), -&c0f))).scale(&Float::with_val(ctx.prec(), c1f.recip_ref()));
    let s = complex_newton(
        |s| {
            let v = &map_j(&c1f, &c0f, s, ctx).map_err(|e| MpError::InvalidArgument(e.to_string()))? - &zc;
            let d = (&s.add_real(&half).recip() - &s.add_real(&Float::with_val(ctx.prec(), -&half)).recip()).add_real(&c1f);
            Ok((v, d))
        },
        &s0,
        ctx,
    )
    .unwrap();
    let c1 = eq.data.c1.to_f64();
    let (sr, si) = s.to_f64();
    let (dr, di) = (sr * sr - si * si - 0.25 - 1.0 / c1, 2.0 * sr * si);
    let n = 32.0;
    let log_pred = -n * g.re.to_f64() + n * eq.data.ell.to_f64() - 0.5 * c1.ln() - 0.25 * (dr * dr + di * di).ln();
    assert!((cq.ln() - log_pred).abs() < 0.1, "{} vs {}", cq.ln(), log_pred);
}
