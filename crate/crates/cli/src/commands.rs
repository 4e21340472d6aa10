use std::path::{Path, PathBuf};

use extsource::biortho::{BiorthoSystem, Gauge};
use extsource::equilibrium::{reflect_potential, Equilibrium, Potential};
use extsource::kernel::{
    alpha_limit, cd_coefficients, cd_decomposition, evaluate, kernel_conjugated, kernel_split, kernel_trace, reproducing_residual, KernelRequest,
    KernelRow, KernelSummary, Regime,
};
use extsource::mpnum::Cpx;
use extsource::PrecisionContext;
use rayon::prelude::*;
use rug::float::Constant;
use rug::Float;
use serde::Serialize;

use crate::cache::Cache;
use crate::config::{to_float, Validated};
use crate::error::CliError;
use crate::report::{write_json, CsvReport};

pub struct Run {
    pub cfg: Validated,
    pub out: PathBuf,
    pub cache: Cache,
}

fn sci(x: f64) -> String {
    format!("{x:e}")
}

impl Run {
    pub fn new(cfg: Validated, out: PathBuf, cache_dir: PathBuf) -> Result<Self, CliError> {
        std::fs::create_dir_all(&out).map_err(|e| CliError::io(&out, e))?;
        let cache = Cache::open(&cache_dir)?;
        Ok(Run { cfg, out, cache })
    }

    fn csv(&self, name: &str, header: &[&str]) -> Result<CsvReport, CliError> {
        CsvReport::create(&self.out.join(name), &self.cfg.hash, header)
    }

    fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        let path = self.out.join(name);
        write_json(&path, value)?;
        Ok(path)
    }

    fn dec(&self, x: &Float) -> String {
        x.to_string_radix(10, Some(self.cfg.raw.csv_digits))
    }

    fn eq_ctx(&self) -> Result<PrecisionContext, CliError> {
        Ok(PrecisionContext::new(self.cfg.raw.digits)?)
    }

    fn sys_ctx(&self, n: u32) -> Result<PrecisionContext, CliError> {
        let d = self.cfg.system_digits(n);
        Ok(PrecisionContext::new(d)?.with_quad_tol_exp10(-(d as i32) + 8)?)
    }

    fn system(&self, n: u32, m: usize) -> Result<BiorthoSystem, CliError> {
        let (sys, _) = self.cache.system(&self.cfg.potential, n, m, &self.sys_ctx(n)?)?;
        Ok(sys)
    }

    fn solve_t_one(&self, v: &Potential) -> Result<Equilibrium, CliError> {
        let ctx = self.eq_ctx()?;
        Ok(Equilibrium::solve(v, &ctx.float(1), &ctx)?)
    }

    fn x_star(&self, eq: &Equilibrium) -> Float {
        let p = eq.context().prec();
        match &self.cfg.x_star {
            Some(x) => to_float(x, p),
            None => Float::with_val(p, &eq.data.a + &eq.data.b) / 2u32,
        }
    }

    fn grid(&self, prec: u32) -> Vec<(Float, Float)> {
        self.cfg.grid.iter().map(|(x, y)| (to_float(x, prec), to_float(y, prec))).collect()
    }
}

pub fn equilibrium(run: &Run) -> Result<(), CliError> {
    let v = &run.cfg.potential;
    let ctx = run.eq_ctx()?;
    let mut csv = run.csv("equilibrium.csv", &["t", "c0", "c1", "a", "b", "alpha", "beta", "ell"])?;
    let solved: Vec<_> = run
        .cfg
        .t_list
        .par_iter()
        .map(|t| {
            run.cache.equilibrium(v, t, &ctx, || {
                let tf = to_float(t, ctx.prec());
                Ok(Equilibrium::solve(v, &tf, &ctx)?.data)
            })
        })
        .collect();
    let mut hits = 0;
    for (label, res) in run.cfg.raw.t_list.iter().zip(solved) {
        let (d, hit) = res?;
        hits += hit as usize;
        csv.row([
            label.clone(),
            run.dec(&d.c0),
            run.dec(&d.c1),
            run.dec(&d.a),
            run.dec(&d.b),
            run.dec(&d.alpha),
            run.dec(&d.beta),
            run.dec(&d.ell),
        ])?;
    }
    println!("equilibrium: {} value(s) of t, {hits} from cache -> {}", run.cfg.t_list.len(), csv.path().display());
    Ok(())
}

#[derive(Serialize)]
struct BiorthoSummary {
    n: u32,
    max_degree: usize,
    digits: u32,
    steps: usize,
    defect: String,
    h_n: String,
    /// `2π c1^{1/2} e^{nℓ}` at `t = 1`.
    h_n_predicted: String,
    relative_deviation: f64,
}

pub fn biortho(run: &Run) -> Result<(), CliError> {
    let eq = run.solve_t_one(&run.cfg.potential)?;
    let mut csv = run.csv("biortho.csv", &["n", "j", "h"])?;
    let mut summary = Vec::new();
    for &n in &run.cfg.raw.n_list {
        let sys = run.system(n, n as usize)?;
        let p = sys.prec();
        for (j, h) in sys.norming_constants().iter().enumerate() {
            csv.row([n.to_string(), j.to_string(), run.dec(h)])?;
        }
        let pred = Float::with_val(p, Constant::Pi) * 2u32 * Float::with_val(p, eq.data.c1.sqrt_ref()) * Float::with_val(p, &eq.data.ell * n).exp();
        let h_n = sys.h(n as usize).clone();
        let dev = (Float::with_val(p, &h_n / &pred) - 1u32).abs().to_f64();
        summary.push(BiorthoSummary {
            n,
            max_degree: sys.max_degree(),
            digits: sys.context().digits,
            steps: sys.steps(),
            defect: sci(sys.defect().to_f64()),
            h_n: run.dec(&h_n),
            h_n_predicted: run.dec(&pred),
            relative_deviation: dev,
        });
        run.json("biortho_summary.json", &summary)?;
        println!("biortho: n = {n}, defect {:.2e}, |h_n/prediction - 1| = {dev:.3e}", sys.defect().to_f64());
    }
    println!("biortho -> {}", csv.path().display());
    Ok(())
}

#[derive(Serialize)]
struct UniversalitySummary<'a> {
    config_hash: &'a str,
    regime: Regime,
    runs: &'a [KernelSummary],
}

pub fn universality(run: &Run) -> Result<(), CliError> {
    let regime = run.cfg.raw.regime;
    let eq1 = match regime {
        Regime::EdgeLeft => None,
        _ => Some(run.solve_t_one(&run.cfg.potential)?),
    };
    let mut csv = run.csv("universality.csv", &KernelRow::HEADER)?;
    let mut runs = Vec::new();
    for &n in &run.cfg.raw.n_list {
        let sys = run.system(n, n as usize)?;
        let reflected;
        let eq = match &eq1 {
            Some(eq) => eq,
            None => {
                reflected = run.solve_t_one(&reflect_potential(&run.cfg.potential, n))?;
                &reflected
            }
        };
        let req = KernelRequest {
            n,
            regime,
            x_star: matches!(regime, Regime::Bulk | Regime::BulkDensity).then(|| run.x_star(eq)),
            grid: run.grid(sys.prec()),
            conjugate: run.cfg.raw.conjugate,
        };
        let result = evaluate(&req, &sys, eq)?;
        for row in &result.rows {
            csv.row(row.fields(run.cfg.raw.csv_digits))?;
        }
        let s = result.summary(regime, n);
        println!("universality: {regime} n = {n}, max abs err {:.4e}, max rel err {:.4e}", s.max_abs_err, s.max_rel_err);
        runs.push(s);
        run.json(
            "universality_summary.json",
            &UniversalitySummary {
                config_hash: &run.cfg.hash,
                regime,
                runs: &runs,
            },
        )?;
    }
    println!("universality -> {}", csv.path().display());
    Ok(())
}

#[derive(Serialize)]
struct DiagnosticsSummary {
    n: u32,
    max_degree: usize,
    digits: u32,
    d: usize,
    quad_error: f64,
    max_identity_residual: f64,
    residual_bound: f64,
    a_n_minus_1_n: f64,
    alpha_minus_1: f64,
}

pub fn diagnostics(run: &Run) -> Result<(), CliError> {
    let cfg = &run.cfg;
    let big_m = cfg.raw.diagnostics.big_m;
    let eq = run.solve_t_one(&cfg.potential)?;
    let x_star = run.x_star(&eq);
    let xs = x_star.to_f64();
    let literal = cfg.raw.regime == Regime::Bulk;
    let mut ident = run.csv(
        "diagnostics_identity.csv",
        &["n", "xi", "eta", "residual", "residual_bound", "abs_j1", "abs_j2", "main_term", "sine_target"],
    )?;
    let mut alpha = run.csv("diagnostics_alpha.csv", &["n", "l", "alpha_l", "coefficient", "abs_deviation"])?;
    let mut split = run.csv(
        "diagnostics_split.csv",
        &["n", "point", "u", "v", "k1", "k2", "k3", "k4", "sum", "kernel", "abs_residual"],
    )?;
    let mut summary = Vec::new();
    for &n in &cfg.raw.n_list {
        let d = (cfg.delta * n as f64).floor() as usize;
        let m = n as usize + d.max(big_m).max(4);
        let sys = run.system(n, m)?;
        let p = sys.prec();
        let digits = sys.context().digits;
        let diag = cd_coefficients(&sys, Gauge::unit(n, m), cfg.delta)?;
        let bound = sys.context().pow10(-((digits / 4) as i32)).to_f64();

        let psi = eq.psi(&x_star).to_f64();
        let s = psi * n as f64 * if literal { std::f64::consts::PI } else { 1.0 };
        let mut worst = 0f64;
        for (xi, eta) in run.grid(p) {
            let u = Cpx::from_real(Float::with_val(p, &xi / s) + &x_star);
            let v = Cpx::from_real(Float::with_val(p, &eta / s) + &x_star);
            let t = cd_decomposition(&sys, &diag, &eq, big_m, &u, &v)?;
            let r = t.residual.to_f64();
            worst = worst.max(r);
            let target = xs.exp() / std::f64::consts::PI * (std::f64::consts::PI * (xi.to_f64() - eta.to_f64())).sin();
            ident.row([
                n.to_string(),
                run.dec(&xi),
                run.dec(&eta),
                sci(r),
                sci(bound),
                sci(t.conjugated(&t.j1).abs().to_f64()),
                sci(t.conjugated(&t.j2).abs().to_f64()),
                sci(t.conjugated(&t.main_term).to_f64().0),
                sci(target),
            ])?;
        }

        let nn = n as usize;
        let a_top = diag.a(nn - 1, nn)?;
        let alpha_m1 = alpha_limit(-1, &eq.data)?;
        for l in -1i32..=4 {
            let al = alpha_limit(l, &eq.data)?;
            // a_{n+j, n−k} with j + k = l
            let c = if l < 0 { a_top.clone() } else { diag.a(nn + l as usize - 1, nn - 1)? };
            let dev = Float::with_val(p, &c - &al).abs();
            alpha.row([n.to_string(), l.to_string(), run.dec(&al), run.dec(&c), sci(dev.to_f64())])?;
        }

        let b = Float::with_val(p, &eq.data.b);
        let near = Float::with_val(p, 1u32) / 10u32 + &x_star;
        for (label, u, v) in [("bulk", &x_star, &x_star), ("bulk_offdiag", &x_star, &near), ("edge", &b, &b)] {
            let u = Float::with_val(p, u);
            let v = Float::with_val(p, v);
            let parts = kernel_split(&sys, &eq, cfg.delta, cfg.delta_prime, big_m as f64, &u, &v)?;
            let total = parts.conjugated.iter().fold(Float::new(p), |acc, k| acc + k);
            let k = kernel_conjugated(&sys, &eq, &u, &v)?;
            let res = Float::with_val(p, &total - &k).abs().to_f64();
            let [k1, k2, k3, k4] = &parts.conjugated;
            split.row([
                n.to_string(),
                label.to_string(),
                run.dec(&u),
                run.dec(&v),
                run.dec(k1),
                run.dec(k2),
                run.dec(k3),
                run.dec(k4),
                run.dec(&total),
                run.dec(&k),
                sci(res),
            ])?;
        }

        summary.push(DiagnosticsSummary {
            n,
            max_degree: m,
            digits,
            d,
            quad_error: diag.quad_error.to_f64(),
            max_identity_residual: worst,
            residual_bound: bound,
            a_n_minus_1_n: a_top.to_f64(),
            alpha_minus_1: alpha_m1.to_f64(),
        });
        run.json("diagnostics_summary.json", &summary)?;
        println!(
            "diagnostics: n = {n}, identity residual {worst:.2e} (bound {bound:.0e}), a_(n-1,n) = {:.6}",
            a_top.to_f64()
        );
    }
    println!("diagnostics -> {}", run.out.display());
    Ok(())
}

struct Check {
    name: &'static str,
    n: Option<u32>,
    value: f64,
    tolerance: f64,
}

pub fn verify(run: &Run) -> Result<(), CliError> {
    let eq = run.solve_t_one(&run.cfg.potential)?;
    let ctx = eq.context();
    let p = ctx.prec();
    let third = |digits: u32| ctx.pow10(-((digits / 3) as i32)).to_f64().max(1e-300);
    let mut checks = Vec::new();
    let mass = (eq.integrate(|x| Float::with_val(x.prec(), 1u32)) - 1u32).abs().to_f64();
    checks.push(Check {
        name: "equilibrium_mass",
        n: None,
        value: mass,
        tolerance: third(ctx.digits),
    });
    let (a, b) = (eq.data.a.to_f64(), eq.data.b.to_f64());
    let el: Vec<f64> = [0.25, 0.5, 0.75].iter().map(|f| eq.effective_potential(&Float::with_val(p, a + f * (b - a))).to_f64()).collect();
    let spread = el.iter().cloned().fold(f64::MIN, f64::max) - el.iter().cloned().fold(f64::MAX, f64::min);
    checks.push(Check {
        name: "euler_lagrange_spread",
        n: None,
        value: spread,
        tolerance: 1e-15,
    });
    let x_star = run.x_star(&eq);
    for &n in &run.cfg.raw.n_list {
        let sys = run.system(n, n as usize)?;
        let sp = sys.prec();
        let defect = sys.orthogonality_defect(sys.steps() * 3 / 2 + 1, false).to_f64();
        checks.push(Check {
            name: "orthogonality_defect",
            n: Some(n),
            value: defect,
            tolerance: 10f64.powi(-((sys.context().digits / 3).min(300) as i32)),
        });
        let trace = (kernel_trace(&sys)? - n).abs().to_f64();
        checks.push(Check {
            name: "kernel_trace",
            n: Some(n),
            value: trace,
            tolerance: 1e-10,
        });
        let x = Float::with_val(sp, &x_star);
        let y = Float::with_val(sp, &x_star + 0.25);
        let proj = reproducing_residual(&sys, &x, &y)?.abs().to_f64();
        checks.push(Check {
            name: "reproducing_property",
            n: Some(n),
            value: proj,
            tolerance: 1e-10,
        });
    }
    let mut csv = run.csv("verify.csv", &["check", "n", "value", "tolerance", "status"])?;
    let mut failed = 0;
    for c in &checks {
        let ok = c.value < c.tolerance;
        failed += !ok as usize;
        let n = c.n.map(|n| n.to_string()).unwrap_or_default();
        let status = if ok { "pass" } else { "fail" };
        csv.row([c.name.to_string(), n.clone(), sci(c.value), sci(c.tolerance), status.to_string()])?;
        println!("{:<5} {:<24} n={:<4} {:.3e} (tolerance {:.0e})", status.to_uppercase(), c.name, n, c.value, c.tolerance);
    }
    if failed > 0 {
        return Err(CliError::Numerical(format!("{failed} of {} checks failed", checks.len())));
    }
    println!("verify: all {} checks passed -> {}", checks.len(), csv.path().display());
    Ok(())
}

pub fn default_out(cfg: &Validated, flag: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| cfg.raw.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"))
}
