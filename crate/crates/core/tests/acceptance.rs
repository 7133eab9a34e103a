//! Acceptance criteria, one line each. Run with `cargo test --test acceptance`;
//! exits nonzero when any criterion fails.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use levy_spde::cli::suites::mixed_benchmark;
use levy_spde::cz::{cz_ensemble, SpaceTimeGrid};
use levy_spde::estimates::{
    hormander_sweep, plancherel_p2, scaling_invariance, t1_ensemble, verify_t1, HormanderSetup, T1Config, Verdict,
};
use levy_spde::function_spaces::{random_band_limited, Field, LPSystem};
use levy_spde::jump_noise::{ito_isometry_check, sample_path, MarkSpace, TimeField};
use levy_spde::levy_measure::{BernsteinFamily, BernsteinKernel, LevyMeasure};
use levy_spde::quad::logspace;
use levy_spde::scaling::ScalingTriple;
use levy_spde::solver::{residual_order, semigroup_apply};
use levy_spde::spectral::{
    density, scaling_identity_check, subordination_check, FrequencyGrid, GridFunction, SymbolTable,
};

type Outcome = Result<(bool, String), String>;
type Criterion = (&'static str, fn() -> Outcome);

fn cauchy_table(g: &FrequencyGrid) -> SymbolTable {
    SymbolTable::from_fn(g, |xi| Complex64::new(-2.0 * PI * PI * xi[0].abs(), 0.0))
}

fn gaussian(g: &FrequencyGrid, width: f64) -> GridFunction {
    GridFunction::from_fn(g, |x| (-PI * (x[0] / width).powi(2)).exp())
}

/// Adaptive Simpson on [a, b], bisected at least four times so periodic
/// integrands cannot fool the first error estimate.
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || depth < 26 && (left + right - whole).abs() <= 15.0 * tol.max(64.0 * f64::EPSILON * whole.abs()) {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    rec(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 30)
}

/// ψ(ξ) = ∫(cos 2πξy − 1)|y|^{−2} dy by adaptive quadrature over 20 periods
/// plus the asymptotic tail −1/A + 2/(a²A³) (next term O((aA)^{−5}) relative).
fn cauchy_by_quadrature(xi: f64) -> f64 {
    let a = 2.0 * PI * xi;
    let period = 2.0 * PI / a;
    let f = move |y: f64| if y == 0.0 { -0.5 * a * a } else { -2.0 * (0.5 * a * y).sin().powi(2) / (y * y) };
    let periods = 20;
    let body: f64 = (0..periods).map(|k| simpson(&f, k as f64 * period, (k + 1) as f64 * period, 1e-11 * a)).sum();
    let big = periods as f64 * period;
    2.0 * (body - 1.0 / big + 2.0 / (a * a * big.powi(3)))
}

fn c1_symbol() -> Outcome {
    let g = FrequencyGrid::new(1, 128, 16.0).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let tab = SymbolTable::eval(&LevyMeasure::stable(1, 1.0).map_err(|e| e.to_string())?, &g).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let (mut worst_q, mut worst_c): (f64, f64) = (0.0, 0.0);
    for k in 1..=64 {
        let xi = g.xi(k)[0];
        let v = tab.values()[k];
        let closed = -2.0 * PI * PI * xi.abs();
        worst_c = worst_c.max(((v.re - closed) / closed).abs().max(v.im.abs() / closed.abs()));
        let q = cauchy_by_quadrature(xi.abs());
        worst_q = worst_q.max(((v.re - q) / q).abs());
    }
    Ok((
        worst_q < 1e-6 && worst_c < 1e-6 && secs < 1.0,
        format!("max rel err vs quadrature {worst_q:.2e}, vs -2pi^2|xi| {worst_c:.2e} (tol 1e-6), eval {secs:.3} s (< 1 s)"),
    ))
}

fn c2_density() -> Outcome {
    let g = FrequencyGrid::new(1, 1 << 18, 16384.0).map_err(|e| e.to_string())?;
    let tab = cauchy_table(&g);
    let (mut rel, mut mass, mut secs): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for t in [0.5, 1.0, 2.0] {
        let start = Instant::now();
        let p = density(&tab, t, 0.0).map_err(|e| e.to_string())?;
        secs += start.elapsed().as_secs_f64();
        mass = mass.max((p.integral() - 1.0).abs());
        for (i, v) in p.values().iter().enumerate() {
            let x = g.x(i)[0];
            if x.abs() <= 10.0 {
                let exact = t / ((PI * t).powi(2) + x * x);
                rel = rel.max(((v - exact) / exact).abs());
            }
        }
    }
    Ok((
        rel < 1e-5 && mass < 1e-8 && secs < 1.0,
        format!("max rel err {rel:.2e} (tol 1e-5), mass err {mass:.2e} (tol 1e-8), {secs:.2} s (< 1 s)"),
    ))
}

fn c3_scaling() -> Outcome {
    let e = |e: levy_spde::Error| e.to_string();
    let g = FrequencyGrid::new(1, 256, 32.0).map_err(e)?;
    let ts = [0.25, 1.0, 4.0];
    let mut stable: f64 = 0.0;
    for sigma in [0.5, 1.0, 1.5] {
        let pi = LevyMeasure::stable(1, sigma).map_err(e)?;
        let k = ScalingTriple::power(sigma).map_err(e)?;
        stable = stable.max(scaling_identity_check(&pi, &k, &pi, None, 0.5, &ts, &g).map_err(e)?.max_error());
    }
    let kernel = BernsteinKernel::new(BernsteinFamily::PowerSum(vec![0.6, 0.8]), 1).map_err(e)?;
    let pi = LevyMeasure::bernstein(&kernel, 2, None).map_err(e)?;
    let k = kernel.scaling().map_err(e)?;
    let bern = scaling_identity_check(&pi, &k, &pi, None, 0.5, &ts, &g).map_err(e)?.max_error();
    Ok((stable < 1e-6 && bern < 1e-3, format!("stable max err {stable:.2e} (tol 1e-6), Bernstein {bern:.2e} (tol 1e-3)")))
}

fn c4_subordination() -> Outcome {
    let e = |e: levy_spde::Error| e.to_string();
    let g = FrequencyGrid::new(1, 256, 16.0).map_err(e)?;
    let tab = cauchy_table(&g);
    let tests = [
        gaussian(&g, 1.0),
        GridFunction::from_fn(&g, |x| (2.0 * PI * x[0] / 4.0).cos() * (-PI * x[0] * x[0] / 4.0).exp()),
        GridFunction::from_fn(&g, |x| x[0] * (-PI * x[0] * x[0] / 2.0).exp()),
    ];
    let mut worst: f64 = 0.0;
    for f in &tests {
        worst = worst.max(subordination_check(&tab, 0.5, f, 1.0).map_err(e)?.sup_abs);
    }
    Ok((worst < 1e-3, format!("max sup-norm gap {worst:.2e} (tol 1e-3)")))
}

fn c5_partition() -> Outcome {
    let e = |e: levy_spde::Error| e.to_string();
    let (mut res, mut rec): (f64, f64) = (0.0, 0.0);
    for (d, n, base) in [(1, 256, 2), (1, 1024, 3), (2, 128, 2)] {
        let g = FrequencyGrid::new(d, n, if d == 2 { 8.0 } else { 16.0 }).map_err(e)?;
        let sys = LPSystem::new(base, &g).map_err(e)?;
        res = res.max(sys.partition_residual());
        let f = GridFunction::from_fn(&g, |x| (-PI * (x[0] * x[0] + x[1] * x[1])).exp() * (1.0 + x[0]));
        rec = rec.max(sys.reconstruction_error(&f).map_err(e)?);
    }
    Ok((res < 1e-12 && rec < 1e-10, format!("partition residual {res:.2e} (tol 1e-12), reconstruction {rec:.2e} (tol 1e-10)")))
}

fn c6_isometry() -> Outcome {
    let e = |e: levy_spde::Error| e.to_string();
    let g = FrequencyGrid::new(1, 256, 16.0).map_err(e)?;
    let marks = MarkSpace::new(vec![1.5]).map_err(e)?;
    let h = Field::new(marks.value_space(2.0).map_err(e)?, vec![gaussian(&g, 1.0)]).map_err(e)?;
    let start = Instant::now();
    let r = ito_isometry_check(&h, &marks, 1.0, 10_000, 11, 64).map_err(e)?;
    let secs = start.elapsed().as_secs_f64();
    let ok = r.z_score.abs() < 3.0 && secs < 30.0;
    Ok((ok, format!("mean {:.5} vs exact {:.5}, z = {:.2} (|z| < 3), {secs:.1} s (< 30 s)", r.mean, r.exact, r.z_score)))
}

fn c7_contraction() -> Outcome {
    let e = |e: levy_spde::Error| e.to_string();
    let g = FrequencyGrid::new(1, 256, 16.0).map_err(e)?;
    let tab = SymbolTable::eval(&LevyMeasure::stable(1, 1.0).map_err(e)?, &g).map_err(e)?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let f = random_band_limited(&g, if i % 2 == 0 { 0.25 } else { 2.0 }, 6, 2.0, &mut rng);
        for lambda in [0.0, 1.0, 10.0] {
            for t in [0.1, 1.0, 5.0] {
                let u = semigroup_apply(&f, t, lambda, &tab).map_err(e)?;
                for p in [1.5, 2.0, 4.0] {
                    worst = worst.max(u.lp_norm(p) / ((-lambda * t).exp() * f.lp_norm(p)));
                }
            }
        }
    }
    Ok((worst <= 1.0 + 1e-6, format!("max |T_t g|_p / (e^(-lambda t)|g|_p) = {worst:.8} (<= 1 + 1e-6)")))
}

fn c8_residual() -> Outcome {
    let e = |e: levy_spde::Error| e.to_string();
    let g = FrequencyGrid::new(1, 256, 16.0).map_err(e)?;
    let spec = mixed_benchmark(cauchy_table(&g), 1.0).map_err(e)?;
    let path = sample_path(&spec.marks, spec.horizon, 3).map_err(e)?;
    let r = residual_order(&spec, &path, &[64, 128, 256, 512]).map_err(e)?;
    Ok((r.order >= 1.8, format!("fitted order {:.3} (>= 1.8) with {} jumps", r.order, path.events.len())))
}

fn c9_plancherel() -> Outcome {
    let e = |e: levy_spde::Error| e.to_string();
    let g = FrequencyGrid::new(1, 256, 16.0).map_err(e)?;
    let tab = SymbolTable::eval(&LevyMeasure::stable(1, 1.0).map_err(e)?, &g).map_err(e)?;
    let marks = MarkSpace::new(vec![1.0, 2.0]).map_err(e)?;
    let phi = Field::new(marks.value_space(2.0).map_err(e)?, vec![gaussian(&g, 1.0), gaussian(&g, 0.5)]).map_err(e)?;
    let r = plancherel_p2(&tab, &tab, &TimeField::constant(&phi), &marks, 0.0, 2.0, 0.0, 1).map_err(e)?;
    Ok((r.constant <= 0.5 + 1e-6, format!("constant {:.6} (<= 0.5 + 1e-6)", r.constant)))
}

fn c10_hormander() -> Outcome {
    let e = |e: levy_spde::Error| e.to_string();
    let start = Instant::now();
    let pi = LevyMeasure::stable(1, 1.0).map_err(e)?;
    let k = ScalingTriple::power(1.0).map_err(e)?;
    let setup = HormanderSetup::new(&pi, &pi, &k, 4.0, 0.0, 10.0).map_err(e)?;
    let r = hormander_sweep(&setup, &logspace(0.1, 10.0, 5), &[-1.0, 0.0, 0.5, 1.0], &[0.0, 0.5, 1.0]).map_err(e)?;
    let secs = start.elapsed().as_secs_f64();
    let ok = r.sup.is_finite() && r.variation() < 0.2 && secs < 300.0;
    Ok((ok, format!("sup {:.4}, variation across delta {:.3} (< 0.2), {secs:.1} s (< 300 s)", r.sup, r.variation())))
}

fn c11_t1() -> Outcome {
    let e = |e: levy_spde::Error| e.to_string();
    let start = Instant::now();
    let cases = t1_ensemble(256, 16.0, 1.0, 512).map_err(e)?;
    let cfg = T1Config::default();
    let rep = verify_t1(&cases, &cfg).map_err(e)?;
    let finite = rep.rows.iter().all(|r| r.constant.is_finite() && r.verdict != Verdict::Violated);
    let under = rep.rows.iter().filter(|r| r.verdict == Verdict::Underpowered).count();
    let gap = scaling_invariance(&cases, &cfg, &rep, 7.0).map_err(e)?;
    let worst = rep.slopes.iter().map(|s| s.slope).fold(-1.0, |a: f64, b| if (b + 1.0).abs() > (a + 1.0).abs() { b } else { a });
    let slopes_ok = !rep.slopes.is_empty() && rep.slopes.iter().all(|s| (s.slope + 1.0).abs() <= 0.1);
    let secs = start.elapsed().as_secs_f64();
    let ok = cases.len() == 12 && finite && gap < 1e-9 && slopes_ok && secs < 1200.0;
    Ok((
        ok,
        format!(
            "{} specs, {} rows all finite: {finite} ({under} underpowered), max C {:.3}, x7 gap {gap:.1e} (< 1e-9), worst slope {worst:.3} (-1 +- 0.1), {secs:.0} s (< 1200 s)",
            cases.len(),
            rep.rows.len(),
            rep.max_constant("Lu").max(rep.max_constant("u")),
        ),
    ))
}

fn c12_cz() -> Outcome {
    let e = |e: levy_spde::Error| e.to_string();
    let k = ScalingTriple::power(1.0).map_err(e)?;
    let mut reps = Vec::new();
    for n in [32, 64] {
        reps.push(cz_ensemble(&SpaceTimeGrid::new(n, n, 1.0, -1.0, 1.0).map_err(e)?, &k, 50, 5).map_err(e)?);
    }
    let rows = reps.iter().flat_map(|r| &r.rows);
    let recon = rows.clone().map(|r| r.reconstruction).fold(0.0, f64::max);
    let part = rows.map(|r| r.part_integral).fold(0.0, f64::max);
    let var = reps[0].variation(&reps[1]);
    let ok = recon <= 4.0 * f64::EPSILON && part < 1e-12 && var < 2.0;
    Ok((ok, format!("g + sum b_k error {recon:.1e}, max |int b_k| {part:.1e}, constant ratio across resolutions {var:.3} (< 2)")))
}

fn run_cli(config: &Path, out: &Path, threads: usize) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_levy-spde"))
        .args(["run", config.to_str().unwrap(), "--out", out.to_str().unwrap(), "--threads", &threads.to_string()])
        .output()
        .map_err(|e| e.to_string())?;
    if !status.status.success() {
        return Err(String::from_utf8_lossy(&status.stderr).into_owned());
    }
    Ok(())
}

fn c13_determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("levy-spde-acceptance-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let cfg = dir.join("all.toml");
    std::fs::write(
        &cfg,
        "seed = 21\nsuites = [\"symbols\", \"densities\", \"spaces\", \"noise\", \"solver\", \"t1\", \"hormander\", \"cz\"]\n\
         [ensemble]\nn_low = 64\nn_high = 128\nisometry = 500\n[cz]\nresolutions = [16, 32]\nfields = 6\n",
    )
    .map_err(|e| e.to_string())?;
    let runs = [(dir.join("a"), 1), (dir.join("b"), 1), (dir.join("c"), 4)];
    for (out, threads) in &runs {
        run_cli(&cfg, out, *threads)?;
    }
    let mut files: Vec<_> = std::fs::read_dir(&runs[0].0).map_err(|e| e.to_string())?.map(|e| e.unwrap().file_name()).collect();
    files.sort();
    let mut differing = Vec::new();
    for f in &files {
        let a = std::fs::read(runs[0].0.join(f)).map_err(|e| e.to_string())?;
        for (out, _) in &runs[1..] {
            if std::fs::read(out.join(f)).ok().as_deref() != Some(&a[..]) {
                differing.push(f.to_string_lossy().into_owned());
            }
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok((differing.is_empty(), format!("{} files compared over 3 runs (threads 1, 1, 4); differing: {differing:?}", files.len())))
}

fn main() {
    let criteria: [Criterion; 13] = [
        ("symbol oracle (Cauchy, 64 frequencies)", c1_symbol),
        ("density oracle (Cauchy)", c2_density),
        ("scaling identity", c3_scaling),
        ("subordination consistency", c4_subordination),
        ("Littlewood-Paley partition of unity", c5_partition),
        ("Ito isometry", c6_isometry),
        ("semigroup contraction", c7_contraction),
        ("solver residual order", c8_residual),
        ("Plancherel bound (p = 2)", c9_plancherel),
        ("Hormander sweep plateau", c10_hormander),
        ("a priori estimate constants", c11_t1),
        ("CZ suite", c12_cz),
        ("determinism", c13_determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let id = format!("{}", i + 1);
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let (ok, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
        failed += usize::from(!ok);
        println!("{} [{id:>2}] {name}: {detail} [{:.1} s]", if ok { "PASS" } else { "FAIL" }, start.elapsed().as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
