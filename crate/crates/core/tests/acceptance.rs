//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use orbitvol::convexity::{check_convexity, fit_log_affine, ConvexityVerdict, Functional, LineSampler, Margins};
use orbitvol::fd::{self, StepRule};
use orbitvol::optimizer::{
    boundary_decay_check, find_critical_orbit, multistart_uniqueness, random_starts, NewtonOptions, SolveStatus,
};
use orbitvol::su2::haar::{build_haar_quadrature, HaarQuadrature};
use orbitvol::su2::lassalle::{lassalle_average, LassalleFunction};
use orbitvol::su2::orbit::{geodesic_profile, uniform_grid};
use orbitvol::su2::{Mat2, Su2LieBasis, C64};
use orbitvol::toric::{classify_ricci, moment_map, orbit_log_volume, ricci_form, RicciVerdict};
use orbitvol::{defaults, GridRegion, ToricPotential};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn builtins(n: usize) -> Vec<ToricPotential> {
    vec![
        ToricPotential::flat(n).unwrap(),
        ToricPotential::separable_exp(n).unwrap(),
        ToricPotential::separable_cosh(n).unwrap(),
        ToricPotential::fubini_study(n, 1.0).unwrap(),
    ]
}

fn dictionary(v: RicciVerdict) -> Option<ConvexityVerdict> {
    match v {
        RicciVerdict::NegativeDefinite => Some(ConvexityVerdict::StrictlyConvex),
        RicciVerdict::Zero => Some(ConvexityVerdict::Affine),
        RicciVerdict::PositiveDefinite => Some(ConvexityVerdict::StrictlyConcave),
        _ => None,
    }
}

fn c1_ricci_convexity() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for n in 1..=3 {
        let region = GridRegion::cube(n, -2.0, 2.0, 9).unwrap();
        for p in builtins(n) {
            let ricci = classify_ricci(&p, &region, None, &StepRule::default()).map_err(|e| e.to_string())?;
            let sampler = LineSampler::cube(n, -2.0, 2.0, defaults::SEED);
            let conv = check_convexity(&p, Functional::LogVol, &sampler, Margins::default()).map_err(|e| e.to_string())?;
            let matched = dictionary(ricci.verdict) == Some(conv.verdict);
            ok &= matched;
            if !matched {
                lines.push(format!("{p}: {:?} vs {:?}", ricci.verdict, conv.verdict));
            }
        }
    }
    check(ok, if lines.is_empty() { "12 potentials matched".into() } else { lines.join("; ") })
}

fn c2_ricci_spot_values() -> Outcome {
    let rule = StepRule::default();
    let fs = ricci_form(&ToricPotential::fubini_study(1, 1.0).unwrap(), &[0.0], &rule).map_err(|e| e.to_string())?;
    let ch = ricci_form(&ToricPotential::separable_cosh(1).unwrap(), &[0.0], &rule).map_err(|e| e.to_string())?;
    let (a, b) = (fs.form[(0, 0)], ch.form[(0, 0)]);
    check((a - 2.0).abs() < 1e-5 && (b + 4.0).abs() < 1e-5, format!("FS {a:.9}, cosh {b:.9} (tol 1e-5)"))
}

fn c3_exponential_normal_form() -> Outcome {
    let mut ok = true;
    let mut worst_flat: f64 = 0.0;
    let mut min_fs = f64::INFINITY;
    for n in 1..=3 {
        let grid = GridRegion::cube(n, -1.0, 1.0, 5).unwrap();
        let log2pi = (2.0 * std::f64::consts::PI).ln();
        for (p, a) in [(ToricPotential::flat(n).unwrap(), 0.0), (ToricPotential::separable_exp(n).unwrap(), 0.5)] {
            let fit = fit_log_affine(&p, &grid).map_err(|e| e.to_string())?;
            let coef_err = fit.slope.iter().map(|s| (s - a).abs()).fold(0.0, f64::max);
            let b_err = (fit.intercept - n as f64 * log2pi).abs();
            worst_flat = worst_flat.max(fit.max_residual).max(coef_err).max(b_err);
            ok &= fit.max_residual < 1e-9 && coef_err < 1e-9 && b_err < 1e-9;
        }
        let fit = fit_log_affine(&ToricPotential::fubini_study(n, 1.0).unwrap(), &grid).map_err(|e| e.to_string())?;
        min_fs = min_fs.min(fit.max_residual);
        ok &= fit.max_residual > 1e-3;
    }
    check(ok, format!("Ricci-flat worst deviation {worst_flat:.2e} (< 1e-9); FS min residual {min_fs:.3e} (> 1e-3)"))
}

/// Grid maximum of `log Vol` on `[−1, 1]ⁿ` with step 1e-2, then compass search.
fn brute_force_max(p: &ToricPotential) -> Vec<f64> {
    let n = p.dim();
    let k = 201usize;
    let total = k.pow(n as u32);
    let node = |mut idx: usize| {
        let mut x = vec![0.0; n];
        for slot in x.iter_mut().rev() {
            *slot = -1.0 + 0.01 * (idx % k) as f64;
            idx /= k;
        }
        x
    };
    let best = (0..total)
        .into_par_iter()
        .map(|i| (orbit_log_volume(p, &node(i)).unwrap(), i))
        .reduce(|| (f64::NEG_INFINITY, 0), |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a });
    let mut x = node(best.1);
    let mut fx = best.0;
    let mut h = 0.01;
    while h > 1e-9 {
        let mut improved = false;
        for i in 0..n {
            for s in [1.0, -1.0] {
                let mut y = x.clone();
                y[i] += s * h;
                let fy = orbit_log_volume(p, &y).unwrap();
                if fy > fx {
                    x = y;
                    fx = fy;
                    improved = true;
                }
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    x
}

fn c4_clifford_torus() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for n in [2usize, 3] {
        let p = ToricPotential::fubini_study(n, 1.0).unwrap();
        let starts = random_starts(n, 8, -1.0, 1.0, defaults::SEED);
        let rep = multistart_uniqueness(&p, &starts, &NewtonOptions::default()).map_err(|e| e.to_string())?;
        let x = &rep.results[0].x_star;
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mu = moment_map(&p, x).map_err(|e| e.to_string())?;
        let bary = 1.0 / (n as f64 + 1.0);
        let mu_err = mu.iter().map(|m| (m - bary).abs()).fold(0.0, f64::max);
        let brute = brute_force_max(&p);
        let cross = brute.iter().zip(x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        ok &= rep.unique && norm < 1e-7 && mu_err < 1e-7 && cross < 1e-6;
        detail.push(format!(
            "n={n}: unique={} |x*|={norm:.1e} moment err={mu_err:.1e} brute-force gap={cross:.1e}",
            rep.unique
        ));
    }
    check(ok, detail.join("; "))
}

fn c5_no_compact_negative() -> Outcome {
    let cosh = ToricPotential::separable_cosh(2).unwrap();
    let opts = NewtonOptions::default();
    let mut starts = vec![vec![0.0, 0.0]];
    starts.extend(random_starts(2, 8, -1.0, 1.0, defaults::SEED));
    let mut no_max = true;
    for x0 in &starts {
        let r = find_critical_orbit(&cosh, x0, &opts).map_err(|e| e.to_string())?;
        no_max &= matches!(r.status, SolveStatus::NotMaximum | SolveStatus::Diverged);
    }
    let radii = defaults::DECAY_RADII;
    let cosh_decay = boundary_decay_check(&cosh, &radii, defaults::SPHERE_SAMPLES, None).map_err(|e| e.to_string())?;
    let mut fs_decay = true;
    for n in 1..=3 {
        let fs = ToricPotential::fubini_study(n, 1.0).unwrap();
        fs_decay &= boundary_decay_check(&fs, &radii, defaults::SPHERE_SAMPLES, None)
            .map_err(|e| e.to_string())?
            .decays_to_zero;
    }
    check(
        no_max && !cosh_decay.decays_to_zero && fs_decay,
        format!(
            "cosh no interior maximum={no_max}, cosh decays={}, FS(n=1..3) decays={fs_decay}",
            cosh_decay.decays_to_zero
        ),
    )
}

fn c6_su2() -> Outcome {
    let quad = build_haar_quadrature(24, 24, 48).map_err(|e| e.to_string())?;
    let x3 = Su2LieBasis::default().x[2];
    let ts = uniform_grid(-1.5, 1.5, 25).unwrap();
    let prof = geodesic_profile(&x3, &ts, 1.0, &quad, None).map_err(|e| e.to_string())?;
    let at0 = prof.rows.iter().find(|r| r.t == 0.0).ok_or("t = 0 missing from grid")?;
    let a_zero = at0.defect.abs() < 1e-8;
    let min_off = prof
        .rows
        .iter()
        .filter(|r| r.t.abs() >= 0.25 - 1e-12)
        .map(|r| r.defect)
        .fold(f64::INFINITY, f64::min);
    let a = a_zero && min_off > 1e-3;
    let min_sd = prof
        .rows
        .iter()
        .filter_map(|r| r.second_diff_neg_log_vol_j)
        .fold(f64::INFINITY, f64::min);
    let b = min_sd > 0.0;
    let cc = prof.argmax_t == 0.0;
    let d = prof.max_density_rel_stddev < 1e-9;
    let fine = HaarQuadrature::with_resolution(quad.resolution().doubled()).map_err(|e| e.to_string())?;
    let prof2 = geodesic_profile(&x3, &ts, 1.0, &fine, None).map_err(|e| e.to_string())?;
    let change = prof.rows.iter().zip(&prof2.rows).map(|(u, v)| (u.vol_j - v.vol_j).abs()).fold(0.0, f64::max);
    let e = change < 1e-9;
    check(
        a && b && cc && d && e,
        format!(
            "(a) defect(0)={:.1e}, min defect |t|>=0.25={min_off:.2e}; (b) min second diff={min_sd:.3e}; \
             (c) argmax t={}; (d) rel stddev={:.1e}; (e) refinement change={change:.1e}",
            at0.defect, prof.argmax_t, prof.max_density_rel_stddev
        ),
    )
}

fn c7_haar() -> Outcome {
    let q = build_haar_quadrature(24, 24, 48).map_err(|e| e.to_string())?;
    let one = q.integrate(|_| 1.0);
    let g11: C64 = q.integrate(|g| g.matrix()[(0, 0)]);
    let g11_sq = q.integrate(|g| g.matrix()[(0, 0)].norm_sqr());
    check(
        one == 1.0 && g11.norm() < 1e-12 && (g11_sq - 0.5).abs() < 1e-10,
        format!("int 1 = {one}, |int g11| = {:.1e}, int |g11|^2 - 1/2 = {:.1e}", g11.norm(), g11_sq - 0.5),
    )
}

fn c8_lassalle() -> Outcome {
    let q = build_haar_quadrature(24, 24, 48).map_err(|e| e.to_string())?;
    let x3 = Su2LieBasis::default().x[2];
    let ts = uniform_grid(-1.5, 1.5, 25).unwrap();
    let id = Mat2::identity();
    let row = lassalle_average(LassalleFunction::FirstRowLog, &id, &x3, &ts, &q).map_err(|e| e.to_string())?;
    let frob = lassalle_average(LassalleFunction::FrobeniusLog, &id, &x3, &ts, &q).map_err(|e| e.to_string())?;
    let err = ts
        .iter()
        .zip(&frob.values)
        .map(|(t, v)| (v - (2.0 * t.cosh()).ln()).abs())
        .fold(0.0, f64::max);
    let min_sd = row.report.min_second_difference;
    check(
        min_sd > -1e-8 && err < 1e-9,
        format!("first_row_log min second diff {min_sd:.1e} (> -1e-8); frobenius_log vs log(2cosh t) {err:.1e} (< 1e-9)"),
    )
}

fn rel_err(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

fn c9_derivative_hygiene() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(defaults::SEED);
    let (mut g_err, mut h_err, mut r_err): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..20 {
        for n in 1..=3 {
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
            for p in builtins(n) {
                let f = |y: &[f64]| p.eval(y);
                let g = fd::gradient(f, &x, &StepRule::default().richardson()).map_err(|e| e.to_string())?;
                let ge = p.grad(&x).unwrap();
                let gs = ge.amax().max(1.0);
                g_err = g_err.max(g.iter().zip(ge.iter()).map(|(a, b)| rel_err(*a, *b, gs)).fold(0.0, f64::max));
                let h = fd::hessian(f, &x, &StepRule::default()).map_err(|e| e.to_string())?;
                let he = p.hess(&x).unwrap();
                let hs = he.amax().max(1.0);
                h_err = h_err.max(h.iter().zip(he.iter()).map(|(a, b)| rel_err(*a, *b, hs)).fold(0.0, f64::max));
                let plain = ricci_form(&p, &x, &StepRule::default()).map_err(|e| e.to_string())?;
                let rich = ricci_form(&p, &x, &StepRule::default().richardson()).map_err(|e| e.to_string())?;
                let rs = plain.form.amax().max(1.0);
                r_err = r_err.max(
                    plain.form.iter().zip(rich.form.iter()).map(|(a, b)| rel_err(*a, *b, rs)).fold(0.0, f64::max),
                );
            }
        }
    }
    check(
        g_err < 1e-8 && h_err < 1e-6 && r_err < 1e-5,
        format!("gradient {g_err:.1e} (< 1e-8), Hessian {h_err:.1e} (< 1e-6), Richardson vs plain Ricci {r_err:.1e} (< 1e-5)"),
    )
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn c10_determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = tmp.path().join("config.json");
    std::fs::write(&cfg, r#"{"potential": {"kind": "fubini_study", "n": 2, "lambda": 1.0}}"#).unwrap();
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = tmp.path().join(run);
        let status = Command::new(env!("CARGO_BIN_EXE_orbitvol"))
            .args(["analyze", "--quiet", "--seed", "17", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .status()
            .map_err(|e| e.to_string())?;
        if !status.success() {
            return Err(format!("run {run} exited with {status}"));
        }
        outputs.push(read_dir_sorted(&out));
    }
    let bytes: usize = outputs[0].iter().map(|(_, b)| b.len()).sum();
    check(
        !outputs[0].is_empty() && outputs[0] == outputs[1],
        format!("{} file(s), {bytes} bytes, identical={}", outputs[0].len(), outputs[0] == outputs[1]),
    )
}

fn main() {
    type Criterion = (usize, &'static str, u64, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        (1, "ricci/log-vol equivalence", 30, c1_ricci_convexity),
        (2, "ricci spot values", 1, c2_ricci_spot_values),
        (3, "exponential normal form", 5, c3_exponential_normal_form),
        (4, "clifford torus", 20, c4_clifford_torus),
        (5, "no compact negative-ricci maximum", 10, c5_no_compact_negative),
        (6, "su2 orbit volumes in CP3", 60, c6_su2),
        (7, "haar quadrature", 5, c7_haar),
        (8, "lassalle averaging", 30, c8_lassalle),
        (9, "derivative hygiene", 10, c9_derivative_hygiene),
        (10, "determinism", 30, c10_determinism),
    ];
    let mut failures = 0;
    for (id, name, budget, f) in criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".to_string()));
        let elapsed = start.elapsed();
        let in_budget = elapsed <= Duration::from_secs(budget);
        let (pass, detail) = match outcome {
            Ok(d) => (in_budget, d),
            Err(d) => (false, d),
        };
        if !pass {
            failures += 1;
        }
        println!(
            "criterion {id:>2} {:<4} {name}: {detail} [{:.2} s / {budget} s]",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failures} failed", 10 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
