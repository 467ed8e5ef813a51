//! Acceptance gate: one PASS/FAIL line per criterion.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use dunkl_core::estimates::{
    baseline, baseline_grid, regression_check, scan_theorem, Theorem, BASELINE_SAMPLES, BASELINE_SEED,
};
use dunkl_core::kernels::{green_direct, green_kelvin, poisson};
use dunkl_core::potential::{poisson_integral, BoundaryFunction};
use dunkl_core::quadrature::{jacobi_rule, sphere_rule};
use dunkl_core::report::ResidualRecord;
use dunkl_core::verify::{
    closed_forms, dyson_checks, gradient_poisson, green_paths, hardy_stein, hardy_stein_data, harmonicity,
    poisson_jensen, poisson_newton, power_difference, pth_power, taylor_remainder,
};
use dunkl_core::{Params, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

struct Outcome {
    passed: bool,
    detail: String,
}

fn params(d: usize, k: f64) -> Params {
    Params::new(d, k).expect("valid parameters")
}

fn summarize(records: &[ResidualRecord]) -> Outcome {
    let failed: Vec<&ResidualRecord> = records.iter().filter(|r| !r.passed).collect();
    // Checks judged by decay rather than by their threshold are left out.
    let worst = records
        .iter()
        .filter(|r| r.tolerance > 0.0 && r.tolerance.is_finite() && r.passed == (r.residual < r.tolerance))
        .map(|r| r.residual / r.tolerance)
        .fold(0.0, f64::max);
    let mut detail = format!("{} checks, worst thresholded residual/tolerance {worst:.2e}", records.len());
    if let Some(f) = failed.first() {
        detail.push_str(&format!(
            "; {} failed, first {} d={} k={} residual {:.3e} tol {:.1e}",
            failed.len(),
            f.check,
            f.d,
            f.k,
            f.residual,
            f.tolerance
        ));
    }
    Outcome { passed: !records.is_empty() && failed.is_empty(), detail }
}

fn collect(runs: impl IntoIterator<Item = Result<Vec<ResidualRecord>>>) -> Outcome {
    let mut all = Vec::new();
    for r in runs {
        match r {
            Ok(v) => all.extend(v),
            Err(e) => return Outcome { passed: false, detail: format!("error: {e}") },
        }
    }
    summarize(&all)
}

fn direction(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    let g: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
    let r = g.iter().map(|v| v * v).sum::<f64>().sqrt();
    g.into_iter().map(|v| v / r).collect()
}

fn ball_point(rng: &mut ChaCha8Rng, d: usize, radius: f64) -> Vec<f64> {
    let s = radius * rng.random::<f64>().powf(1.0 / d as f64);
    direction(rng, d).into_iter().map(|v| s * v).collect()
}

const GRID_D: [usize; 4] = [2, 3, 4, 5];
const GRID_K: [f64; 5] = [0.25, 0.5, 1.0, 1.7, 3.0];

fn criterion_1() -> Outcome {
    collect([closed_forms(&params(2, 1.0), 1000, 1)])
}

fn criterion_2() -> Outcome {
    collect(GRID_D.iter().flat_map(|&d| GRID_K.map(|k| green_paths(&params(d, k), 1000, 2))))
}

fn criterion_3() -> Outcome {
    let mut runs = Vec::new();
    for d in 1..=5 {
        let ks = if d == 1 { [0.75, 1.0, 1.7] } else { [0.5, 1.0, 1.7] };
        for k in ks {
            runs.push(Ok(harmonicity(&params(d, k), 50, 3)));
        }
    }
    collect(runs)
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut min_interior = f64::INFINITY;
    let mut max_boundary = 0.0f64;
    let mut max_asym = 0.0f64;
    let mut errors = 0usize;
    for &d in &GRID_D {
        for k in [0.5, 1.0, 1.7] {
            let p = params(d, k);
            for _ in 0..10_000 / 12 + 1 {
                let x = ball_point(&mut rng, d, 1.0);
                let y = ball_point(&mut rng, d, 1.0);
                match (green_direct(&p, &x, &y), green_direct(&p, &y, &x)) {
                    (Ok(a), Ok(b)) => {
                        let (a, b) = (a.to_f64(), b.to_f64());
                        min_interior = min_interior.min(a);
                        if a.is_finite() {
                            max_asym = max_asym.max((a - b).abs() / a.abs().max(1e-300));
                        }
                    }
                    _ => errors += 1,
                }
            }
            for _ in 0..1000 / 12 + 1 {
                let x = direction(&mut rng, d);
                let y = ball_point(&mut rng, d, 1.0);
                for g in [green_direct(&p, &x, &y), green_kelvin(&p, &x, &y)] {
                    match g {
                        Ok(v) => max_boundary = max_boundary.max(v.to_f64().abs()),
                        Err(_) => errors += 1,
                    }
                }
            }
        }
    }
    Outcome {
        passed: errors == 0 && min_interior > 0.0 && max_boundary < 1e-8 && max_asym < 1e-8,
        detail: format!(
            "min interior G {min_interior:.3e}, max |G| on S {max_boundary:.3e}, max asymmetry {max_asym:.3e}, {errors} errors"
        ),
    }
}

fn criterion_5() -> Outcome {
    let mut fails = Vec::new();
    for k in [0.25, 0.5, 1.0, 1.7, 3.0] {
        for n in [4, 16, 40] {
            let sum = jacobi_rule(k, n).map(|r| r.weight_sum()).unwrap_or(f64::NAN);
            let c_k = dunkl_core::params::intertwiner_constant(k);
            if !((sum - 1.0 / c_k).abs() <= 1e-12 * (1.0 / c_k)) {
                fails.push(format!("jacobi k={k} n={n}"));
            }
        }
    }
    let one = BoundaryFunction::new("1", |_| 1.0).depending_on(&[]);
    let mut worst_p1 = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for &d in &GRID_D {
        for k in [0.5, 1.0, 1.7] {
            let p = params(d, k);
            let sum = sphere_rule(&p, 8).map(|r| r.weight_sum()).unwrap_or(f64::NAN);
            if !((sum - p.d_k).abs() <= 1e-10 * p.d_k) {
                fails.push(format!("sphere d={d} k={k}"));
            }
            let origin = vec![0.0; d];
            for _ in 0..20 {
                let y = direction(&mut rng, d);
                if !(poisson(&p, &origin, &y).map(|v| (v - 1.0).abs() < 1e-12).unwrap_or(false)) {
                    fails.push(format!("P(0, y) d={d} k={k}"));
                }
            }
            for r in [0.0, 0.5, 0.9] {
                let x: Vec<f64> = direction(&mut rng, d).into_iter().map(|v| r * v).collect();
                match poisson_integral(&one, &p, &x) {
                    Ok(v) => worst_p1 = worst_p1.max((v - 1.0).abs()),
                    Err(e) => fails.push(format!("P[1] d={d} k={k}: {e}")),
                }
            }
        }
    }
    if worst_p1 >= 1e-8 {
        fails.push(format!("P[1] error {worst_p1:.3e}"));
    }
    let p = params(2, 1.0);
    let prefactor = p.c_k * p.newton_const;
    if (prefactor - 1.0 / (4.0 * PI)).abs() > 1e-15 {
        fails.push(format!("c_k C_k = {prefactor}"));
    }
    Outcome {
        passed: fails.is_empty(),
        detail: if fails.is_empty() {
            format!("weights, P(0, .) = 1, max |P[1] - 1| {worst_p1:.3e}, c_k C_k = 1/(4 pi)")
        } else {
            fails.join("; ")
        },
    }
}

fn criterion_6() -> Outcome {
    // 2 x (40 interior/exterior + 4 boundary) in d = 2 plus 10 + 2 boundary
    // in d = 3: 100 configurations.
    collect([
        poisson_newton(&params(2, 0.5), 20, 61, 4),
        poisson_newton(&params(2, 1.7), 20, 62, 4),
        poisson_newton(&params(3, 1.0), 5, 63, 2),
    ])
}

fn criterion_7() -> Outcome {
    let mut runs = Vec::new();
    for d in [2, 3] {
        for k in [0.5, 1.0] {
            runs.push(poisson_jensen(&params(d, k), 5, 7));
        }
    }
    collect(runs)
}

fn criterion_8() -> Outcome {
    let mut runs = Vec::new();
    for d in [2, 3] {
        for k in [0.5, 1.0] {
            runs.push(hardy_stein(&params(d, k), None));
        }
    }
    let mut out = collect(runs);
    let p = params(2, 1.0);
    let info = dunkl_core::potential::hardy_stein_check(&hardy_stein_data(1.5), 1.5, &p)
        .map(|c| format!("{:.2e}", c.residual))
        .unwrap_or_else(|e| format!("error {e}"));
    out.detail.push_str(&format!("; p=1.5 informational residual {info}"));
    out
}

fn criterion_9() -> Outcome {
    let p = params(2, 1.0);
    collect([power_difference(&p, None, 49), taylor_remainder(&p, None, 1_000_000, 9)])
}

fn criterion_10() -> Outcome {
    let mut runs = Vec::new();
    for d in [2, 3] {
        for k in [0.5, 1.7] {
            runs.push(pth_power(&params(d, k), None, 5, 10));
        }
    }
    collect(runs)
}

fn criterion_11() -> Outcome {
    collect([2, 3, 4].map(|d| gradient_poisson(&params(d, 1.0), 100, 11)))
}

fn criterion_12() -> Outcome {
    let mut worst = 0.0f64;
    let mut fails = Vec::new();
    let mut scans = 0;
    for theorem in Theorem::ALL {
        for (d, k) in baseline_grid(theorem) {
            scans += 1;
            let p = params(d, k);
            match scan_theorem(theorem, &p, BASELINE_SAMPLES, BASELINE_SEED) {
                Ok(report) => {
                    let check = regression_check(&report, theorem);
                    let stored = baseline(theorem, d, k, BASELINE_SAMPLES, BASELINE_SEED);
                    if let Some(b) = stored {
                        worst = worst.max(check.band / b.band());
                    }
                    if !check.passed || stored.is_none() {
                        fails.push(format!("{theorem} d={d} k={k} band {:.4e}", check.band));
                    }
                }
                Err(e) => fails.push(format!("{theorem} d={d} k={k}: {e}")),
            }
        }
    }
    Outcome {
        passed: fails.is_empty(),
        detail: if fails.is_empty() {
            format!("{scans} scans finite, worst band/baseline {worst:.6}")
        } else {
            fails.join("; ")
        },
    }
}

fn criterion_13() -> Outcome {
    collect([dyson_checks(&params(2, 1.0), 100, 13)])
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 13] = [
        ("closed forms k=1 d=2", criterion_1),
        ("Green path equality", criterion_2),
        ("harmonicity", criterion_3),
        ("Green function checklist", criterion_4),
        ("normalizations", criterion_5),
        ("Poisson integral of the Newton kernel", criterion_6),
        ("Poisson-Jensen", criterion_7),
        ("Hardy-Stein", criterion_8),
        ("elementary and remainder bounds", criterion_9),
        ("formula for the p-th power", criterion_10),
        ("gradient formula for the Poisson kernel", criterion_11),
        ("ratio scans", criterion_12),
        ("Dyson kernels", criterion_13),
    ];
    let mut all = true;
    let mut total = Duration::ZERO;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        total += elapsed;
        all &= outcome.passed;
        println!(
            "{} {:>2} {name}: {} ({:.1} s)",
            if outcome.passed { "PASS" } else { "FAIL" },
            i + 1,
            outcome.detail,
            elapsed.as_secs_f64()
        );
    }
    println!("total {:.1} s", total.as_secs_f64());
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
