//! Named verification suites. Each suite runs a block of checks for one
//! parameter pair and returns its residual records.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimates::{elementary_band, elementary_bound_check};
use crate::kernels::{
    closed_form_k1d2, dyson, from_a1_basis, green_direct, green_kelvin, newton, poisson, w_invariant, KernelKind,
};
use crate::operator::{harmonic_catalog, kelvin, sample_region, verify_harmonicity, ScalarField, RESIDUAL_FLOOR};
use crate::params::{dist, dist_reflected, norm, norm_sq, on_orbit, reflect, Params};
use crate::potential::{
    green_poisson_gradient_check, hardy_stein_check, poisson_integral, poisson_jensen_check, poisson_newton_check,
    pth_power_formula_check, remainder_f, remainder_f_eps, BoundaryFunction, Remainder,
};
use crate::report::ResidualRecord;

/// Relative tolerance of the closed-form and Dyson comparisons.
pub const CLOSED_FORM_TOL: f64 = 1e-9;

/// Relative tolerance between the two Green evaluators.
pub const GREEN_PATH_TOL: f64 = 1e-8;

/// Tolerance of the Poisson representation checks.
pub const POISSON_TOL: f64 = 1e-6;

/// Tolerance of the Poisson representation at boundary sources.
pub const POISSON_BOUNDARY_TOL: f64 = 1e-5;

/// Tolerance of the Poisson–Jensen checks.
pub const POISSON_JENSEN_TOL: f64 = 1e-5;

/// Relative tolerance of the Hardy–Stein identity.
pub const HARDY_STEIN_TOL: f64 = 1e-3;

/// Relative tolerance of the gradient formula for the Poisson kernel.
pub const GRADIENT_TOL: f64 = 1e-4;

/// Step of the gradient formula check.
pub const GRADIENT_STEP: f64 = 1e-5;

/// Relative finite-difference step of the harmonicity checks.
pub const HARMONICITY_STEP: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Suite {
    Harmonicity,
    ClosedForms,
    GreenPaths,
    PoissonJensen,
    HardyStein,
    GradientPoisson,
    PowerDifference,
    TaylorRemainder,
    PthPower,
    Dyson,
}

impl Suite {
    pub const ALL: [Suite; 10] = [
        Self::Harmonicity,
        Self::ClosedForms,
        Self::GreenPaths,
        Self::PoissonJensen,
        Self::HardyStein,
        Self::GradientPoisson,
        Self::PowerDifference,
        Self::TaylorRemainder,
        Self::PthPower,
        Self::Dyson,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Harmonicity => "harmonicity",
            Self::ClosedForms => "closed-forms",
            Self::GreenPaths => "green-paths",
            Self::PoissonJensen => "poisson-jensen",
            Self::HardyStein => "hardy-stein",
            Self::GradientPoisson => "gradient-poisson",
            Self::PowerDifference => "power-difference",
            Self::TaylorRemainder => "taylor-remainder",
            Self::PthPower => "pth-power",
            Self::Dyson => "dyson",
        }
    }

    fn aliases(self) -> &'static [&'static str] {
        match self {
            Self::PowerDifference => &["lemma-3.3"],
            Self::TaylorRemainder => &["lemma-4.4"],
            Self::PthPower => &["lemma-4.5"],
            _ => &[],
        }
    }

    /// Sample count used when none is given.
    pub fn default_samples(self) -> usize {
        match self {
            Self::Harmonicity => 10,
            Self::ClosedForms | Self::GreenPaths => 1000,
            Self::PoissonJensen => 5,
            Self::HardyStein => 1,
            Self::GradientPoisson | Self::Dyson => 100,
            Self::PowerDifference => 49,
            Self::TaylorRemainder => 1_000_000,
            Self::PthPower => 5,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        Self::ALL
            .into_iter()
            .find(|t| t.name() == key || t.aliases().contains(&key.as_str()))
            .ok_or_else(|| Error::InvalidParams(format!("unknown suite '{s}'")))
    }
}

/// Inputs of a suite run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteConfig {
    pub d: usize,
    pub k: f64,
    /// Exponent for the suites that take one; each suite has its own default
    /// set.
    pub p_exp: Option<f64>,
    pub n: usize,
    pub seed: u64,
}

impl SuiteConfig {
    pub fn new(suite: Suite, d: usize, k: f64) -> Self {
        Self { d, k, p_exp: None, n: suite.default_samples(), seed: 7 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub d: usize,
    pub k: f64,
    pub checks: Vec<ResidualRecord>,
    pub passed: bool,
}

impl SuiteReport {
    fn new(suite: Suite, p: &Params, checks: Vec<ResidualRecord>) -> Self {
        let passed = !checks.is_empty() && checks.iter().all(|c| c.passed);
        Self { suite: suite.name().into(), d: p.d, k: p.k, checks, passed }
    }

    /// The failing record with the largest residual relative to its tolerance.
    pub fn worst_failure(&self) -> Option<&ResidualRecord> {
        self.checks.iter().filter(|c| !c.passed).max_by(|a, b| {
            let ra = a.residual / a.tolerance;
            let rb = b.residual / b.tolerance;
            ra.partial_cmp(&rb).unwrap_or(std::cmp::Ordering::Less)
        })
    }
}

pub fn run_suite(suite: Suite, cfg: &SuiteConfig) -> Result<SuiteReport> {
    let p = Params::new(cfg.d, cfg.k)?;
    if cfg.n == 0 {
        return Err(Error::InvalidParams("sample count must be positive".into()));
    }
    let checks = match suite {
        Suite::Harmonicity => harmonicity(&p, cfg.n, cfg.seed),
        Suite::ClosedForms => closed_forms(&p, cfg.n, cfg.seed)?,
        Suite::GreenPaths => green_paths(&p, cfg.n, cfg.seed)?,
        Suite::PoissonJensen => {
            let mut out = poisson_jensen(&p, cfg.n, cfg.seed)?;
            out.extend(poisson_newton(&p, cfg.n, cfg.seed, 1)?);
            out
        }
        Suite::HardyStein => hardy_stein(&p, cfg.p_exp)?,
        Suite::GradientPoisson => gradient_poisson(&p, cfg.n, cfg.seed)?,
        Suite::PowerDifference => power_difference(&p, cfg.p_exp, cfg.n)?,
        Suite::TaylorRemainder => taylor_remainder(&p, cfg.p_exp, cfg.n, cfg.seed)?,
        Suite::PthPower => pth_power(&p, cfg.p_exp, cfg.n, cfg.seed)?,
        Suite::Dyson => dyson_checks(&p, cfg.n, cfg.seed)?,
    };
    Ok(SuiteReport::new(suite, &p, checks))
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn direction(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let r = norm(&g);
        if r > 1e-8 {
            return g.into_iter().map(|v| v / r).collect();
        }
    }
}

/// Uniform in the ball of radius `radius`.
fn ball_point(rng: &mut ChaCha8Rng, d: usize, radius: f64) -> Vec<f64> {
    let s = radius * rng.random::<f64>().powf(1.0 / d as f64);
    direction(rng, d).into_iter().map(|v| s * v).collect()
}

fn concat(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().chain(y).copied().collect()
}

fn relative(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs()
    }
}

/// Keeps the record with the largest residual per check name.
fn worst_per_check(records: Vec<ResidualRecord>) -> Vec<ResidualRecord> {
    let mut out: Vec<ResidualRecord> = Vec::new();
    for r in records {
        match out.iter_mut().find(|o| o.check == r.check) {
            Some(o) => {
                let all_passed = o.passed && r.passed;
                let key =
                    |c: &ResidualRecord| (!c.passed, if c.residual.is_nan() { f64::INFINITY } else { c.residual });
                let worse = key(&r) > key(o);
                if worse {
                    *o = r;
                }
                o.passed = all_passed;
            }
            None => out.push(r),
        }
    }
    out
}

/// `Δ_k u ≈ 0` with `O(h^2)` decay for the catalog and its Kelvin transforms.
pub fn harmonicity(p: &Params, n: usize, seed: u64) -> Vec<ResidualRecord> {
    let mut out = Vec::new();
    for u in harmonic_catalog(p) {
        let ku = kelvin(&u, p);
        for (field, radius) in [(u, 0.9), (ku, 2.0)] {
            let sample = sample_region(&field, p.d, n, seed, radius, 0.05);
            let report = verify_harmonicity(&field, p, &sample, HARMONICITY_STEP);
            if report.points.len() < n {
                out.push(
                    ResidualRecord::new(
                        format!("harmonicity:{}", field.label()),
                        p.d,
                        p.k,
                        &[],
                        f64::NAN,
                        RESIDUAL_FLOOR,
                    )
                    .judged(false),
                );
            }
            for r in report.points {
                out.push(
                    ResidualRecord::new(
                        format!("harmonicity:{}", field.label()),
                        p.d,
                        p.k,
                        &r.x,
                        r.residual_half,
                        RESIDUAL_FLOOR,
                    )
                    .judged(r.passed),
                );
            }
        }
    }
    out
}

/// Random pairs in the ball away from the wall and from each other's orbit.
fn off_wall_pairs(p: &Params, n: usize, seed: u64, radius: f64) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut rng = rng(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let x = ball_point(&mut rng, p.d, radius);
        let y = ball_point(&mut rng, p.d, radius);
        let gap = dist(&x, &y).min(dist_reflected(&x, &y));
        if x[0].abs() > 1e-3 && y[0].abs() > 1e-3 && gap > 1e-3 {
            out.push((x, y));
        }
    }
    out
}

/// Quadrature kernels against the explicit `k = 1`, `d = 2` formulas.
pub fn closed_forms(p: &Params, n: usize, seed: u64) -> Result<Vec<ResidualRecord>> {
    if p.d != 2 || p.k != 1.0 {
        return Err(Error::InvalidParams("closed forms need d = 2, k = 1".into()));
    }
    let mut out = Vec::with_capacity(6 * n);
    for (x, y) in off_wall_pairs(p, n, seed, 0.95) {
        let ys: Vec<f64> = y.iter().map(|v| v / norm(&y)).collect();
        for kind in [
            KernelKind::Newton,
            KernelKind::Green,
            KernelKind::Poisson,
            KernelKind::NewtonW,
            KernelKind::GreenW,
            KernelKind::PoissonW,
        ] {
            let target = if kind.base() == KernelKind::Poisson { &ys } else { &y };
            let quad = match kind {
                KernelKind::Newton => newton(p, &x, target)?.to_f64(),
                KernelKind::Green => green_direct(p, &x, target)?.to_f64(),
                KernelKind::Poisson => poisson(p, &x, target)?,
                _ => w_invariant(kind, p, &x, target)?.to_f64(),
            };
            let exact = closed_form_k1d2(kind, &x, target)?.value.to_f64();
            out.push(ResidualRecord::new(
                format!("closed-form:{kind}"),
                p.d,
                p.k,
                &concat(&x, target),
                relative(quad, exact),
                CLOSED_FORM_TOL,
            ));
        }
    }
    Ok(worst_per_check(out))
}

/// Kelvin-path Green function against the single-integral path.
pub fn green_paths(p: &Params, n: usize, seed: u64) -> Result<Vec<ResidualRecord>> {
    let mut rng = rng(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let x = ball_point(&mut rng, p.d, 1.0);
        let y = ball_point(&mut rng, p.d, 1.0);
        if on_orbit(&x, &y) || norm(&x) < 1e-3 {
            continue;
        }
        let a = green_kelvin(p, &x, &y)?.to_f64();
        let b = green_direct(p, &x, &y)?.to_f64();
        out.push(ResidualRecord::new("green-paths", p.d, p.k, &concat(&x, &y), relative(a, b), GREEN_PATH_TOL));
    }
    Ok(worst_per_check(out))
}

fn radial_power(m: i32, p: &Params) -> ScalarField {
    let d = p.d as f64;
    let k = p.k;
    let c = 2.0 * m as f64 * (2.0 * m as f64 + d - 2.0 + 2.0 * k);
    ScalarField::new(format!("|x|^{}", 2 * m), move |x| Ok(norm_sq(x).powi(m)))
        .even()
        .with_laplacian(move |x| Ok(c * norm_sq(x).powi(m - 1)))
}

/// Polynomial members of the harmonic catalog.
fn polynomial_harmonics(p: &Params) -> Vec<ScalarField> {
    harmonic_catalog(p).into_iter().filter(|u| !u.label().contains("_k(")).collect()
}

/// The Poisson–Jensen formula for `|x|^2`, `|x|^4` and the polynomial
/// harmonics at the origin and `n` random points with `|x| <= 0.8`.
pub fn poisson_jensen(p: &Params, n: usize, seed: u64) -> Result<Vec<ResidualRecord>> {
    if p.d < 2 || p.d > 3 {
        return Err(Error::InvalidParams(format!("the Poisson–Jensen suite runs for d = 2, 3, got d = {}", p.d)));
    }
    let mut rng = rng(seed);
    let points: Vec<Vec<f64>> = (0..n).map(|_| ball_point(&mut rng, p.d, 0.8)).collect();
    let mut fields = vec![radial_power(1, p), radial_power(2, p)];
    fields.extend(polynomial_harmonics(p));
    let mut out = Vec::new();
    let origin = vec![0.0; p.d];
    out.push(ResidualRecord::new(
        "poisson-jensen:|x|^2",
        p.d,
        p.k,
        &origin,
        poisson_jensen_check(&fields[0], p, &origin)?.residual,
        POISSON_JENSEN_TOL,
    ));
    for u in &fields {
        for x in &points {
            let c = poisson_jensen_check(u, p, x)?;
            out.push(ResidualRecord::new(
                format!("poisson-jensen:{}", u.label()),
                p.d,
                p.k,
                x,
                c.residual,
                POISSON_JENSEN_TOL,
            ));
        }
    }
    for u in polynomial_harmonics(p) {
        let f = BoundaryFunction::from_harmonic(u.clone());
        for x in &points {
            let v = poisson_integral(&f, p, x)?;
            out.push(ResidualRecord::new(
                format!("reproducing:{}", u.label()),
                p.d,
                p.k,
                x,
                (v - u.eval(x)?).abs(),
                POISSON_TOL,
            ));
        }
    }
    Ok(out)
}

/// Poisson integrals of `N_k(·, y)` for `n` interior and `n` exterior
/// sources and `boundary` sources on the sphere.
pub fn poisson_newton(p: &Params, n: usize, seed: u64, boundary: usize) -> Result<Vec<ResidualRecord>> {
    if p.d < 2 {
        return Err(Error::InvalidParams("the Poisson representation suite needs d >= 2".into()));
    }
    let mut rng = rng(seed ^ 0x9e37_79b9);
    let mut out = Vec::new();
    let mut push = |x: &[f64], y: &[f64], tol: f64, label: &str| -> Result<()> {
        let c = poisson_newton_check(p, x, y)?;
        out.push(ResidualRecord::new(label, p.d, p.k, &concat(x, y), c.residual, tol));
        Ok(())
    };
    for _ in 0..n {
        let x = ball_point(&mut rng, p.d, 0.8);
        let e = direction(&mut rng, p.d);
        let y: Vec<f64> = e.iter().map(|v| 0.85 * v).collect();
        if !on_orbit(&x, &y) {
            push(&x, &y, POISSON_TOL, "poisson-newton:interior")?;
        }
        let y: Vec<f64> = e.iter().map(|v| 1.5 * v).collect();
        push(&x, &y, POISSON_TOL, "poisson-newton:exterior")?;
    }
    for _ in 0..boundary {
        let x = ball_point(&mut rng, p.d, 0.8);
        let y = direction(&mut rng, p.d);
        push(&x, &y, POISSON_BOUNDARY_TOL, "poisson-newton:boundary")?;
    }
    Ok(out)
}

/// Boundary data of the Hardy–Stein suite for exponent `p_exp`.
pub fn hardy_stein_data(p_exp: f64) -> BoundaryFunction {
    if p_exp == 2.0 {
        BoundaryFunction::from_harmonic(ScalarField::new("x_1 x_2", |x| Ok(x[0] * x[1])))
    } else if p_exp == 3.0 {
        BoundaryFunction::from_harmonic(ScalarField::new("2 + x_2", |x| Ok(2.0 + x[1])))
    } else {
        BoundaryFunction::from_harmonic(ScalarField::new("2 + x_1 x_2", |x| Ok(2.0 + x[0] * x[1])))
    }
}

/// The Hardy–Stein identity for `f ≡ 1` and the exponent's boundary data,
/// for `p_exp` or for `p ∈ {2, 3}` when none is given.
pub fn hardy_stein(p: &Params, p_exp: Option<f64>) -> Result<Vec<ResidualRecord>> {
    if p.d < 2 {
        return Err(Error::InvalidParams("the Hardy–Stein suite needs d >= 2".into()));
    }
    let exps = p_exp.map(|e| vec![e]).unwrap_or_else(|| vec![2.0, 3.0]);
    let one = BoundaryFunction::from_harmonic(ScalarField::new("1", |_| Ok(1.0)));
    let origin = vec![0.0; p.d];
    let mut out = Vec::new();
    for e in exps {
        let c = hardy_stein_check(&one, e, p)?;
        out.push(ResidualRecord::new("hardy-stein:1", p.d, p.k, &origin, c.residual, 1e-10).with_exponent(e));
        let f = hardy_stein_data(e);
        let c = hardy_stein_check(&f, e, p)?;
        out.push(
            ResidualRecord::new(format!("hardy-stein:{}", f.label()), p.d, p.k, &origin, c.residual, HARDY_STEIN_TOL)
                .with_exponent(e),
        );
        out.push(
            ResidualRecord::new(
                format!("hardy-stein-boundary:{}", f.label()),
                p.d,
                p.k,
                &origin,
                c.residual_boundary,
                HARDY_STEIN_TOL,
            )
            .with_exponent(e),
        );
    }
    Ok(out)
}

/// `P_k = -d_k ⟨y, ∇_y G_k⟩` at `n` pairs with `|x| <= 0.7`, `y ∈ S`, and
/// its reflection symmetry.
pub fn gradient_poisson(p: &Params, n: usize, seed: u64) -> Result<Vec<ResidualRecord>> {
    let mut rng = rng(seed);
    let mut out = Vec::with_capacity(2 * n + 1);
    let origin = vec![0.0; p.d];
    let y0 = direction(&mut rng, p.d);
    let c = green_poisson_gradient_check(p, &origin, &y0, GRADIENT_STEP)?;
    out.push(ResidualRecord::new("gradient-poisson:origin", p.d, p.k, &concat(&origin, &y0), c.residual, GRADIENT_TOL));
    for _ in 0..n {
        let x = ball_point(&mut rng, p.d, 0.7);
        let y = direction(&mut rng, p.d);
        let c = green_poisson_gradient_check(p, &x, &y, GRADIENT_STEP)?;
        let s = green_poisson_gradient_check(p, &reflect(&x), &reflect(&y), GRADIENT_STEP)?;
        let xy = concat(&x, &y);
        out.push(ResidualRecord::new("gradient-poisson", p.d, p.k, &xy, c.residual, GRADIENT_TOL));
        out.push(ResidualRecord::new(
            "gradient-poisson:symmetry",
            p.d,
            p.k,
            &xy,
            relative(s.finite_difference, c.finite_difference),
            1e-10,
        ));
    }
    Ok(out)
}

/// Log-spaced grid of `n` points on `[1e-6, 1e6]`.
fn log_grid(n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n).map(|i| 10f64.powf(-6.0 + 12.0 * i as f64 / (n - 1) as f64)).collect()
}

/// The elementary power-difference bound on a log grid of `n` values of
/// `a < b`, for `p_exp` or for `p ∈ {0.3, 1, 1.5, 2, 5}`.
pub fn power_difference(p: &Params, p_exp: Option<f64>, n: usize) -> Result<Vec<ResidualRecord>> {
    let exps = p_exp.map(|e| vec![e]).unwrap_or_else(|| vec![0.3, 1.0, 1.5, 2.0, 5.0]);
    let grid = log_grid(n);
    let mut out = Vec::new();
    for e in exps {
        let (lower, upper) = elementary_band(e);
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        let mut passed = true;
        let mut worst = vec![grid[0], grid[0]];
        for (i, &a) in grid.iter().enumerate() {
            for &b in &grid[i + 1..] {
                let c = elementary_bound_check(e, a, b)?;
                passed &= c.passed;
                if !c.passed {
                    worst = vec![a, b];
                }
                lo = lo.min(c.ratio);
                hi = hi.max(c.ratio);
            }
        }
        out.push(
            ResidualRecord::new("power-difference:band", p.d, p.k, &worst, hi / lo, upper / lower)
                .with_exponent(e)
                .judged(passed && lo.is_finite() && hi.is_finite()),
        );
    }
    Ok(out)
}

/// Signed log grid: `±10^t` for `n` values of `t ∈ [-3, 3]`, and 0.
fn signed_grid(n: usize) -> Vec<f64> {
    let n = n.max(2);
    let mut g: Vec<f64> = (0..n).map(|i| 10f64.powf(-3.0 + 6.0 * i as f64 / (n - 1) as f64)).collect();
    g.extend(g.clone().iter().map(|v| -v));
    g.push(0.0);
    g
}

/// Bands of `F(a, b) / ((b - a)^2 (|a| ∨ |b|)^{p-2})` on a signed grid,
/// `F, F_ε >= 0` on `n` random triples, and `F_ε <= F/(p-1)` for `p < 2`.
pub fn taylor_remainder(p: &Params, p_exp: Option<f64>, n: usize, seed: u64) -> Result<Vec<ResidualRecord>> {
    let exps = p_exp.map(|e| vec![e]).unwrap_or_else(|| vec![1.5, 2.0, 3.0, 5.0]);
    let grid = signed_grid(41);
    let mut out = Vec::new();
    for e in exps {
        let r = Remainder::new(e)?;
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for &a in &grid {
            for &b in &grid {
                if a == b {
                    continue;
                }
                let scale = (b - a).powi(2) * a.abs().max(b.abs()).powf(e - 2.0);
                let q = remainder_f(&r, a, b) / scale;
                lo = lo.min(q);
                hi = hi.max(q);
            }
        }
        out.push(
            ResidualRecord::new("taylor-remainder:band", p.d, p.k, &[lo, hi], hi / lo, f64::INFINITY)
                .with_exponent(e)
                .judged(lo > 0.0 && hi.is_finite()),
        );

        let mut rng = rng(seed);
        let mut most_negative = 0.0f64;
        let mut at = vec![0.0; 3];
        let mut excess = 0.0f64;
        let mut excess_at = vec![0.0; 3];
        for _ in 0..n {
            let a = 10f64.powf(rng.random_range(-3.0..3.0)) * if rng.random::<bool>() { 1.0 } else { -1.0 };
            let b = 10f64.powf(rng.random_range(-3.0..3.0)) * if rng.random::<bool>() { 1.0 } else { -1.0 };
            let eps = 10f64.powf(rng.random_range(-4.0..2.0));
            let re = r.with_eps(eps)?;
            let f = remainder_f(&r, a, b);
            let fe = remainder_f_eps(&re, a, b);
            let m = f.min(fe);
            if m < most_negative {
                most_negative = m;
                at = vec![a, b, eps];
            }
            if e < 2.0 && f > 0.0 {
                let rel = (fe - f / (e - 1.0)) / (f / (e - 1.0));
                if rel > excess {
                    excess = rel;
                    excess_at = vec![a, b, eps];
                }
            }
        }
        out.push(
            ResidualRecord::new("taylor-remainder:nonnegative", p.d, p.k, &at, -most_negative, 0.0)
                .with_exponent(e)
                .judged(most_negative >= 0.0),
        );
        if e < 2.0 {
            out.push(
                ResidualRecord::new("taylor-remainder:eps-bound", p.d, p.k, &excess_at, excess, 1e-12).with_exponent(e),
            );
        }
    }
    Ok(out)
}

/// The formulas for `Δ_k |u|^p` and `Δ_k (u^2 + ε^2)^{p/2}` for the polynomial
/// harmonics at `n` random points off the wall, for `p_exp` or `p ∈ {2, 3}`.
pub fn pth_power(p: &Params, p_exp: Option<f64>, n: usize, seed: u64) -> Result<Vec<ResidualRecord>> {
    let exps = p_exp.map(|e| vec![e]).unwrap_or_else(|| vec![2.0, 3.0]);
    let mut rng = rng(seed);
    let mut points = Vec::with_capacity(n);
    while points.len() < n {
        let x = ball_point(&mut rng, p.d, 0.9);
        if x[0].abs() > 0.1 {
            points.push(x);
        }
    }
    let mut out = Vec::new();
    for e in exps {
        for eps in [None, Some(0.1)] {
            let r = match eps {
                Some(v) => Remainder::new(e)?.with_eps(v)?,
                None => Remainder::new(e)?,
            };
            let tag = if eps.is_some() { "pth-power-eps" } else { "pth-power" };
            for u in polynomial_harmonics(p) {
                for x in &points {
                    if eps.is_none() && e < 2.0 && u.eval(x)? == 0.0 {
                        continue;
                    }
                    let c = pth_power_formula_check(&u, &r, p, x, 1e-2)?;
                    out.push(
                        ResidualRecord::new(
                            format!("{tag}:{}", u.label()),
                            p.d,
                            p.k,
                            x,
                            c.residual_half,
                            RESIDUAL_FLOOR,
                        )
                        .with_exponent(e)
                        .judged(c.passed),
                    );
                }
            }
        }
    }
    Ok(out)
}

/// A point of the chamber `z_1 > z_2` inside the ball of radius `radius`.
fn chamber_point(rng: &mut ChaCha8Rng, radius: f64) -> Vec<f64> {
    loop {
        let z = ball_point(rng, 2, radius);
        if z[0] - z[1] > 1e-3 {
            return z;
        }
    }
}

fn swap(z: &[f64]) -> [f64; 2] {
    [z[1], z[0]]
}

/// The displayed Dyson kernels in the coordinates of `R^2`.
fn dyson_direct(kind: KernelKind, x: &[f64], y: &[f64]) -> f64 {
    let pi_x = x[0] - x[1];
    let pi_y = y[0] - y[1];
    let sy = swap(y);
    match kind.base() {
        KernelKind::Newton => pi_y / pi_x * (dist(x, &sy) / dist(x, y)).ln() / (2.0 * std::f64::consts::PI),
        KernelKind::Poisson => {
            2.0 * pi_y * pi_y * (1.0 - norm_sq(x)) / (norm_sq(&[x[0] - y[0], x[1] - y[1]]) * dist(x, &sy).powi(2))
        }
        _ => {
            let xs: Vec<f64> = x.iter().map(|v| v / norm_sq(x)).collect();
            let ratio = dist(&xs, y) * dist(x, &sy) / (dist(x, y) * dist(&xs, &sy));
            pi_y / pi_x * ratio.ln() / (2.0 * std::f64::consts::PI)
        }
    }
}

/// Dyson kernels against the displayed formulas and against the weighted
/// quadrature W-invariant kernels in the adapted basis, plus the vanishing of
/// `P^Dys` on the chamber wall.
///
/// The weight relation is `N^Dys = y_1^2 N^W`, `G^Dys = y_1^2 G^W` and
/// `P^Dys = 2 y_1^2 P^W` in adapted coordinates.
pub fn dyson_checks(p: &Params, n: usize, seed: u64) -> Result<Vec<ResidualRecord>> {
    if p.d != 2 || p.k != 1.0 {
        return Err(Error::InvalidParams("Dyson kernels need d = 2, k = 1".into()));
    }
    let mut rng = rng(seed);
    let mut out = Vec::new();
    for _ in 0..n {
        let x = chamber_point(&mut rng, 0.95);
        let y = chamber_point(&mut rng, 0.95);
        let ys: Vec<f64> = y.iter().map(|v| v / norm(&y)).collect();
        for kind in [KernelKind::NewtonDyson, KernelKind::GreenDyson, KernelKind::PoissonDyson] {
            let target = if kind.base() == KernelKind::Poisson { &ys } else { &y };
            let v = dyson(kind, &x, target)?.to_f64();
            let xy = concat(&x, target);
            out.push(ResidualRecord::new(
                format!("dyson-formula:{kind}"),
                2,
                1.0,
                &xy,
                relative(v, dyson_direct(kind, &x, target)),
                CLOSED_FORM_TOL,
            ));
            let xa = from_a1_basis(&x);
            let ya = from_a1_basis(target);
            let w = w_invariant(kind.base(), p, &xa, &ya)?.to_f64();
            let factor = if kind.base() == KernelKind::Poisson { 2.0 } else { 1.0 };
            out.push(ResidualRecord::new(
                format!("dyson-weight:{kind}"),
                2,
                1.0,
                &xy,
                relative(v, factor * ya[0] * ya[0] * w),
                CLOSED_FORM_TOL,
            ));
        }
    }
    let mut out = worst_per_check(out);
    for _ in 0..n {
        let x = chamber_point(&mut rng, 0.95);
        let s = if rng.random::<bool>() { 1.0 } else { -1.0 } * std::f64::consts::FRAC_1_SQRT_2;
        let wall = [s, s];
        let v = dyson(KernelKind::PoissonDyson, &x, &wall)?.to_f64();
        out.push(
            ResidualRecord::new("dyson-wall:poisson-dyson", 2, 1.0, &concat(&x, &wall), v.abs(), 1e-300)
                .judged(v == 0.0),
        );
    }
    Ok(worst_per_check(out))
}
