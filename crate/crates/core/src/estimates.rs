//! Envelopes of the two-sided kernel bounds and ratio scans.
//!
//! Each envelope `E` is comparable to its kernel `K`, meaning
//! `C^{-1} E <= K <= C E` for some unstated constant `C`. A [`ScanReport`]
//! records the empirical range of `K/E` over stratified random pairs.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{green_direct, newton, poisson};
use crate::params::{delta, dist, dist_reflected, norm, on_orbit, phi, reflect, Params, Point};

/// `1 ∨ log s`, with `s <= 0` mapped to 1.
pub fn one_or_log(s: f64) -> f64 {
    s.max(1.0).ln().max(1.0)
}

fn check_orbit(x: &[f64], y: &[f64]) -> Result<()> {
    if on_orbit(x, y) {
        return Err(Error::DegenerateOrbit);
    }
    Ok(())
}

fn check_pair(p: &Params, x: &[f64], y: &[f64]) -> Result<()> {
    p.check_dim(x)?;
    p.check_dim(y)
}

/// Envelope of `N_k`, by dimension:
///
/// ```text
/// d = 1:  (|x| + |y|)^{1-2k}
/// d = 2:  Φ^{-2k} [1 ∨ log(|x_1 y_1| / |x-y|^2)]
/// d = 3:  Φ^{-2k} |x-y|^{-1}
/// d = 4:  Φ^{-2k} |x-y|^{-2} [1 ∨ log(|x_1 y_1| / |x-σy|^2)]
/// d >= 5: Φ^{-2k} |x-y|^{-2} (|x-y| ∧ |x-σy|)^{4-d}
/// ```
pub fn newton_envelope(p: &Params, x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(p, x, y)?;
    check_orbit(x, y)?;
    let k = p.k;
    if p.d == 1 {
        return Ok((x[0].abs() + y[0].abs()).powf(1.0 - 2.0 * k));
    }
    let (a, b) = (dist(x, y), dist_reflected(x, y));
    let lead = phi(x, y).powf(-2.0 * k);
    let eta = (x[0] * y[0]).abs();
    Ok(match p.d {
        2 => lead * one_or_log(eta / (a * a)),
        3 => lead / a,
        4 => lead / (a * a) * one_or_log(eta / (b * b)),
        d => lead / (a * a) * a.min(b).powf(4.0 - d as f64),
    })
}

/// Envelope of `G_k` on `B × B`:
///
/// ```text
/// d = 1:  √(δδ) (|x| + |y|)^{1-2k} (1 ∧ √(δδ)/|x-y|)
/// d = 2:  Φ^{-2k} (1 ∧ δδ/|x-y|^2) [1 ∨ log((|x_1y_1| ∧ δδ)/|x-y|^2)]
///                 × [1 ∨ log(|x_1y_1| / (δδ ∨ |x-σy|^2))]
/// d = 3:  Φ^{-2k} |x-y|^{-1} (1 ∧ √δδ/|x-y|) (1 ∧ √δδ/(|x-y| ∧ |x-σy|))
/// d = 4:  Φ^{-2k} |x-y|^{-2} (1 ∧ δδ/(|x-y|^2 ∧ |x-σy|^2))
///                 × [1 ∨ log((|x_1y_1| ∧ δδ)/|x-σy|^2)]
/// d >= 5: Φ^{-2k} (|x-y| ∧ |x-σy|)^{4-d} |x-y|^{-2} (1 ∧ δδ/(|x-y|^2 ∧ |x-σy|^2))
/// ```
///
/// with `δδ = δ(x)δ(y)`.
pub fn green_envelope(p: &Params, x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(p, x, y)?;
    check_orbit(x, y)?;
    let dd = delta(x)? * delta(y)?;
    let k = p.k;
    let (a, b) = (dist(x, y), dist_reflected(x, y));
    if p.d == 1 {
        let s = dd.sqrt();
        return Ok(s * (x[0].abs() + y[0].abs()).powf(1.0 - 2.0 * k) * (s / a).min(1.0));
    }
    let lead = phi(x, y).powf(-2.0 * k);
    let eta = (x[0] * y[0]).abs();
    let m = a.min(b);
    Ok(match p.d {
        2 => lead * (dd / (a * a)).min(1.0) * one_or_log(eta.min(dd) / (a * a)) * one_or_log(eta / dd.max(b * b)),
        3 => lead / a * (dd.sqrt() / a).min(1.0) * (dd.sqrt() / m).min(1.0),
        4 => lead / (a * a) * (dd / (m * m)).min(1.0) * one_or_log(eta.min(dd) / (b * b)),
        d => lead * m.powf(4.0 - d as f64) / (a * a) * (dd / (m * m)).min(1.0),
    })
}

/// `c_k ∫ δδ / ((δδ + A_t) A_t^{k+d/2-1}) (1-t)^{k-1}(1+t)^k dt`, the
/// boundary-distance form of the Green function bound.
pub fn green_envelope_general(p: &Params, x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(p, x, y)?;
    check_orbit(x, y)?;
    let dd = delta(x)? * delta(y)?;
    let eta = x[0] * y[0];
    let (a0, e, plus) = if eta >= 0.0 {
        let a = dist(x, y);
        (a * a, 2.0 * eta, true)
    } else {
        let b = dist_reflected(x, y);
        (b * b, -2.0 * eta, false)
    };
    let q = p.newton_exponent();
    let v = p
        .integrator()
        .integrate(
            |n| {
                let at = a0 + e * if plus { n.one_minus } else { n.one_plus };
                dd / ((dd + at) * at.powf(q))
            },
            crate::quadrature::DEFAULT_TOL,
        )?
        .value;
    Ok(p.c_k * v)
}

/// Envelope of `P_k` on `B × S`:
///
/// ```text
/// d = 1:  1 - |x|
/// d = 2:  (1 - |x|^2) Φ^{-2k} |x-y|^{-2} [1 ∨ log(|x_1 y_1| / |x-σy|^2)]
/// d >= 3: (1 - |x|^2) Φ^{-2k} |x-y|^{-2} (|x-y| ∧ |x-σy|)^{2-d}
/// ```
pub fn poisson_envelope(p: &Params, x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(p, x, y)?;
    let ry = norm(y);
    if (ry - 1.0).abs() > 1e-12 {
        return Err(Error::NotOnSphere { norm: ry });
    }
    check_orbit(x, y)?;
    let r = norm(x);
    if p.d == 1 {
        return Ok(1.0 - r);
    }
    let (a, b) = (dist(x, y), dist_reflected(x, y));
    let lead = (1.0 - r) * (1.0 + r) * phi(x, y).powf(-2.0 * p.k) / (a * a);
    let eta = (x[0] * y[0]).abs();
    Ok(match p.d {
        2 => lead * one_or_log(eta / (b * b)),
        d => lead * a.min(b).powf(2.0 - d as f64),
    })
}

/// `δ(x) N_k(x, y_0)`, comparable to `G_k(x, y_0)` for fixed `y_0`.
pub fn boundary_newton_envelope(p: &Params, x: &[f64], y0: &[f64]) -> Result<f64> {
    check_orbit(x, y0)?;
    Ok(delta(x)? * newton(p, x, y0)?.to_f64())
}

/// Result of the elementary power-difference inequality at one `(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ElementaryCheck {
    pub ratio: f64,
    pub lower: f64,
    pub upper: f64,
    pub passed: bool,
}

/// Band of `(a^{-p} - b^{-p}) b a^p / (b - a)` over `0 < a < b`.
///
/// With `r = a/b` the quantity is `(1 - r^p)/(1 - r)`, monotone in `r`
/// between its limits `1` (`r → 0`) and `p` (`r → 1`).
pub fn elementary_band(p_exp: f64) -> (f64, f64) {
    (p_exp.min(1.0), p_exp.max(1.0))
}

/// Evaluates `(a^{-p} - b^{-p}) b a^p / (b - a)` without cancellation and
/// checks it against [`elementary_band`].
pub fn elementary_bound_check(p_exp: f64, a: f64, b: f64) -> Result<ElementaryCheck> {
    if !(p_exp > 0.0) {
        return Err(Error::InvalidParams(format!("exponent must be positive, got {p_exp}")));
    }
    if !(a > 0.0 && a < b && b.is_finite()) {
        return Err(Error::InvalidParams(format!("need 0 < a < b, got a = {a}, b = {b}")));
    }
    let lr = a.ln() - b.ln();
    let ratio = (p_exp * lr).exp_m1() / lr.exp_m1();
    let (lower, upper) = elementary_band(p_exp);
    let slack = 1e-12;
    Ok(ElementaryCheck {
        ratio,
        lower,
        upper,
        passed: ratio >= lower * (1.0 - slack) && ratio <= upper * (1.0 + slack),
    })
}

/// The comparability statements covered by [`ratio_scan`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Theorem {
    /// `N_k` against [`newton_envelope`].
    Newton,
    /// `G_k` against [`green_envelope`].
    Green,
    /// `G_k` against [`green_envelope_general`].
    GreenIntegral,
    /// `P_k` against [`poisson_envelope`].
    Poisson,
    /// `G_k(·, y_0)` against [`boundary_newton_envelope`].
    GreenBoundary,
    /// `N_k` for `d = 1` against `(|x| + |y|)^{1-2k}`.
    OneDimensional,
}

impl Theorem {
    pub const ALL: [Theorem; 6] =
        [Self::Newton, Self::Green, Self::GreenIntegral, Self::Poisson, Self::GreenBoundary, Self::OneDimensional];

    pub fn name(self) -> &'static str {
        match self {
            Self::Newton => "newton",
            Self::Green => "green",
            Self::GreenIntegral => "green-integral",
            Self::Poisson => "poisson",
            Self::GreenBoundary => "green-boundary",
            Self::OneDimensional => "one-dimensional",
        }
    }

    pub fn domain(self) -> PairDomain {
        match self {
            Self::Newton | Self::OneDimensional => PairDomain::Space,
            Self::Green | Self::GreenIntegral => PairDomain::Ball,
            Self::Poisson => PairDomain::BallSphere,
            Self::GreenBoundary => PairDomain::FixedSource,
        }
    }

    /// The kernel value `K(x, y)`.
    pub fn kernel(self, p: &Params, x: &[f64], y: &[f64]) -> Result<f64> {
        match self {
            Self::Newton | Self::OneDimensional => Ok(newton(p, x, y)?.to_f64()),
            Self::Green | Self::GreenIntegral | Self::GreenBoundary => Ok(green_direct(p, x, y)?.to_f64()),
            Self::Poisson => poisson(p, x, y),
        }
    }

    pub fn envelope(self) -> Envelope {
        let f: fn(&Params, &[f64], &[f64]) -> Result<f64> = match self {
            Self::Newton | Self::OneDimensional => newton_envelope,
            Self::Green => green_envelope,
            Self::GreenIntegral => green_envelope_general,
            Self::Poisson => poisson_envelope,
            Self::GreenBoundary => boundary_newton_envelope,
        };
        Envelope::new(self.name(), f)
    }

    /// Checks that `(d, k)` fits the statement.
    pub fn validate(self, p: &Params) -> Result<()> {
        match self {
            Self::OneDimensional if p.d != 1 => {
                Err(Error::InvalidParams(format!("{} needs d = 1, got d = {}", self.name(), p.d)))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Theorem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        let alias = match key.as_str() {
            "newton-5.1" => Some(Self::Newton),
            "green-5.2" => Some(Self::Green),
            "green-3.2" => Some(Self::GreenIntegral),
            "poisson-5.8" => Some(Self::Poisson),
            "corollary-3.5" => Some(Self::GreenBoundary),
            "d1-remark" | "d1" => Some(Self::OneDimensional),
            _ => None,
        };
        alias
            .or_else(|| Self::ALL.into_iter().find(|t| t.name() == key))
            .ok_or_else(|| Error::InvalidParams(format!("unknown theorem selector '{s}'")))
    }
}

type EnvelopeFn = dyn Fn(&Params, &[f64], &[f64]) -> Result<f64> + Send + Sync;

/// A named envelope function.
#[derive(Clone)]
pub struct Envelope {
    pub tag: String,
    eval: Arc<EnvelopeFn>,
}

impl fmt::Debug for Envelope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Envelope").field("tag", &self.tag).finish()
    }
}

impl Envelope {
    pub fn new<F>(tag: impl Into<String>, f: F) -> Self
    where
        F: Fn(&Params, &[f64], &[f64]) -> Result<f64> + Send + Sync + 'static,
    {
        Self { tag: tag.into(), eval: Arc::new(f) }
    }

    pub fn evaluate(&self, p: &Params, x: &[f64], y: &[f64]) -> Result<f64> {
        (self.eval)(p, x, y)
    }
}

/// The source `y_0 = (0.2, 0.1, 0, ..., 0)` of the boundary-distance scan.
pub fn fixed_source(d: usize) -> Point {
    let mut y = vec![0.0; d];
    y[0] = 0.2;
    if d > 1 {
        y[1] = 0.1;
    }
    Point(y)
}

/// Where scan pairs live.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum PairDomain {
    /// Both points in the unit ball, read as a window of `R^d`.
    Space,
    /// Both points in the open unit ball.
    Ball,
    /// `x` in the ball (up to `|x| = 0.999`), `y` on the sphere.
    BallSphere,
    /// `x` in the ball, `y` at [`fixed_source`].
    FixedSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Stratum {
    Bulk,
    NearBoundary,
    NearWall,
    NearDiagonal,
    NearReflectedDiagonal,
}

impl Stratum {
    pub const ALL: [Stratum; 5] =
        [Self::Bulk, Self::NearBoundary, Self::NearWall, Self::NearDiagonal, Self::NearReflectedDiagonal];

    pub fn name(self) -> &'static str {
        match self {
            Self::Bulk => "bulk",
            Self::NearBoundary => "near-boundary",
            Self::NearWall => "near-wall",
            Self::NearDiagonal => "near-diagonal",
            Self::NearReflectedDiagonal => "near-reflected-diagonal",
        }
    }
}

/// Pairs closer than this to `W.y` are skipped.
pub const ORBIT_EXCLUSION: f64 = 1e-6;

/// Width of the near-boundary, near-wall and near-diagonal strata.
pub const STRATUM_WIDTH: f64 = 0.01;

#[derive(Debug, Clone)]
pub struct SamplerConfig {
    pub n: usize,
    pub seed: u64,
    pub domain: PairDomain,
}

impl SamplerConfig {
    pub fn new(n: usize, seed: u64, domain: PairDomain) -> Self {
        Self { n, seed, domain }
    }
}

fn gaussian_direction(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let n = norm(&v);
        if n > 1e-12 {
            return v.into_iter().map(|c| c / n).collect();
        }
    }
}

/// Uniform point of the shell `rmin <= |x| <= rmax`.
fn shell_point(rng: &mut ChaCha8Rng, d: usize, rmin: f64, rmax: f64) -> Vec<f64> {
    let u: f64 = rng.random();
    let df = d as f64;
    let r = (rmin.powf(df) + u * (rmax.powf(df) - rmin.powf(df))).powf(1.0 / df);
    gaussian_direction(rng, d).into_iter().map(|c| c * r).collect()
}

fn near_point(rng: &mut ChaCha8Rng, center: &[f64]) -> Vec<f64> {
    let mag = 10f64.powf(rng.random_range(-5.0..STRATUM_WIDTH.log10()));
    let dir = gaussian_direction(rng, center.len());
    center.iter().zip(dir).map(|(c, v)| c + mag * v).collect()
}

fn sample_pair(rng: &mut ChaCha8Rng, d: usize, domain: PairDomain, stratum: Stratum) -> (Vec<f64>, Vec<f64>) {
    let x_max = if domain == PairDomain::BallSphere { 0.999 } else { 1.0 - 1e-9 };
    loop {
        let y: Vec<f64> = match domain {
            PairDomain::BallSphere => {
                if d == 1 {
                    vec![if rng.random::<bool>() { 1.0 } else { -1.0 }]
                } else {
                    gaussian_direction(rng, d)
                }
            }
            PairDomain::FixedSource => fixed_source(d).0,
            _ => shell_point(rng, d, 0.0, 1.0 - 1e-9),
        };
        let x: Vec<f64> = match stratum {
            Stratum::Bulk => shell_point(rng, d, 0.0, x_max),
            Stratum::NearBoundary => shell_point(rng, d, 1.0 - STRATUM_WIDTH, x_max),
            Stratum::NearWall => {
                let mut x = shell_point(rng, d, 0.0, x_max);
                x[0] = rng.random_range(-STRATUM_WIDTH..STRATUM_WIDTH);
                x
            }
            Stratum::NearDiagonal => near_point(rng, &y),
            Stratum::NearReflectedDiagonal => near_point(rng, &reflect(&y)),
        };
        if norm(&x) > x_max {
            continue;
        }
        let gap = dist(&x, &y).min(dist_reflected(&x, &y));
        if gap < ORBIT_EXCLUSION {
            continue;
        }
        return (x, y);
    }
}

/// Extremes of `K/E` over one stratum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StratumReport {
    pub stratum: Stratum,
    pub n: usize,
    pub ratio_min: f64,
    pub ratio_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport {
    pub theorem: String,
    pub d: usize,
    pub k: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub argmin: (Point, Point),
    pub argmax: (Point, Point),
    pub strata: Vec<StratumReport>,
    /// Pairs where kernel or envelope evaluation failed.
    pub failures: usize,
}

impl ScanReport {
    /// `ratio_max / ratio_min`.
    pub fn band(&self) -> f64 {
        self.ratio_max / self.ratio_min
    }

    /// Finite, positive extremes and no failed evaluations.
    pub fn is_finite_band(&self) -> bool {
        self.failures == 0
            && self.ratio_min > 0.0
            && self.ratio_min.is_finite()
            && self.ratio_max.is_finite()
            && self.ratio_min <= self.ratio_max
    }

    pub const CSV_HEADER: [&'static str; 11] = [
        "theorem",
        "d",
        "k",
        "n_samples",
        "seed",
        "ratio_min",
        "ratio_max",
        "argmin_x",
        "argmin_y",
        "argmax_x",
        "argmax_y",
    ];

    /// One CSV record; coordinates are joined with `;`.
    pub fn csv_record(&self) -> Vec<String> {
        let coords = |p: &Point| p.iter().map(|v| crate::report::fmt_f64(*v)).collect::<Vec<_>>().join(";");
        vec![
            self.theorem.clone(),
            self.d.to_string(),
            crate::report::fmt_f64(self.k),
            self.n_samples.to_string(),
            self.seed.to_string(),
            crate::report::fmt_f64(self.ratio_min),
            crate::report::fmt_f64(self.ratio_max),
            coords(&self.argmin.0),
            coords(&self.argmin.1),
            coords(&self.argmax.0),
            coords(&self.argmax.1),
        ]
    }
}

/// Samples `config.n` pairs, split evenly over the five strata, and records
/// the range of `kernel / envelope`. The pairs are drawn sequentially from a
/// ChaCha8 stream seeded with `config.seed`; evaluation runs in parallel and
/// is reduced in sample order, so reports are reproducible.
pub fn ratio_scan<K>(kernel: K, envelope: &Envelope, p: &Params, config: &SamplerConfig) -> Result<ScanReport>
where
    K: Fn(&Params, &[f64], &[f64]) -> Result<f64> + Sync,
{
    if config.n == 0 {
        return Err(Error::InvalidParams("scan needs at least one sample".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut pairs = Vec::with_capacity(config.n);
    for i in 0..config.n {
        let stratum = Stratum::ALL[i * Stratum::ALL.len() / config.n];
        let (x, y) = sample_pair(&mut rng, p.d, config.domain, stratum);
        pairs.push((stratum, x, y));
    }
    let ratios: Vec<Option<f64>> = pairs
        .par_iter()
        .map(|(_, x, y)| {
            let kv = kernel(p, x, y).ok()?;
            let ev = envelope.evaluate(p, x, y).ok()?;
            let r = kv / ev;
            (r.is_finite() && r > 0.0).then_some(r)
        })
        .collect();
    let mut report = ScanReport {
        theorem: envelope.tag.clone(),
        d: p.d,
        k: p.k,
        n_samples: config.n,
        seed: config.seed,
        ratio_min: f64::INFINITY,
        ratio_max: f64::NEG_INFINITY,
        argmin: (Point::zeros(p.d), Point::zeros(p.d)),
        argmax: (Point::zeros(p.d), Point::zeros(p.d)),
        strata: Stratum::ALL
            .iter()
            .map(|&s| StratumReport { stratum: s, n: 0, ratio_min: f64::INFINITY, ratio_max: f64::NEG_INFINITY })
            .collect(),
        failures: 0,
    };
    for ((stratum, x, y), r) in pairs.iter().zip(ratios) {
        let Some(r) = r else {
            report.failures += 1;
            continue;
        };
        let s = &mut report.strata[Stratum::ALL.iter().position(|t| t == stratum).expect("known stratum")];
        s.n += 1;
        s.ratio_min = s.ratio_min.min(r);
        s.ratio_max = s.ratio_max.max(r);
        if r < report.ratio_min {
            report.ratio_min = r;
            report.argmin = (Point(x.clone()), Point(y.clone()));
        }
        if r > report.ratio_max {
            report.ratio_max = r;
            report.argmax = (Point(x.clone()), Point(y.clone()));
        }
    }
    Ok(report)
}

/// Runs the scan of `theorem` with its own kernel, envelope and domain.
pub fn scan_theorem(theorem: Theorem, p: &Params, n: usize, seed: u64) -> Result<ScanReport> {
    theorem.validate(p)?;
    ratio_scan(
        |p: &Params, x: &[f64], y: &[f64]| theorem.kernel(p, x, y),
        &theorem.envelope(),
        p,
        &SamplerConfig::new(n, seed, theorem.domain()),
    )
}

/// Default seed and size of the regression scans.
pub const BASELINE_SEED: u64 = 7;
pub const BASELINE_SAMPLES: usize = 10_000;

/// Allowed growth of a band relative to its stored baseline.
pub const BASELINE_SLACK: f64 = 1.1;

const BASELINES: &str = include_str!("../baselines/scan_baselines.csv");

/// A stored regression band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Baseline {
    pub ratio_min: f64,
    pub ratio_max: f64,
}

impl Baseline {
    pub fn band(&self) -> f64 {
        self.ratio_max / self.ratio_min
    }
}

/// The `(d, k)` grid scanned for each theorem.
pub fn baseline_grid(theorem: Theorem) -> Vec<(usize, f64)> {
    match theorem {
        Theorem::OneDimensional => vec![(1, 0.75), (1, 1.0), (1, 1.7)],
        _ => (2..=5).flat_map(|d| [0.5, 1.0, 1.7].map(|k| (d, k))).collect(),
    }
}

/// Looks up the stored band for `(theorem, d, k, n, seed)`.
pub fn baseline(theorem: Theorem, d: usize, k: f64, n: usize, seed: u64) -> Option<Baseline> {
    BASELINES.lines().skip(1).find_map(|line| {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() < 7 {
            return None;
        }
        let matches = f[0] == theorem.name()
            && f[1].parse::<usize>().ok()? == d
            && f[2].parse::<f64>().ok()? == k
            && f[3].parse::<usize>().ok()? == n
            && f[4].parse::<u64>().ok()? == seed;
        if !matches {
            return None;
        }
        Some(Baseline { ratio_min: f[5].parse().ok()?, ratio_max: f[6].parse().ok()? })
    })
}

/// Outcome of comparing a scan with its baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegressionCheck {
    pub band: f64,
    pub baseline_band: Option<f64>,
    pub passed: bool,
}

/// Passes when the band is finite and, if a baseline exists, at most
/// [`BASELINE_SLACK`] times the stored band.
pub fn regression_check(report: &ScanReport, theorem: Theorem) -> RegressionCheck {
    let base = baseline(theorem, report.d, report.k, report.n_samples, report.seed);
    let band = report.band();
    let within = base.is_none_or(|b| band <= BASELINE_SLACK * b.band());
    RegressionCheck { band, baseline_band: base.map(|b| b.band()), passed: report.is_finite_band() && within }
}
