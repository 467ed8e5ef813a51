//! The rank-one Dunkl Laplacian by finite differences, the Kelvin transform
//! and a catalog of `Δ_k`-harmonic test functions.
//!
//! The operator is
//!
//! ```text
//! Δ_k u(x) = Δu(x) + (2k/x_1) ∂_1 u(x) - (k/x_1^2) (u(x) - u(σx)).
//! ```
//!
//! With this normalization `|x|^{2-2k-d}` and `N_k(·, y)` are harmonic off
//! the singular set, which is checked numerically by [`verify_harmonicity`].

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{green_direct_with_tol, newton_with_tol, poisson_with_tol, TIGHT_TOL};
use crate::params::{dist, dist_reflected, invert, norm, norm_sq, reflect, Params, Point};

pub type Evaluator = Arc<dyn Fn(&[f64]) -> Result<f64> + Send + Sync>;
pub type Region = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;
pub type LengthScale = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A real function on a subset of `R^d`.
///
/// Evaluators must be safe to call concurrently. `length_scale(x)` is the
/// distance from `x` to the edge of the region or to where the field stops
/// being smooth, whichever is closer (capped at 1);
/// finite-difference steps are taken relative to it.
#[derive(Clone)]
pub struct ScalarField {
    label: String,
    eval: Evaluator,
    region: Region,
    length_scale: LengthScale,
    even: bool,
    laplacian: Option<Evaluator>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField").field("label", &self.label).field("even", &self.even).finish()
    }
}

impl ScalarField {
    /// A field defined and smooth everywhere.
    pub fn new<F>(label: impl Into<String>, eval: F) -> Self
    where
        F: Fn(&[f64]) -> Result<f64> + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            eval: Arc::new(eval),
            region: Arc::new(|_| true),
            length_scale: Arc::new(|_| 1.0),
            even: false,
            laplacian: None,
        }
    }

    /// Restricts the region of definition.
    pub fn with_region<R>(mut self, region: R) -> Self
    where
        R: Fn(&[f64]) -> bool + Send + Sync + 'static,
    {
        self.region = Arc::new(region);
        self
    }

    pub fn with_length_scale<L>(mut self, scale: L) -> Self
    where
        L: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        self.length_scale = Arc::new(scale);
        self
    }

    /// Marks the field as even in `x_1`.
    pub fn even(mut self) -> Self {
        self.even = true;
        self
    }

    /// Attaches a closed form for `Δ_k u`.
    pub fn with_laplacian<F>(mut self, lap: F) -> Self
    where
        F: Fn(&[f64]) -> Result<f64> + Send + Sync + 'static,
    {
        self.laplacian = Some(Arc::new(lap));
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_even(&self) -> bool {
        self.even
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        (self.region)(x)
    }

    /// Local smoothness scale, including the distance to the wall for
    /// fields that are not even in `x_1`.
    pub fn length_scale(&self, x: &[f64]) -> f64 {
        let s = (self.length_scale)(x).min(1.0);
        if self.even {
            s
        } else {
            s.min(x[0].abs())
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let v = (self.eval)(x)?;
        if !v.is_finite() {
            return Err(Error::NonFinite { at: format!("{} at {x:?}", self.label) });
        }
        Ok(v)
    }

    /// The closed-form `Δ_k u(x)`, if one was attached.
    pub fn analytic_laplacian(&self, x: &[f64]) -> Option<Result<f64>> {
        self.laplacian.as_ref().map(|l| l(x))
    }

    /// `x ↦ u(σx)`.
    pub fn reflected(&self) -> Self {
        let inner = self.clone();
        let region = self.region.clone();
        let scale = self.length_scale.clone();
        let lap = self.laplacian.clone();
        Self {
            label: format!("{}∘σ", self.label),
            eval: Arc::new(move |x| inner.eval(&reflect(x))),
            region: Arc::new(move |x| region(&reflect(x))),
            length_scale: Arc::new(move |x| scale(&reflect(x))),
            even: self.even,
            laplacian: lap.map(|l| -> Evaluator { Arc::new(move |x: &[f64]| l(&reflect(x))) }),
        }
    }

    /// `a u + b v` on the intersection of the regions.
    pub fn combine(a: f64, u: &ScalarField, b: f64, v: &ScalarField) -> Self {
        let (u1, v1, u2, v2, u3, v3) = (u.clone(), v.clone(), u.clone(), v.clone(), u.clone(), v.clone());
        let lap: Option<Evaluator> = match (&u.laplacian, &v.laplacian) {
            (Some(lu), Some(lv)) => {
                let (lu, lv) = (lu.clone(), lv.clone());
                Some(Arc::new(move |x: &[f64]| Ok(a * lu(x)? + b * lv(x)?)))
            }
            _ => None,
        };
        Self {
            label: format!("{a}·{} + {b}·{}", u.label, v.label),
            eval: Arc::new(move |x| Ok(a * u1.eval(x)? + b * v1.eval(x)?)),
            region: Arc::new(move |x| u2.contains(x) && v2.contains(x)),
            length_scale: Arc::new(move |x| u3.length_scale(x).min(v3.length_scale(x))),
            even: u.even && v.even,
            laplacian: lap,
        }
    }
}

/// The three pieces of `Δ_k u(x)` and their sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LaplacianTerms {
    pub laplacian: f64,
    pub gradient: f64,
    pub reflection: f64,
}

impl LaplacianTerms {
    pub fn value(&self) -> f64 {
        self.laplacian + self.gradient + self.reflection
    }

    /// Sum of absolute values of the pieces; the natural size of `Δ_k u`.
    pub fn scale(&self) -> f64 {
        self.laplacian.abs() + self.gradient.abs() + self.reflection.abs()
    }
}

/// Second-order central differences for `Δu` and `∂_1 u`, exact reflection
/// difference.
pub fn dunkl_laplacian_terms(u: &ScalarField, p: &Params, x: &[f64], h: f64) -> Result<LaplacianTerms> {
    p.check_dim(x)?;
    if !(h > 0.0) {
        return Err(Error::InvalidParams(format!("step must be positive, got {h}")));
    }
    let near_wall = x[0].abs() <= 10.0 * h;
    if near_wall && !u.even {
        return Err(Error::TooCloseToWall { x1: x[0], h });
    }
    let sx = reflect(x);
    if !u.contains(x) || !u.contains(&sx) {
        return Err(Error::StencilOutsideRegion { label: u.label.clone() });
    }
    let u0 = u.eval(x)?;
    let mut lap = 0.0;
    let mut d1 = 0.0;
    let mut second1 = 0.0;
    let mut xp = x.to_vec();
    for i in 0..x.len() {
        xp[i] = x[i] + h;
        if !u.contains(&xp) {
            return Err(Error::StencilOutsideRegion { label: u.label.clone() });
        }
        let up = u.eval(&xp)?;
        xp[i] = x[i] - h;
        if !u.contains(&xp) {
            return Err(Error::StencilOutsideRegion { label: u.label.clone() });
        }
        let um = u.eval(&xp)?;
        xp[i] = x[i];
        let s = (up - 2.0 * u0 + um) / (h * h);
        lap += s;
        if i == 0 {
            d1 = (up - um) / (2.0 * h);
            second1 = s;
        }
    }
    let (gradient, reflection) = if u.even {
        // u(x) = u(σx); ∂_1 u / x_1 → ∂_1^2 u on the wall
        let g = if x[0] == 0.0 { 2.0 * p.k * second1 } else { 2.0 * p.k * d1 / x[0] };
        (g, 0.0)
    } else {
        let diff = u0 - u.eval(&sx)?;
        (2.0 * p.k * d1 / x[0], -p.k * diff / (x[0] * x[0]))
    };
    Ok(LaplacianTerms { laplacian: lap, gradient, reflection })
}

/// `Δ_k u(x)` with step `h`.
pub fn dunkl_laplacian(u: &ScalarField, p: &Params, x: &[f64], h: f64) -> Result<f64> {
    Ok(dunkl_laplacian_terms(u, p, x, h)?.value())
}

/// Default step `10^{-4} (1 + |x|)`.
pub fn default_step(x: &[f64]) -> f64 {
    1e-4 * (1.0 + norm(x))
}

/// `K_k[u](x) = |x|^{2-2k-d} u(x/|x|^2)`.
pub fn kelvin(u: &ScalarField, p: &Params) -> ScalarField {
    let e = p.kelvin_exponent();
    let (u1, u2, u3) = (u.clone(), u.clone(), u.clone());
    ScalarField {
        label: format!("K[{}]", u.label),
        eval: Arc::new(move |x| {
            let xs = invert(x)?;
            Ok(norm(x).powf(e) * u1.eval(&xs)?)
        }),
        region: Arc::new(move |x| match invert(x) {
            Ok(xs) => u2.contains(&xs),
            Err(_) => false,
        }),
        length_scale: Arc::new(move |x| {
            let r2 = norm_sq(x);
            match invert(x) {
                Ok(xs) => (0.5 * r2.sqrt()).min(r2 * u3.length_scale(&xs)),
                Err(_) => 0.0,
            }
        }),
        even: u.even,
        laplacian: None,
    }
}

/// Margin by which catalog regions avoid the orbit of the source point.
pub const CATALOG_MARGIN: f64 = 0.05;

/// Source point `(0.3, 0.2, 0, ..., 0)` of the catalog kernels.
pub fn catalog_source(d: usize) -> Point {
    let mut y = vec![0.0; d];
    y[0] = 0.3;
    if d > 1 {
        y[1] = 0.2;
    }
    Point(y)
}

/// Boundary point `(0.6, 0.8, 0, ..., 0)` (or `1` for `d = 1`).
pub fn catalog_boundary_point(d: usize) -> Point {
    let mut z = vec![0.0; d];
    if d == 1 {
        z[0] = 1.0;
    } else {
        z[0] = 0.6;
        z[1] = 0.8;
    }
    Point(z)
}

fn zero_laplacian(_: &[f64]) -> Result<f64> {
    Ok(0.0)
}

/// Seven `Δ_k`-harmonic fields: four polynomials (for `d = 1` their
/// one-dimensional substitutes), `N_k(·, y_0)`, `P_k(·, z)` and
/// `G_k(·, y_0)`.
pub fn harmonic_catalog(p: &Params) -> Vec<ScalarField> {
    let d = p.d;
    let k = p.k;
    let mut out = Vec::with_capacity(7);
    out.push(ScalarField::new("1", |_| Ok(1.0)).even().with_laplacian(zero_laplacian));
    if d >= 2 {
        out.push(ScalarField::new("x_2", |x| Ok(x[1])).even().with_laplacian(zero_laplacian));
        out.push(ScalarField::new("x_1 x_2", |x| Ok(x[0] * x[1])).with_laplacian(zero_laplacian));
        out.push(
            ScalarField::new(format!("x_1^2 - {}x_2^2", 1.0 + 2.0 * k), move |x| {
                Ok(x[0] * x[0] - (1.0 + 2.0 * k) * x[1] * x[1])
            })
            .even()
            .with_laplacian(zero_laplacian),
        );
    } else {
        out.push(ScalarField::new("x_1", |x| Ok(x[0])).with_laplacian(zero_laplacian));
        out.push(
            ScalarField::new(format!("sign(x_1)|x_1|^{}", -2.0 * k), move |x| {
                Ok(x[0].signum() * x[0].abs().powf(-2.0 * k))
            })
            .with_region(|x| x[0] != 0.0)
            .with_laplacian(zero_laplacian),
        );
        out.push(
            ScalarField::new(format!("|x_1|^{}", 1.0 - 2.0 * k), move |x| Ok(x[0].abs().powf(1.0 - 2.0 * k)))
                .with_region(|x| x[0] != 0.0)
                .with_length_scale(|x| x[0].abs())
                .with_laplacian(zero_laplacian),
        );
    }
    let y0 = catalog_source(d);
    let orbit_gap = {
        let y0 = y0.clone();
        move |x: &[f64]| dist(x, &y0).min(dist_reflected(x, &y0))
    };
    {
        let (pp, y, gap, gap2) = (p.clone(), y0.clone(), orbit_gap.clone(), orbit_gap.clone());
        out.push(
            ScalarField::new("N_k(·, y0)", move |x| Ok(newton_with_tol(&pp, x, &y, TIGHT_TOL)?.to_f64()))
                .with_region(move |x| gap(x) > CATALOG_MARGIN)
                .with_length_scale(move |x| gap2(x) - CATALOG_MARGIN)
                .with_laplacian(zero_laplacian),
        );
    }
    {
        let (pp, z) = (p.clone(), catalog_boundary_point(d));
        let z2 = z.clone();
        out.push(
            ScalarField::new("P_k(·, z)", move |x| poisson_with_tol(&pp, x, &z, TIGHT_TOL))
                .with_region(|x| norm(x) < 1.0 - CATALOG_MARGIN)
                .with_length_scale(move |x| {
                    dist(x, &z2).min(dist_reflected(x, &z2)).min(1.0 - CATALOG_MARGIN - norm(x))
                })
                .with_laplacian(zero_laplacian),
        );
    }
    {
        let (pp, y, gap, gap2) = (p.clone(), y0, orbit_gap.clone(), orbit_gap);
        out.push(
            ScalarField::new("G_k(·, y0)", move |x| Ok(green_direct_with_tol(&pp, x, &y, TIGHT_TOL)?.to_f64()))
                .with_region(move |x| gap(x) > CATALOG_MARGIN && norm(x) < 1.0 - CATALOG_MARGIN)
                .with_length_scale(move |x| (gap2(x) - CATALOG_MARGIN).min(1.0 - CATALOG_MARGIN - norm(x)))
                .with_laplacian(zero_laplacian),
        );
    }
    out
}

/// Normalized residuals `|Δ_k u| / scale` at steps `h` and `h/2` for one
/// sample point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointResidual {
    pub x: Point,
    pub step: f64,
    pub residual: f64,
    pub residual_half: f64,
    pub raw: f64,
    pub ratio: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarmonicityReport {
    pub label: String,
    pub points: Vec<PointResidual>,
    pub max_residual: f64,
    pub max_raw_residual: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub passed: bool,
}

/// Normalized residuals at or below this level count as exact.
pub const RESIDUAL_FLOOR: f64 = 1e-9;

/// Accepted band for the Richardson factor `r(h)/r(h/2)` of an `O(h^2)`
/// residual.
pub const RICHARDSON_BAND: (f64, f64) = (3.5, 4.5);

/// Checks `Δ_k u ≈ 0` on `sample`.
///
/// At each point the step is `h · ℓ(x)` with `ℓ` the field's length scale,
/// and the residual is normalized by the sum of absolute operator terms plus
/// `|u(x)|/ℓ^2`. A
/// point passes when the residual decays by a factor in [`RICHARDSON_BAND`]
/// as the step halves, when it already sits below [`RESIDUAL_FLOOR`], or
/// when both residuals lie under `C h^2` with `C` the largest constant
/// estimated from the points that decay in band. Points whose stencil
/// leaves the region are reported as failures.
pub fn verify_harmonicity(u: &ScalarField, p: &Params, sample: &[Point], h: f64) -> HarmonicityReport {
    let mut points = Vec::with_capacity(sample.len());
    for x in sample {
        let ell = u.length_scale(x);
        let step = h * ell;
        let eval = |s: f64| -> Result<(f64, f64)> {
            let t = dunkl_laplacian_terms(u, p, x, s)?;
            let sc = t.scale() + u.eval(x)?.abs() / (ell * ell);
            Ok((if sc > 0.0 { t.value().abs() / sc } else { 0.0 }, t.value().abs()))
        };
        let pr = match (eval(step), eval(0.5 * step)) {
            (Ok((r1, raw)), Ok((r2, _))) => {
                let ratio = if r2 > 0.0 { r1 / r2 } else { f64::INFINITY };
                let floor = r1.max(r2) <= RESIDUAL_FLOOR;
                let richardson = ratio >= RICHARDSON_BAND.0 && ratio <= RICHARDSON_BAND.1;
                PointResidual {
                    x: x.clone(),
                    step,
                    residual: r1,
                    residual_half: r2,
                    raw,
                    ratio,
                    passed: floor || richardson,
                }
            }
            _ => PointResidual {
                x: x.clone(),
                step,
                residual: f64::NAN,
                residual_half: f64::NAN,
                raw: f64::NAN,
                ratio: f64::NAN,
                passed: false,
            },
        };
        points.push(pr);
    }
    let constant = points
        .iter()
        .filter(|r| r.passed && r.ratio >= RICHARDSON_BAND.0 && r.ratio <= RICHARDSON_BAND.1)
        .map(|r| r.residual / (h * h))
        .fold(f64::NAN, f64::max);
    for r in points.iter_mut().filter(|r| !r.passed && r.residual.is_finite()) {
        r.passed = r.residual <= constant * h * h && r.residual_half <= constant * 0.25 * h * h;
    }
    let fold = |f: fn(&PointResidual) -> f64, init: f64, pick: fn(f64, f64) -> f64| {
        points.iter().map(f).filter(|v| v.is_finite()).fold(init, pick)
    };
    HarmonicityReport {
        label: u.label.clone(),
        max_residual: fold(|r| r.residual_half, 0.0, f64::max),
        max_raw_residual: fold(|r| r.raw, 0.0, f64::max),
        min_ratio: fold(|r| r.ratio, f64::INFINITY, f64::min),
        max_ratio: fold(|r| r.ratio, 0.0, f64::max),
        passed: !points.is_empty() && points.iter().all(|r| r.passed),
        points,
    }
}

/// `n` points of `u`'s region drawn uniformly from the cube `[-radius, radius]^d`,
/// keeping only those whose length scale exceeds `min_scale`.
pub fn sample_region(u: &ScalarField, d: usize, n: usize, seed: u64, radius: f64, min_scale: f64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    let mut tries = 0usize;
    while out.len() < n && tries < 1000 * n.max(1) {
        tries += 1;
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-radius..radius)).collect();
        if u.contains(&x) && u.length_scale(&x) > min_scale {
            out.push(Point(x));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(d: usize, k: f64) -> Params {
        Params::new(d, k).unwrap()
    }

    #[test]
    fn laplacian_of_norm_squared() {
        for (d, k) in [(2, 1.0), (3, 0.5), (5, 1.7)] {
            let p = p(d, k);
            let u = ScalarField::new("|x|^2", |x| Ok(norm_sq(x))).even();
            let mut x = vec![0.1; d];
            x[0] = 0.4;
            let v = dunkl_laplacian(&u, &p, &x, 1e-3).unwrap();
            let expected = 2.0 * d as f64 + 4.0 * k;
            assert!((v - expected).abs() < 1e-6, "{v} vs {expected}");
            // on the wall the even branch applies
            x[0] = 0.0;
            let v = dunkl_laplacian(&u, &p, &x, 1e-3).unwrap();
            assert!((v - expected).abs() < 1e-6);
        }
    }

    #[test]
    fn odd_field_near_wall_is_rejected() {
        let p = p(2, 1.0);
        let u = ScalarField::new("x_1 x_2", |x| Ok(x[0] * x[1]));
        assert!(matches!(dunkl_laplacian(&u, &p, &[1e-4, 0.3], 1e-4), Err(Error::TooCloseToWall { .. })));
    }

    #[test]
    fn stencil_outside_region_is_reported() {
        let p = p(2, 1.0);
        let u = ScalarField::new("disk", |_| Ok(1.0)).even().with_region(|x| norm(x) < 0.5);
        assert!(matches!(dunkl_laplacian(&u, &p, &[0.3, 0.4], 1e-3), Err(Error::StencilOutsideRegion { .. })));
    }

    #[test]
    fn polynomial_harmonics_vanish() {
        let p = p(3, 1.7);
        for u in harmonic_catalog(&p).iter().take(4) {
            let v = dunkl_laplacian(u, &p, &[0.35, -0.2, 0.1], 1e-3).unwrap();
            assert!(v.abs() < 1e-7, "{}: {v}", u.label());
        }
    }

    #[test]
    fn catalog_has_seven_entries() {
        for (d, k) in [(1, 0.75), (2, 1.0), (4, 0.25)] {
            assert_eq!(harmonic_catalog(&p(d, k)).len(), 7);
        }
    }

    #[test]
    fn catalog_regions_keep_margin() {
        let p = p(2, 1.0);
        let cat = harmonic_catalog(&p);
        let y0 = catalog_source(2);
        assert!(!cat[4].contains(&y0));
        assert!(!cat[4].contains(&reflect(&y0)));
        assert!(!cat[6].contains(&[0.3, 0.24]));
        assert!(cat[6].contains(&[0.3, 0.26]));
    }

    #[test]
    fn kelvin_is_an_involution() {
        let p = p(3, 0.5);
        let u = ScalarField::new("poly", |x| Ok(x[0] * x[1] + x[2] * x[2] + 1.0));
        let kk = kelvin(&kelvin(&u, &p), &p);
        let x = [0.4, -0.7, 1.3];
        let (a, b) = (u.eval(&x).unwrap(), kk.eval(&x).unwrap());
        assert!((a - b).abs() < 1e-12 * a.abs());
    }

    #[test]
    fn kelvin_of_constant_is_harmonic() {
        let p = p(2, 1.7);
        let u = kelvin(&ScalarField::new("1", |_| Ok(1.0)).even(), &p);
        let sample = vec![Point(vec![0.5, 0.3]), Point(vec![-0.2, 0.9]), Point(vec![0.0, 0.6])];
        let report = verify_harmonicity(&u, &p, &sample, 0.05);
        assert!(report.passed, "{report:?}");
    }

    #[test]
    fn cancelling_truncation_is_bounded_by_sample_constant() {
        // At the first point the h^2 and h^4 truncation terms nearly cancel
        // at the working step, so its residual does not decay in band.
        let p = p(5, 0.5);
        let g = harmonic_catalog(&p).into_iter().find(|u| u.label().starts_with("G_k")).unwrap();
        let u = kelvin(&g, &p);
        let sample = vec![
            Point(vec![1.818, 0.1228, -0.0895, 0.2626, 1.196]),
            Point(vec![1.2, 0.5, -0.4, 0.3, 0.2]),
            Point(vec![-0.9, 1.1, 0.6, -0.5, 0.7]),
        ];
        let report = verify_harmonicity(&u, &p, &sample, 0.02);
        let first = &report.points[0];
        assert!(first.ratio < RICHARDSON_BAND.0 && first.residual_half > RESIDUAL_FLOOR);
        assert!(report.passed, "{report:?}");
    }

    #[test]
    fn non_harmonic_field_fails() {
        let p = p(2, 1.0);
        let u = ScalarField::new("|x|^2", |x| Ok(norm_sq(x))).even();
        let report = verify_harmonicity(&u, &p, &[Point(vec![0.3, 0.4])], 0.05);
        assert!(!report.passed);
        assert!((report.max_raw_residual - 8.0).abs() < 1e-6);
    }

    #[test]
    fn reflection_equivariance() {
        let p = p(2, 1.0);
        let u = ScalarField::new("cubic", |x| Ok(x[0] * x[0] * x[0] + x[0] * x[1] + 2.0 * x[1]));
        let x = [0.4, 0.25];
        let lhs = dunkl_laplacian(&u.reflected(), &p, &x, 1e-3).unwrap();
        let rhs = dunkl_laplacian(&u, &p, &reflect(&x), 1e-3).unwrap();
        assert!((lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0));
    }
}
