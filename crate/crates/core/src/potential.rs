//! Poisson integrals, the Poisson–Jensen formula, the Taylor remainders `F`
//! and `F_ε`, the formulas for `Δ_k |u|^p`, and Hardy–Stein identities.
//!
//! Sphere integrals run through the nested adaptive Gauss–Kronrod cubature
//! for `d <= 3`. For `d >= 4` they use a reduction to a low-dimensional
//! sphere when the integrand depends on few directions, and product rules of
//! increasing order otherwise.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{green_direct_with_tol, newton_with_tol, poisson_with_tol};
use crate::operator::{dunkl_laplacian, dunkl_laplacian_terms, ScalarField, RESIDUAL_FLOOR, RICHARDSON_BAND};
use crate::params::{norm, reflect, Params, Point};
use crate::quadrature::{
    ball_integrate_green_origin, gauss_legendre, radial_rule, sphere_integrate_adaptive, sphere_integrate_zonal,
    sphere_rule, DEFAULT_TOL,
};
use crate::special::binomial_tail;

/// Tolerance handed to kernel evaluations inside outer integrals.
const INNER_TOL: f64 = 1e-12;

/// Highest product-rule order tried for `d >= 4`.
const MAX_PRODUCT_ORDER: usize = 96;

/// Rough node budget for a single product rule.
const MAX_PRODUCT_NODES: usize = 2_000_000;

/// Order of the ball rules used by the Hardy–Stein integrals.
pub const BALL_ORDER: usize = 40;

/// Radial Gauss nodes on each side of `|x|` in [`green_potential`].
const RADIAL_NODES: usize = 12;

/// Relative tolerance of each shell integral in [`green_potential`].
const SHELL_TOL: f64 = 1e-7;

type BoundaryEval = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A function on the unit sphere, optionally with its known `Δ_k`-harmonic
/// extension to the ball.
#[derive(Clone)]
pub struct BoundaryFunction {
    label: String,
    eval: BoundaryEval,
    extension: Option<ScalarField>,
    span: Option<Vec<Point>>,
}

impl fmt::Debug for BoundaryFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundaryFunction").field("label", &self.label).finish()
    }
}

impl BoundaryFunction {
    pub fn new<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self { label: label.into(), eval: Arc::new(f), extension: None, span: None }
    }

    /// The restriction to `S` of a field that is `Δ_k`-harmonic on a
    /// neighborhood of the closed ball; the field itself is kept as the
    /// Poisson extension.
    pub fn from_harmonic(u: ScalarField) -> Self {
        let inner = u.clone();
        Self {
            label: u.label().to_string(),
            eval: Arc::new(move |z| inner.eval(z).unwrap_or(f64::NAN)),
            extension: Some(u),
            span: None,
        }
    }

    /// Declares that the function depends on `z` only through `z_1` and
    /// `⟨v, z⟩` for `v` in `dirs`. Enables the reduced sphere cubature in
    /// high dimension.
    pub fn depending_on(mut self, dirs: &[&[f64]]) -> Self {
        self.span = Some(dirs.iter().map(|v| Point(v.to_vec())).collect());
        self
    }

    pub fn span(&self) -> Option<&[Point]> {
        self.span.as_deref()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, z: &[f64]) -> f64 {
        (self.eval)(z)
    }

    pub fn extension(&self) -> Option<&ScalarField> {
        self.extension.as_ref()
    }
}

/// `(1/d_k) ∫_S f ω_k dσ`. `focus` lists points of the sphere near which
/// `f` may peak.
pub fn sphere_average<F>(f: F, p: &Params, focus: &[&[f64]], tol: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    sphere_average_spanned(f, p, None, focus, tol)
}

/// Orthonormal basis of the projections of `dirs` onto `e_1^⊥`.
fn transverse_basis(dirs: &[&[f64]]) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in dirs {
        let mut w = v.to_vec();
        w[0] = 0.0;
        for b in &basis {
            let c: f64 = b.iter().zip(&w).map(|(x, y)| x * y).sum();
            w.iter_mut().zip(b).for_each(|(wi, bi)| *wi -= c * bi);
        }
        let n = norm(&w);
        if n > 1e-10 * norm(v).max(1.0) {
            basis.push(w.into_iter().map(|x| x / n).collect());
        }
    }
    basis
}

/// [`sphere_average`] for `f` depending on `z` only through `z_1` and the
/// projections onto `span`, when `span` is given.
fn sphere_average_spanned<F>(f: F, p: &Params, span: Option<&[&[f64]]>, focus: &[&[f64]], tol: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let total = match (p.d, span) {
        (1, _) => f(&[-1.0]) + f(&[1.0]),
        (2 | 3, _) => sphere_integrate_adaptive(&f, p.d, p.k, focus, tol)?,
        (_, Some(dirs)) if transverse_basis(dirs).len() + 3 <= p.d => {
            sphere_integrate_zonal(&f, p.d, p.k, &transverse_basis(dirs), focus, tol)?
        }
        _ => {
            let mut n = 24;
            let mut prev = sphere_rule(p, n)?.integrate(&f)?;
            loop {
                n *= 2;
                if n > MAX_PRODUCT_ORDER || (2 * n).pow(p.d as u32 - 1) > MAX_PRODUCT_NODES {
                    return Err(Error::ToleranceNotReached { estimate: prev / p.d_k, error_bound: f64::INFINITY });
                }
                let next = sphere_rule(p, n)?.integrate(&f)?;
                let err = (next - prev).abs();
                if err <= tol * next.abs().max(p.d_k * f64::EPSILON) {
                    break next;
                }
                prev = next;
            }
        }
    };
    if !total.is_finite() {
        return Err(Error::NonFinite { at: "sphere integrand".into() });
    }
    Ok(total / p.d_k)
}

fn direction(x: &[f64]) -> Option<Point> {
    let r = norm(x);
    (r > 1e-12).then(|| Point(x.iter().map(|v| v / r).collect()))
}

fn check_interior(x: &[f64]) -> Result<f64> {
    let r = norm(x);
    if r >= 1.0 {
        return Err(Error::OutsideBall { norm: r });
    }
    Ok(r)
}

/// `P_k[f](x) = (1/d_k) ∫_S P_k(x, z) f(z) ω_k(z) dσ(z)`.
pub fn poisson_integral(f: &BoundaryFunction, p: &Params, x: &[f64]) -> Result<f64> {
    poisson_integral_focused(f, p, x, &[], DEFAULT_TOL)
}

/// [`poisson_integral`] with additional focus points where `f` peaks.
pub fn poisson_integral_focused(
    f: &BoundaryFunction,
    p: &Params,
    x: &[f64],
    extra_focus: &[&[f64]],
    tol: f64,
) -> Result<f64> {
    p.check_dim(x)?;
    check_interior(x)?;
    let dirs: Vec<Point> = direction(x).into_iter().flat_map(|e| [reflect(&e), e]).collect();
    let mut focus: Vec<&[f64]> = dirs.iter().map(|e| &e[..]).collect();
    focus.extend_from_slice(extra_focus);
    let span: Option<Vec<&[f64]>> = f.span().map(|s| std::iter::once(x).chain(s.iter().map(|v| &v[..])).collect());
    let failure = std::sync::Mutex::new(None);
    let v = sphere_average_spanned(
        |z| match poisson_with_tol(p, x, z, INNER_TOL) {
            Ok(k) => k * f.eval(z),
            Err(e) => {
                *failure.lock().expect("poisoned") = Some(e);
                f64::NAN
            }
        },
        p,
        span.as_deref(),
        &focus,
        tol,
    );
    if let Some(e) = failure.into_inner().expect("poisoned") {
        return Err(e);
    }
    v
}

/// Richardson extrapolation of `values[j] ≈ L + Σ c_m ε_j^m` with
/// `ε_{j+1} = ε_j / 2`. Returns the estimate and the size of the last
/// correction.
pub fn richardson_halving(values: &[f64]) -> (f64, f64) {
    let mut row = values.to_vec();
    let mut correction = f64::INFINITY;
    let mut factor = 2.0;
    while row.len() > 1 {
        let next: Vec<f64> = row.windows(2).map(|w| w[1] + (w[1] - w[0]) / (factor - 1.0)).collect();
        correction = (next[next.len() - 1] - row[row.len() - 1]).abs();
        row = next;
        factor *= 2.0;
    }
    (row[0], correction)
}

/// Where `y` sits relative to the sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SourcePosition {
    Interior,
    Boundary,
    Exterior,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NewtonCheck {
    pub position: SourcePosition,
    /// `P_k[N_k(·, y)](x)`, or its dilation limit when `|y| = 1`.
    pub poisson_value: f64,
    /// `N_k(x, y) - G_k(x, y)` for interior `y`, `N_k(x, y)` otherwise.
    pub expected: f64,
    /// `(r, residual)` along the dilation ladder `r = 1 - 2^{-j}`.
    pub ladder: Vec<(f64, f64)>,
    pub residual: f64,
}

/// Rungs of the dilation ladder.
pub const LADDER_RUNGS: usize = 10;

/// Relative tolerance of the Poisson integrals along the ladder.
const LADDER_TOL: f64 = 1e-9;

/// Distance from the sphere below which `y` counts as a boundary point.
const SPHERE_SLACK: f64 = 1e-12;

fn newton_poisson(p: &Params, x: &[f64], y: &[f64], tol: f64) -> Result<f64> {
    let qy = direction(y);
    let qsy = qy.as_ref().map(|q| reflect(q));
    let mut focus: Vec<&[f64]> = Vec::new();
    if let (Some(a), Some(b)) = (&qy, &qsy) {
        focus.push(a);
        focus.push(b);
    }
    let yv = y.to_vec();
    let pc = p.clone();
    let f = BoundaryFunction::new("N_k(·, y)", move |z| {
        newton_with_tol(&pc, z, &yv, INNER_TOL).map(|v| v.to_f64()).unwrap_or(f64::NAN)
    })
    .depending_on(&[y]);
    poisson_integral_focused(&f, p, x, &focus, tol)
}

fn newton_minus_green(p: &Params, x: &[f64], y: &[f64]) -> Result<f64> {
    let n = newton_with_tol(p, x, y, INNER_TOL)?.to_f64();
    let g = green_direct_with_tol(p, x, y, INNER_TOL)?.to_f64();
    Ok(n - g)
}

/// Compares `P_k[N_k(·, y)](x)` with `N_k(x, y) - G_k(x, y)` (interior `y`)
/// or `N_k(x, y)` (exterior `y`). For `|y| = 1` the boundary data is singular
/// at `y`; the check runs the interior identity along `r y`,
/// `r = 1 - 2^{-j}`, and extrapolates the Poisson integrals to `r = 1`.
pub fn poisson_newton_check(p: &Params, x: &[f64], y: &[f64]) -> Result<NewtonCheck> {
    p.check_dim(x)?;
    p.check_dim(y)?;
    check_interior(x)?;
    let ry = norm(y);
    if ry < 1.0 - SPHERE_SLACK {
        let v = newton_poisson(p, x, y, DEFAULT_TOL)?;
        let e = newton_minus_green(p, x, y)?;
        return Ok(NewtonCheck {
            position: SourcePosition::Interior,
            poisson_value: v,
            expected: e,
            ladder: Vec::new(),
            residual: (v - e).abs(),
        });
    }
    if ry > 1.0 + SPHERE_SLACK {
        let v = newton_poisson(p, x, y, DEFAULT_TOL)?;
        let e = newton_with_tol(p, x, y, INNER_TOL)?.to_f64();
        return Ok(NewtonCheck {
            position: SourcePosition::Exterior,
            poisson_value: v,
            expected: e,
            ladder: Vec::new(),
            residual: (v - e).abs(),
        });
    }
    let mut ladder = Vec::with_capacity(LADDER_RUNGS);
    let mut values = Vec::with_capacity(LADDER_RUNGS);
    let mut residual: f64 = 0.0;
    for j in 1..=LADDER_RUNGS {
        let r = 1.0 - (0.5f64).powi(j as i32);
        let yr: Vec<f64> = y.iter().map(|v| r * v).collect();
        let v = newton_poisson(p, x, &yr, LADDER_TOL)?;
        let res = (v - newton_minus_green(p, x, &yr)?).abs();
        residual = residual.max(res);
        ladder.push((r, res));
        values.push(v);
    }
    let (limit, _) = richardson_halving(&values[LADDER_RUNGS - 4..]);
    let expected = newton_with_tol(p, x, y, INNER_TOL)?.to_f64();
    residual = residual.max((limit - expected).abs());
    Ok(NewtonCheck { position: SourcePosition::Boundary, poisson_value: limit, expected, ladder, residual })
}

/// `∫_B G_k(x, y) g(y) ω_k(y) dy`.
///
/// At `x = 0` the closed form `G_k(0, y) = C_k(|y|^{2-2k-d} - 1)` is
/// integrated with [`ball_integrate_green_origin`]. Otherwise the integral is
/// taken in spherical shells: Gauss rules in `r` on `(0, |x|)` and
/// `(|x|, 1)`, where the shell integrals are smooth, and adaptive sphere
/// cubature on each shell. Supports `d <= 3`.
pub fn green_potential<G>(p: &Params, x: &[f64], g: G) -> Result<f64>
where
    G: Fn(&[f64]) -> f64 + Sync,
{
    p.check_dim(x)?;
    let rx = check_interior(x)?;
    if p.d > 3 {
        return Err(Error::InvalidParams(format!("Green potentials are supported for d <= 3, got d = {}", p.d)));
    }
    if rx < 1e-12 {
        return Ok(p.newton_const * ball_integrate_green_origin(&g, p, BALL_ORDER)?);
    }
    let beta = p.d as f64 - 1.0 + 2.0 * p.k;
    let (xh, sxh) = {
        let e = direction(x).expect("nonzero");
        (e.clone(), reflect(&e))
    };
    let failure = std::sync::Mutex::new(None);
    let shell = |r: f64| -> Result<f64> {
        sphere_average(
            |th| {
                let y: Vec<f64> = th.iter().map(|v| r * v).collect();
                let gy = g(&y);
                if gy == 0.0 {
                    return 0.0;
                }
                match green_direct_with_tol(p, x, &y, INNER_TOL) {
                    Ok(v) => v.to_f64() * gy,
                    Err(e) => {
                        *failure.lock().expect("poisoned") = Some(e);
                        f64::NAN
                    }
                }
            },
            p,
            &[&xh, &sxh],
            SHELL_TOL,
        )
        .map(|v| v * p.d_k)
    };
    let (ri, wi) = radial_rule(beta, RADIAL_NODES)?;
    let mut inner = 0.0;
    for (s, w) in ri.iter().zip(&wi) {
        inner += w * shell(rx * s)?;
    }
    inner *= rx.powf(beta + 1.0);
    let (t, wt) = gauss_legendre(RADIAL_NODES)?;
    let half = 0.5 * (1.0 - rx);
    let mut outer = 0.0;
    for (ti, w) in t.iter().zip(&wt) {
        let r = rx + half * (1.0 + ti);
        outer += w * r.powf(beta) * shell(r)?;
    }
    outer *= half;
    if let Some(e) = failure.into_inner().expect("poisoned") {
        return Err(e);
    }
    Ok(inner + outer)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoissonJensenCheck {
    pub value: f64,
    pub boundary_term: f64,
    pub green_term: f64,
    pub residual: f64,
}

/// `|u(x) - P_k[u|_S](x) + ∫_B G_k(x, y) Δ_k u(y) ω_k(y) dy|` for a field
/// carrying a closed-form `Δ_k u`.
pub fn poisson_jensen_check(u: &ScalarField, p: &Params, x: &[f64]) -> Result<PoissonJensenCheck> {
    if u.analytic_laplacian(x).is_none() {
        return Err(Error::InvalidParams(format!("{} has no closed-form Laplacian", u.label())));
    }
    let value = u.eval(x)?;
    let boundary = BoundaryFunction::new(u.label(), {
        let u = u.clone();
        move |z| u.eval(z).unwrap_or(f64::NAN)
    });
    let boundary_term = poisson_integral(&boundary, p, x)?;
    let green_term = green_potential(p, x, |y| match u.analytic_laplacian(y) {
        Some(Ok(v)) => v,
        _ => f64::NAN,
    })?;
    Ok(PoissonJensenCheck { value, boundary_term, green_term, residual: (value - boundary_term + green_term).abs() })
}

/// Exponent `p > 1` and regularization `ε >= 0` of the Taylor remainders.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Remainder {
    pub p: f64,
    pub eps: Option<f64>,
}

impl Remainder {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::InvalidParams(format!("remainder exponent must exceed 1, got {p}")));
        }
        Ok(Self { p, eps: None })
    }

    pub fn with_eps(self, eps: f64) -> Result<Self> {
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(Error::InvalidParams(format!("ε must be nonnegative, got {eps}")));
        }
        Ok(Self { eps: Some(eps), ..self })
    }

    fn eps_or_zero(&self) -> f64 {
        self.eps.unwrap_or(0.0)
    }
}

/// `φ(b) - φ(a) - φ'(a)(b - a)` for `φ(s) = (s^2 + ε^2)^{p/2}`.
///
/// With `A = a^2 + ε^2` and `v = (b^2 - a^2)/A` this equals
/// `A^{p/2} [((1+v)^{p/2} - 1 - (p/2) v) + (p/2)(b-a)^2/A]`, evaluated without
/// cancellation as `b → a`.
fn taylor_remainder(p: f64, eps: f64, a: f64, b: f64) -> f64 {
    let big_a = a * a + eps * eps;
    if big_a == 0.0 {
        return (b * b).powf(0.5 * p);
    }
    let diff = b - a;
    let v = diff * (b + a) / big_a;
    let half = 0.5 * p;
    let out = big_a.powf(half) * (binomial_tail(half, v) + half * diff * diff / big_a);
    out.max(0.0)
}

/// `F(a, b) = |b|^p - |a|^p - p a |a|^{p-2} (b - a)`.
pub fn remainder_f(r: &Remainder, a: f64, b: f64) -> f64 {
    taylor_remainder(r.p, 0.0, a, b)
}

/// `F_ε(a, b) = (b^2+ε^2)^{p/2} - (a^2+ε^2)^{p/2} - p a (a^2+ε^2)^{(p-2)/2} (b - a)`.
pub fn remainder_f_eps(r: &Remainder, a: f64, b: f64) -> f64 {
    taylor_remainder(r.p, r.eps_or_zero(), a, b)
}

/// `F(a, b) / ((b - a)^2 (|a| ∨ |b|)^{p-2})`, undefined for `a = b`.
pub fn remainder_ratio(r: &Remainder, a: f64, b: f64) -> Option<f64> {
    if a == b {
        return None;
    }
    let m = a.abs().max(b.abs());
    Some(remainder_f(r, a, b) / ((b - a) * (b - a) * m.powf(r.p - 2.0)))
}

fn central_gradient(u: &ScalarField, x: &[f64], h: f64) -> Result<Vec<f64>> {
    let mut xp = x.to_vec();
    let mut g = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        xp[i] = x[i] + h;
        let up = u.eval(&xp)?;
        xp[i] = x[i] - h;
        let um = u.eval(&xp)?;
        xp[i] = x[i];
        g.push((up - um) / (2.0 * h));
    }
    Ok(g)
}

/// `|u|^p`, or `(u^2 + ε^2)^{p/2}` when the remainder carries `ε`.
pub fn power_field(u: &ScalarField, r: &Remainder) -> ScalarField {
    let (uu, rr) = (u.clone(), *r);
    let v = ScalarField::new(format!("|{}|^{}", u.label(), r.p), move |x| {
        let s = uu.eval(x)?;
        Ok((s * s + rr.eps_or_zero().powi(2)).powf(0.5 * rr.p))
    });
    let (u1, u2) = (u.clone(), u.clone());
    let v = v.with_region(move |x| u1.contains(x)).with_length_scale(move |x| u2.length_scale(x));
    if u.is_even() {
        v.even()
    } else {
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PthPowerCheck {
    pub step: f64,
    pub residual: f64,
    pub residual_half: f64,
    pub ratio: f64,
    pub passed: bool,
}

/// Right-hand side of the `Δ_k |u|^p` formula at `x` with step `h`.
fn pth_power_rhs(u: &ScalarField, r: &Remainder, p: &Params, x: &[f64], h: f64) -> Result<(f64, f64)> {
    let a = u.eval(x)?;
    let b = u.eval(&reflect(x))?;
    let grad = central_gradient(u, x, h)?;
    let g2: f64 = grad.iter().map(|v| v * v).sum();
    let lap = match u.analytic_laplacian(x) {
        Some(v) => v?,
        None => dunkl_laplacian(u, p, x, h)?,
    };
    let pe = r.p;
    let eps = r.eps_or_zero();
    let big_a = a * a + eps * eps;
    let (grad_term, lap_term) = if r.eps.is_some() {
        (
            pe * big_a.powf(0.5 * pe - 2.0) * ((pe - 1.0) * a * a + eps * eps) * g2,
            pe * a * big_a.powf(0.5 * pe - 1.0) * lap,
        )
    } else {
        (pe * (pe - 1.0) * a.abs().powf(pe - 2.0) * g2, pe * a * a.abs().powf(pe - 2.0) * lap)
    };
    let refl = p.k * remainder_f_eps(r, a, b) / (x[0] * x[0]);
    let value = grad_term + refl + lap_term;
    Ok((value, grad_term.abs() + refl.abs() + lap_term.abs()))
}

/// Compares the finite-difference `Δ_k |u|^p(x)` (or its `ε` variant) with
/// the closed formula
///
/// ```text
/// p(p-1)|u|^{p-2}|∇u|^2 + k F(u(x), u(σx))/x_1^2 + p u |u|^{p-2} Δ_k u
/// ```
///
/// at steps `h` and `h/2`. The reflection term carries `k/x_1^2`, the
/// operative normalization of the rank-one operator.
pub fn pth_power_formula_check(u: &ScalarField, r: &Remainder, p: &Params, x: &[f64], h: f64) -> Result<PthPowerCheck> {
    let v = power_field(u, r);
    let one = |s: f64| -> Result<f64> {
        let terms = dunkl_laplacian_terms(&v, p, x, s)?;
        let (rhs, scale) = pth_power_rhs(u, r, p, x, s)?;
        let norm = terms.scale() + scale;
        Ok(if norm > 0.0 { (terms.value() - rhs).abs() / norm } else { 0.0 })
    };
    let r1 = one(h)?;
    let r2 = one(0.5 * h)?;
    let ratio = if r2 > 0.0 { r1 / r2 } else { f64::INFINITY };
    let passed = r1.max(r2) <= RESIDUAL_FLOOR || (ratio >= RICHARDSON_BAND.0 && ratio <= RICHARDSON_BAND.1);
    Ok(PthPowerCheck { step: h, residual: r1, residual_half: r2, ratio, passed })
}

/// `(1/d_k ∫_S |u(r θ)|^p ω_k(θ) dσ(θ))^{1/p}`.
pub fn hp_norm(u: &ScalarField, p_exp: f64, p: &Params, r: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::InvalidParams(format!("slice radius must lie in [0, 1), got {r}")));
    }
    if !(p_exp > 0.0) {
        return Err(Error::InvalidParams(format!("exponent must be positive, got {p_exp}")));
    }
    Ok(slice_moment(u, p_exp, p, r)?.powf(1.0 / p_exp))
}

fn slice_moment(u: &ScalarField, p_exp: f64, p: &Params, r: f64) -> Result<f64> {
    if r == 0.0 {
        return Ok(u.eval(&vec![0.0; p.d])?.abs().powf(p_exp));
    }
    sphere_average(
        |th| {
            let y: Vec<f64> = th.iter().map(|v| r * v).collect();
            u.eval(&y).map(|v| v.abs().powf(p_exp)).unwrap_or(f64::NAN)
        },
        p,
        &[],
        DEFAULT_TOL,
    )
}

/// Integrand of the Hardy–Stein identity: `Δ_k |u|^p` for harmonic `u`,
/// written as `p(p-1)|u|^{p-2}|∇u|^2 + k F(u(y), u(σy))/y_1^2`.
fn hardy_stein_density(u: &ScalarField, r: &Remainder, k: f64, y: &[f64], h: f64) -> Result<f64> {
    let a = u.eval(y)?;
    let grad = central_gradient(u, y, h)?;
    let g2: f64 = grad.iter().map(|v| v * v).sum();
    let pe = r.p;
    let grad_term = pe * (pe - 1.0) * a.abs().powf(pe - 2.0) * g2;
    let refl = if y[0].abs() < 1e-8 {
        // F(u, u∘σ)/y_1^2 → (p(p-1)/2)|u|^{p-2}(2∂_1 u)^2 on the wall
        2.0 * pe * (pe - 1.0) * a.abs().powf(pe - 2.0) * grad[0] * grad[0]
    } else {
        let b = u.eval(&reflect(y))?;
        remainder_f(r, a, b) / (y[0] * y[0])
    };
    Ok(grad_term + k * refl)
}

/// `|u(0)|^p + C_k ∫_{B(0,ρ)} (|y|^{2-2k-d} - ρ^{2-2k-d}) Δ_k|u|^p ω_k dy`.
pub fn hardy_stein_rhs(u: &ScalarField, p_exp: f64, p: &Params, radius: f64) -> Result<f64> {
    let r = Remainder::new(p_exp)?;
    let h = 1e-5;
    let u0 = u.eval(&vec![0.0; p.d])?.abs().powf(p_exp);
    let failure = std::sync::Mutex::new(None);
    let integral = ball_integrate_green_origin(
        |z| {
            let y: Vec<f64> = z.iter().map(|v| radius * v).collect();
            match hardy_stein_density(u, &r, p.k, &y, h) {
                Ok(v) => v,
                Err(e) => {
                    *failure.lock().expect("poisoned") = Some(e);
                    f64::NAN
                }
            }
        },
        p,
        BALL_ORDER,
    )?;
    if let Some(e) = failure.into_inner().expect("poisoned") {
        return Err(e);
    }
    Ok(u0 + p.newton_const * radius * radius * integral)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HardySteinReport {
    pub p_exp: f64,
    /// `lim_{r→1} (1/d_k) ∫_S |u(rθ)|^p ω_k dσ`, extrapolated.
    pub lhs: f64,
    /// `(1/d_k) ∫_S |f|^p ω_k dσ` straight from the boundary data.
    pub lhs_boundary: f64,
    pub rhs: f64,
    /// `(r, slice moment, right-hand side on B(0, r))` along the ladder.
    pub profile: Vec<(f64, f64, f64)>,
    /// `|lhs - rhs| / lhs`.
    pub residual: f64,
    /// `|lhs_boundary - rhs| / lhs_boundary`.
    pub residual_boundary: f64,
}

/// Both sides of the Hardy–Stein identity for `u = P_k[f]`.
///
/// The left side is the `r → 1` limit of the slice moments along
/// `r = 1 - 2^{-j}`, `j = 1..10`, Richardson-extrapolated; the right side
/// uses the ball rule with radial weight cancellation and central-difference
/// gradients. `f` must carry its harmonic extension.
pub fn hardy_stein_check(f: &BoundaryFunction, p_exp: f64, p: &Params) -> Result<HardySteinReport> {
    let u =
        f.extension().ok_or_else(|| Error::InvalidParams(format!("{} carries no harmonic extension", f.label())))?;
    Remainder::new(p_exp)?;
    let mut profile = Vec::with_capacity(LADDER_RUNGS);
    let mut moments = Vec::with_capacity(LADDER_RUNGS);
    for j in 1..=LADDER_RUNGS {
        let r = 1.0 - (0.5f64).powi(j as i32);
        let m = slice_moment(u, p_exp, p, r)?;
        profile.push((r, m, hardy_stein_rhs(u, p_exp, p, r)?));
        moments.push(m);
    }
    let (lhs, correction) = richardson_halving(&moments[LADDER_RUNGS - 4..]);
    if correction > 1e-6 * lhs.abs().max(1e-300) {
        return Err(Error::SlowConvergence { last_correction: correction });
    }
    let lhs_boundary = sphere_average(|z| f.eval(z).abs().powf(p_exp), p, &[], DEFAULT_TOL)?;
    let rhs = hardy_stein_rhs(u, p_exp, p, 1.0)?;
    Ok(HardySteinReport {
        p_exp,
        lhs,
        lhs_boundary,
        rhs,
        profile,
        residual: (lhs - rhs).abs() / lhs.abs(),
        residual_boundary: (lhs_boundary - rhs).abs() / lhs_boundary.abs(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GradientCheck {
    pub finite_difference: f64,
    pub poisson: f64,
    pub residual: f64,
}

/// Compares `P_k(x, y)` with `-d_k ⟨y, ∇_y G_k(x, y)⟩` at `y ∈ S`, the radial
/// derivative taken by the one-sided difference
/// `(G_k(x, y) - G_k(x, (1-h) y))/h` with `G_k(x, y) = 0`. The residual is
/// relative and `O(h)`.
pub fn green_poisson_gradient_check(p: &Params, x: &[f64], y: &[f64], h: f64) -> Result<GradientCheck> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::InvalidParams(format!("step must lie in (0, 1), got {h}")));
    }
    let pk = poisson_with_tol(p, x, y, INNER_TOL)?;
    let inside: Vec<f64> = y.iter().map(|v| (1.0 - h) * v).collect();
    let g = green_direct_with_tol(p, x, &inside, INNER_TOL)?.to_f64();
    let fd = p.d_k * g / h;
    Ok(GradientCheck { finite_difference: fd, poisson: pk, residual: (fd - pk).abs() / pk })
}
