//! Newton kernel, Green function of the unit ball and Poisson kernel.
//!
//! In rank one each kernel is a single integral against the Jacobi weight
//! `(1-t)^{k-1}(1+t)^k`. The quadratic form inside the integrals is
//!
//! ```text
//! A_t = |x|^2 + |y|^2 - 2(t x_1 y_1 + x_2 y_2 + ... + x_d y_d)
//!     = |x - y|^2  + 2 x_1 y_1 (1 - t)     (x_1 y_1 >= 0)
//!     = |x - σy|^2 - 2 x_1 y_1 (1 + t)     (x_1 y_1 <  0)
//! ```
//!
//! and the branch is chosen so that both summands are nonnegative.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{dist, dist_reflected, norm, on_orbit, reflect, ExtendedValue, Params};
use crate::quadrature::{JacobiNode, DEFAULT_TOL};
use crate::special::{ln1p_over, power_difference};

/// Tolerance used when a kernel value enters a difference that cancels
/// (Kelvin path, finite differences).
pub const TIGHT_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KernelKind {
    Newton,
    Green,
    Poisson,
    NewtonW,
    GreenW,
    PoissonW,
    NewtonDyson,
    GreenDyson,
    PoissonDyson,
}

impl KernelKind {
    pub const ALL: [KernelKind; 9] = [
        Self::Newton,
        Self::Green,
        Self::Poisson,
        Self::NewtonW,
        Self::GreenW,
        Self::PoissonW,
        Self::NewtonDyson,
        Self::GreenDyson,
        Self::PoissonDyson,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Newton => "newton",
            Self::Green => "green",
            Self::Poisson => "poisson",
            Self::NewtonW => "newton-w",
            Self::GreenW => "green-w",
            Self::PoissonW => "poisson-w",
            Self::NewtonDyson => "newton-dyson",
            Self::GreenDyson => "green-dyson",
            Self::PoissonDyson => "poisson-dyson",
        }
    }

    /// The underlying kernel of a W-invariant or Dyson kind.
    pub fn base(self) -> Self {
        match self {
            Self::Newton | Self::NewtonW | Self::NewtonDyson => Self::Newton,
            Self::Green | Self::GreenW | Self::GreenDyson => Self::Green,
            Self::Poisson | Self::PoissonW | Self::PoissonDyson => Self::Poisson,
        }
    }

    pub fn is_dyson(self) -> bool {
        matches!(self, Self::NewtonDyson | Self::GreenDyson | Self::PoissonDyson)
    }

    pub fn is_w_invariant(self) -> bool {
        matches!(self, Self::NewtonW | Self::GreenW | Self::PoissonW)
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        Self::ALL
            .into_iter()
            .find(|kind| kind.name() == key)
            .ok_or_else(|| Error::InvalidParams(format!("unknown kernel kind '{s}'")))
    }
}

/// `A_t = a0 + e (1 - t)` or `a0 + e (1 + t)` with `a0, e >= 0`.
#[derive(Debug, Clone, Copy)]
struct Bracket {
    a0: f64,
    e: f64,
    toward_plus: bool,
}

impl Bracket {
    fn new(x: &[f64], y: &[f64]) -> Self {
        let eta = x[0] * y[0];
        if eta >= 0.0 {
            let d = dist(x, y);
            Bracket { a0: d * d, e: 2.0 * eta, toward_plus: true }
        } else {
            let d = dist_reflected(x, y);
            Bracket { a0: d * d, e: -2.0 * eta, toward_plus: false }
        }
    }

    #[inline]
    fn at(&self, n: JacobiNode) -> f64 {
        self.a0 + self.e * if self.toward_plus { n.one_minus } else { n.one_plus }
    }
}

fn check_pair(p: &Params, x: &[f64], y: &[f64]) -> Result<()> {
    p.check_dim(x)?;
    p.check_dim(y)
}

/// `(1 - |x|^2)` computed as `(1 - |x|)(1 + |x|)`.
fn one_minus_sq(x: &[f64]) -> f64 {
    let r = norm(x);
    (1.0 - r) * (1.0 + r)
}

fn check_closed_ball(x: &[f64]) -> Result<()> {
    let r = norm(x);
    if r > 1.0 + 1e-12 {
        return Err(Error::OutsideBall { norm: r });
    }
    Ok(())
}

/// `N_k(x, y) = c_k C_k ∫ A_t^{1-k-d/2} (1-t)^{k-1}(1+t)^k dt`.
pub fn newton(p: &Params, x: &[f64], y: &[f64]) -> Result<ExtendedValue> {
    newton_with_tol(p, x, y, DEFAULT_TOL)
}

pub fn newton_with_tol(p: &Params, x: &[f64], y: &[f64], tol: f64) -> Result<ExtendedValue> {
    check_pair(p, x, y)?;
    if on_orbit(x, y) {
        return Ok(ExtendedValue::Infinite);
    }
    let b = Bracket::new(x, y);
    let q = p.newton_exponent();
    let v = p.integrator().integrate(|n| b.at(n).powf(-q), tol)?.value;
    Ok(ExtendedValue::Finite(p.newton_prefactor() * v))
}

/// Green function as `N_k(x, y) - |x|^{2-2k-d} N_k(x*, y)`.
///
/// At `x = 0` the Kelvin term is undefined and the value comes from
/// [`green_direct`].
pub fn green_kelvin(p: &Params, x: &[f64], y: &[f64]) -> Result<ExtendedValue> {
    green_kelvin_with_tol(p, x, y, TIGHT_TOL)
}

pub fn green_kelvin_with_tol(p: &Params, x: &[f64], y: &[f64], tol: f64) -> Result<ExtendedValue> {
    check_pair(p, x, y)?;
    check_closed_ball(x)?;
    check_closed_ball(y)?;
    if norm(x) <= crate::params::DEGENERACY_CUTOFF {
        return green_direct_with_tol(p, x, y, tol);
    }
    if on_orbit(x, y) {
        return Ok(ExtendedValue::Infinite);
    }
    let direct = newton_with_tol(p, x, y, tol)?.to_f64();
    let xs = crate::params::invert(x)?;
    let image = match newton_with_tol(p, &xs, y, tol)? {
        ExtendedValue::Finite(v) => v,
        ExtendedValue::Infinite => return Ok(ExtendedValue::Finite(0.0)),
    };
    let scale = norm(x).powf(p.kelvin_exponent());
    Ok(ExtendedValue::Finite((direct - scale * image).max(0.0)))
}

/// Green function as a single integral of `A_t^{-q} - B_t^{-q}` with
/// `B_t = A_t + (1 - |x|^2)(1 - |y|^2) = 1 + |x|^2|y|^2 - 2⟨x, z_t⟩`.
///
/// The difference of powers is evaluated as `A^{-q}(1 - (1 + D/A)^{-q})`
/// through `expm1`/`ln1p`, which keeps full relative accuracy as either
/// point approaches the sphere.
pub fn green_direct(p: &Params, x: &[f64], y: &[f64]) -> Result<ExtendedValue> {
    green_direct_with_tol(p, x, y, DEFAULT_TOL)
}

pub fn green_direct_with_tol(p: &Params, x: &[f64], y: &[f64], tol: f64) -> Result<ExtendedValue> {
    check_pair(p, x, y)?;
    check_closed_ball(x)?;
    check_closed_ball(y)?;
    if on_orbit(x, y) {
        return Ok(ExtendedValue::Infinite);
    }
    let dd = (one_minus_sq(x) * one_minus_sq(y)).max(0.0);
    if dd == 0.0 {
        return Ok(ExtendedValue::Finite(0.0));
    }
    let b = Bracket::new(x, y);
    let q = p.newton_exponent();
    let v = p.integrator().integrate(|n| power_difference(b.at(n), dd, q), tol)?.value;
    Ok(ExtendedValue::Finite(p.newton_prefactor() * v))
}

/// `P_k(x, y) = c_k (1 - |x|^2) ∫ A_t^{-k-d/2} (1-t)^{k-1}(1+t)^k dt` for
/// `|x| < 1`, `|y| = 1`.
pub fn poisson(p: &Params, x: &[f64], y: &[f64]) -> Result<f64> {
    poisson_with_tol(p, x, y, DEFAULT_TOL)
}

pub fn poisson_with_tol(p: &Params, x: &[f64], y: &[f64], tol: f64) -> Result<f64> {
    check_pair(p, x, y)?;
    let ry = norm(y);
    if (ry - 1.0).abs() > 1e-12 {
        return Err(Error::NotOnSphere { norm: ry });
    }
    let rx = norm(x);
    if rx >= 1.0 {
        return Err(Error::OutsideBall { norm: rx });
    }
    let b = Bracket::new(x, y);
    let e = p.k + p.d as f64 / 2.0;
    let v = p.integrator().integrate(|n| b.at(n).powf(-e), tol)?.value;
    Ok(p.c_k * one_minus_sq(x) * v)
}

/// Evaluates any kind by quadrature (Dyson kinds expect original
/// coordinates and `(d, k) = (2, 1)`).
pub fn evaluate(kind: KernelKind, p: &Params, x: &[f64], y: &[f64]) -> Result<ExtendedValue> {
    match kind {
        KernelKind::Newton => newton(p, x, y),
        KernelKind::Green => green_direct(p, x, y),
        KernelKind::Poisson => poisson(p, x, y).map(ExtendedValue::Finite),
        KernelKind::NewtonW | KernelKind::GreenW | KernelKind::PoissonW => w_invariant(kind, p, x, y),
        KernelKind::NewtonDyson | KernelKind::GreenDyson | KernelKind::PoissonDyson => {
            if p.d != 2 || p.k != 1.0 {
                return Err(Error::InvalidParams("Dyson kernels need d = 2, k = 1".into()));
            }
            dyson(kind, x, y)
        }
    }
}

/// `K^W(x, y) = K(x, y) + K(x, σy)` for the base kernel of `kind`.
pub fn w_invariant(kind: KernelKind, p: &Params, x: &[f64], y: &[f64]) -> Result<ExtendedValue> {
    if kind.is_dyson() {
        return Err(Error::InvalidParams(format!("{kind} is not a W-invariant kind")));
    }
    let sy = reflect(y);
    let eval = |y: &[f64]| match kind.base() {
        KernelKind::Newton => newton(p, x, y),
        KernelKind::Green => green_direct(p, x, y),
        _ => poisson(p, x, y).map(ExtendedValue::Finite),
    };
    Ok(match (eval(y)?, eval(&sy)?) {
        (ExtendedValue::Finite(a), ExtendedValue::Finite(b)) => ExtendedValue::Finite(a + b),
        _ => ExtendedValue::Infinite,
    })
}

/// A closed-form value and whether the near-wall series branch was taken.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedForm {
    pub value: ExtendedValue,
    pub wall_fallback: bool,
}

const SERIES_THRESHOLD: f64 = 1e-2;

/// `((1+z) ln(1+z) - z) / z^2`.
fn m_fn(z: f64) -> (f64, bool) {
    if z.abs() < SERIES_THRESHOLD {
        // Σ_{n>=2} (-1)^n z^{n-2} / (n(n-1))
        let mut sum = 0.0;
        let mut pw = 1.0;
        for n in 2..14 {
            let nf = n as f64;
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * pw / (nf * (nf - 1.0));
            pw *= z;
        }
        (sum, true)
    } else {
        (((1.0 + z) * z.ln_1p() - z) / (z * z), false)
    }
}

/// `(z - ln(1+z)) / z^2`.
fn q_fn(z: f64) -> (f64, bool) {
    if z.abs() < SERIES_THRESHOLD {
        // Σ_{n>=2} (-1)^n z^{n-2} / n
        let mut sum = 0.0;
        let mut pw = 1.0;
        for n in 2..14 {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * pw / n as f64;
            pw *= z;
        }
        (sum, true)
    } else {
        ((z - z.ln_1p()) / (z * z), false)
    }
}

/// The explicit kernels for `k = 1`, `d = 2`.
///
/// With `η = x_1 y_1`, `a_0 = |x - y|^2` and `z = 4η/a_0` (so that
/// `|x - σy|^2 = a_0 (1 + z)`) the displayed expressions become
///
/// ```text
/// N_1 = M(z) / (π a_0),                  M(z) = ((1+z) ln(1+z) - z) / z^2
/// P_1 = 2 (1 - |x|^2) Q(z) / a_0^2,      Q(z) = (z - ln(1+z)) / z^2
/// G_1 = N_1(x, y) - |x|^{-2} N_1(x*, y) = (M(z)/a_0 - M(4η/B_0)/B_0) / π
/// ```
///
/// with `B_0 = |x - y|^2 + (1 - |x|^2)(1 - |y|^2) = |x|^2 |x* - y|^2`. The
/// W-invariant forms are `N^W_1 = L(z)/(π a_0)`, `L(z) = ln(1+z)/z`,
/// `P^W_1 = 2(1 - |x|^2)/(|x-y|^2 |x-σy|^2)` and the corresponding Green
/// difference. `M`, `Q`, `L` are entire near `z = 0`; for `|z| < 10^{-2}`
/// (which includes the wall `x_1 y_1 = 0`) their Taylor series are used.
pub fn closed_form_k1d2(kind: KernelKind, x: &[f64], y: &[f64]) -> Result<ClosedForm> {
    if x.len() != 2 || y.len() != 2 {
        return Err(Error::InvalidParams("closed forms exist for d = 2 only".into()));
    }
    if kind.is_dyson() {
        return Err(Error::InvalidParams("use `dyson` for the Dyson kernels".into()));
    }
    if kind.base() == KernelKind::Poisson {
        let ry = norm(y);
        if (ry - 1.0).abs() > 1e-12 {
            return Err(Error::NotOnSphere { norm: ry });
        }
        if norm(x) >= 1.0 {
            return Err(Error::OutsideBall { norm: norm(x) });
        }
    }
    if kind.base() == KernelKind::Green {
        check_closed_ball(x)?;
        check_closed_ball(y)?;
    }
    if on_orbit(x, y) {
        return Ok(ClosedForm { value: ExtendedValue::Infinite, wall_fallback: false });
    }
    let eta = x[0] * y[0];
    let dxy = dist(x, y);
    let a0 = dxy * dxy;
    let z = 4.0 * eta / a0;
    let dd = (one_minus_sq(x) * one_minus_sq(y)).max(0.0);
    let b0 = a0 + dd;
    let zb = 4.0 * eta / b0;
    let l_fn = |z: f64| (ln1p_over(z), z.abs() < 1e-4);
    let (value, fallback) = match kind {
        KernelKind::Newton => {
            let (m, f) = m_fn(z);
            (m / (PI * a0), f)
        }
        KernelKind::Poisson => {
            let (q, f) = q_fn(z);
            (2.0 * one_minus_sq(x) * q / (a0 * a0), f)
        }
        KernelKind::Green => {
            if dd == 0.0 {
                (0.0, false)
            } else {
                let (m, f1) = m_fn(z);
                let (mb, f2) = m_fn(zb);
                ((m / a0 - mb / b0) / PI, f1 || f2)
            }
        }
        KernelKind::NewtonW => {
            let (l, f) = l_fn(z);
            (l / (PI * a0), f)
        }
        KernelKind::PoissonW => {
            let ds = dist_reflected(x, y);
            (2.0 * one_minus_sq(x) / (a0 * ds * ds), false)
        }
        KernelKind::GreenW => {
            if dd == 0.0 {
                (0.0, false)
            } else {
                let (l, f1) = l_fn(z);
                let (lb, f2) = l_fn(zb);
                ((l / a0 - lb / b0) / PI, f1 || f2)
            }
        }
        _ => unreachable!("Dyson kinds rejected above"),
    };
    Ok(ClosedForm { value: ExtendedValue::Finite(value.max(0.0)), wall_fallback: fallback })
}

/// Adapted coordinates `(x_1, x_2) = ((z_1 - z_2)/√2, (z_1 + z_2)/√2)` of a
/// point given in the standard basis of the `A_1` presentation.
pub fn from_a1_basis(z: &[f64]) -> [f64; 2] {
    [(z[0] - z[1]) / SQRT_2, (z[0] + z[1]) / SQRT_2]
}

/// Inverse of [`from_a1_basis`].
pub fn to_a1_basis(x: &[f64]) -> [f64; 2] {
    [(x[0] + x[1]) / SQRT_2, (x[1] - x[0]) / SQRT_2]
}

/// `π(z) = z_1 - z_2`.
pub fn chamber_distance(z: &[f64]) -> f64 {
    z[0] - z[1]
}

/// Dyson kernels for points `x, y` of the chamber `z_1 > z_2`, in the
/// standard coordinates of `R^2`:
///
/// ```text
/// N^Dys = (1/2π) (π(y)/π(x)) log(|x - σ_α y| / |x - y|)
/// P^Dys = 2 π(y)^2 (1 - |x|^2) / (|x - y|^2 |x - σ_α y|^2)
/// G^Dys = (1/2π) (π(y)/π(x)) log(|x* - y||x - σ_α y| / (|x - y||x* - σ_α y|))
/// ```
///
/// where `σ_α` swaps the coordinates. The logarithms are evaluated through
/// `ln1p` in the adapted basis.
pub fn dyson(kind: KernelKind, x: &[f64], y: &[f64]) -> Result<ExtendedValue> {
    if x.len() != 2 || y.len() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: if x.len() != 2 { x.len() } else { y.len() } });
    }
    if !(chamber_distance(x) > 0.0) || chamber_distance(y) < 0.0 {
        return Err(Error::NotInChamber);
    }
    if kind.base() == KernelKind::Poisson && chamber_distance(y) <= 0.0 {
        return Ok(ExtendedValue::Finite(0.0));
    }
    if chamber_distance(y) <= 0.0 {
        return Err(Error::NotInChamber);
    }
    let xa = from_a1_basis(x);
    let ya = from_a1_basis(y);
    let py = chamber_distance(y);
    let cf = |k: KernelKind| closed_form_k1d2(k, &xa, &ya).map(|c| c.value);
    let scaled = |v: ExtendedValue, s: f64| match v {
        ExtendedValue::Finite(v) => ExtendedValue::Finite(s * v),
        ExtendedValue::Infinite => ExtendedValue::Infinite,
    };
    match kind {
        KernelKind::NewtonDyson | KernelKind::Newton | KernelKind::NewtonW => {
            // y_1^2 N^W = (1/2π)(π(y)/π(x)) log(...), with y_1 = π(y)/√2
            Ok(scaled(cf(KernelKind::NewtonW)?, 0.5 * py * py))
        }
        KernelKind::GreenDyson | KernelKind::Green | KernelKind::GreenW => {
            Ok(scaled(cf(KernelKind::GreenW)?, 0.5 * py * py))
        }
        _ => Ok(scaled(cf(KernelKind::PoissonW)?, py * py)),
    }
}
