//! Parameters `(d, k)`, normalization constants and the geometry of the
//! reflection `σ(x_1, x_2, ..., x_d) = (-x_1, x_2, ..., x_d)`.
//!
//! Points are always expressed in the adapted orthonormal basis in which the
//! reflection flips the first coordinate. The weight is `ω_k(x) = |x_1|^{2k}`.

use std::f64::consts::PI;
use std::fmt;
use std::ops::Deref;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::quadrature::JacobiIntegrator;

/// Relative cutoff below which a point is treated as lying on `W.y`.
pub const DEGENERACY_CUTOFF: f64 = 1e-12;

/// Rank-one parameters together with every derived constant.
///
/// `gamma` equals `k` (a single positive root). `c_k` normalizes the Jacobi
/// weight `(1-t)^{k-1}(1+t)^k` to a probability density, `d_k` is the weighted
/// sphere area `∫_S ω_k dσ`, and `newton_const` is `C_k = 1/(d_k (d+2k-2))`.
#[derive(Clone)]
pub struct Params {
    pub d: usize,
    pub k: f64,
    pub gamma: f64,
    pub c_k: f64,
    pub d_k: f64,
    pub newton_const: f64,
    integrator: Arc<JacobiIntegrator>,
}

impl fmt::Debug for Params {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Params")
            .field("d", &self.d)
            .field("k", &self.k)
            .field("c_k", &self.c_k)
            .field("d_k", &self.d_k)
            .field("newton_const", &self.newton_const)
            .finish()
    }
}

impl PartialEq for Params {
    fn eq(&self, other: &Self) -> bool {
        self.d == other.d && self.k == other.k
    }
}

impl Params {
    /// Validates `(d, k)` and populates all constants.
    pub fn new(d: usize, k: f64) -> Result<Self> {
        if d < 1 {
            return Err(Error::InvalidParams("dimension d must be at least 1".into()));
        }
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::InvalidParams(format!("multiplicity k must be positive, got {k}")));
        }
        if d as f64 + 2.0 * k <= 2.0 {
            return Err(Error::InvalidParams(format!("d + 2k must exceed 2 (d = {d}, k = {k})")));
        }
        if d == 1 && k <= 0.5 {
            return Err(Error::InvalidParams(format!("d = 1 requires k > 1/2, got {k}")));
        }
        let c_k = intertwiner_constant(k);
        let d_k = weighted_sphere_area(d, k);
        let newton_const = 1.0 / (d_k * (d as f64 + 2.0 * k - 2.0));
        Ok(Self { d, k, gamma: k, c_k, d_k, newton_const, integrator: Arc::new(JacobiIntegrator::new(k)?) })
    }

    /// `c_k C_k`, the prefactor of the one-dimensional Newton integral.
    pub fn newton_prefactor(&self) -> f64 {
        self.c_k * self.newton_const
    }

    /// Exponent `q = k + d/2 - 1` of the Newton integrand.
    pub fn newton_exponent(&self) -> f64 {
        self.k + self.d as f64 / 2.0 - 1.0
    }

    /// Exponent `2 - 2k - d` of the radial fundamental solution and of the
    /// Kelvin transform.
    pub fn kelvin_exponent(&self) -> f64 {
        2.0 - 2.0 * self.k - self.d as f64
    }

    pub fn integrator(&self) -> &JacobiIntegrator {
        &self.integrator
    }

    pub(crate) fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, got: x.len() });
        }
        Ok(())
    }
}

/// Same as [`Params::new`]; kept as a free function for call sites that
/// mirror the CLI vocabulary.
pub fn make_params(d: usize, k: f64) -> Result<Params> {
    Params::new(d, k)
}

/// `c_k = Γ(k+1/2) / (√π Γ(k))`.
pub fn intertwiner_constant(k: f64) -> f64 {
    (ln_gamma(k + 0.5) - ln_gamma(k) - 0.5 * PI.ln()).exp()
}

/// `d_k = ∫_{S^{d-1}} |x_1|^{2k} dσ(x) = 2 Γ(k+1/2) π^{(d-1)/2} / Γ(k+d/2)`.
///
/// Follows from integrating `|x_1|^{2k} e^{-|x|^2}` over `R^d` in Cartesian
/// and in polar coordinates.
pub fn weighted_sphere_area(d: usize, k: f64) -> f64 {
    let half_d = d as f64 / 2.0;
    (2.0f64.ln() + ln_gamma(k + 0.5) + (half_d - 0.5) * PI.ln() - ln_gamma(k + half_d)).exp()
}

/// A point of `R^d` in the adapted basis; coordinate 0 is the reflection
/// coordinate `x_1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Self(coords)
    }

    pub fn zeros(d: usize) -> Self {
        Self(vec![0.0; d])
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self(self.0.iter().map(|v| v * s).collect())
    }
}

impl Deref for Point {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

impl From<&[f64]> for Point {
    fn from(v: &[f64]) -> Self {
        Self(v.to_vec())
    }
}

/// A kernel value: finite and nonnegative, or `+∞` on the orbit `W.y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ExtendedValue {
    Finite(f64),
    Infinite,
}

impl ExtendedValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            Self::Finite(v) => Some(v),
            Self::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Self::Infinite)
    }

    /// The value as an `f64`, with `+∞` for the infinite marker.
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

impl fmt::Display for ExtendedValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(v) => write!(f, "{v:.16e}"),
            Self::Infinite => f.write_str("inf"),
        }
    }
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm_sq(x: &[f64]) -> f64 {
    dot(x, x)
}

pub fn norm(x: &[f64]) -> f64 {
    norm_sq(x).sqrt()
}

pub fn dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// `|x - σy|`.
pub fn dist_reflected(x: &[f64], y: &[f64]) -> f64 {
    let mut s = (x[0] + y[0]) * (x[0] + y[0]);
    for i in 1..x.len() {
        s += (x[i] - y[i]) * (x[i] - y[i]);
    }
    s.sqrt()
}

/// `σ(x_1, x_2, ..., x_d) = (-x_1, x_2, ..., x_d)`.
pub fn reflect(x: &[f64]) -> Point {
    let mut v = x.to_vec();
    if let Some(first) = v.first_mut() {
        *first = -*first;
    }
    Point(v)
}

/// Inversion in the unit sphere, `x* = x / |x|^2`.
pub fn invert(x: &[f64]) -> Result<Point> {
    let r2 = norm_sq(x);
    if r2.sqrt() <= DEGENERACY_CUTOFF {
        return Err(Error::DegenerateOrigin);
    }
    Ok(Point(x.iter().map(|v| v / r2).collect()))
}

/// `ω_k(x) = |x_1|^{2k}`.
pub fn weight(p: &Params, x: &[f64]) -> f64 {
    x[0].abs().powf(2.0 * p.k)
}

/// Boundary distance `δ(x) = 1 - |x|` on the closed ball.
pub fn delta(x: &[f64]) -> Result<f64> {
    let r = norm(x);
    if r > 1.0 + 1e-12 {
        return Err(Error::OutsideBall { norm: r });
    }
    Ok((1.0 - r).max(0.0))
}

/// `Φ(x, y) = |x - y| ∨ |x - σy|`.
pub fn phi(x: &[f64], y: &[f64]) -> f64 {
    dist(x, y).max(dist_reflected(x, y))
}

/// True when `x` is within the degeneracy cutoff of `y` or `σy`.
pub fn on_orbit(x: &[f64], y: &[f64]) -> bool {
    let m = dist(x, y).min(dist_reflected(x, y));
    m < DEGENERACY_CUTOFF * (1.0 + norm(x) + norm(y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
    }

    #[test]
    fn reflect_examples() {
        assert_eq!(reflect(&[0.3, 0.4]).0, vec![-0.3, 0.4]);
        assert_eq!(reflect(&[0.0, 1.0, 2.0]).0, vec![0.0, 1.0, 2.0]);
    }

    #[test]
    fn invert_examples() {
        let e = [0.6, 0.8];
        let inv = invert(&e).unwrap();
        assert!(close(inv[0], 0.6, 1e-15) && close(inv[1], 0.8, 1e-15));
        assert_eq!(invert(&[0.5, 0.0]).unwrap().0, vec![2.0, 0.0]);
        assert_eq!(invert(&[0.0, 0.0]), Err(Error::DegenerateOrigin));
    }

    #[test]
    fn weight_examples() {
        let p = Params::new(2, 1.0).unwrap();
        assert_eq!(weight(&p, &[2.0, 5.0]), 4.0);
        assert_eq!(weight(&p, &[0.0, 5.0]), 0.0);
        let p = Params::new(3, 0.3).unwrap();
        let x = [-0.7, 0.2, 0.1];
        assert_eq!(weight(&p, &x), weight(&p, &reflect(&x)));
    }

    #[test]
    fn constants_for_d2_k1() {
        let p = Params::new(2, 1.0).unwrap();
        assert!(close(p.c_k, 0.5, 1e-14));
        assert!(close(p.d_k, PI, 1e-14));
        assert!(close(p.newton_const, 1.0 / (2.0 * PI), 1e-14));
        assert!(close(p.c_k * p.newton_const, 1.0 / (4.0 * PI), 1e-14));
        assert_eq!(p.gamma, p.k);
    }

    #[test]
    fn d_k_matches_trapezoid_on_circle() {
        // ∫_0^{2π} |cos θ|^{2k} dθ by the periodic trapezoid rule; the
        // integrand is smooth for k = 1 and the rule is spectrally accurate.
        let m = 4096;
        let s: f64 = (0..m).map(|i| (2.0 * PI * i as f64 / m as f64).cos().powi(2)).sum::<f64>() * 2.0 * PI / m as f64;
        assert!(close(weighted_sphere_area(2, 1.0), s, 1e-13));
    }

    #[test]
    fn invalid_params_are_rejected() {
        assert!(matches!(Params::new(0, 1.0), Err(Error::InvalidParams(_))));
        assert!(matches!(Params::new(2, 0.0), Err(Error::InvalidParams(_))));
        assert!(matches!(Params::new(2, -1.0), Err(Error::InvalidParams(_))));
        assert!(matches!(Params::new(1, 0.5), Err(Error::InvalidParams(_))));
        assert!(Params::new(1, 0.75).is_ok());
        assert!(Params::new(2, 0.01).is_ok());
    }

    #[test]
    fn delta_examples() {
        assert_eq!(delta(&[0.0, 0.0]).unwrap(), 1.0);
        assert!(delta(&[0.6, 0.8]).unwrap().abs() < 1e-15);
        assert!(close(delta(&[0.3, 0.4]).unwrap(), 0.5, 1e-15));
        assert!(matches!(delta(&[1.0, 1.0]), Err(Error::OutsideBall { .. })));
    }

    #[test]
    fn phi_examples() {
        let x = [0.3, -0.2];
        assert!(close(phi(&x, &x), 0.6, 1e-15));
        assert!(close(phi(&[0.0, 0.5], &[0.0, -0.1]), 0.6, 1e-15));
        assert!(close(phi(&[1.0, 0.0], &[0.5, 0.0]), 1.5, 1e-15));
    }

    fn vec_strategy(d: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-2.0f64..2.0, d)
    }

    proptest! {
        #[test]
        fn reflect_and_invert_are_involutions(x in vec_strategy(4)) {
            let rr = reflect(&reflect(&x));
            prop_assert_eq!(&rr.0, &x);
            prop_assume!(norm(&x) > 1e-3);
            let ii = invert(&invert(&x).unwrap()).unwrap();
            for (a, b) in ii.iter().zip(&x) {
                prop_assert!((a - b).abs() <= 1e-15 * (1.0 + b.abs()) * 4.0);
            }
            prop_assert!(close(norm(&invert(&x).unwrap()), 1.0 / norm(&x), 1e-14));
        }

        #[test]
        fn phi_symmetries(x in vec_strategy(3), y in vec_strategy(3)) {
            let a = phi(&x, &y);
            prop_assert!(close(a, phi(&y, &x), 1e-15));
            prop_assert!(close(a, phi(&reflect(&x), &reflect(&y)), 1e-15));
            prop_assert!(a >= dist(&x, &y));
        }

        #[test]
        fn norm_identity_both_branches(x in vec_strategy(3), y in vec_strategy(3), t in -1.0f64..1.0) {
            let lhs = norm_sq(&x) + norm_sq(&y)
                - 2.0 * (t * x[0] * y[0] + x[1] * y[1] + x[2] * y[2]);
            let via_diag = dist(&x, &y).powi(2) + 2.0 * x[0] * y[0] * (1.0 - t);
            let via_refl = dist_reflected(&x, &y).powi(2) - 2.0 * x[0] * y[0] * (1.0 + t);
            let scale = norm_sq(&x) + norm_sq(&y);
            prop_assert!((lhs - via_diag).abs() <= 1e-12 * scale);
            prop_assert!((lhs - via_refl).abs() <= 1e-12 * scale);
        }
    }
}
