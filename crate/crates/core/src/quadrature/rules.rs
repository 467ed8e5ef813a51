//! Fixed rules on the interval, the sphere `S^{d-1}` and the ball, all
//! weighted by `ω_k(x) = |x_1|^{2k}` where applicable.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::Params;
use crate::quadrature::gauss::{gauss_jacobi, generalized_gegenbauer};
use crate::quadrature::kronrod::integrate_gk;
use statrs::function::gamma::ln_gamma;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Domain {
    Interval,
    Sphere,
    Ball,
}

/// Nodes (stored flat, `dim` coordinates each) and positive weights.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub domain: Domain,
    pub order: usize,
    dim: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.nodes.chunks(self.dim).zip(self.weights.iter().copied())
    }

    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `Σ w_i f(x_i)`; stops at the first non-finite value.
    pub fn integrate<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(&[f64]) -> f64,
    {
        let mut acc = 0.0;
        for (x, w) in self.iter() {
            let v = f(x);
            if !v.is_finite() {
                return Err(Error::NonFinite { at: format!("{x:?}") });
            }
            acc += w * v;
        }
        Ok(acc)
    }

    /// Like [`integrate`](Self::integrate) for fallible integrands.
    pub fn try_integrate<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(&[f64]) -> Result<f64>,
    {
        let mut acc = 0.0;
        for (x, w) in self.iter() {
            let v = f(x)?;
            if !v.is_finite() {
                return Err(Error::NonFinite { at: format!("{x:?}") });
            }
            acc += w * v;
        }
        Ok(acc)
    }
}

/// `n`-point Gauss rule for `(1-t)^{k-1}(1+t)^k` on `[-1, 1]`, exact through
/// degree `2n - 1`; the weights sum to `1/c_k`.
pub fn jacobi_rule(k: f64, n: usize) -> Result<QuadratureRule> {
    if !(k > 0.0) {
        return Err(Error::InvalidParams(format!("multiplicity k must be positive, got {k}")));
    }
    if n < 1 {
        return Err(Error::InvalidParams("rule order must be at least 1".into()));
    }
    let (nodes, weights) = gauss_jacobi(k - 1.0, k, n)?;
    Ok(QuadratureRule { domain: Domain::Interval, order: n, dim: 1, nodes, weights })
}

/// Gauss rule for `r^beta dr` on `(0, 1)` with `n` nodes.
pub fn radial_rule(beta: f64, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let (t, w) = gauss_jacobi(0.0, beta, n)?;
    let scale = (-(beta + 1.0) * 2.0f64.ln()).exp();
    Ok((t.iter().map(|t| 0.5 * (1.0 + t)).collect(), w.iter().map(|w| w * scale).collect()))
}

/// Nodes on `S^{dim-1} ⊂ R^dim` for the measure `|x_1|^{2 mu} dσ`, exact for
/// polynomials of total degree `<= degree`.
fn sphere_points(dim: usize, mu: f64, degree: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if dim == 1 {
        return Ok((vec![-1.0, 1.0], vec![1.0, 1.0]));
    }
    let m = (degree + 1).div_ceil(4).max(1);
    let lambda = (dim as f64 - 3.0) / 2.0;
    let (u, wu) = generalized_gegenbauer(mu, lambda, m)?;
    let (inner, winner) = sphere_points(dim - 1, 0.0, degree)?;
    let inner_dim = dim - 1;
    let mut nodes = Vec::with_capacity(u.len() * winner.len() * dim);
    let mut weights = Vec::with_capacity(u.len() * winner.len());
    for (ui, wi) in u.iter().zip(&wu) {
        let rho = (1.0 - ui * ui).max(0.0).sqrt();
        for (xi, wj) in inner.chunks(inner_dim).zip(&winner) {
            nodes.push(*ui);
            nodes.extend(xi.iter().map(|v| rho * v));
            weights.push(wi * wj);
        }
    }
    Ok((nodes, weights))
}

/// Product rule on `S^{d-1}` against `ω_k dσ`: a generalized Gegenbauer rule
/// in `u = x_1` tensored with an unweighted rule on the `(d-2)`-sphere.
/// Exact for polynomials of total degree `<= n`; the weights sum to `d_k`.
pub fn sphere_rule(p: &Params, n: usize) -> Result<QuadratureRule> {
    if p.d < 2 {
        return Err(Error::InvalidParams("sphere rule needs d >= 2".into()));
    }
    let (nodes, weights) = sphere_points(p.d, p.k, n)?;
    Ok(QuadratureRule { domain: Domain::Sphere, order: n, dim: p.d, nodes, weights })
}

/// Unweighted product rule on `S^{d-1}`; weights sum to the sphere area.
pub fn plain_sphere_rule(d: usize, n: usize) -> Result<QuadratureRule> {
    if d < 1 {
        return Err(Error::InvalidParams("dimension must be positive".into()));
    }
    let (nodes, weights) = sphere_points(d, 0.0, n)?;
    Ok(QuadratureRule { domain: Domain::Sphere, order: n, dim: d, nodes, weights })
}

/// Ball rule for `∫_B f ω_k dy`: radial Gauss rule for `r^{d-1+2k} dr`
/// tensored with [`sphere_rule`].
pub fn ball_rule(p: &Params, n: usize) -> Result<QuadratureRule> {
    radial_ball_rule(p, p.d as f64 - 1.0 + 2.0 * p.k, n)
}

/// Ball rule with radial weight `r^beta` in place of `r^{d-1+2k}`.
fn radial_ball_rule(p: &Params, beta: f64, n: usize) -> Result<QuadratureRule> {
    let (r, wr) = radial_rule(beta, (n + 2) / 2)?;
    let (snodes, sweights) = if p.d == 1 { (vec![-1.0, 1.0], vec![1.0, 1.0]) } else { sphere_points(p.d, p.k, n)? };
    let mut nodes = Vec::with_capacity(r.len() * snodes.len());
    let mut weights = Vec::with_capacity(r.len() * sweights.len());
    for (ri, wi) in r.iter().zip(&wr) {
        for (xi, wj) in snodes.chunks(p.d).zip(&sweights) {
            nodes.extend(xi.iter().map(|v| ri * v));
            weights.push(wi * wj);
        }
    }
    Ok(QuadratureRule { domain: Domain::Ball, order: n, dim: p.d, nodes, weights })
}

/// `∫_B f(y) ω_k(y) dy` with a product rule of order `n`.
pub fn ball_integrate<F>(f: F, p: &Params, n: usize) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    ball_rule(p, n)?.integrate(f)
}

/// `∫_B (|y|^{2-2k-d} - 1) g(y) ω_k(y) dy` for smooth `g`.
///
/// In polar form the factor times `r^{d-1+2k}` is `r - r^{d-1+2k}`, so the
/// integral splits into two Gauss rules with radial weights `r` and
/// `r^{d-1+2k}` and no singular integrand remains.
pub fn ball_integrate_green_origin<F>(g: F, p: &Params, n: usize) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let near = radial_ball_rule(p, 1.0, n)?.integrate(&g)?;
    let far = ball_rule(p, n)?.integrate(&g)?;
    Ok(near - far)
}

/// Hyperspherical angles of a unit vector, `φ_1..φ_{d-2} ∈ [0, π]`,
/// `φ_{d-1} ∈ [0, 2π)`.
fn angles_of(x: &[f64]) -> Vec<f64> {
    let d = x.len();
    let mut out = Vec::with_capacity(d - 1);
    for j in 0..d - 1 {
        let tail: f64 = x[j..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if j < d - 2 {
            out.push(if tail > 0.0 { (x[j] / tail).clamp(-1.0, 1.0).acos() } else { 0.0 });
        } else {
            let a = x[d - 1].atan2(x[d - 2]);
            out.push(if a < 0.0 { a + 2.0 * PI } else { a });
        }
    }
    out
}

struct AdaptiveSphere<'a, F> {
    d: usize,
    mu: f64,
    f: &'a F,
    focus: Vec<Vec<f64>>,
    tol: f64,
}

impl<F> AdaptiveSphere<'_, F>
where
    F: Fn(&[f64]) -> f64,
{
    fn level(&self, j: usize, point: &mut [f64], scale: f64) -> Result<f64> {
        let d = self.d;
        let last = j == d - 2;
        let (hi, mut breaks) = if last { (2.0 * PI, vec![PI / 2.0, PI, 1.5 * PI]) } else { (PI, vec![PI / 2.0]) };
        breaks.extend(self.focus.iter().map(|a| a[j]));
        let err = std::cell::RefCell::new(None);
        let value = integrate_gk(
            |phi| {
                let (s, c) = phi.sin_cos();
                let mut pt = point.to_vec();
                if last {
                    pt.push(scale * c);
                    pt.push(scale * s);
                    let w = if self.mu > 0.0 { pt[0].abs().powf(2.0 * self.mu) } else { 1.0 };
                    return w * (self.f)(&pt);
                }
                pt.push(scale * c);
                let jac = s.powi((d - 2 - j) as i32);
                match self.level(j + 1, &mut pt, scale * s) {
                    Ok(v) => jac * v,
                    Err(e) => {
                        *err.borrow_mut() = Some(e);
                        f64::NAN
                    }
                }
            },
            0.0,
            hi,
            &breaks,
            self.tol,
            0.0,
        );
        if let Some(e) = err.into_inner() {
            return Err(e);
        }
        value
    }
}

/// `∫_{S^{d-1}} f(x) |x_1|^{2 mu} dσ(x)` by nested adaptive Gauss–Kronrod in
/// hyperspherical angles, with break points at the angles of each `focus`
/// point (where `f` is expected to peak) and on the wall `x_1 = 0`.
///
/// Cost grows geometrically with `d`; intended for `d <= 4`.
pub fn sphere_integrate_adaptive<F>(f: F, d: usize, mu: f64, focus: &[&[f64]], tol: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    match d {
        0 => Err(Error::InvalidParams("dimension must be positive".into())),
        1 => Ok(f(&[-1.0]) + f(&[1.0])),
        _ => {
            let walker = AdaptiveSphere { d, mu, f: &f, focus: focus.iter().map(|x| angles_of(x)).collect(), tol };
            walker.level(0, &mut Vec::with_capacity(d), 1.0)
        }
    }
}

/// Area of the unit sphere `S^n ⊂ R^{n+1}`.
pub fn unit_sphere_area(n: usize) -> f64 {
    let h = (n as f64 + 1.0) / 2.0;
    2.0 * (h * PI.ln() - ln_gamma(h)).exp()
}

/// `∫_{S^{d-1}} f(x) |x_1|^{2 mu} dσ(x)` for `f` depending on `x` only through
/// `x_1` and `⟨v, x⟩` for `v` in `span`, an orthonormal family orthogonal to
/// `e_1`.
///
/// With `D = |span| + 2 < d` the remaining `d - D + 1` coordinates are
/// integrated out: the integral equals `|S^{d-D}|/2 · ∫_{S^{D-1}} f |w|^{d-D}
/// |u|^{2 mu} dσ(u, s, w)`, where `x = u e_1 + Σ s_i v_i + w v_⊥` for any unit
/// `v_⊥` orthogonal to `e_1` and `span`. The reduced integral runs through
/// [`sphere_integrate_adaptive`].
pub fn sphere_integrate_zonal<F>(f: F, d: usize, mu: f64, span: &[Vec<f64>], focus: &[&[f64]], tol: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let m = span.len();
    if span.iter().any(|v| v.len() != d) {
        return Err(Error::InvalidParams("span vectors must have the ambient dimension".into()));
    }
    if m + 2 >= d {
        return sphere_integrate_adaptive(f, d, mu, focus, tol);
    }
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 2);
    let mut e1 = vec![0.0; d];
    e1[0] = 1.0;
    basis.push(e1);
    basis.extend(span.iter().cloned());
    let perp = (1..d)
        .find_map(|i| {
            let mut v = vec![0.0; d];
            v[i] = 1.0;
            for b in &basis {
                let c: f64 = b.iter().zip(&v).map(|(x, y)| x * y).sum();
                v.iter_mut().zip(b).for_each(|(vi, bi)| *vi -= c * bi);
            }
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            (n > 1e-6).then(|| v.into_iter().map(|x| x / n).collect::<Vec<f64>>())
        })
        .ok_or_else(|| Error::InvalidParams("span is not orthonormal".into()))?;
    basis.push(perp);
    let dd = m + 2;
    let beta = (d - dd) as i32;
    let reduce = |x: &[f64]| -> Vec<f64> {
        let mut v: Vec<f64> = basis[..dd - 1].iter().map(|b| b.iter().zip(x).map(|(p, q)| p * q).sum()).collect();
        let rest = (1.0 - v.iter().map(|c| c * c).sum::<f64>()).max(0.0).sqrt();
        v.push(rest);
        v
    };
    let reduced_focus: Vec<Vec<f64>> = focus.iter().map(|x| reduce(x)).collect();
    let rf: Vec<&[f64]> = reduced_focus.iter().map(|v| &v[..]).collect();
    let mut full = vec![0.0; d];
    let full = std::cell::RefCell::new(&mut full);
    let value = sphere_integrate_adaptive(
        |v| {
            let mut z = full.borrow_mut();
            z.iter_mut().for_each(|c| *c = 0.0);
            for (c, b) in v.iter().zip(&basis) {
                z.iter_mut().zip(b).for_each(|(zi, bi)| *zi += c * bi);
            }
            v[dd - 1].abs().powi(beta) * f(&z)
        },
        dd,
        mu,
        &rf,
        tol,
    )?;
    Ok(0.5 * unit_sphere_area(d - dd) * value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{intertwiner_constant, norm};

    #[test]
    fn zonal_reduction_matches_product_rule() {
        let v = vec![0.0, 0.6, 0.0, 0.8, 0.0];
        let f = |z: &[f64]| {
            let s = 0.6 * z[1] + 0.8 * z[3];
            1.0 + z[0] * z[0] * s * s + s.powi(4) + 0.3 * s
        };
        for &k in &[0.5, 1.0, 1.7] {
            let p = Params::new(5, k).unwrap();
            let exact = sphere_rule(&p, 8).unwrap().integrate(f).unwrap();
            let zonal = sphere_integrate_zonal(f, 5, k, std::slice::from_ref(&v), &[], 1e-12).unwrap();
            assert!((zonal - exact).abs() < 1e-11 * exact.abs(), "{zonal} {exact}");
            let area = sphere_integrate_zonal(|_| 1.0, 4, k, &[], &[], 1e-12).unwrap();
            assert!((area - crate::params::weighted_sphere_area(4, k)).abs() < 1e-11);
        }
    }

    #[test]
    fn jacobi_weights_sum_and_positivity() {
        for &k in &[0.25, 0.5, 1.0, 1.7, 3.0] {
            for n in 1..=20 {
                let r = jacobi_rule(k, n).unwrap();
                assert!(r.weights().iter().all(|&w| w > 0.0));
                assert!(r.iter().all(|(x, _)| x[0] > -1.0 && x[0] < 1.0));
                let expected = 1.0 / intertwiner_constant(k);
                assert!((r.weight_sum() - expected).abs() < 1e-12 * expected);
            }
        }
    }

    #[test]
    fn jacobi_rule_k1_examples() {
        let r = jacobi_rule(1.0, 1).unwrap();
        assert!((r.weight_sum() - 2.0).abs() < 2e-14);
        let r = jacobi_rule(1.0, 2).unwrap();
        let m1 = r.integrate(|t| t[0]).unwrap();
        assert!((m1 - 2.0 / 3.0).abs() < 1e-14);
        assert!(jacobi_rule(0.0, 3).is_err());
        assert!(jacobi_rule(1.0, 0).is_err());
    }

    #[test]
    fn sphere_rule_odd_moment_and_mass() {
        let p = Params::new(3, 1.7).unwrap();
        let r = sphere_rule(&p, 10).unwrap();
        assert!((r.weight_sum() - p.d_k).abs() < 1e-12 * p.d_k);
        assert!(r.integrate(|x| x[0]).unwrap().abs() < 1e-14);
        assert!(r.iter().all(|(x, _)| (norm(x) - 1.0).abs() < 1e-14));
        assert!(matches!(sphere_rule(&Params::new(1, 1.0).unwrap(), 4), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn sphere_rule_d3_k1_second_moment() {
        // ∫_{S^2} x_2^2 x_1^2 dσ = 4π/15
        let p = Params::new(3, 1.0).unwrap();
        let r = sphere_rule(&p, 6).unwrap();
        let v = r.integrate(|x| x[1] * x[1]).unwrap();
        assert!((v - 4.0 * PI / 15.0).abs() < 1e-14);
    }

    #[test]
    fn ball_integrate_constant() {
        for (d, k) in [(2, 1.0), (3, 0.5), (4, 1.7)] {
            let p = Params::new(d, k).unwrap();
            let v = ball_integrate(|_| 1.0, &p, 6).unwrap();
            let expected = p.d_k / (d as f64 + 2.0 * k);
            assert!((v - expected).abs() < 1e-13 * expected);
        }
    }

    #[test]
    fn ball_green_origin_split() {
        // ∫_B (|y|^{2-2k-d} - 1) ω dy = d_k (1/2 - 1/(d+2k))
        for (d, k) in [(2, 1.0), (2, 0.25), (3, 0.5), (5, 1.7)] {
            let p = Params::new(d, k).unwrap();
            let v = ball_integrate_green_origin(|_| 1.0, &p, 4).unwrap();
            let expected = p.d_k * (0.5 - 1.0 / (d as f64 + 2.0 * k));
            assert!((v - expected).abs() < 1e-13 * expected, "d={d} k={k}");
            // the generic rule also converges, only algebraically
            let g = ball_integrate(|y| norm(y).powf(p.kelvin_exponent()) - 1.0, &p, 60).unwrap();
            assert!((g - expected).abs() < 1e-3 * expected, "d={d} k={k}: {g} vs {expected}");
        }
    }

    #[test]
    fn ball_odd_integrand_vanishes() {
        let p = Params::new(3, 0.5).unwrap();
        let v = ball_integrate(|y| y[0] * (1.0 + y[1] * y[1]), &p, 8).unwrap();
        assert!(v.abs() < 1e-15);
    }

    #[test]
    fn adaptive_sphere_matches_product_rule() {
        for (d, k) in [(2, 0.5), (3, 1.0)] {
            let p = Params::new(d, k).unwrap();
            let f = |x: &[f64]| 1.0 + x[1] * x[1] * x[0] * x[0] + x[d - 1];
            let fixed = sphere_rule(&p, 8).unwrap().integrate(f).unwrap();
            let adaptive = sphere_integrate_adaptive(f, d, k, &[], 1e-12).unwrap();
            assert!((fixed - adaptive).abs() < 1e-10 * fixed, "d={d}: {fixed} vs {adaptive}");
        }
    }

    #[test]
    fn hyperspherical_angles_round_trip() {
        let x = [0.2, -0.5, 0.3, 0.7];
        let n = norm(&x);
        let u: Vec<f64> = x.iter().map(|v| v / n).collect();
        let a = angles_of(&u);
        let y = [
            a[0].cos(),
            a[0].sin() * a[1].cos(),
            a[0].sin() * a[1].sin() * a[2].cos(),
            a[0].sin() * a[1].sin() * a[2].sin(),
        ];
        for (p, q) in u.iter().zip(&y) {
            assert!((p - q).abs() < 1e-14);
        }
    }
}
