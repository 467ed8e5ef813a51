//! Adaptive integration against the Jacobi weight `(1-t)^{k-1}(1+t)^k`.
//!
//! Panels touching `t = ±1` are integrated with Gauss–Jacobi rules that
//! absorb the endpoint power of the weight; interior panels use
//! Gauss–Legendre with the whole weight folded into the integrand. Each panel
//! is evaluated with an 8- and a 16-point rule and the difference drives
//! bisection of the worst panel.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::quadrature::gauss::{gauss_jacobi, gauss_legendre};

/// Default relative tolerance for kernel integrals.
pub const DEFAULT_TOL: f64 = 1e-10;

const LOW: usize = 8;
const HIGH: usize = 16;
const MAX_PANELS: usize = 4000;

/// A node of `[-1, 1]` carried together with `1 - t` and `1 + t`, each
/// computed without cancellation next to the corresponding endpoint.
#[derive(Debug, Clone, Copy)]
pub struct JacobiNode {
    pub t: f64,
    pub one_minus: f64,
    pub one_plus: f64,
}

#[derive(Debug, Clone)]
struct Rule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Rule {
    fn jacobi(alpha: f64, beta: f64, n: usize) -> Result<Self> {
        let (nodes, weights) = gauss_jacobi(alpha, beta, n)?;
        Ok(Self { nodes, weights })
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error_bound: f64,
    pub panels: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum PanelKind {
    Left,
    Interior,
    Right,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    kind: PanelKind,
    a: f64,
    b: f64,
    value: f64,
    abs_value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Cached panel rules for one multiplicity `k`.
#[derive(Debug, Clone)]
pub struct JacobiIntegrator {
    k: f64,
    legendre: [Rule; 2],
    // weight (1-s)^{k-1} on the panel touching t = 1
    right: [Rule; 2],
    // weight (1+s)^k on the panel touching t = -1
    left: [Rule; 2],
}

impl JacobiIntegrator {
    pub fn new(k: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidParams(format!("multiplicity k must be positive, got {k}")));
        }
        let legendre = {
            let (n0, w0) = gauss_legendre(LOW)?;
            let (n1, w1) = gauss_legendre(HIGH)?;
            [Rule { nodes: n0, weights: w0 }, Rule { nodes: n1, weights: w1 }]
        };
        Ok(Self {
            k,
            legendre,
            right: [Rule::jacobi(k - 1.0, 0.0, LOW)?, Rule::jacobi(k - 1.0, 0.0, HIGH)?],
            left: [Rule::jacobi(0.0, k, LOW)?, Rule::jacobi(0.0, k, HIGH)?],
        })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// `∫_{-1}^{1} f(t) (1-t)^{k-1} (1+t)^k dt` to relative tolerance `tol`.
    pub fn integrate<F>(&self, f: F, tol: f64) -> Result<Integral>
    where
        F: Fn(JacobiNode) -> f64,
    {
        let mut heap = BinaryHeap::new();
        for (kind, a, b) in
            [(PanelKind::Left, -1.0, -0.5), (PanelKind::Interior, -0.5, 0.5), (PanelKind::Right, 0.5, 1.0)]
        {
            heap.push(self.panel(&f, kind, a, b)?);
        }
        loop {
            let (mut value, mut abs_value, mut error) = (0.0, 0.0, 0.0);
            for p in heap.iter() {
                value += p.value;
                abs_value += p.abs_value;
                error += p.error;
            }
            let target = tol * value.abs();
            if error <= target || error <= 50.0 * f64::EPSILON * abs_value {
                return Ok(Integral { value, error_bound: error, panels: heap.len() });
            }
            if heap.len() >= MAX_PANELS {
                return Err(Error::ToleranceNotReached { estimate: value, error_bound: error });
            }
            let worst = heap.pop().expect("heap is never empty");
            let mid = 0.5 * (worst.a + worst.b);
            if !(mid > worst.a && mid < worst.b) {
                return Err(Error::ToleranceNotReached { estimate: value, error_bound: error });
            }
            let (left_kind, right_kind) = match worst.kind {
                PanelKind::Left => (PanelKind::Left, PanelKind::Interior),
                PanelKind::Interior => (PanelKind::Interior, PanelKind::Interior),
                PanelKind::Right => (PanelKind::Interior, PanelKind::Right),
            };
            heap.push(self.panel(&f, left_kind, worst.a, mid)?);
            heap.push(self.panel(&f, right_kind, mid, worst.b)?);
        }
    }

    /// Fixed-order panel quadrature; returns `(Q_low, Q_high, ∫|f| w)`.
    fn panel<F>(&self, f: &F, kind: PanelKind, a: f64, b: f64) -> Result<Panel>
    where
        F: Fn(JacobiNode) -> f64,
    {
        let k = self.k;
        let mut sums = [0.0; 2];
        let mut abs_sum = 0.0;
        for (level, sum) in sums.iter_mut().enumerate() {
            let rule = match kind {
                PanelKind::Left => &self.left[level],
                PanelKind::Interior => &self.legendre[level],
                PanelKind::Right => &self.right[level],
            };
            let mut acc = 0.0;
            for (&s, &w) in rule.nodes.iter().zip(&rule.weights) {
                let node = match kind {
                    PanelKind::Left => {
                        let one_plus = 0.5 * (b + 1.0) * (1.0 + s);
                        JacobiNode { t: -1.0 + one_plus, one_minus: 2.0 - one_plus, one_plus }
                    }
                    PanelKind::Right => {
                        let one_minus = 0.5 * (1.0 - a) * (1.0 - s);
                        JacobiNode { t: 1.0 - one_minus, one_minus, one_plus: 2.0 - one_minus }
                    }
                    PanelKind::Interior => {
                        let t = 0.5 * (a + b) + 0.5 * (b - a) * s;
                        JacobiNode { t, one_minus: 1.0 - t, one_plus: 1.0 + t }
                    }
                };
                let fv = f(node);
                if !fv.is_finite() {
                    return Err(Error::NonFinite { at: format!("t = {:e}", node.t) });
                }
                let rest = match kind {
                    PanelKind::Left => node.one_minus.powf(k - 1.0),
                    PanelKind::Right => node.one_plus.powf(k),
                    PanelKind::Interior => node.one_minus.powf(k - 1.0) * node.one_plus.powf(k),
                };
                let term = w * fv * rest;
                acc += term;
                if level == 1 {
                    abs_sum += term.abs();
                }
            }
            *sum = acc;
        }
        let scale = match kind {
            PanelKind::Left => (0.5 * (b + 1.0)).powf(k + 1.0),
            PanelKind::Right => (0.5 * (1.0 - a)).powf(k),
            PanelKind::Interior => 0.5 * (b - a),
        };
        Ok(Panel {
            kind,
            a,
            b,
            value: sums[1] * scale,
            abs_value: abs_sum * scale,
            error: (sums[1] - sums[0]).abs() * scale,
        })
    }
}

/// `∫_{-1}^{1} f(t) (1-t)^{k-1} (1+t)^k dt` with relative tolerance `tol`.
///
/// Builds the panel rules on every call; hot paths should hold a
/// [`JacobiIntegrator`] instead.
pub fn integrate_jacobi<F>(f: F, k: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let integrator = JacobiIntegrator::new(k)?;
    Ok(integrator.integrate(|n| f(n.t), tol)?.value)
}
