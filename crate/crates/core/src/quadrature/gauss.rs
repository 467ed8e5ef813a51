//! Gauss rules from three-term recurrences (Golub–Welsch).
//!
//! The Jacobi matrix of the monic recurrence is diagonalized by an implicit
//! QL sweep that only tracks the first component of every eigenvector, which
//! is all the weights need: `w_i = μ_0 z_{0i}^2`.

use crate::error::{Error, Result};
use crate::special::ln_beta;

/// Nodes and weights of an `n`-point Gauss rule on `[-1, 1]` for the weight
/// `(1-t)^alpha (1+t)^beta`, nodes ascending.
pub fn gauss_jacobi(alpha: f64, beta: f64, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::InvalidParams("rule needs at least one node".into()));
    }
    if !(alpha > -1.0 && beta > -1.0) {
        return Err(Error::InvalidParams(format!("Jacobi exponents must exceed -1 (alpha = {alpha}, beta = {beta})")));
    }
    let ab = alpha + beta;
    let mut diag = Vec::with_capacity(n);
    let mut off = vec![0.0; n];
    for j in 0..n {
        let jf = j as f64;
        let a = if j == 0 {
            (beta - alpha) / (ab + 2.0)
        } else {
            (beta - alpha) * (beta + alpha) / ((2.0 * jf + ab) * (2.0 * jf + ab + 2.0))
        };
        diag.push(a);
        if j + 1 < n {
            let m = jf + 1.0;
            let b = if j == 0 {
                4.0 * (1.0 + alpha) * (1.0 + beta) / ((ab + 2.0).powi(2) * (ab + 3.0))
            } else {
                let s = 2.0 * m + ab;
                4.0 * m * (m + alpha) * (m + beta) * (m + ab) / (s * s * (s + 1.0) * (s - 1.0))
            };
            off[j] = b.sqrt();
        }
    }
    let mu0 = ((ab + 1.0) * 2.0f64.ln() + ln_beta(alpha + 1.0, beta + 1.0)).exp();
    let mut first = vec![0.0; n];
    first[0] = 1.0;
    tridiagonal_ql(&mut diag, &mut off, &mut first)?;
    let mut pairs: Vec<(f64, f64)> = diag.into_iter().zip(first).map(|(x, z)| (x, mu0 * z * z)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pairs.into_iter().unzip())
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    gauss_jacobi(0.0, 0.0, n)
}

/// Symmetric rule on `[-1, 1]` for `|u|^{2 mu} (1-u^2)^lambda` with `2m`
/// nodes, exact through degree `4m - 1`.
///
/// Built from an `m`-point Jacobi rule in `s = u^2`, so no recurrence for the
/// generalized Gegenbauer weight is needed.
pub fn generalized_gegenbauer(mu: f64, lambda: f64, m: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let (t, w) = gauss_jacobi(lambda, mu - 0.5, m)?;
    let scale = (-(mu + lambda + 0.5) * 2.0f64.ln()).exp();
    let mut pairs = Vec::with_capacity(2 * m);
    for (ti, wi) in t.iter().zip(&w) {
        let s = 0.5 * (1.0 + ti);
        let u = s.sqrt();
        pairs.push((-u, 0.5 * wi * scale));
        pairs.push((u, 0.5 * wi * scale));
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pairs.into_iter().unzip())
}

/// Implicit QL on a symmetric tridiagonal matrix. `diag` is overwritten with
/// eigenvalues, `off[i]` couples rows `i` and `i+1` (last entry ignored), and
/// `first` is rotated along with the eigenvectors.
fn tridiagonal_ql(diag: &mut [f64], off: &mut [f64], first: &mut [f64]) -> Result<()> {
    let n = diag.len();
    if n == 1 {
        return Ok(());
    }
    off[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::InvalidParams("tridiagonal eigensolver did not converge".into()));
            }
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + off[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
                let fz = first[i + 1];
                first[i + 1] = s * first[i] + c * fz;
                first[i] = c * first[i] - s * fz;
            }
            if underflow {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
    Ok(())
}
