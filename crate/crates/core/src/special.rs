//! Small special-function helpers evaluated in log space or in
//! cancellation-free form.

use statrs::function::gamma::ln_gamma;

/// `ln B(a, b)` for `a, b > 0`.
pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// `Γ(a + s) / Γ(a)` through log-gamma differences.
pub fn gamma_ratio(a: f64, s: f64) -> f64 {
    (ln_gamma(a + s) - ln_gamma(a)).exp()
}

/// `ln(1 + z) / z`, continuous at `z = 0`.
pub fn ln1p_over(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        // ln(1+z)/z = 1 - z/2 + z^2/3 - z^3/4 + ...
        1.0 - z * (0.5 - z * (1.0 / 3.0 - z * 0.25))
    } else {
        z.ln_1p() / z
    }
}

/// `a^{-q} - (a + e)^{-q}` for `a > 0`, `e >= 0`, `q > 0`, accurate to
/// roundoff even when `e << a`.
pub fn power_difference(a: f64, e: f64, q: f64) -> f64 {
    let lead = a.powf(-q);
    lead * -(-q * (e / a).ln_1p()).exp_m1()
}

/// Binomial-series tail `(1 + u)^s - 1 - s u` for `|u| < 1`, used when the
/// closed form cancels catastrophically.
pub(crate) fn binomial_tail(s: f64, u: f64) -> f64 {
    if u.abs() < 0.05 {
        let mut coeff = s * (s - 1.0) / 2.0;
        let mut power = u * u;
        let mut sum = 0.0;
        for j in 2..40 {
            let term = coeff * power;
            sum += term;
            if term.abs() <= 1e-18 * sum.abs() {
                break;
            }
            coeff *= (s - j as f64) / (j as f64 + 1.0);
            power *= u;
        }
        sum
    } else {
        (s * u.ln_1p()).exp_m1() - s * u
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_beta_known_values() {
        assert!((ln_beta(1.0, 1.0)).abs() < 1e-14);
        // B(1/2, 1/2) = π
        assert!((ln_beta(0.5, 0.5) - std::f64::consts::PI.ln()).abs() < 1e-13);
        // B(2, 3) = 1/12
        assert!((ln_beta(2.0, 3.0) - (1.0f64 / 12.0).ln()).abs() < 1e-13);
    }

    #[test]
    fn power_difference_matches_naive_when_well_separated() {
        let (a, e, q): (f64, f64, f64) = (0.7, 1.3, 1.5);
        let naive = a.powf(-q) - (a + e).powf(-q);
        assert!((power_difference(a, e, q) - naive).abs() < 1e-14 * naive);
    }

    #[test]
    fn power_difference_is_first_order_for_tiny_gap() {
        let (a, e, q): (f64, f64, f64) = (0.3, 1e-14, 2.0);
        let expected = q * e * a.powf(-q - 1.0);
        assert!((power_difference(a, e, q) - expected).abs() < 1e-10 * expected);
    }

    #[test]
    fn binomial_tail_branches_agree() {
        for &s in &[0.75, 1.5, 2.5] {
            let u = 0.049;
            let series = binomial_tail(s, u);
            let direct = (1.0 + u).powf(s) - 1.0 - s * u;
            assert!((series - direct).abs() < 1e-12 * direct.abs().max(1e-300));
        }
    }

    #[test]
    fn ln1p_over_is_continuous() {
        assert!((ln1p_over(0.0) - 1.0).abs() < 1e-16);
        assert!((ln1p_over(0.999_999_9e-4) - ln1p_over(1.000_000_1e-4)).abs() < 1e-10);
    }
}
