use dunkl_core::estimates::{green_envelope, newton_envelope, poisson_envelope};
use dunkl_core::kernels::{green_direct, green_kelvin, newton, poisson};
use dunkl_core::potential::{green_potential, remainder_f, remainder_f_eps, Remainder};
use dunkl_core::Params;
use proptest::prelude::*;

fn flip(x: &[f64]) -> Vec<f64> {
    let mut v = x.to_vec();
    v[0] = -v[0];
    v
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs())
}

/// A point of the open ball of radius `r` in `R^3`, off the wall.
fn ball3(r: f64) -> impl Strategy<Value = Vec<f64>> {
    (0.05f64..1.0, -1.0f64..1.0, 0.0f64..std::f64::consts::TAU, prop::bool::ANY).prop_map(move |(s, c, t, neg)| {
        let rho = r * s.cbrt();
        let sn = (1.0 - c * c).sqrt();
        let x1 = if neg { -c.abs().max(0.05) } else { c.abs().max(0.05) };
        let v = [x1, sn * t.cos(), sn * t.sin()];
        let n = norm(&v);
        v.iter().map(|u| rho * u / n).collect()
    })
}

fn kval() -> impl Strategy<Value = f64> {
    prop::sample::select(vec![0.25, 0.5, 1.0, 1.7, 3.0])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn taylor_remainders_are_nonnegative(p in 1.01f64..6.0, a in -1e3f64..1e3, b in -1e3f64..1e3, eps in 0.0f64..2.0) {
        let r = Remainder::new(p).unwrap();
        prop_assert!(remainder_f(&r, a, b) >= 0.0);
        prop_assert!(remainder_f_eps(&r.with_eps(eps).unwrap(), a, b) >= 0.0);
    }

    #[test]
    fn kernels_are_symmetric_and_reflection_invariant(k in kval(), x in ball3(0.95), y in ball3(0.95)) {
        let p = Params::new(3, k).unwrap();
        let n = newton(&p, &x, &y).unwrap().to_f64();
        prop_assert!(n > 0.0);
        prop_assert!(close(n, newton(&p, &y, &x).unwrap().to_f64(), 1e-9));
        prop_assert!(close(n, newton(&p, &flip(&x), &flip(&y)).unwrap().to_f64(), 1e-9));
        let g = green_direct(&p, &x, &y).unwrap().to_f64();
        prop_assert!(g > 0.0 && g < n);
        prop_assert!(close(g, green_kelvin(&p, &x, &y).unwrap().to_f64(), 1e-7));
        prop_assert!(close(g, green_direct(&p, &flip(&x), &flip(&y)).unwrap().to_f64(), 1e-9));
    }

    #[test]
    fn envelopes_are_reflection_invariant(d in 2usize..=6, k in kval(), x in ball3(0.95), y in ball3(0.95)) {
        let p = Params::new(d, k).unwrap();
        let pad = |v: &[f64]| { let mut w = v.to_vec(); w.resize(d, 0.02); w.truncate(d); w };
        let (x, y) = (pad(&x), pad(&y));
        prop_assume!(norm(&x) < 1.0 && norm(&y) < 1.0);
        let a = newton_envelope(&p, &x, &y).unwrap();
        prop_assert!(a > 0.0 && a.is_finite());
        prop_assert!(close(a, newton_envelope(&p, &flip(&x), &flip(&y)).unwrap(), 1e-12));
        let b = green_envelope(&p, &x, &y).unwrap();
        prop_assert!(close(b, green_envelope(&p, &flip(&x), &flip(&y)).unwrap(), 1e-12));
    }

    #[test]
    fn poisson_kernel_is_positive_with_unit_reflection_invariant(k in kval(), x in ball3(0.9), z in ball3(1.0)) {
        let p = Params::new(3, k).unwrap();
        let z: Vec<f64> = z.iter().map(|v| v / norm(&z)).collect();
        let v = poisson(&p, &x, &z).unwrap();
        prop_assert!(v > 0.0);
        prop_assert!(close(v, poisson(&p, &flip(&x), &flip(&z)).unwrap(), 1e-9));
        prop_assert!(poisson_envelope(&p, &x, &z).unwrap() > 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    /// `u = (1 - |x|^2)/(2d + 4k)` vanishes on the sphere and has
    /// `Δ_k u = -1`, so it is the Green potential of `g ≡ 1`.
    #[test]
    fn green_potential_of_one(k in kval(), x in ball3(0.8)) {
        for d in [2, 3] {
            let p = Params::new(d, k).unwrap();
            let x = &x[..d];
            let expected = (1.0 - x.iter().map(|v| v * v).sum::<f64>()) / (2.0 * d as f64 + 4.0 * k);
            let got = green_potential(&p, x, |_| 1.0).unwrap();
            prop_assert!(close(got, expected, 1e-6), "d = {d}: {got} vs {expected}");
        }
    }
}
