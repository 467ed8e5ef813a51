use dunkl_core::operator::{harmonic_catalog, kelvin, sample_region, verify_harmonicity};
use dunkl_core::Params;

#[test]
fn catalog_kernels_are_harmonic() {
    for d in 2..=5 {
        for k in [0.5, 1.0, 1.7] {
            let p = Params::new(d, k).unwrap();
            for u in harmonic_catalog(&p) {
                let s = sample_region(&u, d, 10, 3, 0.9, 0.05);
                let r = verify_harmonicity(&u, &p, &s, 0.02);
                assert!(
                    r.passed,
                    "d={d} k={k} {}: ratios [{}, {}] max {}",
                    u.label(),
                    r.min_ratio,
                    r.max_ratio,
                    r.max_residual
                );
                let ku = kelvin(&u, &p);
                let s = sample_region(&ku, d, 10, 4, 2.0, 0.05);
                let r = verify_harmonicity(&ku, &p, &s, 0.02);
                assert!(
                    r.passed,
                    "d={d} k={k} {}: ratios [{}, {}] max {}",
                    ku.label(),
                    r.min_ratio,
                    r.max_ratio,
                    r.max_residual
                );
            }
        }
    }
}
