use dunkl_core::estimates::{baseline, baseline_grid, scan_theorem, Theorem, BASELINE_SAMPLES, BASELINE_SEED};
use dunkl_core::report::fmt_f64;
use dunkl_core::Params;

#[test]
fn every_grid_entry_has_a_baseline() {
    for theorem in Theorem::ALL {
        for (d, k) in baseline_grid(theorem) {
            let b = baseline(theorem, d, k, BASELINE_SAMPLES, BASELINE_SEED)
                .unwrap_or_else(|| panic!("missing baseline for {theorem} d={d} k={k}"));
            assert!(b.ratio_min > 0.0 && b.ratio_max.is_finite() && b.ratio_min <= b.ratio_max);
        }
    }
}

/// Rewrites `baselines/scan_baselines.csv`. Run with `--ignored` after an
/// intentional change to a kernel or envelope.
#[test]
#[ignore]
fn regenerate_scan_baselines() {
    let mut out = String::from("theorem,d,k,n_samples,seed,ratio_min,ratio_max\n");
    for theorem in Theorem::ALL {
        for (d, k) in baseline_grid(theorem) {
            let p = Params::new(d, k).unwrap();
            let r = scan_theorem(theorem, &p, BASELINE_SAMPLES, BASELINE_SEED).unwrap();
            assert!(r.is_finite_band(), "{theorem} d={d} k={k}");
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                theorem.name(),
                d,
                k,
                BASELINE_SAMPLES,
                BASELINE_SEED,
                fmt_f64(r.ratio_min),
                fmt_f64(r.ratio_max)
            ));
        }
    }
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/baselines/scan_baselines.csv");
    std::fs::write(path, out).unwrap();
}
