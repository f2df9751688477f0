//! The forward Ricci map checked against finite-difference curvature of the
//! metric it is meant to describe.

use ricci_core::exprfn::ScalarFn;
use ricci_core::rotsym::{compare_metric_convention, ClosedFormProfile, MetricConvention};
use ricci_core::tensorlab::DEFAULT_STEP;

fn profile(n: usize, f: &str, r: &str) -> ClosedFormProfile {
    ClosedFormProfile::new(n, ScalarFn::parse(f).unwrap(), ScalarFn::parse(r).unwrap()).unwrap()
}

#[test]
fn conformal_metric_reproduces_forward_map() {
    for (f, r) in [("-t^2", "t"), ("-t^2/2", "t"), ("t^2/3 - t^4/5", "t + t^3/4")] {
        for n in [3, 4] {
            for t in [0.3, 0.6] {
                let cmp = compare_metric_convention(&profile(n, f, r), t, MetricConvention::Conformal, DEFAULT_STEP)
                    .unwrap();
                assert!(cmp.max_abs_diff() < 1e-4, "f={f} r={r} n={n} t={t}: {cmp:?}");
            }
        }
    }
}

#[test]
fn printed_metric_does_not_reproduce_forward_map() {
    let cmp = compare_metric_convention(&profile(3, "-t^2", "t"), 0.5, MetricConvention::Printed, DEFAULT_STEP)
        .unwrap();
    println!("printed convention on f = -t^2, r = t, n = 3, t = 0.5: {cmp:?}");
    assert!(cmp.max_abs_diff() > 1e-2);
}
