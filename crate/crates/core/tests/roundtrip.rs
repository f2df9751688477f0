//! Forward map followed by the inverse pipeline recovers the generating metric.

use ricci_core::exprfn::{ScalarFn, SmoothFn};
use ricci_core::numerics::uniform_grid;
use ricci_core::potential::{HaltReason, PotentialCurve, Seed, SeparatrixSeries};
use ricci_core::reconstruct::{
    ricci_potential_from_profile, solve, solve_f, solve_r, Solution, SolveOptions,
};
use ricci_core::rotsym::{ClosedFormProfile, MetricProfile};

const GENERATORS: [(&str, &str); 4] = [
    ("-t^2", "t"),
    ("-t^2/2", "t"),
    ("t^2/3 - t^4/5", "t + t^3/4"),
    ("-t^2 + t^3/3", "t"),
];

fn profile(n: usize, f: &str, r: &str) -> ClosedFormProfile {
    ClosedFormProfile::new(n, ScalarFn::parse(f).unwrap(), ScalarFn::parse(r).unwrap()).unwrap()
}

fn run(gen: &ClosedFormProfile, t_max: f64, step: f64) -> Solution {
    let tensor = gen.forward_tensor(t_max).unwrap();
    solve(&tensor, &SolveOptions::new(step)).unwrap()
}

/// Sup-norm errors of the recovered `(r, f)` on `[0, t_hi]`.
fn profile_errors(gen: &ClosedFormProfile, p: &MetricProfile, t_hi: f64) -> (f64, f64) {
    let (mut er, mut ef) = (0.0f64, 0.0f64);
    for (i, &t) in p.grid.iter().enumerate() {
        if t > t_hi + 1e-12 {
            break;
        }
        er = er.max((p.r[i] - gen.r.value(t).unwrap()).abs());
        ef = ef.max((p.f[i] - gen.f.value(t).unwrap()).abs());
    }
    (er, ef)
}

#[test]
fn generators_are_recovered() {
    let t_max = 0.5;
    for n in [3usize, 4, 5] {
        for (f, r) in GENERATORS {
            let gen = profile(n, f, r);
            let sol = run(&gen, t_max, 1e-3);
            let rec = &sol.reconstruction;
            let (er, ef) = profile_errors(&gen, &rec.profile, 0.8 * t_max);
            assert!(er <= 1e-4 && ef <= 1e-4, "n={n} ({f}, {r}): r {er:e} f {ef:e}");
            let w_back = ricci_potential_from_profile(&rec.profile);
            let dw = w_back.iter().zip(&rec.w).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(dw <= 1e-5, "n={n} ({f}, {r}): potential {dw:e}");
            assert!(rec.ricci_residuals.max() <= 1e-5, "n={n}: {:?}", rec.ricci_residuals);
        }
    }
}

#[test]
fn recovered_profile_satisfies_origin_conditions() {
    let sol = run(&profile(4, "t^2/3 - t^4/5", "t + t^3/4"), 0.5, 1e-3);
    let p = &sol.reconstruction.profile;
    assert_eq!(p.grid[0], 0.0);
    assert_eq!(p.r[0], 0.0);
    assert_eq!(p.rp[0], 1.0);
    assert_eq!(p.f[0], 0.0);
    assert!(p.rp.iter().all(|&v| v > 0.0));
    assert!(sol.reconstruction.w[0] == 0.0);
    let rec = &sol.reconstruction;
    for v in [rec.residual_r, rec.residual_f, rec.ricci_residuals.radial, rec.ricci_residuals.tangential] {
        assert!(v.is_finite());
    }
    assert!(rec.residual_r < 1e-6 && rec.residual_f < 1e-6, "{} {}", rec.residual_r, rec.residual_f);
}

#[test]
fn constant_shift_of_conformal_factor_changes_nothing() {
    let base = run(&profile(3, "-t^2", "t"), 0.5, 1e-3);
    let shifted = run(&profile(3, "3 - t^2", "t"), 0.5, 1e-3);
    let a = &base.reconstruction;
    let b = &shifted.reconstruction;
    assert_eq!(a.profile.grid, b.profile.grid);
    let close = |x: &[f64], y: &[f64]| x.iter().zip(y).all(|(u, v)| (u - v).abs() <= 1e-12);
    assert!(close(&a.w, &b.w));
    assert!(close(&a.profile.r, &b.profile.r));
    assert!(close(&a.profile.f, &b.profile.f));
    assert_eq!(b.profile.f[0], 0.0);
}

#[test]
fn constant_conformal_factor_gives_zero_potential() {
    let grid: Vec<f64> = (0..=50).map(|i| i as f64 * 0.01).collect();
    let flat = profile(3, "2", "t").sample(&grid).unwrap();
    let w = ricci_potential_from_profile(&flat);
    assert!(w.iter().all(|&v| v == 0.0));
    assert_eq!(w[0], 0.0);
}

/// Exact potential samples `w = −r f′/r′` of a generator on a uniform grid.
fn exact_curve(n: usize, w_src: &str, t_end: f64, step: f64) -> PotentialCurve {
    let w = ScalarFn::parse(w_src).unwrap();
    let t = uniform_grid(0.0, t_end, step);
    let jets: Vec<_> = t.iter().map(|&s| w.jet2(s).unwrap()).collect();
    let c = w.series(0.0, 4).unwrap();
    PotentialCurve {
        n,
        w: jets.iter().map(|j| j.v).collect(),
        p: jets.iter().map(|j| j.d1).collect(),
        t,
        seed: Seed::Quadrature,
        halt: HaltReason::ReachedEnd,
        series: SeparatrixSeries { w2: c.derivative_at(2), w3: c.derivative_at(3) },
    }
}

fn quadrature_error(gen: &ClosedFormProfile, w_src: &str, step: f64) -> f64 {
    let tensor = gen.forward_tensor(0.5).unwrap();
    let curve = exact_curve(gen.n, w_src, 0.5, step);
    let rad = solve_r(&curve, tensor.phi.as_ref()).unwrap();
    let conf = solve_f(&curve, tensor.phi.as_ref()).unwrap();
    let mut err = 0.0f64;
    for (i, &t) in rad.t.iter().enumerate() {
        err = err.max((rad.r[i] - gen.r.value(t).unwrap()).abs());
        err = err.max((conf.f[i] - gen.f.value(t).unwrap()).abs());
    }
    err
}

#[test]
fn recovery_quadrature_is_exact_on_gold_family() {
    for n in [3usize, 4, 5] {
        let gen = profile(n, "-t^2", "t");
        for step in [0.05, 0.02, 0.01] {
            let err = quadrature_error(&gen, "2*t^2", step);
            assert!(err < 1e-13, "n={n} step={step}: {err:e}");
        }
    }
}

#[test]
fn recovery_quadrature_converges_at_fourth_order() {
    let w = "-(t + t^3/4)*(2*t/3 - 4*t^3/5)/(1 + 3*t^2/4)";
    for n in [3usize, 4, 5] {
        let gen = profile(n, "t^2/3 - t^4/5", "t + t^3/4");
        let errs: Vec<f64> = [0.02, 0.01, 0.005].iter().map(|&h| quadrature_error(&gen, w, h)).collect();
        assert!(errs[0] / errs[1] >= 12.0 && errs[1] / errs[2] >= 12.0, "n={n}: {errs:?}");
    }
}
