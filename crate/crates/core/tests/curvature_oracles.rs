//! Cross-checks between the numerical curvature oracle and the closed-form
//! hypersurface formulas.

use proptest::prelude::*;
use ricci_core::exprfn::ScalarFn;
use ricci_core::hypersurface::{gauss_curvatures, GraphEmbedding};
use ricci_core::tensorlab::{
    christoffel, compare_ricci_forms, invert_spd, radial_frame, ricci_numeric,
    riemann_from_ricci_3d, rotsym_to_cartesian, scalar_curvature, FnMetric, MetricField,
    SymMatrix, DEFAULT_STEP,
};

fn embed(n: usize, h: &str, r_max: f64) -> GraphEmbedding {
    GraphEmbedding::new(n, ScalarFn::parse(h).unwrap(), r_max).unwrap()
}

fn point(n: usize, r: f64) -> Vec<f64> {
    // generic direction, scaled to radius r
    let dir: Vec<f64> = (0..n).map(|i| 1.0 + 0.37 * i as f64 * if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
    dir.into_iter().map(|x| r * x / norm).collect()
}

/// Cartesian Ricci predicted from radial/tangential frame components.
fn predicted_cartesian(e: &GraphEmbedding, x: &[f64]) -> SymMatrix {
    let t = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let ric = e.ricci_graph(t).unwrap();
    let tang = ric.ric_tt_unit / (t * t);
    SymMatrix::from_fn(x.len(), |i, j| {
        let p = x[i] * x[j] / (t * t);
        let d = if i == j { 1.0 } else { 0.0 };
        ric.ric_rr * p + tang * (d - p)
    })
}

#[test]
fn sphere_graph_is_einstein_numerically() {
    let e = embed(3, "sqrt(1 - t)", 0.95);
    let mf = e.cartesian_metric();
    let x = point(3, 0.4);
    let g = mf.metric(&x).unwrap();
    let est = ricci_numeric(&mf, &x, DEFAULT_STEP).unwrap();
    let err = est.ricci.max_abs_diff(&g.scale(2.0));
    assert!(err < 1e-5, "err {err}");
    assert!(est.asymmetry < 1e-6);
    let s = scalar_curvature(&mf, &x, DEFAULT_STEP).unwrap();
    assert!((s - 6.0).abs() < 1e-4, "scalar {s}");
}

#[test]
fn christoffel_of_sphere_graph_is_symmetric() {
    let e = embed(3, "sqrt(1 - t)", 0.95);
    let g = christoffel(&e.cartesian_metric(), &point(3, 0.6), DEFAULT_STEP).unwrap();
    for k in 0..3 {
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(g.get(k, i, j), g.get(k, j, i));
            }
        }
    }
}

#[test]
fn paraboloid_frame_components_numerically() {
    let e = embed(3, "t", 2.0);
    let mf = e.cartesian_metric();
    let x = point(3, 1.0);
    let g = mf.metric(&x).unwrap();
    let ric = ricci_numeric(&mf, &x, DEFAULT_STEP).unwrap().ricci;
    let frame = radial_frame(&g, &x);
    let framed = ric.congruence(&frame);
    assert!((framed.get(0, 0) - 0.32).abs() < 1e-4, "{}", framed.get(0, 0));
    assert!((framed.get(1, 1) - 0.96).abs() < 1e-4);
    assert!((framed.get(2, 2) - 0.96).abs() < 1e-4);
    assert!(framed.get(0, 1).abs() < 1e-4);
    let s = scalar_curvature(&mf, &x, DEFAULT_STEP).unwrap();
    assert!((s - 2.24).abs() < 1e-3, "scalar {s}");
}

#[test]
fn oracle_equivalence_over_profiles_and_dimensions() {
    let cases = [("sqrt(1 - t)", 0.95), ("t", 2.0), ("t^2", 2.0)];
    for (h, r_max) in cases {
        for n in [3, 4, 5] {
            let e = embed(n, h, r_max);
            let mf = e.cartesian_metric();
            for r in [0.3, 0.5, 0.7] {
                let x = point(n, r);
                let num = ricci_numeric(&mf, &x, DEFAULT_STEP).unwrap().ricci;
                let err = num.max_abs_diff(&predicted_cartesian(&e, &x));
                assert!(err < 1e-4, "h={h} n={n} r={r}: {err}");
            }
        }
    }
}

#[test]
fn frame_and_coordinate_routes_agree() {
    for h in ["sqrt(1 - t)", "t", "t^2"] {
        for n in [3, 4, 5] {
            let e = embed(n, h, 0.9);
            for i in 0..=18 {
                let r = 0.05 * i as f64;
                let (rad, tan) = e.ricci_frame(r).unwrap();
                let m = e.induced_metric(r).unwrap();
                let ric = e.ricci_graph(r).unwrap();
                let gc = gauss_curvatures(&e.principal_vector(r).unwrap());
                assert!((ric.ric_rr / m.g_rr - gc.ricci_frame.get(0, 0)).abs() < 1e-8);
                assert!((rad - gc.ricci_frame.get(0, 0)).abs() < 1e-8);
                assert!((tan - gc.ricci_frame.get(1, 1)).abs() < 1e-8);
                if r > 0.0 {
                    assert!((ric.ric_tt_unit / m.g_tt - gc.ricci_frame.get(n - 1, n - 1)).abs() < 1e-8);
                }
            }
        }
    }
}

#[test]
fn riemann_identities_on_gauss_output() {
    for h in [vec![0.3, -0.7, 1.1], vec![1.0, 2.0, -3.0, 0.5, 0.25]] {
        let gc = gauss_curvatures(&h);
        assert!(gc.riemann.pair_symmetry_defect() <= 1e-14);
        assert!(gc.riemann.antisymmetry_defect() <= 1e-14);
        assert!(gc.riemann.bianchi_defect() <= 1e-14);
    }
}

#[test]
fn sphere_normal_flip_leaves_curvature_unchanged() {
    let up = embed(3, "sqrt(1 - t)", 0.9);
    let down = embed(3, "-sqrt(1 - t)", 0.9);
    for r in [0.0, 0.2, 0.6] {
        let a = up.principal_vector(r).unwrap();
        let b = down.principal_vector(r).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x + y).abs() < 1e-15);
        }
        let (ga, gb) = (gauss_curvatures(&a), gauss_curvatures(&b));
        assert_eq!(ga.riemann, gb.riemann);
        assert_eq!(ga.ricci_frame, gb.ricci_frame);
        assert_eq!(ga.scalar, gb.scalar);
    }
}

#[test]
fn three_dimensional_riemann_from_numeric_ricci_matches_gauss() {
    let e = embed(3, "t", 2.0);
    let mf = e.cartesian_metric();
    let x = point(3, 1.0);
    let g = mf.metric(&x).unwrap();
    let ric = ricci_numeric(&mf, &x, DEFAULT_STEP).unwrap().ricci;
    let frame = radial_frame(&g, &x);
    let riemann = riemann_from_ricci_3d(&ric, &g).unwrap().in_frame(&frame);
    let gauss = gauss_curvatures(&e.principal_vector(1.0).unwrap()).riemann;
    let err = riemann.max_abs_diff(&gauss);
    assert!(err < 1e-4, "err {err}");

    // exact frame data: only rounding separates the two routes
    let exact = gauss_curvatures(&e.principal_vector(0.8).unwrap());
    let alg = riemann_from_ricci_3d(&exact.ricci_frame, &SymMatrix::identity(3)).unwrap();
    assert!(alg.max_abs_diff(&exact.riemann) < 1e-6);
}

#[test]
fn unit_three_sphere_riemann_is_constant_curvature() {
    let e = embed(3, "sqrt(1 - t)", 0.9);
    let mf = e.cartesian_metric();
    let x = point(3, 0.5);
    let g = mf.metric(&x).unwrap();
    let r = riemann_from_ricci_3d(&g.scale(2.0), &g).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    let c = g.get(i, k) * g.get(j, l) - g.get(i, l) * g.get(j, k);
                    assert!((r.get(i, j, k, l) - c).abs() < 1e-6);
                }
            }
        }
    }
}

/// Pullback of the Euclidean metric by a nonlinear diffeomorphism: flat, but
/// with non-constant coefficients so the truncation error is visible.
fn flat_in_curvilinear_chart() -> FnMetric<impl Fn(&[f64]) -> SymMatrix + Sync> {
    FnMetric::new(3, |x: &[f64]| {
        // Φ(x) = (x0 + 0.3 x1², x1 + 0.2 sin x2, x2 + 0.1 x0 x1)
        let jac = [
            [1.0, 0.6 * x[1], 0.0],
            [0.0, 1.0, 0.2 * x[2].cos()],
            [0.1 * x[1], 0.1 * x[0], 1.0],
        ];
        SymMatrix::from_fn(3, |i, j| (0..3).map(|k| jac[k][i] * jac[k][j]).sum())
    })
}

#[test]
fn halving_step_reduces_flat_residual_second_order() {
    let mf = flat_in_curvilinear_chart();
    let x = [0.4, -0.3, 0.8];
    let coarse = ricci_numeric(&mf, &x, 1e-2).unwrap().ricci.max_abs();
    let fine = ricci_numeric(&mf, &x, 5e-3).unwrap().ricci.max_abs();
    assert!(coarse > 1e-9, "residual {coarse} is at rounding level");
    assert!(coarse / fine >= 3.0, "ratio {}", coarse / fine);
}

#[test]
fn ricci_asymmetry_is_small_on_smooth_metrics() {
    let mf = flat_in_curvilinear_chart();
    let est = ricci_numeric(&mf, &[0.1, 0.5, -0.2], 1e-3).unwrap();
    assert!(est.asymmetry <= 1e-6, "{}", est.asymmetry);
    let cases = [
        ("sqrt(1 - t)", 0.95, 3, 0.4),
        ("sqrt(1 - t)", 0.95, 4, 0.4),
        ("t", 2.0, 3, 1.0),
        ("t", 2.0, 5, 0.5),
    ];
    for (h, r_max, n, r) in cases {
        let e = embed(n, h, r_max);
        let est = ricci_numeric(&e.cartesian_metric(), &point(n, r), 1e-3).unwrap();
        assert!(est.asymmetry <= 1e-6, "h={h} n={n} r={r}: {}", est.asymmetry);
    }
}

#[test]
fn second_derivative_form_differs_by_dimension_factor() {
    // flat: both forms vanish
    let flat = flat_in_curvilinear_chart();
    let cmp = compare_ricci_forms(&flat, &[0.2, 0.1, 0.3], 1e-3).unwrap();
    assert!(cmp.christoffel_form.max_abs() < 1e-5);
    assert!(cmp.second_derivative_form.max_abs() < 1e-5);
    // sphere: the 1/(n-1)-prefixed form is off by exactly that factor
    for n in [3, 4] {
        let e = embed(n, "sqrt(1 - t)", 0.9);
        let cmp = compare_ricci_forms(&e.cartesian_metric(), &point(n, 0.4), 1e-3).unwrap();
        let expect = 1.0 / (n - 1) as f64;
        assert!((cmp.ratio - expect).abs() < 1e-4, "n={n} ratio {}", cmp.ratio);
    }
}

fn rotation(a: f64, b: f64, c: f64) -> Vec<Vec<f64>> {
    let rz = |t: f64| [[t.cos(), -t.sin(), 0.0], [t.sin(), t.cos(), 0.0], [0.0, 0.0, 1.0]];
    let ry = |t: f64| [[t.cos(), 0.0, t.sin()], [0.0, 1.0, 0.0], [-t.sin(), 0.0, t.cos()]];
    let mul = |p: [[f64; 3]; 3], q: [[f64; 3]; 3]| {
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = (0..3).map(|k| p[i][k] * q[k][j]).sum();
            }
        }
        m
    };
    mul(mul(rz(a), ry(b)), rz(c)).iter().map(|r| r.to_vec()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn ricci_commutes_with_rotations(
        a in 0.0f64..6.28, b in 0.0f64..3.14, c in 0.0f64..6.28,
        x0 in -0.5f64..0.5, x1 in -0.5f64..0.5, x2 in 0.1f64..0.5,
    ) {
        let mf = rotsym_to_cartesian(|t| 1.0 + t * t, |t| t * t * (1.0 + 0.5 * t * t), 3);
        let q = rotation(a, b, c);
        let x = [x0, x1, x2];
        let qx: Vec<f64> = (0..3).map(|i| (0..3).map(|j| q[i][j] * x[j]).sum()).collect();
        let at_x = ricci_numeric(&mf, &x, DEFAULT_STEP).unwrap().ricci;
        let at_qx = ricci_numeric(&mf, &qx, DEFAULT_STEP).unwrap().ricci;
        let err = at_qx.max_abs_diff(&at_x.congruence(&q));
        prop_assert!(err <= 1e-5, "err {}", err);
    }
}

#[test]
fn metric_inverse_product_is_identity() {
    let e = embed(5, "t^2", 2.0);
    let g = e.cartesian_metric().metric(&point(5, 0.9)).unwrap();
    let prod = g.mul_dense(&invert_spd(&g).unwrap());
    for (i, row) in prod.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            assert!((v - if i == j { 1.0 } else { 0.0 }).abs() < 1e-10);
        }
    }
}
