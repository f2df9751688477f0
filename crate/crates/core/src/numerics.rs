//! Small numerical kernels shared by the solver modules: finite-difference
//! weights on arbitrary grids, cumulative quadrature, and root bracketing.

/// Fornberg's finite-difference weights.
///
/// Returns `w[m][j]`, the weight of `ys[j]` in the `m`-th derivative at `x0`,
/// for `m = 0..=order`.
pub fn fd_weights(x0: f64, xs: &[f64], order: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Index range of a `width`-point stencil around `x0` on a sorted grid.
pub fn stencil(xs: &[f64], x0: f64, width: usize) -> std::ops::Range<usize> {
    let n = xs.len();
    let width = width.min(n);
    let i = xs.partition_point(|&x| x < x0);
    let nearest = if i == 0 {
        0
    } else if i == n || (x0 - xs[i - 1]) <= (xs[i] - x0) {
        i - 1
    } else {
        i
    };
    let start = nearest.saturating_sub(width / 2).min(n - width);
    start..start + width
}

/// Value and first derivative at `x0` of the degree-4 local interpolant of
/// sampled data (fourth-order accurate on smooth data).
pub fn local_value_and_slope(xs: &[f64], ys: &[f64], x0: f64) -> (f64, f64) {
    let idx = stencil(xs, x0, 5);
    let w = fd_weights(x0, &xs[idx.clone()], 1);
    let ys = &ys[idx];
    let v = w[0].iter().zip(ys).map(|(a, b)| a * b).sum();
    let d = w[1].iter().zip(ys).map(|(a, b)| a * b).sum();
    (v, d)
}

/// First derivative of sampled data at every grid point, fourth-order.
pub fn differentiate_samples(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    xs.iter()
        .map(|&x| local_value_and_slope(xs, ys, x).1)
        .collect()
}

/// Cumulative integral `∫_{xs[0]}^{xs[i]} y` for every `i`, integrating the
/// local cubic through four neighbouring samples on each interval. Fourth
/// order on smooth data; the grid may be non-uniform.
pub fn cumulative_integral(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut out = vec![0.0; n];
    if n < 2 {
        return out;
    }
    // 2-point Gauss-Legendre integrates the cubic exactly.
    let g = 0.5 / 3f64.sqrt();
    for i in 0..n - 1 {
        let (a, b) = (xs[i], xs[i + 1]);
        let h = b - a;
        let start = if n < 4 { 0 } else { i.saturating_sub(1).min(n - 4) };
        let end = (start + 4).min(n);
        let nodes = &xs[start..end];
        let vals = &ys[start..end];
        let mut acc = 0.0;
        for q in [0.5 - g, 0.5 + g] {
            let x = a + q * h;
            let w = fd_weights(x, nodes, 0);
            acc += w[0].iter().zip(vals).map(|(w, y)| w * y).sum::<f64>();
        }
        out[i + 1] = out[i] + 0.5 * h * acc;
    }
    out
}

/// Bisection on a bracket with `f(lo)` and `f(hi)` of opposite sign (or one
/// of them zero), to absolute width `tol`.
pub fn bisect<E>(
    mut f: impl FnMut(f64) -> Result<f64, E>,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> Result<f64, E> {
    let mut flo = f(lo)?;
    if flo == 0.0 {
        return Ok(lo);
    }
    for _ in 0..200 {
        if (hi - lo).abs() <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `0, h, 2h, …` up to `end`, with the last interval shortened to land
/// exactly on `end`.
pub fn uniform_grid(start: f64, end: f64, step: f64) -> Vec<f64> {
    let n = ((end - start) / step - 1e-9).ceil().max(1.0) as usize;
    let mut xs: Vec<f64> = (0..n).map(|i| start + i as f64 * step).collect();
    xs.push(end);
    xs
}
