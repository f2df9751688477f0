//! Rotationally symmetric tensors `φ(t)dt² + t²ψ(t)dΘ²` and metrics
//! `e^{2f}(dr² + r²dΘ²)` with `r = r(t)`: definiteness validation and the
//! forward Ricci map `(f, r) ↦ (α, β)`.
//!
//! The forward map is
//!
//! ```text
//! α = −(n−1)[f_rr + f_r/r]
//! β = −[f_rr + (2n−3) f_r/r + (n−2) f_r²]
//! ```
//!
//! with `f_r = f′/r′`, `f_rr = (f_r)′/r′`, so that `Ric = α dr² + r²β dΘ²`.

use std::fmt;
use std::sync::{Arc, Mutex};

use thiserror::Error;

use crate::exprfn::{EvalError, Jet2, ScalarFn, Series, SmoothFn};
use crate::numerics::{bisect, differentiate_samples, local_value_and_slope};
use crate::tensorlab::{radial_frame, ricci_numeric, rotsym_to_cartesian, MetricField, TensorError};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum RotSymError {
    #[error("dimension must be at least 2, got {0}")]
    Dimension(usize),
    #[error("t_max must be positive and finite, got {0}")]
    Range(f64),
    #[error("grid size must be at least 16, got {0}")]
    GridSize(usize),
    #[error("profile arrays have inconsistent lengths")]
    Shape,
    #[error("grid is not strictly increasing at index {0}")]
    Grid(usize),
    #[error("division by zero at t = {t}: {what}")]
    DivisionByZero { t: f64, what: &'static str },
    #[error("profile invariant violated at t = {t}: {what}")]
    Invariant { t: f64, what: String },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// `φ(t)dt² + t²ψ(t)dΘ²` on `ℝⁿ`, considered on `[0, t_max]`.
#[derive(Clone, Debug)]
pub struct RotSymTensor {
    pub n: usize,
    pub phi: Arc<dyn SmoothFn>,
    pub psi: Arc<dyn SmoothFn>,
    pub t_max: f64,
}

impl RotSymTensor {
    pub fn new(
        n: usize,
        phi: Arc<dyn SmoothFn>,
        psi: Arc<dyn SmoothFn>,
        t_max: f64,
    ) -> Result<Self, RotSymError> {
        if n < 2 {
            return Err(RotSymError::Dimension(n));
        }
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(RotSymError::Range(t_max));
        }
        Ok(RotSymTensor { n, phi, psi, t_max })
    }

    pub fn from_exprs(n: usize, phi: ScalarFn, psi: ScalarFn, t_max: f64) -> Result<Self, RotSymError> {
        Self::new(n, phi.shared(), psi.shared(), t_max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Verdict {
    PositiveDefinite,
    NegativeDefinite,
    /// First point where `φ` or `ψ` vanishes or changes sign.
    Singular { t: f64 },
    /// `φ(0) ≠ ψ(0)`.
    Inconsistent { phi0: f64, psi0: f64 },
}

impl Verdict {
    pub fn is_definite(&self) -> bool {
        matches!(self, Verdict::PositiveDefinite | Verdict::NegativeDefinite)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::PositiveDefinite => f.write_str("positive definite"),
            Verdict::NegativeDefinite => f.write_str("negative definite"),
            Verdict::Singular { t } => write!(f, "singular tensor at t = {t}"),
            Verdict::Inconsistent { phi0, psi0 } => {
                write!(f, "inconsistent tensor: phi(0) = {phi0} differs from psi(0) = {psi0}")
            }
        }
    }
}

const CONSISTENCY_TOL: f64 = 1e-8;
const SINGULAR_TOL: f64 = 1e-10;

/// Checks that `T` keeps one sign on `[0, t_max]` and that `φ(0) = ψ(0)`.
///
/// Scans a uniform grid of `grid_size` intervals and refines the first sign
/// failure of `min(sφ, sψ)` by bisection, where `s = sign φ(0)`.
pub fn definiteness_check(tensor: &RotSymTensor, grid_size: usize) -> Result<Verdict, RotSymError> {
    if grid_size < 16 {
        return Err(RotSymError::GridSize(grid_size));
    }
    let phi0 = tensor.phi.value(0.0)?;
    let psi0 = tensor.psi.value(0.0)?;
    if phi0 == 0.0 || psi0 == 0.0 || phi0 * psi0 < 0.0 {
        return Ok(Verdict::Singular { t: 0.0 });
    }
    if (phi0 - psi0).abs() > CONSISTENCY_TOL {
        return Ok(Verdict::Inconsistent { phi0, psi0 });
    }
    let sign = phi0.signum();
    let margin = |t: f64| -> Result<f64, EvalError> {
        Ok((sign * tensor.phi.value(t)?).min(sign * tensor.psi.value(t)?))
    };
    let step = tensor.t_max / grid_size as f64;
    let mut prev = 0.0;
    for i in 1..=grid_size {
        let t = if i == grid_size { tensor.t_max } else { i as f64 * step };
        if margin(t)? <= 0.0 {
            let t_star = bisect(margin, prev, t, SINGULAR_TOL)?;
            return Ok(Verdict::Singular { t: t_star });
        }
        prev = t;
    }
    Ok(if sign > 0.0 {
        Verdict::PositiveDefinite
    } else {
        Verdict::NegativeDefinite
    })
}

/// The forward Ricci pair `(α, β)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RicciPair {
    pub alpha: f64,
    pub beta: f64,
}

fn ricci_pair(n: usize, f_r: f64, f_rr: f64, f_r_over_r: f64) -> RicciPair {
    let n = n as f64;
    RicciPair {
        alpha: -(n - 1.0) * (f_rr + f_r_over_r),
        beta: -(f_rr + (2.0 * n - 3.0) * f_r_over_r + (n - 2.0) * f_r * f_r),
    }
}

/// A profile `(f, r)` given by closed-form expressions; derivatives come from
/// Taylor arithmetic, and the removable singularities at `t = 0` are cancelled
/// exactly.
#[derive(Clone, Debug)]
pub struct ClosedFormProfile {
    pub n: usize,
    pub f: ScalarFn,
    pub r: ScalarFn,
}

/// Taylor lengths for forward evaluation: three output coefficients plus
/// two derivatives of `f`, and at `t = 0` one cancellation of `r` and two of
/// `t²`.
const FORWARD_SERIES_LEN: usize = 5;
const FORWARD_SERIES_LEN_ORIGIN: usize = 9;

impl ClosedFormProfile {
    pub fn new(n: usize, f: ScalarFn, r: ScalarFn) -> Result<Self, RotSymError> {
        if n < 2 {
            return Err(RotSymError::Dimension(n));
        }
        Ok(ClosedFormProfile { n, f, r })
    }

    /// Taylor series of `(α, β, r, r′)` about `t`.
    fn series(&self, t: f64, len: usize) -> Result<[Series; 4], RotSymError> {
        let f = self.f.series(t, len)?;
        let r = self.r.series(t, len)?;
        let rp = r.derivative();
        if rp.coeffs()[0] <= 0.0 {
            return Err(RotSymError::DivisionByZero { t, what: "r' <= 0" });
        }
        let f_r = f.derivative() / rp.clone();
        let f_rr = f_r.derivative() / rp.clone();
        let f_r_over_r = f_r
            .div_cancel(&r)
            .ok_or(RotSymError::DivisionByZero { t, what: "r = 0" })?;
        let n = self.n as f64;
        let alpha = (f_rr.clone() + f_r_over_r.clone()).scale(-(n - 1.0));
        let beta = -(f_rr + f_r_over_r.scale(2.0 * n - 3.0) + (f_r.clone() * f_r).scale(n - 2.0));
        Ok([alpha, beta, r, rp])
    }

    pub fn ricci_forward(&self, t: f64) -> Result<RicciPair, RotSymError> {
        let [alpha, beta, ..] = self.series(t, 5)?;
        Ok(RicciPair {
            alpha: alpha.coeffs()[0],
            beta: beta.coeffs()[0],
        })
    }

    /// Jets of `φ̂ = α r′²` and `ψ̂ = r²β/t²` at `t`, continuous at `t = 0`.
    pub fn forward_jets(&self, t: f64) -> Result<[Jet2; 2], RotSymError> {
        let len = if t == 0.0 {
            FORWARD_SERIES_LEN_ORIGIN
        } else {
            FORWARD_SERIES_LEN
        };
        let [alpha, beta, r, rp] = self.series(t, len)?;
        let phi_hat = alpha * rp.clone() * rp;
        let var = Series::variable(t, len);
        let psi_hat = (r.clone() * r * beta)
            .div_cancel(&(var.clone() * var))
            .ok_or(RotSymError::DivisionByZero { t, what: "t = 0" })?;
        Ok([phi_hat.to_jet2(), psi_hat.to_jet2()])
    }

    /// The tensor `Ric(g) = φ̂ dt² + t²ψ̂ dΘ²` of this profile.
    pub fn forward_tensor(&self, t_max: f64) -> Result<RotSymTensor, RotSymError> {
        let shared = Arc::new(ForwardCache {
            profile: self.clone(),
            last: Mutex::new(None),
        });
        RotSymTensor::new(
            self.n,
            Arc::new(ForwardComponent { shared: shared.clone(), which: 0 }),
            Arc::new(ForwardComponent { shared, which: 1 }),
            t_max,
        )
    }

    /// Samples the profile on `grid`.
    pub fn sample(&self, grid: &[f64]) -> Result<MetricProfile, RotSymError> {
        let mut cols = [vec![], vec![], vec![], vec![]];
        for &t in grid {
            let f = self.f.jet2(t)?;
            let r = self.r.jet2(t)?;
            cols[0].push(f.v);
            cols[1].push(r.v);
            cols[2].push(r.d1);
            cols[3].push(f.d1);
        }
        let [f, r, rp, fp] = cols;
        MetricProfile::new(self.n, grid.to_vec(), f, r, rp, fp)
    }
}

/// Both forward components are usually requested at the same `t` in a row;
/// the last evaluation is kept.
#[derive(Debug)]
struct ForwardCache {
    profile: ClosedFormProfile,
    last: Mutex<Option<(f64, [Jet2; 2])>>,
}

impl ForwardCache {
    fn jets(&self, t: f64) -> Result<[Jet2; 2], RotSymError> {
        if let Some((t0, jets)) = *self.last.lock().unwrap() {
            if t0.to_bits() == t.to_bits() {
                return Ok(jets);
            }
        }
        let jets = self.profile.forward_jets(t)?;
        *self.last.lock().unwrap() = Some((t, jets));
        Ok(jets)
    }
}

/// One component of the forward tensor of a [`ClosedFormProfile`], usable
/// wherever a [`SmoothFn`] is expected.
#[derive(Clone, Debug)]
pub struct ForwardComponent {
    shared: Arc<ForwardCache>,
    which: usize,
}

impl SmoothFn for ForwardComponent {
    fn jet2(&self, t: f64) -> Result<Jet2, EvalError> {
        match self.shared.jets(t) {
            Ok(jets) => Ok(jets[self.which]),
            Err(RotSymError::Eval(e)) => Err(e),
            Err(e) => Err(EvalError::NonFinite {
                subexpr: e.to_string(),
                value: f64::NAN,
            }),
        }
    }
}

/// A sampled profile `(f, r)` with first derivatives.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricProfile {
    pub n: usize,
    pub grid: Vec<f64>,
    pub f: Vec<f64>,
    pub r: Vec<f64>,
    pub rp: Vec<f64>,
    pub fp: Vec<f64>,
}

impl MetricProfile {
    pub fn new(
        n: usize,
        grid: Vec<f64>,
        f: Vec<f64>,
        r: Vec<f64>,
        rp: Vec<f64>,
        fp: Vec<f64>,
    ) -> Result<Self, RotSymError> {
        if n < 2 {
            return Err(RotSymError::Dimension(n));
        }
        let m = grid.len();
        if m < 5 || [f.len(), r.len(), rp.len(), fp.len()].iter().any(|&l| l != m) {
            return Err(RotSymError::Shape);
        }
        if let Some(i) = (1..m).find(|&i| !(grid[i] > grid[i - 1])) {
            return Err(RotSymError::Grid(i));
        }
        Ok(MetricProfile { n, grid, f, r, rp, fp })
    }

    /// Checks `r(0) = 0`, `r′(0) = 1`, `f(0) = 0` to `tol` and `r′ > 0`.
    pub fn check_invariants(&self, tol: f64) -> Result<(), RotSymError> {
        let bad = |t: f64, what: String| Err(RotSymError::Invariant { t, what });
        if self.grid[0] != 0.0 {
            return bad(self.grid[0], "grid does not start at 0".into());
        }
        if self.r[0].abs() > tol {
            return bad(0.0, format!("r(0) = {}", self.r[0]));
        }
        if (self.rp[0] - 1.0).abs() > tol {
            return bad(0.0, format!("r'(0) = {}", self.rp[0]));
        }
        if self.f[0].abs() > tol {
            return bad(0.0, format!("f(0) = {}", self.f[0]));
        }
        for (i, &t) in self.grid.iter().enumerate() {
            if !(self.rp[i] > 0.0) {
                return bad(t, format!("r' = {}", self.rp[i]));
            }
            if ![self.f[i], self.r[i], self.fp[i]].iter().all(|v| v.is_finite()) {
                return bad(t, "non-finite sample".into());
            }
        }
        Ok(())
    }

    fn f_r(&self) -> Vec<f64> {
        self.fp.iter().zip(&self.rp).map(|(a, b)| a / b).collect()
    }

    /// `(α, β)` at every grid point, from fourth-order differencing of `f_r`.
    /// Where `r = 0` the ratio `f_r/r` is replaced by its limit `f_rr`.
    pub fn ricci_forward_grid(&self) -> Result<Vec<RicciPair>, RotSymError> {
        let f_r = self.f_r();
        let df_r = differentiate_samples(&self.grid, &f_r);
        (0..self.grid.len())
            .map(|i| {
                let t = self.grid[i];
                if !(self.rp[i] > 0.0) {
                    return Err(RotSymError::DivisionByZero { t, what: "r' <= 0" });
                }
                let f_rr = df_r[i] / self.rp[i];
                let ratio = if self.r[i] == 0.0 {
                    if t > 0.0 {
                        return Err(RotSymError::DivisionByZero { t, what: "r = 0" });
                    }
                    f_rr
                } else {
                    f_r[i] / self.r[i]
                };
                Ok(ricci_pair(self.n, f_r[i], f_rr, ratio))
            })
            .collect()
    }

    /// `(α, β)` at an arbitrary `t` in the sampled range.
    pub fn ricci_forward(&self, t: f64) -> Result<RicciPair, RotSymError> {
        let (r, _) = local_value_and_slope(&self.grid, &self.r, t);
        let (rp, _) = local_value_and_slope(&self.grid, &self.rp, t);
        let (f_r, df_r) = local_value_and_slope(&self.grid, &self.f_r(), t);
        if !(rp > 0.0) {
            return Err(RotSymError::DivisionByZero { t, what: "r' <= 0" });
        }
        if r == 0.0 && t > 0.0 {
            return Err(RotSymError::DivisionByZero { t, what: "r = 0" });
        }
        let f_rr = df_r / rp;
        let ratio = if t == 0.0 { f_rr } else { f_r / r };
        Ok(ricci_pair(self.n, f_r, f_rr, ratio))
    }

    /// Samples of `φ̂ = α r′²` and `ψ̂ = r²β/t²` on the grid; at `t = 0`,
    /// `ψ̂ = r′(0)²β(0)`.
    pub fn forward_tensor(&self) -> Result<ForwardSamples, RotSymError> {
        let pairs = self.ricci_forward_grid()?;
        let mut phi = Vec::with_capacity(pairs.len());
        let mut psi = Vec::with_capacity(pairs.len());
        for (i, p) in pairs.iter().enumerate() {
            let t = self.grid[i];
            phi.push(p.alpha * self.rp[i] * self.rp[i]);
            let ratio = if t == 0.0 { self.rp[i] } else { self.r[i] / t };
            psi.push(ratio * ratio * p.beta);
        }
        Ok(ForwardSamples {
            grid: self.grid.clone(),
            phi,
            psi,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ForwardSamples {
    pub grid: Vec<f64>,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
}

/// How a profile `(f, r)` is turned into a metric for the curvature
/// cross-check against the forward map.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MetricConvention {
    /// `2e^f [r′ dt² + r² dΘ²]`, with `r′` to the first power.
    Printed,
    /// `e^{2f} [r′² dt² + r² dΘ²] = e^{2f}(dr² + r² dΘ²)`, the metric whose
    /// Ricci tensor the forward map computes.
    Conformal,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConventionComparison {
    /// From the forward map.
    pub forward: RicciPair,
    /// Recovered from the finite-difference Ricci tensor of the Cartesian
    /// realization.
    pub numeric: RicciPair,
}

impl ConventionComparison {
    pub fn max_abs_diff(&self) -> f64 {
        (self.forward.alpha - self.numeric.alpha)
            .abs()
            .max((self.forward.beta - self.numeric.beta).abs())
    }
}

/// Compares the forward map at radius `t` against the finite-difference
/// Ricci tensor of the metric built from the profile under `convention`.
pub fn compare_metric_convention(
    profile: &ClosedFormProfile,
    t: f64,
    convention: MetricConvention,
    h: f64,
) -> Result<ConventionComparison, RotSymError> {
    if !(t > 0.0) {
        return Err(RotSymError::Range(t));
    }
    let n = profile.n;
    let eval = |t: f64| -> Option<(Jet2, Jet2)> {
        Some((profile.f.jet2(t).ok()?, profile.r.jet2(t).ok()?))
    };
    let a = |t: f64| match (eval(t), convention) {
        (Some((f, r)), MetricConvention::Printed) => 2.0 * f.v.exp() * r.d1,
        (Some((f, r)), MetricConvention::Conformal) => (2.0 * f.v).exp() * r.d1 * r.d1,
        (None, _) => f64::NAN,
    };
    let b = |t: f64| match (eval(t), convention) {
        (Some((f, r)), MetricConvention::Printed) => 2.0 * f.v.exp() * r.v * r.v,
        (Some((f, r)), MetricConvention::Conformal) => (2.0 * f.v).exp() * r.v * r.v,
        (None, _) => f64::NAN,
    };
    let mf = rotsym_to_cartesian(a, b, n);
    let mut x = vec![0.0; n];
    x[0] = t;
    let g = mf.metric(&x)?;
    let ric = ricci_numeric(&mf, &x, h)?.ricci;
    // radial_frame gives g-orthonormal vectors; rescale back to ∂_t and a
    // Euclidean-unit tangential vector.
    let frame = radial_frame(&g, &x);
    let framed = ric.congruence(&frame);
    let a_t = g.get(0, 0);
    let tang = g.get(1, 1);
    let ric_tt = framed.get(0, 0) * a_t;
    let ric_unit_tangent = framed.get(1, 1) * tang;
    let (r, rp) = {
        let j = profile.r.jet2(t)?;
        (j.v, j.d1)
    };
    Ok(ConventionComparison {
        forward: profile.ricci_forward(t)?,
        numeric: RicciPair {
            alpha: ric_tt / (rp * rp),
            beta: ric_unit_tangent * t * t / (r * r),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tensor(n: usize, phi: &str, psi: &str, t_max: f64) -> RotSymTensor {
        RotSymTensor::from_exprs(n, ScalarFn::parse(phi).unwrap(), ScalarFn::parse(psi).unwrap(), t_max)
            .unwrap()
    }

    fn profile(n: usize, f: &str, r: &str) -> ClosedFormProfile {
        ClosedFormProfile::new(n, ScalarFn::parse(f).unwrap(), ScalarFn::parse(r).unwrap()).unwrap()
    }

    #[test]
    fn definiteness_verdicts() {
        let check = |phi, psi| definiteness_check(&tensor(3, phi, psi, 2.0), 64).unwrap();
        assert_eq!(check("1", "1"), Verdict::PositiveDefinite);
        assert_eq!(check("-1", "-1"), Verdict::NegativeDefinite);
        assert_eq!(check("t", "t"), Verdict::Singular { t: 0.0 });
        assert_eq!(check("1", "2"), Verdict::Inconsistent { phi0: 1.0, psi0: 2.0 });
        assert_eq!(check("t", "t").to_string(), "singular tensor at t = 0");
    }

    #[test]
    fn singular_point_is_refined() {
        let v = definiteness_check(&tensor(3, "8", "8 - 4*t^2", 2.0), 16).unwrap();
        let Verdict::Singular { t } = v else { panic!("{v:?}") };
        assert!((t - 2f64.sqrt()).abs() <= 1e-10, "{t}");
        // a zero between grid points
        let v = definiteness_check(&tensor(3, "1 - 3*t", "1 - 3*t", 1.0), 16).unwrap();
        let Verdict::Singular { t } = v else { panic!("{v:?}") };
        assert!((t - 1.0 / 3.0).abs() <= 1e-10);
    }

    #[test]
    fn grid_size_precondition() {
        assert_eq!(
            definiteness_check(&tensor(3, "1", "1", 1.0), 8),
            Err(RotSymError::GridSize(8))
        );
    }

    #[test]
    fn flat_profile_has_zero_ricci() {
        let p = profile(4, "0", "t");
        for t in [0.0, 0.3, 1.0] {
            let q = p.ricci_forward(t).unwrap();
            assert_eq!((q.alpha, q.beta), (0.0, 0.0));
        }
    }

    #[test]
    fn gold_profile_values() {
        let p = profile(3, "-t^2", "t");
        let q = p.ricci_forward(1.0).unwrap();
        assert!((q.alpha - 8.0).abs() < 1e-12 && (q.beta - 4.0).abs() < 1e-12);
        for n in [2, 3, 4, 5, 8] {
            let p = profile(n, "-t^2", "t");
            for t in [0.0, 0.2, 0.9, 1.7] {
                let q = p.ricci_forward(t).unwrap();
                assert!((q.alpha - 4.0 * (n as f64 - 1.0)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gold_forward_tensor() {
        let tensor = profile(3, "-t^2", "t").forward_tensor(2.0).unwrap();
        for t in [0.0, 0.1, 0.5, 1.3] {
            let phi = tensor.phi.jet2(t).unwrap();
            let psi = tensor.psi.jet2(t).unwrap();
            assert!((phi.v - 8.0).abs() < 1e-12 && phi.d1.abs() < 1e-12);
            assert!((psi.v - (8.0 - 4.0 * t * t)).abs() < 1e-12);
            assert!((psi.d1 + 8.0 * t).abs() < 1e-12);
            assert!((psi.d2 + 8.0).abs() < 1e-10);
        }
    }

    #[test]
    fn forward_limits_agree_at_origin() {
        for (f, r) in [("-t^2", "t"), ("-t^2/2", "t"), ("t^2 - t^4", "sin(t)"), ("-log(1 + t^2)", "t + t^3")] {
            for n in [3, 4, 5] {
                let tensor = profile(n, f, r).forward_tensor(1.0).unwrap();
                let (a, b) = (tensor.phi.value(0.0).unwrap(), tensor.psi.value(0.0).unwrap());
                assert!((a - b).abs() <= 1e-6, "{f}, {r}, n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn constant_shift_of_f_is_invisible() {
        let a = profile(4, "t^2 - t^4/3", "t + t^3");
        let b = profile(4, "t^2 - t^4/3 + 5", "t + t^3");
        for t in [0.0, 0.3, 0.8] {
            let (p, q) = (a.ricci_forward(t).unwrap(), b.ricci_forward(t).unwrap());
            assert!((p.alpha - q.alpha).abs() < 1e-12 && (p.beta - q.beta).abs() < 1e-12);
        }
    }

    #[test]
    fn sampled_profile_matches_closed_form() {
        let cf = profile(4, "-t^2 + t^3/3", "t + t^3/5");
        let grid = crate::numerics::uniform_grid(0.0, 1.0, 1e-3);
        let sampled = cf.sample(&grid).unwrap();
        let pairs = sampled.ricci_forward_grid().unwrap();
        for (i, &t) in grid.iter().enumerate().step_by(50) {
            let exact = cf.ricci_forward(t).unwrap();
            assert!((pairs[i].alpha - exact.alpha).abs() < 1e-9, "t={t}");
            assert!((pairs[i].beta - exact.beta).abs() < 1e-9, "t={t}");
        }
        let off = sampled.ricci_forward(0.12345).unwrap();
        let exact = cf.ricci_forward(0.12345).unwrap();
        assert!((off.alpha - exact.alpha).abs() < 1e-9);
        let fw = sampled.forward_tensor().unwrap();
        assert!((fw.phi[0] - fw.psi[0]).abs() < 1e-6);
    }

    #[test]
    fn profile_invariants() {
        let grid = crate::numerics::uniform_grid(0.0, 1.0, 0.1);
        let good = profile(3, "-t^2", "t").sample(&grid).unwrap();
        assert!(good.check_invariants(1e-12).is_ok());
        let shifted = profile(3, "-t^2", "2*t").sample(&grid).unwrap();
        assert!(matches!(shifted.check_invariants(1e-9), Err(RotSymError::Invariant { t, .. }) if t == 0.0));
    }
}
