//! The Ricci potential `w(t)` as a solution of the implicit equation
//! `F(t, w, w′) = 0`, where
//!
//! ```text
//! F(t, w, p) = [(n−2)φ(t)(w² − 2w) + t²φ(t)ψ(t)]/(n−1) − p².
//! ```
//!
//! The origin is a folded saddle of the Lie–Cartan field on `F = 0`; the
//! solution through it is the folded separatrix with `w′φ(0) > 0`. It is
//! seeded from its Taylor series and continued by RK4 with projection onto
//! the surface after every step.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::exprfn::{EvalError, SmoothFn};
use crate::numerics::{bisect, uniform_grid};
use crate::rotsym::RotSymTensor;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum PotentialError {
    #[error("dimension must be at least 2, got {0}")]
    Dimension(usize),
    #[error("degenerate singular point: {0}")]
    Degenerate(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("projection onto the surface failed at t = {t}")]
    Projection { t: f64 },
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("phi*psi = {value} < 0 at t = {t}")]
    Domain { t: f64, value: f64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// `F` and its first partials at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfaceValue {
    pub f: f64,
    pub f_t: f64,
    pub f_w: f64,
    pub f_p: f64,
}

/// The implicit surface `F(t, w, p) = 0`.
#[derive(Clone, Debug)]
pub struct SurfaceF {
    pub n: usize,
    pub phi: Arc<dyn SmoothFn>,
    pub psi: Arc<dyn SmoothFn>,
    pub t_max: f64,
}

impl SurfaceF {
    pub fn new(n: usize, phi: Arc<dyn SmoothFn>, psi: Arc<dyn SmoothFn>, t_max: f64) -> Result<Self, PotentialError> {
        if n < 2 {
            return Err(PotentialError::Dimension(n));
        }
        Ok(SurfaceF { n, phi, psi, t_max })
    }

    pub fn from_tensor(tensor: &RotSymTensor) -> Self {
        SurfaceF {
            n: tensor.n,
            phi: tensor.phi.clone(),
            psi: tensor.psi.clone(),
            t_max: tensor.t_max,
        }
    }

    fn k(&self) -> f64 {
        1.0 / (self.n as f64 - 1.0)
    }

    fn m(&self) -> f64 {
        self.n as f64 - 2.0
    }

    pub fn eval(&self, t: f64, w: f64, p: f64) -> Result<SurfaceValue, EvalError> {
        let phi = self.phi.jet2(t)?;
        let psi = self.psi.jet2(t)?;
        let (k, m) = (self.k(), self.m());
        let q = w * w - 2.0 * w;
        let tpp = t * t * phi.v * psi.v;
        let dtpp = 2.0 * t * phi.v * psi.v + t * t * (phi.d1 * psi.v + phi.v * psi.d1);
        Ok(SurfaceValue {
            f: k * (m * phi.v * q + tpp) - p * p,
            f_t: k * (m * phi.d1 * q + dtpp),
            f_w: k * m * phi.v * (2.0 * w - 2.0),
            f_p: -2.0 * p,
        })
    }

    /// `F(t, w, 0)`: the value `p²` must take on the surface.
    fn p_squared(&self, t: f64, w: f64) -> Result<f64, EvalError> {
        Ok(self.eval(t, w, 0.0)?.f)
    }

    /// `X = F_p ∂_t + pF_p ∂_w − (F_t + pF_w) ∂_p`.
    pub fn lie_cartan_field(&self, state: [f64; 3]) -> Result<[f64; 3], EvalError> {
        let [t, w, p] = state;
        let v = self.eval(t, w, p)?;
        Ok([v.f_p, p * v.f_p, -(v.f_t + p * v.f_w)])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Classification {
    FoldedSaddle,
    Degenerate(String),
}

/// Taylor data of the separatrix `w = w2 t²/2 + w3 t³/6 + …`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeparatrixSeries {
    pub w2: f64,
    pub w3: f64,
}

impl SeparatrixSeries {
    fn third_order(surface_n: usize, phi0: f64, phi1: f64, psi0: f64, psi1: f64, w2: f64) -> Self {
        let k = 1.0 / (surface_n as f64 - 1.0);
        let m = surface_n as f64 - 2.0;
        let w3 = k * (phi0 * psi1 + phi1 * psi0 - m * phi1 * w2) / (w2 + k * m * phi0 / 3.0);
        SeparatrixSeries { w2, w3 }
    }
}

/// Linearization of the Lie–Cartan field at the origin.
#[derive(Clone, Debug, PartialEq)]
pub struct SaddleReport {
    pub dx0: [[f64; 3]; 3],
    /// Positive eigenvalue.
    pub lambda1: f64,
    /// Negative eigenvalue.
    pub lambda2: f64,
    pub unstable_dir: [f64; 3],
    pub stable_dir: [f64; 3],
    pub classification: Classification,
    /// Root of `(n−1)w² + (n−2)φ(0)w − φ(0)ψ(0) = 0` with the sign of `φ(0)`.
    pub w2: f64,
    /// The other root.
    pub w2_other: f64,
    pub series: SeparatrixSeries,
    /// Whether the selected separatrix is tangent to the stable eigenvector
    /// (eigenvalue `−2 w2`).
    pub separatrix_is_stable: bool,
    /// Leading coefficient `c` of the lower fold branch `w ≈ c t²`.
    pub fold_leading: f64,
    /// `ψ(0)/(2(n−1))`, the alternative reading of the same coefficient.
    pub fold_leading_alt: f64,
}

impl SaddleReport {
    /// Eigenvector of `DX(0)` matched by the selected separatrix.
    pub fn separatrix_dir(&self) -> [f64; 3] {
        if self.separatrix_is_stable {
            self.stable_dir
        } else {
            self.unstable_dir
        }
    }
}

fn eigenvector(lambda: f64) -> [f64; 3] {
    // DX(0) v = λ v forces v = (1, 0, −λ/2) up to scale.
    let v = [1.0, 0.0, -lambda / 2.0];
    let norm = (1.0 + v[2] * v[2]).sqrt();
    [v[0] / norm, 0.0, v[2] / norm]
}

/// Classifies the singular point of the Lie–Cartan field at the origin.
///
/// `DX(0)` is assembled entry by entry as
/// `[[0, 0, −2], [0, 0, 0], [−2φψ/(n−1), −2(n−2)φ′/(n−1), 2(n−2)φ/(n−1)]]` at
/// `t = 0`; its nonzero eigenvalues solve
/// `−λ² + 2(n−2)φ(0)/(n−1) λ + 4φ(0)ψ(0)/(n−1) = 0`.
pub fn saddle_report(surface: &SurfaceF) -> Result<SaddleReport, PotentialError> {
    let n = surface.n;
    if n == 2 {
        return Err(PotentialError::Degenerate("n = 2 has no fold; use the quadrature branch".into()));
    }
    let phi = surface.phi.jet2(0.0)?;
    let psi = surface.psi.jet2(0.0)?;
    if !(phi.v * psi.v > 0.0) {
        return Err(PotentialError::Degenerate(format!(
            "phi(0)*psi(0) = {} is not positive",
            phi.v * psi.v
        )));
    }
    let k = surface.k();
    let m = surface.m();
    let trace = 2.0 * m * phi.v * k;
    let det_term = 4.0 * phi.v * psi.v * k;
    let dx0 = [
        [0.0, 0.0, -2.0],
        [0.0, 0.0, 0.0],
        [-2.0 * phi.v * psi.v * k, -2.0 * m * phi.d1 * k, trace],
    ];
    // λ² − trace·λ − det_term = 0, solved without cancellation.
    let root = (trace * trace + 4.0 * det_term).sqrt();
    let (lambda1, lambda2) = if trace >= 0.0 {
        let l1 = 0.5 * (trace + root);
        (l1, -det_term / l1)
    } else {
        let l2 = 0.5 * (trace - root);
        (-det_term / l2, l2)
    };
    let classification = if lambda1 * lambda2 < 0.0 {
        Classification::FoldedSaddle
    } else {
        Classification::Degenerate("eigenvalues of equal sign".into())
    };
    // λ = −2 w2 maps the eigenvalue quadratic onto the w2 quadratic.
    let separatrix_is_stable = phi.v > 0.0;
    let (w2, w2_other) = if separatrix_is_stable {
        (-lambda2 / 2.0, -lambda1 / 2.0)
    } else {
        (-lambda1 / 2.0, -lambda2 / 2.0)
    };
    Ok(SaddleReport {
        dx0,
        lambda1,
        lambda2,
        unstable_dir: eigenvector(lambda1),
        stable_dir: eigenvector(lambda2),
        classification,
        w2,
        w2_other,
        series: SeparatrixSeries::third_order(n, phi.v, phi.d1, psi.v, psi.d1, w2),
        separatrix_is_stable,
        fold_leading: psi.v / (2.0 * m),
        fold_leading_alt: psi.v * k / 2.0,
    })
}

/// Values of `w` on the fold `F = F_p = 0` at `t`, lower branch first.
///
/// Empty when the branches are complex, and for `n = 2`, where the fold is
/// the set `t²ψ(t) = 0` rather than a graph over `t`.
pub fn fold_curve(surface: &SurfaceF, t: f64) -> Result<Vec<f64>, EvalError> {
    if surface.n == 2 {
        return Ok(vec![]);
    }
    let c = t * t * surface.psi.value(t)? / surface.m();
    let disc = 1.0 - c;
    Ok(if disc < 0.0 {
        vec![]
    } else if disc == 0.0 {
        vec![1.0]
    } else {
        let s = disc.sqrt();
        vec![c / (1.0 + s), 1.0 + s]
    })
}

const PROJECTION_TOL: f64 = 1e-13;
const PROJECTION_ITERS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq)]
enum Reject {
    /// No real `p` at the trial point, or `p` changed sign.
    OffSurface,
    NonFinite,
}

/// Newton on `p` for `F(t, w, p) = 0` with `(t, w)` fixed, keeping the sign
/// of the initial guess.
fn project_p(surface: &SurfaceF, t: f64, w: f64, guess: f64, exit_tol: f64) -> Result<f64, Reject> {
    let g = surface.p_squared(t, w).map_err(|_| Reject::NonFinite)?;
    if !g.is_finite() || !guess.is_finite() {
        return Err(Reject::NonFinite);
    }
    let scale = g.abs().max(1.0);
    if g < -exit_tol * scale {
        return Err(Reject::OffSurface);
    }
    if g <= 0.0 {
        return Ok(0.0);
    }
    // Iterate to full relative precision: downstream quadrature divides by
    // p near the origin, where p² is far below the absolute tolerance.
    let mut p = if guess == 0.0 { g.sqrt() } else { guess };
    for _ in 0..PROJECTION_ITERS {
        let dp = (g - p * p) / (2.0 * p);
        p += dp;
        if dp.abs() <= 4.0 * f64::EPSILON * p.abs() {
            break;
        }
    }
    if (g - p * p).abs() <= PROJECTION_TOL * scale {
        Ok(p)
    } else {
        Err(Reject::NonFinite)
    }
}

/// Seed `(δ, w2δ²/2, w2δ)` on the selected separatrix, projected onto the
/// surface.
pub fn seed_separatrix(surface: &SurfaceF, rep: &SaddleReport, delta: f64) -> Result<[f64; 3], PotentialError> {
    if !(delta > 0.0 && delta <= 1e-2 * surface.t_max) {
        return Err(PotentialError::Precondition(format!(
            "seed offset {delta} outside (0, 1e-2 * t_max]"
        )));
    }
    seed_on_branch(surface, rep.w2, delta)
}

/// Series seed `(t, w2 t²/2, w2 t)` at a signed offset `t` on the branch with
/// quadratic coefficient `w2`, projected onto the surface.
pub fn seed_on_branch(surface: &SurfaceF, w2: f64, t: f64) -> Result<[f64; 3], PotentialError> {
    let w = w2 * t * t / 2.0;
    let p = project_p(surface, t, w, w2 * t, 0.0).map_err(|_| PotentialError::Projection { t })?;
    Ok([t, w, p])
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegrationOptions {
    pub step: f64,
    pub t_end: f64,
    pub fold_tol: f64,
    pub exit_tol: f64,
}

impl IntegrationOptions {
    pub fn new(step: f64, t_end: f64) -> Self {
        IntegrationOptions {
            step,
            t_end,
            fold_tol: 1e-8,
            exit_tol: 1e-12,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HaltReason {
    ReachedEnd,
    /// `|F_p|` fell below the fold tolerance, or the curve met the fold and
    /// could not be continued on the surface.
    FoldContact { t: f64, w: f64 },
    /// The curve left the surface away from the fold.
    SurfaceExit { t: f64 },
}

impl fmt::Display for HaltReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HaltReason::ReachedEnd => f.write_str("reached t_end"),
            HaltReason::FoldContact { t, w } => write!(f, "fold contact at t = {t}, w = {w}"),
            HaltReason::SurfaceExit { t } => write!(f, "left the surface at t = {t}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Seed {
    /// Taylor seed at offset `delta` of the given order.
    Series { delta: f64, order: u32 },
    /// Exact quadrature from `t = 0`.
    Quadrature,
}

/// Samples of the Ricci potential `w` and its slope `p = w′`.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialCurve {
    pub n: usize,
    pub t: Vec<f64>,
    pub w: Vec<f64>,
    pub p: Vec<f64>,
    pub seed: Seed,
    pub halt: HaltReason,
    pub series: SeparatrixSeries,
}

impl PotentialCurve {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn last(&self) -> [f64; 3] {
        let i = self.t.len() - 1;
        [self.t[i], self.w[i], self.p[i]]
    }

    /// `max |F|` over the samples.
    pub fn max_constraint(&self, surface: &SurfaceF) -> Result<f64, EvalError> {
        let mut worst = 0.0f64;
        for i in 0..self.len() {
            worst = worst.max(surface.eval(self.t[i], self.w[i], self.p[i])?.f.abs());
        }
        Ok(worst)
    }
}

const MAX_ATTEMPTS: usize = 50_000_000;
/// Largest step relative to `|t|`.
const GRADING: f64 = 0.25;

/// One RK4 step of `dw/dt = p`, `dp/dt = (F_t + pF_w)/(2p)` followed by
/// projection of `p`.
fn rk4_step(surface: &SurfaceF, [t, w, p]: [f64; 3], h: f64, exit_tol: f64) -> Result<[f64; 3], Reject> {
    let rhs = |t: f64, w: f64, p: f64| -> Result<(f64, f64), Reject> {
        if p == 0.0 {
            return Err(Reject::OffSurface);
        }
        let v = surface.eval(t, w, p).map_err(|_| Reject::NonFinite)?;
        let dp = (v.f_t + p * v.f_w) / (2.0 * p);
        if dp.is_finite() {
            Ok((p, dp))
        } else {
            Err(Reject::NonFinite)
        }
    };
    let (a1, b1) = rhs(t, w, p)?;
    let (a2, b2) = rhs(t + h / 2.0, w + h / 2.0 * a1, p + h / 2.0 * b1)?;
    let (a3, b3) = rhs(t + h / 2.0, w + h / 2.0 * a2, p + h / 2.0 * b2)?;
    let (a4, b4) = rhs(t + h, w + h * a3, p + h * b3)?;
    let t1 = t + h;
    let w1 = w + h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
    let p1 = p + h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
    if !w1.is_finite() || !p1.is_finite() {
        return Err(Reject::NonFinite);
    }
    if p1 * p < 0.0 {
        return Err(Reject::OffSurface);
    }
    let p1 = project_p(surface, t1, w1, p1, exit_tol)?;
    Ok([t1, w1, p1])
}

/// Continues an on-surface state to `t_end` (in either direction).
fn continue_curve(
    surface: &SurfaceF,
    start: [f64; 3],
    opts: &IntegrationOptions,
) -> Result<(Vec<[f64; 3]>, HaltReason), PotentialError> {
    if !(opts.step > 0.0) {
        return Err(PotentialError::Precondition(format!("step {} must be positive", opts.step)));
    }
    let dir = (opts.t_end - start[0]).signum();
    let span = (opts.t_end - start[0]).abs();
    // Targets on the lattice of multiples of the step, then t_end.
    let targets: Vec<f64> = if span == 0.0 {
        vec![]
    } else {
        let first = (start[0].abs() / opts.step).floor() as usize + 1;
        let mut v: Vec<f64> = (first..)
            .map(|i| dir * i as f64 * opts.step)
            .take_while(|&t| (opts.t_end - t) * dir > 1e-9 * opts.step)
            .collect();
        v.push(opts.t_end);
        v
    };
    let h_min = 1e-12 * opts.t_end.abs().max(1.0);
    let mut points = vec![start];
    let mut state = start;
    let mut attempts = 0usize;
    for target in targets {
        while state[0] != target {
            // Graded steps near the origin, where the solution varies on the
            // scale of t itself.
            let remaining = target - state[0];
            let cap = GRADING * state[0].abs();
            let mut h = if remaining.abs() > cap { cap * dir } else { remaining };
            loop {
                attempts += 1;
                if attempts > MAX_ATTEMPTS {
                    return Err(PotentialError::StepUnderflow { t: state[0] });
                }
                match rk4_step(surface, state, h, opts.exit_tol) {
                    Ok(mut next) => {
                        if (target - next[0]) * dir <= 0.0 {
                            next[0] = target;
                        }
                        state = next;
                        points.push(state);
                        break;
                    }
                    Err(reason) => {
                        h /= 2.0;
                        if h.abs() < h_min {
                            return match reason {
                                Reject::NonFinite => Err(PotentialError::StepUnderflow { t: state[0] }),
                                Reject::OffSurface => {
                                    let fp = 2.0 * state[2].abs();
                                    let halt = if fp < opts.fold_tol.sqrt() * state[2].abs().max(1.0) {
                                        HaltReason::FoldContact { t: state[0], w: state[1] }
                                    } else {
                                        HaltReason::SurfaceExit { t: state[0] }
                                    };
                                    Ok((points, halt))
                                }
                            };
                        }
                    }
                }
            }
            if 2.0 * state[2].abs() < opts.fold_tol {
                return Ok((points, HaltReason::FoldContact { t: state[0], w: state[1] }));
            }
        }
    }
    Ok((points, HaltReason::ReachedEnd))
}

/// Integrates the separatrix from an on-surface seed up to `opts.t_end`.
/// `series` is carried along for the reconstruction near `t = 0`.
pub fn integrate_separatrix(
    surface: &SurfaceF,
    seed: [f64; 3],
    series: SeparatrixSeries,
    opts: &IntegrationOptions,
) -> Result<PotentialCurve, PotentialError> {
    if !(opts.t_end > seed[0]) {
        return Err(PotentialError::Precondition(format!(
            "t_end {} must exceed the seed offset {}",
            opts.t_end, seed[0]
        )));
    }
    let (points, halt) = continue_curve(surface, seed, opts)?;
    Ok(PotentialCurve {
        n: surface.n,
        t: points.iter().map(|s| s[0]).collect(),
        w: points.iter().map(|s| s[1]).collect(),
        p: points.iter().map(|s| s[2]).collect(),
        seed: Seed::Series { delta: seed[0], order: 2 },
        halt,
        series,
    })
}

/// Seeds at `delta` and integrates to `opts.t_end`.
pub fn solve_separatrix(
    surface: &SurfaceF,
    delta: f64,
    opts: &IntegrationOptions,
) -> Result<(SaddleReport, PotentialCurve), PotentialError> {
    let rep = saddle_report(surface)?;
    let seed = seed_separatrix(surface, &rep, delta)?;
    let curve = integrate_separatrix(surface, seed, rep.series, opts)?;
    Ok((rep, curve))
}

/// `n = 2`: `F = t²φψ − p²`, so `w = sign·∫₀ᵗ s√(φψ) ds` by composite
/// Simpson on the step grid.
pub fn solve_n2(
    phi: &dyn SmoothFn,
    psi: &dyn SmoothFn,
    sign: f64,
    t_end: f64,
    step: f64,
) -> Result<PotentialCurve, PotentialError> {
    if sign.abs() != 1.0 {
        return Err(PotentialError::Precondition(format!("sign must be +1 or -1, got {sign}")));
    }
    if !(step > 0.0 && t_end > 0.0) {
        return Err(PotentialError::Precondition("t_end and step must be positive".into()));
    }
    let slope = |s: f64| -> Result<f64, PotentialError> {
        let prod = phi.value(s)? * psi.value(s)?;
        if prod < 0.0 {
            return Err(PotentialError::Domain { t: s, value: prod });
        }
        Ok(s * prod.sqrt())
    };
    let t = uniform_grid(0.0, t_end, step);
    let mut w = vec![0.0; t.len()];
    let mut p = vec![0.0; t.len()];
    let mut prev = slope(0.0)?;
    p[0] = sign * prev;
    for i in 1..t.len() {
        let (a, b) = (t[i - 1], t[i]);
        let mid = slope(0.5 * (a + b))?;
        let end = slope(b)?;
        w[i] = w[i - 1] + sign * (b - a) / 6.0 * (prev + 4.0 * mid + end);
        p[i] = sign * end;
        prev = end;
    }
    let phi0 = phi.jet2(0.0)?;
    let psi0 = psi.jet2(0.0)?;
    let w2 = sign * (phi0.v * psi0.v).sqrt();
    Ok(PotentialCurve {
        n: 2,
        t,
        w,
        p,
        seed: Seed::Quadrature,
        halt: HaltReason::ReachedEnd,
        series: SeparatrixSeries::third_order(2, phi0.v, phi0.d1, psi0.v, psi0.d1, w2),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Hypothesis {
    /// `F⁻¹(0)` is a regular surface.
    SurfaceRegularity,
    /// `d/dt(t²ψ)·φ ≠ 0`.
    FoldRegularity,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GlobalVerdict {
    GlobalContinuationExpected,
    HypothesisFailure { t: f64, hypothesis: Hypothesis },
    Halted(HaltReason),
}

impl GlobalVerdict {
    pub fn is_positive(&self) -> bool {
        matches!(self, GlobalVerdict::GlobalContinuationExpected)
    }
}

impl fmt::Display for GlobalVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GlobalVerdict::GlobalContinuationExpected => f.write_str("global continuation expected"),
            GlobalVerdict::HypothesisFailure { t, hypothesis } => {
                let what = match hypothesis {
                    Hypothesis::SurfaceRegularity => "surface regularity",
                    Hypothesis::FoldRegularity => "fold regularity",
                };
                write!(f, "{what} fails at t = {t}")
            }
            GlobalVerdict::Halted(h) => write!(f, "curve halted: {h}"),
        }
    }
}

/// Margins for the global continuation hypotheses.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GlobalReport {
    /// Minimum of `‖∇F‖` over sampled points of `F⁻¹(0)`, fold points included.
    pub regularity_margin: f64,
    pub regularity_argmin: f64,
    /// Minimum over `[0, t_max]` of `|d/dt(t²ψ)·φ| / t = |(2ψ + tψ′)φ|`.
    /// Dividing by `t` removes the zero at the origin that every tensor has.
    pub fold_margin: f64,
    pub fold_argmin: f64,
    /// Minimum of `|w − w_fold|` over curve samples with `t ≥ 0.05·t_max`,
    /// when any fold branch is real there.
    pub fold_distance: Option<f64>,
    pub verdict: GlobalVerdict,
}

const MARGIN_SCAN: usize = 4000;
const SURFACE_SCAN: usize = 200;

/// Evaluates the hypotheses under which the separatrix continues to all of
/// `[0, t_max]` without reaching the fold.
pub fn check_global(surface: &SurfaceF, curve: &PotentialCurve) -> Result<GlobalReport, EvalError> {
    let t_max = surface.t_max;

    // (b) fold regularity
    let fold_value = |t: f64| -> Result<f64, EvalError> {
        let phi = surface.phi.value(t)?;
        let psi = surface.psi.jet2(t)?;
        Ok((2.0 * psi.v + t * psi.d1) * phi)
    };
    let mut fold_margin = f64::INFINITY;
    let mut fold_argmin = 0.0;
    let mut fold_zero = None;
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..=MARGIN_SCAN {
        let t = t_max * i as f64 / MARGIN_SCAN as f64;
        let v = fold_value(t)?;
        if v.abs() < fold_margin {
            fold_margin = v.abs();
            fold_argmin = t;
        }
        if fold_zero.is_none() {
            if v == 0.0 {
                fold_zero = Some(t);
            } else if let Some((tp, vp)) = prev {
                if vp * v < 0.0 {
                    fold_zero = Some(bisect(fold_value, tp, t, 1e-12)?);
                }
            }
        }
        prev = Some((t, v));
    }
    if let Some(t) = fold_zero {
        fold_margin = 0.0;
        fold_argmin = t;
    }

    // (a) regularity of the surface
    let (w_lo, w_hi) = curve
        .w
        .iter()
        .fold((0.0f64, 2.0f64), |(lo, hi), &w| (lo.min(w), hi.max(w)));
    let (w_lo, w_hi) = (w_lo - 1.0, w_hi + 1.0);
    let mut regularity_margin = f64::INFINITY;
    let mut regularity_argmin = 0.0;
    let mut consider = |t: f64, norm: f64| {
        if norm < regularity_margin {
            regularity_margin = norm;
            regularity_argmin = t;
        }
    };
    for i in 0..=SURFACE_SCAN {
        let t = t_max * i as f64 / SURFACE_SCAN as f64;
        for j in 0..=SURFACE_SCAN {
            let w = w_lo + (w_hi - w_lo) * j as f64 / SURFACE_SCAN as f64;
            let g = surface.p_squared(t, w)?;
            if g >= 0.0 {
                let v = surface.eval(t, w, g.sqrt())?;
                consider(t, (v.f_t * v.f_t + v.f_w * v.f_w + v.f_p * v.f_p).sqrt());
            }
        }
        for w in fold_curve(surface, t)? {
            let v = surface.eval(t, w, 0.0)?;
            consider(t, v.f_t.hypot(v.f_w));
        }
    }

    // (c) distance from the curve to the fold
    let mut fold_distance: Option<f64> = None;
    for i in 0..curve.len() {
        if curve.t[i] < 0.05 * t_max {
            continue;
        }
        for wf in fold_curve(surface, curve.t[i])? {
            let d = (curve.w[i] - wf).abs();
            fold_distance = Some(fold_distance.map_or(d, |m| m.min(d)));
        }
    }

    const ZERO: f64 = 1e-12;
    let verdict = if fold_margin <= ZERO {
        GlobalVerdict::HypothesisFailure {
            t: fold_argmin,
            hypothesis: Hypothesis::FoldRegularity,
        }
    } else if regularity_margin <= ZERO {
        GlobalVerdict::HypothesisFailure {
            t: regularity_argmin,
            hypothesis: Hypothesis::SurfaceRegularity,
        }
    } else if curve.halt != HaltReason::ReachedEnd {
        GlobalVerdict::Halted(curve.halt)
    } else {
        GlobalVerdict::GlobalContinuationExpected
    };
    Ok(GlobalReport {
        regularity_margin,
        regularity_argmin,
        fold_margin,
        fold_argmin,
        fold_distance,
        verdict,
    })
}

/// One integrated half-branch through the origin.
#[derive(Clone, Debug, PartialEq)]
pub struct PortraitBranch {
    pub label: &'static str,
    /// `(t, w, p, F)` rows, ordered away from the origin.
    pub rows: Vec<[f64; 4]>,
    pub halt: HaltReason,
}

/// Separatrices of the folded saddle and the fold branches, for plotting.
#[derive(Clone, Debug, PartialEq)]
pub struct Portrait {
    pub branches: Vec<PortraitBranch>,
    /// `(t, w)` on the lower and upper fold branches.
    pub fold_lower: Vec<[f64; 2]>,
    pub fold_upper: Vec<[f64; 2]>,
}

/// Integrates both separatrices on both sides of `t = 0` out to `±extent`
/// and samples the fold branches on the same range.
pub fn phase_portrait(
    surface: &SurfaceF,
    rep: &SaddleReport,
    delta: f64,
    step: f64,
    extent: f64,
) -> Result<Portrait, PotentialError> {
    let mut branches = vec![];
    let cases = [
        ("separatrix+", rep.w2, 1.0),
        ("separatrix-", rep.w2, -1.0),
        ("other+", rep.w2_other, 1.0),
        ("other-", rep.w2_other, -1.0),
    ];
    for (label, w2, side) in cases {
        let seed = seed_on_branch(surface, w2, side * delta)?;
        let opts = IntegrationOptions::new(step, side * extent);
        let (points, halt) = continue_curve(surface, seed, &opts)?;
        let rows = points
            .iter()
            .map(|&[t, w, p]| Ok([t, w, p, surface.eval(t, w, p)?.f]))
            .collect::<Result<_, EvalError>>()?;
        branches.push(PortraitBranch { label, rows, halt });
    }
    let mut fold_lower = vec![];
    let mut fold_upper = vec![];
    for t in uniform_grid(-extent, extent, step) {
        let ws = fold_curve(surface, t)?;
        if let Some(&w) = ws.first() {
            fold_lower.push([t, w]);
        }
        if ws.len() == 2 {
            fold_upper.push([t, ws[1]]);
        }
    }
    Ok(Portrait {
        branches,
        fold_lower,
        fold_upper,
    })
}
