//! Recovery of the metric `(f, r)` from the Ricci potential and verification
//! of `Ric(g) = T`.
//!
//! ```text
//! r(t) = t·exp ∫₀ᵗ [φ/((n−1)w′) − 1/s] ds        (n−1) w′ r′ = φ r
//! f(t) = −∫₀ᵗ (φ/(n−1))(w/w′) ds                  (n−1) w′ f′ = −w φ
//! ```
//!
//! Both integrands have removable singularities at `s = 0`; their limits come
//! from the separatrix series, and below `10·δ` (the seed offset) the samples
//! are replaced by a linear bridge from the limit.

use thiserror::Error;

use crate::exprfn::{EvalError, SmoothFn};
use crate::numerics::{cumulative_integral, differentiate_samples};
use crate::potential::{
    check_global, saddle_report, seed_separatrix, solve_n2, integrate_separatrix, GlobalReport, HaltReason,
    IntegrationOptions, PotentialCurve, PotentialError, SaddleReport, Seed, SurfaceF,
};
use crate::rotsym::{definiteness_check, MetricProfile, RotSymError, RotSymTensor, Verdict};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum ReconstructError {
    #[error("w' has the wrong sign at t = {t}")]
    Sign { t: f64 },
    #[error("r' = {rp} is not positive at t = {t}")]
    Monotonicity { t: f64, rp: f64 },
    #[error("curve has fewer than 5 usable samples")]
    TooShort,
    #[error("verification range [{lo}, {hi}] is empty or outside the profile")]
    Range { lo: f64, hi: f64 },
    #[error(transparent)]
    Profile(#[from] RotSymError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Sample grid shared by the potential and the recovered profile: the curve
/// samples with `t = 0` prepended when the curve starts at its seed offset.
struct Samples {
    n: usize,
    t: Vec<f64>,
    w: Vec<f64>,
    p: Vec<f64>,
    phi: Vec<f64>,
    /// Below this the integrands are bridged.
    eps: f64,
    w2: f64,
    w3: f64,
    phi0: f64,
    phi1: f64,
}

const SERIES_FACTOR: f64 = 10.0;

impl Samples {
    fn new(curve: &PotentialCurve, phi: &dyn SmoothFn) -> Result<Self, ReconstructError> {
        let (mut t, mut w, mut p) = (curve.t.clone(), curve.w.clone(), curve.p.clone());
        if t.first() != Some(&0.0) {
            t.insert(0, 0.0);
            w.insert(0, 0.0);
            p.insert(0, 0.0);
        }
        if t.len() < 5 {
            return Err(ReconstructError::TooShort);
        }
        let phi_vals = t.iter().map(|&s| phi.value(s)).collect::<Result<Vec<_>, _>>()?;
        let jet = phi.jet2(0.0)?;
        for i in 1..t.len() {
            if !(p[i] * jet.v > 0.0) {
                return Err(ReconstructError::Sign { t: t[i] });
            }
        }
        let eps = match curve.seed {
            Seed::Series { delta, .. } => SERIES_FACTOR * delta,
            Seed::Quadrature => 0.0,
        };
        Ok(Samples {
            n: curve.n,
            t,
            w,
            p,
            phi: phi_vals,
            eps,
            w2: curve.series.w2,
            w3: curve.series.w3,
            phi0: jet.v,
            phi1: jet.d1,
        })
    }

    fn k(&self) -> f64 {
        1.0 / (self.n as f64 - 1.0)
    }

    /// Replaces samples with `0 < t < eps` by the line from `limit` at 0 to
    /// the first sample at or beyond `eps`.
    fn bridge(&self, vals: &mut [f64], limit: f64) {
        vals[0] = limit;
        let Some(j) = self.t.iter().position(|&s| s >= self.eps && s > 0.0) else {
            return;
        };
        let (s_star, v_star) = (self.t[j], vals[j]);
        for i in 1..j {
            vals[i] = limit + (v_star - limit) * self.t[i] / s_star;
        }
    }

    /// `φ/((n−1)w′) − 1/s` with its limit at 0.
    fn r_integrand(&self) -> Vec<f64> {
        let k = self.k();
        let mut vals: Vec<f64> = (0..self.t.len())
            .map(|i| {
                if i == 0 {
                    0.0
                } else {
                    k * self.phi[i] / self.p[i] - 1.0 / self.t[i]
                }
            })
            .collect();
        let ratio = k * self.phi0 / self.w2;
        let limit = ratio * (self.phi1 / self.phi0 - self.w3 / (2.0 * self.w2));
        self.bridge(&mut vals, limit);
        vals
    }

    /// `(φ/(n−1))(w/w′)`, which vanishes at 0.
    fn f_integrand(&self) -> Vec<f64> {
        let mut vals = self.f_slope_magnitude();
        self.bridge(&mut vals, 0.0);
        vals
    }

    fn f_slope_magnitude(&self) -> Vec<f64> {
        let k = self.k();
        (0..self.t.len())
            .map(|i| if i == 0 { 0.0 } else { k * self.phi[i] * self.w[i] / self.p[i] })
            .collect()
    }
}

/// Samples `(t, r, r′)` from the radial closed form; `r′ = φr/((n−1)w′)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialSamples {
    pub t: Vec<f64>,
    pub r: Vec<f64>,
    pub rp: Vec<f64>,
}

/// Samples `(t, f, f′)` with `f(0) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConformalSamples {
    pub t: Vec<f64>,
    pub f: Vec<f64>,
    pub fp: Vec<f64>,
}

fn radial(s: &Samples) -> Result<RadialSamples, ReconstructError> {
    let integral = cumulative_integral(&s.t, &s.r_integrand());
    let k = s.k();
    let mut r = Vec::with_capacity(s.t.len());
    let mut rp = Vec::with_capacity(s.t.len());
    for (i, &t) in s.t.iter().enumerate() {
        let ri = t * integral[i].exp();
        let rpi = if i == 0 { 1.0 } else { k * s.phi[i] * ri / s.p[i] };
        if !(rpi > 0.0) || !rpi.is_finite() {
            return Err(ReconstructError::Monotonicity { t, rp: rpi });
        }
        r.push(ri);
        rp.push(rpi);
    }
    Ok(RadialSamples { t: s.t.clone(), r, rp })
}

fn conformal(s: &Samples) -> ConformalSamples {
    let integral = cumulative_integral(&s.t, &s.f_integrand());
    let fp = s.f_slope_magnitude().into_iter().map(|v| -v).collect();
    ConformalSamples {
        t: s.t.clone(),
        f: integral.into_iter().map(|v| -v).collect(),
        fp,
    }
}

pub fn solve_r(curve: &PotentialCurve, phi: &dyn SmoothFn) -> Result<RadialSamples, ReconstructError> {
    radial(&Samples::new(curve, phi)?)
}

pub fn solve_f(curve: &PotentialCurve, phi: &dyn SmoothFn) -> Result<ConformalSamples, ReconstructError> {
    Ok(conformal(&Samples::new(curve, phi)?))
}

const INVARIANT_TOL: f64 = 1e-9;

/// Packs recovered samples into a profile and checks its invariants.
pub fn assemble_metric(
    n: usize,
    radial: &RadialSamples,
    conformal: &ConformalSamples,
) -> Result<MetricProfile, ReconstructError> {
    if radial.t != conformal.t {
        return Err(RotSymError::Shape.into());
    }
    let p = MetricProfile::new(
        n,
        radial.t.clone(),
        conformal.f.clone(),
        radial.r.clone(),
        radial.rp.clone(),
        conformal.fp.clone(),
    )?;
    p.check_invariants(INVARIANT_TOL)?;
    Ok(p)
}

/// `max |α r′² − φ|` and `max |r²β − t²ψ|` over grid points in `[t_lo, t_hi]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RicciResiduals {
    pub radial: f64,
    pub tangential: f64,
}

impl RicciResiduals {
    pub fn max(&self) -> f64 {
        self.radial.max(self.tangential)
    }
}

pub fn verify_ricci(
    profile: &MetricProfile,
    tensor: &RotSymTensor,
    t_lo: f64,
    t_hi: f64,
) -> Result<RicciResiduals, ReconstructError> {
    let range = || ReconstructError::Range { lo: t_lo, hi: t_hi };
    if !(t_lo > 0.0 && t_lo < t_hi) {
        return Err(range());
    }
    let pairs = profile.ricci_forward_grid()?;
    let mut res = RicciResiduals {
        radial: 0.0,
        tangential: 0.0,
    };
    let mut any = false;
    for (i, &t) in profile.grid.iter().enumerate() {
        if t < t_lo || t > t_hi {
            continue;
        }
        any = true;
        let phi = tensor.phi.value(t)?;
        let psi = tensor.psi.value(t)?;
        let rp = profile.rp[i];
        let r = profile.r[i];
        res.radial = res.radial.max((pairs[i].alpha * rp * rp - phi).abs());
        res.tangential = res.tangential.max((r * r * pairs[i].beta - t * t * psi).abs());
    }
    if !any {
        return Err(range());
    }
    Ok(res)
}

/// `w = −r f′/r′`.
pub fn ricci_potential_from_profile(profile: &MetricProfile) -> Vec<f64> {
    (0..profile.grid.len())
        .map(|i| -profile.r[i] * profile.fp[i] / profile.rp[i])
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReconstructionResult {
    pub profile: MetricProfile,
    /// The potential and its slope on the profile grid.
    pub w: Vec<f64>,
    pub p: Vec<f64>,
    /// `max |(n−1)w′r′ − φr|` with `r′` differentiated from the samples.
    pub residual_r: f64,
    /// `max |(n−1)w′f′ + wφ|` with `f′` differentiated from the samples.
    pub residual_f: f64,
    pub ricci_residuals: RicciResiduals,
    /// Lower end of the verification range.
    pub t_lo: f64,
}

/// Default lower end of the verification range, as a fraction of `t_max`.
pub const VERIFY_FLOOR: f64 = 0.05;

/// `solve_r`, `solve_f`, `assemble_metric` and `verify_ricci` on
/// `[t_lo, last sample]`.
pub fn reconstruct(
    curve: &PotentialCurve,
    tensor: &RotSymTensor,
    t_lo: f64,
) -> Result<ReconstructionResult, ReconstructError> {
    let s = Samples::new(curve, tensor.phi.as_ref())?;
    let rad = radial(&s)?;
    let conf = conformal(&s);
    let profile = assemble_metric(tensor.n, &rad, &conf)?;
    let k_inv = tensor.n as f64 - 1.0;
    let rp_num = differentiate_samples(&s.t, &rad.r);
    let fp_num = differentiate_samples(&s.t, &conf.f);
    let mut residual_r = 0.0f64;
    let mut residual_f = 0.0f64;
    for i in 0..s.t.len() {
        residual_r = residual_r.max((k_inv * s.p[i] * rp_num[i] - s.phi[i] * rad.r[i]).abs());
        residual_f = residual_f.max((k_inv * s.p[i] * fp_num[i] + s.w[i] * s.phi[i]).abs());
    }
    let t_hi = *s.t.last().unwrap();
    let ricci_residuals = verify_ricci(&profile, tensor, t_lo, t_hi)?;
    Ok(ReconstructionResult {
        profile,
        w: s.w,
        p: s.p,
        residual_r,
        residual_f,
        ricci_residuals,
        t_lo,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    pub step: f64,
    /// Seed offset; defaults to `1e-4·t_max`.
    pub delta: Option<f64>,
    /// Verification floor; defaults to `0.05·t_max`.
    pub t_lo: Option<f64>,
    /// Intervals for the definiteness scan.
    pub grid_size: usize,
}

impl SolveOptions {
    pub fn new(step: f64) -> Self {
        SolveOptions {
            step,
            delta: None,
            t_lo: None,
            grid_size: 1000,
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum SolveError {
    /// The tensor is not definite or `φ(0) ≠ ψ(0)`.
    #[error("{0}")]
    Validation(Verdict),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error(transparent)]
    Reconstruct(#[from] ReconstructError),
    #[error(transparent)]
    Profile(#[from] RotSymError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub verdict: Verdict,
    /// Absent for `n = 2`.
    pub saddle: Option<SaddleReport>,
    pub curve: PotentialCurve,
    pub global: Option<GlobalReport>,
    pub reconstruction: ReconstructionResult,
}

/// The full pipeline: validation, separatrix (or quadrature for `n = 2`),
/// recovery of `(f, r)`, and verification.
///
/// When the separatrix halts at the fold, the metric is recovered on the
/// part of the curve that precedes the contact.
pub fn solve(tensor: &RotSymTensor, opts: &SolveOptions) -> Result<Solution, SolveError> {
    let verdict = definiteness_check(tensor, opts.grid_size)?;
    if !verdict.is_definite() {
        return Err(SolveError::Validation(verdict));
    }
    let t_max = tensor.t_max;
    let surface = SurfaceF::from_tensor(tensor);
    let (saddle, mut curve) = if tensor.n == 2 {
        let sign = tensor.phi.value(0.0)?.signum();
        let curve = solve_n2(tensor.phi.as_ref(), tensor.psi.as_ref(), sign, t_max, opts.step)?;
        (None, curve)
    } else {
        let rep = saddle_report(&surface)?;
        let delta = opts.delta.unwrap_or(1e-4 * t_max);
        let seed = seed_separatrix(&surface, &rep, delta)?;
        let curve = integrate_separatrix(&surface, seed, rep.series, &IntegrationOptions::new(opts.step, t_max))?;
        (Some(rep), curve)
    };
    let global = if tensor.n > 2 {
        Some(check_global(&surface, &curve)?)
    } else {
        None
    };
    if curve.halt != HaltReason::ReachedEnd {
        let sign = tensor.phi.value(0.0)?.signum();
        while curve.p.last().is_some_and(|&p| !(p * sign > 0.0)) {
            curve.t.pop();
            curve.w.pop();
            curve.p.pop();
        }
    }
    let t_lo = opts.t_lo.unwrap_or(VERIFY_FLOOR * t_max);
    let reconstruction = reconstruct(&curve, tensor, t_lo)?;
    Ok(Solution {
        verdict,
        saddle,
        curve,
        global,
        reconstruction,
    })
}
