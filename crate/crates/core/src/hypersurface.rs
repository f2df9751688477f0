//! Rotationally symmetric graphs `y_{n+1} = h(y_1² + … + y_n²)` in ℝ^{n+1}:
//! induced metric, Ricci tensor, principal curvatures and the Gauss-equation
//! curvature tensors in the principal frame.
//!
//! The profile `h` is a function of `u = r²`; in expression text the variable
//! is still written `t`.

use thiserror::Error;

use crate::exprfn::{EvalError, Jet2, ScalarFn, SmoothFn};
use crate::tensorlab::{rotsym_to_cartesian, MetricField, SymMatrix, Tensor4};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum HypersurfaceError {
    #[error("dimension must be at least 2, got {0}")]
    Dimension(usize),
    #[error("radius {r} outside [0, {r_max}]")]
    Radius { r: f64, r_max: f64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Clone, Debug)]
pub struct GraphEmbedding {
    n: usize,
    h: ScalarFn,
    r_max: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InducedMetric {
    /// `1 + 4r²h'(r²)²`
    pub f_val: f64,
    pub g_rr: f64,
    /// coefficient of dΘ², i.e. r²
    pub g_tt: f64,
}

/// Ricci tensor of the induced metric in the `(r, Θ)` chart.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GraphRicci {
    /// coefficient of dr²
    pub ric_rr: f64,
    /// coefficient of dΘ² (unit-sphere metric)
    pub ric_tt_unit: f64,
}

/// Which tangential coefficient to use in [`GraphEmbedding::ricci_graph_with`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TangentialCoefficient {
    /// `r f'/(2f²) − (n−2)/f + (n−2)`
    Corrected,
    /// `r f'/(2f²) − (n+2)/f + (n−2)`; fails on flat space, kept for
    /// regression diagnostics.
    Printed,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrincipalCurvatures {
    /// meridian direction
    pub h1: f64,
    /// the n−1 equal curvatures along the orbit sphere
    pub h2: f64,
}

/// `f(u) = 1 + 4u h'(u)²` and `df/du = 4h'² + 8u h' h''`.
#[derive(Clone, Copy, Debug)]
struct Profile {
    u: f64,
    dh: f64,
    f: f64,
    f_u: f64,
}

impl GraphEmbedding {
    pub fn new(n: usize, h: ScalarFn, r_max: f64) -> Result<Self, HypersurfaceError> {
        if n < 2 {
            return Err(HypersurfaceError::Dimension(n));
        }
        Ok(GraphEmbedding { n, h, r_max })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn profile_fn(&self) -> &ScalarFn {
        &self.h
    }

    fn profile(&self, r: f64) -> Result<Profile, HypersurfaceError> {
        if !(0.0..=self.r_max).contains(&r) {
            return Err(HypersurfaceError::Radius {
                r,
                r_max: self.r_max,
            });
        }
        let u = r * r;
        let Jet2 { d1: dh, d2: ddh, .. } = self.h.jet2(u)?;
        Ok(Profile {
            u,
            dh,
            f: 1.0 + 4.0 * u * dh * dh,
            f_u: 4.0 * dh * dh + 8.0 * u * dh * ddh,
        })
    }

    pub fn induced_metric(&self, r: f64) -> Result<InducedMetric, HypersurfaceError> {
        let p = self.profile(r)?;
        Ok(InducedMetric {
            f_val: p.f,
            g_rr: p.f,
            g_tt: r * r,
        })
    }

    pub fn ricci_graph(&self, r: f64) -> Result<GraphRicci, HypersurfaceError> {
        self.ricci_graph_with(r, TangentialCoefficient::Corrected)
    }

    /// `Ric_rr = (n−1) f'/(2 r f)`, `Ric_ΘΘ = r f'/(2f²) − c/f + (n−2)`.
    ///
    /// With `f' = 2r f_u` both are written in terms of `u = r²`, so the
    /// values at `r = 0` come out as the continuous limits.
    pub fn ricci_graph_with(
        &self,
        r: f64,
        coefficient: TangentialCoefficient,
    ) -> Result<GraphRicci, HypersurfaceError> {
        let p = self.profile(r)?;
        let m = (self.n - 2) as f64;
        let ric_rr = (self.n - 1) as f64 * p.f_u / p.f;
        let radial = p.u * p.f_u / (p.f * p.f);
        let ric_tt_unit = match coefficient {
            TangentialCoefficient::Corrected => radial + m * (1.0 - 1.0 / p.f),
            TangentialCoefficient::Printed => radial - (self.n + 2) as f64 / p.f + m,
        };
        Ok(GraphRicci {
            ric_rr,
            ric_tt_unit,
        })
    }

    /// Ricci components on a unit radial vector and a unit tangential vector.
    pub fn ricci_frame(&self, r: f64) -> Result<(f64, f64), HypersurfaceError> {
        let p = self.profile(r)?;
        let m = (self.n - 2) as f64;
        let radial = (self.n - 1) as f64 * p.f_u / (p.f * p.f);
        // Ric_ΘΘ / r², with (1 − 1/f)/r² = 4h'²/f
        let tangential = p.f_u / (p.f * p.f) + m * 4.0 * p.dh * p.dh / p.f;
        Ok((radial, tangential))
    }

    pub fn principal_curvatures(&self, r: f64) -> Result<PrincipalCurvatures, HypersurfaceError> {
        if !(0.0..=self.r_max).contains(&r) {
            return Err(HypersurfaceError::Radius {
                r,
                r_max: self.r_max,
            });
        }
        let u = r * r;
        let j = self.h.jet2(u)?;
        let f = 1.0 + 4.0 * u * j.d1 * j.d1;
        Ok(PrincipalCurvatures {
            h1: (2.0 * j.d1 + 4.0 * u * j.d2) / f.powf(1.5),
            h2: 2.0 * j.d1 / f.sqrt(),
        })
    }

    /// `[h1, h2, …, h2]` (length n).
    pub fn principal_vector(&self, r: f64) -> Result<Vec<f64>, HypersurfaceError> {
        let pc = self.principal_curvatures(r)?;
        let mut v = vec![pc.h2; self.n];
        v[0] = pc.h1;
        Ok(v)
    }

    /// The induced metric on Cartesian coordinates of ℝⁿ, for the numerical
    /// oracle. Points where `h` cannot be evaluated produce a non-finite
    /// metric, which the oracle reports as an error.
    pub fn cartesian_metric(&self) -> impl MetricField + '_ {
        rotsym_to_cartesian(
            move |t| self.induced_metric(t).map_or(f64::NAN, |m| m.f_val),
            |t| t * t,
            self.n,
        )
    }
}

/// Curvature of a hypersurface in its principal orthonormal frame.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussCurvatures {
    pub riemann: Tensor4,
    pub ricci_frame: SymMatrix,
    pub scalar: f64,
}

/// `R_ijkl = h_i h_j (δ_ik δ_jl − δ_jk δ_il)`; the Ricci tensor and scalar
/// curvature are obtained by contraction.
pub fn gauss_curvatures(principal: &[f64]) -> GaussCurvatures {
    let n = principal.len();
    let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    let riemann = Tensor4::from_fn(n, |i, j, k, l| {
        principal[i] * principal[j] * (d(i, k) * d(j, l) - d(j, k) * d(i, l))
    });
    let ricci_frame = riemann.ricci_contraction(&SymMatrix::identity(n));
    let scalar = (0..n).map(|i| ricci_frame.get(i, i)).sum();
    GaussCurvatures {
        riemann,
        ricci_frame,
        scalar,
    }
}
