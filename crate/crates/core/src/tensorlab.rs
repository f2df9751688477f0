//! Numerical curvature of an arbitrary metric field on a Cartesian chart.
//!
//! Christoffel symbols are built from central differences of the metric and
//! the Ricci tensor from central differences of the Christoffel symbols, so
//! every quantity here is independent of the closed-form curvature formulas
//! elsewhere in the crate.

use thiserror::Error;

/// Largest dimension accepted by the oracle (cost grows like n^4).
pub const MAX_DIM: usize = 8;

/// Default finite-difference step.
pub const DEFAULT_STEP: f64 = 1e-3;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum TensorError {
    #[error("singular matrix: pivot {pivot:e} below 1e-14")]
    Singular { pivot: f64 },
    #[error("dimension {got} not supported (expected {expected})")]
    Dimension { expected: String, got: usize },
    #[error("metric undefined at {0}")]
    Domain(String),
    #[error("non-finite metric entry at x = {0:?}")]
    NonFinite(Vec<f64>),
    #[error("step must be positive, got {0}")]
    BadStep(f64),
}

/// Symmetric n×n matrix stored as its upper triangle.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix {
            n,
            data: vec![0.0; n * (n + 1) / 2],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    /// Builds from `f(i, j)` evaluated for `i <= j` only.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn diagonal(d: &[f64]) -> Self {
        Self::from_fn(d.len(), |i, j| if i == j { d[i] } else { 0.0 })
    }

    /// Symmetrizes a dense matrix; returns it with its asymmetry max |a_ij - a_ji|.
    pub fn from_dense(rows: &[Vec<f64>]) -> (Self, f64) {
        let n = rows.len();
        let mut asym = 0.0f64;
        let m = Self::from_fn(n, |i, j| {
            asym = asym.max((rows[i][j] - rows[j][i]).abs());
            0.5 * (rows[i][j] + rows[j][i])
        });
        (m, asym)
    }

    #[inline]
    fn index(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        i * self.n - i * (i + 1) / 2 + j
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[self.index(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.index(i, j);
        self.data[k] = v;
    }

    /// Number of stored (independent) components, n(n+1)/2.
    pub fn independent_components(&self) -> usize {
        self.data.len()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    pub fn max_abs_diff(&self, other: &SymMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn scale(&self, c: f64) -> SymMatrix {
        SymMatrix {
            n: self.n,
            data: self.data.iter().map(|x| x * c).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// `u^T M v`.
    pub fn bilinear(&self, u: &[f64], v: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                acc += u[i] * self.get(i, j) * v[j];
            }
        }
        acc
    }

    /// `Q M Q^T` for a dense n×n `Q`.
    pub fn congruence(&self, q: &[Vec<f64>]) -> SymMatrix {
        SymMatrix::from_fn(self.n, |a, b| self.bilinear(&q[a], &q[b]))
    }

    /// Dense product `self · other`.
    pub fn mul_dense(&self, other: &SymMatrix) -> Vec<Vec<f64>> {
        let n = self.n;
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|k| self.get(i, k) * other.get(k, j)).sum())
                    .collect()
            })
            .collect()
    }

    /// Full contraction `Σ a_ij b_ij`.
    pub fn contract(&self, other: &SymMatrix) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                acc += self.get(i, j) * other.get(i, j);
            }
        }
        acc
    }

    fn axpy(&mut self, a: f64, x: &SymMatrix) {
        for (y, x) in self.data.iter_mut().zip(&x.data) {
            *y += a * x;
        }
    }
}

/// Rank-4 array `R_{ijkl}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor4 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor4 {
    pub fn zeros(n: usize) -> Self {
        Tensor4 {
            n,
            data: vec![0.0; n * n * n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        t.data[((i * n + j) * n + k) * n + l] = f(i, j, k, l);
                    }
                }
            }
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let n = self.n;
        self.data[((i * n + j) * n + k) * n + l]
    }

    fn max_over(&self, f: impl Fn(usize, usize, usize, usize) -> f64) -> f64 {
        let n = self.n;
        let mut m = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        m = m.max(f(i, j, k, l).abs());
                    }
                }
            }
        }
        m
    }

    /// max |R_ijkl - R_klij|
    pub fn pair_symmetry_defect(&self) -> f64 {
        self.max_over(|i, j, k, l| self.get(i, j, k, l) - self.get(k, l, i, j))
    }

    /// max |R_ijkl + R_jikl| and |R_ijkl + R_ijlk|
    pub fn antisymmetry_defect(&self) -> f64 {
        self.max_over(|i, j, k, l| self.get(i, j, k, l) + self.get(j, i, k, l))
            .max(self.max_over(|i, j, k, l| self.get(i, j, k, l) + self.get(i, j, l, k)))
    }

    /// max |R_ijkl + R_iljk + R_iklj|
    pub fn bianchi_defect(&self) -> f64 {
        self.max_over(|i, j, k, l| {
            self.get(i, j, k, l) + self.get(i, l, j, k) + self.get(i, k, l, j)
        })
    }

    pub fn max_abs_diff(&self, other: &Tensor4) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// `R_ik = g^{jl} R_ijkl`.
    pub fn ricci_contraction(&self, g_inv: &SymMatrix) -> SymMatrix {
        let n = self.n;
        SymMatrix::from_fn(n, |i, k| {
            let mut acc = 0.0;
            for j in 0..n {
                for l in 0..n {
                    acc += g_inv.get(j, l) * self.get(i, j, k, l);
                }
            }
            acc
        })
    }

    /// Components on the frame whose vectors are the rows of `frame`.
    pub fn in_frame(&self, frame: &[Vec<f64>]) -> Tensor4 {
        let n = self.n;
        // contract one index at a time
        let mut cur = self.data.clone();
        for slot in 0..4 {
            let mut next = vec![0.0; cur.len()];
            let stride = n.pow(3 - slot as u32);
            for idx in 0..cur.len() {
                let a = (idx / stride) % n;
                let base = idx - a * stride;
                let mut acc = 0.0;
                for (i, e) in frame[a].iter().enumerate() {
                    acc += e * cur[base + i * stride];
                }
                next[idx] = acc;
            }
            cur = next;
        }
        Tensor4 { n, data: cur }
    }
}

/// Christoffel symbols of the second kind, `get(k, i, j) = Γ^k_{ij}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Christoffel {
    n: usize,
    data: Vec<f64>,
}

impl Christoffel {
    fn zeros(n: usize) -> Self {
        Christoffel {
            n,
            data: vec![0.0; n * n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[(k * self.n + i) * self.n + j]
    }

    #[inline]
    fn set(&mut self, k: usize, i: usize, j: usize, v: f64) {
        self.data[(k * self.n + i) * self.n + j] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// A metric given pointwise on a Cartesian chart.
pub trait MetricField: Sync {
    fn dim(&self) -> usize;
    fn metric(&self, x: &[f64]) -> Result<SymMatrix, TensorError>;
}

/// Adapts a closure into a [`MetricField`].
pub struct FnMetric<F> {
    n: usize,
    f: F,
}

impl<F> FnMetric<F>
where
    F: Fn(&[f64]) -> SymMatrix + Sync,
{
    pub fn new(n: usize, f: F) -> Self {
        FnMetric { n, f }
    }
}

impl<F> MetricField for FnMetric<F>
where
    F: Fn(&[f64]) -> SymMatrix + Sync,
{
    fn dim(&self) -> usize {
        self.n
    }
    fn metric(&self, x: &[f64]) -> Result<SymMatrix, TensorError> {
        Ok((self.f)(x))
    }
}

/// `A(t) dt² + B(t) dΘ²` realized on Cartesian coordinates, `t = |x|`.
pub struct RotSymCartesian<A, B> {
    n: usize,
    a: A,
    b: B,
}

/// `g_ij(x) = A(t) P_ij + (B(t)/t²)(δ_ij − P_ij)` with `P = x xᵀ / t²`.
pub fn rotsym_to_cartesian<A, B>(a: A, b: B, n: usize) -> RotSymCartesian<A, B>
where
    A: Fn(f64) -> f64 + Sync,
    B: Fn(f64) -> f64 + Sync,
{
    RotSymCartesian { n, a, b }
}

impl<A, B> MetricField for RotSymCartesian<A, B>
where
    A: Fn(f64) -> f64 + Sync,
    B: Fn(f64) -> f64 + Sync,
{
    fn dim(&self) -> usize {
        self.n
    }

    fn metric(&self, x: &[f64]) -> Result<SymMatrix, TensorError> {
        let t2: f64 = x.iter().map(|v| v * v).sum();
        if t2 == 0.0 {
            return Err(TensorError::Domain("the origin (t = 0)".into()));
        }
        let t = t2.sqrt();
        let a = (self.a)(t);
        let tang = (self.b)(t) / t2;
        if !a.is_finite() || !tang.is_finite() {
            return Err(TensorError::NonFinite(x.to_vec()));
        }
        Ok(SymMatrix::from_fn(self.n, |i, j| {
            let p = x[i] * x[j] / t2;
            let delta = if i == j { 1.0 } else { 0.0 };
            a * p + tang * (delta - p)
        }))
    }
}

fn check_dim(n: usize) -> Result<(), TensorError> {
    if n == 0 || n > MAX_DIM {
        return Err(TensorError::Dimension {
            expected: format!("1..={MAX_DIM}"),
            got: n,
        });
    }
    Ok(())
}

/// Inverse of a symmetric invertible matrix by Gauss-Jordan elimination with
/// partial pivoting.
pub fn invert_spd(m: &SymMatrix) -> Result<SymMatrix, TensorError> {
    let n = m.dim();
    check_dim(n)?;
    let mut a = m.to_dense();
    let mut inv = SymMatrix::identity(n).to_dense();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        let p = a[piv][col];
        if !(p.abs() >= 1e-14) {
            return Err(TensorError::Singular { pivot: p.abs() });
        }
        a.swap(col, piv);
        inv.swap(col, piv);
        for j in 0..n {
            a[col][j] /= p;
            inv[col][j] /= p;
        }
        for i in 0..n {
            if i != col {
                let f = a[i][col];
                if f != 0.0 {
                    for j in 0..n {
                        a[i][j] -= f * a[col][j];
                        inv[i][j] -= f * inv[col][j];
                    }
                }
            }
        }
    }
    Ok(SymMatrix::from_dense(&inv).0)
}

fn shifted(x: &[f64], axis: usize, delta: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    y[axis] += delta;
    y
}

fn checked_metric(mf: &dyn MetricField, x: &[f64]) -> Result<SymMatrix, TensorError> {
    let g = mf.metric(x)?;
    if !g.is_finite() {
        return Err(TensorError::NonFinite(x.to_vec()));
    }
    Ok(g)
}

/// Central-difference partials `∂_i g` for every axis.
fn metric_gradient(
    mf: &dyn MetricField,
    x: &[f64],
    h: f64,
) -> Result<Vec<SymMatrix>, TensorError> {
    (0..x.len())
        .map(|i| {
            let mut d = checked_metric(mf, &shifted(x, i, h))?;
            d.axpy(-1.0, &checked_metric(mf, &shifted(x, i, -h))?);
            Ok(d.scale(0.5 / h))
        })
        .collect()
}

fn validate(mf: &dyn MetricField, x: &[f64], h: f64) -> Result<usize, TensorError> {
    let n = mf.dim();
    check_dim(n)?;
    if x.len() != n {
        return Err(TensorError::Dimension {
            expected: format!("point of dimension {n}"),
            got: x.len(),
        });
    }
    if !(h > 0.0) {
        return Err(TensorError::BadStep(h));
    }
    Ok(n)
}

/// `Γ^t_ij = ½ g^{tk}[∂_i g_jk + ∂_j g_ik − ∂_k g_ij]`, central differences
/// with step `h`. Symmetric in the lower indices by construction.
pub fn christoffel(mf: &dyn MetricField, x: &[f64], h: f64) -> Result<Christoffel, TensorError> {
    let n = validate(mf, x, h)?;
    let g_inv = invert_spd(&checked_metric(mf, x)?)?;
    let dg = metric_gradient(mf, x, h)?;
    let mut gamma = Christoffel::zeros(n);
    for i in 0..n {
        for j in i..n {
            // lowered symbol Γ_{kij}
            let lowered: Vec<f64> = (0..n)
                .map(|k| 0.5 * (dg[i].get(j, k) + dg[j].get(i, k) - dg[k].get(i, j)))
                .collect();
            for t in 0..n {
                let v: f64 = (0..n).map(|k| g_inv.get(t, k) * lowered[k]).sum();
                gamma.set(t, i, j, v);
                gamma.set(t, j, i, v);
            }
        }
    }
    Ok(gamma)
}

/// Ricci tensor estimate with the asymmetry removed by symmetrization.
#[derive(Clone, Debug, PartialEq)]
pub struct RicciEstimate {
    pub ricci: SymMatrix,
    /// max |R_ij − R_ji| before symmetrization.
    pub asymmetry: f64,
}

/// `R_ij = ∂_s Γ^s_ij − ∂_j Γ^s_is + Γ^s_ij Γ^t_st − Γ^s_it Γ^t_sj`, with the
/// outer derivatives taken by central differences of [`christoffel`].
pub fn ricci_numeric(mf: &dyn MetricField, x: &[f64], h: f64) -> Result<RicciEstimate, TensorError> {
    let n = validate(mf, x, h)?;
    let gamma = christoffel(mf, x, h)?;
    // dgamma[a] = ∂_a Γ
    let dgamma: Vec<Christoffel> = (0..n)
        .map(|a| {
            let p = christoffel(mf, &shifted(x, a, h), h)?;
            let m = christoffel(mf, &shifted(x, a, -h), h)?;
            let mut d = Christoffel::zeros(n);
            for (dst, (pp, mm)) in d.data.iter_mut().zip(p.data.iter().zip(&m.data)) {
                *dst = (pp - mm) / (2.0 * h);
            }
            Ok(d)
        })
        .collect::<Result<_, TensorError>>()?;

    let trace: Vec<f64> = (0..n)
        .map(|s| (0..n).map(|t| gamma.get(t, s, t)).sum())
        .collect();
    let mut dense = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut r = 0.0;
            for s in 0..n {
                r += dgamma[s].get(s, i, j) - dgamma[j].get(s, i, s);
                r += gamma.get(s, i, j) * trace[s];
                for t in 0..n {
                    r -= gamma.get(s, i, t) * gamma.get(t, s, j);
                }
            }
            dense[i][j] = r;
        }
    }
    let (ricci, asymmetry) = SymMatrix::from_dense(&dense);
    Ok(RicciEstimate { ricci, asymmetry })
}

/// `R = g^{ij} R_ij`.
pub fn scalar_curvature(mf: &dyn MetricField, x: &[f64], h: f64) -> Result<f64, TensorError> {
    let ric = ricci_numeric(mf, x, h)?.ricci;
    let g_inv = invert_spd(&checked_metric(mf, x)?)?;
    Ok(g_inv.contract(&ric))
}

/// The second-derivative expression for the Ricci tensor with the
/// `1/(2(n−1))` and `1/(n−1)` prefactors as written in some references:
///
/// `1/(2(n−1)) g^{kl}[∂_i∂_k g_jl + ∂_j∂_l g_ik − ∂_i∂_j g_kl − ∂_k∂_l g_ij]
///  + 1/(n−1) g^{kl} g_pq [Γ^p_ik Γ^q_jl − Γ^p_ij Γ^q_kl]`.
///
/// Diagnostic only; [`ricci_numeric`] is the canonical estimate.
pub fn ricci_second_derivative_form(
    mf: &dyn MetricField,
    x: &[f64],
    h: f64,
) -> Result<SymMatrix, TensorError> {
    let n = validate(mf, x, h)?;
    if n < 2 {
        return Err(TensorError::Dimension {
            expected: "n >= 2".into(),
            got: n,
        });
    }
    let g = checked_metric(mf, x)?;
    let g_inv = invert_spd(&g)?;
    let gamma = christoffel(mf, x, h)?;
    // d2g[a][b] = ∂_a ∂_b g
    let mut d2g = vec![vec![SymMatrix::zeros(n); n]; n];
    for a in 0..n {
        for b in a..n {
            let d = if a == b {
                let mut d = checked_metric(mf, &shifted(x, a, h))?;
                d.axpy(1.0, &checked_metric(mf, &shifted(x, a, -h))?);
                d.axpy(-2.0, &g);
                d.scale(1.0 / (h * h))
            } else {
                let pp = checked_metric(mf, &shifted(&shifted(x, a, h), b, h))?;
                let pm = checked_metric(mf, &shifted(&shifted(x, a, h), b, -h))?;
                let mp = checked_metric(mf, &shifted(&shifted(x, a, -h), b, h))?;
                let mm = checked_metric(mf, &shifted(&shifted(x, a, -h), b, -h))?;
                let mut d = pp;
                d.axpy(-1.0, &pm);
                d.axpy(-1.0, &mp);
                d.axpy(1.0, &mm);
                d.scale(0.25 / (h * h))
            };
            d2g[a][b] = d.clone();
            d2g[b][a] = d;
        }
    }
    let nm1 = (n - 1) as f64;
    Ok(SymMatrix::from_fn(n, |i, j| {
        let mut second = 0.0;
        let mut quad = 0.0;
        for k in 0..n {
            for l in 0..n {
                let gkl = g_inv.get(k, l);
                second += gkl
                    * (d2g[i][k].get(j, l) + d2g[j][l].get(i, k)
                        - d2g[i][j].get(k, l)
                        - d2g[k][l].get(i, j));
                let mut q = 0.0;
                for p in 0..n {
                    for r in 0..n {
                        q += g.get(p, r)
                            * (gamma.get(p, i, k) * gamma.get(r, j, l)
                                - gamma.get(p, i, j) * gamma.get(r, k, l));
                    }
                }
                quad += gkl * q;
            }
        }
        second / (2.0 * nm1) + quad / nm1
    }))
}

/// Both Ricci expressions at one point and the least-squares ratio
/// `⟨second_form, christoffel_form⟩ / ⟨christoffel_form, christoffel_form⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct FormComparison {
    pub christoffel_form: SymMatrix,
    pub second_derivative_form: SymMatrix,
    pub ratio: f64,
}

pub fn compare_ricci_forms(
    mf: &dyn MetricField,
    x: &[f64],
    h: f64,
) -> Result<FormComparison, TensorError> {
    let christoffel_form = ricci_numeric(mf, x, h)?.ricci;
    let second_derivative_form = ricci_second_derivative_form(mf, x, h)?;
    let den = christoffel_form.contract(&christoffel_form);
    let ratio = if den > 0.0 {
        second_derivative_form.contract(&christoffel_form) / den
    } else {
        f64::NAN
    };
    Ok(FormComparison {
        christoffel_form,
        second_derivative_form,
        ratio,
    })
}

/// In dimension three the Riemann tensor is determined by the Ricci tensor:
/// `R_ijkl = g_ik R_jl − g_il R_jk − g_jk R_il + g_jl R_ik − ½R(g_ik g_jl − g_il g_jk)`.
pub fn riemann_from_ricci_3d(ric: &SymMatrix, g: &SymMatrix) -> Result<Tensor4, TensorError> {
    if ric.dim() != 3 || g.dim() != 3 {
        return Err(TensorError::Dimension {
            expected: "3".into(),
            got: ric.dim(),
        });
    }
    let scalar = invert_spd(g)?.contract(ric);
    Ok(Tensor4::from_fn(3, |i, j, k, l| {
        g.get(i, k) * ric.get(j, l) - g.get(i, l) * ric.get(j, k) - g.get(j, k) * ric.get(i, l)
            + g.get(j, l) * ric.get(i, k)
            - 0.5 * scalar * (g.get(i, k) * g.get(j, l) - g.get(i, l) * g.get(j, k))
    }))
}

/// Gram-Schmidt on `seeds` with respect to `g`; returns a g-orthonormal frame
/// (rows), skipping seeds that are numerically dependent.
pub fn orthonormal_frame(g: &SymMatrix, seeds: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut frame: Vec<Vec<f64>> = Vec::new();
    for s in seeds {
        let mut v = s.clone();
        for e in &frame {
            let c = g.bilinear(&v, e);
            for (vi, ei) in v.iter_mut().zip(e) {
                *vi -= c * ei;
            }
        }
        let norm = g.bilinear(&v, &v).sqrt();
        if norm > 1e-10 {
            frame.push(v.into_iter().map(|x| x / norm).collect());
        }
        if frame.len() == g.dim() {
            break;
        }
    }
    frame
}

/// Frame at `x` whose first vector is radial: `x/|x|` normalized, followed by
/// g-orthonormal completions from the coordinate axes.
pub fn radial_frame(g: &SymMatrix, x: &[f64]) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut seeds = vec![x.to_vec()];
    seeds.extend((0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()));
    orthonormal_frame(g, &seeds)
}
