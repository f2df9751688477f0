//! Truncated Taylor series about a base point.
//!
//! Coefficients are normalized: `c[k] = f^(k)(t0) / k!`. Binary operations
//! truncate to the shorter operand, so a chain of derivatives and cancelling
//! divisions shrinks the series one order at a time.

use std::ops::{Add, Mul, Neg, Sub};

use super::JetScalar;
use super::jet::Jet2;

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    coeffs: Vec<f64>,
}

impl Series {
    pub fn from_coeffs(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "series needs at least one coefficient");
        Series { coeffs }
    }

    pub fn constant(c: f64, len: usize) -> Self {
        let mut coeffs = vec![0.0; len.max(1)];
        coeffs[0] = c;
        Series { coeffs }
    }

    /// The independent variable expanded about `t0`.
    pub fn variable(t0: f64, len: usize) -> Self {
        let mut s = Series::constant(t0, len.max(2));
        s.coeffs[1] = 1.0;
        s
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// k-th derivative at the base point.
    pub fn derivative_at(&self, k: usize) -> f64 {
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        self.coeffs.get(k).copied().unwrap_or(f64::NAN) * fact
    }

    /// Series of the derivative; one coefficient shorter.
    pub fn derivative(&self) -> Series {
        if self.coeffs.len() == 1 {
            return Series::constant(0.0, 1);
        }
        let coeffs = self.coeffs[1..]
            .iter()
            .enumerate()
            .map(|(k, c)| (k + 1) as f64 * c)
            .collect();
        Series { coeffs }
    }

    pub fn to_jet2(&self) -> Jet2 {
        Jet2::new(
            self.derivative_at(0),
            self.derivative_at(1),
            self.derivative_at(2),
        )
    }

    fn truncated(&self, len: usize) -> &[f64] {
        &self.coeffs[..len.min(self.coeffs.len())]
    }

    pub fn scale(&self, c: f64) -> Series {
        Series {
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    /// Quotient that first cancels common factors of `(t - t0)` when the
    /// divisor vanishes exactly at the base point (removable singularities
    /// such as `r(t)/t` at `t0 = 0`). Each cancellation drops one order.
    ///
    /// Returns `None` when the divisor vanishes identically or the numerator
    /// does not vanish where the divisor does.
    pub fn div_cancel(&self, den: &Series) -> Option<Series> {
        let mut num = self.coeffs.as_slice();
        let mut den = den.coeffs.as_slice();
        while den.first() == Some(&0.0) {
            let scale = num.iter().fold(0.0f64, |m, c| m.max(c.abs())).max(1.0);
            if num[0].abs() > 1e-12 * scale || den.len() < 2 || num.len() < 2 {
                return None;
            }
            num = &num[1..];
            den = &den[1..];
        }
        if den.is_empty() || num.is_empty() {
            return None;
        }
        Some(divide(num, den))
    }
}

fn divide(a: &[f64], b: &[f64]) -> Series {
    let len = a.len().min(b.len());
    let mut q = vec![0.0; len];
    for k in 0..len {
        let mut acc = a[k];
        for i in 1..=k {
            acc -= b[i] * q[k - i];
        }
        q[k] = acc / b[0];
    }
    Series { coeffs: q }
}

impl Add for Series {
    type Output = Series;
    fn add(self, o: Series) -> Series {
        let len = self.len().min(o.len());
        let coeffs = (0..len).map(|k| self.coeffs[k] + o.coeffs[k]).collect();
        Series { coeffs }
    }
}

impl Sub for Series {
    type Output = Series;
    fn sub(self, o: Series) -> Series {
        let len = self.len().min(o.len());
        let coeffs = (0..len).map(|k| self.coeffs[k] - o.coeffs[k]).collect();
        Series { coeffs }
    }
}

impl Neg for Series {
    type Output = Series;
    fn neg(self) -> Series {
        self.scale(-1.0)
    }
}

impl Mul for Series {
    type Output = Series;
    fn mul(self, o: Series) -> Series {
        let len = self.len().min(o.len());
        let a = self.truncated(len);
        let b = o.truncated(len);
        let coeffs = (0..len)
            .map(|k| (0..=k).map(|i| a[i] * b[k - i]).sum())
            .collect();
        Series { coeffs }
    }
}

impl std::ops::Div for Series {
    type Output = Series;
    fn div(self, o: Series) -> Series {
        divide(&self.coeffs, &o.coeffs)
    }
}

impl JetScalar for Series {
    const DIFFERENTIATES: bool = true;

    fn lift(&self, c: f64) -> Self {
        Series::constant(c, self.len())
    }

    fn value(&self) -> f64 {
        self.coeffs[0]
    }

    fn recip(&self) -> Self {
        divide(&Series::constant(1.0, self.len()).coeffs, &self.coeffs)
    }

    fn sin(&self) -> Self {
        sin_cos(&self.coeffs).0
    }

    fn cos(&self) -> Self {
        sin_cos(&self.coeffs).1
    }

    fn exp(&self) -> Self {
        let a = &self.coeffs;
        let mut e = vec![0.0; a.len()];
        e[0] = a[0].exp();
        for k in 1..a.len() {
            let s: f64 = (1..=k).map(|j| j as f64 * a[j] * e[k - j]).sum();
            e[k] = s / k as f64;
        }
        Series { coeffs: e }
    }

    fn ln(&self) -> Self {
        let a = &self.coeffs;
        let mut l = vec![0.0; a.len()];
        l[0] = a[0].ln();
        for k in 1..a.len() {
            let s: f64 = (1..k).map(|j| j as f64 * l[j] * a[k - j]).sum();
            l[k] = (a[k] - s / k as f64) / a[0];
        }
        Series { coeffs: l }
    }

    fn sqrt(&self) -> Self {
        let a = &self.coeffs;
        let mut s = vec![0.0; a.len()];
        s[0] = a[0].sqrt();
        for k in 1..a.len() {
            let acc: f64 = (1..k).map(|j| s[j] * s[k - j]).sum();
            s[k] = (a[k] - acc) / (2.0 * s[0]);
        }
        Series { coeffs: s }
    }

    fn powi(&self, k: i32) -> Self {
        let base = if k < 0 { self.recip() } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = Series::constant(1.0, self.len());
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * sq.clone();
            }
            e >>= 1;
            if e > 0 {
                sq = sq.clone() * sq;
            }
        }
        acc
    }
}

fn sin_cos(a: &[f64]) -> (Series, Series) {
    let mut s = vec![0.0; a.len()];
    let mut c = vec![0.0; a.len()];
    (s[0], c[0]) = a[0].sin_cos();
    for k in 1..a.len() {
        let mut ds = 0.0;
        let mut dc = 0.0;
        for j in 1..=k {
            ds += j as f64 * a[j] * c[k - j];
            dc += j as f64 * a[j] * s[k - j];
        }
        s[k] = ds / k as f64;
        c[k] = -dc / k as f64;
    }
    (Series { coeffs: s }, Series { coeffs: c })
}
