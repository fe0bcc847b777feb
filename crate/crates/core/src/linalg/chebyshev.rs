//! Chebyshev approximation of the clamp `t ↦ max(−r, min(r, t))`.

use super::{identity, real, CMat};
use crate::error::{Error, Result};

/// Largest degree `clamp_polynomial` will try.
pub const CLAMP_DEGREE_CAP: usize = 512;

const QUADRATURE_NODES: usize = 8192;
const CHECK_GRID: usize = 20_001;

/// `Σ c_j T_j(t / half_width)` on `[−half_width, half_width]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebyshevSeries {
    pub half_width: f64,
    pub coeffs: Vec<f64>,
}

impl ChebyshevSeries {
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Clenshaw recurrence.
    pub fn eval(&self, t: f64) -> f64 {
        let x = t / self.half_width;
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = c + 2.0 * x * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        self.coeffs.first().copied().unwrap_or(0.0) + x * b1 - b2
    }

    /// Matrix Clenshaw recurrence; valid for any square matrix.
    pub fn eval_matrix(&self, m: &CMat) -> CMat {
        let k = m.nrows();
        let x = m * real(1.0 / self.half_width);
        let eye = identity(k);
        let mut b1 = CMat::zeros(k, k);
        let mut b2 = CMat::zeros(k, k);
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = &eye * real(c) + &x * &b1 * real(2.0) - &b2;
            b2 = b1;
            b1 = b0;
        }
        &eye * real(self.coeffs.first().copied().unwrap_or(0.0)) + &x * &b1 - b2
    }

    fn truncated(&self, degree: usize) -> Self {
        Self {
            half_width: self.half_width,
            coeffs: self.coeffs[..=degree.min(self.degree())].to_vec(),
        }
    }
}

/// Polynomial approximation of the clamp with its measured sup-error.
#[derive(Debug, Clone)]
pub struct ClampPolynomial {
    pub series: ChebyshevSeries,
    pub r: f64,
    pub sup_error: f64,
}

impl ClampPolynomial {
    pub fn degree(&self) -> usize {
        self.series.degree()
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.series.eval(t)
    }

    pub fn eval_matrix(&self, m: &CMat) -> CMat {
        self.series.eval_matrix(m)
    }
}

fn clamp(t: f64, r: f64) -> f64 {
    t.clamp(-r, r)
}

fn check_points(r: f64, l1: f64) -> Vec<f64> {
    let mut pts: Vec<f64> = (0..CHECK_GRID)
        .map(|i| -l1 + 2.0 * l1 * i as f64 / (CHECK_GRID - 1) as f64)
        .collect();
    pts.extend([-r, r, 0.0]);
    pts
}

fn sup_error(series: &ChebyshevSeries, r: f64, pts: &[f64]) -> f64 {
    pts.iter()
        .map(|&t| (series.eval(t) - clamp(t, r)).abs())
        .fold(0.0, f64::max)
}

/// Chebyshev coefficients of the clamp on `[−l1, l1]` by Gauss–Chebyshev quadrature.
fn clamp_coefficients(r: f64, l1: f64, degree: usize) -> ChebyshevSeries {
    let n = QUADRATURE_NODES;
    let samples: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let theta = std::f64::consts::PI * (i as f64 + 0.5) / n as f64;
            (theta, clamp(l1 * theta.cos(), r))
        })
        .collect();
    let coeffs = (0..=degree)
        .map(|j| {
            let s: f64 = samples.iter().map(|(theta, f)| f * (j as f64 * theta).cos()).sum();
            let c = 2.0 * s / n as f64;
            if j == 0 {
                c / 2.0
            } else {
                c
            }
        })
        .collect();
    ChebyshevSeries { half_width: l1, coeffs }
}

/// Smallest-degree Chebyshev truncation whose sup-error against the clamp on a
/// dense grid of `[−l1, l1]` (plus the kinks `±r`) is at most `tol`.
pub fn clamp_polynomial(r: f64, l1: f64, tol: f64) -> Result<ClampPolynomial> {
    if !(r > 0.0 && r < l1 && tol > 0.0) {
        return Err(Error::InvalidInput(format!(
            "clamp needs 0 < r < L1 and tol > 0 (r={r}, L1={l1}, tol={tol})"
        )));
    }
    let full = clamp_coefficients(r, l1, CLAMP_DEGREE_CAP);
    let pts = check_points(r, l1);
    let error_at = |d: usize| sup_error(&full.truncated(d), r, &pts);

    let mut hi = 1;
    while error_at(hi) > tol {
        if hi == CLAMP_DEGREE_CAP {
            return Err(Error::ToleranceUnreachable {
                tol,
                cap: CLAMP_DEGREE_CAP,
                best: error_at(CLAMP_DEGREE_CAP),
            });
        }
        hi = (hi * 2).min(CLAMP_DEGREE_CAP);
    }
    let mut lo = hi / 2;
    // error_at(lo) > tol unless lo == 0; shrink the bracket.
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if error_at(mid) <= tol {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let series = full.truncated(hi);
    let err = sup_error(&series, r, &pts);
    Ok(ClampPolynomial {
        series,
        r,
        sup_error: err,
    })
}
