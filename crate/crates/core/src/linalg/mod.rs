//! Block-structured complex matrix kernel.
//!
//! Everything downstream works with dense `DMatrix<Complex<f64>>` blocks. A
//! [`BlockMatrix`] is either an element of `⊕ M_{n_j}(ℂ)` (one block per
//! summand) or a single full matrix in `M_k(ℂ)`.

mod chebyshev;
mod haar;
pub mod io;
mod ncpoly;
mod polar;

pub use chebyshev::{clamp_polynomial, ChebyshevSeries, ClampPolynomial, CLAMP_DEGREE_CAP};
pub use haar::{ginibre, haar_unitary, random_hermitian, RngSeed};
pub use ncpoly::{apply_nc_polynomial, lipschitz_estimate};
pub use polar::{
    isometry_between, nearest_unitary_on_projection, polar_parts, polar_unitary, range_basis, PolarParts,
    ProjectionCompletion,
};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub type C64 = nalgebra::Complex<f64>;
pub type CMat = DMatrix<C64>;

/// Default tolerance for metric identities in `|·|₂`.
pub const METRIC_TOL: f64 = 1e-8;
/// Default tolerance for algebraic identities such as `u*u = I`.
pub const ALGEBRAIC_TOL: f64 = 1e-10;

/// Numerical tolerances shared by every checker.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub metric: f64,
    pub algebraic: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            metric: METRIC_TOL,
            algebraic: ALGEBRAIC_TOL,
        }
    }
}

impl Tolerances {
    /// Parses an override such as `"1e-9"` (metric only) or
    /// `"metric=1e-9,algebraic=1e-12"`.
    pub fn parse_override(&self, text: &str) -> Result<Self> {
        let mut out = *self;
        let text = text.trim();
        if let Ok(v) = text.parse::<f64>() {
            out.metric = positive(v)?;
            return Ok(out);
        }
        for part in text.split(',') {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad tolerance entry '{part}'")))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad tolerance value '{value}'")))?;
            match key.trim() {
                "metric" => out.metric = positive(value)?,
                "algebraic" => out.algebraic = positive(value)?,
                other => return Err(Error::Parse(format!("unknown tolerance '{other}'"))),
            }
        }
        Ok(out)
    }

    /// Defaults overridden by the `MSL_TOL` environment variable when set.
    pub fn from_env() -> Result<Self> {
        match std::env::var("MSL_TOL") {
            Ok(v) if !v.trim().is_empty() => Self::default().parse_override(&v),
            _ => Ok(Self::default()),
        }
    }
}

fn positive(v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Parse(format!("tolerance must be positive, got {v}")))
    }
}

pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn real(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(k: usize) -> CMat {
    CMat::identity(k, k)
}

pub fn diag_real(values: &[f64]) -> CMat {
    let mut m = CMat::zeros(values.len(), values.len());
    for (i, v) in values.iter().enumerate() {
        m[(i, i)] = real(*v);
    }
    m
}

/// Matrix unit `e_{ij}` in `M_k`.
pub fn matrix_unit(k: usize, i: usize, j: usize) -> CMat {
    let mut m = CMat::zeros(k, k);
    m[(i, j)] = real(1.0);
    m
}

/// Normalized trace `tr_k(x) = Tr(x)/k`.
pub fn normalized_trace(x: &CMat) -> C64 {
    x.trace() / x.nrows() as f64
}

/// Normalized Hilbert–Schmidt norm `(tr_k(x*x))^{1/2}` of a full matrix.
pub fn hs_norm_full(x: &CMat) -> f64 {
    if x.nrows() == 0 {
        return 0.0;
    }
    (x.norm_squared() / x.nrows() as f64).sqrt()
}

/// Operator norm (largest singular value), as `λ_max(x*x)^{1/2}`.
pub fn op_norm_full(x: &CMat) -> f64 {
    if x.nrows() == 0 || x.ncols() == 0 {
        return 0.0;
    }
    let g = x.adjoint() * x;
    nalgebra::SymmetricEigen::new(g)
        .eigenvalues
        .iter()
        .fold(0.0_f64, |a, b| a.max(*b))
        .sqrt()
}

/// `‖u*u − I‖_F`, an upper bound for the operator-norm residual.
pub fn unitarity_residual(u: &CMat) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    (u.adjoint() * u - identity(u.nrows())).norm()
}

pub fn hermitian_residual(x: &CMat) -> f64 {
    (x - x.adjoint()).norm()
}

pub fn block_diag(blocks: &[CMat]) -> CMat {
    let k: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = CMat::zeros(k, k);
    let mut off = 0;
    for b in blocks {
        let n = b.nrows();
        out.view_mut((off, off), (n, n)).copy_from(b);
        off += n;
    }
    out
}

/// `u x u*`.
pub fn conjugate(u: &CMat, x: &CMat) -> CMat {
    u * x * u.adjoint()
}

/// `Tr(a b)` without forming the product.
pub fn trace_of_product(a: &CMat, b: &CMat) -> C64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// Element of `⊕ M_{n_j}(ℂ)` or of a single `M_k(ℂ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMatrix {
    blocks: Vec<CMat>,
    selfadjoint_hint: bool,
}

impl BlockMatrix {
    pub fn new(blocks: Vec<CMat>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidInput("block matrix needs at least one block".into()));
        }
        if let Some(b) = blocks.iter().find(|b| !b.is_square() || b.nrows() == 0) {
            return Err(Error::ShapeMismatch(format!(
                "block of shape {}x{} is not a non-empty square",
                b.nrows(),
                b.ncols()
            )));
        }
        Ok(Self {
            blocks,
            selfadjoint_hint: false,
        })
    }

    /// Single full matrix in `M_k(ℂ)`.
    pub fn full(m: CMat) -> Result<Self> {
        Self::new(vec![m])
    }

    pub fn identity(dims: &[usize]) -> Self {
        Self {
            blocks: dims.iter().map(|&n| identity(n)).collect(),
            selfadjoint_hint: true,
        }
    }

    pub fn zeros(dims: &[usize]) -> Self {
        Self {
            blocks: dims.iter().map(|&n| CMat::zeros(n, n)).collect(),
            selfadjoint_hint: true,
        }
    }

    /// Marks the element as self-adjoint after checking `‖x − x*‖ < 1e-12` per block.
    pub fn with_selfadjoint_hint(mut self) -> Result<Self> {
        for b in &self.blocks {
            let r = hermitian_residual(b);
            if r >= 1e-12 {
                return Err(Error::InvalidInput(format!(
                    "self-adjoint hint rejected, residual {r:e}"
                )));
            }
        }
        self.selfadjoint_hint = true;
        Ok(self)
    }

    pub fn selfadjoint_hint(&self) -> bool {
        self.selfadjoint_hint
    }

    pub fn blocks(&self) -> &[CMat] {
        &self.blocks
    }

    pub fn block(&self, j: usize) -> &CMat {
        &self.blocks[j]
    }

    pub fn dims(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.nrows()).collect()
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn into_blocks(self) -> Vec<CMat> {
        self.blocks
    }

    /// Block-diagonal dense matrix.
    pub fn to_dense(&self) -> CMat {
        block_diag(&self.blocks)
    }

    pub fn adjoint(&self) -> Self {
        Self {
            blocks: self.blocks.iter().map(|b| b.adjoint()).collect(),
            selfadjoint_hint: self.selfadjoint_hint,
        }
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::ShapeMismatch(format!(
                "block dims {:?} vs {:?}",
                self.dims(),
                other.dims()
            )));
        }
        Ok(())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self {
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a * b).collect(),
            selfadjoint_hint: false,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self {
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a + b).collect(),
            selfadjoint_hint: self.selfadjoint_hint && other.selfadjoint_hint,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self {
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a - b).collect(),
            selfadjoint_hint: self.selfadjoint_hint && other.selfadjoint_hint,
        })
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            blocks: self.blocks.iter().map(|b| b * c).collect(),
            selfadjoint_hint: self.selfadjoint_hint && c.im == 0.0,
        }
    }

    pub fn is_selfadjoint(&self, tol: f64) -> bool {
        self.blocks.iter().all(|b| hermitian_residual(b) <= tol)
    }

    /// Entries of all blocks concatenated column-major.
    pub fn vectorize(&self) -> Vec<C64> {
        self.blocks.iter().flat_map(|b| b.iter().copied()).collect()
    }

    /// `Σ_j w_j tr_{n_j}(x_j)`.
    pub fn weighted_trace(&self, weights: &[f64]) -> Result<C64> {
        if weights.len() != self.blocks.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} weights for {} blocks",
                weights.len(),
                self.blocks.len()
            )));
        }
        Ok(self
            .blocks
            .iter()
            .zip(weights)
            .map(|(b, w)| normalized_trace(b) * *w)
            .sum())
    }
}

/// Hilbert–Schmidt norm `φ(x*x)^{1/2}` for the weighted trace
/// `φ = ⊕ w_j tr_{n_j}`; a full matrix uses the single weight `[1.0]`.
pub fn hs_norm(x: &BlockMatrix, weights: &[f64]) -> Result<f64> {
    if weights.len() != x.num_blocks() {
        return Err(Error::ShapeMismatch(format!(
            "{} weights for {} blocks",
            weights.len(),
            x.num_blocks()
        )));
    }
    let s: f64 = x
        .blocks()
        .iter()
        .zip(weights)
        .map(|(b, w)| w * b.norm_squared() / b.nrows() as f64)
        .sum();
    Ok(s.max(0.0).sqrt())
}

/// Largest singular value across blocks.
pub fn op_norm(x: &BlockMatrix) -> f64 {
    x.blocks().iter().map(op_norm_full).fold(0.0_f64, f64::max)
}
