//! Block subgroups `H = {⊕ u_i repeated k_i times}` of `U_k`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{haar_unitary, polar_unitary, real, CMat};

/// `mult` copies of a `size × size` unitary along the diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgroupFactor {
    pub mult: usize,
    pub size: usize,
}

/// Tractable subgroup of `U_k`. Factor `i` occupies a contiguous range of
/// `mult_i · size_i` coordinates holding `u_i` repeated `mult_i` times.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TractableSubgroup {
    k: usize,
    factors: Vec<SubgroupFactor>,
}

impl TractableSubgroup {
    pub fn new(factors: Vec<SubgroupFactor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidInput("subgroup needs at least one factor".into()));
        }
        if factors.iter().any(|f| f.mult == 0 || f.size == 0) {
            return Err(Error::InvalidInput(
                "factor multiplicities and sizes must be ≥ 1".into(),
            ));
        }
        let k = factors.iter().map(|f| f.mult * f.size).sum();
        Ok(Self { k, factors })
    }

    /// `U(1) · I_k`.
    pub fn scalars(k: usize) -> Result<Self> {
        Self::new(vec![SubgroupFactor { mult: k, size: 1 }])
    }

    /// Diagonal unitaries.
    pub fn torus(k: usize) -> Result<Self> {
        Self::new(vec![SubgroupFactor { mult: 1, size: 1 }; k])
    }

    /// All of `U_k`.
    pub fn full(k: usize) -> Result<Self> {
        Self::new(vec![SubgroupFactor { mult: 1, size: k }])
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn factors(&self) -> &[SubgroupFactor] {
        &self.factors
    }

    /// Real dimension `Σ l_i²`.
    pub fn dim(&self) -> u64 {
        self.factors.iter().map(|f| (f.size * f.size) as u64).sum()
    }

    /// `k² − dim H`.
    pub fn quotient_dim(&self) -> u64 {
        (self.k * self.k) as u64 - self.dim()
    }

    /// Starting coordinate of each factor.
    pub fn offsets(&self) -> Vec<usize> {
        let mut off = 0;
        self.factors
            .iter()
            .map(|f| {
                let o = off;
                off += f.mult * f.size;
                o
            })
            .collect()
    }

    /// Coordinate ranges `(start, size)` of every copy subspace.
    pub fn copy_ranges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (f, off) in self.factors.iter().zip(self.offsets()) {
            for c in 0..f.mult {
                out.push((off + c * f.size, f.size));
            }
        }
        out
    }

    fn check_shape(&self, w: &CMat) -> Result<()> {
        if w.nrows() != self.k || w.ncols() != self.k {
            return Err(Error::ShapeMismatch(format!(
                "matrix {:?} for subgroup of U_{}",
                w.shape(),
                self.k
            )));
        }
        Ok(())
    }

    /// Trace-preserving conditional expectation onto the algebra spanned by
    /// `H`, returned as the averaged diagonal sub-block of every factor.
    pub fn expectation(&self, w: &CMat) -> Result<Vec<CMat>> {
        self.check_shape(w)?;
        Ok(self
            .factors
            .iter()
            .zip(self.offsets())
            .map(|(f, off)| {
                let mut acc = CMat::zeros(f.size, f.size);
                for c in 0..f.mult {
                    let s = off + c * f.size;
                    acc += w.view((s, s), (f.size, f.size));
                }
                acc * real(1.0 / f.mult as f64)
            })
            .collect())
    }

    /// `⊕_i u_i` repeated `mult_i` times.
    pub fn embed(&self, parts: &[CMat]) -> Result<CMat> {
        if parts.len() != self.factors.len()
            || parts
                .iter()
                .zip(&self.factors)
                .any(|(p, f)| p.nrows() != f.size || p.ncols() != f.size)
        {
            return Err(Error::ShapeMismatch(
                "factor matrices do not match the subgroup layout".into(),
            ));
        }
        let mut out = CMat::zeros(self.k, self.k);
        for ((p, f), off) in parts.iter().zip(&self.factors).zip(self.offsets()) {
            for c in 0..f.mult {
                let s = off + c * f.size;
                out.view_mut((s, s), (f.size, f.size)).copy_from(p);
            }
        }
        Ok(out)
    }

    /// The element of `H` closest to `w` in `|·|₂`: blockwise polar part of `E(w)`.
    pub fn nearest_element(&self, w: &CMat) -> Result<CMat> {
        let parts: Vec<CMat> = self.expectation(w)?.iter().map(polar_unitary).collect();
        self.embed(&parts)
    }

    /// Haar-random element of `H`.
    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> CMat {
        let parts: Vec<CMat> = self.factors.iter().map(|f| haar_unitary(f.size, rng)).collect();
        self.embed(&parts).expect("parts follow the layout")
    }

    /// True iff `h` is a unitary of the block form of `H`, to `tol` in Frobenius norm.
    pub fn contains(&self, h: &CMat, tol: f64) -> bool {
        if self.check_shape(h).is_err() {
            return false;
        }
        let parts = match self.expectation(h) {
            Ok(p) => p,
            Err(_) => return false,
        };
        let rebuilt = self.embed(&parts).expect("parts follow the layout");
        (h - rebuilt).norm() <= tol && crate::linalg::unitarity_residual(h) <= tol
    }
}
