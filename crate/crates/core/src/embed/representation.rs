//! Unital-or-not *-homomorphisms `N → M_k(ℂ)` described by multiplicities.

use num_traits::Signed;
use rand::{Rng, RngExt};

use crate::algebra::{canonical_generators, rat, FiniteDimAlgebra, Rational};
use crate::error::{Error, Result};
use crate::geometry::{SubgroupFactor, TractableSubgroup};
use crate::linalg::{haar_unitary, hs_norm_full, unitarity_residual, BlockMatrix, CMat, ALGEBRAIC_TOL};

/// `x ↦ F · diag(x_1 ⊗ I_{l_1}, …, x_p ⊗ I_{l_p}, 0_null) · F*`, where
/// `x_j ⊗ I_l` stretches every entry of `x_j` into an `l × l` scalar block
/// and `F` is an optional unitary frame (identity when absent).
#[derive(Debug, Clone, PartialEq)]
pub struct Representation {
    algebra: FiniteDimAlgebra,
    multiplicities: Vec<usize>,
    null_dim: usize,
    frame: Option<CMat>,
}

impl Representation {
    pub fn new(algebra: FiniteDimAlgebra, multiplicities: Vec<usize>, null_dim: usize) -> Result<Self> {
        if multiplicities.len() != algebra.num_blocks() {
            return Err(Error::ShapeMismatch(format!(
                "{} multiplicities for {} blocks",
                multiplicities.len(),
                algebra.num_blocks()
            )));
        }
        let rep = Self {
            algebra,
            multiplicities,
            null_dim,
            frame: None,
        };
        if rep.k() == 0 {
            return Err(Error::InvalidInput("representation needs k ≥ 1".into()));
        }
        Ok(rep)
    }

    /// Random multiplicities filling `k` block by block (the rest null),
    /// in a Haar-random frame.
    pub fn random<R: Rng + ?Sized>(algebra: &FiniteDimAlgebra, k: usize, rng: &mut R) -> Result<Self> {
        let mut left = k;
        let mut mult = Vec::with_capacity(algebra.num_blocks());
        for &n in algebra.block_dims() {
            let c = rng.random_range(0..=left / n);
            mult.push(c);
            left -= c * n;
        }
        let frame = haar_unitary(k, rng);
        Self::new(algebra.clone(), mult, left)?.with_frame(frame)
    }

    /// Conjugates the canonical layout by the unitary `frame`.
    pub fn with_frame(mut self, frame: CMat) -> Result<Self> {
        let k = self.k();
        if frame.nrows() != k || frame.ncols() != k {
            return Err(Error::ShapeMismatch(format!("frame {:?} for k = {k}", frame.shape())));
        }
        let residual = unitarity_residual(&frame);
        if residual > ALGEBRAIC_TOL * (k as f64).sqrt().max(1.0) * 10.0 {
            return Err(Error::NotUnitary { residual });
        }
        self.frame = Some(frame);
        Ok(self)
    }

    pub fn algebra(&self) -> &FiniteDimAlgebra {
        &self.algebra
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    pub fn null_dim(&self) -> usize {
        self.null_dim
    }

    pub fn frame(&self) -> Option<&CMat> {
        self.frame.as_ref()
    }

    /// `Σ l_j n_j + null`.
    pub fn k(&self) -> usize {
        self.occupied() + self.null_dim
    }

    fn occupied(&self) -> usize {
        self.multiplicities
            .iter()
            .zip(self.algebra.block_dims())
            .map(|(l, n)| l * n)
            .sum()
    }

    /// Start of every block's range in the canonical layout.
    pub fn offsets(&self) -> Vec<usize> {
        let mut off = 0;
        self.multiplicities
            .iter()
            .zip(self.algebra.block_dims())
            .map(|(l, n)| {
                let o = off;
                off += l * n;
                o
            })
            .collect()
    }

    /// Canonical coordinate of row `a` of block `j`, copy `c`.
    pub fn canonical_index(&self, j: usize, a: usize, c: usize) -> usize {
        self.offsets()[j] + a * self.multiplicities[j] + c
    }

    /// Image in the canonical layout, ignoring the frame.
    pub fn apply_canonical(&self, x: &BlockMatrix) -> Result<CMat> {
        if x.dims() != self.algebra.block_dims() {
            return Err(Error::ShapeMismatch(format!(
                "element with blocks {:?}, algebra has {:?}",
                x.dims(),
                self.algebra.block_dims()
            )));
        }
        let k = self.k();
        let mut out = CMat::zeros(k, k);
        for ((xj, &l), off) in x.blocks().iter().zip(&self.multiplicities).zip(self.offsets()) {
            let n = xj.nrows();
            for a in 0..n {
                for b in 0..n {
                    let v = xj[(a, b)];
                    if v.re == 0.0 && v.im == 0.0 {
                        continue;
                    }
                    for c in 0..l {
                        out[(off + a * l + c, off + b * l + c)] = v;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn apply(&self, x: &BlockMatrix) -> Result<CMat> {
        let canon = self.apply_canonical(x)?;
        Ok(match &self.frame {
            Some(f) => f * canon * f.adjoint(),
            None => canon,
        })
    }

    /// Unitary group of the commutant in the canonical layout: factor
    /// `(n_j, l_j)` per block with `l_j > 0`, plus `(1, null)`.
    pub fn commutant_subgroup(&self) -> Result<TractableSubgroup> {
        let mut factors: Vec<SubgroupFactor> = self
            .multiplicities
            .iter()
            .zip(self.algebra.block_dims())
            .filter(|(&l, _)| l > 0)
            .map(|(&l, &n)| SubgroupFactor { mult: n, size: l })
            .collect();
        if self.null_dim > 0 {
            factors.push(SubgroupFactor {
                mult: 1,
                size: self.null_dim,
            });
        }
        TractableSubgroup::new(factors)
    }

    /// Block weights of `tr_k ∘ σ`: `l_j n_j / k`.
    pub fn trace_weights(&self) -> Vec<Rational> {
        let k = self.k() as i64;
        self.multiplicities
            .iter()
            .zip(self.algebra.block_dims())
            .map(|(&l, &n)| rat((l * n) as i64, k))
            .collect()
    }

    /// `‖tr_k ∘ σ − φ‖ = Σ_j |l_j n_j / k − α_j|`, the norm of the difference as
    /// a functional on `⊕ M_{n_j}` with the sup norm.
    pub fn trace_error(&self) -> Rational {
        self.trace_weights()
            .iter()
            .zip(self.algebra.block_weights())
            .map(|(w, a)| (w - a).abs())
            .sum()
    }

    /// `‖tr_k ∘ σ₁ − tr_k ∘ σ₂‖ = Σ_j n_j |l¹_j − l²_j| / k`.
    pub fn functional_distance(&self, other: &Representation) -> Result<Rational> {
        self.check_compatible(other)?;
        let k = self.k() as i64;
        Ok(self
            .multiplicities
            .iter()
            .zip(&other.multiplicities)
            .zip(self.algebra.block_dims())
            .map(|((&a, &b), &n)| rat((n * a.abs_diff(b)) as i64, k))
            .sum())
    }

    pub(crate) fn check_compatible(&self, other: &Representation) -> Result<()> {
        if self.algebra.block_dims() != other.algebra.block_dims() {
            return Err(Error::ShapeMismatch(format!(
                "representations of different algebras: {:?} vs {:?}",
                self.algebra.block_dims(),
                other.algebra.block_dims()
            )));
        }
        if self.k() != other.k() {
            return Err(Error::ShapeMismatch(format!(
                "representations into M_{} and M_{}",
                self.k(),
                other.k()
            )));
        }
        Ok(())
    }

    /// Largest of `|σ(xy) − σ(x)σ(y)|₂` and `|σ(x*) − σ(x)*|₂` over pairs of
    /// canonical generators.
    pub fn homomorphism_residual(&self) -> Result<f64> {
        let gens = canonical_generators(&self.algebra);
        let images: Vec<CMat> = gens.iter().map(|g| self.apply(g)).collect::<Result<_>>()?;
        let mut worst: f64 = 0.0;
        for (g, img) in gens.iter().zip(&images) {
            worst = worst.max(hs_norm_full(&(self.apply(&g.adjoint())? - img.adjoint())));
            for (h, img_h) in gens.iter().zip(&images) {
                let prod = self.apply(&g.mul(h)?)?;
                worst = worst.max(hs_norm_full(&(prod - img * img_h)));
            }
        }
        Ok(worst)
    }
}

/// Recovers multiplicities from the images `σ(z_j)` of the minimal central
/// projections: `l_j = round(Tr σ(z_j) / n_j)`, `null = k − Σ l_j n_j`.
pub fn representation_multiplicities(images: &[CMat], algebra: &FiniteDimAlgebra) -> Result<Representation> {
    if images.len() != algebra.num_blocks() {
        return Err(Error::ShapeMismatch(format!(
            "{} images for {} blocks",
            images.len(),
            algebra.num_blocks()
        )));
    }
    let k = images.first().map(|p| p.nrows()).unwrap_or(0);
    if k == 0 || images.iter().any(|p| p.nrows() != k || p.ncols() != k) {
        return Err(Error::ShapeMismatch("images must share one k × k shape".into()));
    }
    let tol = 1e-8 * (k as f64).sqrt();
    let mut mult = Vec::with_capacity(images.len());
    for (j, (p, &n)) in images.iter().zip(algebra.block_dims()).enumerate() {
        if hs_norm_full(&(p * p - p)) > tol || hs_norm_full(&(p - p.adjoint())) > tol {
            return Err(Error::InconsistentRepresentation(format!(
                "image of central projection {j} is not a projection"
            )));
        }
        let rank = p.trace().re;
        let l = (rank / n as f64).round();
        if (rank - l * n as f64).abs() > 1e-6 {
            return Err(Error::InconsistentRepresentation(format!(
                "rank {rank:.6} of block {j} is not a multiple of {n}"
            )));
        }
        mult.push(l as usize);
    }
    for i in 0..images.len() {
        for j in i + 1..images.len() {
            if hs_norm_full(&(&images[i] * &images[j])) > tol {
                return Err(Error::InconsistentRepresentation(format!(
                    "images of central projections {i} and {j} are not orthogonal"
                )));
            }
        }
    }
    let used: usize = mult.iter().zip(algebra.block_dims()).map(|(l, n)| l * n).sum();
    if used > k {
        return Err(Error::InconsistentRepresentation(format!(
            "multiplicities need {used} > k = {k} coordinates"
        )));
    }
    let rep = Representation::new(algebra.clone(), mult, k - used)?;
    // re-synthesize and compare ranks
    for (j, z) in crate::algebra::minimal_central_projections(algebra).iter().enumerate() {
        let r = rep.apply_canonical(z)?.trace().re;
        if (r - images[j].trace().re).abs() > 1e-6 {
            return Err(Error::InconsistentRepresentation(format!(
                "re-synthesized rank differs for block {j}"
            )));
        }
    }
    Ok(rep)
}
