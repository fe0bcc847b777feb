//! Exact models of finite-dimensional and hyperfinite tracial algebras.
//!
//! Trace weights are exact rationals throughout; floating point only enters
//! through matrix entries.

mod generators;
mod invariants;
mod poly;
mod rational;

pub use generators::{
    canonical_generators, exact_moment, generated_dimension, minimal_central_projections, selfadjoint_generator_pair,
    single_generator, verify_generation,
};
pub use invariants::{delta0_hyperfinite, delta0_selfadjoint, delta0_vanishes, delta_capacity, fdim, restrict_trace};
pub use poly::{annihilator_polynomial, NCPolynomial, NcTerm, Polynomial};
pub use rational::{format_rational, parse_rational, rat, rational_to_f64, Rational};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `⊕_j M_{n_j}(ℂ)` with the positive trace `⊕_j α_j tr_{n_j}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteDimAlgebra {
    block_dims: Vec<usize>,
    block_weights: Vec<Rational>,
}

impl FiniteDimAlgebra {
    pub fn new(block_dims: Vec<usize>, block_weights: Vec<Rational>) -> Result<Self> {
        if block_dims.is_empty() {
            return Err(Error::InvalidInput("algebra needs at least one block".into()));
        }
        if block_dims.len() != block_weights.len() {
            return Err(Error::InvalidInput(format!(
                "{} block dims but {} weights",
                block_dims.len(),
                block_weights.len()
            )));
        }
        if block_dims.contains(&0) {
            return Err(Error::InvalidInput("block dimensions must be ≥ 1".into()));
        }
        if block_weights.iter().any(|w| w.is_negative()) {
            return Err(Error::InvalidInput("block weights must be ≥ 0".into()));
        }
        Ok(Self {
            block_dims,
            block_weights,
        })
    }

    /// Like [`new`](Self::new) but requires the weights to sum to one.
    pub fn state(block_dims: Vec<usize>, block_weights: Vec<Rational>) -> Result<Self> {
        let a = Self::new(block_dims, block_weights)?;
        if !a.is_state() {
            return Err(Error::InvalidInput(format!(
                "weights sum to {}, not 1",
                format_rational(&a.total_weight())
            )));
        }
        Ok(a)
    }

    /// `M_n(ℂ)` with `tr_n`.
    pub fn matrix_algebra(n: usize) -> Result<Self> {
        Self::state(vec![n], vec![Rational::one()])
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    pub fn block_weights(&self) -> &[Rational] {
        &self.block_weights
    }

    pub fn weights_f64(&self) -> Vec<f64> {
        self.block_weights.iter().map(rational_to_f64).collect()
    }

    pub fn num_blocks(&self) -> usize {
        self.block_dims.len()
    }

    pub fn total_weight(&self) -> Rational {
        self.block_weights.iter().cloned().sum()
    }

    pub fn is_state(&self) -> bool {
        self.total_weight().is_one()
    }

    /// `Σ n_j`, the size of the defining block-diagonal representation.
    pub fn total_size(&self) -> usize {
        self.block_dims.iter().sum()
    }

    /// Complex dimension `Σ n_j²`.
    pub fn dimension(&self) -> usize {
        self.block_dims.iter().map(|n| n * n).sum()
    }

    /// Weight `α_j / n_j` of one minimal projection in block `j`.
    pub fn minimal_projection_weight(&self, j: usize) -> Rational {
        &self.block_weights[j] / rat(self.block_dims[j] as i64, 1)
    }
}

/// One matrix summand `M_k(ℂ)` carrying weight `α`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatrixSummand {
    pub dim: usize,
    pub weight: Rational,
}

/// Center decomposition of a hyperfinite algebra: diffuse part of weight `α₀`,
/// finitely many matrix summands, and an optional infinite part of weight 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HyperfiniteSpec {
    diffuse_weight: Rational,
    blocks: Vec<MatrixSummand>,
    has_infinite_part: bool,
}

impl HyperfiniteSpec {
    pub fn new(diffuse_weight: Rational, blocks: Vec<MatrixSummand>, has_infinite_part: bool) -> Result<Self> {
        if diffuse_weight.is_negative() {
            return Err(Error::InvalidInput("diffuse weight must be ≥ 0".into()));
        }
        if let Some(b) = blocks.iter().find(|b| b.dim == 0 || !b.weight.is_positive()) {
            return Err(Error::InvalidInput(format!(
                "matrix summand needs dim ≥ 1 and positive weight (dim {}, weight {})",
                b.dim,
                format_rational(&b.weight)
            )));
        }
        let total: Rational = &diffuse_weight + blocks.iter().map(|b| b.weight.clone()).sum::<Rational>();
        if !total.is_one() {
            return Err(Error::InvalidInput(format!(
                "weights sum to {}, not 1",
                format_rational(&total)
            )));
        }
        Ok(Self {
            diffuse_weight,
            blocks,
            has_infinite_part,
        })
    }

    pub fn diffuse_weight(&self) -> &Rational {
        &self.diffuse_weight
    }

    pub fn blocks(&self) -> &[MatrixSummand] {
        &self.blocks
    }

    pub fn has_infinite_part(&self) -> bool {
        self.has_infinite_part
    }

    /// The matricial part as a finite-dimensional algebra, when there is no diffuse part.
    pub fn to_algebra(&self) -> Result<FiniteDimAlgebra> {
        if !self.diffuse_weight.is_zero() || self.blocks.is_empty() {
            return Err(Error::InvalidInput(
                "spec has a diffuse part; it is not finite dimensional".into(),
            ));
        }
        FiniteDimAlgebra::new(
            self.blocks.iter().map(|b| b.dim).collect(),
            self.blocks.iter().map(|b| b.weight.clone()).collect(),
        )
    }
}

impl TryFrom<&FiniteDimAlgebra> for HyperfiniteSpec {
    type Error = Error;

    fn try_from(a: &FiniteDimAlgebra) -> Result<Self> {
        let blocks = a
            .block_dims
            .iter()
            .zip(&a.block_weights)
            .filter(|(_, w)| w.is_positive())
            .map(|(&dim, w)| MatrixSummand { dim, weight: w.clone() })
            .collect();
        HyperfiniteSpec::new(Rational::zero(), blocks, false)
    }
}

/// Structured-text form shared by [`HyperfiniteSpec`] and [`FiniteDimAlgebra`]:
/// `{"diffuse_weight":"1/3","blocks":[{"dim":2,"weight":"1/3"}],"infinite_part":false}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecDocument {
    #[serde(default = "zero_string")]
    pub diffuse_weight: String,
    pub blocks: Vec<BlockDocument>,
    #[serde(default)]
    pub infinite_part: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockDocument {
    pub dim: usize,
    pub weight: String,
}

fn zero_string() -> String {
    "0".into()
}

impl SpecDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn to_spec(&self) -> Result<HyperfiniteSpec> {
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                Ok(MatrixSummand {
                    dim: b.dim,
                    weight: parse_rational(&b.weight)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        HyperfiniteSpec::new(parse_rational(&self.diffuse_weight)?, blocks, self.infinite_part)
    }

    /// Reads the document as a finite-dimensional algebra; zero block weights
    /// are allowed, a diffuse or infinite part is not.
    pub fn to_algebra(&self) -> Result<FiniteDimAlgebra> {
        if !parse_rational(&self.diffuse_weight)?.is_zero() || self.infinite_part {
            return Err(Error::InvalidInput(
                "finite-dimensional algebra cannot have a diffuse or infinite part".into(),
            ));
        }
        let weights = self
            .blocks
            .iter()
            .map(|b| parse_rational(&b.weight))
            .collect::<Result<Vec<_>>>()?;
        FiniteDimAlgebra::new(self.blocks.iter().map(|b| b.dim).collect(), weights)
    }
}

impl From<&HyperfiniteSpec> for SpecDocument {
    fn from(s: &HyperfiniteSpec) -> Self {
        Self {
            diffuse_weight: format_rational(&s.diffuse_weight),
            blocks: s
                .blocks
                .iter()
                .map(|b| BlockDocument {
                    dim: b.dim,
                    weight: format_rational(&b.weight),
                })
                .collect(),
            infinite_part: s.has_infinite_part,
        }
    }
}

impl From<&FiniteDimAlgebra> for SpecDocument {
    fn from(a: &FiniteDimAlgebra) -> Self {
        Self {
            diffuse_weight: "0".into(),
            blocks: a
                .block_dims
                .iter()
                .zip(&a.block_weights)
                .map(|(&dim, w)| BlockDocument {
                    dim,
                    weight: format_rational(w),
                })
                .collect(),
            infinite_part: false,
        }
    }
}

/// Inclusion matrix `Λ_{ij}` of `A = ⊕_i M_{p_i}` into `B = ⊕_j M_{q_j}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InclusionMatrix {
    entries: Vec<Vec<u64>>,
    a_dims: Vec<u64>,
    b_dims: Vec<u64>,
}

impl InclusionMatrix {
    pub fn new(entries: Vec<Vec<u64>>, a_dims: Vec<u64>, b_dims: Vec<u64>) -> Result<Self> {
        if entries.len() != a_dims.len() || entries.iter().any(|row| row.len() != b_dims.len()) {
            return Err(Error::ShapeMismatch(format!(
                "inclusion matrix must be {}x{}",
                a_dims.len(),
                b_dims.len()
            )));
        }
        if a_dims.contains(&0) || b_dims.contains(&0) {
            return Err(Error::InvalidInput("block dimensions must be ≥ 1".into()));
        }
        Ok(Self {
            entries,
            a_dims,
            b_dims,
        })
    }

    pub fn entries(&self) -> &[Vec<u64>] {
        &self.entries
    }

    pub fn a_dims(&self) -> &[u64] {
        &self.a_dims
    }

    pub fn b_dims(&self) -> &[u64] {
        &self.b_dims
    }

    fn column_size(&self, j: usize) -> u64 {
        self.entries.iter().zip(&self.a_dims).map(|(row, p)| row[j] * p).sum()
    }

    /// First column `j` where `Σ_i Λ_{ij} p_i ≠ q_j`, if any.
    pub fn unital_defect(&self) -> Option<(usize, u64, u64)> {
        (0..self.b_dims.len())
            .map(|j| (j, self.column_size(j), self.b_dims[j]))
            .find(|(_, got, want)| got != want)
    }

    pub fn is_unital(&self) -> bool {
        self.unital_defect().is_none()
    }
}

/// Atom of a spectral distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub location: f64,
    pub mass: Rational,
}

/// Absolutely continuous component, needed for moments and quantiles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ContinuousLaw {
    Uniform {
        lo: f64,
        hi: f64,
    },
    /// Semicircle law of the given radius; radius 1 has second moment 1/4.
    Semicircle {
        center: f64,
        radius: f64,
    },
}

impl ContinuousLaw {
    pub fn support(&self) -> (f64, f64) {
        match *self {
            ContinuousLaw::Uniform { lo, hi } => (lo, hi),
            ContinuousLaw::Semicircle { center, radius } => (center - radius, center + radius),
        }
    }

    pub fn cdf(&self, t: f64) -> f64 {
        match *self {
            ContinuousLaw::Uniform { lo, hi } => ((t - lo) / (hi - lo)).clamp(0.0, 1.0),
            ContinuousLaw::Semicircle { center, radius } => {
                let x = ((t - center) / radius).clamp(-1.0, 1.0);
                0.5 + (x * (1.0 - x * x).sqrt() + x.asin()) / std::f64::consts::PI
            }
        }
    }

    /// `∫ t^d dμ(t)`.
    pub fn moment(&self, d: u32) -> f64 {
        match *self {
            ContinuousLaw::Uniform { lo, hi } => {
                if hi == lo {
                    return lo.powi(d as i32);
                }
                (hi.powi(d as i32 + 1) - lo.powi(d as i32 + 1)) / ((d as f64 + 1.0) * (hi - lo))
            }
            ContinuousLaw::Semicircle { center, radius } => {
                // binomial expansion around the center; centered moments are
                // Catalan(j/2)·(radius/2)^j for even j.
                (0..=d)
                    .map(|j| {
                        let centered = if j % 2 == 1 {
                            0.0
                        } else {
                            catalan_f64(j / 2) * (radius / 2.0).powi(j as i32)
                        };
                        binomial_f64(d, j) * centered * center.powi((d - j) as i32)
                    })
                    .sum()
            }
        }
    }
}

fn binomial_f64(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn catalan_f64(n: u32) -> f64 {
    binomial_f64(2 * n, n) / (n as f64 + 1.0)
}

/// Distribution `λ` of a single self-adjoint element: atoms plus a
/// continuous mass.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMeasure {
    atoms: Vec<Atom>,
    continuous_mass: Rational,
    continuous_law: Option<ContinuousLaw>,
}

impl SpectralMeasure {
    pub fn new(atoms: Vec<Atom>, continuous_mass: Rational, continuous_law: Option<ContinuousLaw>) -> Result<Self> {
        if atoms.windows(2).any(|w| !(w[0].location < w[1].location)) {
            return Err(Error::InvalidInput("atom locations must be strictly increasing".into()));
        }
        if atoms.iter().any(|a| !a.mass.is_positive() || !a.location.is_finite()) {
            return Err(Error::InvalidInput(
                "atoms need finite location and positive mass".into(),
            ));
        }
        if continuous_mass.is_negative() {
            return Err(Error::InvalidInput("continuous mass must be ≥ 0".into()));
        }
        let total: Rational = &continuous_mass + atoms.iter().map(|a| a.mass.clone()).sum::<Rational>();
        if !total.is_one() {
            return Err(Error::InvalidInput(format!(
                "masses sum to {}, not 1",
                format_rational(&total)
            )));
        }
        if let Some(ContinuousLaw::Uniform { lo, hi }) = continuous_law {
            if !(lo <= hi) {
                return Err(Error::InvalidInput("uniform law needs lo ≤ hi".into()));
            }
        }
        if let Some(ContinuousLaw::Semicircle { radius, .. }) = continuous_law {
            if !(radius > 0.0) {
                return Err(Error::InvalidInput("semicircle radius must be positive".into()));
            }
        }
        Ok(Self {
            atoms,
            continuous_mass,
            continuous_law,
        })
    }

    /// Purely atomic measure from `(location, mass)` pairs in any order.
    pub fn atomic(mut atoms: Vec<(f64, Rational)>) -> Result<Self> {
        atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
        Self::new(
            atoms
                .into_iter()
                .map(|(location, mass)| Atom { location, mass })
                .collect(),
            Rational::zero(),
            None,
        )
    }

    pub fn continuous(law: ContinuousLaw) -> Result<Self> {
        Self::new(Vec::new(), Rational::one(), Some(law))
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn continuous_mass(&self) -> &Rational {
        &self.continuous_mass
    }

    pub fn continuous_law(&self) -> Option<ContinuousLaw> {
        self.continuous_law
    }

    fn law_or_err(&self) -> Result<Option<ContinuousLaw>> {
        if self.continuous_mass.is_zero() {
            return Ok(None);
        }
        self.continuous_law
            .map(Some)
            .ok_or_else(|| Error::InvalidInput("continuous mass present but no continuous law given".into()))
    }

    /// `∫ t^d dλ(t)`.
    pub fn moment(&self, d: u32) -> Result<f64> {
        let atomic: f64 = self
            .atoms
            .iter()
            .map(|a| rational_to_f64(&a.mass) * a.location.powi(d as i32))
            .sum();
        let cont = match self.law_or_err()? {
            Some(law) => rational_to_f64(&self.continuous_mass) * law.moment(d),
            None => 0.0,
        };
        Ok(atomic + cont)
    }

    /// `λ((−∞, t])`.
    pub fn cdf(&self, t: f64) -> Result<f64> {
        let atomic: f64 = self
            .atoms
            .iter()
            .filter(|a| a.location <= t)
            .map(|a| rational_to_f64(&a.mass))
            .sum();
        let cont = match self.law_or_err()? {
            Some(law) => rational_to_f64(&self.continuous_mass) * law.cdf(t),
            None => 0.0,
        };
        Ok(atomic + cont)
    }

    /// Smallest and largest points of the support.
    pub fn support(&self) -> Result<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for a in &self.atoms {
            lo = lo.min(a.location);
            hi = hi.max(a.location);
        }
        if let Some(law) = self.law_or_err()? {
            let (a, b) = law.support();
            lo = lo.min(a);
            hi = hi.max(b);
        }
        Ok((lo, hi))
    }

    /// Left quantile `inf { t : λ((−∞, t]) ≥ q }` for `q ∈ (0, 1)`.
    pub fn quantile(&self, q: &Rational) -> Result<f64> {
        if self.law_or_err()?.is_none() {
            let mut acc = Rational::zero();
            for a in &self.atoms {
                acc += &a.mass;
                if &acc >= q {
                    return Ok(a.location);
                }
            }
            return Ok(self.atoms.last().map(|a| a.location).unwrap_or(0.0));
        }
        let qf = rational_to_f64(q);
        let (mut lo, mut hi) = self.support()?;
        if self.cdf(lo)? >= qf {
            return Ok(lo);
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid)? >= qf {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        // snap onto an atom whose jump straddles q
        for a in &self.atoms {
            if (a.location - hi).abs() < 1e-9 {
                return Ok(a.location);
            }
        }
        Ok(hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_flag_is_exact() {
        let a = FiniteDimAlgebra::new(vec![1, 2], vec![rat(1, 3), rat(2, 3)]).unwrap();
        assert!(a.is_state());
        let b = FiniteDimAlgebra::new(vec![1, 2], vec![rat(1, 3), rat(1, 3)]).unwrap();
        assert!(!b.is_state());
        assert!(FiniteDimAlgebra::state(vec![1, 2], vec![rat(1, 3), rat(1, 3)]).is_err());
        assert!(FiniteDimAlgebra::new(vec![0], vec![rat(1, 1)]).is_err());
        assert!(FiniteDimAlgebra::new(vec![1], vec![rat(-1, 2)]).is_err());
        assert!(FiniteDimAlgebra::new(vec![], vec![]).is_err());
    }

    #[test]
    fn hyperfinite_requires_unit_mass() {
        let ok = HyperfiniteSpec::new(
            rat(1, 3),
            vec![MatrixSummand {
                dim: 2,
                weight: rat(2, 3),
            }],
            true,
        );
        assert!(ok.is_ok());
        let bad = HyperfiniteSpec::new(rat(1, 2), vec![], false);
        assert!(bad.is_err());
    }

    #[test]
    fn spec_document_format() {
        let text = r#"{"diffuse_weight":"1/3","blocks":[{"dim":2,"weight":"1/3"},{"dim":1,"weight":"1/3"}],"infinite_part":false}"#;
        let doc = SpecDocument::from_json(text).unwrap();
        let spec = doc.to_spec().unwrap();
        assert_eq!(spec.diffuse_weight(), &rat(1, 3));
        assert_eq!(spec.blocks().len(), 2);
        assert_eq!(SpecDocument::from(&spec).to_json().unwrap(), text);
        assert!(doc.to_algebra().is_err());
    }

    #[test]
    fn algebra_document() {
        let text = r#"{"blocks":[{"dim":2,"weight":"1"}]}"#;
        let a = SpecDocument::from_json(text).unwrap().to_algebra().unwrap();
        assert_eq!(a, FiniteDimAlgebra::matrix_algebra(2).unwrap());
    }

    #[test]
    fn inclusion_unitality() {
        let diag = InclusionMatrix::new(vec![vec![1], vec![1]], vec![1, 1], vec![2]).unwrap();
        assert!(diag.is_unital());
        let half = InclusionMatrix::new(vec![vec![1]], vec![1], vec![2]).unwrap();
        assert_eq!(half.unital_defect(), Some((0, 1, 2)));
    }

    #[test]
    fn spectral_measure_invariants() {
        assert!(SpectralMeasure::atomic(vec![(0.0, rat(1, 2)), (1.0, rat(1, 2))]).is_ok());
        assert!(SpectralMeasure::atomic(vec![(0.0, rat(1, 2)), (0.0, rat(1, 2))]).is_err());
        assert!(SpectralMeasure::atomic(vec![(0.0, rat(1, 2))]).is_err());
        let mu = SpectralMeasure::new(vec![], rat(1, 1), None).unwrap();
        assert!(mu.moment(2).is_err());
    }

    #[test]
    fn quantiles() {
        let two = SpectralMeasure::atomic(vec![(-1.0, rat(1, 2)), (1.0, rat(1, 2))]).unwrap();
        assert_eq!(two.quantile(&rat(1, 4)).unwrap(), -1.0);
        assert_eq!(two.quantile(&rat(3, 4)).unwrap(), 1.0);
        assert_eq!(two.quantile(&rat(1, 2)).unwrap(), -1.0);
        let unif = SpectralMeasure::continuous(ContinuousLaw::Uniform { lo: 0.0, hi: 1.0 }).unwrap();
        assert!((unif.quantile(&rat(1, 8)).unwrap() - 0.125).abs() < 1e-12);
    }

    #[test]
    fn semicircle_law_moments() {
        let law = ContinuousLaw::Semicircle {
            center: 0.0,
            radius: 1.0,
        };
        assert!((law.moment(2) - 0.25).abs() < 1e-15);
        assert!((law.moment(4) - 0.125).abs() < 1e-15);
        assert!(law.moment(3).abs() < 1e-15);
        assert!((law.cdf(0.0) - 0.5).abs() < 1e-15);
        let shifted = ContinuousLaw::Semicircle {
            center: 1.0,
            radius: 2.0,
        };
        // mean 1, variance (2/2)^2 = 1
        assert!((shifted.moment(2) - 2.0).abs() < 1e-12);
    }
}
