//! Closed-form dimension invariants.

use num_traits::{One, Zero};

use super::{rat, FiniteDimAlgebra, HyperfiniteSpec, InclusionMatrix, Rational, SpectralMeasure};
use crate::error::{Error, Result};

fn sq(r: &Rational) -> Rational {
    r * r
}

fn over_dim_sq(weight: &Rational, dim: usize) -> Rational {
    let d = rat(dim as i64, 1);
    sq(weight) / (&d * &d)
}

/// `δ₀ = 1 − Σ α_i² / k_i²` over the matrix summands of a hyperfinite algebra.
pub fn delta0_hyperfinite(spec: &HyperfiniteSpec) -> Rational {
    let s: Rational = spec.blocks().iter().map(|b| over_dim_sq(&b.weight, b.dim)).sum();
    Rational::one() - s
}

/// Free dimension
/// `α₀² + Σ α_i²(1 − k_i⁻²) + 2α₀(1 − α₀) + Σ_{i≠j} α_i α_j`.
pub fn fdim(spec: &HyperfiniteSpec) -> Rational {
    let a0 = spec.diffuse_weight();
    let mut out = sq(a0) + rat(2, 1) * a0 * (Rational::one() - a0);
    for b in spec.blocks() {
        let k = rat(b.dim as i64, 1);
        out += sq(&b.weight) * (Rational::one() - Rational::one() / (&k * &k));
    }
    let blocks = spec.blocks();
    for (i, bi) in blocks.iter().enumerate() {
        for (j, bj) in blocks.iter().enumerate() {
            if i != j {
                out += &bi.weight * &bj.weight;
            }
        }
    }
    out
}

/// `Δ(B) = 1 − Σ_j α_j² / n_j²` for any positive trace.
pub fn delta_capacity(algebra: &FiniteDimAlgebra) -> Rational {
    let s: Rational = algebra
        .block_dims()
        .iter()
        .zip(algebra.block_weights())
        .map(|(&n, w)| over_dim_sq(w, n))
        .sum();
    Rational::one() - s
}

/// Trace on `A` induced from weights `r_j` on `B` through a unital inclusion:
/// `r'_i = p_i Σ_j Λ_{ij} r_j / q_j`.
pub fn restrict_trace(inc: &InclusionMatrix, b_weights: &[Rational]) -> Result<FiniteDimAlgebra> {
    if b_weights.len() != inc.b_dims().len() {
        return Err(Error::ShapeMismatch(format!(
            "{} B-weights for {} B-blocks",
            b_weights.len(),
            inc.b_dims().len()
        )));
    }
    if let Some((column, got, expected)) = inc.unital_defect() {
        return Err(Error::NonUnitalInclusion { column, got, expected });
    }
    let weights = inc
        .entries()
        .iter()
        .zip(inc.a_dims())
        .map(|(row, &p)| {
            let s: Rational = row
                .iter()
                .zip(b_weights)
                .zip(inc.b_dims())
                .map(|((&l, r), &q)| rat(l as i64, 1) * r / rat(q as i64, 1))
                .sum();
            rat(p as i64, 1) * s
        })
        .collect();
    FiniteDimAlgebra::new(inc.a_dims().iter().map(|&p| p as usize).collect(), weights)
}

/// `δ₀(a) = 1 − Σ_t λ({t})²` for a self-adjoint element with distribution `λ`.
pub fn delta0_selfadjoint(mu: &SpectralMeasure) -> Rational {
    let s: Rational = mu.atoms().iter().map(|a| sq(&a.mass)).sum();
    Rational::one() - s
}

/// True iff `Σ α_i²/k_i² = 1`, i.e. `δ₀` vanishes.
pub fn delta0_vanishes(spec: &HyperfiniteSpec) -> bool {
    delta0_hyperfinite(spec).is_zero()
}
