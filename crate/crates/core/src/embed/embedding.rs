//! Trace-approximating embeddings `σ_k : N → M_k(ℂ)`.

use num_traits::ToPrimitive;
use serde_json::json;

use super::Representation;
use crate::algebra::{delta_capacity, format_rational, rat, rational_to_f64, FiniteDimAlgebra, Rational, SpecDocument};
use crate::error::{Error, Result};
use crate::geometry::TractableSubgroup;

/// `σ_k` together with its trace error, commutant and dimension bounds.
#[derive(Debug, Clone)]
pub struct EmbeddingReport {
    pub representation: Representation,
    /// `‖tr_k ∘ σ_k − φ‖`, exact.
    pub trace_error: Rational,
    pub subgroup: TractableSubgroup,
    pub quotient_dim: u64,
    /// `k²(Δ − r)` and `k²(Δ + r)`.
    pub bounds: (f64, f64),
    pub delta: Rational,
    pub k: usize,
    pub r: f64,
    /// `ε = r²/(4p)`.
    pub epsilon: f64,
    pub n0: u64,
    /// `k₀ = (n₀ + 1) n₁ ⋯ n_p`; the guarantees apply for `k > k₀`.
    pub k0: u64,
    /// The `n` with `n·n₁⋯n_p ≤ k < (n+1)·n₁⋯n_p`.
    pub n: u64,
    /// Apportioned `m_i` with `Σ m_i = n`.
    pub m: Vec<u64>,
    pub above_threshold: bool,
}

impl EmbeddingReport {
    pub fn trace_error_ok(&self) -> bool {
        rational_to_f64(&self.trace_error) < self.r * self.r
    }

    pub fn bounds_ok(&self) -> bool {
        let q = self.quotient_dim as f64;
        self.bounds.0 < q && q < self.bounds.1
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "algebra": SpecDocument::from(self.representation.algebra()),
            "k": self.k,
            "r": self.r,
            "epsilon": self.epsilon,
            "n0": self.n0,
            "k0": self.k0,
            "above_threshold": self.above_threshold,
            "n": self.n,
            "m": self.m,
            "multiplicities": self.representation.multiplicities(),
            "null_dim": self.representation.null_dim(),
            "trace_error": format_rational(&self.trace_error),
            "trace_error_decimal": rational_to_f64(&self.trace_error),
            "delta": format_rational(&self.delta),
            "subgroup_factors": self.subgroup.factors(),
            "subgroup_dim": self.subgroup.dim(),
            "quotient_dim": self.quotient_dim,
            "lower_bound": self.bounds.0,
            "upper_bound": self.bounds.1,
        })
    }
}

/// Largest-remainder apportionment of `Σ α_i · n` into integers summing to `n`.
pub fn apportion(weights: &[Rational], n: u64) -> Vec<u64> {
    let total = rat(n as i64, 1);
    let quotas: Vec<Rational> = weights.iter().map(|w| w * &total).collect();
    let mut m: Vec<u64> = quotas
        .iter()
        .map(|q| q.floor().to_integer().to_u64().unwrap_or(0))
        .collect();
    let assigned: u64 = m.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    // larger fractional part first, ties by index
    order.sort_by(|&a, &b| {
        let fa = &quotas[a] - quotas[a].floor();
        let fb = &quotas[b] - quotas[b].floor();
        fb.cmp(&fa).then(a.cmp(&b))
    });
    for &i in order.iter().take(n.saturating_sub(assigned) as usize) {
        m[i] += 1;
    }
    m
}

/// Builds `σ_k` following the block-count recipe: `ε = r²/(4p)`,
/// `n₀ = ⌊(p+1)/ε⌋ + 1`, `n = ⌊k / Π n_i⌋`, `m` apportioned from `α n`,
/// `l_i = Π n_j · m_i / n_i`, and the remaining coordinates left null.
/// Below `k₀` the same construction is returned and flagged.
pub fn build_embedding(algebra: &FiniteDimAlgebra, k: usize, r: f64) -> Result<EmbeddingReport> {
    if !algebra.is_state() {
        return Err(Error::InvalidInput(
            "build_embedding needs a state (weights sum to 1)".into(),
        ));
    }
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidInput(format!("r must lie in (0, 1), got {r}")));
    }
    if k == 0 {
        return Err(Error::InvalidInput("k must be ≥ 1".into()));
    }
    let p = algebra.num_blocks();
    let epsilon = r * r / (4.0 * p as f64);
    let n0 = ((p as f64 + 1.0) / epsilon).floor() as u64 + 1;
    let prod: u64 = algebra
        .block_dims()
        .iter()
        .try_fold(1u64, |acc, &n| acc.checked_mul(n as u64))
        .ok_or_else(|| Error::InvalidInput("product of block sizes overflows".into()))?;
    let k0 = (n0 + 1).saturating_mul(prod);
    let n = k as u64 / prod;
    let (m, mult) = if n == 0 {
        (vec![0; p], vec![0usize; p])
    } else {
        let m = apportion(algebra.block_weights(), n);
        let mult = m
            .iter()
            .zip(algebra.block_dims())
            .map(|(&mi, &ni)| (prod * mi / ni as u64) as usize)
            .collect();
        (m, mult)
    };
    let used: usize = mult.iter().zip(algebra.block_dims()).map(|(l, n)| l * n).sum();
    let representation = Representation::new(algebra.clone(), mult, k - used)?;
    let subgroup = representation.commutant_subgroup()?;
    let delta = delta_capacity(algebra);
    let d = rational_to_f64(&delta);
    let k2 = (k * k) as f64;
    let trace_error = representation.trace_error();
    Ok(EmbeddingReport {
        quotient_dim: subgroup.quotient_dim(),
        trace_error,
        subgroup,
        bounds: (k2 * (d - r), k2 * (d + r)),
        delta,
        k,
        r,
        epsilon,
        n0,
        k0,
        n,
        m,
        above_threshold: k as u64 > k0,
        representation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat;
    use proptest::prelude::*;

    #[test]
    fn m2_examples() {
        let m2 = FiniteDimAlgebra::matrix_algebra(2).unwrap();
        let e = build_embedding(&m2, 5, 0.5).unwrap();
        assert_eq!(e.representation.multiplicities(), &[2]);
        assert_eq!(e.representation.null_dim(), 1);
        assert_eq!(e.representation.trace_weights(), vec![rat(4, 5)]);
        assert_eq!(e.trace_error, rat(1, 5));
        assert_eq!(e.subgroup.dim(), 5);
        assert_eq!(e.quotient_dim, 20);
        assert!(!e.above_threshold);

        let e = build_embedding(&m2, 4, 0.5).unwrap();
        assert_eq!(e.representation.multiplicities(), &[2]);
        assert_eq!(e.representation.null_dim(), 0);
        assert_eq!(e.trace_error, rat(0, 1));
        assert_eq!(e.quotient_dim, 12);
    }

    #[test]
    fn trivial_algebra() {
        let c = FiniteDimAlgebra::matrix_algebra(1).unwrap();
        for k in [1, 7, 40] {
            let e = build_embedding(&c, k, 0.3).unwrap();
            assert_eq!(e.representation.multiplicities(), &[k]);
            assert_eq!(e.quotient_dim, 0);
            assert_eq!(e.subgroup.factors().len(), 1);
        }
    }

    #[test]
    fn small_k_is_flagged_not_rejected() {
        let a = FiniteDimAlgebra::new(vec![2, 3], vec![rat(1, 2), rat(1, 2)]).unwrap();
        let e = build_embedding(&a, 4, 0.5).unwrap();
        assert_eq!(e.representation.multiplicities(), &[0, 0]);
        assert_eq!(e.representation.null_dim(), 4);
        assert!(!e.above_threshold);
        let half = FiniteDimAlgebra::new(vec![1], vec![rat(1, 2)]).unwrap();
        assert!(build_embedding(&half, 4, 0.5).is_err());
        assert!(build_embedding(&a, 4, 1.0).is_err());
    }

    #[test]
    fn apportionment_sums() {
        let w = [rat(1, 3), rat(1, 3), rat(1, 3)];
        assert_eq!(apportion(&w, 4), vec![2, 1, 1]);
        assert_eq!(apportion(&w, 3), vec![1, 1, 1]);
        let w = [rat(1, 10), rat(9, 10)];
        assert_eq!(apportion(&w, 7), vec![1, 6]);
    }

    #[test]
    fn three_blocks_above_threshold() {
        let a = FiniteDimAlgebra::new(vec![1, 2, 3], vec![rat(1, 6), rat(1, 3), rat(1, 2)]).unwrap();
        let e0 = build_embedding(&a, 1, 0.5).unwrap();
        for k in [e0.k0 as usize + 1, e0.k0 as usize + 17, 2 * e0.k0 as usize] {
            let e = build_embedding(&a, k, 0.5).unwrap();
            assert!(e.above_threshold && e.trace_error_ok() && e.bounds_ok());
        }
    }

    fn state_algebra() -> impl Strategy<Value = FiniteDimAlgebra> {
        prop::collection::vec((1usize..4, 1u32..10), 1..3).prop_map(|blocks| {
            let total: u32 = blocks.iter().map(|b| b.1).sum();
            FiniteDimAlgebra::new(
                blocks.iter().map(|b| b.0).collect(),
                blocks.iter().map(|b| rat(b.1 as i64, total as i64)).collect(),
            )
            .unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn guarantees_above_threshold(a in state_algebra(), offset in 1usize..120, r in 0.6f64..0.95) {
            let e0 = build_embedding(&a, 1, r).unwrap();
            let k = e0.k0 as usize + offset;
            let e = build_embedding(&a, k, r).unwrap();
            prop_assert!(e.above_threshold);
            prop_assert!(e.trace_error_ok(), "trace error {}", e.trace_error);
            prop_assert!(e.bounds_ok(), "{} not in {:?}", e.quotient_dim, e.bounds);
            // dense products get slow; the block layout is covered separately
            if k <= 120 {
                prop_assert!(e.representation.homomorphism_residual().unwrap() < 1e-10);
            }
        }
    }
}
