//! Generators of finite-dimensional algebras and a span-rank generation check.

use super::FiniteDimAlgebra;
use crate::error::{Error, Result};
use crate::linalg::{c64, real, BlockMatrix, CMat, C64};

/// `x = D + S`: in block `j`, `D_j` is diagonal with entries from one globally
/// increasing sequence `0, 1, 2, …` and `S_j` is the superdiagonal of ones.
pub fn single_generator(algebra: &FiniteDimAlgebra) -> BlockMatrix {
    let mut next = 0.0;
    let blocks = algebra
        .block_dims()
        .iter()
        .map(|&n| {
            let mut b = CMat::zeros(n, n);
            for i in 0..n {
                b[(i, i)] = real(next);
                next += 1.0;
                if i + 1 < n {
                    b[(i, i + 1)] = real(1.0);
                }
            }
            b
        })
        .collect();
    BlockMatrix::new(blocks).expect("algebra blocks are non-empty squares")
}

/// Real and imaginary parts `b1 = (x + x*)/2`, `b2 = (x − x*)/(2i)` of [`single_generator`].
pub fn selfadjoint_generator_pair(algebra: &FiniteDimAlgebra) -> (BlockMatrix, BlockMatrix) {
    let x = single_generator(algebra);
    let xs = x.adjoint();
    let b1 = x.add(&xs).expect("same shape").scale(real(0.5));
    let b2 = x.sub(&xs).expect("same shape").scale(c64(0.0, -0.5));
    let hermitize = |m: BlockMatrix| {
        let blocks = m.blocks().iter().map(|b| (b + b.adjoint()) * real(0.5)).collect();
        BlockMatrix::new(blocks)
            .and_then(BlockMatrix::with_selfadjoint_hint)
            .expect("hermitian by construction")
    };
    (hermitize(b1), hermitize(b2))
}

/// Minimal central projections `p_j = 1_{block j}`.
pub fn minimal_central_projections(algebra: &FiniteDimAlgebra) -> Vec<BlockMatrix> {
    let dims = algebra.block_dims();
    (0..dims.len())
        .map(|j| {
            let blocks = dims
                .iter()
                .enumerate()
                .map(|(i, &n)| {
                    if i == j {
                        CMat::identity(n, n)
                    } else {
                        CMat::zeros(n, n)
                    }
                })
                .collect();
            BlockMatrix::new(blocks).expect("non-empty blocks")
        })
        .collect()
}

/// `x`, `b1`, `b2` and the minimal central projections.
pub fn canonical_generators(algebra: &FiniteDimAlgebra) -> Vec<BlockMatrix> {
    let x = single_generator(algebra);
    let (b1, b2) = selfadjoint_generator_pair(algebra);
    let mut out = vec![x, b1, b2];
    out.extend(minimal_central_projections(algebra));
    out
}

fn check_shapes(elems: &[BlockMatrix], algebra: &FiniteDimAlgebra) -> Result<()> {
    if let Some(e) = elems.iter().find(|e| e.dims() != algebra.block_dims()) {
        return Err(Error::ShapeMismatch(format!(
            "element with blocks {:?} in algebra with blocks {:?}",
            e.dims(),
            algebra.block_dims()
        )));
    }
    Ok(())
}

fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn vnorm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Orthonormal basis with two-pass Gram–Schmidt.
struct SpanBasis {
    vectors: Vec<Vec<C64>>,
    tol: f64,
}

impl SpanBasis {
    /// Adds the component of `v` orthogonal to the span, returning it when
    /// it is not negligible relative to `|v|`.
    fn insert(&mut self, v: &[C64]) -> Option<Vec<C64>> {
        let scale = vnorm(v);
        if scale == 0.0 {
            return None;
        }
        let mut r: Vec<C64> = v.iter().map(|x| x / scale).collect();
        for _ in 0..2 {
            for q in &self.vectors {
                let c = inner(q, &r);
                for (ri, qi) in r.iter_mut().zip(q) {
                    *ri -= c * qi;
                }
            }
        }
        let n = vnorm(&r);
        if n <= self.tol {
            return None;
        }
        for x in r.iter_mut() {
            *x /= n;
        }
        self.vectors.push(r.clone());
        Some(r)
    }
}

fn unvectorize(v: &[C64], dims: &[usize]) -> BlockMatrix {
    let mut offset = 0;
    let blocks = dims
        .iter()
        .map(|&n| {
            let b = CMat::from_column_slice(n, n, &v[offset..offset + n * n]);
            offset += n * n;
            b
        })
        .collect();
    BlockMatrix::new(blocks).expect("dims are positive")
}

/// Dimension of the unital *-algebra generated by `elems`, grown word length
/// by word length until the span is stationary.
pub fn generated_dimension(elems: &[BlockMatrix], algebra: &FiniteDimAlgebra) -> Result<usize> {
    check_shapes(elems, algebra)?;
    let dims = algebra.block_dims().to_vec();
    let mut letters: Vec<BlockMatrix> = Vec::with_capacity(2 * elems.len());
    for e in elems {
        letters.push(e.clone());
        letters.push(e.adjoint());
    }
    let mut basis = SpanBasis {
        vectors: Vec::new(),
        tol: 1e-9,
    };
    let unit = BlockMatrix::identity(&dims);
    let mut frontier: Vec<BlockMatrix> = basis
        .insert(&unit.vectorize())
        .map(|v| vec![unvectorize(&v, &dims)])
        .unwrap_or_default();
    let n: usize = algebra.total_size();
    let cap = 2 * n * n;
    let full = algebra.dimension();
    let mut rounds = 0;
    while !frontier.is_empty() && basis.vectors.len() < full {
        rounds += 1;
        if rounds > cap {
            return Err(Error::GenerationCapExceeded { cap });
        }
        let mut next = Vec::new();
        for f in &frontier {
            for g in &letters {
                let w = g.mul(f)?;
                if let Some(v) = basis.insert(&w.vectorize()) {
                    next.push(unvectorize(&v, &dims));
                }
            }
        }
        frontier = next;
    }
    Ok(basis.vectors.len())
}

/// True iff `elems` generate the whole algebra as a unital *-algebra.
pub fn verify_generation(elems: &[BlockMatrix], algebra: &FiniteDimAlgebra) -> Result<bool> {
    Ok(generated_dimension(elems, algebra)? == algebra.dimension())
}

/// `φ(a_{w_1} ⋯ a_{w_m})` for the trace `⊕ α_j tr_{n_j}`; the empty word gives `φ(1)`.
pub fn exact_moment(elems: &[BlockMatrix], algebra: &FiniteDimAlgebra, word: &[usize]) -> Result<C64> {
    check_shapes(elems, algebra)?;
    if let Some(&i) = word.iter().find(|&&i| i >= elems.len()) {
        return Err(Error::InvalidInput(format!(
            "word letter {i} but only {} elements",
            elems.len()
        )));
    }
    let mut prod = BlockMatrix::identity(algebra.block_dims());
    for &i in word {
        prod = prod.mul(&elems[i])?;
    }
    prod.weighted_trace(&algebra.weights_f64())
}

#[cfg(test)]
mod tests {
    use super::super::rat;
    use super::*;
    use crate::linalg::{diag_real, haar_unitary, RngSeed};
    use proptest::prelude::*;

    fn alg(dims: &[usize], w: &[(i64, i64)]) -> FiniteDimAlgebra {
        FiniteDimAlgebra::new(dims.to_vec(), w.iter().map(|&(p, q)| rat(p, q)).collect()).unwrap()
    }

    // Independent oracle: rank of the span of all words of length ≤ 4 via SVD
    // of the stacked vectorizations.
    fn span_rank_oracle(elems: &[BlockMatrix], dims: &[usize], max_len: usize) -> usize {
        let mut letters = Vec::new();
        for e in elems {
            letters.push(e.clone());
            letters.push(e.adjoint());
        }
        let mut words = vec![BlockMatrix::identity(dims)];
        let mut layer = words.clone();
        for _ in 0..max_len {
            let mut next = Vec::new();
            for w in &layer {
                for g in &letters {
                    next.push(g.mul(w).unwrap());
                }
            }
            words.extend(next.iter().cloned());
            layer = next;
        }
        let rows = words.len();
        let cols: usize = dims.iter().map(|n| n * n).sum();
        let mut m = CMat::zeros(rows, cols);
        for (i, w) in words.iter().enumerate() {
            for (j, v) in w.vectorize().into_iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        let sv = m.singular_values();
        let top = sv.iter().cloned().fold(0.0, f64::max);
        sv.iter().filter(|&&s| s > 1e-9 * top).count()
    }

    #[test]
    fn single_generator_examples() {
        let m2 = alg(&[2], &[(1, 1)]);
        let x = single_generator(&m2);
        assert!(verify_generation(std::slice::from_ref(&x), &m2).unwrap());
        assert_eq!(span_rank_oracle(&[x], &[2], 4), 4);

        let cc = alg(&[1, 1], &[(1, 2), (1, 2)]);
        let x = single_generator(&cc);
        assert_eq!(x.to_dense(), diag_real(&[0.0, 1.0]));
        assert!(verify_generation(std::slice::from_ref(&x), &cc).unwrap());
        assert_eq!(span_rank_oracle(&[x], &[1, 1], 1), 2);

        let c = alg(&[1], &[(1, 1)]);
        assert!(verify_generation(&[single_generator(&c)], &c).unwrap());
    }

    #[test]
    fn generator_pair_examples() {
        let m2 = alg(&[2], &[(1, 1)]);
        let (b1, b2) = selfadjoint_generator_pair(&m2);
        assert!(b1.is_selfadjoint(0.0) && b2.is_selfadjoint(0.0));
        assert!(verify_generation(&[b1.clone(), b2.clone()], &m2).unwrap());
        assert_eq!(span_rank_oracle(&[b1, b2], &[2], 4), 4);

        let c = alg(&[1], &[(1, 1)]);
        let (b1, b2) = selfadjoint_generator_pair(&c);
        assert_eq!(b2.to_dense(), CMat::zeros(1, 1));
        assert_eq!(b1.to_dense().nrows(), 1);

        let cc = alg(&[1, 1], &[(1, 2), (1, 2)]);
        let (b1, b2) = selfadjoint_generator_pair(&cc);
        assert_eq!(b1.to_dense(), diag_real(&[0.0, 1.0]));
        assert_eq!(b2.to_dense(), CMat::zeros(2, 2));
        assert!(verify_generation(&[b1, b2], &cc).unwrap());
    }

    #[test]
    fn verify_generation_examples() {
        let m2 = alg(&[2], &[(1, 1)]);
        assert!(!verify_generation(&[BlockMatrix::identity(&[2])], &m2).unwrap());
        let cc = alg(&[1, 1], &[(1, 2), (1, 2)]);
        let d = BlockMatrix::new(vec![CMat::zeros(1, 1), CMat::identity(1, 1)]).unwrap();
        assert!(verify_generation(&[d], &cc).unwrap());
        // the diagonal of M2 alone is not enough
        let diag = BlockMatrix::full(diag_real(&[0.0, 1.0])).unwrap();
        assert_eq!(generated_dimension(&[diag], &m2).unwrap(), 2);
        assert!(verify_generation(&[BlockMatrix::identity(&[3])], &m2).is_err());
    }

    #[test]
    fn generators_for_larger_algebras() {
        for dims in [vec![3], vec![1, 2, 3], vec![4, 1], vec![2, 2]] {
            let w: Vec<_> = dims.iter().map(|_| (1, dims.len() as i64)).collect();
            let a = alg(&dims, &w);
            let x = single_generator(&a);
            assert!(
                verify_generation(std::slice::from_ref(&x), &a).unwrap(),
                "dims {dims:?}"
            );
            let (b1, b2) = selfadjoint_generator_pair(&a);
            assert!(verify_generation(&[b1, b2], &a).unwrap());
            assert_eq!(minimal_central_projections(&a).len(), dims.len());
        }
    }

    #[test]
    fn moment_examples() {
        let m2 = alg(&[2], &[(1, 1)]);
        let a = BlockMatrix::full(diag_real(&[1.0, -1.0])).unwrap();
        let one = exact_moment(std::slice::from_ref(&a), &m2, &[]).unwrap();
        assert!((one - real(1.0)).norm() < 1e-15);
        let m = exact_moment(std::slice::from_ref(&a), &m2, &[0, 0]).unwrap();
        assert!((m - real(1.0)).norm() < 1e-15);

        let cc = alg(&[1, 1], &[(1, 2), (1, 2)]);
        let e = BlockMatrix::new(vec![CMat::identity(1, 1), CMat::zeros(1, 1)]).unwrap();
        let m = exact_moment(&[e], &cc, &[0]).unwrap();
        assert!((m - real(0.5)).norm() < 1e-15);

        assert!(exact_moment(&[a], &cc, &[0]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn moment_is_conjugation_invariant(seed in any::<u64>(), word in prop::collection::vec(0usize..2, 0..6)) {
            let a = alg(&[2, 3], &[(1, 3), (2, 3)]);
            let x = single_generator(&a);
            let (b1, _) = selfadjoint_generator_pair(&a);
            let mut rng = RngSeed::new(seed, "conj").rng(0);
            let us: Vec<CMat> = a.block_dims().iter().map(|&n| haar_unitary(n, &mut rng)).collect();
            let conj = |m: &BlockMatrix| {
                BlockMatrix::new(m.blocks().iter().zip(&us).map(|(b, u)| u * b * u.adjoint()).collect()).unwrap()
            };
            let lhs = exact_moment(&[x.clone(), b1.clone()], &a, &word).unwrap();
            let rhs = exact_moment(&[conj(&x), conj(&b1)], &a, &word).unwrap();
            prop_assert!((lhs - rhs).norm() < 1e-9 * (1.0 + lhs.norm()));
        }

        #[test]
        fn moment_is_linear_in_a_letter(s in -3.0f64..3.0, t in -3.0f64..3.0) {
            let a = alg(&[2, 1], &[(1, 2), (1, 2)]);
            let x = single_generator(&a);
            let (b1, b2) = selfadjoint_generator_pair(&a);
            let comb = b1.scale(real(s)).add(&b2.scale(real(t))).unwrap();
            let lhs = exact_moment(&[x.clone(), comb], &a, &[0, 1, 0]).unwrap();
            let r1 = exact_moment(&[x.clone(), b1], &a, &[0, 1, 0]).unwrap();
            let r2 = exact_moment(&[x, b2], &a, &[0, 1, 0]).unwrap();
            prop_assert!((lhs - (r1 * s + r2 * t)).norm() < 1e-9);
        }
    }
}
