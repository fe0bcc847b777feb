//! Microstate sets `Γ_R(a; m, k, γ)`, moment oracles, and the finite-degree
//! freeness surrogate with its Haar-conjugation experiment.

mod freeness;

pub use freeness::{asymptotic_freeness_experiment, freeness_defect, FreenessExperiment, FreenessTrial};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::algebra::{exact_moment, rat, rational_to_f64, FiniteDimAlgebra, Rational, SpectralMeasure};
use crate::embed::{check_witness, Representation};
use crate::error::{Error, Result};
use crate::linalg::{c64, diag_real, hermitian_residual, op_norm_full, trace_of_product, BlockMatrix, CMat, C64};

/// Upper bound on `n + n² + ⋯ + n^m` words enumerated by one membership check.
pub const WORD_LIMIT: u128 = 10_000_000;

/// Parameters `(m, γ, R)` of a microstate set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct MicrostateSpec {
    pub m: usize,
    pub gamma: f64,
    pub r: f64,
}

impl MicrostateSpec {
    pub fn new(m: usize, gamma: f64, r: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidInput("m must be ≥ 1".into()));
        }
        if !(gamma > 0.0) || !(r > 0.0) {
            return Err(Error::InvalidInput(format!(
                "γ and R must be positive, got {gamma}, {r}"
            )));
        }
        Ok(Self { m, gamma, r })
    }
}

/// Source of the target moments `φ(a_{j₁} ⋯ a_{j_p})`.
#[derive(Debug, Clone)]
pub enum MomentOracle {
    /// Elements of a finite-dimensional algebra with its trace.
    Algebra {
        algebra: FiniteDimAlgebra,
        elems: Vec<BlockMatrix>,
    },
    /// A single self-adjoint element with this distribution.
    Spectral(SpectralMeasure),
    /// `n` free semicircular elements supported on `[−1, 1]`.
    Semicircular { n: usize },
}

impl MomentOracle {
    pub fn arity(&self) -> usize {
        match self {
            MomentOracle::Algebra { elems, .. } => elems.len(),
            MomentOracle::Spectral(_) => 1,
            MomentOracle::Semicircular { n } => *n,
        }
    }

    pub fn moment(&self, word: &[usize]) -> Result<C64> {
        let n = self.arity();
        if let Some(&i) = word.iter().find(|&&i| i >= n) {
            return Err(Error::InvalidInput(format!("letter {i} for arity {n}")));
        }
        match self {
            MomentOracle::Algebra { algebra, elems } => exact_moment(elems, algebra, word),
            MomentOracle::Spectral(mu) => Ok(c64(mu.moment(word.len() as u32)?, 0.0)),
            MomentOracle::Semicircular { .. } => Ok(c64(rational_to_f64(&semicircular_word_moment(word)), 0.0)),
        }
    }
}

fn catalan(n: u64) -> BigInt {
    // C_{i+1} = C_i · 2(2i+1)/(i+2)
    let mut c = BigInt::one();
    for i in 0..n {
        c = c * BigInt::from(2 * (2 * i + 1)) / BigInt::from(i + 2);
    }
    c
}

/// `(2/π) ∫_{−1}^{1} t^d √(1−t²) dt`: zero for odd `d`, `Catalan(d/2) / 4^{d/2}` for even `d`.
pub fn semicircular_moment(d: u32) -> Rational {
    if d % 2 == 1 {
        return Rational::zero();
    }
    let h = d / 2;
    Rational::new(catalan(h as u64), BigInt::from(4).pow(h))
}

/// Joint moment of free semicirculars of variance `1/4`: the number of
/// non-crossing pairings of `word` that only pair equal letters, times `4^{−|word|/2}`.
pub fn semicircular_word_moment(word: &[usize]) -> Rational {
    let len = word.len();
    if len % 2 == 1 {
        return Rational::zero();
    }
    // count[i][j] for the half-open interval word[i..j]
    let mut count = vec![vec![BigInt::zero(); len + 1]; len + 1];
    for i in 0..=len {
        count[i][i] = BigInt::one();
    }
    for width in (2..=len).step_by(2) {
        for i in 0..=len - width {
            let j = i + width;
            let mut total = BigInt::zero();
            for t in (i + 1..j).step_by(2) {
                if word[t] == word[i] {
                    total += &count[i + 1][t] * &count[t + 1][j];
                }
            }
            count[i][j] = total;
        }
    }
    Rational::new(count[0][len].clone(), BigInt::from(4).pow((len / 2) as u32))
}

/// True iff `word` is the lexicographically least of its rotations.
pub(crate) fn is_cyclic_representative(word: &[usize]) -> bool {
    let n = word.len();
    (1..n).all(|s| {
        for i in 0..n {
            let a = word[i];
            let b = word[(i + s) % n];
            if a != b {
                return a < b;
            }
        }
        true
    })
}

/// Outcome of a `Γ_R(m, γ)` membership check.
#[derive(Debug, Clone, Serialize)]
pub struct Membership {
    pub member: bool,
    /// Whether every `‖x_j‖ ≤ R`.
    pub norm_ok: bool,
    pub worst_word: Vec<usize>,
    pub worst_deviation: f64,
    /// Number of cyclic classes evaluated.
    pub words_checked: usize,
}

fn check_tuple(tuple: &[CMat]) -> Result<usize> {
    let k = tuple.first().map(|x| x.nrows()).unwrap_or(0);
    if k == 0 {
        return Err(Error::InvalidInput("empty tuple".into()));
    }
    for x in tuple {
        if x.nrows() != k || x.ncols() != k {
            return Err(Error::ShapeMismatch(format!(
                "{:?} in a tuple of {k}×{k} matrices",
                x.shape()
            )));
        }
        if hermitian_residual(x) > 1e-9 * (1.0 + x.norm()) {
            return Err(Error::InvalidInput("microstate entries must be self-adjoint".into()));
        }
    }
    Ok(k)
}

/// Checks `‖x_j‖ ≤ R` and `|tr_k(x_w) − φ(a_w)| < γ` for every word of length
/// `1..=m`, one word per cyclic class.
pub fn check_gamma_membership(tuple: &[CMat], oracle: &MomentOracle, spec: &MicrostateSpec) -> Result<Membership> {
    let k = check_tuple(tuple)?;
    let n = tuple.len();
    if n != oracle.arity() {
        return Err(Error::ShapeMismatch(format!(
            "{n} matrices for an oracle of arity {}",
            oracle.arity()
        )));
    }
    let words: u128 = (1..=spec.m as u32).map(|p| (n as u128).saturating_pow(p)).sum();
    if words > WORD_LIMIT {
        return Err(Error::CostGuard {
            what: "microstate word enumeration",
            needed: words,
            limit: WORD_LIMIT,
        });
    }
    let norm_ok = tuple.iter().all(|x| op_norm_full(x) <= spec.r);
    let mut out = Membership {
        member: norm_ok,
        norm_ok,
        worst_word: Vec::new(),
        worst_deviation: 0.0,
        words_checked: 0,
    };
    let kf = k as f64;
    // depth-first over prefixes; the last letter is folded in via a trace pairing
    let mut stack: Vec<(Vec<usize>, CMat)> = vec![(Vec::new(), crate::linalg::identity(k))];
    while let Some((prefix, prod)) = stack.pop() {
        for (i, x) in tuple.iter().enumerate() {
            let mut word = prefix.clone();
            word.push(i);
            if is_cyclic_representative(&word) {
                let t = trace_of_product(&prod, x) / kf;
                let dev = (t - oracle.moment(&word)?).norm();
                out.words_checked += 1;
                if dev > out.worst_deviation || out.worst_word.is_empty() {
                    out.worst_deviation = dev;
                    out.worst_word = word.clone();
                }
            }
            if word.len() < spec.m {
                stack.push((word, &prod * x));
            }
        }
    }
    out.member = out.norm_ok && out.worst_deviation < spec.gamma;
    Ok(out)
}

/// Membership in the set `T`: the witness `σ` satisfies `|σ(b_i) − x_i|₂ ≤ ε`
/// and `‖tr_k ∘ σ − φ‖ < ε²`.
pub fn check_t_membership(
    tuple: &[CMat],
    witness: &Representation,
    generators: &[BlockMatrix],
    eps: f64,
) -> Result<bool> {
    Ok(check_witness(tuple, generators, witness, eps)?.holds())
}

/// Diagonal `k×k` matrix of left quantiles `μ⁻¹((j − ½)/k)`, `j = 1..k`.
pub fn diagonal_microstate(mu: &SpectralMeasure, k: usize) -> Result<CMat> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be ≥ 1".into()));
    }
    let entries = (1..=k)
        .map(|j| mu.quantile(&rat(2 * j as i64 - 1, 2 * k as i64)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(diag_real(&entries))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{selfadjoint_generator_pair, ContinuousLaw};
    use crate::embed::build_embedding;
    use crate::linalg::{conjugate, haar_unitary, identity, random_hermitian, real, RngSeed};
    use proptest::prelude::*;

    // Trapezoid rule in θ for (1/π)∫_0^{2π} cos^d θ sin²θ dθ, exact for
    // trigonometric polynomials of degree below the node count.
    fn quadrature(d: u32) -> f64 {
        let nodes = 512;
        let h = std::f64::consts::TAU / nodes as f64;
        (0..nodes)
            .map(|i| {
                let th = i as f64 * h;
                th.cos().powi(d as i32) * th.sin().powi(2)
            })
            .sum::<f64>()
            * h
            / std::f64::consts::PI
    }

    #[test]
    fn semicircle_moments_match_quadrature() {
        assert_eq!(semicircular_moment(0), rat(1, 1));
        assert_eq!(semicircular_moment(2), rat(1, 4));
        assert_eq!(semicircular_moment(4), rat(1, 8));
        assert_eq!(semicircular_moment(7), rat(0, 1));
        for d in 0..=20 {
            let exact = rational_to_f64(&semicircular_moment(d));
            assert!((exact - quadrature(d)).abs() < 1e-10, "d = {d}");
        }
    }

    #[test]
    fn free_semicircular_words() {
        for d in 0..12 {
            assert_eq!(semicircular_word_moment(&vec![0; d]), semicircular_moment(d as u32));
        }
        assert_eq!(semicircular_word_moment(&[0, 1, 0, 1]), rat(0, 1));
        assert_eq!(semicircular_word_moment(&[0, 0, 1, 1]), rat(1, 16));
        assert_eq!(semicircular_word_moment(&[0, 1, 1, 0]), rat(1, 16));
        // s₀s₀s₁s₁s₀s₀ has two admissible pairings
        assert_eq!(semicircular_word_moment(&[0, 0, 1, 1, 0, 0]), rat(2, 64));
    }

    #[test]
    fn gue_matches_semicircular_oracle() {
        let k = 400;
        let mut rng = RngSeed::new(3, "gue").rng(0);
        // off-diagonal variance of random_hermitian is 1/2; rescale so tr(x²) → 1/4
        let xs: Vec<CMat> = (0..2)
            .map(|_| random_hermitian(k, &mut rng) * real(1.0 / (2.0 * k as f64).sqrt()))
            .collect();
        let o = MomentOracle::Semicircular { n: 2 };
        let res = check_gamma_membership(&xs, &o, &MicrostateSpec::new(4, 0.02, 1.2).unwrap()).unwrap();
        assert!(res.member, "{res:?}");
    }

    #[test]
    fn cyclic_representatives() {
        assert!(is_cyclic_representative(&[0, 0, 1]));
        assert!(!is_cyclic_representative(&[0, 1, 0]));
        assert!(is_cyclic_representative(&[0, 1, 0, 1]));
        assert!(!is_cyclic_representative(&[1, 0, 1, 0]));
        // one representative per necklace: 2-colour necklaces of length 6 number 14
        let reps = (0..64u32)
            .map(|b| (0..6).map(|i| ((b >> i) & 1) as usize).collect::<Vec<_>>())
            .filter(|w| is_cyclic_representative(w))
            .count();
        assert_eq!(reps, 14);
    }

    fn two_atom() -> SpectralMeasure {
        SpectralMeasure::atomic(vec![(-1.0, rat(1, 2)), (1.0, rat(1, 2))]).unwrap()
    }

    #[test]
    fn exact_images_are_members() {
        let a = FiniteDimAlgebra::new(vec![2, 1], vec![rat(2, 3), rat(1, 3)]).unwrap();
        // k divisible: l = (2, 2) with k = 6 gives trace weights exactly α
        let e = build_embedding(&a, 6, 0.5).unwrap();
        assert_eq!(e.trace_error, rat(0, 1));
        let (b1, b2) = selfadjoint_generator_pair(&a);
        let xs = vec![
            e.representation.apply(&b1).unwrap(),
            e.representation.apply(&b2).unwrap(),
        ];
        let o = MomentOracle::Algebra {
            algebra: a,
            elems: vec![b1, b2],
        };
        let spec = MicrostateSpec::new(6, 1e-9, 10.0).unwrap();
        let res = check_gamma_membership(&xs, &o, &spec).unwrap();
        assert!(res.member, "{res:?}");
        // with cyclic dedup: necklaces of length ≤ 6 over 2 letters
        assert_eq!(res.words_checked, 2 + 3 + 4 + 6 + 8 + 14);
    }

    #[test]
    fn two_atom_diagonal_and_cutoff() {
        let mu = two_atom();
        let x = diagonal_microstate(&mu, 2).unwrap();
        assert_eq!(x, diag_real(&[-1.0, 1.0]));
        let o = MomentOracle::Spectral(mu);
        for m in 1..=8 {
            let spec = MicrostateSpec::new(m, 1e-12, 1.0).unwrap();
            assert!(
                check_gamma_membership(std::slice::from_ref(&x), &o, &spec)
                    .unwrap()
                    .member
            );
        }
        let big = &x * real(2.0);
        let spec = MicrostateSpec::new(3, 1e6, 1.0).unwrap();
        let res = check_gamma_membership(&[big], &o, &spec).unwrap();
        assert!(!res.member && !res.norm_ok);
    }

    #[test]
    fn diagonal_microstate_examples() {
        let u = SpectralMeasure::continuous(ContinuousLaw::Uniform { lo: 0.0, hi: 1.0 }).unwrap();
        let x = diagonal_microstate(&u, 4).unwrap();
        for (i, v) in [0.125, 0.375, 0.625, 0.875].iter().enumerate() {
            assert!((x[(i, i)].re - v).abs() < 1e-12);
        }
        assert!((crate::linalg::normalized_trace(&x).re - 0.5).abs() < 1e-12);
        let m = diagonal_microstate(&u, 1).unwrap();
        assert!((m[(0, 0)].re - 0.5).abs() < 1e-12);
    }

    #[test]
    fn diagonal_moments_converge() {
        let measures = [
            SpectralMeasure::continuous(ContinuousLaw::Uniform { lo: 0.0, hi: 1.0 }).unwrap(),
            SpectralMeasure::atomic(vec![(-0.5, rat(1, 3)), (2.0, rat(2, 3))]).unwrap(),
        ];
        for mu in &measures {
            let err = |k: usize| -> f64 {
                let x = diagonal_microstate(mu, k).unwrap();
                (1..=6)
                    .map(|d| {
                        let emp: f64 = (0..k).map(|i| x[(i, i)].re.powi(d)).sum::<f64>() / k as f64;
                        (emp - mu.moment(d as u32).unwrap()).abs()
                    })
                    .fold(0.0, f64::max)
            };
            let errs: Vec<f64> = [32, 64, 128, 256].iter().map(|&k| err(k)).collect();
            for w in errs.windows(2) {
                assert!(w[1] <= w[0], "{errs:?}");
            }
        }
    }

    #[test]
    fn cost_guard_and_shapes() {
        let xs = vec![identity(2); 11];
        let o = MomentOracle::Semicircular { n: 11 };
        let spec = MicrostateSpec::new(7, 0.1, 2.0).unwrap();
        assert!(matches!(
            check_gamma_membership(&xs, &o, &spec),
            Err(Error::CostGuard { .. })
        ));
        let o = MomentOracle::Semicircular { n: 2 };
        assert!(check_gamma_membership(&xs[..1], &o, &spec).is_err());
        assert!(MicrostateSpec::new(0, 0.1, 1.0).is_err());
        assert!(MicrostateSpec::new(1, 0.0, 1.0).is_err());
    }

    #[test]
    fn t_membership() {
        let a = FiniteDimAlgebra::matrix_algebra(2).unwrap();
        let e = build_embedding(&a, 4, 0.5).unwrap();
        let (b1, b2) = selfadjoint_generator_pair(&a);
        let gens = vec![b1, b2];
        let xs: Vec<CMat> = gens.iter().map(|b| e.representation.apply(b).unwrap()).collect();
        assert!(check_t_membership(&xs, &e.representation, &gens, 1e-3).unwrap());
        // perturbation of size δ in |·|₂
        let delta = 0.2;
        let mut p = CMat::zeros(4, 4);
        p[(0, 0)] = real(1.0);
        p[(1, 1)] = real(-1.0);
        let p = &p * real(delta / crate::linalg::hs_norm_full(&p));
        let moved = vec![&xs[0] + &p, xs[1].clone()];
        assert!(check_t_membership(&moved, &e.representation, &gens, 0.21).unwrap());
        assert!(!check_t_membership(&moved, &e.representation, &gens, 0.19).unwrap());
        // wrong trace: k = 5 leaves a null coordinate and ‖tr∘σ − φ‖ = 1/5
        let e5 = build_embedding(&a, 5, 0.5).unwrap();
        let xs5: Vec<CMat> = gens.iter().map(|b| e5.representation.apply(b).unwrap()).collect();
        assert!(!check_t_membership(&xs5, &e5.representation, &gens, 0.4).unwrap());
        assert!(check_t_membership(&xs5, &e5.representation, &gens, 0.5).unwrap());
        assert!(check_t_membership(&xs[..1], &e.representation, &gens, 0.5).is_err());
    }

    fn random_tuple(seed: u64, n: usize, k: usize) -> Vec<CMat> {
        let mut rng = RngSeed::new(seed, "tuple").rng(0);
        (0..n)
            .map(|_| random_hermitian(k, &mut rng) * real(1.0 / (2.0 * k as f64).sqrt()))
            .collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn membership_monotone_and_invariant(seed in 0u64..1000, k in 2usize..8, m in 1usize..5, gamma in 0.01f64..0.3) {
            let xs = random_tuple(seed, 2, k);
            let o = MomentOracle::Semicircular { n: 2 };
            let spec = MicrostateSpec::new(m, gamma, 3.0).unwrap();
            let base = check_gamma_membership(&xs, &o, &spec).unwrap();
            if base.member {
                for m2 in 1..=m {
                    let looser = MicrostateSpec::new(m2, gamma * 1.5, 3.0).unwrap();
                    prop_assert!(check_gamma_membership(&xs, &o, &looser).unwrap().member);
                }
            }
            let mut rng = RngSeed::new(seed, "conj").rng(1);
            let u = haar_unitary(k, &mut rng);
            let ys: Vec<CMat> = xs.iter().map(|x| {
                let y = conjugate(&u, x);
                (&y + y.adjoint()) * real(0.5)
            }).collect();
            let moved = check_gamma_membership(&ys, &o, &spec).unwrap();
            prop_assert!((moved.worst_deviation - base.worst_deviation).abs() < 1e-10);
            if (base.worst_deviation - gamma).abs() > 1e-9 {
                prop_assert_eq!(moved.member, base.member);
            }
        }
    }
}
