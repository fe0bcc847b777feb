//! Evaluation of noncommutative polynomials on matrix tuples.

use rand::RngExt;

use super::{hs_norm_full, identity, op_norm_full, random_hermitian, real, CMat, RngSeed};
use crate::algebra::NCPolynomial;
use crate::error::{Error, Result};

/// `Σ coeff · (word product)`, the empty word contributing `coeff · I`.
pub fn apply_nc_polynomial(f: &NCPolynomial, args: &[CMat]) -> Result<CMat> {
    if args.len() != f.arity() {
        return Err(Error::ShapeMismatch(format!(
            "polynomial has arity {}, got {} arguments",
            f.arity(),
            args.len()
        )));
    }
    let k = args.first().map(|a| a.nrows()).unwrap_or(1);
    if let Some(a) = args.iter().find(|a| a.nrows() != k || a.ncols() != k) {
        return Err(Error::ShapeMismatch(format!(
            "argument of shape {:?}, expected {k}x{k}",
            a.shape()
        )));
    }
    let mut out = CMat::zeros(k, k);
    for term in f.terms() {
        let mut prod = identity(k);
        for &letter in &term.word {
            prod *= &args[letter];
        }
        out += prod * term.coeff;
    }
    Ok(out)
}

fn sample_ball_tuple(n: usize, k: usize, radius: f64, rng: &mut impl rand::Rng) -> Vec<CMat> {
    (0..n)
        .map(|_| {
            let h = random_hermitian(k, rng);
            let norm = op_norm_full(&h);
            let target = radius * (0.5 + 0.5 * rng.random::<f64>());
            if norm > 0.0 {
                h * real(target / norm)
            } else {
                h
            }
        })
        .collect()
}

/// Empirical Lipschitz ratio of `f` on self-adjoint tuples in the operator-norm
/// ball of radius `radius`: the running maximum of
/// `|f(ξ) − f(η)|₂ / max_i |ξ_i − η_i|₂` over `trials` seeded pairs.
///
/// Trial `t` draws from `seed.rng(t)`, so the estimate is nondecreasing in `trials`.
pub fn lipschitz_estimate(f: &NCPolynomial, radius: f64, k: usize, trials: usize, seed: &RngSeed) -> Result<f64> {
    if trials == 0 || k == 0 || radius <= 0.0 {
        return Err(Error::InvalidInput(
            "lipschitz_estimate needs trials ≥ 1, k ≥ 1, radius > 0".into(),
        ));
    }
    let n = f.arity();
    let mut best: f64 = 0.0;
    for t in 0..trials {
        let mut rng = seed.rng(t as u64);
        let xi = sample_ball_tuple(n, k, radius, &mut rng);
        let eta: Vec<CMat> = if rng.random_bool(0.5) {
            sample_ball_tuple(n, k, radius, &mut rng)
        } else {
            let step = radius * 10f64.powf(-3.0 * rng.random::<f64>());
            xi.iter()
                .map(|x| {
                    let h = random_hermitian(k, &mut rng);
                    let h = &h * real(step / op_norm_full(&h).max(f64::MIN_POSITIVE));
                    let y = x + h;
                    let norm = op_norm_full(&y);
                    if norm > radius {
                        y * real(radius / norm)
                    } else {
                        y
                    }
                })
                .collect()
        };
        let gap = xi
            .iter()
            .zip(&eta)
            .map(|(a, b)| hs_norm_full(&(a - b)))
            .fold(0.0, f64::max);
        if gap <= 0.0 {
            continue;
        }
        let num = hs_norm_full(&(apply_nc_polynomial(f, &xi)? - apply_nc_polynomial(f, &eta)?));
        best = best.max(num / gap);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{NCPolynomial, NcTerm};
    use crate::linalg::{c64, matrix_unit};

    #[test]
    fn identity_word_returns_argument() {
        let f = NCPolynomial::variable(0, 1).unwrap();
        let x = matrix_unit(3, 0, 2);
        assert_eq!(apply_nc_polynomial(&f, std::slice::from_ref(&x)).unwrap(), x);
    }

    #[test]
    fn product_of_matrix_units() {
        let f = NCPolynomial::new(2, vec![NcTerm::new(real(1.0), vec![0, 1])]).unwrap();
        let out = apply_nc_polynomial(&f, &[matrix_unit(2, 0, 1), matrix_unit(2, 1, 0)]).unwrap();
        assert_eq!(out, matrix_unit(2, 0, 0));
    }

    #[test]
    fn constant_gives_identity() {
        let f = NCPolynomial::constant(real(1.0), 1);
        assert_eq!(apply_nc_polynomial(&f, &[matrix_unit(4, 1, 1)]).unwrap(), identity(4));
        let g = NCPolynomial::constant(c64(0.0, 2.0), 2);
        assert!(apply_nc_polynomial(&g, &[identity(2)]).is_err());
    }

    #[test]
    fn lipschitz_examples() {
        let seed = RngSeed::new(9, "lip");
        let x0 = NCPolynomial::variable(0, 1).unwrap();
        let est = lipschitz_estimate(&x0, 1.0, 4, 20, &seed).unwrap();
        assert!((est - 1.0).abs() < 1e-12);

        let sq = NCPolynomial::new(1, vec![NcTerm::new(real(1.0), vec![0, 0])]).unwrap();
        let est = lipschitz_estimate(&sq, 1.0, 4, 200, &seed).unwrap();
        assert!(est <= 2.0 + 1e-6 && est > 0.5, "estimate {est}");

        let c = NCPolynomial::constant(real(3.0), 1);
        assert_eq!(lipschitz_estimate(&c, 1.0, 4, 10, &seed).unwrap(), 0.0);
    }

    #[test]
    fn lipschitz_monotone_in_trials() {
        let seed = RngSeed::new(4, "lip-mono");
        let f = NCPolynomial::new(
            2,
            vec![NcTerm::new(real(1.0), vec![0, 1]), NcTerm::new(real(1.0), vec![1, 0])],
        )
        .unwrap();
        let mut prev = 0.0;
        for trials in [1, 5, 20, 60] {
            let est = lipschitz_estimate(&f, 1.5, 3, trials, &seed).unwrap();
            assert!(est >= prev);
            prev = est;
        }
    }
}
