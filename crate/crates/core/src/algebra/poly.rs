//! One-variable and noncommutative polynomials.

use crate::error::{Error, Result};
use crate::linalg::{identity, real, CMat, C64};

/// Real polynomial `Σ c_i t^i`, coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    /// Horner evaluation on a square matrix.
    pub fn eval_matrix(&self, m: &CMat) -> CMat {
        let k = m.nrows();
        let mut acc = CMat::zeros(k, k);
        for &c in self.coeffs.iter().rev() {
            acc = &acc * m + identity(k) * real(c);
        }
        acc
    }
}

/// Monic `h(t) = Π (t − β_i)` vanishing exactly on the given spectrum.
pub fn annihilator_polynomial(spectrum: &[f64]) -> Result<Polynomial> {
    let mut sorted = spectrum.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::DuplicateRoot(w[0]));
    }
    if let Some(x) = sorted.iter().find(|x| !x.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite root {x}")));
    }
    let mut coeffs = vec![1.0];
    for &beta in spectrum {
        let mut next = vec![0.0; coeffs.len() + 1];
        for (i, &c) in coeffs.iter().enumerate() {
            next[i + 1] += c;
            next[i] -= beta * c;
        }
        coeffs = next;
    }
    Ok(Polynomial::new(coeffs))
}

/// `coeff · X_{w_1} ⋯ X_{w_m}`.
#[derive(Debug, Clone, PartialEq)]
pub struct NcTerm {
    pub coeff: C64,
    pub word: Vec<usize>,
}

impl NcTerm {
    pub fn new(coeff: C64, word: Vec<usize>) -> Self {
        Self { coeff, word }
    }
}

/// Polynomial in `arity` noncommuting variables.
#[derive(Debug, Clone, PartialEq)]
pub struct NCPolynomial {
    arity: usize,
    terms: Vec<NcTerm>,
}

impl NCPolynomial {
    pub fn new(arity: usize, terms: Vec<NcTerm>) -> Result<Self> {
        if let Some(t) = terms.iter().find(|t| t.word.iter().any(|&i| i >= arity)) {
            return Err(Error::InvalidInput(format!(
                "word {:?} references a variable ≥ arity {arity}",
                t.word
            )));
        }
        Ok(Self { arity, terms })
    }

    /// The coordinate polynomial `X_i`.
    pub fn variable(i: usize, arity: usize) -> Result<Self> {
        Self::new(arity, vec![NcTerm::new(real(1.0), vec![i])])
    }

    pub fn constant(c: C64, arity: usize) -> Self {
        Self {
            arity,
            terms: vec![NcTerm::new(c, Vec::new())],
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn terms(&self) -> &[NcTerm] {
        &self.terms
    }

    /// Longest word length.
    pub fn degree(&self) -> usize {
        self.terms.iter().map(|t| t.word.len()).max().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag_real, hs_norm_full};

    #[test]
    fn annihilator_examples() {
        let h = annihilator_polynomial(&[0.0]).unwrap();
        assert_eq!(h.coeffs(), &[0.0, 1.0]);
        assert_eq!(h.eval_matrix(&CMat::zeros(3, 3)), CMat::zeros(3, 3));

        let h = annihilator_polynomial(&[0.0, 1.0]).unwrap();
        assert!(hs_norm_full(&h.eval_matrix(&diag_real(&[0.0, 1.0]))) == 0.0);

        let h = annihilator_polynomial(&[1.0, 2.0, 3.0]).unwrap();
        assert!(hs_norm_full(&h.eval_matrix(&diag_real(&[1.0, 2.0, 3.0]))) < 1e-8);
        // monic, and nonzero off the spectrum
        assert_eq!(h.coeffs()[3], 1.0);
        assert!((h.eval(0.0) + 6.0).abs() < 1e-12);

        assert!(matches!(
            annihilator_polynomial(&[1.0, 1.0]),
            Err(Error::DuplicateRoot(_))
        ));
    }

    #[test]
    fn nc_polynomial_rejects_out_of_range() {
        assert!(NCPolynomial::new(1, vec![NcTerm::new(real(1.0), vec![1])]).is_err());
        assert!(NCPolynomial::variable(2, 2).is_err());
        assert_eq!(NCPolynomial::constant(real(1.0), 0).degree(), 0);
    }
}
