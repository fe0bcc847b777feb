//! Unitary conjugacy between representations and aligned microstates.

use num_traits::Signed;
use serde::Serialize;

use super::Representation;
use crate::algebra::{canonical_generators, rational_to_f64, Rational};
use crate::error::{Error, Result};
use crate::linalg::{c64, conjugate, hs_norm_full, op_norm, BlockMatrix, CMat};

/// Permutation `Q` with `Q π_{l¹} Q*` equal to `π_{l²}` on the first
/// `d_j = min(l¹_j, l²_j)` copies of every block; leftover coordinates are
/// paired in index order.
pub fn alignment_permutation(s1: &Representation, s2: &Representation) -> Result<CMat> {
    s1.check_compatible(s2)?;
    let k = s1.k();
    let dims = s1.algebra().block_dims();
    let mut target = vec![usize::MAX; k];
    let mut hit = vec![false; k];
    for (j, &n) in dims.iter().enumerate() {
        let d = s1.multiplicities()[j].min(s2.multiplicities()[j]);
        for a in 0..n {
            for c in 0..d {
                let i1 = s1.canonical_index(j, a, c);
                let i2 = s2.canonical_index(j, a, c);
                target[i1] = i2;
                hit[i2] = true;
            }
        }
    }
    let mut free = (0..k).filter(|&i| !hit[i]);
    for t in target.iter_mut().filter(|t| **t == usize::MAX) {
        *t = free.next().expect("both sides leave the same number of coordinates");
    }
    let mut q = CMat::zeros(k, k);
    for (i1, &i2) in target.iter().enumerate() {
        q[(i2, i1)] = c64(1.0, 0.0);
    }
    Ok(q)
}

/// `u` with `|u σ₁(b) u* − σ₂(b)|₂ ≤ 2‖b‖ε` and its measured certificate.
#[derive(Debug, Clone)]
pub struct Conjugacy {
    pub u: CMat,
    /// `ε² = ‖tr_k ∘ σ₁ − tr_k ∘ σ₂‖`.
    pub epsilon_sq: Rational,
    pub epsilon: f64,
    /// `|u σ₁(b) u* − σ₂(b)|₂ / ‖b‖` per canonical generator.
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
}

impl Conjugacy {
    pub fn bound(&self) -> f64 {
        2.0 * self.epsilon
    }

    /// `|u σ₁(x) u* − σ₂(x)|₂` for any `x ∈ N`.
    pub fn distance(&self, s1: &Representation, s2: &Representation, x: &BlockMatrix) -> Result<f64> {
        Ok(hs_norm_full(&(conjugate(&self.u, &s1.apply(x)?) - s2.apply(x)?)))
    }
}

/// Conjugating unitary `u = F₂ Q F₁*`, certified on the canonical generators
/// (`x`, its real and imaginary parts, and the central projections).
pub fn conjugate_representations(s1: &Representation, s2: &Representation) -> Result<Conjugacy> {
    let q = alignment_permutation(s1, s2)?;
    let mut u = q;
    if let Some(f2) = s2.frame() {
        u = f2 * u;
    }
    if let Some(f1) = s1.frame() {
        u *= f1.adjoint();
    }
    let epsilon_sq = s1.functional_distance(s2)?;
    let epsilon = rational_to_f64(&epsilon_sq).sqrt();
    let mut ratios = Vec::new();
    for b in canonical_generators(s1.algebra()) {
        let norm = op_norm(&b);
        if norm == 0.0 {
            continue;
        }
        let d = hs_norm_full(&(conjugate(&u, &s1.apply(&b)?) - s2.apply(&b)?));
        ratios.push(d / norm);
    }
    let max_ratio = ratios.iter().cloned().fold(0.0, f64::max);
    let out = Conjugacy {
        u,
        epsilon_sq,
        epsilon,
        ratios,
        max_ratio,
    };
    if out.max_ratio > out.bound() + 1e-10 {
        return Err(Error::CertificateViolation(format!(
            "conjugacy ratio {} exceeds 2ε = {}",
            out.max_ratio,
            out.bound()
        )));
    }
    Ok(out)
}

/// Measured quantities of a witness `σ` for a tuple `x`.
#[derive(Debug, Clone, Serialize)]
pub struct WitnessCheck {
    /// `max_i |σ(b_i) − x_i|₂`.
    pub max_distance: f64,
    /// `‖tr_k ∘ σ − φ‖` as a decimal.
    pub trace_error: f64,
    pub distance_ok: bool,
    pub trace_ok: bool,
}

impl WitnessCheck {
    pub fn holds(&self) -> bool {
        self.distance_ok && self.trace_ok
    }
}

/// Checks `|σ(b_i) − x_i|₂ ≤ ε` for all `i` and `‖tr_k ∘ σ − φ‖ < ε²`, with `φ`
/// the trace carried by the witness's algebra.
pub fn check_witness(
    xs: &[CMat],
    generators: &[BlockMatrix],
    witness: &Representation,
    eps: f64,
) -> Result<WitnessCheck> {
    if xs.len() != generators.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} matrices for {} generators",
            xs.len(),
            generators.len()
        )));
    }
    let k = witness.k();
    if let Some(x) = xs.iter().find(|x| x.nrows() != k || x.ncols() != k) {
        return Err(Error::ShapeMismatch(format!("matrix {:?} for k = {k}", x.shape())));
    }
    let mut max_distance: f64 = 0.0;
    for (x, b) in xs.iter().zip(generators) {
        max_distance = max_distance.max(hs_norm_full(&(witness.apply(b)? - x)));
    }
    let te = witness.trace_error();
    let trace_error = rational_to_f64(&te);
    let eps_sq = eps * eps;
    Ok(WitnessCheck {
        max_distance,
        trace_error,
        distance_ok: max_distance <= eps,
        trace_ok: !te.is_negative() && trace_error < eps_sq,
    })
}

/// Aligned pair of microstates.
#[derive(Debug, Clone)]
pub struct Alignment {
    pub u: CMat,
    /// `max_i |u x_i u* − y_i|₂`.
    pub max_distance: f64,
    /// `2ε(1 + √2 R)` with `R = max ‖b_i‖`.
    pub radius: f64,
    pub conjugacy: Conjugacy,
}

/// Given witnesses `σ` for `xs` and `π` for `ys`, returns the conjugating
/// unitary and certifies `max_i |u x_i u* − y_i|₂ ≤ 2ε(1 + √2 R)`.
pub fn align_microstates(
    xs: &[CMat],
    ys: &[CMat],
    generators: &[BlockMatrix],
    sigma: &Representation,
    pi: &Representation,
    eps: f64,
) -> Result<Alignment> {
    if !(eps > 0.0) {
        return Err(Error::InvalidInput("ε must be positive".into()));
    }
    for (name, tuple, w) in [("x", xs, sigma), ("y", ys, pi)] {
        let check = check_witness(tuple, generators, w, eps)?;
        if !check.holds() {
            return Err(Error::WitnessViolation(format!(
                "witness for {name}: distance {} (ε = {eps}), trace error {} (ε² = {})",
                check.max_distance,
                check.trace_error,
                eps * eps
            )));
        }
    }
    let conjugacy = conjugate_representations(sigma, pi)?;
    let r = generators.iter().map(op_norm).fold(0.0, f64::max);
    let radius = 2.0 * eps * (1.0 + 2f64.sqrt() * r);
    let max_distance = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| hs_norm_full(&(conjugate(&conjugacy.u, x) - y)))
        .fold(0.0, f64::max);
    if max_distance > radius + 1e-10 {
        return Err(Error::CertificateViolation(format!(
            "aligned distance {max_distance} exceeds 2ε(1+√2R) = {radius}"
        )));
    }
    Ok(Alignment {
        u: conjugacy.u.clone(),
        max_distance,
        radius,
        conjugacy,
    })
}
