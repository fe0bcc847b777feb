//! Alternating centered-moment defect, a finite-degree surrogate for
//! `(m, γ)`-freeness, and the Haar-conjugation experiment built on it.

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{conjugate, haar_unitary, identity, normalized_trace, trace_of_product, CMat, RngSeed};

/// Upper bound on alternating products evaluated by one defect computation.
pub const PRODUCT_LIMIT: u128 = 200_000;

/// Centered monomials `x_w − tr_k(x_w)` of degree `1..=m`, tagged with degree.
fn centered_monomials(family: &[CMat], m: usize) -> Vec<(usize, CMat)> {
    let k = family[0].nrows();
    let mut out = Vec::new();
    let mut layer: Vec<CMat> = family.to_vec();
    for d in 1..=m {
        for w in &layer {
            out.push((d, w - identity(k) * normalized_trace(w)));
        }
        if d < m {
            layer = layer.iter().flat_map(|p| family.iter().map(move |x| p * x)).collect();
        }
    }
    out
}

fn count_products(nx: u128, ny: u128, m: usize) -> u128 {
    // f[s][d]: sequences of total degree d ending in family s
    let mut f = vec![vec![0u128; m + 1]; 2];
    let counts = [nx, ny];
    let mut total = 0u128;
    for d in 1..=m {
        for s in 0..2 {
            let mut v = counts[s].saturating_pow(d as u32);
            for e in 1..d {
                v = v.saturating_add(f[1 - s][d - e].saturating_mul(counts[s].saturating_pow(e as u32)));
            }
            f[s][d] = v;
            total = total.saturating_add(v);
        }
    }
    total
}

fn validate(x: &[CMat], y: &[CMat]) -> Result<usize> {
    let k = x.first().or(y.first()).map(|a| a.nrows()).unwrap_or(0);
    if x.is_empty() || y.is_empty() || k == 0 {
        return Err(Error::InvalidInput("both families must be non-empty".into()));
    }
    for a in x.iter().chain(y) {
        if a.nrows() != k || a.ncols() != k {
            return Err(Error::ShapeMismatch(format!("{:?} among {k}×{k} matrices", a.shape())));
        }
    }
    Ok(k)
}

/// `max |tr_k(w₁ w₂ ⋯ w_q)|` over alternating products of centered monomials
/// from `X` and `Y`, each of degree ≥ 1, total degree ≤ `m`, starting from
/// either family. Zero for freely independent families.
pub fn freeness_defect(x: &[CMat], y: &[CMat], m: usize) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidInput("m must be ≥ 1".into()));
    }
    let k = validate(x, y)?;
    let needed = count_products(x.len() as u128, y.len() as u128, m);
    if needed > PRODUCT_LIMIT {
        return Err(Error::CostGuard {
            what: "alternating centered products",
            needed,
            limit: PRODUCT_LIMIT,
        });
    }
    // a lone centered monomial has zero trace by construction, so every
    // product that matters has q ≥ 2 factors of degree ≤ m − 1
    let fams = [centered_monomials(x, m - 1), centered_monomials(y, m - 1)];
    let mut worst: f64 = 0.0;
    let kf = k as f64;
    // (next family, degree used, running product)
    let mut stack: Vec<(usize, usize, &CMat, Option<CMat>)> = Vec::new();
    for s in 0..2 {
        for (d, w) in &fams[s] {
            stack.push((1 - s, *d, w, None));
        }
    }
    while let Some((s, used, last, head)) = stack.pop() {
        // running product head · last; the trace against w needs no full product
        let prod = match head {
            Some(h) => h * last,
            None => last.clone(),
        };
        for (d, w) in &fams[s] {
            if used + d > m {
                continue;
            }
            worst = worst.max((trace_of_product(&prod, w) / kf).norm());
            if used + d < m {
                stack.push((1 - s, used + d, w, Some(prod.clone())));
            }
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FreenessTrial {
    pub trial: u64,
    pub defect: f64,
    pub member: bool,
}

/// Per-trial defects of `(X, uYu*)` for Haar `u`.
#[derive(Debug, Clone, Serialize)]
pub struct FreenessExperiment {
    pub k: usize,
    pub m: usize,
    pub gamma: f64,
    pub seed: RngSeed,
    pub trials: Vec<FreenessTrial>,
}

impl FreenessExperiment {
    /// Fraction of trials with defect `< γ`.
    pub fn frequency(&self) -> f64 {
        self.trials.iter().filter(|t| t.member).count() as f64 / self.trials.len() as f64
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for t in &self.trials {
            w.serialize(t)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string()?)?;
        Ok(())
    }
}

/// Draws `trials` Haar unitaries (trial `t` uses `seed.rng(t)`) and records
/// `freeness_defect(X, uYu*, m)` against `γ`.
pub fn asymptotic_freeness_experiment(
    x: &[CMat],
    y: &[CMat],
    trials: u64,
    m: usize,
    gamma: f64,
    seed: &RngSeed,
) -> Result<FreenessExperiment> {
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be ≥ 1".into()));
    }
    let k = validate(x, y)?;
    let results = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = seed.rng(t);
            let u = haar_unitary(k, &mut rng);
            let moved: Vec<CMat> = y.iter().map(|b| conjugate(&u, b)).collect();
            let defect = freeness_defect(x, &moved, m)?;
            Ok(FreenessTrial {
                trial: t,
                defect,
                member: defect < gamma,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FreenessExperiment {
        k,
        m,
        gamma,
        seed: seed.clone(),
        trials: results,
    })
}
