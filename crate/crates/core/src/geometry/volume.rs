//! Ball volumes in `ℝ^{d²}`.

use rand::RngExt;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{c64, op_norm_full, real, CMat, RngSeed};

/// `log` of the unit-ball volume in `ℝ^n`, by `V_n = (2π/n) V_{n−2}`.
fn log_unit_ball(n: u64) -> f64 {
    let (mut acc, start) = if n.is_multiple_of(2) { (0.0, 2) } else { (2f64.ln(), 3) };
    let mut m = start;
    while m <= n {
        acc += (2.0 * std::f64::consts::PI / m as f64).ln();
        m += 2;
    }
    acc
}

/// `log Θ_d`, where `Θ_d` is the volume of the radius-`√d` ball in `ℝ^{d²}`.
pub fn log_ball_volume_theta(d: usize) -> Result<f64> {
    if d == 0 {
        return Err(Error::InvalidInput("d must be ≥ 1".into()));
    }
    let n = (d * d) as u64;
    Ok(0.5 * n as f64 * (d as f64).ln() + log_unit_ball(n))
}

/// `Θ_d = π^{d²/2} d^{d²/2} / Γ(d²/2 + 1)`. Errors when the value would
/// overflow or underflow a double; use [`log_ball_volume_theta`] there.
pub fn ball_volume_theta(d: usize) -> Result<f64> {
    let log = log_ball_volume_theta(d)?;
    if log.abs() > 700.0 {
        return Err(Error::InvalidInput(format!(
            "Θ_{d} = exp({log}) is out of double range; use the log form"
        )));
    }
    // direct product keeps small cases exact (Θ_1 = 2)
    let n = (d * d) as u64;
    let (mut v, start) = if n.is_multiple_of(2) { (1.0, 2) } else { (2.0, 3) };
    let mut m = start;
    while m <= n {
        v *= 2.0 * std::f64::consts::PI / m as f64;
        m += 2;
    }
    Ok(v * (d as f64).powf(0.5 * n as f64))
}

/// Monte Carlo estimate of `Λ_d`, the volume of the operator-norm unit ball
/// of `d × d` anti-Hermitian matrices.
#[derive(Debug, Clone, Serialize)]
pub struct VolumeEstimate {
    pub d: usize,
    pub samples: usize,
    pub estimate: f64,
    pub stderr: f64,
    pub fraction: f64,
    /// `Θ_d`, the volume of the sampling ball.
    pub reference: f64,
}

const CHUNK: usize = 4096;

/// Samples uniformly from the radius-`√d` Euclidean ball of `ℝ^{d²}`, which
/// contains the operator-norm ball, and scales the hit fraction by `Θ_d`.
pub fn estimate_opnorm_ball_volume(d: usize, samples: usize, seed: &RngSeed) -> Result<VolumeEstimate> {
    if d == 0 || d > 3 {
        return Err(Error::CostGuard {
            what: "operator-norm ball volume (d ≤ 3)",
            needed: d as u128,
            limit: 3,
        });
    }
    if samples == 0 {
        return Err(Error::InvalidInput("samples must be ≥ 1".into()));
    }
    let n = d * d;
    let radius = (d as f64).sqrt();
    let chunks = samples.div_ceil(CHUNK);
    let hits: usize = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = seed.rng(c as u64);
            let count = CHUNK.min(samples - c * CHUNK);
            let mut hits = 0;
            let mut coords = vec![0.0; n];
            for _ in 0..count {
                for x in coords.iter_mut() {
                    *x = rng.sample(StandardNormal);
                }
                let norm = coords.iter().map(|x| x * x).sum::<f64>().sqrt();
                let r = radius * rng.random::<f64>().powf(1.0 / n as f64) / norm;
                let mut h = CMat::zeros(d, d);
                let mut it = coords.iter().map(|x| x * r);
                for j in 0..d {
                    h[(j, j)] = real(it.next().expect("d² coords"));
                }
                let s = std::f64::consts::FRAC_1_SQRT_2;
                for j in 0..d {
                    for l in j + 1..d {
                        let a = it.next().expect("d² coords");
                        let b = it.next().expect("d² coords");
                        h[(j, l)] = c64(a * s, b * s);
                        h[(l, j)] = c64(a * s, -b * s);
                    }
                }
                if op_norm_full(&h) <= 1.0 {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    let reference = ball_volume_theta(d)?;
    let f = hits as f64 / samples as f64;
    Ok(VolumeEstimate {
        d,
        samples,
        estimate: f * reference,
        stderr: reference * (f * (1.0 - f) / samples as f64).sqrt(),
        fraction: f,
        reference,
    })
}
