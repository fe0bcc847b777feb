//! Seeded random matrices: Ginibre, GUE-style Hermitian, and Haar unitaries.

use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{c64, real, CMat};

/// Reproducible seed: identical `(seed, label, index)` always yields the same stream.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSeed {
    pub seed: u64,
    pub label: String,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325_u64, |h, b| {
        (h ^ u64::from(*b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

impl RngSeed {
    pub fn new(seed: u64, label: impl Into<String>) -> Self {
        Self {
            seed,
            label: label.into(),
        }
    }

    /// Seed for a nested stream, e.g. one experiment inside a suite.
    pub fn child(&self, label: &str) -> Self {
        Self::new(self.seed, format!("{}/{}", self.label, label))
    }

    fn derived(&self, index: u64) -> u64 {
        splitmix64(splitmix64(self.seed ^ fnv1a(self.label.as_bytes())) ^ splitmix64(index))
    }

    /// Independent generator for draw number `index`.
    pub fn rng(&self, index: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.derived(index))
    }
}

/// `k×k` matrix of i.i.d. standard complex Gaussians (`E|z|² = 1`).
pub fn ginibre<R: Rng + ?Sized>(k: usize, rng: &mut R) -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_fn(k, k, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c64(re * s, im * s)
    })
}

/// Hermitian `(g + g*)/2` of a Ginibre draw.
pub fn random_hermitian<R: Rng + ?Sized>(k: usize, rng: &mut R) -> CMat {
    let g = ginibre(k, rng);
    (&g + g.adjoint()) * real(0.5)
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of
/// `diag(R)` moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(k: usize, rng: &mut R) -> CMat {
    assert!(k >= 1, "haar_unitary needs k >= 1");
    if k == 1 {
        let theta = rng.random::<f64>() * std::f64::consts::TAU;
        return CMat::from_element(1, 1, c64(theta.cos(), theta.sin()));
    }
    let qr = ginibre(k, rng).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..k {
        let d = r[(j, j)];
        let n = d.norm();
        let phase = if n > 0.0 { d / n } else { real(1.0) };
        for i in 0..k {
            q[(i, j)] *= phase;
        }
    }
    q
}
