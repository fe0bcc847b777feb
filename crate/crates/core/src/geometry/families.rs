//! Product construction of separated families of orbit points.

use crate::error::{Error, Result};
use crate::linalg::{conjugate, identity, CMat};

use super::rho;

/// Tuples `w_{s,g} h w_{s,g}*` with `w_{s,g} = (u_s (I_{n₀} ⊕ v_g)) ⊕ I_{n₂}`,
/// certified pairwise `ρ`-separated.
#[derive(Debug, Clone)]
pub struct SeparatedFamily {
    /// `(s, g)` index of every tuple.
    pub labels: Vec<(usize, usize)>,
    pub tuples: Vec<Vec<CMat>>,
    pub min_separation: f64,
    pub threshold: f64,
}

impl SeparatedFamily {
    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }
}

fn direct_sum(a: &CMat, b: &CMat) -> CMat {
    crate::linalg::block_diag(&[a.clone(), b.clone()])
}

pub fn combine_separated_families(
    s_unitaries: &[CMat],
    g_unitaries: &[CMat],
    dims: (usize, usize, usize),
    base: &[CMat],
    threshold: f64,
) -> Result<SeparatedFamily> {
    let (n0, n1, n2) = dims;
    let k = n0 + n1 + n2;
    if n0 + n1 == 0 {
        return Err(Error::InvalidInput("n₀ + n₁ must be positive".into()));
    }
    if s_unitaries.is_empty() || g_unitaries.is_empty() {
        return Err(Error::InvalidInput("S and G must be non-empty".into()));
    }
    if let Some(u) = s_unitaries
        .iter()
        .find(|u| u.nrows() != n0 + n1 || u.ncols() != n0 + n1)
    {
        return Err(Error::ShapeMismatch(format!("u_s has shape {:?}", u.shape())));
    }
    if let Some(v) = g_unitaries.iter().find(|v| v.nrows() != n1 || v.ncols() != n1) {
        return Err(Error::ShapeMismatch(format!("v_g has shape {:?}", v.shape())));
    }
    if let Some(h) = base.iter().find(|h| h.nrows() != k || h.ncols() != k) {
        return Err(Error::ShapeMismatch(format!("base element has shape {:?}", h.shape())));
    }
    let mut labels = Vec::new();
    let mut tuples = Vec::new();
    for (si, u) in s_unitaries.iter().enumerate() {
        for (gi, v) in g_unitaries.iter().enumerate() {
            let inner = if n1 == 0 {
                identity(n0)
            } else if n0 == 0 {
                v.clone()
            } else {
                direct_sum(&identity(n0), v)
            };
            let top = u * inner;
            let w = if n2 == 0 { top } else { direct_sum(&top, &identity(n2)) };
            labels.push((si, gi));
            tuples.push(base.iter().map(|h| conjugate(&w, h)).collect::<Vec<_>>());
        }
    }
    let mut min_separation = f64::INFINITY;
    for a in 0..tuples.len() {
        for b in a + 1..tuples.len() {
            let d = rho(&tuples[a], &tuples[b]);
            if d < threshold {
                return Err(Error::SeparationViolation {
                    first: a,
                    second: b,
                    distance: d,
                    threshold,
                });
            }
            min_separation = min_separation.min(d);
        }
    }
    Ok(SeparatedFamily {
        labels,
        tuples,
        min_separation,
        threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{OrbitSampler, PointCloud};
    use super::*;
    use crate::linalg::{block_diag, diag_real, hs_norm_full, RngSeed};

    #[test]
    fn singleton_family() {
        let base = vec![diag_real(&[1.0, 2.0, 3.0])];
        let f = combine_separated_families(&[identity(2)], &[identity(1)], (1, 1, 1), &base, 5.0).unwrap();
        assert_eq!(f.len(), 1);
        assert!(f.min_separation.is_infinite());
    }

    #[test]
    fn trivial_g_inherits_s_separation() {
        // n₂ = 0, G = {I}: ρ between family members equals the S-orbit distances
        let x = diag_real(&[1.0, 0.0, -1.0]);
        let sampler = OrbitSampler {
            base: vec![x.clone()],
            seed: RngSeed::new(4, "fam"),
        };
        let mut rng = sampler.seed.rng(0);
        let us: Vec<CMat> = (0..4).map(|_| crate::linalg::haar_unitary(3, &mut rng)).collect();
        let f = combine_separated_families(&us, &[identity(1)], (2, 1, 0), std::slice::from_ref(&x), 0.0).unwrap();
        for (a, &(sa, _)) in f.labels.iter().enumerate() {
            for (b, &(sb, _)) in f.labels.iter().enumerate() {
                let direct = hs_norm_full(&(conjugate(&us[sa], &x) - conjugate(&us[sb], &x)));
                assert!((rho(&f.tuples[a], &f.tuples[b]) - direct).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn small_instance_is_separated() {
        // n₀ = n₁ = 2, n₂ = 1; h_1 = x ⊕ y ⊕ η with S separated on U(x ⊕ 0)
        // and G separated on U(y) (the y-block carries the g-dependence).
        let (n0, n1, n2) = (2, 2, 1);
        let x3 = diag_real(&[3.0, -1.0]);
        let y = diag_real(&[1.0, -1.0]);
        let eta = diag_real(&[0.5]);
        let top = block_diag(&[x3.clone(), CMat::zeros(n1, n1)]);
        let d_eps = 0.05;
        let sep = 9.0 * d_eps;

        let s_cloud = PointCloud::sample(
            &OrbitSampler {
                base: vec![top.clone()],
                seed: RngSeed::new(21, "S"),
            },
            300,
        );
        let s_seed = RngSeed::new(21, "S");
        let s_idx = s_cloud.pack(&|a: &Vec<CMat>, b: &Vec<CMat>| rho(a, b), sep);
        let us: Vec<CMat> = s_idx
            .iter()
            .take(3)
            .map(|&i| crate::linalg::haar_unitary(4, &mut s_seed.rng(i as u64)))
            .collect();

        let g_seed = RngSeed::new(22, "G");
        let g_cloud = PointCloud::sample(
            &OrbitSampler {
                base: vec![y.clone()],
                seed: g_seed.clone(),
            },
            300,
        );
        let g_idx = g_cloud.pack(&|a: &Vec<CMat>, b: &Vec<CMat>| rho(a, b), sep);
        let vs: Vec<CMat> = g_idx
            .iter()
            .take(3)
            .map(|&i| crate::linalg::haar_unitary(2, &mut g_seed.rng(i as u64)))
            .collect();
        assert_eq!((us.len(), vs.len()), (3, 3));

        let h3 = block_diag(&[x3, CMat::zeros(n1, n1), CMat::zeros(n2, n2)]);
        let h1 = block_diag(&[CMat::zeros(n0, n0), y, eta.clone()]);
        let f = combine_separated_families(&us, &vs, (n0, n1, n2), &[h1, h3], 3.0 * d_eps).unwrap();
        assert_eq!(f.len(), 9);
        // exhaustive pair check against 3Dε
        assert!(f.min_separation >= 3.0 * d_eps, "min {}", f.min_separation);
        assert!(matches!(
            combine_separated_families(&us, &vs, (n0, n1, n2), &[block_diag(&[top, eta.clone()])], 100.0),
            Err(Error::SeparationViolation { .. })
        ));
    }
}
