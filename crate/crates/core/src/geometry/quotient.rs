//! Quotient metrics on `U_k / H`.

use crate::error::{Error, Result};
use crate::linalg::{
    c64, hs_norm_full, identity, op_norm_full, polar_unitary, random_hermitian, real, unitarity_residual, CMat,
    RngSeed, METRIC_TOL,
};

use super::TractableSubgroup;

/// Exact `d₂` value together with an optimal `h ∈ H`.
#[derive(Debug, Clone)]
pub struct QuotientDistance {
    pub distance: f64,
    pub witness: CMat,
}

fn check_unitary(name: &str, u: &CMat, k: usize) -> Result<()> {
    if u.nrows() != k || u.ncols() != k {
        return Err(Error::ShapeMismatch(format!(
            "{name} has shape {:?}, expected {k}x{k}",
            u.shape()
        )));
    }
    let residual = unitarity_residual(u);
    if residual > METRIC_TOL {
        return Err(Error::NotUnitary { residual });
    }
    Ok(())
}

/// `inf_{h∈H} |u − v h|₂ = |w − E_H-polar(w)|₂` with `w = v*u`.
///
/// The infimum splits as `|w − E(w)|₂² + |E(w) − h|₂²`, and the second term is
/// minimized blockwise by the polar part of `E(w)`.
pub fn quotient_distance_d2(u: &CMat, v: &CMat, h: &TractableSubgroup) -> Result<QuotientDistance> {
    check_unitary("u", u, h.k())?;
    check_unitary("v", v, h.k())?;
    Ok(d2_unchecked(u, v, h))
}

/// [`quotient_distance_d2`] without the unitarity checks.
pub fn d2_unchecked(u: &CMat, v: &CMat, h: &TractableSubgroup) -> QuotientDistance {
    let w = v.adjoint() * u;
    let witness = h.nearest_element(&w).expect("shape checked by caller");
    QuotientDistance {
        distance: hs_norm_full(&(&w - &witness)),
        witness,
    }
}

/// `d₂` to the scalar subgroup in closed form: `√(2 − 2|tr(v*u)|)`.
pub fn scalar_quotient_distance(u: &CMat, v: &CMat) -> f64 {
    let mut ip = c64(0.0, 0.0);
    for (a, b) in u.iter().zip(v.iter()) {
        ip += b.conj() * a;
    }
    (2.0 - 2.0 * ip.norm() / u.nrows() as f64).max(0.0).sqrt()
}

/// Two-sided estimate of `d_∞(u̇, v̇) = inf_{h∈H} ‖u − v h‖`.
#[derive(Debug, Clone)]
pub struct DinfBracket {
    pub lower: f64,
    pub upper: f64,
    /// Element of `H` attaining `upper`.
    pub witness: CMat,
}

impl DinfBracket {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Lower bound from coordinate probes: for `e_j` in a copy subspace `S`, any
/// `h ∈ H` maps `e_j` to a unit vector of `S`, so
/// `‖w − h‖ ≥ min_{s∈S,|s|=1} |w e_j − s|`.
fn probe_lower_bound(w: &CMat, h: &TractableSubgroup) -> f64 {
    let mut best: f64 = 0.0;
    for (start, size) in h.copy_ranges() {
        for j in start..start + size {
            let col = w.column(j);
            let total: f64 = col.iter().map(|z| z.norm_sqr()).sum();
            let inside: f64 = col.rows(start, size).iter().map(|z| z.norm_sqr()).sum();
            let outside = (total - inside).max(0.0);
            let bound = (outside + (inside.sqrt() - 1.0).powi(2)).sqrt();
            best = best.max(bound);
        }
    }
    best
}

/// Bracket for `d_∞`. The upper end starts at the `d₂`-optimal `h` and is
/// refined by `budget` deterministic local moves inside `H`; the lower end is
/// the larger of `d₂` and the probe bound.
pub fn quotient_distance_dinf(u: &CMat, v: &CMat, h: &TractableSubgroup, budget: usize) -> Result<DinfBracket> {
    let d2 = quotient_distance_d2(u, v, h)?;
    let w = v.adjoint() * u;
    let mut witness = d2.witness;
    let mut upper = op_norm_full(&(&w - &witness));
    let seed = RngSeed::new(0x00d1_57a7, "dinf-refine");
    for t in 0..budget {
        if upper == 0.0 {
            break;
        }
        let mut rng = seed.rng(t as u64);
        let step = upper * 0.5f64.powi((t % 12) as i32);
        let parts: Vec<CMat> = h
            .factors()
            .iter()
            .map(|f| {
                let g = random_hermitian(f.size, &mut rng);
                let g = &g * real(1.0 / op_norm_full(&g).max(f64::MIN_POSITIVE));
                polar_unitary(&(identity(f.size) + g * c64(0.0, step)))
            })
            .collect();
        let candidate = &witness * h.embed(&parts)?;
        let value = op_norm_full(&(&w - &candidate));
        if value < upper {
            upper = value;
            witness = candidate;
        }
    }
    let lower = d2.distance.max(probe_lower_bound(&w, h)).min(upper);
    Ok(DinfBracket { lower, upper, witness })
}

#[cfg(test)]
mod tests {
    use super::super::SubgroupFactor;
    use super::*;
    use crate::linalg::{diag_real, haar_unitary, C64};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn phase_diag(phases: &[f64]) -> CMat {
        let d: Vec<C64> = phases.iter().map(|&t| C64::from_polar(1.0, t)).collect();
        CMat::from_diagonal(&nalgebra::DVector::from_vec(d))
    }

    // Brute-force oracle for the scalar subgroup on a phase grid.
    fn scalar_grid_min(u: &CMat, v: &CMat, points: usize, opnorm: bool) -> f64 {
        let w = v.adjoint() * u;
        let k = w.nrows();
        (0..points)
            .map(|i| {
                let h = identity(k) * C64::from_polar(1.0, 2.0 * PI * i as f64 / points as f64);
                let d = &w - h;
                if opnorm {
                    op_norm_full(&d)
                } else {
                    hs_norm_full(&d)
                }
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn d2_examples() {
        let h = TractableSubgroup::scalars(2).unwrap();
        let u = phase_diag(&[0.0, PI / 2.0]);
        let i2 = identity(2);
        assert!(quotient_distance_d2(&u, &u, &h).unwrap().distance < 1e-12);

        let d = quotient_distance_d2(&u, &i2, &h).unwrap().distance;
        let expected = 2.0 * (PI / 8.0).sin();
        assert!((d - expected).abs() < 1e-12);
        let grid = scalar_grid_min(&u, &i2, 1_000_000, false);
        assert!((d - grid).abs() < 1e-6);

        let flip = diag_real(&[1.0, -1.0]);
        let d = quotient_distance_d2(&flip, &i2, &h).unwrap().distance;
        assert!((d - 2f64.sqrt()).abs() < 1e-12);
        // every h attains it
        for t in [0.0, 0.3, 1.7] {
            let hh = identity(2) * C64::from_polar(1.0, t);
            assert!((hs_norm_full(&(&flip - hh)) - 2f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_unitary() {
        let h = TractableSubgroup::scalars(2).unwrap();
        assert!(matches!(
            quotient_distance_d2(&diag_real(&[2.0, 1.0]), &identity(2), &h),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn dinf_examples() {
        let mut rng = RngSeed::new(3, "dinf").rng(0);
        let u = haar_unitary(3, &mut rng);
        let v = haar_unitary(3, &mut rng);
        let scal = TractableSubgroup::scalars(3).unwrap();
        let b = quotient_distance_dinf(&u, &u, &scal, 10).unwrap();
        assert!(b.upper < 1e-12 && b.lower < 1e-12);

        let full = TractableSubgroup::full(3).unwrap();
        let b = quotient_distance_dinf(&u, &v, &full, 10).unwrap();
        assert!(b.upper < 1e-10 && b.lower < 1e-10);

        let b = quotient_distance_dinf(&u, &v, &scal, 200).unwrap();
        let grid = scalar_grid_min(&u, &v, 20_000, true);
        let resolution = 2.0 * PI / 20_000.0;
        assert!(b.lower <= grid + 1e-12, "{} > {grid}", b.lower);
        assert!(b.upper >= grid - resolution, "{} < {grid}", b.upper);
        assert!(b.width() >= 0.0);
    }

    fn torus_grid_min(u: &CMat, v: &CMat, steps: usize) -> f64 {
        // U(1) × U(1) on C^2 (torus of U_2), brute force on a product grid
        let w = v.adjoint() * u;
        let mut best = f64::INFINITY;
        for a in 0..steps {
            for b in 0..steps {
                let h = phase_diag(&[2.0 * PI * a as f64 / steps as f64, 2.0 * PI * b as f64 / steps as f64]);
                best = best.min(hs_norm_full(&(&w - h)));
            }
        }
        best
    }

    #[test]
    fn torus_matches_grid() {
        let h = TractableSubgroup::torus(2).unwrap();
        for s in 0..5 {
            let mut rng = RngSeed::new(s, "torus-grid").rng(0);
            let u = haar_unitary(2, &mut rng);
            let v = haar_unitary(2, &mut rng);
            let d = quotient_distance_d2(&u, &v, &h).unwrap().distance;
            let g = torus_grid_min(&u, &v, 2000);
            assert!(d <= g + 1e-12 && g - d < 1e-3, "exact {d} grid {g}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn pseudometric_properties(seed in any::<u64>(), layout in 0usize..3) {
            let h = match layout {
                0 => TractableSubgroup::scalars(3).unwrap(),
                1 => TractableSubgroup::torus(3).unwrap(),
                _ => TractableSubgroup::new(vec![
                    SubgroupFactor { mult: 1, size: 2 },
                    SubgroupFactor { mult: 1, size: 1 },
                ]).unwrap(),
            };
            let mut rng = RngSeed::new(seed, "pm").rng(0);
            let a = haar_unitary(3, &mut rng);
            let b = haar_unitary(3, &mut rng);
            let c = haar_unitary(3, &mut rng);
            let d = |x: &CMat, y: &CMat| quotient_distance_d2(x, y, &h).unwrap().distance;
            prop_assert!((d(&a, &b) - d(&b, &a)).abs() < 1e-8);
            prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-8);
            prop_assert!(d(&a, &b) <= hs_norm_full(&(&a - &b)) + 1e-12);
            let g = h.random_element(&mut rng);
            prop_assert!((d(&a, &(&b * &g)) - d(&a, &b)).abs() < 1e-8);
        }
    }
}
