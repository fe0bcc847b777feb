//! Polar decompositions and nearest-unitary completions.

use nalgebra::SymmetricEigen;

use super::{hs_norm_full, identity, CMat};
use crate::error::{Error, Result};

/// Pieces of `z = u|z|` computed from one SVD.
#[derive(Debug, Clone)]
pub struct PolarParts {
    /// Partial isometry with initial space `range(z*)` and final space `range(z)`.
    pub isometry: CMat,
    /// `|z| = (z*z)^{1/2}`.
    pub modulus: CMat,
    /// Numerical rank of `z`.
    pub rank: usize,
    /// Orthonormal basis (columns) of `ker(z*)`.
    pub left_kernel: CMat,
    /// Orthonormal basis (columns) of `ker(z)`.
    pub right_kernel: CMat,
}

/// Full SVD of a square matrix with singular values sorted descending.
///
/// nalgebra's complex SVD occasionally returns factors that do not reproduce
/// a rank-deficient input, so every result is validated and, when it fails,
/// replaced by one read off the Hermitian dilation `[[0, z], [z*, 0]]`.
fn sorted_svd(z: &CMat) -> (CMat, Vec<f64>, CMat) {
    let k = z.nrows();
    let svd = z.clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let v = svd.v_t.expect("v_t requested").adjoint();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut us = CMat::zeros(k, k);
    let mut vs = CMat::zeros(k, k);
    let mut sigma = Vec::with_capacity(k);
    for (dst, &src) in order.iter().enumerate() {
        us.set_column(dst, &u.column(src));
        vs.set_column(dst, &v.column(src));
        sigma.push(svd.singular_values[src]);
    }
    if svd_is_valid(z, &us, &sigma, &vs) {
        (us, sigma, vs)
    } else {
        dilation_svd(z)
    }
}

fn svd_is_valid(z: &CMat, u: &CMat, sigma: &[f64], v: &CMat) -> bool {
    let k = z.nrows();
    let tol = 64.0 * f64::EPSILON * k.max(1) as f64;
    let mut rec = u.clone();
    for (j, s) in sigma.iter().enumerate() {
        rec.column_mut(j).scale_mut(*s);
    }
    let rec = rec * v.adjoint();
    let id = identity(k);
    (rec - z).norm() <= tol * z.norm().max(1.0)
        && (u.adjoint() * u - &id).norm() <= tol
        && (v.adjoint() * v - &id).norm() <= tol
}

/// SVD from the eigenpairs `(σ, (u, v)/√2)` of `[[0, z], [z*, 0]]`.
/// Singular values below `10⁻⁹ σ_max` are treated as zero, and the kernels
/// are completed as orthogonal complements.
fn dilation_svd(z: &CMat) -> (CMat, Vec<f64>, CMat) {
    let k = z.nrows();
    let mut h = CMat::zeros(2 * k, 2 * k);
    h.view_mut((0, k), (k, k)).copy_from(z);
    h.view_mut((k, 0), (k, k)).copy_from(&z.adjoint());
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..2 * k).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let smax = eig.eigenvalues[order[0]].max(0.0);
    let thr = (1e-9 * smax).max(f64::MIN_POSITIVE);
    let rank = order.iter().take(k).filter(|&&i| eig.eigenvalues[i] > thr).count();
    let mut u = CMat::zeros(k, k);
    let mut v = CMat::zeros(k, k);
    let mut sigma = vec![0.0; k];
    for (dst, &src) in order.iter().take(rank).enumerate() {
        let col = eig.eigenvectors.column(src);
        let x = col.rows(0, k).into_owned();
        let y = col.rows(k, k).into_owned();
        u.set_column(dst, &(&x / super::real(x.norm())));
        v.set_column(dst, &(&y / super::real(y.norm())));
        sigma[dst] = eig.eigenvalues[src];
    }
    // halves of eigenvectors with small σ lose orthogonality (the ±σ pairs
    // mix); re-orthonormalising costs only O(eps·σ_max) in the reconstruction
    orthonormalize_columns(&mut u, rank);
    orthonormalize_columns(&mut v, rank);
    let id = identity(k);
    let u_r = u.columns(0, rank).into_owned();
    let v_r = v.columns(0, rank).into_owned();
    let u_rest = range_basis(&(&id - &u_r * u_r.adjoint()));
    let v_rest = range_basis(&(&id - &v_r * v_r.adjoint()));
    for j in 0..k - rank {
        u.set_column(rank + j, &u_rest.column(j));
        v.set_column(rank + j, &v_rest.column(j));
    }
    (u, sigma, v)
}

/// Modified Gram-Schmidt with one reorthogonalisation pass on the first `n`
/// columns, in order, keeping each column's phase.
fn orthonormalize_columns(m: &mut CMat, n: usize) {
    for j in 0..n {
        for _ in 0..2 {
            for i in 0..j {
                let proj = m.column(i).dotc(&m.column(j));
                let qi = m.column(i).into_owned();
                m.column_mut(j).axpy(-proj, &qi, super::real(1.0));
            }
        }
        let norm = m.column(j).norm();
        m.column_mut(j).unscale_mut(norm);
    }
}

fn rank_threshold(sigma: &[f64], k: usize) -> f64 {
    let smax = sigma.first().copied().unwrap_or(0.0);
    (smax * k.max(1) as f64 * f64::EPSILON * 16.0).max(f64::MIN_POSITIVE)
}

pub fn polar_parts(z: &CMat) -> PolarParts {
    assert!(z.is_square(), "polar decomposition needs a square matrix");
    let k = z.nrows();
    let (u, sigma, v) = sorted_svd(z);
    let thr = rank_threshold(&sigma, k);
    let rank = sigma.iter().filter(|&&s| s > thr).count();
    let u_r = u.columns(0, rank).into_owned();
    let v_r = v.columns(0, rank).into_owned();
    let isometry = &u_r * v_r.adjoint();
    let mut modulus = CMat::zeros(k, k);
    for (j, s) in sigma.iter().enumerate().take(rank) {
        let col = v.column(j);
        modulus += col * col.adjoint() * super::real(*s);
    }
    PolarParts {
        isometry,
        modulus,
        rank,
        left_kernel: u.columns(rank, k - rank).into_owned(),
        right_kernel: v.columns(rank, k - rank).into_owned(),
    }
}

/// Unitary factor `U V*` of a full SVD; kernel directions are paired by index.
fn svd_unitary_factor(a: &CMat) -> CMat {
    let (u, _, v) = sorted_svd(a);
    u * v.adjoint()
}

/// Partial isometry from `span(right)` onto `span(left)`, both given by
/// orthonormal columns of equal count. Among all such isometries it is the one
/// closest to the identity: `L X R*` with `X` the unitary factor of `(R*L)*`.
pub fn isometry_between(left: &CMat, right: &CMat) -> CMat {
    let k = left.nrows();
    let r = left.ncols();
    assert_eq!(r, right.ncols(), "defect spaces must have equal dimension");
    if r == 0 {
        return CMat::zeros(k, k);
    }
    let overlap = right.adjoint() * left;
    let x = svd_unitary_factor(&overlap).adjoint();
    left * x * right.adjoint()
}

/// The `|·|₂`-nearest unitary to `z`: singular values replaced by one, with the
/// kernel of `z` mapped onto the kernel of `z*` by [`isometry_between`].
pub fn polar_unitary(z: &CMat) -> CMat {
    let parts = polar_parts(z);
    parts.isometry + isometry_between(&parts.left_kernel, &parts.right_kernel)
}

/// Orthonormal basis of the range of a Hermitian projection.
pub fn range_basis(q: &CMat) -> CMat {
    let k = q.nrows();
    let herm = (q + q.adjoint()) * super::real(0.5);
    let eig = SymmetricEigen::new(herm);
    let cols: Vec<usize> = (0..k).filter(|&i| eig.eigenvalues[i] > 0.5).collect();
    let mut out = CMat::zeros(k, cols.len());
    for (dst, &src) in cols.iter().enumerate() {
        out.set_column(dst, &eig.eigenvectors.column(src));
    }
    out
}

/// Result of completing `z` to a unitary on the range of `p`.
#[derive(Debug, Clone)]
pub struct ProjectionCompletion {
    /// `y` with `yy* = y*y = p`.
    pub y: CMat,
    /// `|y − z|₂`.
    pub distance: f64,
    /// `|p − z*z|₂`.
    pub defect: f64,
    /// `|p − e|₂` with `e` the range projection of `z*z`.
    pub support_term: f64,
}

impl ProjectionCompletion {
    pub fn bound(&self) -> f64 {
        2.0 * self.defect
    }
}

/// Builds `y = u + v` where `u` is the polar part of `z` and `v` a partial
/// isometry with `vv* = p − uu*`, `v*v = p − u*u`; then checks
/// `|y − z|₂ ≤ |p − z*z|₂ + |p − e|₂ ≤ 2|p − z*z|₂`.
pub fn nearest_unitary_on_projection(z: &CMat, p: &CMat, tol: f64) -> Result<ProjectionCompletion> {
    if !z.is_square() || z.shape() != p.shape() {
        return Err(Error::ShapeMismatch(format!(
            "z is {:?}, p is {:?}",
            z.shape(),
            p.shape()
        )));
    }
    let k = z.nrows();
    let scale = 1.0 + p.norm();
    if (p * p - p).norm() > tol * scale || (p - p.adjoint()).norm() > tol * scale {
        return Err(Error::InvalidInput("p is not an orthogonal projection".into()));
    }
    let off = identity(k) - p;
    let zscale = 1.0 + z.norm();
    let leak = (&off * z).norm().max((z * &off).norm());
    if leak > tol * zscale {
        return Err(Error::SupportViolation(format!(
            "z leaves the range of p (leak {leak:e})"
        )));
    }

    let parts = polar_parts(z);
    let u = parts.isometry;
    let left = range_basis(&(p - &u * u.adjoint()));
    let right = range_basis(&(p - u.adjoint() * &u));
    if left.ncols() != right.ncols() {
        return Err(Error::SupportViolation(format!(
            "defect ranks differ ({} vs {})",
            left.ncols(),
            right.ncols()
        )));
    }
    let v = isometry_between(&left, &right);
    let e = u.adjoint() * &u;
    let y = &u + v;

    let defect = hs_norm_full(&(p - z.adjoint() * z));
    let support_term = hs_norm_full(&(p - e));
    let distance = hs_norm_full(&(&y - z));
    let out = ProjectionCompletion {
        y,
        distance,
        defect,
        support_term,
    };
    if out.distance > out.defect + out.support_term + tol || out.distance > out.bound() + tol {
        return Err(Error::CertificateViolation(format!(
            "|y − z|₂ = {} exceeds 2|p − z*z|₂ = {}",
            out.distance,
            out.bound()
        )));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag_real, haar_unitary, real, unitarity_residual, RngSeed};

    #[test]
    fn polar_of_unitary_is_itself() {
        let u = haar_unitary(4, &mut RngSeed::new(3, "polar").rng(0));
        assert!((polar_unitary(&u) - &u).norm() < 1e-12);
    }

    #[test]
    fn polar_of_positive_scalar_is_identity() {
        let z = identity(3) * real(0.5);
        assert!((polar_unitary(&z) - identity(3)).norm() < 1e-12);
    }

    #[test]
    fn kernel_completion_is_identity_on_shared_kernel() {
        let z = diag_real(&[2.0, 0.0]);
        assert!((polar_unitary(&z) - identity(2)).norm() < 1e-12);
    }

    #[test]
    fn polar_of_singular_matrix_is_unitary() {
        let mut z = CMat::zeros(3, 3);
        z[(0, 1)] = real(2.0);
        let u = polar_unitary(&z);
        assert!(unitarity_residual(&u) < 1e-12);
        assert!((u[(0, 1)] - real(1.0)).norm() < 1e-12);
    }

    #[test]
    fn completion_of_projection_is_exact() {
        let p = diag_real(&[1.0, 1.0, 0.0, 0.0]);
        let c = nearest_unitary_on_projection(&p, &p, 1e-10).unwrap();
        assert!(c.distance < 1e-12);
        assert!((c.y - p).norm() < 1e-12);
    }

    #[test]
    fn completion_of_zero_has_forced_norm() {
        let p = diag_real(&[1.0, 1.0, 1.0, 0.0, 0.0]);
        let z = CMat::zeros(5, 5);
        let c = nearest_unitary_on_projection(&z, &p, 1e-10).unwrap();
        let expected = (3.0_f64 / 5.0).sqrt();
        assert!((c.distance - expected).abs() < 1e-12);
        assert!(c.distance <= 2.0 * expected);
        assert!((&c.y * c.y.adjoint() - &p).norm() < 1e-10);
        assert!((c.y.adjoint() * &c.y - &p).norm() < 1e-10);
    }

    #[test]
    fn completion_of_half_projection() {
        let p = diag_real(&[1.0, 1.0, 0.0, 0.0]);
        let z = &p * real(0.5);
        let c = nearest_unitary_on_projection(&z, &p, 1e-10).unwrap();
        let unit = (2.0_f64 / 4.0).sqrt();
        assert!((c.distance - 0.5 * unit).abs() < 1e-12);
        assert!((c.defect - 0.75 * unit).abs() < 1e-12);
        assert!((c.y - p).norm() < 1e-12);
    }

    #[test]
    fn svd_survives_rank_deficient_inputs() {
        // inputs of this shape made the library SVD return wrong factors
        let seed = RngSeed::new(5, "svd");
        for t in 0..2000u64 {
            let mut rng = seed.rng(t);
            use rand::RngExt;
            let k = rng.random_range(1..=20usize);
            let r = rng.random_range(1..=k);
            let f = haar_unitary(k, &mut rng);
            let b = f.columns(0, r).into_owned();
            let z = &b * crate::linalg::ginibre(r, &mut rng) * b.adjoint();
            let (u, sigma, v) = sorted_svd(&z);
            let mut rec = u.clone();
            for (j, s) in sigma.iter().enumerate() {
                rec.column_mut(j).scale_mut(*s);
            }
            assert!((rec * v.adjoint() - &z).norm() < 1e-8 * (1.0 + z.norm()), "t = {t}");
            assert!(unitarity_residual(&u) < 1e-8 && unitarity_residual(&v) < 1e-8);
            assert!(sigma.windows(2).all(|w| w[0] >= w[1]));
            let parts = polar_parts(&z);
            assert!((&parts.isometry * &parts.modulus - &z).norm() < 1e-8 * (1.0 + z.norm()));
        }
    }

    #[test]
    fn dilation_matches_library_on_full_rank() {
        let mut rng = RngSeed::new(6, "dil").rng(0);
        let z = crate::linalg::ginibre(6, &mut rng);
        let (_, s1, _) = sorted_svd(&z);
        let (u, s2, v) = dilation_svd(&z);
        for (a, b) in s1.iter().zip(&s2) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!(svd_is_valid(&z, &u, &s2, &v));
    }

    #[test]
    fn support_violation_is_rejected() {
        let p = diag_real(&[1.0, 0.0]);
        let z = diag_real(&[0.0, 1.0]);
        assert!(matches!(
            nearest_unitary_on_projection(&z, &p, 1e-10),
            Err(Error::SupportViolation(_))
        ));
    }
}
