//! Small 2x2 helpers shared by the filter, predicates and samplers.

use nalgebra::{Matrix2, SymmetricEigen, Vector2};
use rand::Rng;
use rand_distr::StandardNormal;

pub type Vec2 = Vector2<f64>;
pub type Mat2 = Matrix2<f64>;

pub fn symmetrize(m: &Mat2) -> Mat2 {
    (m + m.transpose()) * 0.5
}

/// Symmetrizes and, only if an eigenvalue went negative, rebuilds the
/// matrix with negative eigenvalues raised to zero.
pub fn condition_cov(m: &Mat2) -> Mat2 {
    let s = symmetrize(m);
    let eig = SymmetricEigen::new(s);
    if eig.eigenvalues.iter().all(|&l| l >= 0.0) {
        return s;
    }
    let d = Mat2::from_diagonal(&eig.eigenvalues.map(|l| l.max(0.0)));
    symmetrize(&(eig.eigenvectors * d * eig.eigenvectors.transpose()))
}

/// `V sqrt(max(Λ, floor))`, so that `L Lᵀ ≈ m`.
pub fn psd_factor(m: &Mat2, floor: f64) -> Mat2 {
    let eig = SymmetricEigen::new(symmetrize(m));
    let d = Mat2::from_diagonal(&eig.eigenvalues.map(|l| l.max(floor).sqrt()));
    eig.eigenvectors * d
}

pub fn sample_gaussian<R: Rng + ?Sized>(mean: &Vec2, cov: &Mat2, rng: &mut R) -> Vec2 {
    let l = psd_factor(cov, 0.0);
    let z = Vec2::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
    mean + l * z
}

pub fn min_eigenvalue(m: &Mat2) -> f64 {
    let e = SymmetricEigen::new(symmetrize(m)).eigenvalues;
    e[0].min(e[1])
}

pub fn max_eigenvalue(m: &Mat2) -> f64 {
    let e = SymmetricEigen::new(symmetrize(m)).eigenvalues;
    e[0].max(e[1])
}

pub fn is_psd(m: &Mat2, tol: f64) -> bool {
    (m - m.transpose()).abs().max() <= tol.max(1e-12) && min_eigenvalue(m) >= -tol
}
