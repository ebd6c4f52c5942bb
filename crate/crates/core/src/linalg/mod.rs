//! Dense complex linear algebra: the substrate for every other module.
//!
//! All routines are deterministic, allocation-light O(n³) kernels intended for
//! dimensions up to [`MAX_DIM`].

mod eigen;
mod lu;
mod matrix;

pub use eigen::{
    eigenvalues, hermitian_eigen, HermitianEigen, HERMITIAN_TOL, JACOBI_MAX_SWEEPS,
    JACOBI_OFF_TOL,
};
pub use lu::{Lu, RealLu, SINGULAR_TOL};
pub use matrix::{ComplexMatrix, MAX_DIM};

#[allow(unused_imports)] // float methods come from std when it is linked
use num_traits::{Float, Zero};

use crate::error::{Error, Result};

pub type C64 = num_complex::Complex64;

/// Solves `A X = B` by partial-pivoted elimination.
pub fn solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(Lu::factor(a)?.solve(b))
}

pub fn inverse(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    solve(a, &ComplexMatrix::identity(a.dim()))
}

/// Largest singular value, `sqrt(λ_max(A*A))`.
pub fn spectral_norm(a: &ComplexMatrix) -> f64 {
    let gram = (&a.adjoint() * a).hermitian_part();
    match hermitian_eigen(&gram) {
        Ok(e) => e.max().max(0.0).sqrt(),
        // Jacobi on a 256×256 Gram matrix has never been observed to stall;
        // fall back to the Frobenius bound rather than panic.
        Err(_) => a.frobenius_norm(),
    }
}

/// Hermitian square root of a Hermitian positive definite matrix.
pub fn matrix_sqrt_hpd(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let e = hermitian_eigen(h)?;
    let top = e.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(e.min() > 1e-12 * top) {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(e.map(|l| l.sqrt()).hermitian_part())
}

/// `(ζI − T)⁻¹`.
pub fn resolvent(t: &ComplexMatrix, zeta: C64) -> Result<ComplexMatrix> {
    let shifted = t.scale_real(-1.0).shift(zeta);
    inverse(&shifted)
}

/// Horner evaluation of `Σ c_k T^k` (ascending coefficients).
pub fn poly_eval_matrix(coeffs: &[C64], t: &ComplexMatrix) -> ComplexMatrix {
    let n = t.dim();
    let mut acc = ComplexMatrix::zeros(n);
    for &c in coeffs.iter().rev() {
        acc = (&acc * t).shift(c);
    }
    acc
}

/// Scalar Horner evaluation.
pub fn poly_eval(coeffs: &[C64], z: C64) -> C64 {
    coeffs.iter().rev().fold(C64::zero(), |acc, &c| acc * z + c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::TrialRng;
    use alloc::vec;
    use alloc::vec::Vec;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn j2() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[[0.0, 1.0], [0.0, 0.0]])
    }

    #[test]
    fn solve_identity_returns_rhs() {
        let mut rng = TrialRng::new(1, 0);
        let b = rng.gaussian_matrix(4);
        let x = solve(&ComplexMatrix::identity(4), &b).unwrap();
        assert!(x.distance(&b) < 1e-15);
    }

    #[test]
    fn solve_diagonal_inversion() {
        let a = ComplexMatrix::from_real_rows(&[[2.0, 0.0], [0.0, 4.0]]);
        let x = solve(&a, &ComplexMatrix::identity(2)).unwrap();
        let expected = ComplexMatrix::from_real_rows(&[[0.5, 0.0], [0.0, 0.25]]);
        assert!(x.distance(&expected) < 1e-15);
    }

    #[test]
    fn solve_residual_oracle() {
        let mut rng = TrialRng::new(2, 0);
        let a = rng.gaussian_matrix(5).shift(c(3.0, 0.0));
        let b = rng.gaussian_matrix(5);
        let x = solve(&a, &b).unwrap();
        let res = (&a * &x).distance(&b);
        assert!(res <= 1e-10 * a.frobenius_norm() * x.frobenius_norm());
    }

    #[test]
    fn singular_matrix_detected() {
        let a = ComplexMatrix::from_real_rows(&[[1.0, 2.0], [2.0, 4.0]]);
        assert_eq!(solve(&a, &ComplexMatrix::identity(2)).unwrap_err(), Error::Singular);
        assert_eq!(inverse(&ComplexMatrix::zeros(3)).unwrap_err(), Error::Singular);
    }

    #[test]
    fn real_lu_solves_and_transposes() {
        let a = [4.0, 1.0, 0.5, 2.0, 5.0, 1.0, 0.0, 1.0, 3.0];
        let lu = RealLu::factor(3, &a).unwrap();
        let b = [c(1.0, 2.0), c(-1.0, 0.0), c(0.5, 0.5)];
        let x = lu.solve(&b);
        let xt = lu.solve_transpose(&b);
        for i in 0..3 {
            let ax: C64 = (0..3).map(|j| x[j] * a[i * 3 + j]).sum();
            let atx: C64 = (0..3).map(|j| xt[j] * a[j * 3 + i]).sum();
            assert!((ax - b[i]).norm() < 1e-14);
            assert!((atx - b[i]).norm() < 1e-14);
        }
    }

    #[test]
    fn spectral_norm_examples() {
        assert!((spectral_norm(&j2()) - 1.0).abs() < 1e-14);
        let d = ComplexMatrix::from_diag(&[c(3.0, 0.0), c(0.0, -5.0)]);
        assert!((spectral_norm(&d) - 5.0).abs() < 1e-13);
    }

    #[test]
    fn spectral_norm_dominates_random_vectors() {
        let mut rng = TrialRng::new(3, 0);
        let a = rng.gaussian_matrix(4);
        let norm = spectral_norm(&a);
        let len = |v: &[C64]| a.apply(v).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let mut best = (0.0, Vec::new());
        for _ in 0..10_000 {
            let v = rng.unit_vector(4);
            let l = len(&v);
            assert!(l <= norm * (1.0 + 1e-12));
            if l > best.0 {
                best = (l, v);
            }
        }
        // Random sampling alone only gets within a few percent in C⁴; polish the
        // best sample by power iteration on A*A, still never exceeding the norm.
        let gram = &a.adjoint() * &a;
        let mut v = best.1;
        for _ in 0..500 {
            let w = gram.apply(&v);
            let n = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            v = w.iter().map(|z| z / n).collect();
        }
        let polished = len(&v);
        assert!(polished <= norm * (1.0 + 1e-12));
        assert!(norm - polished <= 1e-3);
    }

    #[test]
    fn hermitian_spectral_norm_matches_eigenvalues() {
        let mut rng = TrialRng::new(4, 0);
        for _ in 0..5 {
            let h = rng.gaussian_matrix(5).hermitian_part();
            let e = hermitian_eigen(&h).unwrap();
            let top = e.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!((spectral_norm(&h) - top).abs() <= 1e-10);
        }
    }

    #[test]
    fn sqrt_examples() {
        let i = ComplexMatrix::identity(3);
        assert!(matrix_sqrt_hpd(&i).unwrap().distance(&i) < 1e-14);
        let d = ComplexMatrix::from_real_rows(&[[4.0, 0.0], [0.0, 9.0]]);
        let r = matrix_sqrt_hpd(&d).unwrap();
        let expected = ComplexMatrix::from_real_rows(&[[2.0, 0.0], [0.0, 3.0]]);
        assert!(r.distance(&expected) < 1e-14);
    }

    #[test]
    fn sqrt_random_hpd_squares_back_and_commutes() {
        let mut rng = TrialRng::new(5, 0);
        let g = rng.gaussian_matrix(6);
        let h = (&g.adjoint() * &g).shift(c(1.0, 0.0)).hermitian_part();
        let r = matrix_sqrt_hpd(&h).unwrap();
        let hn = h.frobenius_norm();
        assert!((&r * &r).distance(&h) <= 1e-10 * hn);
        assert!((&r * &h).distance(&(&h * &r)) <= 1e-10 * hn);
        assert!(r.hermitian_defect() < 1e-14 * hn);
    }

    #[test]
    fn sqrt_rejects_indefinite() {
        let d = ComplexMatrix::from_real_rows(&[[1.0, 0.0], [0.0, -1.0]]);
        assert_eq!(matrix_sqrt_hpd(&d).unwrap_err(), Error::NotPositiveDefinite);
    }

    #[test]
    fn resolvent_examples() {
        let r = resolvent(&ComplexMatrix::zeros(1), c(2.0, 0.0)).unwrap();
        assert!((r[(0, 0)] - c(0.5, 0.0)).norm() < 1e-15);
        let t = ComplexMatrix::from_real_rows(&[[0.0, 0.0], [0.0, 1.0]]);
        let r = resolvent(&t, c(2.0, 0.0)).unwrap();
        let expected = ComplexMatrix::from_real_rows(&[[0.5, 0.0], [0.0, 1.0]]);
        assert!(r.distance(&expected) < 1e-15);
        // Neumann series: (I − J2)⁻¹ = I + J2
        let r = resolvent(&j2(), c(1.0, 0.0)).unwrap();
        let expected = ComplexMatrix::from_real_rows(&[[1.0, 1.0], [0.0, 1.0]]);
        assert!(r.distance(&expected) < 1e-15);
    }

    #[test]
    fn resolvent_inverts_shifted_operator() {
        let mut rng = TrialRng::new(6, 0);
        for _ in 0..10 {
            let t = rng.gaussian_matrix(4);
            let zeta = c(3.0, -2.0) * 2.0;
            let r = resolvent(&t, zeta).unwrap();
            let prod = &r * &t.scale_real(-1.0).shift(zeta);
            assert!(prod.distance(&ComplexMatrix::identity(4)) < 1e-9);
        }
    }

    #[test]
    fn poly_eval_examples() {
        let z2 = vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        assert!(poly_eval_matrix(&z2, &j2()).frobenius_norm() == 0.0);
        let one = vec![c(1.0, 0.0)];
        let mut rng = TrialRng::new(7, 0);
        let t = rng.gaussian_matrix(3);
        assert!(poly_eval_matrix(&one, &t).distance(&ComplexMatrix::identity(3)) == 0.0);
        let p = vec![c(0.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0)];
        let d = ComplexMatrix::from_real_rows(&[[0.0, 0.0], [0.0, 1.0]]);
        assert!(poly_eval_matrix(&p, &d).frobenius_norm() < 1e-15);
    }

    #[test]
    fn determinism_bit_identical() {
        let mut rng = TrialRng::new(8, 0);
        let t = rng.gaussian_matrix(5);
        let a: Vec<C64> = inverse(&t).unwrap().into_vec();
        let b: Vec<C64> = inverse(&t).unwrap().into_vec();
        assert_eq!(a, b);
        assert_eq!(spectral_norm(&t).to_bits(), spectral_norm(&t).to_bits());
    }
}
