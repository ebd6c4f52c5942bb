//! Seeded operator and vector generators.
//!
//! Trial `i` of a run seeded with `s` draws from the ChaCha stream `(s, i)`,
//! so results do not depend on the order trials are executed in.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // float methods come from std when it is linked
use num_traits::{Float, Zero};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::linalg::{inverse, spectral_norm, ComplexMatrix, C64};

/// Largest dimension the generators accept.
pub const MAX_RANDOM_DIM: usize = 64;

/// Counter-based random stream for one trial.
#[derive(Clone, Debug)]
pub struct TrialRng {
    inner: ChaCha8Rng,
    spare: Option<f64>,
}

impl TrialRng {
    pub fn new(seed: u64, trial: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(trial);
        Self { inner, spare: None }
    }

    /// Uniform in `(0, 1]`.
    pub fn uniform(&mut self) -> f64 {
        let bits = self.inner.next_u64() >> 11;
        (bits as f64 + 1.0) * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn below(&mut self, n: usize) -> usize {
        ((self.uniform() * n as f64) as usize).min(n - 1)
    }

    /// Standard normal via Box–Muller.
    pub fn gaussian(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * PI * u2).sin_cos();
        self.spare = Some(r * s);
        r * c
    }

    /// Complex normal with `E|z|² = 1`.
    pub fn complex_gaussian(&mut self) -> C64 {
        C64::new(self.gaussian(), self.gaussian()) * core::f64::consts::FRAC_1_SQRT_2
    }

    pub fn gaussian_vec(&mut self, n: usize) -> Vec<C64> {
        (0..n).map(|_| self.complex_gaussian()).collect()
    }

    pub fn unit_vector(&mut self, n: usize) -> Vec<C64> {
        loop {
            let v = self.gaussian_vec(n);
            let len = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if len > 1e-12 {
                return v.into_iter().map(|z| z / len).collect();
            }
        }
    }

    /// Matrix of i.i.d. complex normals.
    pub fn gaussian_matrix(&mut self, n: usize) -> ComplexMatrix {
        ComplexMatrix::new(n, self.gaussian_vec(n * n)).expect("finite gaussian entries")
    }

    /// Haar-distributed unitary from Gram–Schmidt on a Gaussian matrix.
    pub fn unitary(&mut self, n: usize) -> ComplexMatrix {
        let g = self.gaussian_matrix(n);
        let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
        for j in 0..n {
            let mut v = g.column(j);
            for _ in 0..2 {
                for q in &cols {
                    let dot: C64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                    for (x, qi) in v.iter_mut().zip(q) {
                        *x -= dot * qi;
                    }
                }
            }
            let len = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            cols.push(v.into_iter().map(|z| z / len).collect());
        }
        let mut u = ComplexMatrix::zeros(n);
        for (j, col) in cols.iter().enumerate() {
            for i in 0..n {
                u[(i, j)] = col[i];
            }
        }
        u
    }

    /// Uniform point in the disc `|z − c| ≤ r`.
    pub fn point_in_disc(&mut self, c: C64, r: f64) -> C64 {
        let rho = r * self.uniform().sqrt();
        let phi = 2.0 * PI * self.uniform();
        c + C64::from_polar(rho, phi)
    }

    /// Random polynomial coefficients, degree uniform in `0..=max_degree`.
    pub fn polynomial(&mut self, max_degree: usize) -> Vec<C64> {
        let d = self.below(max_degree + 1);
        self.gaussian_vec(d + 1)
    }
}

/// Operator families used by experiments.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Profile {
    Generic,
    /// Scaled to spectral norm exactly 1.
    Contraction,
    /// Unitarily conjugated upper-triangular matrix with half of its
    /// diagonal zeroed, so it carries nilpotent Jordan structure.
    NilpotentMix,
    Normal,
    /// Two eigenvalue clusters separated by at least `gap`.
    SplitSpectrum { gap: f64 },
}

/// A split-spectrum operator together with its cluster geometry.
#[derive(Clone, Debug)]
pub struct SplitOperator {
    pub matrix: ComplexMatrix,
    /// `(center, radius)` of each eigenvalue cluster.
    pub clusters: Vec<(C64, f64)>,
}

/// Cluster radius used by [`Profile::SplitSpectrum`].
pub const SPLIT_CLUSTER_RADIUS: f64 = 0.5;

pub fn random_operator(seed: u64, dim: usize, profile: Profile) -> Result<ComplexMatrix> {
    random_operator_with(&mut TrialRng::new(seed, 0), dim, profile)
}

pub fn random_operator_with(
    rng: &mut TrialRng,
    dim: usize,
    profile: Profile,
) -> Result<ComplexMatrix> {
    if dim == 0 || dim > MAX_RANDOM_DIM {
        return Err(Error::InvalidDimension(dim));
    }
    let scale = 1.0 / (dim as f64).sqrt();
    match profile {
        Profile::Generic => Ok(rng.gaussian_matrix(dim).scale_real(scale)),
        Profile::Contraction => {
            let g = rng.gaussian_matrix(dim);
            let norm = spectral_norm(&g);
            Ok(g.scale_real(1.0 / norm))
        }
        Profile::NilpotentMix => {
            let mut t = ComplexMatrix::zeros(dim);
            for i in 0..dim {
                for j in (i + 1)..dim {
                    t[(i, j)] = rng.complex_gaussian() * scale;
                }
                if i % 2 == 1 {
                    t[(i, i)] = rng.complex_gaussian();
                }
            }
            let u = rng.unitary(dim);
            Ok(&(&u * &t) * &u.adjoint())
        }
        Profile::Normal => {
            let diag = rng.gaussian_vec(dim);
            let u = rng.unitary(dim);
            Ok(&(&u * &ComplexMatrix::from_diag(&diag)) * &u.adjoint())
        }
        Profile::SplitSpectrum { gap } => Ok(random_split_operator(rng, dim, gap)?.matrix),
    }
}

/// Block upper-triangular operator with two eigenvalue clusters, conjugated by
/// a well-conditioned similarity `I + 0.3·G/‖G‖`.
pub fn random_split_operator(rng: &mut TrialRng, dim: usize, gap: f64) -> Result<SplitOperator> {
    if !(2..=MAX_RANDOM_DIM).contains(&dim) {
        return Err(Error::InvalidDimension(dim));
    }
    if !(gap > 0.0) {
        return Err(Error::InvalidArgument("gap must be positive"));
    }
    let r = SPLIT_CLUSTER_RADIUS;
    let c1 = C64::zero();
    let c2 = C64::from_polar(gap + 2.0 * r, 2.0 * PI * rng.uniform());
    let first = dim.div_ceil(2);
    let mut t = ComplexMatrix::zeros(dim);
    for i in 0..dim {
        let center = if i < first { c1 } else { c2 };
        t[(i, i)] = rng.point_in_disc(center, r);
        for j in (i + 1)..dim {
            let same_block = (i < first) == (j < first);
            if same_block {
                t[(i, j)] = rng.complex_gaussian() * 0.5;
            }
        }
    }
    let g = rng.gaussian_matrix(dim);
    let gn = spectral_norm(&g);
    let s = g.scale_real(0.3 / gn).shift(C64::new(1.0, 0.0));
    let s_inv = inverse(&s)?;
    let matrix = &(&s * &t) * &s_inv;
    Ok(SplitOperator {
        matrix,
        clusters: alloc::vec![(c1, r), (c2, r)],
    })
}

/// `T − (tr T/n)·I` scaled so that its spectral norm is at most `radius`;
/// the numerical range of the result lies in the closed disc of that radius.
pub fn fit_to_disc(t: &ComplexMatrix, radius: f64) -> ComplexMatrix {
    let n = t.dim() as f64;
    let centered = t.shift(-t.trace() / n);
    let norm = spectral_norm(&centered);
    if norm > radius {
        centered.scale_real(radius / norm)
    } else {
        centered
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eigenvalues;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<f64> = {
            let mut r = TrialRng::new(42, 3);
            (0..8).map(|_| r.gaussian()).collect()
        };
        let b: Vec<f64> = {
            let mut r = TrialRng::new(42, 3);
            (0..8).map(|_| r.gaussian()).collect()
        };
        let c: Vec<f64> = {
            let mut r = TrialRng::new(42, 4);
            (0..8).map(|_| r.gaussian()).collect()
        };
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn gaussian_moments_are_plausible() {
        let mut r = TrialRng::new(1, 0);
        let n = 20_000;
        let xs: Vec<f64> = (0..n).map(|_| r.gaussian()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.05);
        assert!((var - 1.0).abs() < 0.05);
    }

    #[test]
    fn normal_profile_commutes_with_adjoint() {
        let t = random_operator(7, 3, Profile::Normal).unwrap();
        let ta = t.adjoint();
        assert!((&t * &ta).distance(&(&ta * &t)) <= 1e-12);
    }

    #[test]
    fn contraction_profile_has_unit_norm() {
        for seed in 0..20 {
            let t = random_operator(seed, 5, Profile::Contraction).unwrap();
            assert!(spectral_norm(&t) <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn unitary_is_unitary() {
        let u = TrialRng::new(3, 0).unitary(5);
        assert!((&u.adjoint() * &u).distance(&ComplexMatrix::identity(5)) < 1e-13);
    }

    #[test]
    fn split_spectrum_clusters_are_separated() {
        let mut rng = TrialRng::new(9, 0);
        let op = random_split_operator(&mut rng, 6, 3.0).unwrap();
        let ev = eigenvalues(&op.matrix).unwrap();
        let (c1, r1) = op.clusters[0];
        let (c2, r2) = op.clusters[1];
        let (a, b): (Vec<C64>, Vec<C64>) = ev.iter().partition(|z| (*z - c1).norm() <= r1 + 1e-9);
        assert_eq!(a.len(), 3);
        assert_eq!(b.len(), 3);
        assert!(b.iter().all(|z| (z - c2).norm() <= r2 + 1e-9));
        let gap = a
            .iter()
            .flat_map(|x| b.iter().map(move |y| (x - y).norm()))
            .fold(f64::INFINITY, f64::min);
        assert!(gap >= 3.0);
    }

    #[test]
    fn rejects_oversized_dimension() {
        assert_eq!(
            random_operator(0, 65, Profile::Generic).unwrap_err(),
            Error::InvalidDimension(65)
        );
    }
}
