//! Numerical ranges as support-function samples on a uniform angle grid.
//!
//! A [`ConvexRegion`] stores `h(θ_k)` for `θ_k = 2πk/m` together with one
//! boundary point per direction. Points, segments and discs are all ordinary
//! regions; nothing downstream special-cases degenerate shapes.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::{Float, Zero};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, ComplexMatrix, C64};

/// Smallest admissible angle grid.
pub const MIN_ANGLES: usize = 8;
/// Default grid used for range comparisons.
pub const DEFAULT_ANGLES: usize = 720;
/// Relative tolerance of the support/witness invariants.
pub const REGION_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct ConvexRegion {
    support: Vec<f64>,
    witness: Vec<C64>,
}

/// `e^{-iθ}`.
#[inline]
pub(crate) fn unit_conj(theta: f64) -> C64 {
    let (s, c) = theta.sin_cos();
    C64::new(c, -s)
}

#[inline]
pub fn grid_angle(k: usize, m: usize) -> f64 {
    2.0 * PI * k as f64 / m as f64
}

impl ConvexRegion {
    /// Builds a region from `(h(θ), witness(θ))` evaluated on the uniform grid.
    pub fn from_support_fn(m: usize, f: impl Fn(f64) -> (f64, C64)) -> Result<Self> {
        if m < MIN_ANGLES {
            return Err(Error::InvalidArgument("angle grid needs at least 8 directions"));
        }
        let (support, witness) = (0..m).map(|k| f(grid_angle(k, m))).unzip();
        Ok(Self { support, witness })
    }

    pub(crate) fn from_parts(support: Vec<f64>, witness: Vec<C64>) -> Result<Self> {
        if support.len() < MIN_ANGLES || support.len() != witness.len() {
            return Err(Error::InvalidArgument("malformed support samples"));
        }
        Ok(Self { support, witness })
    }

    pub fn point(z: C64, m: usize) -> Result<Self> {
        Self::from_support_fn(m, |t| ((unit_conj(t) * z).re, z))
    }

    pub fn disc(center: C64, radius: f64, m: usize) -> Result<Self> {
        Self::from_support_fn(m, |t| {
            let dir = unit_conj(t).conj();
            ((unit_conj(t) * center).re + radius, center + dir * radius)
        })
    }

    /// Axis-aligned ellipse with semi-axes `a` (real) and `b` (imaginary).
    pub fn ellipse(center: C64, a: f64, b: f64, m: usize) -> Result<Self> {
        Self::from_support_fn(m, |t| {
            let (s, c) = t.sin_cos();
            let h0 = (a * a * c * c + b * b * s * s).sqrt();
            let w = C64::new(a * a * c, b * b * s) / h0;
            ((unit_conj(t) * center).re + h0, center + w)
        })
    }

    /// Convex hull of finitely many points. Ties go to the lowest index.
    pub fn hull_of_points(points: &[C64], m: usize) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("empty point set"));
        }
        Self::from_support_fn(m, |t| {
            let e = unit_conj(t);
            let mut best = (f64::NEG_INFINITY, points[0]);
            for &p in points {
                let v = (e * p).re;
                if v > best.0 {
                    best = (v, p);
                }
            }
            best
        })
    }

    pub fn m(&self) -> usize {
        self.support.len()
    }

    pub fn angle(&self, k: usize) -> f64 {
        grid_angle(k, self.m())
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn witness(&self) -> &[C64] {
        &self.witness
    }

    /// `1 + max_k |h(θ_k)|`, the scale for relative tolerances.
    pub fn scale(&self) -> f64 {
        1.0 + self.support.iter().fold(0.0f64, |m, h| m.max(h.abs()))
    }

    /// Minkowski sum with the closed disc of radius `delta`.
    pub fn inflate(&self, delta: f64) -> Self {
        let m = self.m();
        let support = self.support.iter().map(|h| h + delta).collect();
        let witness = self
            .witness
            .iter()
            .enumerate()
            .map(|(k, w)| w + unit_conj(grid_angle(k, m)).conj() * delta)
            .collect();
        Self { support, witness }
    }

    /// Centroid of the witness points.
    pub fn center(&self) -> C64 {
        self.witness.iter().sum::<C64>() / self.m() as f64
    }

    /// Largest distance from [`center`](Self::center) to a polygon vertex.
    pub fn circumradius(&self) -> f64 {
        let c = self.center();
        self.vertices()
            .iter()
            .map(|v| (v - c).norm())
            .fold(0.0, f64::max)
    }

    /// Vertices of the circumscribed polygon: intersections of consecutive
    /// support lines `Re(e^{-iθ_k} z) = h_k`.
    pub fn vertices(&self) -> Vec<C64> {
        let m = self.m();
        (0..m)
            .map(|k| {
                let k1 = (k + 1) % m;
                let (s0, c0) = self.angle(k).sin_cos();
                let (s1, c1) = self.angle(k1).sin_cos();
                let det = c0 * s1 - s0 * c1;
                let (h0, h1) = (self.support[k], self.support[k1]);
                C64::new((h0 * s1 - h1 * s0) / det, (c0 * h1 - c1 * h0) / det)
            })
            .collect()
    }

    /// Checks the support/witness invariants at `REGION_TOL · scale`.
    pub fn check_invariants(&self) -> Result<()> {
        let tol = REGION_TOL * self.scale();
        for (k, (&h, &w)) in self.support.iter().zip(&self.witness).enumerate() {
            if ((unit_conj(self.angle(k)) * w).re - h).abs() > tol {
                return Err(Error::InvariantViolation("witness off its support line"));
            }
        }
        for (j, &h) in self.support.iter().enumerate() {
            let e = unit_conj(self.angle(j));
            if self.witness.iter().any(|&w| (e * w).re > h + tol) {
                return Err(Error::InvariantViolation("support values not convex"));
            }
        }
        Ok(())
    }
}

/// `h(θ) = λ_max(Re(e^{-iθ}T))` and the witness `⟨Tv, v⟩` of the top eigenvector.
pub fn numrange_support(t: &ComplexMatrix, theta: f64) -> Result<(f64, C64)> {
    let rotated = t.scale(unit_conj(theta));
    let re = rotated.hermitian_part();
    let eig = hermitian_eigen(&re)?;
    let top = eig.max();
    let scale = 1.0 + eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    // ties: lowest column among numerically top eigenvalues
    let k = eig
        .values
        .iter()
        .position(|&v| v >= top - 1e-12 * scale)
        .expect("top eigenvalue present");
    let v = eig.vector(k);
    let tv = t.apply(&v);
    let witness: C64 = tv.iter().zip(&v).map(|(a, b)| a * b.conj()).sum();
    Ok((top, witness))
}

/// Support sweep of `W(T)` on `m` uniform directions.
pub fn numrange_boundary(t: &ComplexMatrix, m: usize) -> Result<ConvexRegion> {
    if m < MIN_ANGLES {
        return Err(Error::InvalidArgument("angle grid needs at least 8 directions"));
    }
    let mut support = Vec::with_capacity(m);
    let mut witness = Vec::with_capacity(m);
    for k in 0..m {
        let (h, w) = numrange_support(t, grid_angle(k, m))?;
        support.push(h);
        witness.push(w);
    }
    ConvexRegion::from_parts(support, witness)
}

/// Support of `conv(R1 ∪ R2)`: the pointwise maximum.
pub fn hull_of_union(r1: &ConvexRegion, r2: &ConvexRegion) -> Result<ConvexRegion> {
    if r1.m() != r2.m() {
        return Err(Error::GridMismatch);
    }
    let (support, witness) = r1
        .support
        .iter()
        .zip(&r2.support)
        .zip(r1.witness.iter().zip(&r2.witness))
        .map(|((&h1, &h2), (&w1, &w2))| if h2 > h1 { (h2, w2) } else { (h1, w1) })
        .unzip();
    ConvexRegion::from_parts(support, witness)
}

/// Hausdorff distance of two convex bodies: `max_k |h1 − h2|`.
pub fn hausdorff(r1: &ConvexRegion, r2: &ConvexRegion) -> Result<f64> {
    if r1.m() != r2.m() {
        return Err(Error::GridMismatch);
    }
    Ok(r1
        .support
        .iter()
        .zip(&r2.support)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// `true` iff `Re(e^{-iθ_k} z) ≤ h(θ_k) − margin` for every grid direction.
pub fn contains(r: &ConvexRegion, z: C64, margin: f64) -> bool {
    r.support
        .iter()
        .enumerate()
        .all(|(k, &h)| (unit_conj(r.angle(k)) * z).re <= h - margin)
}

/// Block-diagonal `A ⊕ B`.
pub fn direct_sum(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.dim() + b.dim();
    if n > crate::linalg::MAX_DIM {
        return Err(Error::InvalidDimension(n));
    }
    Ok(a.block_diag(b))
}

/// Hausdorff distance between `W(A ⊕ B)` and `conv(W(A) ∪ W(B))`.
pub fn verify_hull_identity(a: &ComplexMatrix, b: &ComplexMatrix, m: usize) -> Result<f64> {
    if m < 64 {
        return Err(Error::InvalidArgument("hull identity needs at least 64 directions"));
    }
    let lhs = numrange_boundary(&direct_sum(a, b)?, m)?;
    let rhs = hull_of_union(&numrange_boundary(a, m)?, &numrange_boundary(b, m)?)?;
    hausdorff(&lhs, &rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::TrialRng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn j2() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[[0.0, 1.0], [0.0, 0.0]])
    }

    /// Brute-force support of W(T): best Re(e^{-iθ}⟨Tf,f⟩) over random unit f.
    fn sampled_support(t: &ComplexMatrix, theta: f64, n: usize, rng: &mut TrialRng) -> f64 {
        let e = unit_conj(theta);
        (0..n)
            .map(|_| {
                let f = rng.unit_vector(t.dim());
                (e * t.inner(&f, &f)).re
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn scalar_support() {
        let z = c(0.3, -0.7);
        let t = ComplexMatrix::from_rows(&[[z]]);
        for k in 0..16 {
            let th = grid_angle(k, 16);
            let (h, w) = numrange_support(&t, th).unwrap();
            assert!((h - (unit_conj(th) * z).re).abs() < 1e-15);
            assert!((w - z).norm() < 1e-15);
        }
    }

    #[test]
    fn jordan_support_is_half() {
        let mut rng = TrialRng::new(1, 0);
        for &th in &[0.0, 0.7, 2.0, 4.5] {
            let (h, _) = numrange_support(&j2(), th).unwrap();
            let oracle = sampled_support(&j2(), th, 10_000, &mut rng);
            assert!(oracle <= h + 1e-12);
            assert!(h - oracle < 1e-3);
            assert!((h - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn diagonal_support_at_zero() {
        let t = ComplexMatrix::from_real_rows(&[[0.0, 0.0], [0.0, 1.0]]);
        let (h, w) = numrange_support(&t, 0.0).unwrap();
        assert!((h - 1.0).abs() < 1e-15);
        assert!((w - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn hermitian_segment_boundary() {
        let t = ComplexMatrix::from_real_rows(&[[0.0, 0.0], [0.0, 1.0]]);
        let r = numrange_boundary(&t, 360).unwrap();
        assert!((r.support()[0] - 1.0).abs() < 1e-14);
        assert!(r.support()[180].abs() < 1e-14);
        assert!(r.support()[90].abs() < 1e-14);
        assert!(r.support()[270].abs() < 1e-14);
        r.check_invariants().unwrap();
    }

    #[test]
    fn jordan_boundary_is_disc() {
        let r = numrange_boundary(&j2(), 360).unwrap();
        assert!(r.support().iter().all(|h| (h - 0.5).abs() < 1e-9));
        let disc = ConvexRegion::disc(C64::zero(), 0.5, 360).unwrap();
        assert!(hausdorff(&r, &disc).unwrap() < 1e-9);
        r.check_invariants().unwrap();
    }

    #[test]
    fn point_region() {
        let z = c(0.3, 0.4);
        let r = numrange_boundary(&ComplexMatrix::from_rows(&[[z]]), 360).unwrap();
        for k in 0..360 {
            assert!((r.support()[k] - (unit_conj(r.angle(k)) * z).re).abs() < 1e-15);
        }
    }

    #[test]
    fn hull_examples() {
        let m = 360;
        let r = numrange_boundary(&j2(), m).unwrap();
        assert_eq!(hull_of_union(&r, &r).unwrap(), r);

        let p0 = ConvexRegion::point(C64::zero(), m).unwrap();
        let p1 = ConvexRegion::point(c(1.0, 0.0), m).unwrap();
        let seg = hull_of_union(&p0, &p1).unwrap();
        for k in 0..m {
            let expected = r.angle(k).cos().max(0.0);
            assert!((seg.support()[k] - expected).abs() < 1e-15);
        }

        let disc = ConvexRegion::disc(C64::zero(), 0.5, m).unwrap();
        let p2 = ConvexRegion::point(c(2.0, 0.0), m).unwrap();
        let h = hull_of_union(&disc, &p2).unwrap();
        assert!((h.support()[0] - 2.0).abs() < 1e-15);
        assert!((h.support()[180] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn grid_mismatch() {
        let a = ConvexRegion::disc(C64::zero(), 1.0, 16).unwrap();
        let b = ConvexRegion::disc(C64::zero(), 1.0, 32).unwrap();
        assert_eq!(hull_of_union(&a, &b).unwrap_err(), Error::GridMismatch);
        assert_eq!(hausdorff(&a, &b).unwrap_err(), Error::GridMismatch);
    }

    #[test]
    fn hausdorff_examples() {
        let m = 720;
        let d1 = ConvexRegion::disc(C64::zero(), 1.0, m).unwrap();
        let d2 = ConvexRegion::disc(C64::zero(), 2.0, m).unwrap();
        assert_eq!(hausdorff(&d1, &d1).unwrap(), 0.0);
        assert!((hausdorff(&d1, &d2).unwrap() - 1.0).abs() < 1e-15);
        let seg = ConvexRegion::hull_of_points(&[C64::zero(), c(1.0, 0.0)], m).unwrap();
        let p0 = ConvexRegion::point(C64::zero(), m).unwrap();
        assert!((hausdorff(&seg, &p0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn contains_examples() {
        let d = ConvexRegion::disc(C64::zero(), 1.0, 720).unwrap();
        assert!(contains(&d, C64::zero(), 0.5));
        assert!(!contains(&d, c(2.0, 0.0), 0.0));
        let e = ConvexRegion::ellipse(C64::zero(), 2.0, 1.0, 720).unwrap();
        assert!(contains(&e, c(1.9, 0.0), 0.05));
        assert!(!contains(&e, c(1.99, 0.0), 0.05));
    }

    #[test]
    fn direct_sum_examples() {
        let a = ComplexMatrix::from_real_rows(&[[0.0]]);
        let b = ComplexMatrix::from_real_rows(&[[1.0]]);
        let s = direct_sum(&a, &b).unwrap();
        assert_eq!(s, ComplexMatrix::from_real_rows(&[[0.0, 0.0], [0.0, 1.0]]));
        let jj = direct_sum(&j2(), &j2()).unwrap();
        assert_eq!(jj.dim(), 4);
        assert_eq!(jj[(0, 1)], c(1.0, 0.0));
        assert_eq!(jj[(2, 3)], c(1.0, 0.0));
        assert_eq!(jj.frobenius_norm(), 2.0f64.sqrt());
        let mut rng = TrialRng::new(2, 0);
        let big = direct_sum(&rng.gaussian_matrix(3), &rng.gaussian_matrix(5)).unwrap();
        assert_eq!(big.dim(), 8);
    }

    #[test]
    fn hull_identity_examples() {
        let a = ComplexMatrix::from_real_rows(&[[0.0]]);
        let b = ComplexMatrix::from_real_rows(&[[1.0]]);
        assert!(verify_hull_identity(&a, &b, 360).unwrap() < 1e-9);
        assert!(verify_hull_identity(&j2(), &b, 720).unwrap() < 1e-8);
        // explicit support functions: conv(disc(0,1/2) ∪ {1}) has h = max(1/2, cos θ)
        let lhs = numrange_boundary(&direct_sum(&j2(), &b).unwrap(), 720).unwrap();
        for k in 0..720 {
            let expected = lhs.angle(k).cos().max(0.5);
            assert!((lhs.support()[k] - expected).abs() < 1e-9);
        }
        let mut rng = TrialRng::new(3, 0);
        let a = rng.gaussian_matrix(5);
        let b = rng.gaussian_matrix(4);
        assert!(verify_hull_identity(&a, &b, 720).unwrap() < 1e-8);
    }

    #[test]
    fn translation_and_rotation_equivariance() {
        let mut rng = TrialRng::new(4, 0);
        let t = rng.gaussian_matrix(4);
        let m = 360;
        let base = numrange_boundary(&t, m).unwrap();
        let shift = c(0.7, -1.2);
        let moved = numrange_boundary(&t.shift(shift), m).unwrap();
        for k in 0..m {
            let expected = base.support()[k] + (unit_conj(base.angle(k)) * shift).re;
            assert!((moved.support()[k] - expected).abs() < 1e-10);
        }
        // rotate by 10 grid steps
        let phi = grid_angle(10, m);
        let rot = numrange_boundary(&t.scale(unit_conj(phi).conj()), m).unwrap();
        for k in 0..m {
            let src = (k + m - 10) % m;
            assert!((rot.support()[k] - base.support()[src]).abs() < 1e-10);
        }
    }

    #[test]
    fn vertices_of_disc_lie_just_outside() {
        let d = ConvexRegion::disc(C64::zero(), 1.0, 64).unwrap();
        let v = d.vertices();
        let expected = 1.0 / (PI / 64.0).cos();
        assert!(v.iter().all(|z| (z.norm() - expected).abs() < 1e-12));
        let p = ConvexRegion::point(c(0.3, 0.1), 64).unwrap();
        assert!(p.vertices().iter().all(|z| (z - c(0.3, 0.1)).norm() < 1e-12));
    }

    #[test]
    fn inflate_adds_margin() {
        let d = ConvexRegion::disc(c(1.0, 1.0), 1.0, 64).unwrap();
        let big = d.inflate(0.5);
        big.check_invariants().unwrap();
        assert!(hausdorff(&big, &ConvexRegion::disc(c(1.0, 1.0), 1.5, 64).unwrap()).unwrap() < 1e-14);
    }
}
