//! Boundary samplers used to evaluate `sup_X |u|`.
//!
//! By the maximum principle a rational function with poles off `X` attains its
//! modulus maximum on the boundary, so only boundary loops are sampled. Sup
//! evaluation refines the sampled maximum by golden-section search along the
//! loop parameter, so the reported value is not limited by the sample spacing.

use alloc::vec::Vec;
use core::f64::consts::TAU;

#[allow(unused_imports)] // float methods come from std when it is linked
use num_traits::{Euclid, Float};

use crate::convex::{hull_of_union, ConvexRegion, DEFAULT_ANGLES};
use crate::curve::BoundaryCurve;
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::search::golden_max;

/// Fewest samples a loop may carry.
pub const MIN_SAMPLES: usize = 128;

/// Candidates within this fraction of the sampled maximum are refined.
const REFINE_FRACTION: f64 = 0.9;
const MAX_REFINED: usize = 12;
const REFINE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum BoundaryLoop {
    Curve(BoundaryCurve),
    /// Closed polygon, vertices in order.
    Polygon(Vec<C64>),
}

impl BoundaryLoop {
    /// Point at normalized parameter `s ∈ [0, 1)`.
    pub fn point(&self, s: f64) -> C64 {
        match self {
            Self::Curve(c) => c.point(TAU * s),
            Self::Polygon(v) => polygon_point(v, s),
        }
    }

    fn region(&self, m: usize) -> Result<ConvexRegion> {
        match self {
            Self::Curve(c) => c.to_region(m),
            Self::Polygon(v) => ConvexRegion::hull_of_points(v, m),
        }
    }
}

fn polygon_point(v: &[C64], s: f64) -> C64 {
    let n = v.len();
    let total: f64 = (0..n).map(|i| (v[(i + 1) % n] - v[i]).norm()).sum();
    let mut arc = Euclid::rem_euclid(&s, &1.0) * total;
    for i in 0..n {
        let len = (v[(i + 1) % n] - v[i]).norm();
        if arc <= len || i == n - 1 {
            let f = if len > 0.0 { (arc / len).min(1.0) } else { 0.0 };
            return v[i] + (v[(i + 1) % n] - v[i]) * f;
        }
        arc -= len;
    }
    v[0]
}

/// Samples of one or more boundary loops, `per_loop` equally spaced in parameter.
#[derive(Clone, Debug)]
pub struct RegionSampler {
    loops: Vec<BoundaryLoop>,
    per_loop: usize,
    points: Vec<C64>,
    region: ConvexRegion,
}

impl RegionSampler {
    pub fn new(loops: Vec<BoundaryLoop>, per_loop: usize) -> Result<Self> {
        if loops.is_empty() {
            return Err(Error::InvalidArgument("sampler needs a boundary loop"));
        }
        if per_loop < MIN_SAMPLES {
            return Err(Error::InvalidArgument("sampler needs at least 128 samples per loop"));
        }
        for l in &loops {
            if let BoundaryLoop::Polygon(v) = l {
                if v.is_empty() {
                    return Err(Error::InvalidArgument("empty polygon loop"));
                }
            }
        }
        let points = loops
            .iter()
            .flat_map(|l| (0..per_loop).map(move |j| l.point(j as f64 / per_loop as f64)))
            .collect();
        let mut region = loops[0].region(DEFAULT_ANGLES)?;
        for l in &loops[1..] {
            region = hull_of_union(&region, &l.region(DEFAULT_ANGLES)?)?;
        }
        Ok(Self {
            loops,
            per_loop,
            points,
            region,
        })
    }

    pub fn circle(center: C64, radius: f64, n: usize) -> Result<Self> {
        Self::curve(BoundaryCurve::disc(center, radius)?, n)
    }

    pub fn unit_circle(n: usize) -> Result<Self> {
        Self::circle(C64::new(0.0, 0.0), 1.0, n)
    }

    pub fn curve(curve: BoundaryCurve, n: usize) -> Result<Self> {
        Self::new(alloc::vec![BoundaryLoop::Curve(curve)], n)
    }

    /// Samples the boundary of the circumscribed polygon of `region`.
    pub fn from_region(region: &ConvexRegion, n: usize) -> Result<Self> {
        let mut s = Self::new(alloc::vec![BoundaryLoop::Polygon(region.vertices())], n)?;
        s.region = region.clone();
        Ok(s)
    }

    /// Same loops with `factor` times as many samples.
    pub fn denser(&self, factor: usize) -> Result<Self> {
        let mut s = Self::new(self.loops.clone(), self.per_loop * factor.max(1))?;
        s.region = self.region.clone();
        Ok(s)
    }

    pub fn points(&self) -> &[C64] {
        &self.points
    }

    pub fn loops(&self) -> &[BoundaryLoop] {
        &self.loops
    }

    pub fn per_loop(&self) -> usize {
        self.per_loop
    }

    /// Samples of loop `k` only.
    pub fn loop_points(&self, k: usize) -> &[C64] {
        &self.points[k * self.per_loop..(k + 1) * self.per_loop]
    }

    /// Convex hull of all loops, on the default angle grid.
    pub fn region(&self) -> &ConvexRegion {
        &self.region
    }

    /// `max |f|` over the sampled loops, refined between samples.
    pub fn sup(&self, mut f: impl FnMut(C64) -> Result<f64>) -> Result<f64> {
        let vals = self
            .points
            .iter()
            .map(|&z| f(z))
            .collect::<Result<Vec<f64>>>()?;
        let top = vals.iter().copied().fold(0.0, f64::max);
        if !top.is_finite() {
            return Err(Error::NonFinite);
        }
        let n = self.per_loop;
        let mut candidates: Vec<usize> = (0..vals.len())
            .filter(|&i| {
                let (k, j) = (i / n, i % n);
                let prev = vals[k * n + (j + n - 1) % n];
                let next = vals[k * n + (j + 1) % n];
                vals[i] >= REFINE_FRACTION * top && vals[i] >= prev && vals[i] >= next
            })
            .collect();
        candidates.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]).then(a.cmp(&b)));
        candidates.truncate(MAX_REFINED);
        let mut best = top;
        let h = 1.0 / n as f64;
        for i in candidates {
            let (k, j) = (i / n, i % n);
            let lp = &self.loops[k];
            let s0 = j as f64 * h;
            let mut err = None;
            let (_, v) = golden_max(
                |s| match f(lp.point(s)) {
                    Ok(v) => v,
                    Err(e) => {
                        err = Some(e);
                        f64::NEG_INFINITY
                    }
                },
                s0 - h,
                s0 + h,
                REFINE_TOL * h,
            );
            if let Some(e) = err {
                return Err(e);
            }
            best = best.max(v);
        }
        Ok(best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::contains;
    use crate::linalg::poly_eval;

    #[test]
    fn circle_samples_lie_on_circle() {
        let s = RegionSampler::circle(C64::new(1.0, -1.0), 2.0, 256).unwrap();
        assert_eq!(s.points().len(), 256);
        assert!(s
            .points()
            .iter()
            .all(|z| ((z - C64::new(1.0, -1.0)).norm() - 2.0).abs() < 1e-14));
        assert!(s.points().iter().all(|&z| contains(s.region(), z, -1e-9)));
    }

    #[test]
    fn region_sampler_points_are_on_the_region_boundary() {
        let r = ConvexRegion::ellipse(C64::new(0.0, 0.0), 2.0, 1.0, 180).unwrap();
        let s = RegionSampler::from_region(&r, 512).unwrap();
        assert!(s.points().iter().all(|&z| contains(&r, z, -1e-9)));
        assert!(s.points().iter().all(|&z| !contains(&r, z, 1e-9)));
    }

    #[test]
    fn too_few_samples_rejected() {
        assert!(RegionSampler::unit_circle(64).is_err());
    }

    #[test]
    fn refined_sup_beats_sample_grid() {
        // |z − e^{iφ}|-peaked function whose maximum falls between samples
        let s = RegionSampler::unit_circle(128).unwrap();
        let phi = 0.5 * TAU / 128.0;
        let target = C64::from_polar(1.0, phi + core::f64::consts::PI);
        let sampled = s
            .points()
            .iter()
            .map(|z| (z - target).norm())
            .fold(0.0, f64::max);
        let refined = s.sup(|z| Ok((z - target).norm())).unwrap();
        assert!(sampled < 2.0 - 1e-5);
        assert!((refined - 2.0).abs() < 1e-12);
    }

    #[test]
    fn sup_of_polynomials_never_below_samples() {
        let mut rng = crate::random::TrialRng::new(5, 0);
        let s = RegionSampler::unit_circle(256).unwrap();
        let dense = s.denser(16).unwrap();
        for _ in 0..20 {
            let p = rng.polynomial(12);
            let sup = s.sup(|z| Ok(poly_eval(&p, z).norm())).unwrap();
            let brute = dense
                .points()
                .iter()
                .map(|&z| poly_eval(&p, z).norm())
                .fold(0.0, f64::max);
            assert!(sup >= brute * (1.0 - 1e-12));
            assert!(sup <= brute * (1.0 + 1e-3));
        }
    }

    #[test]
    fn multi_loop_sampler_covers_each_loop() {
        let loops = alloc::vec![
            BoundaryLoop::Curve(BoundaryCurve::disc(C64::new(0.0, 0.0), 1.0).unwrap()),
            BoundaryLoop::Curve(BoundaryCurve::disc(C64::new(5.0, 0.0), 1.0).unwrap()),
        ];
        let s = RegionSampler::new(loops, 128).unwrap();
        assert_eq!(s.points().len(), 256);
        assert!(s.loop_points(1).iter().all(|z| ((z - C64::new(5.0, 0.0)).norm() - 1.0).abs() < 1e-14));
        assert!((s.region().support()[0] - 6.0).abs() < 1e-14);
    }
}
