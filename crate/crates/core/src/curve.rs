//! Closed convex boundary curves parametrized counterclockwise on `[0, 2π)`.

use alloc::vec::Vec;
use core::f64::consts::TAU;

#[allow(unused_imports)] // float methods come from std when it is linked
use num_traits::{Euclid, Float};

use crate::convex::{unit_conj, ConvexRegion};
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::search::golden_max;

/// Smallest admissible `|γ′(t)|`.
pub const MIN_SPEED: f64 = 1e-9;
/// Corner rounding must be at least this fraction of the circumradius.
pub const MIN_ROUNDING_RATIO: f64 = 0.05;

#[derive(Clone, Debug, PartialEq)]
pub enum BoundaryCurve {
    Disc { center: C64, radius: f64 },
    /// Axis-aligned ellipse, semi-axis `a` along the real axis.
    Ellipse { center: C64, a: f64, b: f64 },
    SmoothedPolygon(SmoothedPolygon),
}

/// Convex polygon with every corner replaced by a circular arc.
///
/// The rounded curve stays inside the polygon and touches each side: it is
/// the inner parallel polygon at distance `rounding`, inflated by a disc of
/// that radius. It is parametrized proportionally to arclength.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoothedPolygon {
    vertices: Vec<C64>,
    rounding: f64,
    inner: Vec<C64>,
    /// Unit direction of each edge.
    dirs: Vec<C64>,
    seg_len: Vec<f64>,
    arc_len: Vec<f64>,
    perimeter: f64,
}

impl SmoothedPolygon {
    /// `vertices` must be a strictly convex polygon in counterclockwise order.
    pub fn new(vertices: Vec<C64>, rounding: f64) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::BadCurve("polygon needs at least three vertices"));
        }
        if vertices.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) || !rounding.is_finite() {
            return Err(Error::NonFinite);
        }
        let mut dirs = Vec::with_capacity(n);
        for i in 0..n {
            let d = vertices[(i + 1) % n] - vertices[i];
            if d.norm() < MIN_SPEED {
                return Err(Error::BadCurve("repeated polygon vertex"));
            }
            dirs.push(d / d.norm());
        }
        for i in 0..n {
            if (dirs[i].conj() * dirs[(i + 1) % n]).im <= 0.0 {
                return Err(Error::BadCurve("polygon must be strictly convex and counterclockwise"));
            }
        }
        let centroid = vertices.iter().sum::<C64>() / n as f64;
        let circumradius = vertices.iter().map(|v| (v - centroid).norm()).fold(0.0, f64::max);
        if !(rounding >= MIN_ROUNDING_RATIO * circumradius) {
            return Err(Error::BadCurve("corner rounding below 0.05 of the circumradius"));
        }
        let normal = |i: usize| -C64::i() * dirs[i % n];
        let inner: Vec<C64> = (0..n)
            .map(|i| {
                let (n0, n1) = (normal(i + n - 1), normal(i));
                let dot = (n0.conj() * n1).re;
                vertices[i] - (n0 + n1) * (rounding / (1.0 + dot))
            })
            .collect();
        let mut seg_len = Vec::with_capacity(n);
        let mut arc_len = Vec::with_capacity(n);
        for i in 0..n {
            let len = (dirs[i].conj() * (inner[(i + 1) % n] - inner[i])).re;
            if len <= MIN_SPEED {
                return Err(Error::BadCurve("rounding too large for a polygon edge"));
            }
            seg_len.push(len);
            let turn = (dirs[i].conj() * dirs[(i + 1) % n]).arg();
            arc_len.push(rounding * turn);
        }
        let perimeter = seg_len.iter().sum::<f64>() + arc_len.iter().sum::<f64>();
        Ok(Self {
            vertices,
            rounding,
            inner,
            dirs,
            seg_len,
            arc_len,
            perimeter,
        })
    }

    pub fn vertices(&self) -> &[C64] {
        &self.vertices
    }

    pub fn rounding(&self) -> f64 {
        self.rounding
    }

    /// Centers of the corner arcs.
    pub fn inner_vertices(&self) -> &[C64] {
        &self.inner
    }

    pub fn perimeter(&self) -> f64 {
        self.perimeter
    }

    /// Point, unit tangent and curvature at arclength `s ∈ [0, perimeter)`.
    /// Lengths of the analytic pieces in boundary order: side 0, arc 0,
    /// side 1, arc 1, ...
    pub fn piece_lengths(&self) -> Vec<f64> {
        self.seg_len.iter().zip(&self.arc_len).flat_map(|(&a, &b)| [a, b]).collect()
    }

    fn at_arclength(&self, s: f64) -> (C64, C64, f64) {
        let n = self.inner.len();
        let mut s = Euclid::rem_euclid(&s, &self.perimeter);
        for i in 0..n {
            let d = self.dirs[i];
            let nrm = -C64::i() * d;
            if s <= self.seg_len[i] {
                return (self.inner[i] + nrm * self.rounding + d * s, d, 0.0);
            }
            s -= self.seg_len[i];
            if s <= self.arc_len[i] || i == n - 1 {
                let phi = nrm.arg() + s / self.rounding;
                let e = C64::from_polar(1.0, phi);
                return (self.inner[(i + 1) % n] + e * self.rounding, C64::i() * e, 1.0 / self.rounding);
            }
            s -= self.arc_len[i];
        }
        unreachable!("arclength wrapped into range")
    }
}

impl BoundaryCurve {
    pub fn disc(center: C64, radius: f64) -> Result<Self> {
        let c = Self::Disc { center, radius };
        c.validate()?;
        Ok(c)
    }

    pub fn ellipse(center: C64, a: f64, b: f64) -> Result<Self> {
        let c = Self::Ellipse { center, a, b };
        c.validate()?;
        Ok(c)
    }

    pub fn smoothed_polygon(vertices: Vec<C64>, rounding: f64) -> Result<Self> {
        Ok(Self::SmoothedPolygon(SmoothedPolygon::new(vertices, rounding)?))
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |z: C64| z.re.is_finite() && z.im.is_finite();
        match *self {
            Self::Disc { center, radius } => {
                if !finite(center) || !radius.is_finite() {
                    return Err(Error::NonFinite);
                }
                if !(radius > MIN_SPEED) {
                    return Err(Error::BadCurve("disc radius must be positive"));
                }
            }
            Self::Ellipse { center, a, b } => {
                if !finite(center) || !a.is_finite() || !b.is_finite() {
                    return Err(Error::NonFinite);
                }
                if !(a > MIN_SPEED && b > MIN_SPEED) {
                    return Err(Error::BadCurve("ellipse semi-axes must be positive"));
                }
            }
            // validated on construction
            Self::SmoothedPolygon(_) => {}
        }
        Ok(())
    }

    pub fn point(&self, t: f64) -> C64 {
        match self {
            Self::Disc { center, radius } => center + C64::from_polar(*radius, t),
            Self::Ellipse { center, a, b } => {
                let (s, c) = t.sin_cos();
                center + C64::new(a * c, b * s)
            }
            Self::SmoothedPolygon(p) => p.at_arclength(t * p.perimeter / TAU).0,
        }
    }

    /// `γ′(t)`.
    pub fn derivative(&self, t: f64) -> C64 {
        match self {
            Self::Disc { radius, .. } => C64::i() * C64::from_polar(*radius, t),
            Self::Ellipse { a, b, .. } => {
                let (s, c) = t.sin_cos();
                C64::new(-a * s, b * c)
            }
            Self::SmoothedPolygon(p) => p.at_arclength(t * p.perimeter / TAU).1 * (p.perimeter / TAU),
        }
    }

    pub fn curvature(&self, t: f64) -> f64 {
        match self {
            Self::Disc { radius, .. } => 1.0 / radius,
            Self::Ellipse { a, b, .. } => {
                let speed = self.derivative(t).norm();
                a * b / (speed * speed * speed)
            }
            Self::SmoothedPolygon(p) => p.at_arclength(t * p.perimeter / TAU).2,
        }
    }

    pub fn perimeter(&self) -> f64 {
        match self {
            Self::Disc { radius, .. } => TAU * radius,
            // trapezoid rule is geometrically convergent for this periodic integrand
            Self::Ellipse { .. } => {
                let n = 2048;
                (0..n)
                    .map(|j| self.derivative(TAU * j as f64 / n as f64).norm())
                    .sum::<f64>()
                    * (TAU / n as f64)
            }
            Self::SmoothedPolygon(p) => p.perimeter,
        }
    }

    /// Exact support value and boundary witness in direction `θ`.
    pub fn support(&self, theta: f64) -> (f64, C64) {
        let e = unit_conj(theta);
        let dir = e.conj();
        match self {
            Self::Disc { center, radius } => ((e * center).re + radius, center + dir * radius),
            Self::Ellipse { center, a, b } => {
                let (s, c) = theta.sin_cos();
                let h0 = (a * a * c * c + b * b * s * s).sqrt();
                let w = C64::new(a * a * c, b * b * s) / h0;
                ((e * center).re + h0, center + w)
            }
            Self::SmoothedPolygon(p) => {
                let mut best = (f64::NEG_INFINITY, p.inner[0]);
                for &v in &p.inner {
                    let h = (e * v).re;
                    if h > best.0 {
                        best = (h, v);
                    }
                }
                (best.0 + p.rounding, best.1 + dir * p.rounding)
            }
        }
    }

    pub fn to_region(&self, m: usize) -> Result<ConvexRegion> {
        ConvexRegion::from_support_fn(m, |t| self.support(t))
    }

    pub fn center(&self) -> C64 {
        match self {
            Self::Disc { center, .. } | Self::Ellipse { center, .. } => *center,
            Self::SmoothedPolygon(p) => p.vertices.iter().sum::<C64>() / p.vertices.len() as f64,
        }
    }

    /// Largest distance from [`center`](Self::center) to the curve.
    pub fn circumradius(&self) -> f64 {
        match self {
            Self::Disc { radius, .. } => *radius,
            Self::Ellipse { a, b, .. } => a.max(*b),
            Self::SmoothedPolygon(p) => {
                let c = self.center();
                p.inner.iter().map(|v| (v - c).norm()).fold(0.0, f64::max) + p.rounding
            }
        }
    }

    /// Signed distance from `z` to the curve, positive inside:
    /// `min_θ (h(θ) − Re(e^{−iθ} z))`.
    pub fn interior_distance(&self, z: C64) -> f64 {
        if let Self::Disc { center, radius } = self {
            return radius - (z - center).norm();
        }
        let gap = |t: f64| self.support(t).0 - (unit_conj(t) * z).re;
        let n = 720;
        let step = TAU / n as f64;
        let (k, _) = (0..n)
            .map(|k| (k, gap(k as f64 * step)))
            .fold((0, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b });
        let t0 = k as f64 * step;
        let (_, neg) = golden_max(|t| -gap(t), t0 - step, t0 + step, 1e-10);
        -neg
    }

    /// `true` iff `z` lies inside with distance at least `margin` from the curve.
    pub fn contains(&self, z: C64, margin: f64) -> bool {
        self.interior_distance(z) >= margin
    }
}
