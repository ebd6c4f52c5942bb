//! Catalog model domains for `R(X)`: characters, Poisson representing
//! measures, lower bounds on the Gleason distance, part and antisymmetry
//! checks, and the decomposition of boundary measures over parts.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

#[allow(unused_imports)] // float methods come from std when it is linked
use num_traits::{Float, One, Zero};

use crate::curve::BoundaryCurve;
use crate::decomposition::MeasureProjection;
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::np::{BoundaryGrid, MeasureVector};
use crate::random::TrialRng;
use crate::rational::{Pole, RationalFunction};
use crate::sampler::{BoundaryLoop, RegionSampler};

/// Largest polynomial degree accepted by the distance search.
pub const MAX_DEGREE: usize = 16;
/// Default samples per boundary circle of the Shilov sampler.
pub const SHILOV_SAMPLES: usize = 256;
/// Points closer than this fraction of the radius to the circle have no
/// Poisson measure.
pub const POISSON_MARGIN: f64 = 1e-3;
/// Slack for the domination inequalities of [`mutual_continuity_check`].
pub const DOMINATION_SLACK: f64 = 1e-12;

/// Per-part catalog metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct PartMeta {
    pub label: &'static str,
    /// The part's interior is a single Gleason part.
    pub is_gleason_part_interior: bool,
    pub area: f64,
}

#[derive(Clone, Debug)]
pub struct ModelDomain {
    pub id: &'static str,
    /// Boundary curves with a hole flag.
    pub curves: Vec<(BoundaryCurve, bool)>,
    /// Part index of each curve. Parts double as antisymmetry sets.
    pub curve_part: Vec<usize>,
    pub parts: Vec<PartMeta>,
    pub admissible_poles: Vec<C64>,
    pub choquet_note: &'static str,
}

impl ModelDomain {
    pub const IDS: [&'static str; 4] = ["disc", "two_discs", "annulus", "ellipse"];

    pub fn catalog(id: &str) -> Result<Self> {
        match id {
            "disc" => Ok(Self::disc()),
            "two_discs" => Ok(Self::two_discs()),
            "annulus" => Ok(Self::annulus()),
            "ellipse" => Ok(Self::ellipse()),
            _ => Err(Error::InvalidArgument("unknown catalog domain")),
        }
    }

    /// The closed unit disc.
    pub fn disc() -> Self {
        Self {
            id: "disc",
            curves: vec![(circle(C64::zero(), 1.0), false)],
            curve_part: vec![0],
            parts: vec![PartMeta {
                label: "open unit disc",
                is_gleason_part_interior: true,
                area: PI,
            }],
            admissible_poles: Vec::new(),
            choquet_note: "Choquet boundary is the unit circle",
        }
    }

    /// Unit discs centered at 0 and 5.
    pub fn two_discs() -> Self {
        Self {
            id: "two_discs",
            curves: vec![
                (circle(C64::zero(), 1.0), false),
                (circle(C64::new(5.0, 0.0), 1.0), false),
            ],
            curve_part: vec![0, 1],
            parts: vec![
                PartMeta {
                    label: "open disc at 0",
                    is_gleason_part_interior: true,
                    area: PI,
                },
                PartMeta {
                    label: "open disc at 5",
                    is_gleason_part_interior: true,
                    area: PI,
                },
            ],
            admissible_poles: vec![C64::new(2.5, 1.5), C64::new(2.5, -1.5)],
            choquet_note: "Choquet boundary is the union of both circles",
        }
    }

    /// `1/2 ≤ |z| ≤ 1`, with Laurent terms through a pole at the center.
    pub fn annulus() -> Self {
        Self {
            id: "annulus",
            curves: vec![(circle(C64::zero(), 1.0), false), (circle(C64::zero(), 0.5), true)],
            curve_part: vec![0, 0],
            parts: vec![PartMeta {
                label: "open annulus",
                is_gleason_part_interior: true,
                area: 0.75 * PI,
            }],
            admissible_poles: vec![C64::zero()],
            choquet_note: "Choquet boundary is the union of both circles",
        }
    }

    /// The ellipse with semi-axes 2 and 1 centered at 0.
    pub fn ellipse() -> Self {
        Self {
            id: "ellipse",
            curves: vec![(BoundaryCurve::Ellipse { center: C64::zero(), a: 2.0, b: 1.0 }, false)],
            curve_part: vec![0],
            parts: vec![PartMeta {
                label: "open ellipse",
                is_gleason_part_interior: true,
                area: 2.0 * PI,
            }],
            admissible_poles: vec![C64::new(3.0, 0.0), C64::new(-3.0, 0.0), C64::new(0.0, 2.0), C64::new(0.0, -2.0)],
            choquet_note: "Choquet boundary is the ellipse",
        }
    }

    /// Checks the catalog invariants: curves valid, parts pairwise separated
    /// by at least a tenth of the larger circumradius, poles off `X`.
    pub fn validate(&self) -> Result<()> {
        if self.curves.len() != self.curve_part.len() || self.curve_part.iter().any(|&p| p >= self.parts.len()) {
            return Err(Error::InvalidArgument("curve-part map does not match the curves"));
        }
        for (c, _) in &self.curves {
            c.validate()?;
        }
        let outer: Vec<&BoundaryCurve> = self.curves.iter().filter(|c| !c.1).map(|c| &c.0).collect();
        for (i, a) in outer.iter().enumerate() {
            for b in &outer[i + 1..] {
                let gap = (a.center() - b.center()).norm() - a.circumradius() - b.circumradius();
                if gap < 0.1 * a.circumradius().max(b.circumradius()) {
                    return Err(Error::InvalidArgument("parts are too close"));
                }
            }
        }
        if self.admissible_poles.iter().any(|&p| self.contains(p)) {
            return Err(Error::InvalidArgument("admissible pole inside the domain"));
        }
        Ok(())
    }

    /// Part of the closed domain containing `x`.
    pub fn part_of(&self, x: C64) -> Option<usize> {
        (0..self.parts.len()).find(|&p| {
            let mut inside = false;
            for ((c, hole), &cp) in self.curves.iter().zip(&self.curve_part) {
                if cp != p {
                    continue;
                }
                let d = c.interior_distance(x);
                if *hole && d > 0.0 {
                    return false;
                }
                if !*hole && d >= 0.0 {
                    inside = true;
                }
            }
            inside
        })
    }

    pub fn contains(&self, x: C64) -> bool {
        self.part_of(x).is_some()
    }

    /// Samples on every boundary circle, `per_loop` each.
    pub fn shilov_sampler(&self, per_loop: usize) -> Result<RegionSampler> {
        RegionSampler::new(self.curves.iter().map(|(c, _)| BoundaryLoop::Curve(c.clone())).collect(), per_loop)
    }

    /// Quadrature grid on all boundary curves, holes reversed.
    pub fn grid(&self, per_component: usize) -> Result<BoundaryGrid> {
        BoundaryGrid::discretize_boundary(&self.curves, per_component)
    }

    /// Grid components (curve indices) belonging to `part`.
    pub fn part_curves(&self, part: usize) -> Vec<usize> {
        (0..self.curves.len()).filter(|&k| self.curve_part[k] == part).collect()
    }

    /// Boundary samples of `part` plus an interior grid, radially contracted
    /// toward the outer curve's center.
    pub fn part_samples(&self, part: usize, per_curve: usize) -> Vec<C64> {
        let mut out = Vec::new();
        for ((c, hole), &cp) in self.curves.iter().zip(&self.curve_part) {
            if cp != part {
                continue;
            }
            out.extend((0..per_curve).map(|j| c.point(TAU * j as f64 / per_curve as f64)));
            if !*hole {
                let ctr = c.center();
                if self.part_of(ctr) == Some(part) {
                    out.push(ctr);
                }
                for ring in 1..5 {
                    let lambda = ring as f64 / 5.0;
                    for j in 0..per_curve / 2 {
                        let z = ctr + (c.point(TAU * (j as f64 + 0.5) / (per_curve / 2) as f64) - ctr) * lambda;
                        if self.part_of(z) == Some(part) {
                            out.push(z);
                        }
                    }
                }
            }
        }
        out
    }

    /// Shilov samples plus the interior grids of every part.
    pub fn domain_samples(&self, per_curve: usize) -> Vec<C64> {
        let mut out = Vec::new();
        for p in 0..self.parts.len() {
            out.extend(self.part_samples(p, per_curve));
        }
        out
    }

    /// Poisson measure of `x` on the Shilov nodes, supported on the circle of
    /// the disc containing `x`.
    pub fn representing_measure(&self, x: C64, per_loop: usize) -> Result<RepresentingMeasure> {
        let sampler = self.shilov_sampler(per_loop)?;
        let part = self.part_of(x).ok_or(Error::RegionViolation)?;
        let curves = self.part_curves(part);
        let k = match (curves.as_slice(), &self.curves[curves[0]].0) {
            ([k], BoundaryCurve::Disc { .. }) => *k,
            _ => return Err(Error::InvalidArgument("representing measures need a disc part")),
        };
        let BoundaryCurve::Disc { center, radius } = self.curves[k].0 else {
            unreachable!()
        };
        let local = poisson_representing_measure(x, center, radius, per_loop)?;
        let mut values = vec![0.0; sampler.points().len()];
        values[k * per_loop..(k + 1) * per_loop].copy_from_slice(&local.values);
        Ok(RepresentingMeasure {
            nodes: sampler.points().to_vec(),
            values,
            point: x,
        })
    }
}

fn circle(center: C64, radius: f64) -> BoundaryCurve {
    BoundaryCurve::Disc { center, radius }
}

/// Point evaluation `χ_x(u) = u(x)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Character {
    point: C64,
}

impl Character {
    pub fn new(domain: &ModelDomain, x: C64) -> Result<Self> {
        if !domain.contains(x) {
            return Err(Error::RegionViolation);
        }
        Ok(Self { point: x })
    }

    pub fn point(&self) -> C64 {
        self.point
    }

    pub fn eval(&self, u: &RationalFunction) -> Result<C64> {
        u.eval(self.point)
    }
}

/// Nonnegative node weights representing evaluation at `point`.
#[derive(Clone, Debug, PartialEq)]
pub struct RepresentingMeasure {
    pub nodes: Vec<C64>,
    pub values: Vec<f64>,
    pub point: C64,
}

impl RepresentingMeasure {
    pub fn total_mass(&self) -> f64 {
        self.values.iter().sum()
    }

    /// `Σ u(ζ_j) ν_j`.
    pub fn integrate(&self, u: &RationalFunction) -> Result<C64> {
        let mut acc = C64::zero();
        for (z, v) in self.nodes.iter().zip(&self.values) {
            if *v != 0.0 {
                acc += u.eval(*z)? * v;
            }
        }
        Ok(acc)
    }
}

/// `ν_j = (R² − |x − c|²) / |ζ_j − x|² · 1/M` at `M` equispaced nodes.
pub fn poisson_representing_measure(x: C64, center: C64, radius: f64, m: usize) -> Result<RepresentingMeasure> {
    if m == 0 {
        return Err(Error::InvalidArgument("measure needs at least one node"));
    }
    let r = (x - center).norm();
    if !(r < radius * (1.0 - POISSON_MARGIN)) {
        return Err(Error::TooCloseToBoundary);
    }
    let nodes: Vec<C64> = (0..m)
        .map(|j| center + C64::from_polar(radius, TAU * j as f64 / m as f64))
        .collect();
    let values = nodes
        .iter()
        .map(|z| (radius * radius - r * r) / (z - x).norm_sqr() / m as f64)
        .collect();
    Ok(RepresentingMeasure { nodes, values, point: x })
}

/// `true` iff `c ν₂ ≤ ν₁` and `c ν₁ ≤ ν₂` node by node.
pub fn mutual_continuity_check(nu1: &RepresentingMeasure, nu2: &RepresentingMeasure, c: f64) -> Result<bool> {
    if nu1.nodes != nu2.nodes {
        return Err(Error::GridMismatch);
    }
    Ok(nu1
        .values
        .iter()
        .zip(&nu2.values)
        .all(|(&a, &b)| c * b <= a + DOMINATION_SLACK && c * a <= b + DOMINATION_SLACK))
}

#[derive(Clone, Debug, PartialEq)]
pub struct GleasonConfig {
    pub degree: usize,
    pub phases: usize,
    pub iterations: usize,
    pub restarts: usize,
    pub seed: u64,
    pub per_loop: usize,
}

impl Default for GleasonConfig {
    fn default() -> Self {
        Self {
            degree: 12,
            phases: 32,
            iterations: 400,
            restarts: 20,
            seed: 0,
            per_loop: SHILOV_SAMPLES,
        }
    }
}

/// `Σ a_k φ_k` over the basis `w^k` (`w = (z − c)/R`, `k ≤ degree`) and
/// `(s_i/(z − π_i))^k` (`1 ≤ k ≤ pole_order`) for each admissible pole.
#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub center: C64,
    pub scale: f64,
    /// Pole locations with their scales `s_i`.
    pub poles: Vec<(C64, f64)>,
    pub degree: usize,
    pub pole_order: usize,
    pub coeffs: Vec<C64>,
}

impl Certificate {
    fn basis(center: C64, scale: f64, poles: &[(C64, f64)], degree: usize, pole_order: usize, z: C64) -> Vec<C64> {
        let mut out = Vec::with_capacity(degree + 1 + poles.len() * pole_order);
        let w = (z - center) / scale;
        let mut p = C64::one();
        for _ in 0..=degree {
            out.push(p);
            p *= w;
        }
        for &(pi, s) in poles {
            let q = C64::new(s, 0.0) / (z - pi);
            let mut p = q;
            for _ in 0..pole_order {
                out.push(p);
                p *= q;
            }
        }
        out
    }

    fn basis_at(&self, z: C64) -> Vec<C64> {
        Self::basis(self.center, self.scale, &self.poles, self.degree, self.pole_order, z)
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.basis_at(z).iter().zip(&self.coeffs).map(|(b, a)| b * a).sum()
    }

    /// Coefficients in the basis of a larger budget.
    fn embed(&self, degree: usize, pole_order: usize) -> Vec<C64> {
        let mut out = vec![C64::zero(); degree + 1 + self.poles.len() * pole_order];
        let head = self.degree.min(degree) + 1;
        out[..head].copy_from_slice(&self.coeffs[..head]);
        for i in 0..self.poles.len() {
            for k in 0..self.pole_order.min(pole_order) {
                out[degree + 1 + i * pole_order + k] = self.coeffs[self.degree + 1 + i * self.pole_order + k];
            }
        }
        out
    }

    /// Expands to `p(z) / Π (z − π_i)^{pole_order}`.
    pub fn to_rational(&self) -> Result<RationalFunction> {
        let q = self.pole_order;
        let lin = |a: C64, b: C64| vec![a, b];
        let mut den = vec![C64::one()];
        for &(pi, _) in &self.poles {
            for _ in 0..q {
                den = poly_mul(&den, &lin(-pi, C64::one()));
            }
        }
        // polynomial part in z
        let w = lin(-self.center / self.scale, C64::new(1.0 / self.scale, 0.0));
        let mut poly = vec![C64::zero()];
        let mut pw = vec![C64::one()];
        for k in 0..=self.degree {
            poly = poly_add(&poly, &pw.iter().map(|b| b * self.coeffs[k]).collect::<Vec<_>>());
            pw = poly_mul(&pw, &w);
        }
        let mut num = poly_mul(&poly, &den);
        for (i, &(pi, s)) in self.poles.iter().enumerate() {
            let mut others = vec![C64::one()];
            for (j, &(pj, _)) in self.poles.iter().enumerate() {
                if j != i {
                    for _ in 0..q {
                        others = poly_mul(&others, &lin(-pj, C64::one()));
                    }
                }
            }
            // s^k (z − π)^{q−k}
            for k in 1..=q {
                let mut term = vec![C64::new(s.powi(k as i32), 0.0) * self.coeffs[self.degree + i * q + k]];
                for _ in 0..q - k {
                    term = poly_mul(&term, &lin(-pi, C64::one()));
                }
                num = poly_add(&num, &poly_mul(&term, &others));
            }
        }
        let poles = if q == 0 {
            Vec::new()
        } else {
            self.poles
                .iter()
                .map(|&(location, _)| Pole {
                    location,
                    multiplicity: q as u32,
                })
                .collect()
        };
        RationalFunction::new(num, poles)
    }
}

fn poly_mul(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_add(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::zero(); a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] += y;
    }
    out
}

#[derive(Clone, Debug)]
pub struct DistanceEstimate {
    /// Lower bound `|u(x₁) − u(x₂)|` with `sup |u| = 1` on the Shilov sampler.
    pub d_hat: f64,
    /// Rotated so that `u(x₁) − u(x₂) = d̂`.
    pub certificate: Certificate,
    /// `sup |u|` on the 4× denser verification sampler.
    pub verification_sup: f64,
    pub degree: usize,
}

/// Pole order used with polynomial degree `d`.
pub fn pole_order_for(degree: usize) -> usize {
    degree.div_ceil(2).max(1)
}

/// Lower bound on the Gleason distance `‖χ_{x₁} − χ_{x₂}‖`.
///
/// For each phase `e^{iθ}` of a symmetric grid (phase `k + P/2` is exactly the
/// negative of phase `k`), maximizes `Re e^{iθ}(u(x₁) − u(x₂)) / ‖u‖_p` by
/// normalized subgradient steps, with the sampled `p`-norm sharpened from 8
/// to 512 and the iterate divided by its sampled sup whenever that exceeds 1.
/// The best iterate is rescaled by the refined sampled sup, so it is feasible.
pub fn gleason_distance_lb(x1: C64, x2: C64, domain: &ModelDomain, cfg: &GleasonConfig) -> Result<DistanceEstimate> {
    gleason_distance_lb_from(x1, x2, domain, cfg, None)
}

/// As [`gleason_distance_lb`], seeded with an earlier certificate; the result
/// is never worse than the seed.
pub fn gleason_distance_lb_from(
    x1: C64,
    x2: C64,
    domain: &ModelDomain,
    cfg: &GleasonConfig,
    warm: Option<&Certificate>,
) -> Result<DistanceEstimate> {
    let search = GleasonSearch::new(x1, x2, domain, cfg, warm)?;
    let runs = (0..search.run_count()).map(|i| search.run(i)).collect();
    search.finish(runs)
}

/// One optimizer run: its best score and coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchRun {
    pub score: f64,
    pub coeffs: Vec<C64>,
}

/// Prepared distance search whose runs (phase × restart) are independent and
/// can be executed in any order.
#[derive(Clone, Debug)]
pub struct GleasonSearch {
    x1: C64,
    x2: C64,
    degree: usize,
    iterations: usize,
    sampler: RegionSampler,
    template: Certificate,
    rows: Vec<Vec<C64>>,
    diff: Vec<C64>,
    phases: Vec<C64>,
    inits: Vec<Vec<C64>>,
    warm: Option<Certificate>,
}

impl GleasonSearch {
    pub fn new(x1: C64, x2: C64, domain: &ModelDomain, cfg: &GleasonConfig, warm: Option<&Certificate>) -> Result<Self> {
        if cfg.degree > MAX_DEGREE {
            return Err(Error::InvalidArgument("degree exceeds 16"));
        }
        if cfg.phases < 2 || !cfg.phases.is_multiple_of(2) {
            return Err(Error::InvalidArgument("phase grid must be even"));
        }
        if !domain.contains(x1) || !domain.contains(x2) {
            return Err(Error::RegionViolation);
        }
        let sampler = domain.shilov_sampler(cfg.per_loop)?;
        let region = sampler.region();
        let (center, scale) = (region.center(), region.circumradius().max(1e-12));
        let poles: Vec<(C64, f64)> = domain
            .admissible_poles
            .iter()
            .map(|&p| (p, sampler.points().iter().map(|z| (z - p).norm()).fold(f64::INFINITY, f64::min)))
            .collect();
        let pole_order = if poles.is_empty() { 0 } else { pole_order_for(cfg.degree) };
        let nb = cfg.degree + 1 + poles.len() * pole_order;
        let template = Certificate {
            center,
            scale,
            poles,
            degree: cfg.degree,
            pole_order,
            coeffs: vec![C64::zero(); nb],
        };
        let rows: Vec<Vec<C64>> = sampler.points().iter().map(|&z| template.basis_at(z)).collect();
        let (b1, b2) = (template.basis_at(x1), template.basis_at(x2));
        let diff: Vec<C64> = b1.iter().zip(&b2).map(|(a, b)| a - b).collect();

        let half = cfg.phases / 2;
        let first: Vec<C64> = (0..half).map(|k| C64::from_polar(1.0, TAU * k as f64 / cfg.phases as f64)).collect();
        let phases: Vec<C64> = first.iter().copied().chain(first.iter().map(|e| -e)).collect();

        let inits = (0..cfg.restarts.max(1))
            .map(|r| {
                if r == 0 {
                    match warm {
                        Some(c) => c.embed(cfg.degree, pole_order),
                        None => {
                            let mut a = vec![C64::zero(); nb];
                            a[1.min(nb - 1)] = C64::one();
                            a
                        }
                    }
                } else {
                    let mut rng = TrialRng::new(cfg.seed, r as u64);
                    (0..nb).map(|k| rng.complex_gaussian() / (1.0 + k as f64)).collect()
                }
            })
            .collect();
        Ok(Self {
            x1,
            x2,
            degree: cfg.degree,
            iterations: cfg.iterations,
            sampler,
            template,
            rows,
            diff,
            phases,
            inits,
            warm: warm.cloned(),
        })
    }

    /// Number of runs; zero when the two points cannot be told apart.
    pub fn run_count(&self) -> usize {
        if self.diff.iter().all(|d| d.is_zero()) {
            0
        } else {
            self.phases.len() * self.inits.len()
        }
    }

    /// Run `i`: phase `i / restarts`, restart `i % restarts`. The returned
    /// coefficients are rotated so that `u(x₁) − u(x₂)` has real part `score`.
    pub fn run(&self, i: usize) -> SearchRun {
        let e = self.phases[i / self.inits.len()];
        let h: Vec<C64> = self.diff.iter().map(|d| e * d).collect();
        let (score, a) = ascend(&self.rows, &h, self.inits[i % self.inits.len()].clone(), self.iterations);
        SearchRun {
            score,
            coeffs: a.iter().map(|c| c * e).collect(),
        }
    }

    /// Reduces runs by index (first strict maximum wins) and certifies the
    /// winner.
    pub fn finish(&self, runs: Vec<SearchRun>) -> Result<DistanceEstimate> {
        let mut cert = self.template.clone();
        cert.coeffs[0] = C64::one();
        let mut best = 0.0;
        for r in runs {
            if r.score > best {
                best = r.score;
                cert.coeffs = r.coeffs;
            }
        }
        if best > 0.0 {
            let sup = self.sampler.sup(|z| Ok(cert.eval(z).norm()))?;
            if sup > 0.0 {
                cert.coeffs.iter_mut().for_each(|c| *c /= sup);
            }
        }
        if let Some(w) = &self.warm {
            let wd = (w.eval(self.x1) - w.eval(self.x2)).norm();
            if wd > (cert.eval(self.x1) - cert.eval(self.x2)).norm() {
                cert.coeffs = w.embed(cert.degree, cert.pole_order);
            }
        }
        let d_hat = (cert.eval(self.x1) - cert.eval(self.x2)).norm();
        let verification_sup = self.sampler.denser(4)?.sup(|z| Ok(cert.eval(z).norm()))?;
        Ok(DistanceEstimate {
            d_hat,
            certificate: cert,
            verification_sup,
            degree: self.degree,
        })
    }
}

/// Runs the distance search over increasing degrees, each rung warm-started
/// from the previous certificate.
pub fn gleason_degree_ladder(
    x1: C64,
    x2: C64,
    domain: &ModelDomain,
    cfg: &GleasonConfig,
    degrees: &[usize],
) -> Result<Vec<DistanceEstimate>> {
    gleason_degree_ladder_with(x1, x2, domain, cfg, degrees, |s| {
        (0..s.run_count()).map(|i| s.run(i)).collect()
    })
}

/// [`gleason_degree_ladder`] with a caller-supplied executor for the runs of
/// each rung; the executor must return them in index order.
pub fn gleason_degree_ladder_with(
    x1: C64,
    x2: C64,
    domain: &ModelDomain,
    cfg: &GleasonConfig,
    degrees: &[usize],
    exec: impl Fn(&GleasonSearch) -> Vec<SearchRun>,
) -> Result<Vec<DistanceEstimate>> {
    let mut out: Vec<DistanceEstimate> = Vec::with_capacity(degrees.len());
    for &d in degrees {
        let rung = GleasonConfig { degree: d, ..cfg.clone() };
        let search = GleasonSearch::new(x1, x2, domain, &rung, out.last().map(|e| &e.certificate))?;
        out.push(search.finish(exec(&search))?);
    }
    Ok(out)
}

/// Normalized subgradient ascent of `Re⟨h, a⟩ / ‖Ba‖_p`; returns the best
/// `Re⟨h, a⟩ / ‖Ba‖_∞` seen and its coefficients scaled to sampled sup 1.
fn ascend(rows: &[Vec<C64>], h: &[C64], mut a: Vec<C64>, iterations: usize) -> (f64, Vec<C64>) {
    let nb = h.len();
    let n = rows.len() as f64;
    let value = |a: &[C64]| h.iter().zip(a).map(|(x, y)| (x * y).re).sum::<f64>();
    let mut best = (f64::NEG_INFINITY, a.clone());
    let mut u = vec![C64::zero(); rows.len()];
    let mut last_gain = 0;
    for t in 0..iterations.max(1) {
        for (us, row) in u.iter_mut().zip(rows) {
            *us = row.iter().zip(&a).map(|(b, c)| b * c).sum();
        }
        let m_inf = u.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if !(m_inf > 0.0) || !m_inf.is_finite() {
            break;
        }
        let v = value(&a);
        let score = v / m_inf;
        if score > best.0 {
            if score > best.0 + 1e-9 * score.abs() {
                last_gain = t;
            }
            best = (score, a.iter().map(|c| c / m_inf).collect());
        } else if t - last_gain > 60 {
            break;
        }
        let (v, m_inf) = if m_inf > 1.0 {
            a.iter_mut().for_each(|c| *c /= m_inf);
            u.iter_mut().for_each(|c| *c /= m_inf);
            (v / m_inf, 1.0)
        } else {
            (v, m_inf)
        };
        let p = 8.0 * 64f64.powf(t as f64 / iterations.max(1) as f64);
        let mut s = 0.0;
        let mut gm = vec![C64::zero(); nb];
        // samples with r^{p−2} < e^{−30} do not affect the gradient
        let r_min = (-30.0 / (p - 2.0)).exp();
        for (us, row) in u.iter().zip(rows) {
            let r = us.norm() / m_inf;
            if r < r_min {
                continue;
            }
            let w = r.powf(p - 2.0);
            s += w * r * r;
            for (g, b) in gm.iter_mut().zip(row) {
                *g += b.conj() * us * w;
            }
        }
        s /= n;
        let mp = m_inf * s.powf(1.0 / p);
        let k = s.powf(1.0 / p - 1.0) / (m_inf * n);
        let grad: Vec<C64> = h
            .iter()
            .zip(&gm)
            .map(|(hk, g)| hk.conj() / mp - g * (k * v / (mp * mp)))
            .collect();
        let gn = grad.iter().map(|g| g.norm_sqr()).sum::<f64>().sqrt();
        let an = a.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(gn > 0.0) {
            break;
        }
        let eta = 0.3 / (1.0 + t as f64).sqrt() * an / gn;
        for (c, g) in a.iter_mut().zip(&grad) {
            *c += g * eta;
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PartRelation {
    Same,
    Different,
    Undecided,
}

/// Verdict from the lower bound alone: a bound near 2 certifies separation,
/// anything below cannot certify sameness.
pub fn same_part_predicate(d_hat: f64, strict_threshold: f64) -> PartRelation {
    if d_hat > 2.0 - strict_threshold {
        PartRelation::Different
    } else {
        PartRelation::Undecided
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PartVerdict {
    pub by_bound: PartRelation,
    /// From catalog metadata, when both points lie in part interiors.
    pub by_catalog: Option<PartRelation>,
}

impl ModelDomain {
    /// Catalog ground truth: interiors of distinct parts are different parts.
    pub fn catalog_relation(&self, x1: C64, x2: C64) -> Option<PartRelation> {
        let interior = |x: C64| {
            let p = self.part_of(x)?;
            let on_edge = self
                .part_curves(p)
                .iter()
                .any(|&k| self.curves[k].0.interior_distance(x).abs() < 1e-12);
            (!on_edge && self.parts[p].is_gleason_part_interior).then_some(p)
        };
        match (interior(x1)?, interior(x2)?) {
            (a, b) if a == b => Some(PartRelation::Same),
            _ => Some(PartRelation::Different),
        }
    }

    pub fn part_verdict(&self, x1: C64, x2: C64, d_hat: f64, strict_threshold: f64) -> PartVerdict {
        PartVerdict {
            by_bound: same_part_predicate(d_hat, strict_threshold),
            by_catalog: self.catalog_relation(x1, x2),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PartDecomposition {
    /// Restriction of `μ` to each part's boundary.
    pub parts: Vec<MeasureVector>,
    /// Mass outside every part; zero for catalog domains.
    pub remainder: MeasureVector,
}

impl PartDecomposition {
    /// `|Σ ‖μ_α‖ + ‖μ₀‖ − ‖μ‖|`.
    pub fn variation_defect(&self, mu: &MeasureVector) -> f64 {
        let sum: f64 = self.parts.iter().map(|p| p.total_variation()).sum::<f64>() + self.remainder.total_variation();
        (sum - mu.total_variation()).abs()
    }

    /// `true` iff no node carries mass in two pieces.
    pub fn mutually_singular(&self) -> bool {
        let n = self.remainder.len();
        (0..n).all(|j| {
            self.parts
                .iter()
                .chain(core::iter::once(&self.remainder))
                .filter(|m| !m.values[j].is_zero())
                .count()
                <= 1
        })
    }
}

/// Splits `μ` on `domain.grid(M)` into per-part restrictions and `μ₀ = 0`.
pub fn measure_part_decomposition(mu: &MeasureVector, domain: &ModelDomain, grid: &BoundaryGrid) -> Result<PartDecomposition> {
    if grid.component_count() != domain.curves.len() || mu.len() != grid.len() {
        return Err(Error::GridMismatch);
    }
    let parts = (0..domain.parts.len())
        .map(|p| MeasureProjection::components(grid, &domain.part_curves(p))?.apply(mu))
        .collect::<Result<Vec<_>>>()?;
    Ok(PartDecomposition {
        parts,
        remainder: MeasureVector::zeros(mu.len()),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Antisymmetry {
    Consistent,
    Violation { max_imag: f64, spread: f64 },
}

/// If `u` is real within `tol` on the samples of an antisymmetry set, it must
/// be constant there within `10·tol`.
pub fn antisymmetry_falsifier(u: &RationalFunction, samples: &[C64], tol: f64) -> Result<Antisymmetry> {
    let vals = samples.iter().map(|&z| u.eval(z)).collect::<Result<Vec<_>>>()?;
    if vals.is_empty() {
        return Ok(Antisymmetry::Consistent);
    }
    let max_imag = vals.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    if max_imag > tol {
        return Ok(Antisymmetry::Consistent);
    }
    let mean = vals.iter().sum::<C64>() / vals.len() as f64;
    let spread = vals.iter().map(|v| (v - mean).norm()).fold(0.0, f64::max);
    Ok(if spread <= 10.0 * tol {
        Antisymmetry::Consistent
    } else {
        Antisymmetry::Violation { max_imag, spread }
    })
}

/// `|u(x) − 1| ≤ tol` and `|u(z)| ≤ 1 − tol/2` at every sample farther than
/// `10·tol` from `x`.
pub fn peak_check(u: &RationalFunction, x: C64, samples: &[C64], tol: f64) -> Result<bool> {
    if (u.eval(x)? - 1.0).norm() > tol {
        return Ok(false);
    }
    for &z in samples {
        if (z - x).norm() > 10.0 * tol && u.eval(z)?.norm() > 1.0 - tol / 2.0 {
            return Ok(false);
        }
    }
    Ok(true)
}
