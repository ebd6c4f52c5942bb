//! Riesz-projection idempotent systems, the orthogonalizing similarity
//! `S = H^{1/2}`, block extraction, and component-restriction projections of
//! boundary measures.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

#[allow(unused_imports)] // float methods come from std when it is linked
use num_traits::{Float, One, Zero};

use crate::convex::{direct_sum, hausdorff, hull_of_union, numrange_boundary, DEFAULT_ANGLES};
use crate::error::{Error, Result};
use crate::kspectral::check_range_inside;
use crate::linalg::{eigenvalues, inverse, matrix_sqrt_hpd, resolvent, spectral_norm, ComplexMatrix, C64};
use crate::np::{BoundaryGrid, MeasureVector};
use crate::random::TrialRng;
use crate::rational::{sup_norm, RationalFunction};
use crate::sampler::RegionSampler;

/// Fewest quadrature nodes on a contour.
pub const MIN_CONTOUR_NODES: usize = 64;
/// Resolvent norms above this on a contour mean it passes through the spectrum.
pub const MAX_RESOLVENT_NORM: f64 = 1e6;
/// Eigenvalues must stay this fraction of the radius away from a contour.
pub const CONTOUR_CLEARANCE: f64 = 0.05;
/// Clusters must be separated by this fraction of `‖T‖`.
pub const CLUSTER_GAP: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Contour {
    pub center: C64,
    pub radius: f64,
    pub nodes: usize,
}

impl Contour {
    pub fn new(center: C64, radius: f64, nodes: usize) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidArgument("contour radius must be positive"));
        }
        if nodes < MIN_CONTOUR_NODES {
            return Err(Error::InvalidArgument("contour needs at least 64 nodes"));
        }
        Ok(Self { center, radius, nodes })
    }

    fn overlaps(&self, other: &Self) -> bool {
        (self.center - other.center).norm() <= self.radius + other.radius
    }
}

/// `Q = (2πi)⁻¹ ∮ (ζ − T)⁻¹ dζ` by the trapezoid rule on the circle.
pub fn riesz_projection(t: &ComplexMatrix, c: &Contour) -> Result<ComplexMatrix> {
    let lo = c.radius * (1.0 - CONTOUR_CLEARANCE);
    let hi = c.radius * (1.0 + CONTOUR_CLEARANCE);
    for ev in eigenvalues(t)? {
        let d = (ev - c.center).norm();
        if d > lo && d < hi {
            return Err(Error::ContourThroughSpectrum);
        }
    }
    let n = t.dim();
    let mut q = ComplexMatrix::zeros(n);
    for j in 0..c.nodes {
        let e = C64::from_polar(1.0, TAU * j as f64 / c.nodes as f64);
        let r = resolvent(t, c.center + e * c.radius).map_err(|_| Error::ContourThroughSpectrum)?;
        if spectral_norm(&r) > MAX_RESOLVENT_NORM {
            return Err(Error::ContourThroughSpectrum);
        }
        q = &q + &r.scale(e * (c.radius / c.nodes as f64));
    }
    Ok(q)
}

/// Number of eigenvalues (with multiplicity) enclosed by the contour.
pub fn contour_count(t: &ComplexMatrix, c: &Contour) -> Result<usize> {
    Ok(riesz_projection(t, c)?.trace().re.round().max(0.0) as usize)
}

/// One contour per eigenvalue cluster. Clusters are the components left after
/// cutting every minimum-spanning-tree edge that is longer than `0.1·‖T‖` and
/// at least half the longest edge; each contour sits a little under halfway
/// across the smallest gap to a neighbouring cluster.
pub fn auto_contours(t: &ComplexMatrix, nodes: usize) -> Result<Vec<Contour>> {
    let ev = eigenvalues(t)?;
    let norm = spectral_norm(t).max(f64::MIN_POSITIVE);
    let link = CLUSTER_GAP * norm;
    let n = ev.len();
    // Prim's algorithm; edges[k] = (node, parent, length)
    let mut in_tree = vec![false; n];
    let mut dist = vec![f64::INFINITY; n];
    let mut parent = vec![0usize; n];
    let mut edges = Vec::with_capacity(n);
    dist[0] = 0.0;
    for step in 0..n {
        let v = (0..n)
            .filter(|&i| !in_tree[i])
            .fold(None, |b: Option<usize>, i| match b {
                Some(j) if dist[j] <= dist[i] => Some(j),
                _ => Some(i),
            })
            .unwrap_or(0);
        in_tree[v] = true;
        if step > 0 {
            edges.push((v, parent[v], dist[v]));
        }
        for w in 0..n {
            let d = (ev[v] - ev[w]).norm();
            if !in_tree[w] && d < dist[w] {
                dist[w] = d;
                parent[w] = v;
            }
        }
    }
    let longest = edges.iter().map(|e| e.2).fold(0.0, f64::max);
    let cut = link.max(0.5 * longest);
    let mut label: Vec<usize> = (0..n).collect();
    loop {
        let mut changed = false;
        for &(a, b, len) in &edges {
            if len < cut && label[a] != label[b] {
                let m = label[a].min(label[b]);
                label[a] = m;
                label[b] = m;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let mut ids: Vec<usize> = label.clone();
    ids.sort_unstable();
    ids.dedup();
    let clusters: Vec<Vec<C64>> = ids
        .iter()
        .map(|&id| (0..n).filter(|&i| label[i] == id).map(|i| ev[i]).collect())
        .collect();
    let geo: Vec<(C64, f64)> = clusters
        .iter()
        .map(|cl| {
            let c = cl.iter().sum::<C64>() / cl.len() as f64;
            (c, cl.iter().map(|z| (z - c).norm()).fold(0.0, f64::max))
        })
        .collect();
    if geo.len() == 1 {
        let (c, r) = geo[0];
        return Ok(vec![Contour::new(c, r + 0.5 * norm.max(1e-3), nodes)?]);
    }
    let mut out = Vec::with_capacity(geo.len());
    for (i, &(c, r_in)) in geo.iter().enumerate() {
        let gap = geo
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &(c2, r2))| (c2 - c).norm() - r_in - r2)
            .fold(f64::INFINITY, f64::min);
        if !(gap >= link) {
            return Err(Error::ContourThroughSpectrum);
        }
        out.push(Contour::new(c, r_in + 0.45 * gap, nodes)?);
    }
    Ok(out)
}

/// Largest residuals of the idempotent-system invariants.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SystemResiduals {
    /// `max ‖Q_α² − Q_α‖`.
    pub idempotent: f64,
    /// `max_{α≠β} ‖Q_α Q_β‖`.
    pub cross: f64,
    /// `max ‖Q_α T − T Q_α‖ / ‖T‖`.
    pub commutation: f64,
}

#[derive(Clone, Debug)]
pub struct IdempotentSystem {
    pub parts: Vec<ComplexMatrix>,
    /// `Q₀ = I − Σ Q_α`.
    pub remainder: ComplexMatrix,
    pub residuals: SystemResiduals,
}

impl IdempotentSystem {
    /// Wraps explicit idempotents and measures the invariants against `T`.
    pub fn from_parts(t: &ComplexMatrix, parts: Vec<ComplexMatrix>) -> Self {
        let n = t.dim();
        let sum = parts.iter().fold(ComplexMatrix::zeros(n), |acc, q| &acc + q);
        let remainder = &ComplexMatrix::identity(n) - &sum;
        let tn = spectral_norm(t).max(f64::MIN_POSITIVE);
        let mut res = SystemResiduals::default();
        for (a, q) in parts.iter().enumerate() {
            res.idempotent = res.idempotent.max((q * q).distance(q));
            res.commutation = res.commutation.max((q * t).distance(&(t * q)) / tn);
            for (b, p) in parts.iter().enumerate() {
                if a != b {
                    res.cross = res.cross.max((q * p).frobenius_norm());
                }
            }
        }
        Self {
            parts,
            remainder,
            residuals: res,
        }
    }

    /// Rank of the remainder, `round(tr Q₀)`.
    pub fn remainder_rank(&self) -> usize {
        self.remainder.trace().re.round().max(0.0) as usize
    }
}

/// Riesz projections for pairwise disjoint contours.
pub fn idempotent_system(t: &ComplexMatrix, contours: &[Contour]) -> Result<IdempotentSystem> {
    for (i, a) in contours.iter().enumerate() {
        if contours[i + 1..].iter().any(|b| a.overlaps(b)) {
            return Err(Error::OverlapError);
        }
    }
    let parts = contours
        .iter()
        .map(|c| riesz_projection(t, c))
        .collect::<Result<Vec<_>>>()?;
    Ok(IdempotentSystem::from_parts(t, parts))
}

#[derive(Clone, Debug)]
pub struct OrthogonalizedSystem {
    /// `S = H^{1/2}`, `H = Σ Q_α*Q_α + Q₀*Q₀`.
    pub similarity: ComplexMatrix,
    pub inverse: ComplexMatrix,
    pub h: ComplexMatrix,
    /// `P_α = S Q_α S⁻¹`.
    pub projections: Vec<ComplexMatrix>,
    pub remainder: ComplexMatrix,
    remainder_rank: usize,
}

impl OrthogonalizedSystem {
    /// `‖S‖·‖S⁻¹‖`.
    pub fn condition_number(&self) -> f64 {
        spectral_norm(&self.similarity) * spectral_norm(&self.inverse)
    }

    /// Largest `‖H Q_α − Q_α* H‖ / ‖H‖` over the parts of `sys`.
    pub fn similarity_identity_residual(&self, sys: &IdempotentSystem) -> f64 {
        let hn = self.h.frobenius_norm();
        sys.parts
            .iter()
            .chain(core::iter::once(&sys.remainder))
            .map(|q| (&self.h * q).distance(&(&q.adjoint() * &self.h)) / hn)
            .fold(0.0, f64::max)
    }

    /// Largest self-adjointness, idempotence, orthogonality and completeness
    /// defect of the projections.
    pub fn projection_residual(&self) -> f64 {
        let n = self.similarity.dim();
        let all: Vec<&ComplexMatrix> = self.projections.iter().chain(core::iter::once(&self.remainder)).collect();
        let mut worst = 0.0f64;
        let mut sum = ComplexMatrix::zeros(n);
        for (a, p) in all.iter().enumerate() {
            worst = worst.max(p.hermitian_defect()).max((*p * *p).distance(p));
            for (b, q) in all.iter().enumerate() {
                if a != b {
                    worst = worst.max((*p * *q).frobenius_norm());
                }
            }
            sum = &sum + p;
        }
        worst.max(sum.distance(&ComplexMatrix::identity(n)))
    }
}

pub fn orthogonalize(sys: &IdempotentSystem) -> Result<OrthogonalizedSystem> {
    let n = sys.remainder.dim();
    let mut h = (&sys.remainder.adjoint() * &sys.remainder).hermitian_part();
    for q in &sys.parts {
        h = &h + &(&q.adjoint() * q);
    }
    let h = h.hermitian_part();
    let s = matrix_sqrt_hpd(&h)?;
    let s_inv = inverse(&s)?;
    let conj = |q: &ComplexMatrix| &(&s * q) * &s_inv;
    let projections = sys.parts.iter().map(conj).collect();
    let remainder = conj(&sys.remainder);
    debug_assert_eq!(s.dim(), n);
    Ok(OrthogonalizedSystem {
        similarity: s,
        inverse: s_inv,
        h,
        projections,
        remainder,
        remainder_rank: sys.remainder_rank(),
    })
}

/// Orthonormal basis of the column space of `p` with `rank` vectors, by
/// Gram–Schmidt with pivoting on residual column norm (ties to lower index).
pub fn range_basis(p: &ComplexMatrix, rank: usize) -> Vec<Vec<C64>> {
    let n = p.dim();
    let mut cols: Vec<Vec<C64>> = (0..n).map(|j| p.column(j)).collect();
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(rank);
    for _ in 0..rank.min(n) {
        let norm = |v: &Vec<C64>| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let (k, len) = cols
            .iter()
            .enumerate()
            .map(|(j, v)| (j, norm(v)))
            .fold((0, -1.0), |b, c| if c.1 > b.1 { c } else { b });
        if len <= 0.0 {
            break;
        }
        let q: Vec<C64> = cols[k].iter().map(|z| z / len).collect();
        for v in cols.iter_mut() {
            for _ in 0..2 {
                let dot: C64 = q.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
                for (x, qi) in v.iter_mut().zip(&q) {
                    *x -= dot * qi;
                }
            }
        }
        basis.push(q);
    }
    basis
}

/// `U* A U` for a basis given as columns.
fn compress(a: &ComplexMatrix, basis: &[Vec<C64>]) -> Result<ComplexMatrix> {
    let k = basis.len();
    let images: Vec<Vec<C64>> = basis.iter().map(|v| a.apply(v)).collect();
    let mut data = Vec::with_capacity(k * k);
    for u in basis {
        for img in &images {
            data.push(u.iter().zip(img).map(|(x, y)| x.conj() * y).sum());
        }
    }
    ComplexMatrix::new(k, data)
}

/// `Σ U B U*` for a basis and a compressed block.
fn embed(n: usize, basis: &[Vec<C64>], b: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(n);
    for (a, ua) in basis.iter().enumerate() {
        for (c, uc) in basis.iter().enumerate() {
            let coef = b[(a, c)];
            if coef.is_zero() {
                continue;
            }
            for i in 0..n {
                for j in 0..n {
                    out[(i, j)] += ua[i] * coef * uc[j].conj();
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct Decomposition {
    /// Blocks of the parts, then the remainder block if it is nonzero.
    pub blocks: Vec<ComplexMatrix>,
    pub bases: Vec<Vec<Vec<C64>>>,
    /// `‖S T S⁻¹ − Σ U_α T_α U_α*‖_F`.
    pub residual: f64,
    /// `S T S⁻¹`.
    pub transformed: ComplexMatrix,
}

impl Decomposition {
    /// `Σ U_α B_α U_α*` for blocks given in the same order as [`blocks`](Self::blocks).
    pub fn assemble(&self, blocks: &[ComplexMatrix]) -> ComplexMatrix {
        let n = self.transformed.dim();
        self.bases
            .iter()
            .zip(blocks)
            .fold(ComplexMatrix::zeros(n), |acc, (u, b)| &acc + &embed(n, u, b))
    }
}

pub fn decompose_operator(t: &ComplexMatrix, osys: &OrthogonalizedSystem) -> Result<Decomposition> {
    let transformed = &(&osys.similarity * t) * &osys.inverse;
    let mut bases = Vec::new();
    for p in &osys.projections {
        let rank = p.trace().re.round().max(0.0) as usize;
        bases.push(range_basis(p, rank));
    }
    if osys.remainder_rank > 0 {
        bases.push(range_basis(&osys.remainder, osys.remainder_rank));
    }
    let blocks = bases
        .iter()
        .filter(|b| !b.is_empty())
        .map(|b| compress(&transformed, b))
        .collect::<Result<Vec<_>>>()?;
    bases.retain(|b| !b.is_empty());
    let mut d = Decomposition {
        blocks,
        bases,
        residual: 0.0,
        transformed,
    };
    d.residual = d.assemble(&d.blocks).distance(&d.transformed);
    Ok(d)
}

/// Hausdorff distance between `W(⊕ blocks)` and the hull of the block ranges.
pub fn verify_block_ranges(blocks: &[ComplexMatrix]) -> Result<f64> {
    let first = blocks.first().ok_or(Error::InvalidArgument("no blocks"))?;
    let mut sum = first.clone();
    let mut hull = numrange_boundary(first, DEFAULT_ANGLES)?;
    for b in &blocks[1..] {
        sum = direct_sum(&sum, b)?;
        hull = hull_of_union(&hull, &numrange_boundary(b, DEFAULT_ANGLES)?)?;
    }
    hausdorff(&numrange_boundary(&sum, DEFAULT_ANGLES)?, &hull)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityConfig {
    pub restarts: usize,
    pub steps: usize,
    pub seed: u64,
    /// Random polynomials added to the fixed trial battery.
    pub random_trials: usize,
}

impl Default for SimilarityConfig {
    fn default() -> Self {
        Self {
            restarts: 100,
            steps: 200,
            seed: 0,
            random_trials: 20,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SimilarityResult {
    pub similarity: ComplexMatrix,
    /// Largest trial ratio of `S⁻¹ T S`.
    pub ratio: f64,
}

/// Trial battery: `1`, `z^k` for `k ≤ 6`, simple poles on a ring outside `X`,
/// and seeded random polynomials.
fn trial_battery(sampler: &RegionSampler, cfg: &SimilarityConfig) -> Result<Vec<RationalFunction>> {
    let x = sampler.region();
    let (c, r) = (x.center(), x.circumradius().max(1e-3));
    let mut out = vec![RationalFunction::constant(C64::one())];
    for k in 1..=6 {
        let mut coeffs = vec![C64::zero(); k + 1];
        coeffs[k] = C64::one();
        out.push(RationalFunction::polynomial(coeffs)?);
    }
    for k in 0..8 {
        out.push(RationalFunction::simple_pole(c + C64::from_polar(1.5 * r, TAU * k as f64 / 8.0))?);
    }
    let mut rng = TrialRng::new(cfg.seed, u64::MAX);
    for _ in 0..cfg.random_trials {
        out.push(RationalFunction::polynomial(rng.polynomial(6))?);
    }
    Ok(out)
}

/// Upper-triangular similarity from positive log-diagonal and complex
/// off-diagonal parameters; the first diagonal entry is pinned to 1.
fn similarity_from(n: usize, params: &[f64]) -> ComplexMatrix {
    let mut s = ComplexMatrix::zeros(n);
    s[(0, 0)] = C64::one();
    for i in 1..n {
        s[(i, i)] = C64::new(params[i - 1].exp(), 0.0);
    }
    let mut k = n - 1;
    for i in 0..n {
        for j in (i + 1)..n {
            s[(i, j)] = C64::new(params[k], params[k + 1]);
            k += 2;
        }
    }
    s
}

/// Seeded search for an upper-triangular `S` making `S⁻¹ T S` contractive on
/// the trial battery. Restart 0 starts from the identity; the search stops as
/// soon as the ratio reaches `1 + 1e-12`. No optimality is claimed.
pub fn contractive_similarity_search(
    t: &ComplexMatrix,
    sampler: &RegionSampler,
    cfg: &SimilarityConfig,
) -> Result<SimilarityResult> {
    check_range_inside(t, sampler)?;
    let n = t.dim();
    let battery = trial_battery(sampler, cfg)?;
    let mut images = Vec::with_capacity(battery.len());
    for u in &battery {
        let sup = sup_norm(u, sampler)?;
        if let Ok(m) = u.eval_matrix(t) {
            if sup > 0.0 {
                images.push((m, sup));
            }
        }
    }
    let objective = |params: &[f64]| -> f64 {
        let s = similarity_from(n, params);
        match inverse(&s) {
            Ok(si) => images
                .iter()
                .map(|(m, sup)| spectral_norm(&(&(&si * m) * &s)) / sup)
                .fold(0.0, f64::max),
            Err(_) => f64::INFINITY,
        }
    };
    let nparams = (n - 1) + n * (n - 1);
    let mut best: (Vec<f64>, f64) = (vec![0.0; nparams], f64::INFINITY);
    let target = 1.0 + 1e-12;
    for restart in 0..cfg.restarts.max(1) {
        let mut rng = TrialRng::new(cfg.seed, restart as u64);
        let mut x: Vec<f64> = if restart == 0 {
            vec![0.0; nparams]
        } else {
            (0..nparams).map(|_| 0.5 * rng.gaussian()).collect()
        };
        let mut fx = objective(&x);
        let mut step = 0.5;
        let mut improved = false;
        for s in 0..cfg.steps {
            if fx <= target || nparams == 0 {
                break;
            }
            let idx = s % nparams;
            if idx == 0 && s > 0 {
                if !improved {
                    step *= 0.5;
                }
                improved = false;
            }
            for sign in [1.0, -1.0] {
                let mut y = x.clone();
                y[idx] += sign * step;
                let fy = objective(&y);
                if fy < fx {
                    x = y;
                    fx = fy;
                    improved = true;
                    break;
                }
            }
        }
        if fx < best.1 {
            best = (x, fx);
        }
        if best.1 <= target {
            break;
        }
    }
    Ok(SimilarityResult {
        similarity: similarity_from(n, &best.0),
        ratio: best.1,
    })
}

/// Restriction of boundary measures to a union of whole components.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasureProjection {
    mask: Vec<bool>,
    per_component: usize,
}

impl MeasureProjection {
    /// Keeps the nodes of the listed components.
    pub fn components(grid: &BoundaryGrid, keep: &[usize]) -> Result<Self> {
        if keep.iter().any(|&k| k >= grid.component_count()) {
            return Err(Error::InvalidArgument("component index out of range"));
        }
        let mask = grid.component().iter().map(|c| keep.contains(c)).collect();
        Ok(Self {
            mask,
            per_component: grid.per_component(),
        })
    }

    pub fn all(grid: &BoundaryGrid) -> Self {
        Self {
            mask: vec![true; grid.len()],
            per_component: grid.per_component(),
        }
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Sorted node indices kept by the projection.
    pub fn node_indices(&self) -> Vec<usize> {
        (0..self.mask.len()).filter(|&i| self.mask[i]).collect()
    }

    fn combine(&self, other: &Self, f: impl Fn(bool, bool) -> bool) -> Result<Self> {
        if self.mask.len() != other.mask.len() || self.per_component != other.per_component {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            mask: self.mask.iter().zip(&other.mask).map(|(&a, &b)| f(a, b)).collect(),
            per_component: self.per_component,
        })
    }

    pub fn complement(&self) -> Self {
        Self {
            mask: self.mask.iter().map(|b| !b).collect(),
            per_component: self.per_component,
        }
    }

    pub fn intersection(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a && b)
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a || b)
    }

    pub fn apply(&self, mu: &MeasureVector) -> Result<MeasureVector> {
        if mu.len() != self.mask.len() {
            return Err(Error::GridMismatch);
        }
        Ok(MeasureVector {
            values: mu
                .values
                .iter()
                .zip(&self.mask)
                .map(|(&v, &keep)| if keep { v } else { C64::zero() })
                .collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::BoundaryCurve;
    use crate::random::{random_split_operator, Profile};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn upper() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[[0.0, 1.0], [0.0, 5.0]])
    }

    fn contours_0_5() -> Vec<Contour> {
        vec![
            Contour::new(c(0.0, 0.0), 1.0, 128).unwrap(),
            Contour::new(c(5.0, 0.0), 1.0, 128).unwrap(),
        ]
    }

    #[test]
    fn riesz_examples() {
        let d = ComplexMatrix::from_diag(&[c(0.0, 0.0), c(5.0, 0.0)]);
        let unit = Contour::new(C64::zero(), 1.0, 128).unwrap();
        let q = riesz_projection(&d, &unit).unwrap();
        assert!(q.distance(&ComplexMatrix::from_real_rows(&[[1.0, 0.0], [0.0, 0.0]])) < 1e-10);
        let q = riesz_projection(&upper(), &unit).unwrap();
        assert!(q.distance(&ComplexMatrix::from_real_rows(&[[1.0, -0.2], [0.0, 0.0]])) < 1e-9);
        let big = Contour::new(c(2.5, 0.0), 5.0, 128).unwrap();
        assert!(riesz_projection(&upper(), &big).unwrap().distance(&ComplexMatrix::identity(2)) < 1e-9);
        assert_eq!(contour_count(&upper(), &big).unwrap(), 2);
    }

    #[test]
    fn contour_through_spectrum_rejected() {
        let d = ComplexMatrix::from_diag(&[c(1.0, 0.0), c(5.0, 0.0)]);
        let unit = Contour::new(C64::zero(), 1.0, 64).unwrap();
        assert_eq!(riesz_projection(&d, &unit).unwrap_err(), Error::ContourThroughSpectrum);
    }

    #[test]
    fn contour_quadrature_converges_exponentially() {
        let d = ComplexMatrix::from_diag(&[c(0.0, 0.0), c(5.0, 0.0)]);
        let q = |m| riesz_projection(&d, &Contour::new(C64::zero(), 2.0, m).unwrap()).unwrap();
        let (q64, q128, q256, q512) = (q(64), q(128), q(256), q(512));
        let diffs = [q64.distance(&q128), q128.distance(&q256), q256.distance(&q512)];
        for w in diffs.windows(2) {
            assert!(w[1] <= w[0] / 10.0 || w[1] <= 1e-12);
        }
    }

    #[test]
    fn idempotent_system_examples() {
        let d = ComplexMatrix::from_diag(&[c(0.0, 0.0), c(5.0, 0.0)]);
        let sys = idempotent_system(&d, &contours_0_5()).unwrap();
        assert!(sys.parts[0].distance(&ComplexMatrix::from_real_rows(&[[1.0, 0.0], [0.0, 0.0]])) < 1e-10);
        assert!(sys.parts[1].distance(&ComplexMatrix::from_real_rows(&[[0.0, 0.0], [0.0, 1.0]])) < 1e-10);
        assert!(sys.remainder.frobenius_norm() < 1e-10);

        let sys = idempotent_system(&upper(), &contours_0_5()).unwrap();
        assert!(sys.parts[0].distance(&ComplexMatrix::from_real_rows(&[[1.0, -0.2], [0.0, 0.0]])) < 1e-9);
        assert!(sys.parts[1].distance(&ComplexMatrix::from_real_rows(&[[0.0, 0.2], [0.0, 1.0]])) < 1e-9);
        assert!(sys.residuals.cross < 1e-9);
    }

    #[test]
    fn partial_system_leaves_remainder() {
        let mut rng = TrialRng::new(3, 0);
        let op = random_split_operator(&mut rng, 6, 2.0).unwrap();
        let (c0, r0) = op.clusters[0];
        let sys = idempotent_system(&op.matrix, &[Contour::new(c0, r0 + 0.9, 128).unwrap()]).unwrap();
        assert!(sys.remainder.frobenius_norm() > 0.5);
        assert_eq!(sys.remainder_rank(), 3);
        let r = sys.residuals;
        assert!(r.idempotent < 1e-8 && r.cross < 1e-8 && r.commutation < 1e-8);
    }

    #[test]
    fn overlapping_contours_rejected() {
        let cs = [
            Contour::new(C64::zero(), 1.0, 64).unwrap(),
            Contour::new(c(1.5, 0.0), 1.0, 64).unwrap(),
        ];
        assert_eq!(idempotent_system(&upper(), &cs).unwrap_err(), Error::OverlapError);
    }

    #[test]
    fn orthogonalize_examples() {
        let d = ComplexMatrix::from_diag(&[c(0.0, 0.0), c(5.0, 0.0)]);
        let o = orthogonalize(&idempotent_system(&d, &contours_0_5()).unwrap()).unwrap();
        assert!(o.similarity.distance(&ComplexMatrix::identity(2)) < 1e-9);

        let sys = idempotent_system(&upper(), &contours_0_5()).unwrap();
        let o = orthogonalize(&sys).unwrap();
        assert!(o.projection_residual() < 1e-9);
        assert!(o.similarity_identity_residual(&sys) < 1e-9);
        // hand computation: H = Q₁*Q₁ + Q₂*Q₂
        let h = ComplexMatrix::from_real_rows(&[[1.0, -0.2], [-0.2, 1.08]]);
        assert!(o.h.distance(&h) < 1e-9);
        assert!(o.condition_number().is_finite());
    }

    #[test]
    fn decompose_examples() {
        let j2 = ComplexMatrix::from_real_rows(&[[0.0, 1.0], [0.0, 0.0]]);
        let t = direct_sum(&j2, &ComplexMatrix::from_real_rows(&[[5.0]])).unwrap();
        let o = orthogonalize(&idempotent_system(&t, &contours_0_5()).unwrap()).unwrap();
        let d = decompose_operator(&t, &o).unwrap();
        assert!(d.residual <= 1e-9);
        assert_eq!(d.blocks[0].dim(), 2);
        // unitary basis change preserves norm and trace
        assert!((spectral_norm(&d.blocks[0]) - 1.0).abs() < 1e-9);
        assert!(d.blocks[0].trace().norm() < 1e-9);
        assert!((d.blocks[1][(0, 0)] - 5.0).norm() < 1e-9);

        let o = orthogonalize(&idempotent_system(&upper(), &contours_0_5()).unwrap()).unwrap();
        let d = decompose_operator(&upper(), &o).unwrap();
        assert!(d.residual <= 1e-8);
        assert!(d.blocks[0][(0, 0)].norm() < 1e-8);
        assert!((d.blocks[1][(0, 0)] - 5.0).norm() < 1e-8);

        let u = RationalFunction::simple_pole(c(2.5, 2.0)).unwrap();
        let lhs = &(&o.similarity * &u.eval_matrix(&upper()).unwrap()) * &o.inverse;
        let blocks: Vec<ComplexMatrix> = d.blocks.iter().map(|b| u.eval_matrix(b).unwrap()).collect();
        assert!(lhs.distance(&d.assemble(&blocks)) < 1e-8);
        for p in &o.projections {
            assert!((p * &lhs).distance(&(&lhs * p)) < 1e-8);
        }
    }

    #[test]
    fn block_range_examples() {
        let z = ComplexMatrix::from_real_rows(&[[0.0]]);
        let five = ComplexMatrix::from_real_rows(&[[5.0]]);
        assert!(verify_block_ranges(&[z.clone(), five]).unwrap() < 1e-9);
        let j2 = ComplexMatrix::from_real_rows(&[[0.0, 1.0], [0.0, 0.0]]);
        assert!(verify_block_ranges(&[j2.clone(), ComplexMatrix::from_real_rows(&[[1.5]])]).unwrap() < 1e-8);
        assert_eq!(verify_block_ranges(&[j2]).unwrap(), 0.0);
    }

    #[test]
    fn auto_contours_find_clusters() {
        let d = ComplexMatrix::from_diag(&[c(0.0, 0.0), c(0.05, 0.0), c(5.0, 0.0)]);
        let cs = auto_contours(&d, 128).unwrap();
        assert_eq!(cs.len(), 2);
        assert_eq!(contour_count(&d, &cs[0]).unwrap(), 2);
        assert_eq!(contour_count(&d, &cs[1]).unwrap(), 1);
        let mut rng = TrialRng::new(4, 0);
        let op = random_split_operator(&mut rng, 6, 3.0).unwrap();
        let cs = auto_contours(&op.matrix, 128).unwrap();
        let total: usize = cs.iter().map(|c| contour_count(&op.matrix, c).unwrap()).sum();
        assert_eq!(total, 6);
    }

    #[test]
    fn normal_operator_needs_no_similarity() {
        let t = crate::random::random_operator(7, 4, Profile::Normal).unwrap();
        let cs = auto_contours(&t, 256).unwrap();
        let o = orthogonalize(&idempotent_system(&t, &cs).unwrap()).unwrap();
        assert!(o.similarity.distance(&ComplexMatrix::identity(4)) < 1e-9);
    }

    #[test]
    fn contractive_similarity_examples() {
        let s = RegionSampler::unit_circle(256).unwrap();
        let cfg = SimilarityConfig::default();
        let t = ComplexMatrix::from_real_rows(&[[0.0, 2.0], [0.0, 0.0]]);
        let r = contractive_similarity_search(&t, &s, &cfg).unwrap();
        assert!(r.ratio <= 1.0 + 1e-6);
        let st = &(&inverse(&r.similarity).unwrap() * &t) * &r.similarity;
        assert!(spectral_norm(&st) <= 1.0 + 1e-6);

        let d = ComplexMatrix::from_diag(&[c(0.3, 0.0), c(0.0, -0.5)]);
        let r = contractive_similarity_search(&d, &s, &cfg).unwrap();
        assert!(r.ratio <= 1.0 + 1e-12);
        assert!(r.similarity.distance(&ComplexMatrix::identity(2)) == 0.0);

        let j2 = ComplexMatrix::from_real_rows(&[[0.0, 1.0], [0.0, 0.0]]);
        let r = contractive_similarity_search(&j2, &s, &cfg).unwrap();
        assert!(r.ratio <= 1.0 + 1e-9);
        assert!(r.similarity.distance(&ComplexMatrix::identity(2)) == 0.0);
    }

    fn two_disc_grid() -> BoundaryGrid {
        BoundaryGrid::discretize_boundary(
            &[
                (BoundaryCurve::disc(C64::zero(), 1.0).unwrap(), false),
                (BoundaryCurve::disc(c(5.0, 0.0), 1.0).unwrap(), false),
            ],
            128,
        )
        .unwrap()
    }

    #[test]
    fn measure_projection_examples() {
        let g = two_disc_grid();
        let mut rng = TrialRng::new(9, 0);
        let mu = MeasureVector {
            values: rng.gaussian_vec(g.len()),
        };
        assert_eq!(MeasureProjection::all(&g).apply(&mu).unwrap(), mu);

        let on_first = MeasureVector::line_measure(&g, 0, |z| z * z);
        let second = MeasureProjection::components(&g, &[1]).unwrap();
        assert!(second.apply(&on_first).unwrap().values.iter().all(|v| v.is_zero()));

        // Cauchy annihilators survive restriction
        let mu = &MeasureVector::line_measure(&g, 0, |z| z)
            + &MeasureVector::line_measure(&g, 1, |z| z - c(5.0, 0.0));
        let first = MeasureProjection::components(&g, &[0]).unwrap();
        let q = first.apply(&mu).unwrap();
        for _ in 0..50 {
            let coeffs = rng.polynomial(8);
            let pole = c(2.5, rng.uniform_range(-3.0, 3.0));
            let u = RationalFunction::new(coeffs, vec![crate::rational::Pole { location: pole, multiplicity: 1 }]).unwrap();
            assert!(q.integrate(&g, &u).unwrap().norm() <= 1e-8);
        }
    }

    #[test]
    fn projections_form_boolean_algebra() {
        let g = two_disc_grid();
        let a = MeasureProjection::components(&g, &[0]).unwrap();
        let b = MeasureProjection::components(&g, &[1]).unwrap();
        assert_eq!(a.complement(), b);
        assert_eq!(a.union(&b).unwrap(), MeasureProjection::all(&g));
        assert!(a.intersection(&b).unwrap().node_indices().is_empty());
        let mu = MeasureVector {
            values: TrialRng::new(1, 0).gaussian_vec(g.len()),
        };
        let once = a.apply(&mu).unwrap();
        assert_eq!(a.apply(&once).unwrap(), once);
        assert_eq!(a.apply(&b.apply(&mu).unwrap()).unwrap(), b.apply(&a.apply(&mu).unwrap()).unwrap());
        let u = RationalFunction::simple_pole(c(2.5, 1.0)).unwrap();
        assert_eq!(
            a.apply(&mu.multiply(&g, &u).unwrap()).unwrap(),
            a.apply(&mu).unwrap().multiply(&g, &u).unwrap()
        );
        let other = BoundaryGrid::discretize(&BoundaryCurve::disc(C64::zero(), 1.0).unwrap(), 64).unwrap();
        assert_eq!(
            MeasureProjection::all(&other).apply(&mu).unwrap_err(),
            Error::GridMismatch
        );
    }
}
