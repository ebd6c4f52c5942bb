//! Nyström discretization of the Neumann–Poincaré double-layer operator and
//! the operator-valued boundary density that reconstructs `u(T)`.
//!
//! Kernel normalization: the double layer of the constant density is 1 inside,
//! and boundary data relate to densities by `g = (φ + Kφ)/2`, so the interior
//! Dirichlet solution operator in density form is `S = 2(I + K)⁻¹`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

#[allow(unused_imports)] // float methods come from std when it is linked
use num_traits::{Float, Zero};

use crate::convex::{grid_angle, numrange_boundary, DEFAULT_ANGLES};
use crate::curve::{BoundaryCurve, MIN_SPEED};
use crate::error::{Error, Result};
use crate::linalg::{resolvent, ComplexMatrix, RealLu, C64};
use crate::rational::RationalFunction;

/// Fewest nodes per boundary component.
pub const MIN_NODES: usize = 32;
/// Interior evaluations and operator ranges keep this many grid spacings from the boundary.
pub const MARGIN_SPACINGS: f64 = 5.0;

/// Quadrature nodes on one or more closed boundary components.
///
/// Outer components run counterclockwise and holes clockwise, so the normal
/// `n = −iτ` always points out of `X`. Curvature is signed with respect to
/// that orientation.
#[derive(Clone, Debug)]
pub struct BoundaryGrid {
    per_component: usize,
    curves: Vec<(BoundaryCurve, bool)>,
    params: Vec<f64>,
    nodes: Vec<C64>,
    normals: Vec<C64>,
    weights: Vec<f64>,
    curvatures: Vec<f64>,
    dz: Vec<C64>,
    component: Vec<usize>,
}

/// `(t, weight)` pairs in the curve parameter `t ∈ [0, 2π)`.
fn parameter_rule(curve: &BoundaryCurve, m: usize) -> Vec<(f64, f64)> {
    let BoundaryCurve::SmoothedPolygon(p) = curve else {
        let h = TAU / m as f64;
        return (0..m).map(|j| (h * j as f64, h)).collect();
    };
    let lengths = p.piece_lengths();
    let scale = TAU / p.perimeter();
    // nodes per piece proportional to length, at least 2, summing to m
    let share: Vec<f64> = lengths.iter().map(|l| l / p.perimeter() * m as f64).collect();
    let mut counts: Vec<usize> = share.iter().map(|s| (s.floor() as usize).max(2)).collect();
    while counts.iter().sum::<usize>() < m {
        let k = (0..counts.len())
            .max_by(|&a, &b| (share[a] - counts[a] as f64).total_cmp(&(share[b] - counts[b] as f64)).then(b.cmp(&a)))
            .unwrap_or(0);
        counts[k] += 1;
    }
    while counts.iter().sum::<usize>() > m {
        let k = (0..counts.len())
            .filter(|&k| counts[k] > 2)
            .max_by(|&a, &b| (counts[a] as f64 - share[a]).total_cmp(&(counts[b] as f64 - share[b])).then(b.cmp(&a)))
            .unwrap_or(0);
        counts[k] -= 1;
    }
    let mut out = Vec::with_capacity(m);
    let mut start = 0.0;
    for (len, n) in lengths.iter().zip(counts) {
        let half = 0.5 * len * scale;
        for (x, w) in gauss_legendre(n) {
            out.push((start + half * (1.0 + x), half * w));
        }
        start += len * scale;
    }
    out
}

/// Gauss–Legendre nodes and weights on `[−1, 1]` by Newton iteration on `P_n`.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = vec![(0.0, 0.0); n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out[i] = (-x, w);
        out[n - 1 - i] = (x, w);
    }
    out
}

impl BoundaryGrid {
    /// Equal-parameter trapezoid nodes on discs and ellipses; Gauss–Legendre
    /// nodes on each side and arc of a smoothed polygon.
    pub fn discretize(curve: &BoundaryCurve, m: usize) -> Result<Self> {
        Self::discretize_boundary(&[(curve.clone(), false)], m)
    }

    /// `m` nodes on each component; the flag marks holes.
    pub fn discretize_boundary(components: &[(BoundaryCurve, bool)], m: usize) -> Result<Self> {
        if m < MIN_NODES || !m.is_multiple_of(2) {
            return Err(Error::InvalidArgument("node count must be even and at least 32"));
        }
        if components.is_empty() {
            return Err(Error::InvalidArgument("boundary needs a component"));
        }
        let total = m * components.len();
        let mut g = Self {
            per_component: m,
            curves: components.to_vec(),
            params: Vec::with_capacity(total),
            nodes: Vec::with_capacity(total),
            normals: Vec::with_capacity(total),
            weights: Vec::with_capacity(total),
            curvatures: Vec::with_capacity(total),
            dz: Vec::with_capacity(total),
            component: Vec::with_capacity(total),
        };
        for (ci, (curve, hole)) in components.iter().enumerate() {
            curve.validate()?;
            for (t, h) in parameter_rule(curve, m) {
                let (z, d, k) = if *hole {
                    (curve.point(-t), -curve.derivative(-t), -curve.curvature(-t))
                } else {
                    (curve.point(t), curve.derivative(t), curve.curvature(t))
                };
                let speed = d.norm();
                if !(speed >= MIN_SPEED) {
                    return Err(Error::BadCurve("curve speed vanishes at a node"));
                }
                let tau = d / speed;
                let n = -C64::i() * tau;
                if (n * tau.conj()).re.abs() > 1e-10 || !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::BadCurve("normal not orthogonal to tangent"));
                }
                g.params.push(t);
                g.nodes.push(z);
                g.normals.push(n);
                g.weights.push(speed * h);
                g.curvatures.push(k);
                g.dz.push(d * h);
                g.component.push(ci);
            }
        }
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes per component.
    pub fn per_component(&self) -> usize {
        self.per_component
    }

    pub fn component_count(&self) -> usize {
        self.curves.len()
    }

    pub fn curves(&self) -> &[(BoundaryCurve, bool)] {
        &self.curves
    }

    pub fn has_holes(&self) -> bool {
        self.curves.iter().any(|c| c.1)
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn nodes(&self) -> &[C64] {
        &self.nodes
    }

    pub fn normals(&self) -> &[C64] {
        &self.normals
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn curvatures(&self) -> &[f64] {
        &self.curvatures
    }

    /// `γ′(t_j)·2π/M`, the complex line element.
    pub fn dz(&self) -> &[C64] {
        &self.dz
    }

    /// Component index of each node.
    pub fn component(&self) -> &[usize] {
        &self.component
    }

    /// Node index range of component `k`.
    pub fn component_range(&self, k: usize) -> core::ops::Range<usize> {
        k * self.per_component..(k + 1) * self.per_component
    }

    pub fn perimeter(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Largest node spacing, `max_j w_j`.
    pub fn spacing(&self) -> f64 {
        self.weights.iter().copied().fold(0.0, f64::max)
    }

    /// The margin rule: [`MARGIN_SPACINGS`] grid spacings.
    pub fn margin(&self) -> f64 {
        MARGIN_SPACINGS * self.spacing()
    }

    /// Signed distance from `z` to the boundary, positive inside `X`.
    pub fn interior_distance(&self, z: C64) -> f64 {
        let mut inside_outer = false;
        let mut outside_holes = true;
        let mut dist = f64::INFINITY;
        for (curve, hole) in &self.curves {
            let d = curve.interior_distance(z);
            if *hole {
                outside_holes &= d < 0.0;
            } else {
                inside_outer |= d > 0.0;
            }
            dist = dist.min(d.abs());
        }
        if inside_outer && outside_holes {
            dist
        } else {
            -dist
        }
    }

    /// Smallest gap between `W(T)` and the boundary of the outer component
    /// that best contains it, `min_θ (h_X(θ) − h_W(θ))`.
    pub fn range_clearance(&self, t: &ComplexMatrix) -> Result<f64> {
        let w = numrange_boundary(t, DEFAULT_ANGLES)?;
        let mut best = f64::NEG_INFINITY;
        for (curve, hole) in &self.curves {
            if *hole {
                continue;
            }
            let gap = w
                .support()
                .iter()
                .enumerate()
                .map(|(k, h)| curve.support(grid_angle(k, DEFAULT_ANGLES)).0 - h)
                .fold(f64::INFINITY, f64::min);
            best = best.max(gap);
        }
        Ok(best)
    }
}

/// Real Nyström matrix of the double-layer operator.
#[derive(Clone, Debug)]
pub struct NpOperator {
    n: usize,
    matrix: Vec<f64>,
}

impl NpOperator {
    /// `K_ij = (1/π) Re(n_j/(ζ_j − ζ_i)) w_j`, with the curvature limit
    /// `κ_i w_i/(2π)` on the diagonal. Boundaries with holes are rejected:
    /// the double-layer ansatz is not complete on multiply connected domains.
    pub fn new(grid: &BoundaryGrid) -> Result<Self> {
        if grid.has_holes() {
            return Err(Error::InvalidArgument("double layer needs a boundary without holes"));
        }
        let n = grid.len();
        let (z, nrm, w) = (&grid.nodes, &grid.normals, &grid.weights);
        let mut matrix = vec![0.0; n * n];
        for i in 0..n {
            let row = &mut matrix[i * n..(i + 1) * n];
            for j in 0..n {
                row[j] = if i == j {
                    grid.curvatures[i] * w[i] / TAU
                } else {
                    (nrm[j] / (z[j] - z[i])).re * w[j] / PI
                };
            }
        }
        Ok(Self { n, matrix })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[f64] {
        &self.matrix
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.n + j]
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.n, "dimension mismatch");
        (0..self.n)
            .map(|i| {
                self.matrix[i * self.n..(i + 1) * self.n]
                    .iter()
                    .zip(v)
                    .map(|(k, x)| x * *k)
                    .sum()
            })
            .collect()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.matrix[i * self.n..(i + 1) * self.n].iter().sum())
            .collect()
    }
}

/// Factored `I + K`, applying `S = 2(I + K)⁻¹` and its transpose.
#[derive(Clone, Debug)]
pub struct DirichletSolver {
    lu: RealLu,
}

impl DirichletSolver {
    pub fn new(k: &NpOperator) -> Result<Self> {
        let n = k.n;
        let mut a = k.matrix.clone();
        for i in 0..n {
            a[i * n + i] += 1.0;
        }
        Ok(Self {
            lu: RealLu::factor(n, &a)?,
        })
    }

    /// Density `φ = 2(I + K)⁻¹ g` for boundary data `g`.
    pub fn density(&self, g: &[C64]) -> Vec<C64> {
        self.lu.solve(g).into_iter().map(|x| x * 2.0).collect()
    }

    /// `Sᵀ ν = 2(I + K)⁻ᵀ ν`.
    pub fn density_transpose(&self, nu: &[C64]) -> Vec<C64> {
        self.lu.solve_transpose(nu).into_iter().map(|x| x * 2.0).collect()
    }
}

/// `φ = 2(I + K)⁻¹ g`.
pub fn dirichlet_density(k: &NpOperator, g: &[C64]) -> Result<Vec<C64>> {
    Ok(DirichletSolver::new(k)?.density(g))
}

/// Double-layer potential `D[φ](z) = (1/2π) Σ φ_j Re(n_j/(ζ_j − z)) w_j` at an
/// interior point at least [`BoundaryGrid::margin`] from the boundary.
pub fn double_layer_eval(grid: &BoundaryGrid, phi: &[C64], z: C64) -> Result<C64> {
    if phi.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            found: phi.len(),
        });
    }
    if grid.interior_distance(z) < grid.margin() {
        return Err(Error::TooCloseToBoundary);
    }
    let mut acc = C64::zero();
    for j in 0..grid.len() {
        let kernel = (grid.normals[j] / (grid.nodes[j] - z)).re * grid.weights[j];
        acc += phi[j] * kernel;
    }
    Ok(acc / TAU)
}

/// Hermitian blocks `F_j = (w_j/4π)[n_j R_j + conj(n_j) R_j*]`, `R_j = (ζ_j − T)⁻¹`.
#[derive(Clone, Debug)]
pub struct SemispectralDensity {
    blocks: Vec<ComplexMatrix>,
}

impl SemispectralDensity {
    /// Requires `W(T)` at least [`BoundaryGrid::margin`] inside the boundary.
    pub fn new(grid: &BoundaryGrid, t: &ComplexMatrix) -> Result<Self> {
        if grid.range_clearance(t)? < grid.margin() {
            return Err(Error::RegionViolation);
        }
        Self::new_unchecked(grid, t)
    }

    /// Builds the blocks without the margin rule; used for negative controls
    /// and for coarse rungs of convergence ladders.
    pub fn new_unchecked(grid: &BoundaryGrid, t: &ComplexMatrix) -> Result<Self> {
        let blocks = (0..grid.len())
            .map(|j| {
                let r = resolvent(t, grid.nodes[j])?;
                // (w/4π)(A + A*) = (w/2π)·herm(A)
                Ok(r.scale(grid.normals[j]).hermitian_part().scale_real(grid.weights[j] / TAU))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { blocks })
    }

    pub fn blocks(&self) -> &[ComplexMatrix] {
        &self.blocks
    }

    /// `Σ_j F_j`, summed in node order.
    pub fn total(&self) -> ComplexMatrix {
        let n = self.blocks[0].dim();
        self.blocks.iter().fold(ComplexMatrix::zeros(n), |acc, f| &acc + f)
    }

    /// Smallest eigenvalue over all blocks.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let mut lo = f64::INFINITY;
        for f in &self.blocks {
            lo = lo.min(crate::linalg::hermitian_eigen(f)?.min());
        }
        Ok(lo)
    }

    /// Largest `‖F_j − F_j*‖_F`.
    pub fn hermitian_defect(&self) -> f64 {
        self.blocks.iter().map(|f| f.hermitian_defect()).fold(0.0, f64::max)
    }

    /// `Σ_j φ_j F_j` for a complex density.
    pub fn integrate(&self, phi: &[C64]) -> ComplexMatrix {
        let n = self.blocks[0].dim();
        phi.iter()
            .zip(&self.blocks)
            .fold(ComplexMatrix::zeros(n), |acc, (p, f)| &acc + &f.scale(*p))
    }
}

/// `u(T) ≈ Σ_j (S u)_j F_j`.
pub fn reconstruct(
    u: &RationalFunction,
    grid: &BoundaryGrid,
    solver: &DirichletSolver,
    density: &SemispectralDensity,
) -> Result<ComplexMatrix> {
    let g = grid
        .nodes
        .iter()
        .map(|&z| u.eval(z))
        .collect::<Result<Vec<_>>>()?;
    // real and imaginary parts are solved independently by the real factorization
    Ok(density.integrate(&solver.density(&g)))
}

/// Node values of a complex measure on a boundary grid.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureVector {
    pub values: Vec<C64>,
}

impl MeasureVector {
    pub fn zeros(n: usize) -> Self {
        Self {
            values: vec![C64::zero(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Total variation `Σ |μ_k|`.
    pub fn total_variation(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).sum()
    }

    pub fn total(&self) -> C64 {
        self.values.iter().sum()
    }

    /// `Σ_k u(ζ_k) μ_k`.
    pub fn integrate(&self, grid: &BoundaryGrid, u: &RationalFunction) -> Result<C64> {
        if self.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        let mut acc = C64::zero();
        for (z, m) in grid.nodes.iter().zip(&self.values) {
            acc += u.eval(*z)? * m;
        }
        Ok(acc)
    }

    /// `w(ζ_j) dz_j` on component `k`, zero elsewhere.
    pub fn line_measure(grid: &BoundaryGrid, k: usize, w: impl Fn(C64) -> C64) -> Self {
        let values = (0..grid.len())
            .map(|j| {
                if grid.component[j] == k {
                    w(grid.nodes[j]) * grid.dz[j]
                } else {
                    C64::zero()
                }
            })
            .collect();
        Self { values }
    }

    /// `u μ`, node by node.
    pub fn multiply(&self, grid: &BoundaryGrid, u: &RationalFunction) -> Result<Self> {
        if self.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        let values = grid
            .nodes
            .iter()
            .zip(&self.values)
            .map(|(z, m)| Ok(u.eval(*z)? * m))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { values })
    }

    /// Largest `|Im μ_k|`.
    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }
}

impl core::ops::Add for &MeasureVector {
    type Output = MeasureVector;

    fn add(self, rhs: &MeasureVector) -> MeasureVector {
        assert_eq!(self.len(), rhs.len(), "measure lengths differ");
        MeasureVector {
            values: self.values.iter().zip(&rhs.values).map(|(a, b)| a + b).collect(),
        }
    }
}

/// `μ_{f,g}` with `Σ_k u(ζ_k) μ_k = ⟨(Σ_j (Su)_j F_j) f, g⟩`: the block pairings
/// `ν_j = ⟨F_j f, g⟩` pulled back through `Sᵀ`.
pub fn elementary_measure(
    solver: &DirichletSolver,
    density: &SemispectralDensity,
    f: &[C64],
    g: &[C64],
) -> MeasureVector {
    let nu: Vec<C64> = density.blocks.iter().map(|b| b.inner(f, g)).collect();
    MeasureVector {
        values: solver.density_transpose(&nu),
    }
}

/// `max_k |Im μ_{f,f}|`.
pub fn realness_check(solver: &DirichletSolver, density: &SemispectralDensity, f: &[C64]) -> f64 {
    elementary_measure(solver, density, f, f).max_imag()
}
