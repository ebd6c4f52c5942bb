//! Seeded lower bounds for the best constant `K` in `‖u(T)‖ ≤ K sup_X |u|`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{SQRT_2, TAU};

#[allow(unused_imports)] // float methods come from std when it is linked
use num_traits::{Float, One, Zero};

use crate::convex::{contains, numrange_boundary};
use crate::error::{Error, Result};
use crate::linalg::{inverse, spectral_norm, ComplexMatrix, C64};
use crate::random::TrialRng;
use crate::rational::{spectral_ratio, Pole, RationalFunction, POLE_MARGIN, ZERO_SUP};
use crate::sampler::RegionSampler;

/// Ratios above `1 + √2` are flagged for review.
pub const RATIO_WATCH: f64 = 1.0 + SQRT_2;
/// Operators with norm above `1 + CONTRACTION_TOL` are not contractions.
pub const CONTRACTION_TOL: f64 = 1e-12;
/// Degree bound of the random polynomials in [`von_neumann_check`].
pub const VON_NEUMANN_DEGREE: usize = 12;
/// Number of candidate poles on the ring around `X`.
pub const RING_POLES: usize = 8;
/// Ring radius as a multiple of the circumradius of `X`.
pub const RING_FACTOR: f64 = 1.5;

#[derive(Clone, Debug, PartialEq)]
pub struct SearchConfig {
    pub degrees: Vec<usize>,
    /// Random restarts per degree.
    pub restarts: usize,
    /// Coordinate-descent steps on the best restart.
    pub steps: usize,
    pub seed: u64,
    pub extra_poles: Vec<C64>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            degrees: vec![2, 4, 8, 12],
            restarts: 200,
            steps: 500,
            seed: 0,
            extra_poles: Vec::new(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct KEstimate {
    /// Lower bound on the best constant, attained by `certificate`.
    pub k_hat: f64,
    pub certificate: RationalFunction,
    /// Every ratio the search evaluated at a restart or accepted step.
    pub ratios: Vec<f64>,
    /// Count of `ratios` above [`RATIO_WATCH`].
    pub flagged: usize,
}

/// Search family member: `Σ c_k ((z − c)/R)^k`, optionally times `ρ/(z − π)`.
#[derive(Clone, Debug)]
struct Candidate {
    coeffs: Vec<C64>,
    pole: Option<usize>,
}

struct Family<'a> {
    t: &'a ComplexMatrix,
    sampler: &'a RegionSampler,
    center: C64,
    radius: f64,
    poles: Vec<C64>,
    powers: Vec<ComplexMatrix>,
    pole_factors: Vec<ComplexMatrix>,
}

impl<'a> Family<'a> {
    fn new(t: &'a ComplexMatrix, sampler: &'a RegionSampler, poles: Vec<C64>, max_degree: usize) -> Result<Self> {
        let region = sampler.region();
        let center = region.center();
        let radius = region.circumradius().max(1e-3);
        let n = t.dim();
        let shifted = t.shift(-center).scale_real(1.0 / radius);
        let mut powers = vec![ComplexMatrix::identity(n)];
        for k in 0..max_degree {
            powers.push(&powers[k] * &shifted);
        }
        let pole_factors = poles
            .iter()
            .map(|&p| {
                let rho = (p - center).norm();
                inverse(&t.shift(-p))
                    .map(|m| m.scale_real(rho))
                    .map_err(|_| Error::PoleOnSpectrum)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            t,
            sampler,
            center,
            radius,
            poles,
            powers,
            pole_factors,
        })
    }

    fn eval(&self, c: &Candidate, z: C64) -> C64 {
        let w = (z - self.center) / self.radius;
        let p = c.coeffs.iter().rev().fold(C64::zero(), |acc, &a| acc * w + a);
        match c.pole {
            Some(j) => p * (self.poles[j] - self.center).norm() / (z - self.poles[j]),
            None => p,
        }
    }

    fn ratio(&self, c: &Candidate) -> f64 {
        let n = self.t.dim();
        let mut m = ComplexMatrix::zeros(n);
        for (a, pk) in c.coeffs.iter().zip(&self.powers) {
            m = &m + &pk.scale(*a);
        }
        if let Some(j) = c.pole {
            m = &m * &self.pole_factors[j];
        }
        match self.sampler.sup(|z| Ok(self.eval(c, z).norm())) {
            Ok(sup) if sup >= ZERO_SUP => spectral_norm(&m) / sup,
            _ => 0.0,
        }
    }

    /// Expands the candidate into monomial form.
    fn to_rational(&self, c: &Candidate) -> Result<RationalFunction> {
        // Σ c_k ((z − center)/R)^k via repeated multiplication by (z − center)/R
        let deg = c.coeffs.len() - 1;
        let mut num = vec![C64::zero(); deg + 1];
        let mut basis = vec![C64::one()];
        let step = [-self.center / self.radius, C64::new(1.0 / self.radius, 0.0)];
        for (k, a) in c.coeffs.iter().enumerate() {
            for (i, b) in basis.iter().enumerate() {
                num[i] += a * b;
            }
            if k < deg {
                let mut next = vec![C64::zero(); basis.len() + 1];
                for (i, b) in basis.iter().enumerate() {
                    next[i] += b * step[0];
                    next[i + 1] += b * step[1];
                }
                basis = next;
            }
        }
        match c.pole {
            Some(j) => {
                let p = self.poles[j];
                let rho = (p - self.center).norm();
                RationalFunction::new(
                    num.into_iter().map(|a| a * rho).collect(),
                    vec![Pole {
                        location: p,
                        multiplicity: 1,
                    }],
                )
            }
            None => RationalFunction::polynomial(num),
        }
    }
}

/// Checks `W(T) ⊆ X` using the witness points of `W(T)` on the grid of `X`.
pub fn check_range_inside(t: &ComplexMatrix, sampler: &RegionSampler) -> Result<()> {
    let x = sampler.region();
    let w = numrange_boundary(t, x.m())?;
    let slack = -1e-9 * x.scale();
    if w.witness().iter().all(|&z| contains(x, z, slack)) {
        Ok(())
    } else {
        Err(Error::RegionViolation)
    }
}

/// Seeded random search over rational functions, followed by coordinate
/// descent on the best restart. The result is a lower bound on the optimal
/// constant; `u = 1` and `u = z` are always among the candidates.
#[allow(non_snake_case)]
pub fn estimate_K(t: &ComplexMatrix, sampler: &RegionSampler, cfg: &SearchConfig) -> Result<KEstimate> {
    check_range_inside(t, sampler)?;
    let x = sampler.region();
    let center = x.center();
    let circ = x.circumradius();
    let margin = POLE_MARGIN * (1.0 + circ);
    let mut poles: Vec<C64> = (0..RING_POLES)
        .map(|k| center + C64::from_polar(RING_FACTOR * circ.max(1e-3), TAU * k as f64 / RING_POLES as f64))
        .collect();
    poles.extend(cfg.extra_poles.iter().copied().filter(|&p| !contains(x, p, -margin)));
    let max_degree = cfg.degrees.iter().copied().max().unwrap_or(1).max(1);
    if max_degree > crate::rational::MAX_NUMERATOR_DEGREE {
        return Err(Error::InvalidArgument("search degree exceeds 32"));
    }
    let fam = Family::new(t, sampler, poles, max_degree)?;

    let mut ratios = Vec::new();
    let mut best = Candidate {
        coeffs: vec![C64::one()],
        pole: None,
    };
    let mut best_ratio = fam.ratio(&best);
    ratios.push(best_ratio);
    let identity = Candidate {
        coeffs: vec![fam.center, C64::new(fam.radius, 0.0)],
        pole: None,
    };
    let r = fam.ratio(&identity);
    ratios.push(r);
    if r > best_ratio {
        best = identity;
        best_ratio = r;
    }

    for (di, &deg) in cfg.degrees.iter().enumerate() {
        for restart in 0..cfg.restarts {
            let mut rng = TrialRng::new(cfg.seed, ((di as u64) << 32) | restart as u64);
            let pole = if restart % 2 == 1 && !fam.poles.is_empty() {
                Some(rng.below(fam.poles.len()))
            } else {
                None
            };
            let cand = Candidate {
                coeffs: rng.gaussian_vec(deg + 1),
                pole,
            };
            let r = fam.ratio(&cand);
            ratios.push(r);
            if r > best_ratio {
                best = cand;
                best_ratio = r;
            }
        }
    }

    let nparams = 2 * best.coeffs.len();
    let mut step = 0.5;
    let mut improved_in_sweep = false;
    for s in 0..cfg.steps {
        let idx = s % nparams;
        if idx == 0 && s > 0 {
            if !improved_in_sweep {
                step *= 0.5;
            }
            improved_in_sweep = false;
        }
        let scale = best.coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-12);
        let delta = if idx.is_multiple_of(2) {
            C64::new(step * scale, 0.0)
        } else {
            C64::new(0.0, step * scale)
        };
        for sign in [1.0, -1.0] {
            let mut cand = best.clone();
            cand.coeffs[idx / 2] += delta * sign;
            let r = fam.ratio(&cand);
            if r > best_ratio {
                ratios.push(r);
                best = cand;
                best_ratio = r;
                improved_in_sweep = true;
                break;
            }
        }
    }

    let certificate = fam.to_rational(&best)?;
    let mut k_hat = spectral_ratio(&certificate, t, sampler)?;
    let mut certificate = certificate;
    // keep the unital bound even if expansion rounding lowered the winner
    if k_hat < 1.0 {
        certificate = RationalFunction::constant(C64::one());
        k_hat = spectral_ratio(&certificate, t, sampler)?;
    }
    let flagged = ratios.iter().filter(|&&r| r > RATIO_WATCH).count();
    Ok(KEstimate {
        k_hat,
        certificate,
        ratios,
        flagged,
    })
}

/// Largest ratio `‖p(T)‖ / sup_{|z|=1} |p|` over `trials` random polynomials
/// of degree at most 12.
pub fn von_neumann_check(t: &ComplexMatrix, trials: usize, seed: u64) -> Result<f64> {
    if spectral_norm(t) > 1.0 + CONTRACTION_TOL {
        return Err(Error::NotContraction);
    }
    let sampler = RegionSampler::unit_circle(256)?;
    let mut rng = TrialRng::new(seed, 0);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let u = RationalFunction::polynomial(rng.polynomial(VON_NEUMANN_DEGREE))?;
        match spectral_ratio(&u, t, &sampler) {
            Ok(r) => worst = worst.max(r),
            Err(Error::ZeroFunction) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(worst)
}
