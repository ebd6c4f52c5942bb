//! Rational functions with poles off the working region and their matrix calculus.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // float methods come from std when it is linked
use num_traits::{Float, One, Zero};

use crate::convex::{contains, numrange_boundary};
use crate::error::{Error, Result};
use crate::linalg::{inverse, poly_eval, poly_eval_matrix, spectral_norm, ComplexMatrix, C64};
use crate::sampler::RegionSampler;

pub const MAX_NUMERATOR_DEGREE: usize = 32;
pub const MAX_POLE_ORDER: u32 = 32;
/// Evaluation refuses points this close to a pole.
pub const NEAR_POLE: f64 = 1e-9;
/// Default pole clearance from `W(T)`, relative to `1 + circumradius`.
pub const POLE_MARGIN: f64 = 1e-6;
/// Sup norms below this are treated as the zero function.
pub const ZERO_SUP: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pole {
    pub location: C64,
    pub multiplicity: u32,
}

/// `p(z) / Π (z − π_j)^{m_j}` with `p` stored in ascending degree.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalFunction {
    numerator: Vec<C64>,
    poles: Vec<Pole>,
}

impl RationalFunction {
    pub fn new(numerator: Vec<C64>, poles: Vec<Pole>) -> Result<Self> {
        if numerator.is_empty() {
            return Err(Error::InvalidArgument("numerator needs at least one coefficient"));
        }
        if numerator.len() > MAX_NUMERATOR_DEGREE + 1 {
            return Err(Error::InvalidArgument("numerator degree exceeds 32"));
        }
        if numerator.iter().any(|z| !z.re.is_finite() || !z.im.is_finite())
            || poles.iter().any(|p| !p.location.re.is_finite() || !p.location.im.is_finite())
        {
            return Err(Error::NonFinite);
        }
        if poles.iter().any(|p| p.multiplicity == 0) {
            return Err(Error::InvalidArgument("pole multiplicity must be positive"));
        }
        let total: u32 = poles.iter().map(|p| p.multiplicity).sum();
        if total > MAX_POLE_ORDER {
            return Err(Error::InvalidArgument("total pole multiplicity exceeds 32"));
        }
        // merge coincident poles
        let mut merged: Vec<Pole> = Vec::with_capacity(poles.len());
        for p in poles {
            match merged.iter_mut().find(|q| q.location == p.location) {
                Some(q) => q.multiplicity += p.multiplicity,
                None => merged.push(p),
            }
        }
        Ok(Self {
            numerator,
            poles: merged,
        })
    }

    pub fn constant(c: C64) -> Self {
        Self {
            numerator: vec![c],
            poles: Vec::new(),
        }
    }

    /// The coordinate function `u₁(z) = z`.
    pub fn identity() -> Self {
        Self {
            numerator: vec![C64::zero(), C64::one()],
            poles: Vec::new(),
        }
    }

    pub fn polynomial(coeffs: Vec<C64>) -> Result<Self> {
        Self::new(coeffs, Vec::new())
    }

    /// `1 / (z − π)`.
    pub fn simple_pole(location: C64) -> Result<Self> {
        Self::new(
            vec![C64::one()],
            vec![Pole {
                location,
                multiplicity: 1,
            }],
        )
    }

    pub fn numerator(&self) -> &[C64] {
        &self.numerator
    }

    pub fn poles(&self) -> &[Pole] {
        &self.poles
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let mut num = vec![C64::zero(); self.numerator.len() + other.numerator.len() - 1];
        for (i, a) in self.numerator.iter().enumerate() {
            for (j, b) in other.numerator.iter().enumerate() {
                num[i + j] += a * b;
            }
        }
        let poles = self.poles.iter().chain(&other.poles).copied().collect();
        Self::new(num, poles)
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            numerator: self.numerator.iter().map(|a| a * c).collect(),
            poles: self.poles.clone(),
        }
    }

    /// Pointwise value; fails within [`NEAR_POLE`] of a pole.
    pub fn eval(&self, z: C64) -> Result<C64> {
        let mut den = C64::one();
        for p in &self.poles {
            let d = z - p.location;
            if d.norm() < NEAR_POLE {
                return Err(Error::NearPole);
            }
            den *= d.powu(p.multiplicity);
        }
        Ok(poly_eval(&self.numerator, z) / den)
    }

    /// `u(T) = p(T) Π (T − π_j I)^{−m_j}` after checking every pole clears `W(T)`.
    pub fn eval_matrix(&self, t: &ComplexMatrix) -> Result<ComplexMatrix> {
        if !self.poles.is_empty() {
            let w = numrange_boundary(t, 64)?;
            let margin = POLE_MARGIN * (1.0 + w.circumradius());
            if self.poles.iter().any(|p| contains(&w, p.location, -margin)) {
                return Err(Error::PoleOnSpectrum);
            }
        }
        self.eval_matrix_unchecked(t)
    }

    /// [`eval_matrix`](Self::eval_matrix) without the pole clearance check.
    /// Singular factors still surface as [`Error::PoleOnSpectrum`].
    pub fn eval_matrix_unchecked(&self, t: &ComplexMatrix) -> Result<ComplexMatrix> {
        let mut out = poly_eval_matrix(&self.numerator, t);
        for p in &self.poles {
            let factor = inverse(&t.shift(-p.location)).map_err(|_| Error::PoleOnSpectrum)?;
            for _ in 0..p.multiplicity {
                out = &out * &factor;
            }
        }
        Ok(out)
    }
}

/// `sup_X |u|`, evaluated on the sampler's boundary loops.
pub fn sup_norm(u: &RationalFunction, s: &RegionSampler) -> Result<f64> {
    s.sup(|z| u.eval(z).map(|v| v.norm()))
}

/// `‖u(T)‖ / sup_X |u|`.
pub fn spectral_ratio(u: &RationalFunction, t: &ComplexMatrix, s: &RegionSampler) -> Result<f64> {
    let sup = sup_norm(u, s)?;
    if sup < ZERO_SUP {
        return Err(Error::ZeroFunction);
    }
    Ok(spectral_norm(&u.eval_matrix(t)?) / sup)
}
