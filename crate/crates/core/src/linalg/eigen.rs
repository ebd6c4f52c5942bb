use alloc::vec::Vec;

#[allow(unused_imports)] // float methods come from std when it is linked
use num_traits::{Float, Zero};

use super::{ComplexMatrix, C64};
use crate::error::{Error, Result};

/// Sweep budget of the cyclic Jacobi eigensolver.
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Off-diagonal stopping threshold, relative to the Frobenius norm.
pub const JACOBI_OFF_TOL: f64 = 1e-14;
/// Relative Hermitian-ness accepted by [`hermitian_eigen`].
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Spectral decomposition `M = V diag(values) V*` of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Unitary matrix whose columns are the matching eigenvectors.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn max(&self) -> f64 {
        *self.values.last().expect("dim >= 1")
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }

    /// `V f(Λ) V*` for a real function of the eigenvalues.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let v = &self.vectors;
        let fv: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = C64::zero();
                for k in 0..n {
                    acc += v[(i, k)] * v[(j, k)].conj() * fv[k];
                }
                out[(i, j)] = acc;
            }
        }
        out
    }
}

/// Cyclic complex Jacobi eigensolver for Hermitian matrices.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<HermitianEigen> {
    let n = m.dim();
    let norm = m.frobenius_norm();
    if m.hermitian_defect() > HERMITIAN_TOL * norm {
        return Err(Error::NotHermitian);
    }
    let mut a = m.hermitian_part();
    for i in 0..n {
        a[(i, i)] = C64::new(a[(i, i)].re, 0.0);
    }
    let mut v = ComplexMatrix::identity(n);
    let tol = JACOBI_OFF_TOL * norm;

    let mut converged = false;
    for _ in 0..=JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&a) <= tol {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[(i, i)]
            .re
            .partial_cmp(&a[(j, j)].re)
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let values = order.iter().map(|&k| a[(k, k)].re).collect();
    let mut vectors = ComplexMatrix::zeros(n);
    for (new, &old) in order.iter().enumerate() {
        for i in 0..n {
            vectors[(i, new)] = v[(i, old)];
        }
    }
    Ok(HermitianEigen { values, vectors })
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.dim();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += a[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// One two-sided rotation `A ← U* A U` annihilating `a_pq`, accumulated into `V`.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r == 0.0 || !r.is_finite() {
        return;
    }
    let phase = apq / r;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = (aqq - app) / (2.0 * r);
    let t = if theta == 0.0 {
        1.0
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    // U = diag(1, conj(phase)) · [[c, s], [-s, c]] on the (p, q) plane.
    let u_pp = C64::new(c, 0.0);
    let u_pq = C64::new(s, 0.0);
    let u_qp = -phase.conj() * s;
    let u_qq = phase.conj() * c;

    let n = a.dim();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * u_pp + akq * u_qp;
        a[(k, q)] = akp * u_pq + akq * u_qq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = u_pp.conj() * apk + u_qp.conj() * aqk;
        a[(q, k)] = u_pq.conj() * apk + u_qq.conj() * aqk;
    }
    a[(p, q)] = C64::zero();
    a[(q, p)] = C64::zero();
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * u_pp + vkq * u_qp;
        v[(k, q)] = vkp * u_pq + vkq * u_qq;
    }
}

/// Eigenvalues of a general complex matrix (Hessenberg reduction followed by
/// single-shift QR). No eigenvectors are formed.
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<C64>> {
    let n = m.dim();
    let mut h = hessenberg(m);
    let eps = f64::EPSILON;
    let scale = m.frobenius_norm().max(f64::MIN_POSITIVE);
    let mut hi = n - 1;
    let mut iter = 0usize;
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let sub = h[(l, l - 1)].norm();
            let diag = h[(l, l)].norm() + h[(l - 1, l - 1)].norm();
            if sub <= eps * diag.max(eps * scale) {
                h[(l, l - 1)] = C64::zero();
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        if iter > 60 * n.max(4) {
            return Err(Error::NoConvergence);
        }
        let shift = if iter.is_multiple_of(11) {
            h[(hi, hi)] + C64::new(h[(hi, hi - 1)].norm(), 0.0)
        } else {
            wilkinson_shift(&h, hi)
        };
        qr_step(&mut h, l, hi, shift);
    }
    Ok(h.diagonal())
}

fn wilkinson_shift(h: &ComplexMatrix, hi: usize) -> C64 {
    let a = h[(hi - 1, hi - 1)];
    let b = h[(hi - 1, hi)];
    let c = h[(hi, hi - 1)];
    let d = h[(hi, hi)];
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mid = (a + d) * 0.5;
    let l1 = mid + disc;
    let l2 = mid - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Explicit shifted QR step on the active window `lo..=hi` of a Hessenberg matrix.
fn qr_step(h: &mut ComplexMatrix, lo: usize, hi: usize, shift: C64) {
    for k in lo..=hi {
        h[(k, k)] -= shift;
    }
    let mut rots: Vec<(f64, C64)> = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
        for j in k..=hi {
            let x = h[(k, j)];
            let y = h[(k + 1, j)];
            h[(k, j)] = x * c + s * y;
            h[(k + 1, j)] = -s.conj() * x + y * c;
        }
        h[(k + 1, k)] = C64::zero();
        rots.push((c, s));
    }
    for (idx, &(c, s)) in rots.iter().enumerate() {
        let k = lo + idx;
        let top = (k + 2).min(hi);
        for i in lo..=top {
            let x = h[(i, k)];
            let y = h[(i, k + 1)];
            h[(i, k)] = x * c + y * s.conj();
            h[(i, k + 1)] = -x * s + y * c;
        }
    }
    for k in lo..=hi {
        h[(k, k)] += shift;
    }
}

/// Rotation `[[c, s], [-conj(s), c]]` mapping `(a, b)` to `(r, 0)`.
fn givens(a: C64, b: C64) -> (f64, C64) {
    let na = a.norm();
    let nb = b.norm();
    if nb == 0.0 {
        return (1.0, C64::zero());
    }
    if na == 0.0 {
        return (0.0, C64::new(1.0, 0.0));
    }
    let r = na.hypot(nb);
    (na / r, (a / na) * b.conj() / r)
}

fn hessenberg(m: &ComplexMatrix) -> ComplexMatrix {
    let n = m.dim();
    let mut a = m.clone();
    for k in 0..n.saturating_sub(2) {
        let norm_x = ((k + 1)..n)
            .map(|i| a[(i, k)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if norm_x == 0.0 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let phase = if x0.norm() == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * norm_x;
        let mut v: Vec<C64> = ((k + 1)..n).map(|i| a[(i, k)]).collect();
        v[0] -= alpha;
        let vn = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vn == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vn;
        }
        // A ← (I − 2vv*) A
        for j in 0..n {
            let dot: C64 = v
                .iter()
                .enumerate()
                .map(|(t, vi)| vi.conj() * a[(k + 1 + t, j)])
                .sum();
            for (t, vi) in v.iter().enumerate() {
                a[(k + 1 + t, j)] -= vi * dot * 2.0;
            }
        }
        // A ← A (I − 2vv*)
        for i in 0..n {
            let dot: C64 = v
                .iter()
                .enumerate()
                .map(|(t, vi)| a[(i, k + 1 + t)] * vi)
                .sum();
            for (t, vi) in v.iter().enumerate() {
                a[(i, k + 1 + t)] -= dot * vi.conj() * 2.0;
            }
        }
        for i in (k + 2)..n {
            a[(i, k)] = C64::zero();
        }
    }
    a
}
