use alloc::vec::Vec;

#[allow(unused_imports)] // float methods come from std when it is linked
use num_traits::{Float, Zero};

use super::{ComplexMatrix, C64};
use crate::error::{Error, Result};

/// Pivots below this fraction of `‖A‖_F` are treated as singular.
pub const SINGULAR_TOL: f64 = 1e-14;

/// Partial-pivoted LU factorization of a complex matrix.
#[derive(Clone, Debug)]
pub struct Lu {
    n: usize,
    lu: Vec<C64>,
    perm: Vec<usize>,
}

impl Lu {
    pub fn factor(a: &ComplexMatrix) -> Result<Self> {
        let n = a.dim();
        let norm = a.frobenius_norm();
        let mut lu = a.as_slice().to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pmag) = (k..n)
                .map(|i| (i, lu[i * n + k].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmag <= SINGULAR_TOL * norm || pmag == 0.0 {
                return Err(Error::Singular);
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu[k * n + k];
            for i in (k + 1)..n {
                let f = lu[i * n + k] / pivot;
                lu[i * n + k] = f;
                if f.is_zero() {
                    continue;
                }
                for j in (k + 1)..n {
                    let t = lu[k * n + j];
                    lu[i * n + j] -= f * t;
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    pub fn solve_vec(&self, b: &[C64]) -> Vec<C64> {
        let n = self.n;
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.lu[i * n + j] * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in (i + 1)..n {
                acc -= self.lu[i * n + j] * x[j];
            }
            x[i] = acc / self.lu[i * n + i];
        }
        x
    }

    pub fn solve(&self, b: &ComplexMatrix) -> ComplexMatrix {
        let n = self.n;
        let mut out = ComplexMatrix::zeros(n);
        for j in 0..n {
            let col = self.solve_vec(&b.column(j));
            for i in 0..n {
                out[(i, j)] = col[i];
            }
        }
        out
    }
}

/// Partial-pivoted LU of a real matrix, with solves for `A x = b` and `Aᵀ x = b`
/// against complex right-hand sides (real and imaginary parts are independent).
#[derive(Clone, Debug)]
pub struct RealLu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl RealLu {
    /// Factors the row-major `n × n` matrix `a`.
    pub fn factor(n: usize, a: &[f64]) -> Result<Self> {
        assert_eq!(a.len(), n * n, "dimension mismatch");
        let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut lu = a.to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pmag) = (k..n)
                .map(|i| (i, lu[i * n + k].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmag <= SINGULAR_TOL * norm || pmag == 0.0 {
                return Err(Error::Singular);
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu[k * n + k];
            for i in (k + 1)..n {
                let f = lu[i * n + k] / pivot;
                lu[i * n + k] = f;
                if f == 0.0 {
                    continue;
                }
                let (upper, lower) = lu.split_at_mut(i * n);
                let src = &upper[k * n + k + 1..k * n + n];
                for (dst, s) in lower[k + 1..n].iter_mut().zip(src) {
                    *dst -= f * s;
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.n;
        assert_eq!(b.len(), n, "dimension mismatch");
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= x[j] * self.lu[i * n + j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in (i + 1)..n {
                acc -= x[j] * self.lu[i * n + j];
            }
            x[i] = acc / self.lu[i * n + i];
        }
        x
    }

    /// Solves `Aᵀ x = b`. With `PA = LU`: `Uᵀ y = b`, `Lᵀ z = y`, `x = Pᵀ z`.
    pub fn solve_transpose(&self, b: &[C64]) -> Vec<C64> {
        let n = self.n;
        assert_eq!(b.len(), n, "dimension mismatch");
        let mut y = b.to_vec();
        for i in 0..n {
            let mut acc = y[i];
            for j in 0..i {
                acc -= y[j] * self.lu[j * n + i];
            }
            y[i] = acc / self.lu[i * n + i];
        }
        for i in (0..n).rev() {
            let mut acc = y[i];
            for j in (i + 1)..n {
                acc -= y[j] * self.lu[j * n + i];
            }
            y[i] = acc;
        }
        let mut x = alloc::vec![C64::zero(); n];
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = y[k];
        }
        x
    }
}
