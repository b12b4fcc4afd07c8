//! Small dense matrices over a generic [`Scalar`], plus the exact LDL*
//! positive-semidefiniteness check used by certificate verification.

use crate::scalar::{Scalar, Sign};
use std::fmt;

/// Row-major dense matrix over a scalar type.
#[derive(Clone, PartialEq)]
pub struct Mat<S> {
    pub rows: usize,
    pub cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Mat<S> {
    pub fn zeros(rows: usize, cols: usize) -> Mat<S> {
        Mat {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Mat<S> {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Mat<S> {
        let mut m = Mat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn scalar(value: S) -> Mat<S> {
        let mut m = Mat::zeros(1, 1);
        m[(0, 0)] = value;
        m
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn matmul(&self, other: &Mat<S>) -> Mat<S> {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Mat::<S>::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if b.is_zero() {
                        continue;
                    }
                    let cur = out[(i, j)].clone();
                    out[(i, j)] = cur + a.clone() * b.clone();
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Mat<S>) -> Mat<S> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat::from_fn(self.rows, self.cols, |i, j| {
            self[(i, j)].clone() + other[(i, j)].clone()
        })
    }

    pub fn sub(&self, other: &Mat<S>) -> Mat<S> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat::from_fn(self.rows, self.cols, |i, j| {
            self[(i, j)].clone() - other[(i, j)].clone()
        })
    }

    pub fn scale(&self, s: &S) -> Mat<S> {
        Mat::from_fn(self.rows, self.cols, |i, j| {
            self[(i, j)].clone() * s.clone()
        })
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Mat<S> {
        Mat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> S {
        assert_eq!(self.rows, self.cols);
        let mut t = S::zero();
        for i in 0..self.rows {
            t = t + self[(i, i)].clone();
        }
        t
    }

    pub fn max_abs_approx(&self) -> f64 {
        self.data
            .iter()
            .map(|x| x.approx().norm())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self) -> bool {
        if self.rows != self.cols {
            return false;
        }
        for i in 0..self.rows {
            for j in i..self.cols {
                if self[(i, j)] != self[(j, i)].conj() {
                    return false;
                }
            }
        }
        true
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &S)> {
        let cols = self.cols;
        self.data
            .iter()
            .enumerate()
            .map(move |(k, v)| (k / cols, k % cols, v))
    }
}

impl<S> std::ops::Index<(usize, usize)> for Mat<S> {
    type Output = S;
    fn index(&self, (i, j): (usize, usize)) -> &S {
        &self.data[i * self.cols + j]
    }
}

impl<S> std::ops::IndexMut<(usize, usize)> for Mat<S> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        &mut self.data[i * self.cols + j]
    }
}

impl<S: Scalar> fmt::Debug for Mat<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{}  ", self[(i, j)])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Outcome of the exact LDL* factorisation of a Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum PsdCheck {
    /// All pivots non-negative; the matrix is positive semidefinite.
    Psd { rank: usize },
    /// A witness of indefiniteness (pivot index and a description).
    NotPsd { detail: String },
    NotHermitian,
}

impl PsdCheck {
    pub fn is_psd(&self) -> bool {
        matches!(self, PsdCheck::Psd { .. })
    }
}

/// Exact LDL* with diagonal pivoting.
///
/// For a Hermitian PSD matrix every step admits a positive diagonal pivot
/// until the remaining block vanishes; a negative diagonal entry, or a zero
/// diagonal with a non-zero row, certifies indefiniteness.  Runs over any
/// exact scalar (real signs are decided exactly).
pub fn ldl_psd_check<S: Scalar>(m: &Mat<S>) -> PsdCheck {
    assert!(S::EXACT, "ldl_psd_check requires an exact scalar");
    if !m.is_hermitian() {
        return PsdCheck::NotHermitian;
    }
    let n = m.rows;
    let mut a = m.clone();
    let mut active: Vec<usize> = (0..n).collect();
    let mut rank = 0usize;
    while !active.is_empty() {
        // pick a strictly positive diagonal pivot
        let mut pivot: Option<usize> = None;
        for (pos, &i) in active.iter().enumerate() {
            let d = &a[(i, i)];
            if !d.is_real() {
                return PsdCheck::NotPsd {
                    detail: format!("diagonal entry {i} is not real"),
                };
            }
            match d.real_sign() {
                Sign::Neg => {
                    return PsdCheck::NotPsd {
                        detail: format!("negative diagonal pivot at index {i}"),
                    }
                }
                Sign::Pos => {
                    pivot = Some(pos);
                    break;
                }
                Sign::Zero => {}
            }
        }
        let Some(pos) = pivot else {
            // all remaining diagonal entries are zero: PSD forces the block to vanish
            for &i in &active {
                for &j in &active {
                    if !a[(i, j)].is_zero() {
                        return PsdCheck::NotPsd {
                            detail: format!(
                                "zero diagonal at index {i} with non-zero entry ({i},{j})"
                            ),
                        };
                    }
                }
            }
            break;
        };
        let p = active.remove(pos);
        rank += 1;
        let d_inv = a[(p, p)].inv();
        // Schur complement update on the remaining active block.
        let col: Vec<(usize, S)> = active.iter().map(|&i| (i, a[(i, p)].clone())).collect();
        for &(i, ref ci) in col.iter() {
            for &(j, ref cj) in col.iter() {
                let delta = ci.clone() * cj.conj() * d_inv.clone();
                let cur = a[(i, j)].clone();
                a[(i, j)] = cur - delta;
            }
        }
    }
    PsdCheck::Psd { rank }
}
