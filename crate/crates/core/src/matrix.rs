//! Small dense matrices over plain scalars or jets.
//!
//! The matrices here are tiny (at most 6x6) and must work with jet-valued
//! entries, which rules out off-the-shelf linear algebra crates: inversion
//! happens in the ring of truncated Taylor series, pivoting on the constant
//! term.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::jet::{Jet, JetScalar};

/// Entry type a [`Mat`] can hold.
pub trait Entry:
    Copy
    + std::fmt::Debug
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_f64(x: f64) -> Self;
    /// Modulus of the leading (constant) part; used for pivot selection.
    fn pivot_mag(self) -> f64;
    /// Largest modulus over all stored data; used for norms.
    fn full_mag(self) -> f64;
    fn conj(self) -> Self;
    fn try_recip(self) -> Result<Self>;
}

impl Entry for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn pivot_mag(self) -> f64 {
        self.abs()
    }
    fn full_mag(self) -> f64 {
        self.abs()
    }
    fn conj(self) -> Self {
        self
    }
    fn try_recip(self) -> Result<Self> {
        if self.abs() < 1e-300 {
            return Err(Error::NumericDomain("division by zero".into()));
        }
        Ok(1.0 / self)
    }
}

impl Entry for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_f64(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn pivot_mag(self) -> f64 {
        self.norm()
    }
    fn full_mag(self) -> f64 {
        self.norm()
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn try_recip(self) -> Result<Self> {
        if self.norm() < 1e-300 {
            return Err(Error::NumericDomain("division by zero".into()));
        }
        Ok(1.0 / self)
    }
}

impl<T: JetScalar> Entry for Jet<T> {
    fn zero() -> Self {
        Jet::zero(crate::jet::MAX_ORDER)
    }
    fn one() -> Self {
        Jet::constant(T::one(), crate::jet::MAX_ORDER)
    }
    fn from_f64(x: f64) -> Self {
        Jet::constant(T::from_f64(x), crate::jet::MAX_ORDER)
    }
    fn pivot_mag(self) -> f64 {
        self.value().mag()
    }
    fn full_mag(self) -> f64 {
        self.max_mag()
    }
    fn conj(self) -> Self {
        Jet::conj(self)
    }
    fn try_recip(self) -> Result<Self> {
        self.recip()
    }
}

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat<T: Entry> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type MatF = Mat<f64>;
pub type MatC = Mat<Complex64>;
pub type JMatF = Mat<Jet<f64>>;
pub type JMatC = Mat<Jet<Complex64>>;

impl<T: Entry> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_rows(rows: &[&[T]]) -> Self {
        let r = rows.len();
        let c = rows[0].len();
        Self::from_fn(r, c, |i, j| rows[i][j])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    pub fn map<U: Entry>(&self, f: impl Fn(T) -> U) -> Mat<U> {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| f(*v)).collect() }
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|v| v * s)
    }

    pub fn trace(&self) -> T {
        assert!(self.is_square());
        let mut t = T::zero();
        for i in 0..self.rows {
            t = t + self[(i, i)];
        }
        t
    }

    /// Largest entry modulus (for jets: over all coefficients).
    pub fn max_mag(&self) -> f64 {
        self.data.iter().map(|v| v.full_mag()).fold(0.0, f64::max)
    }

    /// Largest modulus of the entrywise difference.
    pub fn max_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (*a - *b).full_mag())
            .fold(0.0, f64::max)
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Self) {
        for i in 0..b.rows {
            for j in 0..b.cols {
                self[(r0 + i, c0 + j)] = b[(i, j)];
            }
        }
    }

    /// Gaussian elimination with partial pivoting on the constant part.
    pub fn inverse(&self) -> Result<Self> {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let pivot_row = (col..n)
                .max_by(|&i, &j| {
                    a[(i, col)].pivot_mag().partial_cmp(&a[(j, col)].pivot_mag()).unwrap()
                })
                .unwrap();
            if a[(pivot_row, col)].pivot_mag() < 1e-250 {
                return Err(Error::NumericDomain("matrix is singular".into()));
            }
            if pivot_row != col {
                for j in 0..n {
                    a.data.swap(col * n + j, pivot_row * n + j);
                    inv.data.swap(col * n + j, pivot_row * n + j);
                }
            }
            let pinv = a[(col, col)].try_recip()?;
            for j in 0..n {
                a[(col, j)] = a[(col, j)] * pinv;
                inv[(col, j)] = inv[(col, j)] * pinv;
            }
            for i in 0..n {
                if i == col {
                    continue;
                }
                let f = a[(i, col)];
                if f.pivot_mag() == 0.0 && f.full_mag() == 0.0 {
                    continue;
                }
                for j in 0..n {
                    a[(i, j)] = a[(i, j)] - f * a[(col, j)];
                    inv[(i, j)] = inv[(i, j)] - f * inv[(col, j)];
                }
            }
        }
        Ok(inv)
    }

    /// Determinant by permutation expansion (division-free; fine for n <= 4).
    pub fn det(&self) -> T {
        assert!(self.is_square() && self.rows <= 4);
        let n = self.rows;
        let mut perm: Vec<usize> = (0..n).collect();
        let mut total = T::zero();
        permute(&mut perm, 0, &mut |p, sign| {
            let mut prod = if sign { T::one() } else { -T::one() };
            for (i, &pi) in p.iter().enumerate() {
                prod = prod * self[(i, pi)];
            }
            total = total + prod;
        });
        total
    }

    /// Matrix exponential by scaled Taylor series.
    pub fn exp(&self) -> Self {
        assert!(self.is_square());
        let n = self.rows;
        let norm = self.max_mag();
        let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
        let scaled = self.scale(T::from_f64(0.5f64.powi(squarings as i32)));
        let mut acc = Self::identity(n);
        let mut term = Self::identity(n);
        for k in 1..=24 {
            term = &term * &scaled;
            term = term.scale(T::from_f64(1.0 / k as f64));
            acc = &acc + &term;
            if term.max_mag() < 1e-18 {
                break;
            }
        }
        for _ in 0..squarings {
            acc = &acc * &acc;
        }
        acc
    }

    pub fn col(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }
}

fn permute<F: FnMut(&[usize], bool)>(p: &mut Vec<usize>, k: usize, f: &mut F) {
    let n = p.len();
    if k == n {
        let mut even = true;
        let mut seen = vec![false; n];
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                i = p[i];
                len += 1;
            }
            if len % 2 == 0 {
                even = !even;
            }
        }
        f(p, even);
        return;
    }
    for i in k..n {
        p.swap(k, i);
        permute(p, k + 1, f);
        p.swap(k, i);
    }
}

impl<T: Entry> std::ops::Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T: Entry> std::ops::IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Entry> std::ops::Add for &Mat<T> {
    type Output = Mat<T>;
    fn add(self, rhs: Self) -> Mat<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(rhs.data.iter()).map(|(a, b)| *a + *b).collect(),
        }
    }
}

impl<T: Entry> std::ops::Sub for &Mat<T> {
    type Output = Mat<T>;
    fn sub(self, rhs: Self) -> Mat<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(rhs.data.iter()).map(|(a, b)| *a - *b).collect(),
        }
    }
}

impl<T: Entry> std::ops::Neg for &Mat<T> {
    type Output = Mat<T>;
    fn neg(self) -> Mat<T> {
        self.map(|v| -v)
    }
}

impl<T: Entry> std::ops::Mul for &Mat<T> {
    type Output = Mat<T>;
    fn mul(self, rhs: Self) -> Mat<T> {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        let mut out = Mat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.full_mag() == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] = out[(i, j)] + a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

/// Lift a real matrix to a complex one.
pub fn lift_real(m: &MatF) -> MatC {
    m.map(|v| Complex64::new(v, 0.0))
}

/// Lift a real jet matrix to a complex jet matrix.
pub fn lift_jets(m: &JMatF) -> JMatC {
    m.map(|v| v.lift())
}

/// Take the value part of a jet matrix.
pub fn values_f(m: &JMatF) -> MatF {
    m.map(|v| v.value())
}

pub fn values_c(m: &JMatC) -> MatC {
    m.map(|v| v.value())
}

/// Promote a constant matrix to a jet matrix of the given order.
pub fn const_jets_f(m: &MatF, order: usize) -> JMatF {
    m.map(|v| Jet::constant(v, order))
}

pub fn const_jets_c(m: &MatC, order: usize) -> JMatC {
    m.map(|v| Jet::constant(v, order))
}
