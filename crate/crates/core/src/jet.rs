//! Truncated multivariate Taylor arithmetic (jets) in the four chart
//! coordinates, up to total degree [`MAX_ORDER`].
//!
//! A `Jet` stores the Taylor coefficients of a smooth function at a point,
//! indexed by monomials x0^i0 x1^i1 x2^i2 x3^i3 with i0+i1+i2+i3 <= 3.
//! Arithmetic on jets is exact truncation of the arithmetic on Taylor
//! series, so derivatives extracted from a jet are exact to machine
//! precision (no finite-difference step tuning). Each jet carries the
//! `order` up to which its coefficients are valid; binary operations
//! propagate the minimum and differentiation lowers it by one.

use num_complex::Complex64;
use once_cell::sync::Lazy;

use crate::error::{Error, Result};

/// Highest total derivative order a jet can carry.
pub const MAX_ORDER: usize = 3;
/// Number of monomials of total degree <= 3 in 4 variables.
pub const NUM_COEFFS: usize = 35;
/// Number of chart coordinates.
pub const DIM: usize = 4;

/// Multi-index exponents for each coefficient slot, grouped by total degree.
static MONOMIALS: Lazy<Vec<[u8; DIM]>> = Lazy::new(|| {
    let mut out = Vec::with_capacity(NUM_COEFFS);
    for total in 0..=MAX_ORDER as u8 {
        for i0 in (0..=total).rev() {
            for i1 in (0..=total - i0).rev() {
                for i2 in (0..=total - i0 - i1).rev() {
                    let i3 = total - i0 - i1 - i2;
                    out.push([i0, i1, i2, i3]);
                }
            }
        }
    }
    assert_eq!(out.len(), NUM_COEFFS);
    out
});

fn monomial_index(m: &[u8; DIM]) -> usize {
    MONOMIALS.iter().position(|x| x == m).expect("monomial in range")
}

/// Total degree of each coefficient slot.
static DEGREE: Lazy<[u8; NUM_COEFFS]> = Lazy::new(|| {
    let mut d = [0u8; NUM_COEFFS];
    for (i, m) in MONOMIALS.iter().enumerate() {
        d[i] = m.iter().sum();
    }
    d
});

/// Sparse multiplication table: (lhs slot, rhs slot, out slot).
static MUL_TABLE: Lazy<Vec<(u8, u8, u8)>> = Lazy::new(|| {
    let mut t = Vec::new();
    for (i, mi) in MONOMIALS.iter().enumerate() {
        for (j, mj) in MONOMIALS.iter().enumerate() {
            let total: u8 = mi.iter().sum::<u8>() + mj.iter().sum::<u8>();
            if total as usize > MAX_ORDER {
                continue;
            }
            let sum = [mi[0] + mj[0], mi[1] + mj[1], mi[2] + mj[2], mi[3] + mj[3]];
            t.push((i as u8, j as u8, monomial_index(&sum) as u8));
        }
    }
    t
});

/// Differentiation table per coordinate: (target slot, source slot, factor).
static DERIV_TABLE: Lazy<[Vec<(u8, u8, f64)>; DIM]> = Lazy::new(|| {
    std::array::from_fn(|mu| {
        let mut t = Vec::new();
        for (k, mk) in MONOMIALS.iter().enumerate() {
            if (mk.iter().sum::<u8>() as usize) >= MAX_ORDER {
                continue;
            }
            let mut src = *mk;
            src[mu] += 1;
            t.push((k as u8, monomial_index(&src) as u8, f64::from(src[mu])));
        }
        t
    })
});

/// Scalar coefficient type a jet can carry: `f64` or `Complex64`.
pub trait JetScalar:
    Copy
    + PartialEq
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
    /// Modulus.
    fn mag(self) -> f64;
    fn conj(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn recip(self) -> Self;
    fn is_finite(self) -> bool;
}

impl JetScalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn mag(self) -> f64 {
        self.abs()
    }
    fn conj(self) -> Self {
        self
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn recip(self) -> Self {
        1.0 / self
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

impl JetScalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_f64(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn mag(self) -> f64 {
        self.norm()
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn exp(self) -> Self {
        Complex64::exp(self)
    }
    fn ln(self) -> Self {
        Complex64::ln(self)
    }
    fn sqrt(self) -> Self {
        Complex64::sqrt(self)
    }
    fn recip(self) -> Self {
        1.0 / self
    }
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// Taylor jet of a smooth scalar at a chart point.
#[derive(Clone, Copy, Debug)]
pub struct Jet<T: JetScalar> {
    order: u8,
    c: [T; NUM_COEFFS],
}

pub type JetF = Jet<f64>;
pub type JetC = Jet<Complex64>;

impl<T: JetScalar> Jet<T> {
    pub fn constant(v: T, order: usize) -> Self {
        assert!(order <= MAX_ORDER);
        let mut c = [T::zero(); NUM_COEFFS];
        c[0] = v;
        Jet { order: order as u8, c }
    }

    /// Jet of the coordinate function `x_mu` at a point with coordinate value `v`.
    pub fn variable(mu: usize, v: T, order: usize) -> Self {
        assert!(mu < DIM && order <= MAX_ORDER);
        let mut j = Self::constant(v, order);
        if order >= 1 {
            j.c[1 + mu] = T::one();
        }
        j
    }

    pub fn zero(order: usize) -> Self {
        Self::constant(T::zero(), order)
    }

    pub fn order(&self) -> usize {
        self.order as usize
    }

    /// Function value (degree-0 coefficient).
    pub fn value(&self) -> T {
        self.c[0]
    }

    /// Raw coefficient of the monomial slot `k` (Taylor convention:
    /// f = sum c_alpha (x - x0)^alpha, so c_alpha = d^alpha f / alpha!).
    pub fn coeff(&self, k: usize) -> T {
        self.c[k]
    }

    pub fn set_coeff(&mut self, k: usize, v: T) {
        debug_assert!(DEGREE[k] as usize <= self.order());
        self.c[k] = v;
    }

    /// First partial derivative value along `mu`. Requires order >= 1.
    pub fn d1(&self, mu: usize) -> T {
        debug_assert!(self.order >= 1);
        self.c[1 + mu]
    }

    /// Largest coefficient modulus over the valid range.
    pub fn max_mag(&self) -> f64 {
        self.c
            .iter()
            .zip(DEGREE.iter())
            .filter(|(_, d)| (**d as usize) <= self.order())
            .map(|(v, _)| v.mag())
            .fold(0.0, f64::max)
    }

    fn min_order(a: &Self, b: &Self) -> u8 {
        a.order.min(b.order)
    }

    pub fn truncated(mut self, order: usize) -> Self {
        assert!(order <= MAX_ORDER);
        if order < self.order as usize {
            for k in 0..NUM_COEFFS {
                if DEGREE[k] as usize > order {
                    self.c[k] = T::zero();
                }
            }
            self.order = order as u8;
        }
        self
    }

    pub fn scale(mut self, s: T) -> Self {
        for v in self.c.iter_mut() {
            *v = *v * s;
        }
        self
    }

    pub fn conj(mut self) -> Self {
        for v in self.c.iter_mut() {
            *v = v.conj();
        }
        self
    }

    /// Jet of the partial derivative along `mu`; the result is valid to one
    /// order less than the input.
    pub fn derivative(&self, mu: usize) -> Result<Self> {
        if self.order == 0 {
            return Err(Error::OrderExceeded { needed: 1, available: 0 });
        }
        let ord = self.order - 1;
        let mut out = Jet { order: ord, c: [T::zero(); NUM_COEFFS] };
        for &(dst, src, factor) in DERIV_TABLE[mu].iter() {
            if DEGREE[dst as usize] > ord {
                continue;
            }
            out.c[dst as usize] = self.c[src as usize] * T::from_f64(factor);
        }
        Ok(out)
    }

    /// Composition with a univariate cubic: a0 + a1 g + a2 g^2 + a3 g^3,
    /// where `self` must have zero constant term.
    fn poly3(&self, a: [T; 4]) -> Self {
        debug_assert_eq!(self.value(), T::zero());
        let g = *self;
        let mut acc = Self::constant(a[3], self.order());
        for k in (0..3).rev() {
            acc = acc * g + Self::constant(a[k], self.order());
        }
        acc
    }

    fn nonconst(&self) -> Self {
        let mut g = *self;
        g.c[0] = T::zero();
        g
    }

    pub fn exp(&self) -> Self {
        let e0 = self.value().exp();
        let g = self.nonconst();
        let sixth = T::from_f64(1.0 / 6.0);
        let half = T::from_f64(0.5);
        g.poly3([T::one(), T::one(), half, sixth]).scale(e0)
    }

    /// Natural log; the value must be nonzero (positive for real jets).
    pub fn ln(&self) -> Result<Self> {
        let v = self.value();
        if v.mag() < 1e-300 || !v.ln().is_finite() {
            return Err(Error::NumericDomain("log of zero or out-of-domain value".into()));
        }
        let h = self.nonconst().scale(v.recip());
        let third = T::from_f64(1.0 / 3.0);
        let mut out = h.poly3([T::zero(), T::one(), T::from_f64(-0.5), third]);
        out.c[0] = v.ln();
        Ok(out)
    }

    pub fn recip(&self) -> Result<Self> {
        let v = self.value();
        if v.mag() < 1e-300 {
            return Err(Error::NumericDomain("reciprocal of zero".into()));
        }
        let h = self.nonconst().scale(v.recip());
        let m1 = -T::one();
        Ok(h.poly3([T::one(), m1, T::one(), m1]).scale(v.recip()))
    }

    pub fn sqrt(&self) -> Result<Self> {
        let v = self.value();
        let s0 = v.sqrt();
        if v.mag() < 1e-300 || !s0.is_finite() {
            return Err(Error::NumericDomain("sqrt of zero or out-of-domain value".into()));
        }
        let h = self.nonconst().scale(v.recip());
        Ok(h
            .poly3([T::one(), T::from_f64(0.5), T::from_f64(-0.125), T::from_f64(0.0625)])
            .scale(s0))
    }

    pub fn powi(&self, n: i32) -> Result<Self> {
        if n < 0 {
            return self.recip()?.powi(-n);
        }
        let mut acc = Self::constant(T::one(), self.order());
        for _ in 0..n {
            acc = acc * *self;
        }
        Ok(acc)
    }
}

impl Jet<f64> {
    /// Reinterpret a real jet as a complex one.
    pub fn lift(&self) -> Jet<Complex64> {
        let mut out = Jet::<Complex64>::zero(self.order());
        for k in 0..NUM_COEFFS {
            out.c[k] = Complex64::new(self.c[k], 0.0);
        }
        out
    }
}

impl<T: JetScalar> Jet<T> {
    /// Promote a real jet into this coefficient type.
    pub fn from_real(j: &Jet<f64>) -> Self {
        let mut out = Self::zero(j.order());
        for k in 0..NUM_COEFFS {
            out.c[k] = T::from_f64(j.coeff(k));
        }
        out
    }
}

impl Jet<Complex64> {
    /// Real part, coefficientwise.
    pub fn re(&self) -> Jet<f64> {
        let mut out = Jet::<f64>::zero(self.order());
        for k in 0..NUM_COEFFS {
            out.c[k] = self.c[k].re;
        }
        out
    }

    pub fn im(&self) -> Jet<f64> {
        let mut out = Jet::<f64>::zero(self.order());
        for k in 0..NUM_COEFFS {
            out.c[k] = self.c[k].im;
        }
        out
    }
}

impl<T: JetScalar> std::ops::Add for Jet<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let order = Self::min_order(&self, &rhs);
        let mut c = [T::zero(); NUM_COEFFS];
        for k in 0..NUM_COEFFS {
            if DEGREE[k] <= order {
                c[k] = self.c[k] + rhs.c[k];
            }
        }
        Jet { order, c }
    }
}

impl<T: JetScalar> std::ops::Sub for Jet<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let order = Self::min_order(&self, &rhs);
        let mut c = [T::zero(); NUM_COEFFS];
        for k in 0..NUM_COEFFS {
            if DEGREE[k] <= order {
                c[k] = self.c[k] - rhs.c[k];
            }
        }
        Jet { order, c }
    }
}

impl<T: JetScalar> std::ops::Neg for Jet<T> {
    type Output = Self;
    fn neg(mut self) -> Self {
        for v in self.c.iter_mut() {
            *v = -*v;
        }
        self
    }
}

impl<T: JetScalar> std::ops::Mul for Jet<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let order = Self::min_order(&self, &rhs);
        let mut c = [T::zero(); NUM_COEFFS];
        for &(i, j, k) in MUL_TABLE.iter() {
            if DEGREE[k as usize] > order {
                continue;
            }
            c[k as usize] = c[k as usize] + self.c[i as usize] * rhs.c[j as usize];
        }
        Jet { order, c }
    }
}

/// Index of the coefficient slot for the given exponent tuple.
pub fn slot(exponents: [u8; DIM]) -> usize {
    monomial_index(&exponents)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exp_series_coefficients() {
        // exp around 0 in x0: coefficients 1, 1, 1/2, 1/6
        let x = JetF::variable(0, 0.0, 3);
        let e = x.exp();
        assert_relative_eq!(e.coeff(slot([0, 0, 0, 0])), 1.0);
        assert_relative_eq!(e.coeff(slot([1, 0, 0, 0])), 1.0);
        assert_relative_eq!(e.coeff(slot([2, 0, 0, 0])), 0.5);
        assert_relative_eq!(e.coeff(slot([3, 0, 0, 0])), 1.0 / 6.0);
    }

    #[test]
    fn log_series_coefficients() {
        // ln(1 + x1): 0, 1, -1/2, 1/3
        let one = JetF::constant(1.0, 3);
        let x = JetF::variable(1, 0.0, 3);
        let l = (one + x).ln().unwrap();
        assert_relative_eq!(l.coeff(slot([0, 0, 0, 0])), 0.0);
        assert_relative_eq!(l.coeff(slot([0, 1, 0, 0])), 1.0);
        assert_relative_eq!(l.coeff(slot([0, 2, 0, 0])), -0.5);
        assert_relative_eq!(l.coeff(slot([0, 3, 0, 0])), 1.0 / 3.0);
    }

    #[test]
    fn reciprocal_geometric_series() {
        let one = JetF::constant(1.0, 3);
        let x = JetF::variable(2, 0.0, 3);
        let r = (one - x).recip().unwrap();
        for k in 0..=3u8 {
            assert_relative_eq!(r.coeff(slot([0, 0, k, 0])), 1.0);
        }
    }

    #[test]
    fn sqrt_squares_back() {
        let mut f = JetF::variable(0, 2.0, 3);
        f = f * f + JetF::variable(3, 0.5, 3);
        let s = f.sqrt().unwrap();
        let back = s * s;
        for k in 0..NUM_COEFFS {
            assert_relative_eq!(back.coeff(k), f.coeff(k), epsilon = 1e-12);
        }
    }

    #[test]
    fn product_rule_cross_terms() {
        // f = x0 * x1 at (2, 3): value 6, df/dx0 = 3, df/dx1 = 2, d2f/dx0dx1 = 1
        let f = JetF::variable(0, 2.0, 3) * JetF::variable(1, 3.0, 3);
        assert_relative_eq!(f.value(), 6.0);
        assert_relative_eq!(f.d1(0), 3.0);
        assert_relative_eq!(f.d1(1), 2.0);
        assert_relative_eq!(f.coeff(slot([1, 1, 0, 0])), 1.0);
    }

    #[test]
    fn derivative_lowers_order() {
        let f = JetF::variable(0, 1.0, 2);
        let d = f.derivative(0).unwrap();
        assert_eq!(d.order(), 1);
        assert_relative_eq!(d.value(), 1.0);
        let d0 = d.derivative(0).unwrap();
        assert!(d0.derivative(0).is_err());
    }

    #[test]
    fn mixed_partials_symmetric_exactly() {
        // Exact-jet representation stores one coefficient per monomial, so
        // the two differentiation orders read the same slot.
        let f = (JetF::variable(0, 0.3, 3) * JetF::variable(1, -0.2, 3)).exp();
        let d01 = f.derivative(0).unwrap().derivative(1).unwrap();
        let d10 = f.derivative(1).unwrap().derivative(0).unwrap();
        for k in 0..NUM_COEFFS {
            assert_eq!(d01.coeff(k), d10.coeff(k));
        }
    }

    #[test]
    fn complex_exp_matches_euler() {
        use num_complex::Complex64 as C;
        let j = JetC::constant(C::new(0.0, std::f64::consts::PI), 2);
        let e = j.exp();
        assert_relative_eq!(e.value().re, -1.0, epsilon = 1e-14);
        assert_relative_eq!(e.value().im, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn truncation_zeroes_high_coeffs() {
        let f = JetF::variable(0, 1.0, 3).exp();
        let t = f.truncated(1);
        assert_eq!(t.order(), 1);
        assert_eq!(t.coeff(slot([2, 0, 0, 0])), 0.0);
    }
}
