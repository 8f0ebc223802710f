//! Seeded random generators for algebra elements, expressions and chart
//! points, plus the finite-difference oracle used to cross-check jet
//! derivatives.
//!
//! Gauge parameters are low-degree polynomials with bounded coefficients so
//! that order-3 jets stay well conditioned; positive scalars (Weyl factors,
//! dilaton seeds) are exponentials of such polynomials.

use rand::Rng;

use crate::algebra::{so13_basis, GroupElement, LieElement};
use crate::error::Result;
use crate::expr::Expr;
use crate::forms::{ChartPoint, MatrixForm};
use crate::matrix::{MatC, MatF};

pub fn random_row<R: Rng>(rng: &mut R) -> MatF {
    MatF::from_fn(1, 4, |_, _| rng.gen_range(-0.5..0.5))
}

pub fn random_col<R: Rng>(rng: &mut R) -> MatF {
    MatF::from_fn(4, 1, |_, _| rng.gen_range(-0.5..0.5))
}

/// Random so(1,3) matrix with bounded basis coefficients.
pub fn random_so13<R: Rng>(rng: &mut R) -> MatF {
    let basis = so13_basis();
    let mut s = MatF::zeros(4, 4);
    for b in basis.iter() {
        s = &s + &b.scale(rng.gen_range(-0.4..0.4));
    }
    s
}

/// Random SO(1,3) matrix via the exponential map.
pub fn random_lorentz_matrix<R: Rng>(rng: &mut R) -> MatF {
    random_so13(rng).exp()
}

/// Random SL(2,C) matrix: exponential of a traceless 2x2 complex matrix.
pub fn random_sl2<R: Rng>(rng: &mut R) -> MatC {
    use num_complex::Complex64;
    let mut x = MatC::zeros(2, 2);
    for k in 1..=3 {
        let c = Complex64::new(rng.gen_range(-0.4..0.4), rng.gen_range(-0.4..0.4));
        x = &x + &crate::algebra::pauli(k).scale(c);
    }
    x.exp()
}

pub fn random_lie_element<R: Rng>(rng: &mut R) -> LieElement {
    LieElement::new(
        rng.gen_range(-0.5..0.5),
        random_so13(rng),
        random_row(rng),
        random_col(rng),
    )
    .expect("construction is valid by sampling")
}

/// Random element of H as a product Z(z) S K1(r).
pub fn random_group_element<R: Rng>(rng: &mut R) -> GroupElement {
    let z = (rng.gen_range(-0.6..0.6f64)).exp();
    GroupElement::general(z, random_lorentz_matrix(rng), &random_row(rng))
        .expect("sampled factors are valid")
}

/// Random polynomial in x0..x3 of the given total degree with coefficients
/// in [-scale, scale].
pub fn random_poly<R: Rng>(rng: &mut R, degree: usize, scale: f64) -> Expr {
    let mut acc = Expr::constant(rng.gen_range(-scale..scale));
    for _ in 0..(degree * 3) {
        let mut term = Expr::constant(rng.gen_range(-scale..scale));
        let nfact = rng.gen_range(1..=degree);
        for _ in 0..nfact {
            term = term.mul(Expr::var(rng.gen_range(0..4)));
        }
        acc = acc.add(term);
    }
    acc
}

/// Strictly positive random scalar: exp of a bounded polynomial.
pub fn random_positive<R: Rng>(rng: &mut R, degree: usize, scale: f64) -> Expr {
    random_poly(rng, degree, scale).exp()
}

/// Uniform sample points in a box.
pub fn sample_points<R: Rng>(rng: &mut R, bounds: &[[f64; 2]; 4], n: usize) -> Vec<ChartPoint> {
    (0..n)
        .map(|_| std::array::from_fn(|mu| rng.gen_range(bounds[mu][0]..bounds[mu][1])))
        .collect()
}

/// Default sampling box.
pub fn unit_box() -> [[f64; 2]; 4] {
    [[-0.5, 0.5]; 4]
}

/// Central finite difference of a form component along `mu` with step `h`:
/// the independent oracle for jet derivatives.
pub fn fd_partial(
    form: &MatrixForm<f64>,
    comp: usize,
    x: &ChartPoint,
    mu: usize,
    h: f64,
) -> Result<MatF> {
    let mut xp = *x;
    let mut xm = *x;
    xp[mu] += h;
    xm[mu] -= h;
    let fp = form.eval(&xp)?.remove(comp);
    let fm = form.eval(&xm)?.remove(comp);
    Ok((&fp - &fm).scale(0.5 / h))
}
