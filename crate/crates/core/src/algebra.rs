//! The conformal group sector: graded so(2,4), the parabolic subgroup H
//! with its Weyl / Lorentz / conformal-boost factors, the complex double
//! cover su(2,2) / SU(2,2), and the maps between the two pictures.
//!
//! Real 6x6 matrices are blocked 1+4+1. An algebra element
//!
//! ```text
//!   | eps   iota    0    |
//!   | tau    s    iota^t |        iota^t = eta iota^T,  tau^t = tau^T eta
//!   |  0    tau^t  -eps  |
//! ```
//!
//! satisfies M^T Sigma + Sigma M = 0 for Sigma = antidiag(-1, eta, -1).
//! The complex picture blocks 2+2 and preserves SigmaBar = offdiag(1,1).

use num_complex::Complex64;
use once_cell::sync::Lazy;

use crate::error::{Error, Result};
use crate::jet::{Jet, JetF};
use crate::matrix::{JMatC, JMatF, MatC, MatF};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Minkowski metric diag(+1, -1, -1, -1).
pub fn eta() -> MatF {
    let mut m = MatF::identity(4);
    for i in 1..4 {
        m[(i, i)] = -1.0;
    }
    m
}

/// Group metric of SO(2,4) in the parabolic block basis.
pub fn sigma_metric() -> MatF {
    let mut m = MatF::zeros(6, 6);
    m[(0, 5)] = -1.0;
    m[(5, 0)] = -1.0;
    m.set_block(1, 1, &eta());
    m
}

/// Group metric of SU(2,2): offdiag(1_2, 1_2).
pub fn sigma_bar() -> MatC {
    let mut m = MatC::zeros(4, 4);
    for k in 0..2 {
        m[(k, 2 + k)] = Complex64::new(1.0, 0.0);
        m[(2 + k, k)] = Complex64::new(1.0, 0.0);
    }
    m
}

/// Pauli matrices; index 0 is the identity.
pub fn pauli(a: usize) -> MatC {
    let o = Complex64::new(1.0, 0.0);
    let z = Complex64::new(0.0, 0.0);
    match a {
        0 => MatC::identity(2),
        1 => MatC::from_rows(&[&[z, o], &[o, z]]),
        2 => MatC::from_rows(&[&[z, -I], &[I, z]]),
        3 => MatC::from_rows(&[&[o, z], &[z, -o]]),
        _ => panic!("pauli index out of range"),
    }
}

/// x -> x^a sigma_a, contracting tuple components (no index raising).
pub fn vec_to_hermitian(x: &[f64; 4]) -> MatC {
    let mut m = MatC::zeros(2, 2);
    for (a, &v) in x.iter().enumerate() {
        m = &m + &pauli(a).scale(Complex64::new(v, 0.0));
    }
    m
}

/// Jet-valued version of [`vec_to_hermitian`].
pub fn vec_to_hermitian_jets(x: &[Jet<f64>; 4]) -> JMatC {
    let order = x[0].order();
    let mut m = JMatC::from_fn(2, 2, |_, _| Jet::zero(order));
    for (a, v) in x.iter().enumerate() {
        let p = pauli(a);
        let term = p.map(|c| Jet::<Complex64>::constant(c, order) * v.lift());
        m = &m + &term;
    }
    m
}

/// eta r^T: lower a row covector into the column slot of the block pattern.
pub fn row_t(r: &MatF) -> MatF {
    assert_eq!((r.rows(), r.cols()), (1, 4));
    &eta() * &r.transpose()
}

/// tau^T eta: raise a column vector into the row slot.
pub fn col_t(tau: &MatF) -> MatF {
    assert_eq!((tau.rows(), tau.cols()), (4, 1));
    &tau.transpose() * &eta()
}

/// Tolerance for membership checks in constructors.
const GROUP_TOL: f64 = 1e-9;

/// Residual of the so(1,3) condition s^T eta + eta s = 0.
pub fn so13_residual(s: &MatF) -> f64 {
    (&(&s.transpose() * &eta()) + &(&eta() * s)).max_mag()
}

/// Residual of the so(2,4) condition M^T Sigma + Sigma M = 0.
pub fn so24_residual(m: &MatF) -> f64 {
    let sig = sigma_metric();
    (&(&m.transpose() * &sig) + &(&sig * m)).max_mag()
}

/// Residual of the group condition M^T Sigma M = Sigma.
pub fn h_residual(m: &MatF) -> f64 {
    let sig = sigma_metric();
    (&(&m.transpose() * &sig) * m).max_diff(&sig)
}

/// Residual of M* SigmaBar M = SigmaBar.
pub fn su22_group_residual(m: &MatC) -> f64 {
    let sig = sigma_bar();
    (&(&m.adjoint() * &sig) * m).max_diff(&sig)
}

/// Residual of X* SigmaBar + SigmaBar X = 0.
pub fn su22_residual(m: &MatC) -> f64 {
    let sig = sigma_bar();
    (&(&m.adjoint() * &sig) + &(&sig * m)).max_mag()
}

/// Graded element of so(2,4).
#[derive(Clone, Debug)]
pub struct LieElement {
    pub epsilon: f64,
    /// Lorentz part, in so(1,3).
    pub s: MatF,
    /// Conformal-boost part (grade +1), a row covector.
    pub iota: MatF,
    /// Translation part (grade -1), a column vector.
    pub tau: MatF,
}

impl LieElement {
    pub fn new(epsilon: f64, s: MatF, iota: MatF, tau: MatF) -> Result<Self> {
        if so13_residual(&s) > GROUP_TOL {
            return Err(Error::Group("Lorentz part is not in so(1,3)".into()));
        }
        if (iota.rows(), iota.cols()) != (1, 4) || (tau.rows(), tau.cols()) != (4, 1) {
            return Err(Error::Shape("iota must be 1x4 and tau 4x1".into()));
        }
        Ok(LieElement { epsilon, s, iota, tau })
    }

    pub fn zero() -> Self {
        LieElement {
            epsilon: 0.0,
            s: MatF::zeros(4, 4),
            iota: MatF::zeros(1, 4),
            tau: MatF::zeros(4, 1),
        }
    }

    pub fn from_epsilon(epsilon: f64) -> Self {
        LieElement { epsilon, ..Self::zero() }
    }

    pub fn from_iota(iota: MatF) -> Self {
        LieElement { iota, ..Self::zero() }
    }

    pub fn from_tau(tau: MatF) -> Self {
        LieElement { tau, ..Self::zero() }
    }

    /// Assemble the 6x6 matrix of the block pattern.
    pub fn assembled(&self) -> MatF {
        let mut m = MatF::zeros(6, 6);
        m[(0, 0)] = self.epsilon;
        m[(5, 5)] = -self.epsilon;
        m.set_block(0, 1, &self.iota);
        m.set_block(1, 5, &row_t(&self.iota));
        m.set_block(1, 0, &self.tau);
        m.set_block(5, 1, &col_t(&self.tau));
        m.set_block(1, 1, &self.s);
        m
    }

    /// Decompose a 6x6 matrix; fails when it is not in so(2,4).
    pub fn from_matrix(m: &MatF) -> Result<Self> {
        if so24_residual(m) > GROUP_TOL {
            return Err(Error::Group("matrix is not in so(2,4)".into()));
        }
        Ok(Self::decompose_unchecked(m))
    }

    pub(crate) fn decompose_unchecked(m: &MatF) -> Self {
        LieElement {
            epsilon: m[(0, 0)],
            s: m.block(1, 1, 4, 4),
            iota: m.block(0, 1, 1, 4),
            tau: m.block(1, 0, 4, 1),
        }
    }

    /// Grade -1 projection.
    pub fn proj_minus(&self) -> Self {
        Self::from_tau(self.tau.clone())
    }

    /// Grade 0 projection.
    pub fn proj_zero(&self) -> Self {
        LieElement { epsilon: self.epsilon, s: self.s.clone(), ..Self::zero() }
    }

    /// Grade +1 projection.
    pub fn proj_plus(&self) -> Self {
        Self::from_iota(self.iota.clone())
    }

    pub fn max_mag(&self) -> f64 {
        self.assembled().max_mag()
    }

    pub fn max_diff(&self, other: &Self) -> f64 {
        self.assembled().max_diff(&other.assembled())
    }
}

/// Matrix commutator, re-decomposed into graded parts.
pub fn bracket(x: &LieElement, y: &LieElement) -> LieElement {
    let (a, b) = (x.assembled(), y.assembled());
    let c = &(&a * &b) - &(&b * &a);
    LieElement::decompose_unchecked(&c)
}

/// Subgroup tags of H.
#[derive(Clone, Debug, PartialEq)]
pub enum GroupKind {
    /// Weyl dilation diag(z, 1_4, 1/z).
    WeylZ(f64),
    /// Lorentz block diag(1, S, 1).
    LorentzS,
    /// Conformal boost, upper unitriangular in r.
    BoostK1,
    General,
}

/// Element of the structure group H = K0 x K1.
#[derive(Clone, Debug)]
pub struct GroupElement {
    kind: GroupKind,
    mat: MatF,
}

impl GroupElement {
    pub fn identity() -> Self {
        GroupElement { kind: GroupKind::General, mat: MatF::identity(6) }
    }

    pub fn weyl(z: f64) -> Result<Self> {
        if !(z > 0.0) || !z.is_finite() {
            return Err(Error::Group(format!("Weyl parameter must be positive, got {z}")));
        }
        let mut m = MatF::identity(6);
        m[(0, 0)] = z;
        m[(5, 5)] = 1.0 / z;
        Ok(GroupElement { kind: GroupKind::WeylZ(z), mat: m })
    }

    pub fn lorentz(s: MatF) -> Result<Self> {
        let res = (&(&s.transpose() * &eta()) * &s).max_diff(&eta());
        if res > GROUP_TOL {
            return Err(Error::Group("matrix is not in SO(1,3)".into()));
        }
        let mut m = MatF::identity(6);
        m.set_block(1, 1, &s);
        Ok(GroupElement { kind: GroupKind::LorentzS, mat: m })
    }

    /// Conformal boost with row-covector parameter r.
    pub fn boost(r: &MatF) -> Self {
        assert_eq!((r.rows(), r.cols()), (1, 4));
        let rt = row_t(r);
        let rr = (r * &rt)[(0, 0)];
        let mut m = MatF::identity(6);
        m.set_block(0, 1, r);
        m[(0, 5)] = 0.5 * rr;
        m.set_block(1, 5, &rt);
        GroupElement { kind: GroupKind::BoostK1, mat: m }
    }

    /// Product Z(z) S K1(r); the H decomposition used throughout.
    pub fn general(z: f64, s: MatF, r: &MatF) -> Result<Self> {
        let m = &(&Self::weyl(z)?.mat * &Self::lorentz(s)?.mat) * &Self::boost(r).mat;
        Ok(GroupElement { kind: GroupKind::General, mat: m })
    }

    pub fn from_matrix(m: MatF) -> Result<Self> {
        if h_residual(&m) > GROUP_TOL {
            return Err(Error::Group("matrix does not preserve Sigma".into()));
        }
        Ok(GroupElement { kind: GroupKind::General, mat: m })
    }

    pub fn kind(&self) -> &GroupKind {
        &self.kind
    }

    pub fn matrix(&self) -> &MatF {
        &self.mat
    }

    pub fn inverse(&self) -> Self {
        GroupElement {
            kind: match self.kind {
                GroupKind::WeylZ(z) => GroupKind::WeylZ(1.0 / z),
                ref k => k.clone(),
            },
            mat: self.mat.inverse().expect("H elements are invertible"),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        GroupElement { kind: GroupKind::General, mat: &self.mat * &other.mat }
    }
}

/// Element of su(2,2) (trace-free, X* SigmaBar + SigmaBar X = 0).
#[derive(Clone, Debug)]
pub struct ComplexLieElement {
    mat: MatC,
}

impl ComplexLieElement {
    pub fn new(mat: MatC) -> Result<Self> {
        if su22_residual(&mat) > GROUP_TOL {
            return Err(Error::Group("matrix is not in su(2,2)".into()));
        }
        if mat.trace().norm() > GROUP_TOL {
            return Err(Error::Group("su(2,2) element must be traceless".into()));
        }
        Ok(ComplexLieElement { mat })
    }

    pub fn matrix(&self) -> &MatC {
        &self.mat
    }

    /// Blocks (2x2): upper-left, upper-right, lower-left, lower-right.
    pub fn blocks(&self) -> [MatC; 4] {
        [
            self.mat.block(0, 0, 2, 2),
            self.mat.block(0, 2, 2, 2),
            self.mat.block(2, 0, 2, 2),
            self.mat.block(2, 2, 2, 2),
        ]
    }
}

/// Element of the double cover group (preserves SigmaBar).
#[derive(Clone, Debug)]
pub struct ComplexGroupElement {
    mat: MatC,
}

impl ComplexGroupElement {
    pub fn new(mat: MatC) -> Result<Self> {
        if su22_group_residual(&mat) > GROUP_TOL {
            return Err(Error::Group("matrix does not preserve SigmaBar".into()));
        }
        Ok(ComplexGroupElement { mat })
    }

    /// Weyl element diag(sqrt(z) 1_2, 1_2/sqrt(z)).
    pub fn weyl(z: f64) -> Result<Self> {
        if !(z > 0.0) {
            return Err(Error::Group(format!("Weyl parameter must be positive, got {z}")));
        }
        let mut m = MatC::zeros(4, 4);
        let rz = Complex64::new(z.sqrt(), 0.0);
        for k in 0..2 {
            m[(k, k)] = rz;
            m[(2 + k, 2 + k)] = 1.0 / rz;
        }
        Ok(ComplexGroupElement { mat: m })
    }

    /// Lorentz element diag(Sbar^-1*, Sbar) for Sbar in SL(2,C).
    pub fn lorentz(sbar: &MatC) -> Result<Self> {
        check_sl2(sbar)?;
        let inv_adj = sbar.inverse()?.adjoint();
        let mut m = MatC::zeros(4, 4);
        m.set_block(0, 0, &inv_adj);
        m.set_block(2, 2, sbar);
        Ok(ComplexGroupElement { mat: m })
    }

    /// Boost element [[1, -i rbar],[0, 1]] with rbar the (1/sqrt2)-scaled
    /// hermitian image of the row covector r; the scale matches the Lie
    /// algebra isomorphism so that exponentials commute with the cover.
    pub fn boost(r: &MatF) -> Self {
        assert_eq!((r.rows(), r.cols()), (1, 4));
        let rbar = vec_to_hermitian(&[r[(0, 0)], r[(0, 1)], r[(0, 2)], r[(0, 3)]])
            .scale(Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0));
        let mut m = MatC::identity(4);
        m.set_block(0, 2, &rbar.scale(-I));
        ComplexGroupElement { mat: m }
    }

    pub fn matrix(&self) -> &MatC {
        &self.mat
    }

    pub fn inverse(&self) -> Self {
        ComplexGroupElement { mat: self.mat.inverse().expect("group elements invertible") }
    }

    pub fn mul(&self, other: &Self) -> Self {
        ComplexGroupElement { mat: &self.mat * &other.mat }
    }
}

fn check_sl2(sbar: &MatC) -> Result<()> {
    if (sbar.rows(), sbar.cols()) != (2, 2) {
        return Err(Error::Shape("SL(2,C) matrix must be 2x2".into()));
    }
    let det = sbar.det();
    if (det - Complex64::new(1.0, 0.0)).norm() > 1e-12 {
        return Err(Error::Group(format!("determinant {det} is not 1")));
    }
    Ok(())
}

/// The 2:1 cover SL(2,C) -> SO(1,3): the unique S with
/// (S x)-herm = Sbar (x-herm) Sbar* for all x.
pub fn spin_to_lorentz(sbar: &MatC) -> Result<MatF> {
    check_sl2(sbar)?;
    let sadj = sbar.adjoint();
    let mut s = MatF::zeros(4, 4);
    for a in 0..4 {
        for b in 0..4 {
            let m = &pauli(a) * &(&(sbar * &pauli(b)) * &sadj);
            s[(a, b)] = 0.5 * m.trace().re;
        }
    }
    Ok(s)
}

/// Jet-valued spin cover: same trace formula as [`spin_to_lorentz`] with
/// jet entries. No determinant check; callers construct genuine SL(2,C)
/// maps.
pub fn spin_to_lorentz_jets(sbar: &JMatC) -> JMatF {
    let order = sbar[(0, 0)].order();
    let sadj = sbar.adjoint();
    let mut s = JMatF::from_fn(4, 4, |_, _| Jet::zero(order));
    for a in 0..4 {
        for b in 0..4 {
            let pa = crate::matrix::const_jets_c(&pauli(a), order);
            let pb = crate::matrix::const_jets_c(&pauli(b), order);
            let m = &pa * &(&(sbar * &pb) * &sadj);
            s[(a, b)] = m.trace().re().scale(0.5);
        }
    }
    s
}

/// so(1,3) basis: boosts (0i), then rotations (12), (13), (23).
pub fn so13_basis() -> [MatF; 6] {
    let mut out: [MatF; 6] = std::array::from_fn(|_| MatF::zeros(4, 4));
    for i in 0..3 {
        out[i][(0, i + 1)] = 1.0;
        out[i][(i + 1, 0)] = 1.0;
    }
    let pairs = [(1, 2), (1, 3), (2, 3)];
    for (k, &(i, j)) in pairs.iter().enumerate() {
        out[3 + k][(i, j)] = 1.0;
        out[3 + k][(j, i)] = -1.0;
    }
    out
}

/// Images of the so(1,3) basis in sl(2,C), solved once from the
/// intertwining relation sbar xbar + xbar sbar* = (s x)bar on the sigma
/// basis and cached.
pub static SL2_BASIS: Lazy<[MatC; 6]> = Lazy::new(|| {
    let basis = so13_basis();
    std::array::from_fn(|k| solve_sl2_image(&basis[k]))
});

fn solve_sl2_image(s: &MatF) -> MatC {
    // Unknowns: sbar = sum_k (a_k + i b_k) sigma_k, six reals.
    let mut a = vec![vec![0.0f64; 6]; 32];
    let mut rhs = vec![0.0f64; 32];
    let mut row = 0;
    for c in 0..4 {
        let xbar = pauli(c);
        // Right-hand side: hermitian image of column c of s.
        let sc = [s[(0, c)], s[(1, c)], s[(2, c)], s[(3, c)]];
        let target = vec_to_hermitian(&sc);
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..6 {
                    let gen = if k < 3 { pauli(k + 1) } else { pauli(k - 2).scale(I) };
                    let lhs = &(&gen * &xbar) + &(&xbar * &gen.adjoint());
                    a[row][k] = lhs[(i, j)].re;
                    a[row + 1][k] = lhs[(i, j)].im;
                }
                rhs[row] = target[(i, j)].re;
                rhs[row + 1] = target[(i, j)].im;
                row += 2;
            }
        }
    }
    // Normal equations; the system is consistent by construction.
    let mut ata = MatF::zeros(6, 6);
    let mut atb = MatF::zeros(6, 1);
    for r in 0..32 {
        for i in 0..6 {
            for j in 0..6 {
                ata[(i, j)] = ata[(i, j)] + a[r][i] * a[r][j];
            }
            atb[(i, 0)] = atb[(i, 0)] + a[r][i] * rhs[r];
        }
    }
    let x = &ata.inverse().expect("intertwining system is nondegenerate") * &atb;
    let mut sbar = MatC::zeros(2, 2);
    for k in 0..3 {
        sbar = &sbar + &pauli(k + 1).scale(Complex64::new(x[(k, 0)], x[(3 + k, 0)]));
    }
    sbar
}

/// Coefficients of s in the [`so13_basis`] order.
pub fn so13_coefficients(s: &MatF) -> [f64; 6] {
    [s[(0, 1)], s[(0, 2)], s[(0, 3)], s[(1, 2)], s[(1, 3)], s[(2, 3)]]
}

/// sl(2,C) image of an so(1,3) matrix via the cached basis.
pub fn sl2_of_so13(s: &MatF) -> MatC {
    let coeff = so13_coefficients(s);
    let mut out = MatC::zeros(2, 2);
    for k in 0..6 {
        out = &out + &SL2_BASIS[k].scale(Complex64::new(coeff[k], 0.0));
    }
    out
}

/// Jet-valued version of [`sl2_of_so13`]: entries of `s` are jets.
pub fn sl2_of_so13_jets(s: &JMatF) -> JMatC {
    let order = s[(0, 0)].order();
    let coeff = [s[(0, 1)], s[(0, 2)], s[(0, 3)], s[(1, 2)], s[(1, 3)], s[(2, 3)]];
    let mut out = JMatC::from_fn(2, 2, |_, _| Jet::zero(order));
    for k in 0..6 {
        let term = SL2_BASIS[k].map(|c| Jet::<Complex64>::constant(c, order) * coeff[k].lift());
        out = &out + &term;
    }
    out
}

/// Lie algebra isomorphism so(2,4) -> su(2,2) on assembled jet matrices.
///
/// Blocks: [[-(sbar* - eps/2), -i iota-herm],[i tau-herm, sbar - eps/2]],
/// with the hermitian images carrying the 1/sqrt2 normalisation that makes
/// this a bracket homomorphism.
pub fn iso_jets(m: &JMatF) -> JMatC {
    assert_eq!((m.rows(), m.cols()), (6, 6));
    let order = m[(0, 0)].order();
    let half = JetF::constant(0.5, order);
    let eps_half = (m[(0, 0)] * half).lift();
    let sbar = sl2_of_so13_jets(&m.block(1, 1, 4, 4));
    let c = std::f64::consts::FRAC_1_SQRT_2;
    let iota = [m[(0, 1)], m[(0, 2)], m[(0, 3)], m[(0, 4)]];
    let tau = [m[(1, 0)], m[(2, 0)], m[(3, 0)], m[(4, 0)]];
    let ibar = vec_to_hermitian_jets(&iota).map(|v| v.scale(Complex64::new(c, 0.0)));
    let tbar = vec_to_hermitian_jets(&tau).map(|v| v.scale(Complex64::new(c, 0.0)));

    let mut out = JMatC::from_fn(4, 4, |_, _| Jet::zero(order));
    let id2 = |j: Jet<Complex64>| {
        JMatC::from_fn(2, 2, move |i, jj| if i == jj { j } else { Jet::zero(order) })
    };
    let ul = &id2(eps_half) - &sbar.adjoint();
    let lr = &sbar - &id2(eps_half);
    out.set_block(0, 0, &ul);
    out.set_block(2, 2, &lr);
    out.set_block(0, 2, &ibar.map(|v| v.scale(-I)));
    out.set_block(2, 0, &tbar.map(|v| v.scale(I)));
    out
}

/// Isomorphism on a single algebra element.
pub fn algebra_iso(x: &LieElement) -> ComplexLieElement {
    let jm = crate::matrix::const_jets_f(&x.assembled(), 0);
    let out = iso_jets(&jm).map(|j| j.value());
    ComplexLieElement::new(out).expect("iso lands in su(2,2)")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn rng(seed: u64) -> ChaCha12Rng {
        ChaCha12Rng::seed_from_u64(seed)
    }

    #[test]
    fn assembled_satisfies_so24_condition() {
        let mut r = rng(7);
        for _ in 0..20 {
            let x = sample::random_lie_element(&mut r);
            assert!(so24_residual(&x.assembled()) <= 1e-12);
            assert!(so13_residual(&x.s) <= 1e-12);
        }
    }

    #[test]
    fn grading_projections_sum_exactly() {
        let mut r = rng(8);
        let x = sample::random_lie_element(&mut r);
        let sum = &(&x.proj_minus().assembled() + &x.proj_zero().assembled())
            + &x.proj_plus().assembled();
        assert_eq!(sum.max_diff(&x.assembled()), 0.0);
    }

    #[test]
    fn bracket_of_two_translations_vanishes() {
        let mut r = rng(9);
        let x = LieElement::from_tau(sample::random_col(&mut r));
        let y = LieElement::from_tau(sample::random_col(&mut r));
        assert_eq!(bracket(&x, &y).max_mag(), 0.0);
    }

    #[test]
    fn bracket_tau_iota_lands_in_grade_zero() {
        let mut r = rng(10);
        let x = LieElement::from_tau(sample::random_col(&mut r));
        let y = LieElement::from_iota(sample::random_row(&mut r));
        let b = bracket(&x, &y);
        assert_eq!(b.iota.max_mag(), 0.0);
        assert_eq!(b.tau.max_mag(), 0.0);
        assert!(b.epsilon.abs() + b.s.max_mag() > 1e-3);
    }

    #[test]
    fn bracket_antisymmetry_on_same_element() {
        let mut r = rng(11);
        let x = sample::random_lie_element(&mut r);
        assert_eq!(bracket(&x, &x).max_mag(), 0.0);
    }

    #[test]
    fn group_elements_preserve_sigma() {
        let mut r = rng(12);
        for _ in 0..20 {
            let g = sample::random_group_element(&mut r);
            assert!(h_residual(g.matrix()) <= 1e-12);
        }
    }

    #[test]
    fn weyl_element_is_the_stated_diagonal() {
        let z = 1.7;
        let g = GroupElement::weyl(z).unwrap();
        let mut expect = MatF::identity(6);
        expect[(0, 0)] = z;
        expect[(5, 5)] = 1.0 / z;
        assert_eq!(g.matrix().max_diff(&expect), 0.0);
        assert!(GroupElement::weyl(-1.0).is_err());
    }

    #[test]
    fn boost_is_upper_unitriangular_with_half_square() {
        let r = MatF::from_rows(&[&[0.3, -0.1, 0.2, 0.5]]);
        let g = GroupElement::boost(&r);
        let rr = (&r * &row_t(&r))[(0, 0)];
        assert_eq!(g.matrix()[(0, 5)], 0.5 * rr);
        assert!(h_residual(g.matrix()) <= 1e-14);
    }

    #[test]
    fn h_decomposition_injective_on_samples() {
        let mut r = rng(13);
        let mut mats = Vec::new();
        for _ in 0..12 {
            mats.push(sample::random_group_element(&mut r).matrix().clone());
        }
        for i in 0..mats.len() {
            for j in 0..i {
                assert!(mats[i].max_diff(&mats[j]) > 1e-9);
            }
        }
    }

    #[test]
    fn pauli_images_of_basis_vectors() {
        let m = vec_to_hermitian(&[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(m.max_diff(&MatC::identity(2)), 0.0);
        let m3 = vec_to_hermitian(&[0.0, 0.0, 0.0, 1.0]);
        assert_eq!(m3.max_diff(&pauli(3)), 0.0);
        let m1 = vec_to_hermitian(&[0.0, 1.0, 0.0, 0.0]);
        assert_eq!(m1.max_diff(&pauli(1)), 0.0);
    }

    #[test]
    fn spin_cover_identity_and_kernel() {
        let one = MatC::identity(2);
        assert!(spin_to_lorentz(&one).unwrap().max_diff(&MatF::identity(4)) < 1e-14);
        let minus = one.scale(Complex64::new(-1.0, 0.0));
        let s = spin_to_lorentz(&minus).unwrap();
        assert_eq!(s.max_diff(&MatF::identity(4)), 0.0);
    }

    #[test]
    fn spin_cover_boost_along_z() {
        let t = 0.6f64;
        let mut sbar = MatC::zeros(2, 2);
        sbar[(0, 0)] = Complex64::new((t / 2.0).exp(), 0.0);
        sbar[(1, 1)] = Complex64::new((-t / 2.0).exp(), 0.0);
        let s = spin_to_lorentz(&sbar).unwrap();
        let mut expect = MatF::identity(4);
        expect[(0, 0)] = t.cosh();
        expect[(0, 3)] = t.sinh();
        expect[(3, 0)] = t.sinh();
        expect[(3, 3)] = t.cosh();
        assert!(s.max_diff(&expect) < 1e-12);
        // Intertwining on the sigma basis.
        for b in 0..4 {
            let mut x = [0.0; 4];
            x[b] = 1.0;
            let sx = [s[(0, b)], s[(1, b)], s[(2, b)], s[(3, b)]];
            let lhs = vec_to_hermitian(&sx);
            let rhs = &(&sbar * &vec_to_hermitian(&x)) * &sbar.adjoint();
            assert!(lhs.max_diff(&rhs) < 1e-12);
        }
    }

    #[test]
    fn spin_cover_lands_in_so13() {
        let mut r = rng(14);
        for _ in 0..20 {
            let sbar = sample::random_sl2(&mut r);
            let s = spin_to_lorentz(&sbar).unwrap();
            assert!((&(&s.transpose() * &eta()) * &s).max_diff(&eta()) < 1e-12);
        }
    }

    #[test]
    fn spin_cover_is_homomorphism() {
        let mut r = rng(15);
        for _ in 0..30 {
            let a = sample::random_sl2(&mut r);
            let b = sample::random_sl2(&mut r);
            let lhs = spin_to_lorentz(&(&a * &b)).unwrap();
            let rhs = &spin_to_lorentz(&a).unwrap() * &spin_to_lorentz(&b).unwrap();
            assert!(lhs.max_diff(&rhs) < 1e-10);
        }
    }

    #[test]
    fn spin_cover_rejects_non_unit_determinant() {
        let m = MatC::identity(2).scale(Complex64::new(2.0, 0.0));
        assert!(spin_to_lorentz(&m).is_err());
    }

    #[test]
    fn iso_of_pure_dilation() {
        let x = LieElement::from_epsilon(2.0);
        let m = algebra_iso(&x);
        let mut expect = MatC::identity(4);
        expect[(2, 2)] = Complex64::new(-1.0, 0.0);
        expect[(3, 3)] = Complex64::new(-1.0, 0.0);
        assert_eq!(m.matrix().max_diff(&expect), 0.0);
    }

    #[test]
    fn iso_of_zero_is_zero() {
        let m = algebra_iso(&LieElement::zero());
        assert_eq!(m.matrix().max_mag(), 0.0);
    }

    #[test]
    fn iso_respects_grading_blocks() {
        let mut r = rng(16);
        let tau = algebra_iso(&LieElement::from_tau(sample::random_col(&mut r)));
        let [ul, ur, ll, lr] = tau.blocks();
        assert_eq!(ul.max_mag() + ur.max_mag() + lr.max_mag(), 0.0);
        assert!(ll.max_mag() > 0.0);
        let iota = algebra_iso(&LieElement::from_iota(sample::random_row(&mut r)));
        let [ul, ur, ll, lr] = iota.blocks();
        assert_eq!(ul.max_mag() + ll.max_mag() + lr.max_mag(), 0.0);
        assert!(ur.max_mag() > 0.0);
    }

    #[test]
    fn iso_preserves_brackets() {
        let mut r = rng(17);
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let x = sample::random_lie_element(&mut r);
            let y = sample::random_lie_element(&mut r);
            let lhs = algebra_iso(&bracket(&x, &y));
            let (a, b) = (algebra_iso(&x), algebra_iso(&y));
            let rhs = &(a.matrix() * b.matrix()) - &(b.matrix() * a.matrix());
            worst = worst.max(lhs.matrix().max_diff(&rhs));
        }
        assert!(worst <= 1e-12, "worst bracket residual {worst}");
    }

    #[test]
    fn complex_group_elements_preserve_sigma_bar() {
        let mut r = rng(18);
        let z = ComplexGroupElement::weyl(2.3).unwrap();
        assert!(su22_group_residual(z.matrix()) < 1e-14);
        let s = ComplexGroupElement::lorentz(&sample::random_sl2(&mut r)).unwrap();
        assert!(su22_group_residual(s.matrix()) < 1e-12);
        let k = ComplexGroupElement::boost(&sample::random_row(&mut r));
        assert!(su22_group_residual(k.matrix()) < 1e-13);
    }

    #[test]
    fn complex_boost_exponentiates_the_iso() {
        let mut r = rng(19);
        let row = sample::random_row(&mut r);
        let x = algebra_iso(&LieElement::from_iota(row.clone()));
        let exp = x.matrix().exp();
        let k = ComplexGroupElement::boost(&row);
        assert!(exp.max_diff(k.matrix()) < 1e-12);
    }

    #[test]
    fn hermitian_blocks_of_boost_are_hermitian() {
        let mut r = rng(20);
        let k = ComplexGroupElement::boost(&sample::random_row(&mut r));
        let blk = k.matrix().block(0, 2, 2, 2).scale(Complex64::new(0.0, 1.0));
        assert!(blk.max_diff(&blk.adjoint()) < 1e-14);
    }
}
