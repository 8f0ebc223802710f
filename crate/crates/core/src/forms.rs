//! Matrix-valued differential forms on a chart U in R^4.
//!
//! A [`MatrixForm`] of degree p stores its components on ordered index
//! tuples mu_1 < ... < mu_p; each component is matrix-valued and evaluates
//! to jets, so the exterior derivative is exact. A degree-0 form doubles as
//! a [`SmoothMap`]. Evaluation is pull-based: `eval_jets(x, order)` asks a
//! form for its value and derivatives to `order` at one point, and each
//! combinator bumps the order it requests from its inputs by exactly what
//! it consumes (the exterior derivative requests one more).

use std::sync::Arc;

use num_complex::Complex64;
use once_cell::sync::Lazy;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::jet::{Jet, JetScalar, MAX_ORDER};
use crate::matrix::{Entry, Mat, MatF};

/// A point of the chart.
pub type ChartPoint = [f64; 4];

/// Ordered index tuples per degree: C(4, p) of them.
pub static TUPLES: Lazy<[Vec<Vec<usize>>; 5]> = Lazy::new(|| {
    let mut t: [Vec<Vec<usize>>; 5] = Default::default();
    t[0].push(vec![]);
    for p in 1..=4usize {
        let mut out = Vec::new();
        subsets(4, p, &mut out);
        t[p] = out;
    }
    t
});

fn subsets(n: usize, p: usize, out: &mut Vec<Vec<usize>>) {
    fn rec(start: usize, n: usize, p: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == p {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, p, cur, out);
            cur.pop();
        }
    }
    rec(0, n, p, &mut Vec::new(), out);
}

/// Number of components a degree-p form stores.
pub fn comp_count(degree: usize) -> usize {
    TUPLES[degree].len()
}

/// Position of an ordered tuple in the component list.
pub fn tuple_index(degree: usize, tuple: &[usize]) -> usize {
    TUPLES[degree].iter().position(|t| t == tuple).expect("ordered tuple")
}

/// Parity of a list of distinct indices relative to sorted order; `None`
/// when an index repeats.
pub fn parity(list: &[usize]) -> Option<f64> {
    let mut v = list.to_vec();
    let n = v.len();
    let mut sign = 1.0;
    for i in 0..n {
        for j in (i + 1)..n {
            match v[i].cmp(&v[j]) {
                std::cmp::Ordering::Greater => {
                    v.swap(i, j);
                    sign = -sign;
                }
                std::cmp::Ordering::Equal => return None,
                _ => {}
            }
        }
    }
    Some(sign)
}

type EvalFn<T> = dyn Fn(&ChartPoint, usize) -> Result<Vec<Mat<Jet<T>>>> + Send + Sync;

/// Degree-p differential form with matrix values.
#[derive(Clone)]
pub struct MatrixForm<T: JetScalar + Entry> {
    degree: usize,
    rows: usize,
    cols: usize,
    f: Arc<EvalFn<T>>,
}

/// Degree-0 form: a smooth matrix- or scalar-valued map on the chart.
pub type SmoothMap<T> = MatrixForm<T>;

pub type FormF = MatrixForm<f64>;
pub type FormC = MatrixForm<Complex64>;

impl<T: JetScalar + Entry> MatrixForm<T> {
    pub fn new(
        degree: usize,
        rows: usize,
        cols: usize,
        f: impl Fn(&ChartPoint, usize) -> Result<Vec<Mat<Jet<T>>>> + Send + Sync + 'static,
    ) -> Self {
        assert!(degree <= 4);
        MatrixForm { degree, rows, cols, f: Arc::new(f) }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// All components as jet matrices, valid to `order`.
    pub fn eval_jets(&self, x: &ChartPoint, order: usize) -> Result<Vec<Mat<Jet<T>>>> {
        if order > MAX_ORDER {
            return Err(Error::OrderExceeded { needed: order, available: MAX_ORDER });
        }
        (self.f)(x, order)
    }

    /// Component values only.
    pub fn eval(&self, x: &ChartPoint) -> Result<Vec<Mat<T>>> {
        Ok(self.eval_jets(x, 0)?.iter().map(|m| m.map(|j| j.value())).collect())
    }

    /// Largest component-entry difference of two forms at a point.
    pub fn max_diff_at(&self, other: &Self, x: &ChartPoint) -> Result<f64> {
        let a = self.eval(x)?;
        let b = other.eval(x)?;
        Ok(a.iter().zip(b.iter()).map(|(p, q)| p.max_diff(q)).fold(0.0, f64::max))
    }

    pub fn zero(degree: usize, rows: usize, cols: usize) -> Self {
        Self::new(degree, rows, cols, move |_, order| {
            Ok(vec![Mat::from_fn(rows, cols, |_, _| Jet::zero(order)); comp_count(degree)])
        })
    }

    /// Constant (point-independent) form.
    pub fn constant(degree: usize, comps: Vec<Mat<T>>) -> Self {
        assert_eq!(comps.len(), comp_count(degree));
        let rows = comps[0].rows();
        let cols = comps[0].cols();
        Self::new(degree, rows, cols, move |_, order| {
            Ok(comps.iter().map(|m| m.map(|v| Jet::constant(v, order))).collect())
        })
    }

    /// Exterior derivative.
    pub fn d(&self) -> Self {
        assert!(self.degree < 4, "exterior derivative of a 4-form");
        let p = self.degree;
        let inner = self.clone();
        Self::new(p + 1, self.rows, self.cols, move |x, order| {
            let jets = inner.eval_jets(x, order + 1)?;
            let mut out = Vec::with_capacity(comp_count(p + 1));
            for target in TUPLES[p + 1].iter() {
                let mut acc = Mat::<Jet<T>>::from_fn(inner.rows, inner.cols, |_, _| {
                    Jet::zero(order)
                });
                for (k, &mu) in target.iter().enumerate() {
                    let mut rest = target.clone();
                    rest.remove(k);
                    let src = &jets[tuple_index(p, &rest)];
                    let sign = if k % 2 == 0 { <T as JetScalar>::one() } else { -<T as JetScalar>::one() };
                    for i in 0..inner.rows {
                        for j in 0..inner.cols {
                            let dj = src[(i, j)].derivative(mu)?.scale(sign);
                            acc[(i, j)] = acc[(i, j)] + dj;
                        }
                    }
                }
                out.push(acc);
            }
            Ok(out)
        })
    }

    /// Wedge product with matrix multiplication on values.
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        if self.degree + other.degree > 4 {
            return Err(Error::Degree { degree: self.degree + other.degree, what: "wedge" });
        }
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "wedge values {}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let (p, q) = (self.degree, other.degree);
        let (lhs, rhs) = (self.clone(), other.clone());
        let (rows, cols) = (self.rows, other.cols);
        Ok(Self::new(p + q, rows, cols, move |x, order| {
            let a = lhs.eval_jets(x, order)?;
            let b = rhs.eval_jets(x, order)?;
            let mut out = Vec::with_capacity(comp_count(p + q));
            for target in TUPLES[p + q].iter() {
                let mut acc = Mat::<Jet<T>>::from_fn(rows, cols, |_, _| Jet::zero(order));
                let mut split = Vec::new();
                subsets(target.len(), p, &mut split);
                for positions in split {
                    let i_tuple: Vec<usize> = positions.iter().map(|&k| target[k]).collect();
                    let j_tuple: Vec<usize> = (0..target.len())
                        .filter(|k| !positions.contains(k))
                        .map(|k| target[k])
                        .collect();
                    let concat: Vec<usize> =
                        i_tuple.iter().chain(j_tuple.iter()).copied().collect();
                    let sign = parity(&concat).expect("distinct split");
                    let prod = &a[tuple_index(p, &i_tuple)] * &b[tuple_index(q, &j_tuple)];
                    let signed = prod.map(|v| v.scale(<T as JetScalar>::from_f64(sign)));
                    acc = &acc + &signed;
                }
                out.push(acc);
            }
            Ok(out)
        }))
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.degree, other.degree);
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let (a, b) = (self.clone(), other.clone());
        Self::new(self.degree, self.rows, self.cols, move |x, order| {
            let u = a.eval_jets(x, order)?;
            let v = b.eval_jets(x, order)?;
            Ok(u.iter().zip(v.iter()).map(|(p, q)| p + q).collect())
        })
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.degree, other.degree);
        let (a, b) = (self.clone(), other.clone());
        Self::new(self.degree, self.rows, self.cols, move |x, order| {
            let u = a.eval_jets(x, order)?;
            let v = b.eval_jets(x, order)?;
            Ok(u.iter().zip(v.iter()).map(|(p, q)| p - q).collect())
        })
    }

    pub fn neg(&self) -> Self {
        let a = self.clone();
        Self::new(self.degree, self.rows, self.cols, move |x, order| {
            Ok(a.eval_jets(x, order)?.iter().map(|m| -m).collect())
        })
    }

    pub fn scale(&self, s: f64) -> Self {
        let a = self.clone();
        Self::new(self.degree, self.rows, self.cols, move |x, order| {
            Ok(a.eval_jets(x, order)?.iter().map(|m| m.map(|v| v.scale(<T as JetScalar>::from_f64(s)))).collect())
        })
    }

    /// Multiply every component by a scalar map (1x1 degree-0 form).
    pub fn scale_map(&self, s: &SmoothMap<T>) -> Self {
        assert_eq!(s.degree, 0);
        assert_eq!((s.rows, s.cols), (1, 1));
        let (a, b) = (self.clone(), s.clone());
        Self::new(self.degree, self.rows, self.cols, move |x, order| {
            let sj = b.eval_jets(x, order)?[0][(0, 0)];
            Ok(a.eval_jets(x, order)?.iter().map(|m| m.map(|v| v * sj)).collect())
        })
    }

    /// Left-multiply values by a degree-0 matrix map.
    pub fn lmul(&self, m: &SmoothMap<T>) -> Self {
        assert_eq!(m.degree, 0);
        assert_eq!(m.cols, self.rows);
        let (a, b) = (m.clone(), self.clone());
        Self::new(self.degree, m.rows, self.cols, move |x, order| {
            let mm = &a.eval_jets(x, order)?[0];
            Ok(b.eval_jets(x, order)?.iter().map(|c| mm * c).collect())
        })
    }

    /// Right-multiply values by a degree-0 matrix map.
    pub fn rmul(&self, m: &SmoothMap<T>) -> Self {
        assert_eq!(m.degree, 0);
        assert_eq!(self.cols, m.rows);
        let (a, b) = (self.clone(), m.clone());
        Self::new(self.degree, self.rows, m.cols, move |x, order| {
            let mm = &b.eval_jets(x, order)?[0];
            Ok(a.eval_jets(x, order)?.iter().map(|c| c * mm).collect())
        })
    }

    /// Pointwise conjugation g^-1 (omega) g by a degree-0 map.
    pub fn conjugate_by(&self, g: &SmoothMap<T>) -> Self {
        assert_eq!(g.degree, 0);
        let (a, b) = (self.clone(), g.clone());
        Self::new(self.degree, self.rows, self.cols, move |x, order| {
            let gm = &b.eval_jets(x, order)?[0];
            let ginv = gm.inverse().map_err(|e| e.at_point("conjugating map", x))?;
            Ok(a.eval_jets(x, order)?.iter().map(|c| &(&ginv * c) * gm).collect())
        })
    }

    pub fn transpose(&self) -> Self {
        let a = self.clone();
        Self::new(self.degree, self.cols, self.rows, move |x, order| {
            Ok(a.eval_jets(x, order)?.iter().map(|m| m.transpose()).collect())
        })
    }

    /// Extract a value block from every component.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        let a = self.clone();
        Self::new(self.degree, rows, cols, move |x, order| {
            Ok(a.eval_jets(x, order)?.iter().map(|m| m.block(r0, c0, rows, cols)).collect())
        })
    }

    /// Trace of the matrix values (scalar form).
    pub fn trace(&self) -> Self {
        assert_eq!(self.rows, self.cols);
        let a = self.clone();
        Self::new(self.degree, 1, 1, move |x, order| {
            Ok(a.eval_jets(x, order)?
                .iter()
                .map(|m| Mat::from_fn(1, 1, |_, _| m.trace()))
                .collect())
        })
    }

    /// Hodge dual with respect to `g`, applied entrywise to matrix values:
    /// (*w)_J = sqrt|g| sum_I w^I eps_{I J}, indices raised with g^-1 and
    /// eps the Levi-Civita symbol with eps_0123 = +1.
    pub fn hodge(&self, metric: &Metric) -> Self {
        let p = self.degree;
        let a = self.clone();
        let g = metric.clone();
        Self::new(4 - p, self.rows, self.cols, move |x, order| {
            let comps = a.eval_jets(x, order)?;
            let gj = g.map().eval_jets(x, order)?[0].clone();
            let ginv = gj.inverse().map_err(|_| Error::degenerate("metric", x))?;
            let sqrt_det = sqrt_abs_det(&gj).map_err(|e| e.at_point("metric determinant", x))?;
            let rows = a.rows;
            let cols = a.cols;
            // Raise indices: w^I = sum_L det(ginv[I, L]) w_L over ordered tuples.
            let raised: Vec<Mat<Jet<T>>> = TUPLES[p]
                .iter()
                .map(|i_tuple| {
                    let mut acc = Mat::<Jet<T>>::from_fn(rows, cols, |_, _| Jet::zero(order));
                    for (l_idx, l_tuple) in TUPLES[p].iter().enumerate() {
                        let minor = tuple_minor(&ginv, i_tuple, l_tuple);
                        if minor.max_mag() == 0.0 {
                            continue;
                        }
                        let lifted = Jet::<T>::from_real(&minor);
                        let term = comps[l_idx].map(|v| v * lifted);
                        acc = &acc + &term;
                    }
                    acc
                })
                .collect();
            let sq = Jet::<T>::from_real(&sqrt_det);
            let mut out = Vec::with_capacity(comp_count(4 - p));
            for j_tuple in TUPLES[4 - p].iter() {
                let mut acc = Mat::<Jet<T>>::from_fn(rows, cols, |_, _| Jet::zero(order));
                for (i_idx, i_tuple) in TUPLES[p].iter().enumerate() {
                    let concat: Vec<usize> =
                        i_tuple.iter().chain(j_tuple.iter()).copied().collect();
                    let Some(eps) = parity(&concat) else { continue };
                    let signed = raised[i_idx].map(|v| v.scale(<T as JetScalar>::from_f64(eps)));
                    acc = &acc + &signed;
                }
                out.push(acc.map(|v| v * sq));
            }
            Ok(out)
        })
    }
}

/// det of the p x p submatrix of `ginv` with rows `i` and columns `l`.
fn tuple_minor(ginv: &Mat<Jet<f64>>, i: &[usize], l: &[usize]) -> Jet<f64> {
    match i.len() {
        0 => Jet::constant(1.0, ginv[(0, 0)].order()),
        1 => ginv[(i[0], l[0])],
        n => {
            let sub = Mat::<Jet<f64>>::from_fn(n, n, |r, c| ginv[(i[r], l[c])]);
            sub.det()
        }
    }
}

/// sqrt(|det g|) as a jet; errors when det vanishes.
pub fn sqrt_abs_det(g: &Mat<Jet<f64>>) -> Result<Jet<f64>> {
    let det = g.det();
    let signed = if det.value() < 0.0 { -det } else { det };
    signed.sqrt()
}

impl MatrixForm<f64> {
    /// Build a form from expression grids, one rows x cols grid per ordered
    /// component.
    pub fn from_exprs(degree: usize, grids: Vec<Vec<Vec<Expr>>>) -> Self {
        assert_eq!(grids.len(), comp_count(degree));
        let rows = grids[0].len();
        let cols = grids[0][0].len();
        Self::new(degree, rows, cols, move |x, order| {
            grids
                .iter()
                .map(|grid| {
                    let mut m = Mat::<Jet<f64>>::from_fn(rows, cols, |_, _| Jet::zero(order));
                    for (i, row) in grid.iter().enumerate() {
                        for (j, e) in row.iter().enumerate() {
                            m[(i, j)] = e.eval_jet(x, order)?;
                        }
                    }
                    Ok(m)
                })
                .collect()
        })
    }

    /// Scalar map from one expression.
    pub fn scalar_expr(e: Expr) -> Self {
        Self::from_exprs(0, vec![vec![vec![e]]])
    }

    /// Lift to a complex-valued form.
    pub fn lift(&self) -> MatrixForm<Complex64> {
        let a = self.clone();
        MatrixForm::new(self.degree, self.rows, self.cols, move |x, order| {
            Ok(a.eval_jets(x, order)?.iter().map(crate::matrix::lift_jets).collect())
        })
    }

    /// Scalar reciprocal (1x1 values).
    pub fn recip_map(&self) -> Self {
        assert_eq!((self.rows, self.cols, self.degree), (1, 1, 0));
        let a = self.clone();
        Self::new(0, 1, 1, move |x, order| {
            let j = a.eval_jets(x, order)?[0][(0, 0)];
            let r = j.recip().map_err(|e| e.at_point("reciprocal", x))?;
            Ok(vec![Mat::from_fn(1, 1, |_, _| r)])
        })
    }
}

impl MatrixForm<Complex64> {
    /// Conjugate transpose of the matrix values.
    pub fn adjoint(&self) -> Self {
        let a = self.clone();
        Self::new(self.degree, self.cols, self.rows, move |x, order| {
            Ok(a.eval_jets(x, order)?.iter().map(|m| m.adjoint()).collect())
        })
    }
}

/// Tetrad field e^a_mu (row a = frame, column mu = chart index).
#[derive(Clone)]
pub struct Tetrad {
    e: SmoothMap<f64>,
}

impl Tetrad {
    pub fn new(e: SmoothMap<f64>) -> Self {
        assert_eq!((e.degree(), e.rows(), e.cols()), (0, 4, 4));
        Tetrad { e }
    }

    pub fn minkowski() -> Self {
        Self::new(SmoothMap::constant(0, vec![MatF::identity(4)]))
    }

    /// Conformally flat tetrad e^a_mu = omega(x) delta^a_mu.
    pub fn conformal(omega: Expr) -> Self {
        let grid: Vec<Vec<Expr>> = (0..4)
            .map(|a| {
                (0..4)
                    .map(|mu| {
                        if a == mu {
                            omega.clone()
                        } else {
                            Expr::constant(0.0)
                        }
                    })
                    .collect()
            })
            .collect();
        Self::new(SmoothMap::from_exprs(0, vec![grid]))
    }

    pub fn from_exprs(grid: Vec<Vec<Expr>>) -> Self {
        Self::new(SmoothMap::from_exprs(0, vec![grid]))
    }

    pub fn map(&self) -> &SmoothMap<f64> {
        &self.e
    }

    pub fn eval_jets(&self, x: &ChartPoint, order: usize) -> Result<Mat<Jet<f64>>> {
        Ok(self.e.eval_jets(x, order)?.remove(0))
    }

    /// Inverse-tetrad map e^mu_a (rows mu, cols a).
    pub fn inverse_map(&self) -> SmoothMap<f64> {
        let e = self.e.clone();
        SmoothMap::new(0, 4, 4, move |x, order| {
            let m = &e.eval_jets(x, order)?[0];
            Ok(vec![m.inverse().map_err(|_| Error::degenerate("tetrad", x))?])
        })
    }

    /// Soldering 1-form theta^a = e^a_mu dx^mu (4x1 vector values).
    pub fn soldering(&self) -> MatrixForm<f64> {
        let e = self.e.clone();
        MatrixForm::new(1, 4, 1, move |x, order| {
            let m = &e.eval_jets(x, order)?[0];
            Ok((0..4).map(|mu| m.block(0, mu, 4, 1)).collect())
        })
    }

    /// Induced metric g = e^T eta e.
    pub fn metric(&self) -> Metric {
        let e = self.e.clone();
        Metric::new(SmoothMap::new(0, 4, 4, move |x, order| {
            let m = &e.eval_jets(x, order)?[0];
            let eta = crate::matrix::const_jets_f(&minkowski_eta(), order);
            Ok(vec![&(&m.transpose() * &eta) * m])
        }))
    }
}

/// Minkowski metric with signature (+,-,-,-).
pub fn minkowski_eta() -> MatF {
    let mut m = MatF::identity(4);
    for i in 1..4 {
        m[(i, i)] = -1.0;
    }
    m
}

/// Metric field on the chart.
#[derive(Clone)]
pub struct Metric {
    g: SmoothMap<f64>,
}

impl Metric {
    pub fn new(g: SmoothMap<f64>) -> Self {
        assert_eq!((g.degree(), g.rows(), g.cols()), (0, 4, 4));
        Metric { g }
    }

    pub fn eta() -> Self {
        Self::new(SmoothMap::constant(0, vec![minkowski_eta()]))
    }

    pub fn map(&self) -> &SmoothMap<f64> {
        &self.g
    }

    pub fn eval_jets(&self, x: &ChartPoint, order: usize) -> Result<Mat<Jet<f64>>> {
        Ok(self.g.eval_jets(x, order)?.remove(0))
    }

    /// Scale the metric pointwise: s(x) * g.
    pub fn scaled_by(&self, s: &SmoothMap<f64>) -> Self {
        Metric::new(self.g.scale_map(s))
    }

    /// Volume form sqrt|det g| dx0^dx1^dx2^dx3.
    pub fn volume(&self) -> MatrixForm<f64> {
        let g = self.g.clone();
        MatrixForm::new(4, 1, 1, move |x, order| {
            let gj = &g.eval_jets(x, order)?[0];
            let s = sqrt_abs_det(gj).map_err(|_| Error::degenerate("metric determinant", x))?;
            Ok(vec![Mat::from_fn(1, 1, |_, _| s)])
        })
    }

    /// Check the Lorentzian signature (+,-,-,-) at a point via Sylvester's
    /// leading principal minors.
    pub fn lorentzian_at(&self, x: &ChartPoint) -> Result<bool> {
        let g = self.eval_jets(x, 0)?.map(|j| j.value());
        let expected_signs = [1.0f64, -1.0, 1.0, -1.0];
        for k in 1..=4 {
            let minor = g.block(0, 0, k, k).det();
            if minor == 0.0 || minor.signum() != expected_signs[k - 1] {
                return Ok(false);
            }
        }
        Ok(true)
    }
}
