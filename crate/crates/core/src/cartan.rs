//! Cartan connections on the chart: block structure, curvature via the
//! structure equation, gauge actions of the subgroups of H, covariant
//! derivatives of tractor and twistor fields, the induced metric, and the
//! normal connection built from a tetrad.
//!
//! The connection is kept as one assembled 6x6-valued 1-form so that
//! conjugation pipelines evaluate each ingredient once per point; blocks
//! are views.

use num_complex::Complex64;

use crate::algebra::{self, eta, iso_jets};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::forms::{ChartPoint, MatrixForm, Metric, SmoothMap, Tetrad};
use crate::jet::{Jet, JetF};
use crate::matrix::{const_jets_f, JMatC, JMatF, Mat, MatF};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Cartan connection: a 6x6 so(2,4)-valued 1-form with blocks
/// (a, P, 0; theta, A, P^t; 0, theta^t, -a).
#[derive(Clone)]
pub struct CartanConnection {
    form: MatrixForm<f64>,
}

impl CartanConnection {
    pub fn from_form(form: MatrixForm<f64>) -> Self {
        assert_eq!((form.degree(), form.rows(), form.cols()), (1, 6, 6));
        CartanConnection { form }
    }

    /// Assemble from the four block 1-forms: scalar a, so(1,3)-valued A,
    /// row-covector P, vector theta.
    pub fn from_blocks(
        a: MatrixForm<f64>,
        big_a: MatrixForm<f64>,
        p: MatrixForm<f64>,
        theta: MatrixForm<f64>,
    ) -> Self {
        assert_eq!((a.rows(), a.cols()), (1, 1));
        assert_eq!((big_a.rows(), big_a.cols()), (4, 4));
        assert_eq!((p.rows(), p.cols()), (1, 4));
        assert_eq!((theta.rows(), theta.cols()), (4, 1));
        let form = MatrixForm::new(1, 6, 6, move |x, order| {
            let av = a.eval_jets(x, order)?;
            let sv = big_a.eval_jets(x, order)?;
            let pv = p.eval_jets(x, order)?;
            let tv = theta.eval_jets(x, order)?;
            Ok((0..4)
                .map(|mu| assemble_block_jets(&av[mu][(0, 0)], &sv[mu], &pv[mu], &tv[mu]))
                .collect())
        });
        CartanConnection { form }
    }

    pub fn zero() -> Self {
        CartanConnection { form: MatrixForm::zero(1, 6, 6) }
    }

    pub fn form(&self) -> &MatrixForm<f64> {
        &self.form
    }

    pub fn a_block(&self) -> MatrixForm<f64> {
        self.form.block(0, 0, 1, 1)
    }

    pub fn lorentz_block(&self) -> MatrixForm<f64> {
        self.form.block(1, 1, 4, 4)
    }

    pub fn p_block(&self) -> MatrixForm<f64> {
        self.form.block(0, 1, 1, 4)
    }

    pub fn theta_block(&self) -> MatrixForm<f64> {
        self.form.block(1, 0, 4, 1)
    }

    /// Tetrad read off the soldering block: e^a_mu = theta^a on dx^mu.
    pub fn tetrad(&self) -> Tetrad {
        let form = self.form.clone();
        Tetrad::new(SmoothMap::new(0, 4, 4, move |x, order| {
            let comps = form.eval_jets(x, order)?;
            Ok(vec![JMatF::from_fn(4, 4, |a, mu| comps[mu][(1 + a, 0)])])
        }))
    }

    /// Check invertibility of the soldering block at a point.
    pub fn soldering_regular_at(&self, x: &ChartPoint) -> Result<bool> {
        let e = self.tetrad().eval_jets(x, 0)?.map(|j| j.value());
        Ok(e.det().abs() > 1e-10)
    }

    /// Complex representation: the su(2,2)-valued 1-form.
    pub fn complex_form(&self) -> MatrixForm<Complex64> {
        let form = self.form.clone();
        MatrixForm::new(1, 4, 4, move |x, order| {
            Ok(form.eval_jets(x, order)?.iter().map(iso_jets).collect())
        })
    }

    /// Metric induced by the soldering block: g = e^T eta e.
    pub fn induced_metric(&self) -> Metric {
        self.tetrad().metric()
    }
}

fn assemble_block_jets(a: &JetF, s: &JMatF, p: &JMatF, theta: &JMatF) -> JMatF {
    let order = a.order().min(s[(0, 0)].order()).min(p[(0, 0)].order()).min(
        theta[(0, 0)].order(),
    );
    let eta_j = const_jets_f(&eta(), order);
    let mut m = JMatF::from_fn(6, 6, |_, _| Jet::zero(order));
    m[(0, 0)] = a.truncated(order);
    m[(5, 5)] = -a.truncated(order);
    m.set_block(0, 1, p);
    m.set_block(1, 5, &(&eta_j * &p.transpose()));
    m.set_block(1, 0, theta);
    m.set_block(5, 1, &(&theta.transpose() * &eta_j));
    m.set_block(1, 1, s);
    m
}

/// Curvature two-form of the structure equation, block pattern
/// (f, C, 0; Theta, W, C^t; 0, Theta^t, -f).
#[derive(Clone)]
pub struct CartanCurvature {
    form: MatrixForm<f64>,
}

impl CartanCurvature {
    pub fn form(&self) -> &MatrixForm<f64> {
        &self.form
    }

    pub fn f_block(&self) -> MatrixForm<f64> {
        self.form.block(0, 0, 1, 1)
    }

    pub fn w_block(&self) -> MatrixForm<f64> {
        self.form.block(1, 1, 4, 4)
    }

    pub fn c_block(&self) -> MatrixForm<f64> {
        self.form.block(0, 1, 1, 4)
    }

    pub fn torsion_block(&self) -> MatrixForm<f64> {
        self.form.block(1, 0, 4, 1)
    }

    pub fn complex_form(&self) -> MatrixForm<Complex64> {
        let form = self.form.clone();
        MatrixForm::new(2, 4, 4, move |x, order| {
            Ok(form.eval_jets(x, order)?.iter().map(iso_jets).collect())
        })
    }
}

/// Structure equation: Omega = d varpi + varpi ^ varpi (fused evaluation).
pub fn curvature(varpi: &CartanConnection) -> CartanCurvature {
    let form = two_form_of_connection(varpi.form().clone());
    CartanCurvature { form }
}

/// d omega + omega ^ omega for a matrix-valued 1-form.
pub fn two_form_of_connection(omega: MatrixForm<f64>) -> MatrixForm<f64> {
    let n = omega.rows();
    MatrixForm::new(2, n, n, move |x, order| {
        let jets = omega.eval_jets(x, order + 1)?;
        let pairs = [(0usize, 1usize), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
        pairs
            .iter()
            .map(|&(mu, nu)| {
                let d_part = derivative_mat(&jets[nu], mu)?;
                let d_part2 = derivative_mat(&jets[mu], nu)?;
                let wedge = &(&jets[mu] * &jets[nu]) - &(&jets[nu] * &jets[mu]);
                let wedge = wedge.map(|j| j.truncated(order));
                Ok(&(&d_part - &d_part2) + &wedge)
            })
            .collect()
    })
}

fn derivative_mat(m: &JMatF, mu: usize) -> Result<JMatF> {
    let mut out = JMatF::zeros(m.rows(), m.cols());
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            out[(i, j)] = m[(i, j)].derivative(mu)?;
        }
    }
    Ok(out)
}

fn derivative_mat_c(m: &JMatC, mu: usize) -> Result<JMatC> {
    let mut out = JMatC::zeros(m.rows(), m.cols());
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            out[(i, j)] = m[(i, j)].derivative(mu)?;
        }
    }
    Ok(out)
}

/// Subgroup tag of a gauge map.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GaugeKind {
    K1,
    Weyl,
    Lorentz,
    General,
}

/// Point-dependent element of H, together with its double-cover lift for
/// the twistor representation.
#[derive(Clone)]
pub struct GaugeMap {
    kind: GaugeKind,
    map: SmoothMap<f64>,
    complex: SmoothMap<Complex64>,
}

impl GaugeMap {
    pub fn kind(&self) -> GaugeKind {
        self.kind
    }

    /// The 6x6 H-valued map.
    pub fn map(&self) -> &SmoothMap<f64> {
        &self.map
    }

    /// The 4x4 lift acting on twistors.
    pub fn complex_map(&self) -> &SmoothMap<Complex64> {
        &self.complex
    }

    pub fn identity() -> Self {
        GaugeMap {
            kind: GaugeKind::General,
            map: SmoothMap::constant(0, vec![MatF::identity(6)]),
            complex: SmoothMap::constant(0, vec![Mat::identity(4)]),
        }
    }

    /// Weyl rescaling Z(z) with z a positive scalar map.
    pub fn weyl(z: Expr) -> Self {
        let ze = z.clone();
        let map = SmoothMap::new(0, 6, 6, move |x, order| {
            let zj = ze.eval_jet(x, order)?;
            if zj.value() <= 0.0 {
                return Err(Error::degenerate("Weyl factor must stay positive", x));
            }
            let mut m = JMatF::from_fn(6, 6, |i, j| {
                if i == j { Jet::constant(1.0, order) } else { Jet::zero(order) }
            });
            m[(0, 0)] = zj;
            m[(5, 5)] = zj.recip().map_err(|e| e.at_point("Weyl factor", x))?;
            Ok(vec![m])
        });
        let zc = z;
        let complex = SmoothMap::new(0, 4, 4, move |x, order| {
            let zj = zc.eval_jet(x, order)?;
            if zj.value() <= 0.0 {
                return Err(Error::degenerate("Weyl factor must stay positive", x));
            }
            let rz = zj.sqrt().map_err(|e| e.at_point("Weyl factor", x))?;
            let rzi = rz.recip().map_err(|e| e.at_point("Weyl factor", x))?;
            let mut m = JMatC::from_fn(4, 4, |_, _| Jet::zero(order));
            for k in 0..2 {
                m[(k, k)] = rz.lift();
                m[(2 + k, 2 + k)] = rzi.lift();
            }
            Ok(vec![m])
        });
        GaugeMap { kind: GaugeKind::Weyl, map, complex }
    }

    /// Conformal boost K1(r(x)) from four covector component expressions.
    pub fn k1(r: [Expr; 4]) -> Self {
        let re = r.clone();
        let map = SmoothMap::new(0, 6, 6, move |x, order| {
            let rj: [JetF; 4] = eval4(&re, x, order)?;
            Ok(vec![k1_matrix_jets(&rj, order)])
        });
        let complex = SmoothMap::new(0, 4, 4, move |x, order| {
            let rj: [JetF; 4] = eval4(&r, x, order)?;
            Ok(vec![k1_complex_jets(&rj, order)])
        });
        GaugeMap { kind: GaugeKind::K1, map, complex }
    }

    /// Lorentz gauge map generated by six sl(2,C) coefficient expressions
    /// (three real parts, three imaginary parts); the SO(1,3) factor is the
    /// image of Sbar = exp(sum c_k sigma_k) under the spin cover, so the
    /// real and complex actions stay consistent.
    pub fn lorentz(params: [Expr; 6]) -> Self {
        let pe = params.clone();
        let sbar_at = move |x: &ChartPoint, order: usize| -> Result<JMatC> {
            let mut gen = JMatC::from_fn(2, 2, |_, _| Jet::zero(order));
            for k in 0..3 {
                let re = pe[k].eval_jet(x, order)?.lift();
                let im = pe[3 + k].eval_jet(x, order)?.lift().scale(I);
                let coeff = re + im;
                let term = algebra::pauli(k + 1).map(|c| Jet::constant(c, order) * coeff);
                gen = &gen + &term;
            }
            Ok(gen.exp())
        };
        let sb = sbar_at.clone();
        let map = SmoothMap::new(0, 6, 6, move |x, order| {
            let sbar = sb(x, order)?;
            let s = algebra::spin_to_lorentz_jets(&sbar);
            let mut m = JMatF::from_fn(6, 6, |i, j| {
                if i == j { Jet::constant(1.0, order) } else { Jet::zero(order) }
            });
            m.set_block(1, 1, &s);
            Ok(vec![m])
        });
        let complex = SmoothMap::new(0, 4, 4, move |x, order| {
            let sbar = sbar_at(x, order)?;
            let inv_adj = sbar.inverse().map_err(|e| e.at_point("SL(2,C) map", x))?.adjoint();
            let mut m = JMatC::from_fn(4, 4, |_, _| Jet::zero(order));
            m.set_block(0, 0, &inv_adj);
            m.set_block(2, 2, &sbar);
            Ok(vec![m])
        });
        GaugeMap { kind: GaugeKind::Lorentz, map, complex }
    }

    /// Product map Z(z) S K1(r), covering all of H.
    pub fn general(z: Expr, lorentz_params: [Expr; 6], r: [Expr; 4]) -> Self {
        let w = Self::weyl(z);
        let s = Self::lorentz(lorentz_params);
        let k = Self::k1(r);
        let map = {
            let (a, b, c) = (w.map.clone(), s.map.clone(), k.map.clone());
            SmoothMap::new(0, 6, 6, move |x, order| {
                let m = &(&a.eval_jets(x, order)?[0] * &b.eval_jets(x, order)?[0])
                    * &c.eval_jets(x, order)?[0];
                Ok(vec![m])
            })
        };
        let complex = {
            let (a, b, c) = (w.complex.clone(), s.complex.clone(), k.complex.clone());
            SmoothMap::new(0, 4, 4, move |x, order| {
                let m = &(&a.eval_jets(x, order)?[0] * &b.eval_jets(x, order)?[0])
                    * &c.eval_jets(x, order)?[0];
                Ok(vec![m])
            })
        };
        GaugeMap { kind: GaugeKind::General, map, complex }
    }
}

fn eval4(e: &[Expr; 4], x: &ChartPoint, order: usize) -> Result<[JetF; 4]> {
    Ok([
        e[0].eval_jet(x, order)?,
        e[1].eval_jet(x, order)?,
        e[2].eval_jet(x, order)?,
        e[3].eval_jet(x, order)?,
    ])
}

/// K1(r) as a jet matrix: upper unitriangular with r, r^t and r r^t / 2.
pub fn k1_matrix_jets(r: &[JetF; 4], order: usize) -> JMatF {
    let eta_m = eta();
    let mut m = JMatF::from_fn(6, 6, |i, j| {
        if i == j { Jet::constant(1.0, order) } else { Jet::zero(order) }
    });
    let mut rr = Jet::zero(order);
    for a in 0..4 {
        m[(0, 1 + a)] = r[a];
        // r^t = eta r^T
        m[(1 + a, 5)] = r[a].scale(eta_m[(a, a)]);
        rr = rr + r[a] * r[a].scale(eta_m[(a, a)]);
    }
    m[(0, 5)] = rr.scale(0.5);
    m
}

/// Double-cover lift of K1(r): [[1, -i herm(r)/sqrt2],[0,1]].
pub fn k1_complex_jets(r: &[JetF; 4], order: usize) -> JMatC {
    let rbar = algebra::vec_to_hermitian_jets(r)
        .map(|v| v.scale(Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)));
    let mut m = JMatC::from_fn(4, 4, |i, j| {
        if i == j { Jet::constant(Complex64::new(1.0, 0.0), order) } else { Jet::zero(order) }
    });
    m.set_block(0, 2, &rbar.map(|v| v.scale(-I)));
    m
}

/// Gauge transformation of the connection:
/// varpi -> gamma^-1 varpi gamma + gamma^-1 d gamma.
pub fn gauge_transform(varpi: &CartanConnection, gamma: &GaugeMap) -> CartanConnection {
    let form = varpi.form().clone();
    let g = gamma.map().clone();
    let out = MatrixForm::new(1, 6, 6, move |x, order| {
        let gj = &g.eval_jets(x, order + 1)?[0];
        let ginv = gj.inverse().map_err(|_| Error::degenerate("gauge map", x))?;
        let comps = form.eval_jets(x, order)?;
        (0..4)
            .map(|mu| {
                let dg = derivative_mat(gj, mu)?;
                let conj = &(&ginv * &comps[mu]) * gj;
                let inhom = &ginv * &dg;
                Ok((&conj + &inhom).map(|j| j.truncated(order)))
            })
            .collect()
    });
    CartanConnection::from_form(out)
}

/// Tractor field: an R^6-valued map (rho, ell, sigma).
#[derive(Clone)]
pub struct Tractor {
    map: SmoothMap<f64>,
}

impl Tractor {
    pub fn new(map: SmoothMap<f64>) -> Self {
        assert_eq!((map.degree(), map.rows(), map.cols()), (0, 6, 1));
        Tractor { map }
    }

    pub fn from_components(rho: Expr, ell: [Expr; 4], sigma: Expr) -> Self {
        let grid: Vec<Vec<Expr>> = vec![
            vec![rho],
            vec![ell[0].clone()],
            vec![ell[1].clone()],
            vec![ell[2].clone()],
            vec![ell[3].clone()],
            vec![sigma],
        ];
        Tractor::new(SmoothMap::from_exprs(0, vec![grid]))
    }

    pub fn map(&self) -> &SmoothMap<f64> {
        &self.map
    }

    /// The last (sigma) component as a scalar map.
    pub fn sigma(&self) -> SmoothMap<f64> {
        self.map.block(5, 0, 1, 1)
    }

    /// Apply a pointwise matrix map: phi -> m phi.
    pub fn acted_by(&self, m: &SmoothMap<f64>) -> Self {
        Tractor::new(self.map.lmul(m))
    }
}

/// Twistor field: a C^4-valued map (pi, omega) of dual Weyl spinors.
#[derive(Clone)]
pub struct Twistor {
    map: SmoothMap<Complex64>,
}

impl Twistor {
    pub fn new(map: SmoothMap<Complex64>) -> Self {
        assert_eq!((map.degree(), map.rows(), map.cols()), (0, 4, 1));
        Twistor { map }
    }

    /// Component expressions: four real parts and four imaginary parts.
    pub fn from_components(re: [Expr; 4], im: [Expr; 4]) -> Self {
        Twistor::new(SmoothMap::new(0, 4, 1, move |x, order| {
            let mut m = JMatC::from_fn(4, 1, |_, _| Jet::zero(order));
            for k in 0..4 {
                let rj = re[k].eval_jet(x, order)?.lift();
                let ij = im[k].eval_jet(x, order)?.lift().scale(I);
                m[(k, 0)] = rj + ij;
            }
            Ok(vec![m])
        }))
    }

    pub fn map(&self) -> &SmoothMap<Complex64> {
        &self.map
    }

    pub fn acted_by(&self, m: &SmoothMap<Complex64>) -> Self {
        Twistor::new(self.map.lmul(m))
    }
}

/// Covariant derivative D phi = d phi + varpi phi (R^6 representation).
pub fn covariant_derivative(phi: &Tractor, varpi: &CartanConnection) -> MatrixForm<f64> {
    let pm = phi.map().clone();
    let vf = varpi.form().clone();
    MatrixForm::new(1, 6, 1, move |x, order| {
        let pj = &pm.eval_jets(x, order + 1)?[0];
        let comps = vf.eval_jets(x, order)?;
        (0..4)
            .map(|mu| {
                let dphi = derivative_mat(pj, mu)?;
                Ok((&dphi + &(&comps[mu] * pj)).map(|j| j.truncated(order)))
            })
            .collect()
    })
}

/// Covariant derivative of the twistor: d psi + iso(varpi) psi.
pub fn covariant_derivative_twistor(
    psi: &Twistor,
    varpi: &CartanConnection,
) -> MatrixForm<Complex64> {
    let pm = psi.map().clone();
    let vf = varpi.form().clone();
    MatrixForm::new(1, 4, 1, move |x, order| {
        let pj = &pm.eval_jets(x, order + 1)?[0];
        let comps = vf.eval_jets(x, order)?;
        (0..4)
            .map(|mu| {
                let dpsi = derivative_mat_c(pj, mu)?;
                let vb = iso_jets(&comps[mu]);
                Ok((&dpsi + &(&vb * pj)).map(|j| j.truncated(order)))
            })
            .collect()
    })
}

/// The normal connection determined by a tetrad: a = 0, theta from e, A the
/// torsion-free spin connection, P the trace adjustment
/// P_ab = -1/2 (Ric_ab - R/6 eta_ab) that removes the Ricci trace of the
/// curvature W block.
pub fn normal_connection(e: &Tetrad) -> CartanConnection {
    let em = e.map().clone();
    let form = MatrixForm::new(1, 6, 6, move |x, order| {
        let je = em
            .eval_jets(x, order + 2)
            .map_err(|err| match err {
                Error::OrderExceeded { .. } => Error::OrderExceeded {
                    needed: order + 2,
                    available: crate::jet::MAX_ORDER,
                },
                other => other,
            })?[0]
            .clone();
        normal_connection_jets(&je, x, order)
    });
    CartanConnection::from_form(form)
}

/// Normal-connection components from the tetrad jet (which must carry two
/// orders more than the requested output).
pub fn normal_connection_jets(je: &JMatF, x: &ChartPoint, order: usize) -> Result<Vec<JMatF>> {
    let eta_m = eta();
    let einv = je.inverse().map_err(|_| Error::degenerate("tetrad", x))?;
    let spin = spin_connection_jets(je, &einv, x, order + 1)?;
    let p_cov = schouten_jets(&spin, &einv, x, order)?;

    (0..4)
        .map(|mu| {
            let a = Jet::zero(order);
            let s = spin[mu].map(|j| j.truncated(order));
            let theta = JMatF::from_fn(4, 1, |b, _| je[(b, mu)].truncated(order));
            // P-block 1-form components: P_{a,mu} = P_ab e^b_mu.
            let mut p_row = JMatF::from_fn(1, 4, |_, _| Jet::zero(order));
            for a_idx in 0..4 {
                let mut acc = Jet::zero(order);
                for b in 0..4 {
                    acc = acc + p_cov[(a_idx, b)] * je[(b, mu)];
                }
                p_row[(0, a_idx)] = acc.truncated(order);
            }
            let _ = eta_m;
            Ok(assemble_block_jets(&a, &s, &p_row, &theta))
        })
        .collect()
}

/// Torsion-free so(1,3) spin connection A_mu from tetrad jets, valid to
/// `order`; solves d theta + A ^ theta = 0 in closed form.
fn spin_connection_jets(
    je: &JMatF,
    einv: &JMatF,
    _x: &ChartPoint,
    order: usize,
) -> Result<[JMatF; 4]> {
    let eta_m = eta();
    // dtheta^a_{mu nu} = d_mu e^a_nu - d_nu e^a_mu, then frame components
    // K^a_{bc} = dtheta^a_{mu nu} e^mu_b e^nu_c.
    let mut k = vec![Jet::zero(order); 64]; // [a][b][c]
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                let mut acc = Jet::zero(order);
                for mu in 0..4 {
                    for nu in 0..4 {
                        let dt = je[(a, nu)].derivative(mu)? - je[(a, mu)].derivative(nu)?;
                        acc = acc + dt * einv[(mu, b)] * einv[(nu, c)];
                    }
                }
                k[(a * 4 + b) * 4 + c] = acc;
            }
        }
    }
    let low = |a: usize, b: usize, c: usize| k[(a * 4 + b) * 4 + c].scale(eta_m[(a, a)]);
    // A_{ab,c} = (K_abc + K_bca - K_cab) / 2, antisymmetric in (a, b).
    let mut a_low = vec![Jet::zero(order); 64];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                a_low[(a * 4 + b) * 4 + c] =
                    (low(a, b, c) + low(b, c, a) - low(c, a, b)).scale(0.5);
            }
        }
    }
    // Coordinate components A_mu with the frame index raised:
    // (A_mu)^a_b = eta^{aa} A_{ab,c} e^c_mu.
    Ok(std::array::from_fn(|mu| {
        JMatF::from_fn(4, 4, |a, b| {
            let mut acc = Jet::zero(order);
            for c in 0..4 {
                acc = acc + a_low[(a * 4 + b) * 4 + c] * je[(c, mu)];
            }
            acc.scale(eta_m[(a, a)])
        })
    }))
}

/// Frame-index tensor P_ab = -1/2 (Ric_ab - R/6 eta_ab) computed from the
/// spin connection's curvature; valid to `order`.
fn schouten_jets(
    spin: &[JMatF; 4],
    einv: &JMatF,
    _x: &ChartPoint,
    order: usize,
) -> Result<JMatF> {
    let eta_m = eta();
    // R_{mu nu} = d_mu A_nu - d_nu A_mu + [A_mu, A_nu].
    let mut riemann = Vec::with_capacity(16);
    for mu in 0..4 {
        for nu in 0..4 {
            if mu >= nu {
                riemann.push(JMatF::zeros(4, 4));
                continue;
            }
            let d1 = derivative_mat(&spin[nu], mu)?;
            let d2 = derivative_mat(&spin[mu], nu)?;
            let comm = &(&spin[mu] * &spin[nu]) - &(&spin[nu] * &spin[mu]);
            riemann.push((&(&d1 - &d2) + &comm.map(|j| j.truncated(order))).clone());
        }
    }
    let r_at = |mu: usize, nu: usize, a: usize, b: usize| -> Jet<f64> {
        if mu < nu {
            riemann[mu * 4 + nu][(a, b)]
        } else if mu > nu {
            -riemann[nu * 4 + mu][(a, b)]
        } else {
            Jet::zero(order)
        }
    };
    // Ricci in frame indices: Ric_{bd} = R^a_{b,ad} with
    // R^a_{b,cd} = R_{mu nu}^a_b e^mu_c e^nu_d.
    let mut ric = JMatF::from_fn(4, 4, |_, _| Jet::zero(order));
    for b in 0..4 {
        for d in 0..4 {
            let mut acc = Jet::zero(order);
            for a in 0..4 {
                for mu in 0..4 {
                    for nu in 0..4 {
                        acc = acc + r_at(mu, nu, a, b) * einv[(mu, a)] * einv[(nu, d)];
                    }
                }
            }
            ric[(b, d)] = acc;
        }
    }
    let mut scal = Jet::zero(order);
    for b in 0..4 {
        scal = scal + ric[(b, b)].scale(eta_m[(b, b)]);
    }
    Ok(JMatF::from_fn(4, 4, |a, b| {
        let trace_part = if a == b { scal.scale(eta_m[(a, a)] / 6.0) } else { Jet::zero(order) };
        (ric[(a, b)] - trace_part).scale(-0.5)
    }))
}

/// Independent coordinate-space curvature oracle: Christoffel symbols,
/// Riemann, Ricci, scalar and Weyl tensor straight from the metric. Used
/// only to cross-check the frame-side normal connection; shares no code
/// with it.
pub mod oracle {
    use super::*;

    /// Fully mixed Weyl tensor C^rho_{sigma mu nu} at a point, flattened
    /// with index [rho][sigma][mu][nu].
    pub fn weyl_tensor(g: &Metric, x: &ChartPoint) -> Result<Vec<f64>> {
        let gj = g.eval_jets(x, 2)?;
        let ginv = gj.inverse().map_err(|_| Error::degenerate("metric", x))?;
        // Gamma^rho_{mu nu} = 1/2 g^{rho l} (d_mu g_{l nu} + d_nu g_{l mu} - d_l g_{mu nu})
        let mut gamma = vec![Jet::zero(1); 64];
        for rho in 0..4 {
            for mu in 0..4 {
                for nu in 0..4 {
                    let mut acc = Jet::zero(1);
                    for l in 0..4 {
                        let t = gj[(l, nu)].derivative(mu)? + gj[(l, mu)].derivative(nu)?
                            - gj[(mu, nu)].derivative(l)?;
                        acc = acc + ginv[(rho, l)] * t;
                    }
                    gamma[(rho * 4 + mu) * 4 + nu] = acc.scale(0.5);
                }
            }
        }
        let ga = |r: usize, m: usize, n: usize| gamma[(r * 4 + m) * 4 + n];
        // R^rho_{sigma mu nu} = d_mu G^rho_{nu sigma} - d_nu G^rho_{mu sigma}
        //                      + G^rho_{mu l} G^l_{nu sigma} - G^rho_{nu l} G^l_{mu sigma}
        let mut riem = vec![0.0f64; 256];
        for rho in 0..4 {
            for sig in 0..4 {
                for mu in 0..4 {
                    for nu in 0..4 {
                        let mut v = ga(rho, nu, sig).d1(mu) - ga(rho, mu, sig).d1(nu);
                        for l in 0..4 {
                            v += ga(rho, mu, l).value() * ga(l, nu, sig).value()
                                - ga(rho, nu, l).value() * ga(l, mu, sig).value();
                        }
                        riem[((rho * 4 + sig) * 4 + mu) * 4 + nu] = v;
                    }
                }
            }
        }
        let gv = gj.map(|j| j.value());
        let gi = ginv.map(|j| j.value());
        // Lower: R_{rho sigma mu nu}; Ricci R_{sigma nu} = R^rho_{sigma rho nu}.
        let mut ric = [[0.0f64; 4]; 4];
        for sig in 0..4 {
            for nu in 0..4 {
                for rho in 0..4 {
                    ric[sig][nu] += riem[((rho * 4 + sig) * 4 + rho) * 4 + nu];
                }
            }
        }
        let mut scal = 0.0;
        for s in 0..4 {
            for n in 0..4 {
                scal += gi[(s, n)] * ric[s][n];
            }
        }
        let mut low = vec![0.0f64; 256];
        for r in 0..4 {
            for s in 0..4 {
                for m in 0..4 {
                    for n in 0..4 {
                        let mut v = 0.0;
                        for l in 0..4 {
                            v += gv[(r, l)] * riem[((l * 4 + s) * 4 + m) * 4 + n];
                        }
                        low[((r * 4 + s) * 4 + m) * 4 + n] = v;
                    }
                }
            }
        }
        // Weyl: C = Riem - (g . Ric)/2 + R (g . g)/6 in four dimensions.
        let mut weyl_low = vec![0.0f64; 256];
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        let kn = gv[(a, c)] * ric[b][d] - gv[(a, d)] * ric[b][c]
                            + gv[(b, d)] * ric[a][c]
                            - gv[(b, c)] * ric[a][d];
                        let gg = gv[(a, c)] * gv[(b, d)] - gv[(a, d)] * gv[(b, c)];
                        weyl_low[((a * 4 + b) * 4 + c) * 4 + d] =
                            low[((a * 4 + b) * 4 + c) * 4 + d] - 0.5 * kn + scal / 6.0 * gg;
                    }
                }
            }
        }
        // Raise the first index back.
        let mut out = vec![0.0f64; 256];
        for r in 0..4 {
            for s in 0..4 {
                for m in 0..4 {
                    for n in 0..4 {
                        let mut v = 0.0;
                        for l in 0..4 {
                            v += gi[(r, l)] * weyl_low[((l * 4 + s) * 4 + m) * 4 + n];
                        }
                        out[((r * 4 + s) * 4 + m) * 4 + n] = v;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Convert the frame-index W block of a curvature at a point into the
    /// mixed coordinate tensor W^rho_{sigma mu nu} for comparison with
    /// [`weyl_tensor`].
    pub fn w_block_coordinates(
        curv: &CartanCurvature,
        e: &Tetrad,
        x: &ChartPoint,
    ) -> Result<Vec<f64>> {
        let comps = curv.w_block().eval(x)?;
        let ej = e.eval_jets(x, 0)?.map(|j| j.value());
        let einv = ej.inverse().map_err(|_| Error::degenerate("tetrad", x))?;
        let pairs = [(0usize, 1usize), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
        let mut out = vec![0.0f64; 256];
        for rho in 0..4 {
            for sig in 0..4 {
                for (k, &(mu, nu)) in pairs.iter().enumerate() {
                    let mut v = 0.0;
                    for a in 0..4 {
                        for b in 0..4 {
                            v += einv[(rho, a)] * comps[k][(a, b)] * ej[(b, sig)];
                        }
                    }
                    out[((rho * 4 + sig) * 4 + mu) * 4 + nu] = v;
                    out[((rho * 4 + sig) * 4 + nu) * 4 + mu] = -v;
                }
            }
        }
        Ok(out)
    }
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

    fn random_connection<R: rand::Rng>(r: &mut R) -> CartanConnection {
        let a = MatrixForm::from_exprs(
            1,
            (0..4).map(|_| vec![vec![sample::random_poly(r, 2, 0.4)]]).collect(),
        );
        let big_a = MatrixForm::new(1, 4, 4, {
            let polys: Vec<[Expr; 6]> = (0..4)
                .map(|_| std::array::from_fn(|_| sample::random_poly(r, 2, 0.3)))
                .collect();
            move |x, order| {
                polys
                    .iter()
                    .map(|p| {
                        let basis = crate::algebra::so13_basis();
                        let mut m = JMatF::from_fn(4, 4, |_, _| Jet::zero(order));
                        for (k, b) in basis.iter().enumerate() {
                            let c = p[k].eval_jet(x, order)?;
                            let term = b.map(|v| c.scale(v));
                            m = &m + &term;
                        }
                        Ok(m)
                    })
                    .collect()
            }
        });
        let p = MatrixForm::from_exprs(
            1,
            (0..4)
                .map(|_| vec![(0..4).map(|_| sample::random_poly(r, 2, 0.3)).collect()])
                .collect(),
        );
        let theta = MatrixForm::from_exprs(
            1,
            (0..4)
                .map(|mu| {
                    (0..4)
                        .map(|a| {
                            let base = if a == mu { 1.0 } else { 0.0 };
                            vec![Expr::constant(base).add(sample::random_poly(r, 2, 0.15))]
                        })
                        .collect()
                })
                .collect(),
        );
        CartanConnection::from_blocks(a, big_a, p, theta)
    }

    #[test]
    fn assembled_connection_lies_in_so24() {
        let mut r = rng(31);
        let c = random_connection(&mut r);
        for x in sample::sample_points(&mut r, &sample::unit_box(), 10) {
            for comp in c.form().eval(&x).unwrap() {
                assert!(crate::algebra::so24_residual(&comp) <= 1e-11);
            }
        }
    }

    #[test]
    fn curvature_of_zero_connection_vanishes() {
        let c = CartanConnection::zero();
        let omega = curvature(&c);
        let x = [0.1, 0.2, -0.3, 0.4];
        for comp in omega.form().eval(&x).unwrap() {
            assert_eq!(comp.max_mag(), 0.0);
        }
    }

    #[test]
    fn pure_gauge_connection_is_flat() {
        // varpi = gamma^-1 d gamma has vanishing curvature.
        let mut r = rng(32);
        let gamma = GaugeMap::general(
            sample::random_positive(&mut r, 2, 0.3),
            std::array::from_fn(|_| sample::random_poly(&mut r, 2, 0.25)),
            std::array::from_fn(|_| sample::random_poly(&mut r, 2, 0.3)),
        );
        let varpi = gauge_transform(&CartanConnection::zero(), &gamma);
        let omega = curvature(&varpi);
        for x in sample::sample_points(&mut r, &sample::unit_box(), 25) {
            for comp in omega.form().eval(&x).unwrap() {
                assert!(comp.max_mag() < 1e-9, "stray curvature {}", comp.max_mag());
            }
        }
    }

    #[test]
    fn curvature_matches_finite_difference_oracle() {
        let mut r = rng(33);
        let c = random_connection(&mut r);
        let omega = curvature(&c);
        let pairs = [(0usize, 1usize), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
        for x in sample::sample_points(&mut r, &sample::unit_box(), 5) {
            let vals = c.form().eval(&x).unwrap();
            let curv = omega.form().eval(&x).unwrap();
            for (k, &(mu, nu)) in pairs.iter().enumerate() {
                let d1 = sample::fd_partial(c.form(), nu, &x, mu, 1e-4).unwrap();
                let d2 = sample::fd_partial(c.form(), mu, &x, nu, 1e-4).unwrap();
                let wedge = &(&vals[mu] * &vals[nu]) - &(&vals[nu] * &vals[mu]);
                let expect = &(&d1 - &d2) + &wedge;
                assert!(curv[k].max_diff(&expect) < 1e-6);
            }
        }
    }

    #[test]
    fn gauge_identity_leaves_connection_unchanged() {
        let mut r = rng(34);
        let c = random_connection(&mut r);
        let t = gauge_transform(&c, &GaugeMap::identity());
        for x in sample::sample_points(&mut r, &sample::unit_box(), 5) {
            assert!(c.form().max_diff_at(t.form(), &x).unwrap() < 1e-14);
        }
    }

    #[test]
    fn constant_gauge_map_acts_by_conjugation() {
        let mut r = rng(35);
        let c = random_connection(&mut r);
        let z = 1.4f64;
        let gamma = GaugeMap::weyl(Expr::constant(z));
        let t = gauge_transform(&c, &gamma);
        for x in sample::sample_points(&mut r, &sample::unit_box(), 5) {
            let g = GroupMat(z);
            let vals = c.form().eval(&x).unwrap();
            let got = t.form().eval(&x).unwrap();
            for mu in 0..4 {
                let expect = &(&g.inv() * &vals[mu]) * &g.mat();
                assert!(got[mu].max_diff(&expect) < 1e-12);
            }
        }
    }

    struct GroupMat(f64);
    impl GroupMat {
        fn mat(&self) -> MatF {
            let mut m = MatF::identity(6);
            m[(0, 0)] = self.0;
            m[(5, 5)] = 1.0 / self.0;
            m
        }
        fn inv(&self) -> MatF {
            let mut m = MatF::identity(6);
            m[(0, 0)] = 1.0 / self.0;
            m[(5, 5)] = self.0;
            m
        }
    }

    #[test]
    fn curvature_is_gauge_covariant() {
        let mut r = rng(36);
        let c = random_connection(&mut r);
        let gamma = GaugeMap::general(
            sample::random_positive(&mut r, 2, 0.25),
            std::array::from_fn(|_| sample::random_poly(&mut r, 2, 0.2)),
            std::array::from_fn(|_| sample::random_poly(&mut r, 2, 0.25)),
        );
        let direct = curvature(&gauge_transform(&c, &gamma));
        let conjugated = curvature(&c).form().conjugate_by(gamma.map());
        for x in sample::sample_points(&mut r, &sample::unit_box(), 20) {
            let d = direct.form().max_diff_at(&conjugated, &x).unwrap();
            assert!(d <= 1e-8, "covariance residual {d}");
        }
    }

    #[test]
    fn covariant_derivative_equivariance() {
        let mut r = rng(37);
        let c = random_connection(&mut r);
        let phi = Tractor::from_components(
            sample::random_poly(&mut r, 2, 0.4),
            std::array::from_fn(|_| sample::random_poly(&mut r, 2, 0.4)),
            sample::random_positive(&mut r, 2, 0.3),
        );
        let gamma = GaugeMap::general(
            sample::random_positive(&mut r, 2, 0.25),
            std::array::from_fn(|_| sample::random_poly(&mut r, 2, 0.2)),
            std::array::from_fn(|_| sample::random_poly(&mut r, 2, 0.25)),
        );
        let ginv = {
            let g = gamma.map().clone();
            SmoothMap::new(0, 6, 6, move |x, order| {
                Ok(vec![g.eval_jets(x, order)?[0]
                    .inverse()
                    .map_err(|_| Error::degenerate("gauge map", x))?])
            })
        };
        let lhs = covariant_derivative(&phi.acted_by(&ginv), &gauge_transform(&c, &gamma));
        let rhs = covariant_derivative(&phi, &c).lmul(&ginv);
        for x in sample::sample_points(&mut r, &sample::unit_box(), 20) {
            let d = lhs.max_diff_at(&rhs, &x).unwrap();
            assert!(d <= 1e-9, "equivariance residual {d}");
        }
    }

    #[test]
    fn covariant_derivative_of_constant_in_flat_connection() {
        let phi = Tractor::from_components(
            Expr::constant(0.3),
            std::array::from_fn(|k| Expr::constant(k as f64)),
            Expr::constant(1.0),
        );
        let d = covariant_derivative(&phi, &CartanConnection::zero());
        let x = [0.0, 0.1, 0.2, 0.3];
        for comp in d.eval(&x).unwrap() {
            assert_eq!(comp.max_mag(), 0.0);
        }
    }

    #[test]
    fn covariant_derivative_matches_block_product() {
        // Constant sigma-only tractor against a P-only connection: the
        // derivative reduces to the direct 6x6 block product.
        let mut r = rng(38);
        let p = MatrixForm::from_exprs(
            1,
            (0..4)
                .map(|_| vec![(0..4).map(|_| sample::random_poly(&mut r, 2, 0.4)).collect()])
                .collect(),
        );
        let c = CartanConnection::from_blocks(
            MatrixForm::zero(1, 1, 1),
            MatrixForm::zero(1, 4, 4),
            p,
            MatrixForm::zero(1, 4, 1),
        );
        let sigma = 1.7;
        let phi = Tractor::from_components(
            Expr::constant(0.0),
            std::array::from_fn(|_| Expr::constant(0.0)),
            Expr::constant(sigma),
        );
        let d = covariant_derivative(&phi, &c);
        for x in sample::sample_points(&mut r, &sample::unit_box(), 5) {
            let dv = d.eval(&x).unwrap();
            let cv = c.form().eval(&x).unwrap();
            for mu in 0..4 {
                let mut expect = MatF::zeros(6, 1);
                for i in 0..6 {
                    expect[(i, 0)] = cv[mu][(i, 5)] * sigma;
                }
                assert!(dv[mu].max_diff(&expect) < 1e-13);
            }
        }
    }

    #[test]
    fn normal_connection_of_minkowski_tetrad_is_flat() {
        let e = Tetrad::minkowski();
        let n = normal_connection(&e);
        let omega = curvature(&n);
        let x = [0.2, -0.1, 0.3, 0.0];
        let comps = n.form().eval(&x).unwrap();
        for mu in 0..4 {
            // Only the soldering block survives.
            let mut expect = MatF::zeros(6, 6);
            expect[(1 + mu, 0)] = 1.0;
            expect[(5, 1 + mu)] = eta()[(mu, mu)];
            assert!(comps[mu].max_diff(&expect) <= 1e-12);
        }
        for comp in omega.form().eval(&x).unwrap() {
            assert!(comp.max_mag() <= 1e-12);
        }
    }

    #[test]
    fn normal_connection_kills_torsion_f_and_ricci_trace() {
        let mut r = rng(39);
        let grid: Vec<Vec<Expr>> = (0..4)
            .map(|a| {
                (0..4)
                    .map(|mu| {
                        let base = if a == mu { 1.0 } else { 0.0 };
                        Expr::constant(base).add(sample::random_poly(&mut r, 2, 0.08))
                    })
                    .collect()
            })
            .collect();
        let e = Tetrad::from_exprs(grid);
        let n = normal_connection(&e);
        let omega = curvature(&n);
        let einv = e.inverse_map();
        for x in sample::sample_points(&mut r, &sample::unit_box(), 15) {
            let f = omega.f_block().eval(&x).unwrap();
            let torsion = omega.torsion_block().eval(&x).unwrap();
            for k in 0..6 {
                assert!(f[k].max_mag() <= 1e-8, "f block {}", f[k].max_mag());
                assert!(torsion[k].max_mag() <= 1e-8);
            }
            // Ricci-type trace of W must vanish.
            let w = omega.w_block().eval(&x).unwrap();
            let ei = einv.eval(&x).unwrap().remove(0);
            let pairs = [(0usize, 1usize), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
            for b in 0..4 {
                for d in 0..4 {
                    let mut acc = 0.0;
                    for (k, &(mu, nu)) in pairs.iter().enumerate() {
                        for a in 0..4 {
                            acc += w[k][(a, b)] * (ei[(mu, a)] * ei[(nu, d)]
                                - ei[(nu, a)] * ei[(mu, d)]);
                        }
                    }
                    assert!(acc.abs() <= 1e-7, "W trace {acc}");
                }
            }
        }
    }

    #[test]
    fn conformally_flat_tetrad_has_vanishing_w_block() {
        let omega_expr = Expr::constant(1.0).add(Expr::constant(0.1).mul(Expr::var(0)));
        let e = Tetrad::conformal(omega_expr);
        let n = normal_connection(&e);
        let curv = curvature(&n);
        let mut r = rng(40);
        for x in sample::sample_points(&mut r, &sample::unit_box(), 10) {
            for w in curv.w_block().eval(&x).unwrap() {
                assert!(w.max_mag() <= 1e-7, "Weyl part {}", w.max_mag());
            }
            let oracle = oracle::weyl_tensor(&e.metric(), &x).unwrap();
            for v in oracle {
                assert!(v.abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn w_block_matches_coordinate_weyl_oracle() {
        let mut r = rng(41);
        let grid: Vec<Vec<Expr>> = (0..4)
            .map(|a| {
                (0..4)
                    .map(|mu| {
                        let base = if a == mu { 1.0 } else { 0.0 };
                        Expr::constant(base).add(sample::random_poly(&mut r, 2, 0.06))
                    })
                    .collect()
            })
            .collect();
        let e = Tetrad::from_exprs(grid);
        let n = normal_connection(&e);
        let curv = curvature(&n);
        for x in sample::sample_points(&mut r, &sample::unit_box(), 8) {
            let ours = oracle::w_block_coordinates(&curv, &e, &x).unwrap();
            let ref_w = oracle::weyl_tensor(&e.metric(), &x).unwrap();
            let worst = ours
                .iter()
                .zip(ref_w.iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            assert!(worst <= 1e-6, "Weyl mismatch {worst}");
        }
    }

    #[test]
    fn perturbed_schouten_breaks_trace_condition() {
        // The normal connection is the unique trace-free fix: a symmetric
        // perturbation of the P block must show up in the W trace.
        let mut r = rng(42);
        let grid: Vec<Vec<Expr>> = (0..4)
            .map(|a| {
                (0..4)
                    .map(|mu| {
                        let base = if a == mu { 1.0 } else { 0.0 };
                        Expr::constant(base).add(sample::random_poly(&mut r, 2, 0.05))
                    })
                    .collect()
            })
            .collect();
        let e = Tetrad::from_exprs(grid.clone());
        let n = normal_connection(&e);
        let eps = 1e-2;
        let perturbed = perturb_p_block(&n, eps, 43);
        let curv = curvature(&perturbed);
        let einv = e.inverse_map();
        let mut worst = 0.0f64;
        for x in sample::sample_points(&mut r, &sample::unit_box(), 10) {
            let w = curv.w_block().eval(&x).unwrap();
            let ei = einv.eval(&x).unwrap().remove(0);
            let pairs = [(0usize, 1usize), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
            for b in 0..4 {
                for d in 0..4 {
                    let mut acc = 0.0;
                    for (k, &(mu, nu)) in pairs.iter().enumerate() {
                        for a in 0..4 {
                            acc += w[k][(a, b)]
                                * (ei[(mu, a)] * ei[(nu, d)] - ei[(nu, a)] * ei[(mu, d)]);
                        }
                    }
                    worst = worst.max(acc.abs());
                }
            }
        }
        assert!(worst > 1e-4, "perturbation undetected: {worst}");
    }

    /// Add eps * (random constant symmetric matrix, frame indices) to the
    /// Schouten block.
    pub(crate) fn perturb_p_block(c: &CartanConnection, eps: f64, seed: u64) -> CartanConnection {
        let mut r = rng(seed);
        let mut sym = MatF::from_fn(4, 4, |_, _| r.gen_range(-1.0..1.0f64));
        sym = (&sym + &sym.transpose()).scale(0.5 * eps);
        let form = c.form().clone();
        let tet = c.tetrad();
        let out = MatrixForm::new(1, 6, 6, move |x, order| {
            let mut comps = form.eval_jets(x, order)?;
            let je = tet.eval_jets(x, order)?;
            let eta_j = const_jets_f(&eta(), order);
            for mu in 0..4 {
                let mut extra = JMatF::from_fn(1, 4, |_, _| Jet::zero(order));
                for a in 0..4 {
                    let mut acc = Jet::zero(order);
                    for b in 0..4 {
                        acc = acc + je[(b, mu)].scale(sym[(a, b)]);
                    }
                    extra[(0, a)] = acc;
                }
                let cur = comps[mu].block(0, 1, 1, 4);
                let newp = &cur + &extra;
                comps[mu].set_block(0, 1, &newp);
                comps[mu].set_block(1, 5, &(&eta_j * &newp.transpose()));
            }
            Ok(comps)
        });
        CartanConnection::from_form(out)
    }

    use rand::Rng;

    #[test]
    fn induced_metric_scales_quadratically_with_weyl() {
        let mut r = rng(44);
        let c = random_connection(&mut r);
        let z = 1.6f64;
        let zc = GaugeMap::weyl(Expr::constant(z));
        let scaled = gauge_transform(&c, &zc);
        for x in sample::sample_points(&mut r, &sample::unit_box(), 8) {
            let g1 = c.induced_metric().eval_jets(&x, 0).unwrap().map(|j| j.value());
            let g2 = scaled.induced_metric().eval_jets(&x, 0).unwrap().map(|j| j.value());
            assert!(g2.max_diff(&g1.scale(z * z)) < 1e-11);
        }
    }

    #[test]
    fn induced_metric_has_lorentz_signature() {
        let mut r = rng(45);
        let c = random_connection(&mut r);
        let g = c.induced_metric();
        for x in sample::sample_points(&mut r, &sample::unit_box(), 10) {
            assert!(g.lorentzian_at(&x).unwrap());
        }
    }

    #[test]
    fn bianchi_identity_for_polynomial_connections() {
        let mut r = rng(46);
        let c = random_connection(&mut r);
        let omega = curvature(&c);
        let d_omega = omega.form().d();
        let rhs = omega
            .form()
            .wedge(c.form())
            .unwrap()
            .sub(&c.form().wedge(omega.form()).unwrap());
        for x in sample::sample_points(&mut r, &sample::unit_box(), 10) {
            let d = d_omega.max_diff_at(&rhs, &x).unwrap();
            assert!(d <= 1e-8, "Bianchi residual {d}");
        }
    }
}
