//! Dressing-field constructions: the conformal-boost dressing u1 read off
//! the connection, the dilaton twisting map C(phi) read off the tractor,
//! the invariant composite fields they produce, and the residual
//! transformation laws relating the two stages.
//!
//! The sign of q in u1 is fixed by requiring the dilation block of the
//! dressed connection to cancel; tests assert the cancellation, so a
//! convention error is self-detecting.

use num_complex::Complex64;

use crate::algebra;
use crate::cartan::{
    curvature, k1_complex_jets, k1_matrix_jets, CartanConnection, CartanCurvature, GaugeMap,
    Tractor, Twistor,
};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::forms::{ChartPoint, MatrixForm, Metric, SmoothMap, Tetrad};
use crate::jet::{Jet, JetF};
use crate::matrix::{JMatC, JMatF, Mat};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// The conformal-boost dressing field extracted from a connection:
/// q_a = a_mu e^mu_a, u1 = K1(q) pointwise, with its double-cover lift.
#[derive(Clone)]
pub struct K1Dressing {
    q: SmoothMap<f64>,
    u1: SmoothMap<f64>,
    u1_complex: SmoothMap<Complex64>,
}

impl K1Dressing {
    /// Covector q as a 1x4 map.
    pub fn q(&self) -> &SmoothMap<f64> {
        &self.q
    }

    pub fn u1(&self) -> &SmoothMap<f64> {
        &self.u1
    }

    pub fn u1_complex(&self) -> &SmoothMap<Complex64> {
        &self.u1_complex
    }
}

fn q_jets_of(varpi: &MatrixForm<f64>, x: &ChartPoint, order: usize) -> Result<[JetF; 4]> {
    let comps = varpi.eval_jets(x, order)?;
    let e = JMatF::from_fn(4, 4, |a, mu| comps[mu][(1 + a, 0)]);
    let einv = e.inverse().map_err(|_| Error::degenerate("tetrad", x))?;
    Ok(std::array::from_fn(|a| {
        let mut acc = Jet::zero(order);
        for mu in 0..4 {
            acc = acc + comps[mu][(0, 0)] * einv[(mu, a)];
        }
        acc
    }))
}

/// Read the dressing field off the connection.
pub fn extract_u1(varpi: &CartanConnection) -> K1Dressing {
    let f1 = varpi.form().clone();
    let q = SmoothMap::new(0, 1, 4, move |x, order| {
        let qj = q_jets_of(&f1, x, order)?;
        Ok(vec![JMatF::from_fn(1, 4, |_, a| qj[a])])
    });
    let f2 = varpi.form().clone();
    let u1 = SmoothMap::new(0, 6, 6, move |x, order| {
        let qj = q_jets_of(&f2, x, order)?;
        Ok(vec![k1_matrix_jets(&qj, order)])
    });
    let f3 = varpi.form().clone();
    let u1_complex = SmoothMap::new(0, 4, 4, move |x, order| {
        let qj = q_jets_of(&f3, x, order)?;
        Ok(vec![k1_complex_jets(&qj, order)])
    });
    K1Dressing { q, u1, u1_complex }
}

/// What seeds a twisting map: a Weyl gauge parameter or the dilaton.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TwistSource {
    WeylParam,
    Dilaton,
}

/// The twisting map C(w) in K1 W, together with its double-cover lift.
///
/// Upsilon(w)_a = w^-1 d_mu w e^mu_a and
/// C(w) = (w, Upsilon, w^-1 Upsilon^2 / 2; 0, 1_4, w^-1 Upsilon^t; 0, 0, w^-1).
#[derive(Clone)]
pub struct TwistingMap {
    source: TwistSource,
    w: SmoothMap<f64>,
    upsilon: SmoothMap<f64>,
    c: SmoothMap<f64>,
    c_complex: SmoothMap<Complex64>,
}

impl TwistingMap {
    pub fn source(&self) -> TwistSource {
        self.source
    }

    pub fn w(&self) -> &SmoothMap<f64> {
        &self.w
    }

    pub fn upsilon(&self) -> &SmoothMap<f64> {
        &self.upsilon
    }

    /// The 6x6 H-valued map.
    pub fn map(&self) -> &SmoothMap<f64> {
        &self.c
    }

    pub fn complex_map(&self) -> &SmoothMap<Complex64> {
        &self.c_complex
    }
}

fn upsilon_jets(
    w: &SmoothMap<f64>,
    e: &SmoothMap<f64>,
    x: &ChartPoint,
    order: usize,
) -> Result<[JetF; 4]> {
    let wj = w.eval_jets(x, order + 1)?[0][(0, 0)];
    if wj.value() <= 0.0 {
        return Err(Error::degenerate("twisting scalar must stay positive", x));
    }
    let winv = wj.recip().map_err(|e| e.at_point("twisting scalar", x))?;
    let ej = &e.eval_jets(x, order)?[0];
    let einv = ej.inverse().map_err(|_| Error::degenerate("tetrad", x))?;
    Ok(std::array::from_fn(|a| {
        let mut acc = Jet::zero(order);
        for mu in 0..4 {
            let dmu = wj.derivative(mu).expect("order+1 jets available");
            acc = acc + winv * dmu * einv[(mu, a)];
        }
        acc.truncated(order)
    }))
}

/// Build the twisting map from a positive scalar and a tetrad.
pub fn twisting_map(w: SmoothMap<f64>, e: &Tetrad, source: TwistSource) -> TwistingMap {
    assert_eq!((w.rows(), w.cols(), w.degree()), (1, 1, 0));
    let em = e.map().clone();
    let upsilon = {
        let (w, em) = (w.clone(), em.clone());
        SmoothMap::new(0, 1, 4, move |x, order| {
            let u = upsilon_jets(&w, &em, x, order)?;
            Ok(vec![JMatF::from_fn(1, 4, |_, a| u[a])])
        })
    };
    let c = {
        let (w, em) = (w.clone(), em.clone());
        SmoothMap::new(0, 6, 6, move |x, order| {
            let wj = w.eval_jets(x, order)?[0][(0, 0)];
            let u = upsilon_jets(&w, &em, x, order)?;
            Ok(vec![twist_matrix_jets(&wj, &u, x, order)?])
        })
    };
    let c_complex = {
        let (w, em) = (w.clone(), em.clone());
        SmoothMap::new(0, 4, 4, move |x, order| {
            let wj = w.eval_jets(x, order)?[0][(0, 0)];
            let u = upsilon_jets(&w, &em, x, order)?;
            Ok(vec![twist_complex_jets(&wj, &u, x, order)?])
        })
    };
    TwistingMap { source, w, upsilon, c, c_complex }
}

fn twist_matrix_jets(
    wj: &JetF,
    upsilon: &[JetF; 4],
    x: &ChartPoint,
    order: usize,
) -> Result<JMatF> {
    let eta = algebra::eta();
    let winv = wj.recip().map_err(|e| e.at_point("twisting scalar", x))?;
    let mut m = JMatF::from_fn(6, 6, |i, j| {
        if i == j { Jet::constant(1.0, order) } else { Jet::zero(order) }
    });
    m[(0, 0)] = wj.truncated(order);
    m[(5, 5)] = winv.truncated(order);
    let mut ups_sq = Jet::zero(order);
    for a in 0..4 {
        m[(0, 1 + a)] = upsilon[a];
        m[(1 + a, 5)] = (winv * upsilon[a]).scale(eta[(a, a)]).truncated(order);
        ups_sq = ups_sq + upsilon[a] * upsilon[a].scale(eta[(a, a)]);
    }
    m[(0, 5)] = (winv * ups_sq).scale(0.5).truncated(order);
    Ok(m)
}

fn twist_complex_jets(
    wj: &JetF,
    upsilon: &[JetF; 4],
    x: &ChartPoint,
    order: usize,
) -> Result<JMatC> {
    let root = wj.sqrt().map_err(|e| e.at_point("twisting scalar", x))?;
    let root_inv = root.recip().map_err(|e| e.at_point("twisting scalar", x))?;
    let ubar = algebra::vec_to_hermitian_jets(upsilon)
        .map(|v| v.scale(Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)));
    let mut m = JMatC::from_fn(4, 4, |_, _| Jet::zero(order));
    for k in 0..2 {
        m[(k, k)] = root.lift().truncated(order);
        m[(2 + k, 2 + k)] = root_inv.lift().truncated(order);
    }
    let ur = ubar.map(|v| (v * root_inv.lift()).scale(-I).truncated(order));
    m.set_block(0, 2, &ur);
    Ok(m)
}

/// Which dressing stage a composite bundle belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    K1Dressed,
    WeylDressed,
}

/// The undressed field content of a scenario.
#[derive(Clone)]
pub struct GeometryFields {
    pub varpi: CartanConnection,
    pub tractor: Tractor,
    pub twistor: Twistor,
}

/// A dressed stage: connection, curvature, tractor and twistor composites.
#[derive(Clone)]
pub struct DressedFields {
    pub stage: Stage,
    pub varpi: CartanConnection,
    pub curv: CartanCurvature,
    pub tractor: Tractor,
    pub twistor: Twistor,
}

/// Transform a connection by an arbitrary H-valued map (same formula as a
/// gauge transformation; dressing uses it with non-gauge maps).
pub fn transform_connection(
    varpi: &CartanConnection,
    map: &SmoothMap<f64>,
) -> CartanConnection {
    let form = varpi.form().clone();
    let g = map.clone();
    CartanConnection::from_form(MatrixForm::new(1, 6, 6, move |x, order| {
        let gj = &g.eval_jets(x, order + 1)?[0];
        let ginv = gj.inverse().map_err(|_| Error::degenerate("dressing map", x))?;
        let comps = form.eval_jets(x, order)?;
        (0..4)
            .map(|mu| {
                let mut dg = JMatF::zeros(6, 6);
                for i in 0..6 {
                    for j in 0..6 {
                        dg[(i, j)] = gj[(i, j)].derivative(mu)?;
                    }
                }
                let out = &(&(&ginv * &comps[mu]) * gj) + &(&ginv * &dg);
                Ok(out.map(|j| j.truncated(order)))
            })
            .collect()
    }))
}

/// phi -> m^-1 phi for a 6x6 map.
fn act_inverse_tractor(phi: &Tractor, map: &SmoothMap<f64>) -> Tractor {
    let pm = phi.map().clone();
    let g = map.clone();
    Tractor::new(SmoothMap::new(0, 6, 1, move |x, order| {
        let gj = g.eval_jets(x, order)?[0]
            .inverse()
            .map_err(|_| Error::degenerate("dressing map", x))?;
        Ok(vec![&gj * &pm.eval_jets(x, order)?[0]])
    }))
}

/// psi -> m^-1 psi for a 4x4 complex map.
fn act_inverse_twistor(psi: &Twistor, map: &SmoothMap<Complex64>) -> Twistor {
    let pm = psi.map().clone();
    let g = map.clone();
    Twistor::new(SmoothMap::new(0, 4, 1, move |x, order| {
        let gj = g.eval_jets(x, order)?[0]
            .inverse()
            .map_err(|_| Error::degenerate("dressing map", x))?;
        Ok(vec![&gj * &pm.eval_jets(x, order)?[0]])
    }))
}

/// First dressing: the conformal-boost-invariant composites.
pub fn dress_k1(
    varpi: &CartanConnection,
    phi: &Tractor,
    psi: &Twistor,
    u: &K1Dressing,
) -> DressedFields {
    let varpi1 = transform_connection(varpi, u.u1());
    let curv = curvature(&varpi1);
    DressedFields {
        stage: Stage::K1Dressed,
        varpi: varpi1,
        curv,
        tractor: act_inverse_tractor(phi, u.u1()),
        twistor: act_inverse_twistor(psi, u.u1_complex()),
    }
}

/// Extract the dressing from the connection and apply it.
pub fn dress_k1_auto(fields: &GeometryFields) -> (K1Dressing, DressedFields) {
    let u = extract_u1(&fields.varpi);
    let d = dress_k1(&fields.varpi, &fields.tractor, &fields.twistor, &u);
    (u, d)
}

/// The dilaton phi = 1/sigma of a tractor (errors where sigma vanishes).
pub fn extract_dilaton(phi1: &Tractor) -> SmoothMap<f64> {
    let sm = phi1.sigma();
    SmoothMap::new(0, 1, 1, move |x, order| {
        let s = sm.eval_jets(x, order)?[0][(0, 0)];
        if s.value().abs() < 1e-12 {
            return Err(Error::degenerate("tractor sigma component vanishes", x));
        }
        let r = s.recip().map_err(|e| e.at_point("dilaton", x))?;
        Ok(vec![JMatF::from_fn(1, 1, |_, _| r)])
    })
}

/// Second dressing: erase the Weyl factor with C(phi).
///
/// The last tractor component is pinned to the exact constant 1: it equals
/// sigma/sigma identically, so writing 1 only suppresses roundoff.
pub fn dress_weyl(d: &DressedFields, cphi: &TwistingMap) -> DressedFields {
    assert_eq!(d.stage, Stage::K1Dressed);
    let varpi = transform_connection(&d.varpi, cphi.map());
    let curv = curvature(&varpi);
    let tractor_raw = act_inverse_tractor(&d.tractor, cphi.map());
    let tm = tractor_raw.map().clone();
    let tractor = Tractor::new(SmoothMap::new(0, 6, 1, move |x, order| {
        let mut m = tm.eval_jets(x, order)?.remove(0);
        debug_assert!((m[(5, 0)].value() - 1.0).abs() < 1e-9);
        m[(5, 0)] = Jet::constant(1.0, order);
        Ok(vec![m])
    }));
    DressedFields {
        stage: Stage::WeylDressed,
        varpi,
        curv,
        tractor,
        twistor: act_inverse_twistor(&d.twistor, cphi.complex_map()),
    }
}

/// Build C(phi) from a K1-dressed stage and apply it.
pub fn dress_weyl_auto(d: &DressedFields) -> (TwistingMap, DressedFields) {
    let phi = extract_dilaton(&d.tractor);
    let cphi = twisting_map(phi, &d.varpi.tetrad(), TwistSource::Dilaton);
    let bs = dress_weyl(d, &cphi);
    (cphi, bs)
}

/// Apply a (possibly twisted) transformation to a whole stage: the
/// connection moves with the inhomogeneous law, curvature is recomputed,
/// tractor and twistor move in their representations.
pub fn transform_stage(
    d: &DressedFields,
    map6: &SmoothMap<f64>,
    map4: &SmoothMap<Complex64>,
) -> DressedFields {
    let varpi = transform_connection(&d.varpi, map6);
    let curv = curvature(&varpi);
    DressedFields {
        stage: d.stage,
        varpi,
        curv,
        tractor: act_inverse_tractor(&d.tractor, map6),
        twistor: act_inverse_twistor(&d.twistor, map4),
    }
}

/// Largest value difference between two stages over the given points,
/// across connection, curvature, tractor and twistor.
pub fn stage_max_diff(
    a: &DressedFields,
    b: &DressedFields,
    points: &[ChartPoint],
) -> Result<f64> {
    let mut worst = 0.0f64;
    for x in points {
        worst = worst.max(a.varpi.form().max_diff_at(b.varpi.form(), x)?);
        worst = worst.max(a.curv.form().max_diff_at(b.curv.form(), x)?);
        worst = worst.max(a.tractor.map().max_diff_at(b.tractor.map(), x)?);
        worst = worst.max(complex_max_diff(a.twistor.map(), b.twistor.map(), x)?);
    }
    Ok(worst)
}

fn complex_max_diff(
    a: &SmoothMap<Complex64>,
    b: &SmoothMap<Complex64>,
    x: &ChartPoint,
) -> Result<f64> {
    let av = a.eval(x)?;
    let bv = b.eval(x)?;
    Ok(av.iter().zip(bv.iter()).map(|(p, q)| p.max_diff(q)).fold(0.0, f64::max))
}

/// Residual-law stage/subgroup pairs with a defined transport law.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResidualLaw {
    /// K1-dressed fields under Lorentz: the standard gauge pattern.
    K1Lorentz,
    /// K1-dressed fields under Weyl: the twisted pattern through C(z).
    K1Weyl,
    /// Weyl-dressed fields under Lorentz: the standard pattern.
    WeylDressedLorentz,
}

/// Report of one residual-law verification.
#[derive(Clone, Debug)]
pub struct ResidualReport {
    pub law: ResidualLaw,
    pub max_residual: f64,
    pub points: usize,
}

/// Verify a residual transformation law: transport the undressed fields
/// through the gauge map and re-dress, against transporting the dressed
/// stage directly by the law's pattern.
pub fn verify_residual_law(
    fields: &GeometryFields,
    law: ResidualLaw,
    gauge: &GaugeMap,
    weyl_param: Option<&Expr>,
    points: &[ChartPoint],
) -> Result<ResidualReport> {
    use crate::cartan::GaugeKind;
    let expected_kind = match law {
        ResidualLaw::K1Lorentz | ResidualLaw::WeylDressedLorentz => GaugeKind::Lorentz,
        ResidualLaw::K1Weyl => GaugeKind::Weyl,
    };
    if gauge.kind() != expected_kind {
        return Err(Error::Group(format!(
            "residual law {law:?} requires a {expected_kind:?} gauge map"
        )));
    }

    let transported = GeometryFields {
        varpi: crate::cartan::gauge_transform(&fields.varpi, gauge),
        tractor: act_inverse_tractor(&fields.tractor, gauge.map()),
        twistor: act_inverse_twistor(&fields.twistor, gauge.complex_map()),
    };
    let (_, d1) = dress_k1_auto(fields);
    let (_, d1_t) = dress_k1_auto(&transported);

    let max_residual = match law {
        ResidualLaw::K1Lorentz => {
            let direct = transform_stage(&d1, gauge.map(), gauge.complex_map());
            stage_max_diff(&d1_t, &direct, points)?
        }
        ResidualLaw::K1Weyl => {
            let z = weyl_param
                .ok_or_else(|| Error::Group("Weyl law needs the scalar parameter".into()))?;
            let cz = twisting_map(
                SmoothMap::scalar_expr(z.clone()),
                &d1.varpi.tetrad(),
                TwistSource::WeylParam,
            );
            let direct = transform_stage(&d1, cz.map(), cz.complex_map());
            stage_max_diff(&d1_t, &direct, points)?
        }
        ResidualLaw::WeylDressedLorentz => {
            let (_, bs) = dress_weyl_auto(&d1);
            let (_, bs_t) = dress_weyl_auto(&d1_t);
            let direct = transform_stage(&bs, gauge.map(), gauge.complex_map());
            stage_max_diff(&bs_t, &direct, points)?
        }
    };
    Ok(ResidualReport { law, max_residual, points: points.len() })
}

/// The displayed block formula for the Weyl-dressed normal connection:
/// (a, A, P, theta) with a = 0, theta = phi theta1,
/// A = A1 + theta Upsilon - Upsilon^t theta^t and
/// P = phi^-1 (P1 + dUpsilon - Upsilon A1 - (Upsilon theta) Upsilon
///             + Upsilon^2 theta^t / 2).
pub fn explicit_weyl_blocks(
    normal: &CartanConnection,
    cphi: &TwistingMap,
) -> [MatrixForm<f64>; 4] {
    let eta = algebra::eta();
    let form = normal.form().clone();
    let w = cphi.w().clone();
    let ups = cphi.upsilon().clone();

    let a_block = MatrixForm::zero(1, 1, 1);

    let form_a = form.clone();
    let ups_a = ups.clone();
    let eta_a = eta.clone();
    let big_a = MatrixForm::new(1, 4, 4, move |x, order| {
        let comps = form_a.eval_jets(x, order)?;
        let uj = &ups_a.eval_jets(x, order)?[0];
        (0..4)
            .map(|mu| {
                let a1 = comps[mu].block(1, 1, 4, 4);
                let theta = comps[mu].block(1, 0, 4, 1);
                // theta Upsilon: column x row.
                let tu = &theta * uj;
                // Upsilon^t theta^t: (eta U^T)(theta^T eta).
                let ut = JMatF::from_fn(4, 1, |a, _| uj[(0, a)].scale(eta_a[(a, a)]));
                let tt = JMatF::from_fn(1, 4, |_, b| theta[(b, 0)].scale(eta_a[(b, b)]));
                let utt = &ut * &tt;
                Ok(&(&a1 + &tu) - &utt)
            })
            .collect()
    });

    let form_p = form.clone();
    let p_block = MatrixForm::new(1, 1, 4, move |x, order| {
        let comps = form_p.eval_jets(x, order)?;
        let uj = ups.eval_jets(x, order + 1)?.remove(0);
        let wj = w.eval_jets(x, order)?[0][(0, 0)];
        let winv = wj.recip().map_err(|e| e.at_point("dilaton", x))?;
        let mut ups_sq = Jet::zero(order + 1);
        for a in 0..4 {
            ups_sq = ups_sq + uj[(0, a)] * uj[(0, a)].scale(eta[(a, a)]);
        }
        (0..4)
            .map(|mu| {
                let p1 = comps[mu].block(0, 1, 1, 4);
                let a1 = comps[mu].block(1, 1, 4, 4);
                let theta = comps[mu].block(1, 0, 4, 1);
                let d_ups = JMatF::from_fn(1, 4, |_, a| {
                    uj[(0, a)].derivative(mu).expect("upsilon carries order+1")
                });
                let ua = &uj.map(|j| j.truncated(order)) * &a1;
                // (Upsilon theta) Upsilon
                let mut utheta = Jet::zero(order);
                for a in 0..4 {
                    utheta = utheta + uj[(0, a)] * theta[(a, 0)];
                }
                let utu = uj.map(|j| (j * utheta).truncated(order));
                // Upsilon^2 theta^t / 2
                let ttu = JMatF::from_fn(1, 4, |_, b| {
                    (theta[(b, 0)].scale(eta[(b, b)]) * ups_sq).scale(0.5).truncated(order)
                });
                let sum = &(&(&(&p1 + &d_ups) - &ua) - &utu) + &ttu;
                Ok(sum.map(|j| (j * winv).truncated(order)))
            })
            .collect()
    });

    let theta_block = {
        let w = cphi.w().clone();
        MatrixForm::new(1, 4, 1, move |x, order| {
            let comps = form.eval_jets(x, order)?;
            let wj = w.eval_jets(x, order)?[0][(0, 0)];
            (0..4)
                .map(|mu| {
                    let theta = comps[mu].block(1, 0, 4, 1);
                    Ok(theta.map(|j| (j * wj).truncated(order)))
                })
                .collect()
        })
    };

    [a_block, big_a, p_block, theta_block]
}

/// Metric comparison for the erasure claim: the metric induced by the
/// dressed connection against phi^2 times the stage metric.
pub fn invariant_metric_residual(
    d1: &DressedFields,
    bs: &DressedFields,
    cphi: &TwistingMap,
    points: &[ChartPoint],
) -> Result<f64> {
    let g1 = d1.varpi.induced_metric();
    let gbs = bs.varpi.induced_metric();
    let w = cphi.w().clone();
    let phi_sq = SmoothMap::new(0, 1, 1, move |x, order| {
        let wj = w.eval_jets(x, order)?[0][(0, 0)];
        Ok(vec![JMatF::from_fn(1, 1, |_, _| wj * wj)])
    });
    let scaled = Metric::new(g1.map().scale_map(&phi_sq));
    let mut worst = 0.0f64;
    for x in points {
        worst = worst.max(gbs.map().max_diff_at(scaled.map(), x)?);
    }
    Ok(worst)
}
