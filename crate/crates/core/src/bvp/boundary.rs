//! Boundary conditions obtained by pairing the functional equation at the two
//! kernel points `(t, l)` and `(α(t), l)` over the same cut parameter.
//!
//! With `G₁`, `G₂` the generators multiplying the x- and y-axis unknowns and
//! `G_s` those of the isolated scalars, eliminating `v(l)` gives
//!
//! `A(t)u(t) − A(α)u(α) = Σ_s g_s(t) π_s`,  `A = G₁/G₂`,
//! `g_s(t) = G_s(α)/G₂(α) − G_s(t)/G₂(t)`.
//!
//! The solver uses the cleared form `B u(t) − B̃ u(α) = Σ h_s π_s` with
//! `B = G₁(t)G₂(α)` and `h_s = G_s(α)G₂(t) − G_s(t)G₂(α)`; in an inverted
//! chart every generator is multiplied by `z^d`, which cancels in both forms.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::curve::{BoundaryCurve, Chart, CurvePoint};
use crate::error::{Error, Result, Stage};
use crate::kernel::{BiPoly, Plane};
use crate::model::{FunctionalEquation, HomogeneityClass};

use super::rh::winding_number;

/// Orients the equation so that the curve lives in the x-variable.
pub(crate) fn oriented(fe: &FunctionalEquation, curve: &BoundaryCurve) -> FunctionalEquation {
    match curve.cut.plane() {
        Plane::Y => fe.clone(),
        Plane::X => fe.transposed(),
    }
}

/// Generators evaluated in a chart, each multiplied by `z^d`.
pub(crate) struct ClearedEval<'a> {
    pub chart: Chart,
    pub degree: usize,
    pub polys: Vec<&'a BiPoly>,
}

impl ClearedEval<'_> {
    pub fn eval(&self, g: &BiPoly, z: C64, l: C64) -> C64 {
        let f = g.fiber_at_y(l);
        match self.chart {
            Chart::Affine => f.eval(z),
            Chart::Inverted { centre } => {
                let lin = C64::new(centre, 0.0) * z + 1.0;
                let mut acc = C64::new(0.0, 0.0);
                for i in 0..=self.degree {
                    acc += f.coeff(i) * lin.powu(i as u32) * z.powu((self.degree - i) as u32);
                }
                acc
            }
        }
    }

    pub fn scale(&self, z: C64, l: C64) -> f64 {
        self.polys
            .iter()
            .map(|g| {
                let f = g.fiber_at_y(l);
                match self.chart {
                    Chart::Affine => f.abs_eval(z),
                    Chart::Inverted { centre } => {
                        let lin = (C64::new(centre, 0.0) * z + 1.0).norm();
                        (0..=self.degree)
                            .map(|i| {
                                f.coeff(i).norm()
                                    * lin.powi(i as i32)
                                    * z.norm().powi((self.degree - i) as i32)
                            })
                            .sum()
                    }
                }
            })
            .fold(0.0, f64::max)
    }
}

/// Boundary condition on one curve, sampled at a set of curve points.
#[derive(Debug, Clone, Serialize)]
pub struct BoundaryCondition {
    #[serde(skip)]
    pub curve: BoundaryCurve,
    /// Unknown kept by the condition (x-axis strip in the oriented equation).
    pub unknown: HomogeneityClass,
    /// Unknown removed by pairing.
    pub eliminated_unknown: HomogeneityClass,
    /// Anchors of the isolated scalars, `(0,0)` first.
    pub scalars: Vec<(usize, usize)>,
    #[serde(skip)]
    pub points: Vec<CurvePoint>,
    /// `A(t)` and `A(α(t))`.
    pub a_t: Vec<C64>,
    pub a_alpha: Vec<C64>,
    /// `g_s(t)`, one row per scalar.
    pub g: Vec<Vec<C64>>,
    /// Cleared coefficient `B(t)`.
    pub b: Vec<C64>,
    /// Cleared right-hand sides `h_s(t)`.
    pub h: Vec<Vec<C64>>,
    /// Winding number of `A(α)/A(t)` along the curve.
    pub index: i64,
    /// `min |A| / scale` over the samples.
    pub min_relative_a: f64,
    /// Location where `A` vanishes or has a pole, if any.
    pub singular_at: Option<C64>,
    /// Set when the condition is one elimination step of a vector problem.
    pub part_of_system: bool,
}

impl BoundaryCondition {
    /// Builds the condition at explicit curve points.
    pub fn at_points(
        fe: &FunctionalEquation,
        curve: &BoundaryCurve,
        points: Vec<CurvePoint>,
    ) -> Result<BoundaryCondition> {
        let fe = oriented(fe, curve);
        let (g1, ukn) = fe
            .horizontal
            .first()
            .map(|t| (&t.generator, t.class))
            .ok_or_else(|| Error::Unsupported("model has no x-axis unknown".into()))?;
        let (g2, elim) = fe
            .vertical
            .first()
            .map(|t| (&t.generator, t.class))
            .ok_or_else(|| Error::Unsupported("model has no y-axis unknown".into()))?;
        let mut iso: Vec<(&BiPoly, (usize, usize))> = fe
            .isolated
            .iter()
            .map(|t| (&t.generator, t.anchor))
            .collect();
        iso.sort_by_key(|(_, a)| *a);
        let mut polys = vec![g1, g2];
        polys.extend(iso.iter().map(|(g, _)| *g));
        let degree = polys.iter().map(|g| g.x_degree()).max().unwrap_or(0);
        let ev = ClearedEval {
            chart: curve.chart,
            degree,
            polys,
        };
        let n = points.len();
        let mut a_t = Vec::with_capacity(n);
        let mut a_alpha = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        let mut g = vec![Vec::with_capacity(n); iso.len()];
        let mut h = vec![Vec::with_capacity(n); iso.len()];
        let mut ratio = Vec::with_capacity(n);
        let mut min_rel = f64::INFINITY;
        for p in &points {
            let e1t = ev.eval(g1, p.t, p.l);
            let e1a = ev.eval(g1, p.alpha, p.l);
            let e2t = ev.eval(g2, p.t, p.l);
            let e2a = ev.eval(g2, p.alpha, p.l);
            let st = ev.scale(p.t, p.l).max(1e-300);
            let sa = ev.scale(p.alpha, p.l).max(1e-300);
            let rel = (e1t.norm() / st)
                .min(e2t.norm() / st)
                .min(e1a.norm() / sa)
                .min(e2a.norm() / sa);
            min_rel = min_rel.min(rel);
            a_t.push(e1t / e2t);
            a_alpha.push(e1a / e2a);
            b.push(e1t * e2a);
            ratio.push(e1a * e2t / (e1t * e2a));
            for (s, (gs, _)) in iso.iter().enumerate() {
                let est = ev.eval(gs, p.t, p.l);
                let esa = ev.eval(gs, p.alpha, p.l);
                g[s].push(esa / e2a - est / e2t);
                h[s].push(esa * e2t - est * e2a);
            }
        }
        let singular_at = (min_rel < 1e-10).then(|| {
            let k = (0..n)
                .min_by(|&i, &j| {
                    let ri = a_t[i].norm().min(1.0 / a_t[i].norm());
                    let rj = a_t[j].norm().min(1.0 / a_t[j].norm());
                    ri.total_cmp(&rj)
                })
                .unwrap_or(0);
            curve.chart.from_chart(points[k].t)
        });
        Ok(BoundaryCondition {
            curve: curve.clone(),
            unknown: ukn,
            eliminated_unknown: elim,
            scalars: iso.iter().map(|(_, a)| *a).collect(),
            points,
            a_t,
            a_alpha,
            g,
            b,
            h,
            index: winding_number(&ratio),
            min_relative_a: min_rel,
            singular_at,
            part_of_system: fe.bounds.i_minus > 1 || fe.bounds.j_minus > 1,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Fails on a singular coefficient.
    pub fn ensure_regular(self) -> Result<Self> {
        match self.singular_at {
            Some(at) => Err(Error::numerical(
                Stage::BoundaryCondition,
                format!("singular coefficient: A vanishes or has a pole on the curve near {at}"),
            )),
            None => Ok(self),
        }
    }

    /// Index of the scalar `π_(0,0)`.
    pub fn origin_scalar(&self) -> usize {
        self.scalars.iter().position(|&a| a == (0, 0)).unwrap_or(0)
    }

    /// Max of `|g(t) + g(α(t))|` over samples whose partner is also sampled;
    /// the right side is antisymmetric under the swap.
    pub fn antisymmetry_defect(&self) -> f64 {
        let n = self.points.len();
        if n != self.curve.len() {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for s in 0..self.g.len() {
            for k in 0..n {
                let j = self.curve.partner_index(k);
                let scale = self.g[s][k].norm().max(1.0);
                worst = worst.max((self.g[s][k] + self.g[s][j]).norm() / scale);
            }
        }
        worst
    }

    /// Residual of the condition for given values of the unknown at the
    /// points and their partners.
    pub fn residual(&self, u_t: &[C64], u_alpha: &[C64], scalars: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..self.len() {
            let lhs = self.a_t[k] * u_t[k] - self.a_alpha[k] * u_alpha[k];
            let rhs: C64 = (0..self.g.len()).map(|s| self.g[s][k] * scalars[s]).sum();
            worst = worst.max((lhs - rhs).norm());
        }
        worst
    }

    /// Residual of the condition for the unknown given by its Taylor
    /// coefficients, using only samples where `|t|` and `|α(t)|` stay below
    /// `radius`. Returns the worst residual and the number of samples used.
    pub fn series_residual(&self, coeffs: &[f64], scalars: &[f64], radius: f64) -> (f64, usize) {
        let u = |x: C64| coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * x + c);
        let chart = self.curve.chart;
        let mut worst: f64 = 0.0;
        let mut used = 0;
        for k in 0..self.len() {
            let t = chart.from_chart(self.points[k].t);
            let a = chart.from_chart(self.points[k].alpha);
            if !(t.norm() < radius && a.norm() < radius) {
                continue;
            }
            used += 1;
            let rhs: C64 = (0..self.g.len()).map(|s| self.g[s][k] * scalars[s]).sum();
            worst = worst.max((self.a_t[k] * u(t) - self.a_alpha[k] * u(a) - rhs).norm());
        }
        (worst, used)
    }
}

/// Condition on the samples of a traced curve; a singular coefficient is an error.
pub fn derive_boundary_condition(
    fe: &FunctionalEquation,
    curve: &BoundaryCurve,
) -> Result<BoundaryCondition> {
    derive_unchecked(fe, curve)?.ensure_regular()
}

/// Like [`derive_boundary_condition`] but only flags a singular coefficient.
pub fn derive_unchecked(fe: &FunctionalEquation, curve: &BoundaryCurve) -> Result<BoundaryCondition> {
    let n = curve.len();
    let points = (0..n)
        .map(|k| CurvePoint {
            theta: 2.0 * std::f64::consts::PI * k as f64 / n as f64,
            l: curve.l[k],
            t: curve.z[k],
            alpha: curve.z[curve.partner_index(k)],
        })
        .collect();
    BoundaryCondition::at_points(fe, curve, points)
}

/// Checks the defining identity of the condition by direct substitution:
/// for arbitrary values of the unknowns, the condition's left minus right
/// side equals the difference of the two functional-equation instances
/// divided by `G₂`. Returns the maximal relative discrepancy.
pub fn identity_residual(fe: &FunctionalEquation, bc: &BoundaryCondition) -> f64 {
    let fe = oriented(fe, &bc.curve);
    let g1 = &fe.horizontal[0].generator;
    let g2 = &fe.vertical[0].generator;
    let mut iso: Vec<_> = fe.isolated.iter().collect();
    iso.sort_by_key(|t| t.anchor);
    let chart = bc.curve.chart;
    let mut worst: f64 = 0.0;
    for (k, p) in bc.points.iter().enumerate() {
        let x_t = chart.from_chart(p.t);
        let x_a = chart.from_chart(p.alpha);
        if !x_t.is_finite() || !x_a.is_finite() {
            continue;
        }
        // Arbitrary test values; the identity holds for any of them.
        let ut = C64::new(0.3 + 0.01 * k as f64, -0.7);
        let ua = C64::new(-1.1, 0.2 + 0.02 * k as f64);
        let v = C64::new(0.45, 0.9);
        let sc: Vec<f64> = (0..iso.len()).map(|s| 0.6 - 0.1 * s as f64).collect();
        let fe_at = |x: C64, u: C64| {
            let mut s = g1.eval(x, p.l) * u + g2.eval(x, p.l) * v;
            for (t, &c) in iso.iter().zip(&sc) {
                s += t.generator.eval(x, p.l) * c;
            }
            s
        };
        let direct = fe_at(x_t, ut) / g2.eval(x_t, p.l) - fe_at(x_a, ua) / g2.eval(x_a, p.l);
        let rhs: C64 = (0..iso.len()).map(|s| bc.g[s][k] * sc[s]).sum();
        let cond = bc.a_t[k] * ut - bc.a_alpha[k] * ua - rhs;
        let scale = (bc.a_t[k] * ut).norm() + (bc.a_alpha[k] * ua).norm() + rhs.norm() + 1.0;
        worst = worst.max((direct - cond).norm() / scale);
    }
    worst
}
