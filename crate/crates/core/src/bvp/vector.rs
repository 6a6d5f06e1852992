//! Systems of boundary conditions for models with several unknowns on one
//! axis. Each curve contributes one condition coupling all of them; the
//! single unknown of the other axis is eliminated by pairing `t` and `α(t)`.
//! Only assembly is provided.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::curve::BoundaryCurve;
use crate::error::{Error, Result};
use crate::kernel::BiPoly;
use crate::model::{FunctionalEquation, HomogeneityClass};

use super::boundary::{oriented, ClearedEval};

/// One condition `Σ_ℓ A_ℓ(t)u_ℓ(t) − A_ℓ(α)u_ℓ(α) = Σ_s g_s(t) π_s`.
#[derive(Debug, Clone, Serialize)]
pub struct VectorCondition {
    pub curve_index: usize,
    /// Sample parameter `s = θ/2π`.
    pub s: Vec<f64>,
    pub t: Vec<C64>,
    pub alpha: Vec<C64>,
    /// `A_ℓ(t)`, one row per unknown.
    pub a_t: Vec<Vec<C64>>,
    pub a_alpha: Vec<Vec<C64>>,
    /// `g_s(t)`, one row per scalar.
    pub g: Vec<Vec<C64>>,
}

/// Machine-readable description of a vector boundary value problem.
#[derive(Debug, Clone, Serialize)]
pub struct VectorSystem {
    pub unknowns: Vec<HomogeneityClass>,
    pub eliminated_unknown: HomogeneityClass,
    pub scalars: Vec<(usize, usize)>,
    pub conditions: Vec<VectorCondition>,
}

impl VectorSystem {
    pub fn size(&self) -> usize {
        self.unknowns.len()
    }
}

pub fn assemble_vector_bvp(fe: &FunctionalEquation, curves: &[&BoundaryCurve]) -> Result<VectorSystem> {
    let first = curves
        .first()
        .ok_or_else(|| Error::Domain("no curves given for the vector problem".into()))?;
    let plane = first.cut.plane();
    if curves.iter().any(|c| c.cut.plane() != plane) {
        return Err(Error::Domain("all curves must lie over cuts of the same plane".into()));
    }
    let fe = oriented(fe, first);
    let unknowns: Vec<&crate::model::ClassTerm> = fe.horizontal.iter().collect();
    if fe.vertical.len() != 1 {
        return Err(Error::Unsupported(format!(
            "pairing eliminates one unknown, but {} unknowns live on the cut axis",
            fe.vertical.len()
        )));
    }
    if curves.len() < unknowns.len() {
        return Err(Error::Domain(format!(
            "vector problem of size {} needs {} curves, got {}",
            unknowns.len(),
            unknowns.len(),
            curves.len()
        )));
    }
    let g2 = &fe.vertical[0].generator;
    let mut iso: Vec<_> = fe.isolated.iter().collect();
    iso.sort_by_key(|t| t.anchor);
    let mut polys: Vec<&BiPoly> = unknowns.iter().map(|t| &t.generator).collect();
    polys.push(g2);
    polys.extend(iso.iter().map(|t| &t.generator));
    let degree = polys.iter().map(|g| g.x_degree()).max().unwrap_or(0);

    let mut conditions = Vec::new();
    for (ci, curve) in curves.iter().enumerate() {
        let ev = ClearedEval {
            chart: curve.chart,
            degree,
            polys: polys.clone(),
        };
        let n = curve.len();
        let mut cond = VectorCondition {
            curve_index: ci,
            s: (0..n).map(|k| k as f64 / n as f64).collect(),
            t: (0..n).map(|k| curve.t(k)).collect(),
            alpha: (0..n).map(|k| curve.t(curve.partner_index(k))).collect(),
            a_t: vec![Vec::with_capacity(n); unknowns.len()],
            a_alpha: vec![Vec::with_capacity(n); unknowns.len()],
            g: vec![Vec::with_capacity(n); iso.len()],
        };
        for k in 0..n {
            let l = curve.l[k];
            let (zt, za) = (curve.z[k], curve.z[curve.partner_index(k)]);
            let e2t = ev.eval(g2, zt, l);
            let e2a = ev.eval(g2, za, l);
            for (j, u) in unknowns.iter().enumerate() {
                cond.a_t[j].push(ev.eval(&u.generator, zt, l) / e2t);
                cond.a_alpha[j].push(ev.eval(&u.generator, za, l) / e2a);
            }
            for (s, t) in iso.iter().enumerate() {
                cond.g[s].push(ev.eval(&t.generator, za, l) / e2a - ev.eval(&t.generator, zt, l) / e2t);
            }
        }
        conditions.push(cond);
    }
    Ok(VectorSystem {
        unknowns: unknowns.iter().map(|t| t.class).collect(),
        eliminated_unknown: fe.vertical[0].class,
        scalars: iso.iter().map(|t| t.anchor).collect(),
        conditions,
    })
}

/// Substitution check of every condition against the functional equation
/// with arbitrary values of the unknowns; returns the maximal relative
/// discrepancy over all samples.
pub fn vector_identity_residual(
    fe: &FunctionalEquation,
    curves: &[&BoundaryCurve],
    sys: &VectorSystem,
) -> f64 {
    let Some(first) = curves.first() else {
        return 0.0;
    };
    let fe = oriented(fe, first);
    let g2 = &fe.vertical[0].generator;
    let mut iso: Vec<_> = fe.isolated.iter().collect();
    iso.sort_by_key(|t| t.anchor);
    let mut worst: f64 = 0.0;
    for (cond, curve) in sys.conditions.iter().zip(curves) {
        for k in 0..curve.len() {
            let (xt, xa, l) = (cond.t[k], cond.alpha[k], curve.l[k]);
            if !xt.is_finite() || !xa.is_finite() {
                continue;
            }
            let ut: Vec<C64> = (0..fe.horizontal.len())
                .map(|j| C64::new(0.2 + 0.1 * j as f64, -0.4 + 0.03 * k as f64))
                .collect();
            let ua: Vec<C64> = (0..fe.horizontal.len())
                .map(|j| C64::new(-0.5 + 0.01 * k as f64, 0.3 * j as f64 + 0.1))
                .collect();
            let v = C64::new(0.7, -0.2);
            let sc: Vec<f64> = (0..iso.len()).map(|s| 1.0 - 0.2 * s as f64).collect();
            let fe_at = |x: C64, u: &[C64]| {
                let mut s = g2.eval(x, l) * v;
                for (t, &uj) in fe.horizontal.iter().zip(u) {
                    s += t.generator.eval(x, l) * uj;
                }
                for (t, &c) in iso.iter().zip(&sc) {
                    s += t.generator.eval(x, l) * c;
                }
                s
            };
            let direct = fe_at(xt, &ut) / g2.eval(xt, l) - fe_at(xa, &ua) / g2.eval(xa, l);
            let mut lhs = C64::new(0.0, 0.0);
            let mut scale = 1.0;
            for j in 0..ut.len() {
                lhs += cond.a_t[j][k] * ut[j] - cond.a_alpha[j][k] * ua[j];
                scale += (cond.a_t[j][k] * ut[j]).norm() + (cond.a_alpha[j][k] * ua[j]).norm();
            }
            let rhs: C64 = (0..sc.len()).map(|s| cond.g[s][k] * sc[s]).sum();
            scale += rhs.norm();
            worst = worst.max((direct - (lhs - rhs)).norm() / scale);
        }
    }
    worst
}
