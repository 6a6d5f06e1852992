//! Numerical conformal maps from the interior of a closed analytic curve onto
//! the unit disk.
//!
//! The primary method represents `log(w(z)/(z − a))` by a double-layer
//! potential, which leads to a well-conditioned second-kind integral equation
//! discretized by the trapezoid rule. The Kerzman–Stein equation for the
//! Szegő kernel is an independent second method used for cross-checks.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::curve::{centroid, BoundaryCurve, Chart};
use crate::error::{Error, Result, Stage};
use crate::fourier::{derivatives, hilbert};
use crate::linalg::{solve_complex, solve_real};

const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConformalMethod {
    DoubleLayer,
    KerzmanStein,
}

/// Conformal map of the region bounded by a curve onto the unit disk,
/// normalized by `w(a) = 0`, `w'(a) > 0`.
#[derive(Debug, Clone)]
pub struct ConformalGluing {
    pub chart: Chart,
    /// Boundary samples in chart coordinates (counter-clockwise).
    pub z: Vec<C64>,
    /// `dz/dθ` at the samples.
    pub dz: Vec<C64>,
    /// Boundary values of the map.
    pub w: Vec<C64>,
    /// Normalization point in chart coordinates.
    pub centre: C64,
    pub method: ConformalMethod,
    /// Max of the boundary-modulus defect and the discrete analyticity defect.
    pub accuracy: f64,
}

impl ConformalGluing {
    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    /// `dw/dz` at the boundary samples.
    pub fn w_prime(&self) -> Vec<C64> {
        let (dw, _) = derivatives(&self.w);
        dw.iter().zip(&self.dz).map(|(a, b)| a / b).collect()
    }

    /// Winding number of the boundary values around 0.
    pub fn winding(&self) -> i64 {
        let n = self.w.len();
        let total: f64 = (0..n).map(|k| (self.w[(k + 1) % n] / self.w[k]).arg()).sum();
        (total / (2.0 * PI)).round() as i64
    }

    pub fn modulus_defect(&self) -> f64 {
        self.w.iter().map(|w| (w.norm() - 1.0).abs()).fold(0.0, f64::max)
    }

    /// `w` at a chart point strictly inside the curve, by the barycentric
    /// form of the Cauchy integral.
    pub fn eval_chart(&self, q: C64) -> Result<C64> {
        let n = self.len() as f64;
        let scale = self.z.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let mut num = C64::new(0.0, 0.0);
        let mut den = C64::new(0.0, 0.0);
        let mut closest = f64::INFINITY;
        for ((&z, &dz), &w) in self.z.iter().zip(&self.dz).zip(&self.w) {
            let d = z - q;
            closest = closest.min(d.norm());
            let k = dz / d;
            num += k * w;
            den += k;
        }
        if closest < 1e-12 * scale {
            return Err(Error::Domain(
                "on-contour evaluation requires principal value — use limit from inside".into(),
            ));
        }
        if (den / (I * n) - 1.0).norm() > 0.5 {
            return Err(Error::Domain(format!(
                "point {q} lies outside the region bounded by the curve"
            )));
        }
        Ok(num / den)
    }

    /// `w` at a point of the curve's own variable.
    pub fn eval(&self, t: C64) -> Result<C64> {
        self.eval_chart(self.chart.to_chart(t))
    }

    /// `w` at many points (equivalent to repeated [`Self::eval`]).
    pub fn eval_many(&self, ts: &[C64]) -> Result<Vec<C64>> {
        ts.iter().map(|&t| self.eval(t)).collect()
    }
}

/// Conformal map of the interior of a traced curve, normalized at the area
/// centroid of its chart polygon.
pub fn conformal_gluing(c: &BoundaryCurve) -> Result<ConformalGluing> {
    if c.self_intersecting {
        return Err(Error::numerical(
            Stage::Conformal,
            "curve is not a Jordan curve (self-intersection)",
        ));
    }
    let a = centroid(&c.z);
    conformal_map(c.z.clone(), c.chart, a, ConformalMethod::DoubleLayer)
}

/// Conformal map of the interior of the closed curve sampled by `z` at
/// uniform parameter values.
pub fn conformal_map(
    z: Vec<C64>,
    chart: Chart,
    a: C64,
    method: ConformalMethod,
) -> Result<ConformalGluing> {
    let n = z.len();
    if n < 8 {
        return Err(Error::Domain("at least 8 boundary samples are required".into()));
    }
    let (dz, ddz) = derivatives(&z);
    let w = match method {
        ConformalMethod::DoubleLayer => double_layer(&z, &dz, &ddz, a)?,
        ConformalMethod::KerzmanStein => kerzman_stein(&z, &dz, a)?,
    };
    let mut g = ConformalGluing {
        chart,
        z,
        dz,
        w,
        centre: a,
        method,
        accuracy: 0.0,
    };
    if g.winding() != 1 {
        return Err(Error::numerical(
            Stage::Conformal,
            format!("boundary map has winding number {} instead of 1", g.winding()),
        ));
    }
    g.accuracy = g.modulus_defect().max(analyticity_defect(&g));
    Ok(g)
}

fn double_layer(z: &[C64], dz: &[C64], ddz: &[C64], a: C64) -> Result<Vec<C64>> {
    let n = z.len();
    let nf = n as f64;
    let mut kim = vec![0.0; n * n];
    let mut sre = vec![0.0; n * n];
    for k in 0..n {
        for m in 0..n {
            let idx = k * n + m;
            if k == m {
                let d = ddz[k] / (2.0 * dz[k]);
                kim[idx] = d.im;
                sre[idx] = d.re;
            } else {
                let q = dz[m] / (z[m] - z[k]);
                let dth = 2.0 * PI * (m as f64 - k as f64) / nf;
                kim[idx] = q.im;
                sre[idx] = q.re - 0.5 / (dth / 2.0).tan();
            }
        }
    }
    let h: Vec<f64> = z.iter().map(|&zk| -(zk - a).norm().ln()).collect();
    let mut sys = vec![0.0; n * n];
    for k in 0..n {
        for m in 0..n {
            sys[k * n + m] = kim[k * n + m] / nf + if k == m { 0.5 } else { 0.0 };
        }
    }
    let mu = solve_real(n, &sys, &h, Stage::Conformal)?;
    let muc: Vec<C64> = mu.iter().map(|&v| C64::new(v, 0.0)).collect();
    let hm = hilbert(&muc);
    let fa: C64 = (0..n).map(|m| mu[m] * dz[m] / (z[m] - a)).sum::<C64>() / nf / I;
    let w = (0..n)
        .map(|k| {
            let s: f64 = (0..n).map(|m| sre[k * n + m] * mu[m]).sum();
            let im_f = 0.5 * hm[k].re - s / nf;
            (z[k] - a) * (C64::new(h[k], im_f) - I * fa.im).exp()
        })
        .collect();
    Ok(w)
}

fn kerzman_stein(z: &[C64], dz: &[C64], a: C64) -> Result<Vec<C64>> {
    let n = z.len();
    let nf = n as f64;
    let tang: Vec<C64> = dz.iter().map(|d| d / d.norm()).collect();
    let ds: Vec<f64> = dz.iter().map(|d| d.norm() * 2.0 * PI / nf).collect();
    let c = 1.0 / (2.0 * PI * I);
    let hk = |k: usize, m: usize| c * tang[m] / (z[m] - z[k]);
    let mut sys = vec![C64::new(0.0, 0.0); n * n];
    for k in 0..n {
        for m in 0..n {
            let v = if k == m {
                C64::new(1.0, 0.0)
            } else {
                (hk(m, k).conj() - hk(k, m)) * ds[m]
            };
            sys[k * n + m] = v;
        }
    }
    let rhs: Vec<C64> = (0..n).map(|k| (c * tang[k] / (z[k] - a)).conj()).collect();
    let s = solve_complex(n, &sys, &rhs, Stage::Conformal)?;
    Ok((0..n).map(|k| -I * tang[k] * s[k] / s[k].conj()).collect())
}

/// Discrete Plemelj test: boundary values of an analytic function are
/// reproduced by their own interior Cauchy limit.
fn analyticity_defect(g: &ConformalGluing) -> f64 {
    let n = g.len();
    let (dw, _) = derivatives(&g.w);
    let mut worst: f64 = 0.0;
    for k in 0..n {
        let mut s = dw[k];
        for m in 0..n {
            if m != k {
                s += (g.w[m] - g.w[k]) * g.dz[m] / (g.z[m] - g.z[k]);
            }
        }
        worst = worst.max((s / n as f64).norm());
    }
    worst
}

/// Maximal difference of two maps sampled on the same boundary.
pub fn max_difference(a: &ConformalGluing, b: &ConformalGluing) -> f64 {
    a.w.iter()
        .zip(&b.w)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
