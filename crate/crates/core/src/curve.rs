//! Kernel fibers, boundary curves traced over cuts, and the involution α
//! exchanging the two roots above each cut parameter.
//!
//! A curve over a cut `[l₁, l₂]` is sampled at angles `θ_k = 2πk/n` with cut
//! parameter `l(θ) = l₁ + (l₂ − l₁)(1 − cos θ)/2`. The tracked root `t(θ)` runs
//! over both roots of the colliding pair, and `α(t(θ)) = t(−θ)`.
//!
//! When the leading coefficient of the fiber vanishes on the cut the curve
//! passes through infinity. It is then traced in the chart `z = 1/(t − c)`
//! with a real centre `c` chosen outside the region bounded by the curve.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::branch::{
    classify_branch_points, find_branch_points, pair_cuts, BranchPoint, BranchSet, CutKind,
    CutSegment,
};
use crate::config::Tolerances;
use crate::error::{Error, Result, Stage};
use crate::kernel::{sort_complex, BiPoly, Plane, Poly};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// All roots of the kernel over one value of one variable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiberSolution {
    pub base: C64,
    /// Plane of `base`; the roots live in the other variable.
    pub plane: Plane,
    pub roots: Vec<C64>,
    /// Roots lost to infinity (degree drop of the fiber).
    pub at_infinity: usize,
    /// Two roots coincide within the merge radius.
    pub degenerate: bool,
}

pub fn solve_fiber(p: &BiPoly, plane: Plane, value: C64, tol: &Tolerances) -> Result<FiberSolution> {
    let poly = p.fiber(plane, value);
    if poly.is_zero() {
        return Err(Error::numerical(
            Stage::Curve,
            format!("fiber over {} = {value} vanishes identically", plane.name()),
        ));
    }
    let nominal = p.degree(plane.other());
    let (poly, at_infinity) = effective(&poly, nominal);
    let roots = poly.roots();
    for r in &roots {
        let res = poly.eval(*r).norm() / poly.abs_eval(*r).max(1e-300);
        if res > tol.fiber_residual {
            return Err(Error::numerical(
                Stage::Curve,
                format!("fiber root {r} has relative residual {res:.2e}"),
            ));
        }
    }
    let degenerate = (0..roots.len()).any(|i| {
        (i + 1..roots.len()).any(|j| {
            (roots[i] - roots[j]).norm() < tol.root_merge * roots[i].norm().max(1.0)
        })
    });
    Ok(FiberSolution {
        base: value,
        plane,
        roots,
        at_infinity,
        degenerate,
    })
}

/// Drops leading coefficients that are negligible against the rest.
fn effective(poly: &Poly, nominal: usize) -> (Poly, usize) {
    let scale = poly.max_abs();
    let mut c = poly.coeffs().to_vec();
    while c.len() > 1 && c.last().unwrap().norm() < 1e-12 * scale {
        c.pop();
    }
    let deg = c.len() - 1;
    (Poly::new(c), nominal.saturating_sub(deg))
}

/// Coordinate in which a curve is traced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Chart {
    Affine,
    /// `z = 1/(t − centre)`.
    Inverted { centre: f64 },
}

impl Chart {
    pub fn to_chart(&self, t: C64) -> C64 {
        match *self {
            Chart::Affine => t,
            Chart::Inverted { centre } => ONE / (t - centre),
        }
    }

    /// Inverse map; `z = 0` maps to an infinite value.
    pub fn from_chart(&self, z: C64) -> C64 {
        match *self {
            Chart::Affine => z,
            Chart::Inverted { centre } => {
                if z == ZERO {
                    C64::new(f64::INFINITY, 0.0)
                } else {
                    C64::new(centre, 0.0) + ONE / z
                }
            }
        }
    }

    /// `q(z) = z^d f(centre + 1/z)` for a fiber polynomial `f` of nominal degree `d`.
    pub fn transform(&self, f: &Poly, d: usize) -> Poly {
        match *self {
            Chart::Affine => f.clone(),
            Chart::Inverted { centre } => {
                let lin = Poly::new(vec![ONE, C64::new(centre, 0.0)]);
                let mut acc = Poly::zero();
                let mut pw = Poly::one();
                for i in 0..=d {
                    let term = &(&pw * &Poly::monomial(ONE, d - i)) * &Poly::constant(f.coeff(i));
                    acc = &acc + &term;
                    pw = &pw * &lin;
                }
                acc
            }
        }
    }
}

/// A closed curve over a cut together with its involution.
#[derive(Debug, Clone, Serialize)]
pub struct BoundaryCurve {
    pub cut: CutSegment,
    /// Plane containing the curve (the other variable of the cut).
    pub plane: Plane,
    pub chart: Chart,
    /// Cut parameter at each sample.
    pub l: Vec<C64>,
    /// Samples in chart coordinates, counter-clockwise.
    pub z: Vec<C64>,
    pub closure_defect: f64,
    /// Root gaps at the two endpoints of the cut.
    pub endpoint_gaps: [f64; 2],
    pub involution_defect: f64,
    /// `max |α(t) − conj t|` for real cuts.
    pub conjugation_defect: Option<f64>,
    pub kernel_residual: f64,
    pub self_intersecting: bool,
    pub max_modulus: f64,
}

impl BoundaryCurve {
    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    /// Sample in the curve's own variable.
    pub fn t(&self, k: usize) -> C64 {
        self.chart.from_chart(self.z[k])
    }

    /// Index of `α(t_k)`.
    pub fn partner_index(&self, k: usize) -> usize {
        (self.len() - k) % self.len()
    }

    /// `(s, t, α(t))` triples with `s = θ/2π`.
    pub fn samples(&self) -> Vec<(f64, C64, C64)> {
        let n = self.len();
        (0..n)
            .map(|k| (k as f64 / n as f64, self.t(k), self.t(self.partner_index(k))))
            .collect()
    }

    /// Problems that make the curve unusable for a boundary condition.
    pub fn problems(&self, tol: &Tolerances) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.closure_defect < tol.closure) {
            out.push(format!("closure defect {:.2e}", self.closure_defect));
        }
        for (name, g) in ["start", "end"].iter().zip(self.endpoint_gaps) {
            if !(g < tol.double_root) {
                out.push(format!(
                    "tracked pair is not a double root at the {name} of the cut (gap {g:.2e})"
                ));
            }
        }
        if self.self_intersecting {
            out.push("curve intersects itself".into());
        }
        if !(self.max_modulus < 1e8) {
            out.push("curve is unbounded in its chart".into());
        }
        if !(self.kernel_residual < tol.fiber_residual) {
            out.push(format!("kernel residual {:.2e}", self.kernel_residual));
        }
        out
    }

    /// Winding number of the chart curve around a chart point.
    pub fn winding_around(&self, q: C64) -> i64 {
        winding(&self.z, q)
    }

    /// Whether a point of the curve's variable lies inside the curve.
    pub fn encloses(&self, t: C64) -> bool {
        self.winding_around(self.chart.to_chart(t)) != 0
    }

    /// Distance from `t` to the nearest sample, in the curve's variable.
    pub fn distance_to(&self, t: C64) -> (usize, f64) {
        (0..self.len())
            .map(|k| (k, (self.t(k) - t).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap_or((0, f64::INFINITY))
    }
}

fn winding(z: &[C64], q: C64) -> i64 {
    let n = z.len();
    let mut total = 0.0;
    for k in 0..n {
        total += ((z[(k + 1) % n] - q) / (z[k] - q)).arg();
    }
    (total / (2.0 * PI)).round() as i64
}

fn signed_area(z: &[C64]) -> f64 {
    let n = z.len();
    (0..n)
        .map(|k| {
            let (a, b) = (z[k], z[(k + 1) % n]);
            a.re * b.im - b.re * a.im
        })
        .sum::<f64>()
        / 2.0
}

/// Area centroid of the polygon.
pub fn centroid(z: &[C64]) -> C64 {
    let n = z.len();
    let mut a = 0.0;
    let mut c = ZERO;
    for k in 0..n {
        let (p, q) = (z[k], z[(k + 1) % n]);
        let cr = p.re * q.im - q.re * p.im;
        a += cr;
        c += (p + q) * cr;
    }
    c / (3.0 * a)
}

fn segments_cross(a: C64, b: C64, c: C64, d: C64) -> bool {
    let cross = |o: C64, p: C64, q: C64| (p - o).re * (q - o).im - (p - o).im * (q - o).re;
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    (d1 > 0.0) != (d2 > 0.0) && (d3 > 0.0) != (d4 > 0.0)
}

fn self_intersects(z: &[C64]) -> bool {
    let n = z.len();
    for i in 0..n {
        let (a, b) = (z[i], z[(i + 1) % n]);
        let (lo_x, hi_x) = (a.re.min(b.re), a.re.max(b.re));
        let (lo_y, hi_y) = (a.im.min(b.im), a.im.max(b.im));
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (c, d) = (z[j], z[(j + 1) % n]);
            if c.re.max(d.re) < lo_x
                || c.re.min(d.re) > hi_x
                || c.im.max(d.im) < lo_y
                || c.im.min(d.im) > hi_y
            {
                continue;
            }
            if segments_cross(a, b, c, d) {
                return true;
            }
        }
    }
    false
}

/// Fiber over a cut parameter, expressed in a chart.
struct ChartFiber<'a> {
    p: &'a BiPoly,
    cut_plane: Plane,
    chart: Chart,
    degree: usize,
}

impl ChartFiber<'_> {
    fn poly(&self, l: C64) -> Poly {
        let f = self.p.fiber(self.cut_plane, l);
        match self.chart {
            Chart::Affine => f,
            Chart::Inverted { .. } => self.chart.transform(&f, self.degree),
        }
    }

    fn roots(&self, l: C64) -> Vec<C64> {
        let q = self.poly(l);
        let (q, _) = effective(&q, self.degree);
        q.roots()
    }

    /// Newton on `q'` from the mean of a nearly double root; the double root
    /// is a simple root of the derivative, so this is well conditioned.
    fn refine_double(&self, l: C64, z0: C64) -> C64 {
        let d = self.poly(l).derivative();
        let mut z = z0;
        for _ in 0..4 {
            let (v, dv) = d.eval_with_derivative(z);
            if dv.norm() == 0.0 {
                break;
            }
            let step = v / dv;
            if !step.is_finite() || step.norm() > 1e-3 * z.norm().max(1.0) {
                return z0;
            }
            z -= step;
        }
        z
    }

    fn residual(&self, l: C64, z: C64) -> f64 {
        let q = self.poly(l);
        q.eval(z).norm() / q.abs_eval(z).max(1e-300)
    }
}

/// Mean of the two roots nearest to `z` and their distance.
fn pair_near(roots: &[C64], z: C64) -> (C64, f64) {
    let mut idx: Vec<usize> = (0..roots.len()).collect();
    idx.sort_by(|&a, &b| (roots[a] - z).norm().total_cmp(&(roots[b] - z).norm()));
    if idx.len() < 2 {
        return (roots.first().copied().unwrap_or(z), f64::INFINITY);
    }
    let (a, b) = (roots[idx[0]], roots[idx[1]]);
    ((a + b) / 2.0, (a - b).norm())
}

/// Closest pair among the roots: (mean, gap).
fn closest_pair(roots: &[C64]) -> (C64, f64) {
    let mut best = (ZERO, f64::INFINITY);
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            let d = (roots[i] - roots[j]).norm();
            if d < best.1 {
                best = ((roots[i] + roots[j]) / 2.0, d);
            }
        }
    }
    best
}

fn nearest(roots: &[C64], z: C64) -> Option<(C64, f64, f64)> {
    let mut order: Vec<(C64, f64)> = roots.iter().map(|&r| (r, (r - z).norm())).collect();
    order.sort_by(|a, b| a.1.total_cmp(&b.1));
    let first = *order.first()?;
    let second = order.get(1).map_or(f64::INFINITY, |s| s.1);
    Some((first.0, first.1, second))
}

/// True when the leading fiber coefficient vanishes on the cut.
fn passes_through_infinity(p: &BiPoly, cut: &CutSegment) -> bool {
    let lead = p.coeffs_over(cut.plane()).pop().unwrap_or_default();
    lead.roots().iter().any(|&r| cut.contains(r, 1e-8))
}

/// Traces the curve over `cut` with at least `n_samples` samples.
pub fn trace_curve(
    p: &BiPoly,
    cut: &CutSegment,
    n_samples: usize,
    tol: &Tolerances,
) -> Result<BoundaryCurve> {
    if !passes_through_infinity(p, cut) {
        return trace_in_chart(p, cut, n_samples, Chart::Affine, tol);
    }
    // Candidate centres, outward from the unit disk on both sides.
    let candidates = [2.0, -2.0, 3.0, -3.0, 1.5, -1.5, 5.0, -5.0, 1.25, -1.25, 8.0, -8.0];
    let mut last_err = None;
    for &c in &candidates {
        let chart = Chart::Inverted { centre: c };
        match trace_in_chart(p, cut, n_samples, chart, tol) {
            Ok(curve) => {
                if curve.winding_around(chart.to_chart(ZERO)) != 0
                    && curve.problems(tol).is_empty()
                {
                    return Ok(curve);
                }
                last_err = Some(format!(
                    "centre {c}: chart curve does not enclose the origin or is invalid"
                ));
            }
            Err(e) => last_err = Some(e.to_string()),
        }
    }
    Err(Error::numerical(
        Stage::Curve,
        format!(
            "curve through infinity could not be charted: {}",
            last_err.unwrap_or_default()
        ),
    ))
}

/// Traces the curve in a fixed chart.
pub fn trace_in_chart(
    p: &BiPoly,
    cut: &CutSegment,
    n_samples: usize,
    chart: Chart,
    tol: &Tolerances,
) -> Result<BoundaryCurve> {
    let n = (n_samples.max(8) + 1) & !1;
    let cut_plane = cut.plane();
    let fib = ChartFiber {
        p,
        cut_plane,
        chart,
        degree: p.degree(cut_plane.other()),
    };
    let l_at = |th: f64| cut.point_at_angle(th);

    let r0 = fib.roots(cut.start.location);
    let (z0, gap0) = closest_pair(&r0);
    let z0 = fib.refine_double(cut.start.location, z0);
    // Pick one root of the splitting pair just after the start.
    let h0 = 1e-3 * 2.0 * PI / n as f64;
    let r1 = fib.roots(l_at(h0));
    let mut near: Vec<C64> = r1.clone();
    near.sort_by(|a, b| (a - z0).norm().total_cmp(&(b - z0).norm()));
    let mut cand = near.into_iter().take(2).collect::<Vec<_>>();
    sort_complex(&mut cand);
    let first = if cand.len() == 2 && (cand[0].im - cand[1].im).abs() > 1e-14 {
        if cand[0].im > cand[1].im {
            cand[0]
        } else {
            cand[1]
        }
    } else {
        *cand.last().unwrap_or(&z0)
    };

    let mut z = Vec::with_capacity(n);
    z.push(z0);
    let mut prev = z0;
    let mut cur = first;
    let mut th = h0;
    let mut last_step = h0;
    let dtheta = 2.0 * PI / n as f64;
    let mut gap_end = f64::NAN;
    let mut closure = f64::NAN;
    for k in 1..=n {
        let target = dtheta * k as f64;
        let is_end = 2 * k == n || k == n;
        let mut step = (target - th).min(dtheta / 4.0);
        while th < target - 1e-15 {
            step = step.min(target - th);
            let nt = th + step;
            let pred = cur + (cur - prev) * (step / last_step);
            let roots = fib.roots(l_at(nt));
            let Some((cand, d, sep)) = nearest(&roots, pred) else {
                return Err(Error::numerical(Stage::Curve, "empty fiber while tracing"));
            };
            let ok = d < tol.trace_jump * sep || (is_end && target - nt < 1e-15);
            if ok {
                prev = cur;
                cur = cand;
                last_step = step;
                th = nt;
                step = (step * 1.5).min(dtheta / 4.0);
                if cur.norm() > 1e12 {
                    return Err(Error::numerical(
                        Stage::Curve,
                        format!(
                            "unbounded component: root escapes to infinity near l = {}",
                            l_at(th)
                        ),
                    ));
                }
            } else {
                step /= 2.0;
                if step < 1e-14 {
                    return Err(Error::numerical(
                        Stage::Curve,
                        format!("curve tracing stalled near l = {}", l_at(nt)),
                    ));
                }
            }
        }
        th = target;
        if is_end {
            let roots = fib.roots(l_at(target));
            let (mean, gap) = pair_near(&roots, cur);
            let mean = fib.refine_double(l_at(target), mean);
            let scale = mean.norm().max(1.0);
            if 2 * k == n {
                gap_end = gap / scale;
                z.push(mean);
                cur = mean;
            } else {
                closure = (mean - z0).norm() / scale;
                let _ = gap;
            }
        } else {
            z.push(cur);
        }
    }
    finish_curve(cut, chart, &fib, z, gap0 / z0.norm().max(1.0), gap_end, closure)
}

fn finish_curve(
    cut: &CutSegment,
    chart: Chart,
    fib: &ChartFiber<'_>,
    mut z: Vec<C64>,
    gap0: f64,
    gap_end: f64,
    closure: f64,
) -> Result<BoundaryCurve> {
    let n = z.len();
    if signed_area(&z) < 0.0 {
        let rev: Vec<C64> = (0..n).map(|k| z[(n - k) % n]).collect();
        z = rev;
    }
    let l: Vec<C64> = (0..n)
        .map(|k| cut.point_at_angle(2.0 * PI * k as f64 / n as f64))
        .collect();
    let kernel_residual = (0..n)
        .map(|k| fib.residual(l[k], z[k]))
        .fold(0.0, f64::max);
    let max_modulus = z.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut curve = BoundaryCurve {
        cut: cut.clone(),
        plane: cut.plane().other(),
        chart,
        l,
        z,
        closure_defect: closure,
        endpoint_gaps: [gap0, gap_end],
        involution_defect: 0.0,
        conjugation_defect: None,
        kernel_residual,
        self_intersecting: false,
        max_modulus,
    };
    curve.self_intersecting = self_intersects(&curve.z);
    curve.involution_defect = involution_defect(fib, &curve);
    if cut.kind == CutKind::Real {
        let d = (0..n)
            .map(|k| {
                let a = curve.z[curve.partner_index(k)];
                (a - curve.z[k].conj()).norm()
            })
            .fold(0.0, f64::max);
        curve.conjugation_defect = Some(d);
    }
    Ok(curve)
}

/// `max |α(α(t)) − t|` with α recomputed from the kernel at every sample.
fn involution_defect(fib: &ChartFiber<'_>, c: &BoundaryCurve) -> f64 {
    let n = c.len();
    let mut worst: f64 = 0.0;
    for k in 0..n {
        let j = c.partner_index(k);
        let roots = fib.roots(c.l[k]);
        let a = partner_root(&roots, c.z[k], c.z[j]);
        let back = partner_root(&roots, a, c.z[k]);
        worst = worst.max((back - c.z[k]).norm() / c.z[k].norm().max(1.0));
    }
    worst
}

/// Among the roots, the one nearest to `hint` other than `t` itself.
fn partner_root(roots: &[C64], t: C64, hint: C64) -> C64 {
    let self_idx = roots
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - t).norm().total_cmp(&(b.1 - t).norm()))
        .map(|(i, _)| i);
    let hint_idx = roots
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - hint).norm().total_cmp(&(b.1 - hint).norm()))
        .map(|(i, _)| i);
    if (t - hint).norm() < 1e-7 * t.norm().max(1.0) {
        // Fixed point of α (image of a cut endpoint).
        return t;
    }
    match (self_idx, hint_idx) {
        (Some(s), Some(h)) if s != h => roots[h],
        _ => roots
            .iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != self_idx)
            .min_by(|a, b| (a.1 - hint).norm().total_cmp(&(b.1 - hint).norm()))
            .map(|(_, r)| *r)
            .unwrap_or(t),
    }
}

/// α at a point `t` of the curve, computed from the kernel: the cut
/// parameter is recovered from `P(t, l) = 0`, then the partner root over it.
pub fn automorphism_at(p: &BiPoly, c: &BoundaryCurve, t: C64) -> Result<C64> {
    let (k, dist) = c.distance_to(t);
    let scale = t.norm().max(1.0);
    if !(dist < 1e-6 * scale) {
        // Not a sample: allow points between samples within one spacing.
        let n = c.len();
        let spacing = (c.t((k + 1) % n) - c.t(k))
            .norm()
            .max((c.t((k + n - 1) % n) - c.t(k)).norm());
        if !(dist <= spacing) {
            return Err(Error::Domain(format!(
                "point {t} is off the curve (nearest sample at distance {dist:.3e})"
            )));
        }
    }
    let cut_plane = c.cut.plane();
    let lpoly = p.fiber(cut_plane.other(), t);
    let l = lpoly
        .roots()
        .into_iter()
        .min_by(|a, b| (a - c.l[k]).norm().total_cmp(&(b - c.l[k]).norm()))
        .ok_or_else(|| Error::numerical(Stage::Curve, "no cut parameter over the point"))?;
    let roots = p.fiber(cut_plane, l).roots();
    let hint = c.t(c.partner_index(k));
    Ok(partner_root(&roots, t, hint))
}

/// Kernel point pair over the cut parameter `l(θ)` in chart coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub theta: f64,
    pub l: C64,
    pub t: C64,
    pub alpha: C64,
}

impl BoundaryCurve {
    /// Points at arbitrary angles: the trigonometric interpolant of the
    /// samples picks the kernel roots over `l(θ)` for `t(θ)` and `t(−θ)`.
    pub fn points_at(&self, p: &BiPoly, thetas: &[f64]) -> Vec<CurvePoint> {
        let cut_plane = self.cut.plane();
        let fib = ChartFiber {
            p,
            cut_plane,
            chart: self.chart,
            degree: p.degree(cut_plane.other()),
        };
        let spec = crate::fourier::spectrum(&self.z);
        thetas
            .iter()
            .map(|&th| {
                let l = self.cut.point_at_angle(th);
                let roots = fib.roots(l);
                let zt = crate::fourier::trig_eval(&spec, th);
                let za = crate::fourier::trig_eval(&spec, -th);
                let pick = |q: C64| {
                    nearest(&roots, q).map_or(q, |(r, _, _)| r)
                };
                CurvePoint {
                    theta: th,
                    l,
                    t: pick(zt),
                    alpha: pick(za),
                }
            })
            .collect()
    }
}

/// Outcome of tracing the curve over one interior cut.
#[derive(Debug, Clone, Serialize)]
pub struct CutAssessment {
    pub cut: CutSegment,
    #[serde(skip)]
    pub curve: Option<BoundaryCurve>,
    pub problems: Vec<String>,
}

impl CutAssessment {
    pub fn is_suitable(&self) -> bool {
        self.curve.is_some() && self.problems.is_empty()
    }
}

/// Branch points of one plane, their interior cuts and the curves over them.
#[derive(Debug, Clone, Serialize)]
pub struct PlaneAnalysis {
    pub plane: Plane,
    pub branch: BranchSet,
    pub interior: Vec<BranchPoint>,
    pub cuts: Vec<CutAssessment>,
}

impl PlaneAnalysis {
    /// Interior branch points whose cut yields a valid closed curve.
    pub fn validated_count(&self) -> usize {
        2 * self.cuts.iter().filter(|c| c.is_suitable()).count()
    }

    pub fn suitable(&self) -> impl Iterator<Item = &CutAssessment> {
        self.cuts.iter().filter(|c| c.is_suitable())
    }

    /// The only suitable cut; an error lists the candidates otherwise.
    pub fn unique_curve(&self) -> Result<&BoundaryCurve> {
        let good: Vec<&CutAssessment> = self.suitable().collect();
        match good.as_slice() {
            [one] => Ok(one.curve.as_ref().unwrap()),
            _ => {
                let list: Vec<String> = self
                    .cuts
                    .iter()
                    .map(|c| {
                        format!(
                            "[{:.6}{:+.6}i, {:.6}{:+.6}i] {}",
                            c.cut.start.location.re,
                            c.cut.start.location.im,
                            c.cut.end.location.re,
                            c.cut.end.location.im,
                            if c.is_suitable() {
                                "suitable".to_string()
                            } else {
                                c.problems.join("; ")
                            }
                        )
                    })
                    .collect();
                Err(Error::numerical(
                    Stage::Curve,
                    format!(
                        "ambiguous interior cut selection in the {}-plane ({} suitable): {}",
                        self.plane.name(),
                        good.len(),
                        list.join(" | ")
                    ),
                ))
            }
        }
    }
}

/// Finds, classifies and pairs the branch points of `plane` and traces the
/// curve over every interior cut.
pub fn analyse_plane(
    p: &BiPoly,
    plane: Plane,
    n_samples: usize,
    tol: &Tolerances,
) -> Result<PlaneAnalysis> {
    let branch = find_branch_points(p, plane, tol)?;
    let class = classify_branch_points(&branch.points)?;
    let cuts = pair_cuts(&class.interior, tol)?;
    let cuts = cuts
        .into_iter()
        .map(|cut| match trace_curve(p, &cut, n_samples, tol) {
            Ok(curve) => {
                let problems = curve.problems(tol);
                CutAssessment {
                    cut,
                    curve: Some(curve),
                    problems,
                }
            }
            Err(e) => CutAssessment {
                cut,
                curve: None,
                problems: vec![e.to_string()],
            },
        })
        .collect();
    Ok(PlaneAnalysis {
        plane,
        branch,
        interior: class.interior,
        cuts,
    })
}

/// Minimum distance between the samples of two curves.
pub fn curve_distance(a: &BoundaryCurve, b: &BoundaryCurve) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..a.len() {
        let p = a.t(i);
        for j in 0..b.len() {
            best = best.min((p - b.t(j)).norm());
        }
    }
    best
}

/// SVG rendering of curves with the unit circle for reference.
pub fn curves_to_svg(curves: &[&BoundaryCurve], clip: f64) -> String {
    let pts: Vec<Vec<C64>> = curves
        .iter()
        .map(|c| {
            (0..c.len())
                .map(|k| c.t(k))
                .filter(|t| t.is_finite() && t.norm() <= clip)
                .collect()
        })
        .collect();
    let mut lo = C64::new(-1.0, -1.0);
    let mut hi = C64::new(1.0, 1.0);
    for t in pts.iter().flatten() {
        lo = C64::new(lo.re.min(t.re), lo.im.min(t.im));
        hi = C64::new(hi.re.max(t.re), hi.im.max(t.im));
    }
    let span = (hi.re - lo.re).max(hi.im - lo.im) * 1.1;
    let mid = (lo + hi) / 2.0;
    let size = 600.0;
    let map = |t: C64| {
        (
            size * (0.5 + (t.re - mid.re) / span),
            size * (0.5 - (t.im - mid.im) / span),
        )
    };
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
    let (cx, cy) = map(ZERO);
    let _ = writeln!(
        s,
        r#"<circle cx="{cx:.3}" cy="{cy:.3}" r="{:.3}" fill="none" stroke="gray" stroke-dasharray="4 3"/>"#,
        size / span
    );
    let (ax0, _) = map(C64::new(mid.re - span, 0.0));
    let (ax1, ay) = map(C64::new(mid.re + span, 0.0));
    let _ = writeln!(
        s,
        r#"<line x1="{ax0:.3}" y1="{ay:.3}" x2="{ax1:.3}" y2="{ay:.3}" stroke="lightgray"/>"#
    );
    let colours = ["black", "steelblue", "firebrick", "darkgreen"];
    for (i, p) in pts.iter().enumerate() {
        let mut d = String::new();
        for t in p {
            let (x, y) = map(*t);
            let _ = write!(d, "{x:.3},{y:.3} ");
        }
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
            d.trim_end(),
            colours[i % colours.len()]
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_transform_matches_substitution() {
        let f = Poly::from_real(&[0.3, -1.0, 0.2, 0.5]);
        let ch = Chart::Inverted { centre: 2.0 };
        let q = ch.transform(&f, 3);
        let z = C64::new(0.3, 0.1);
        let x = ch.from_chart(z);
        assert!((q.eval(z) - f.eval(x) * z.powu(3)).norm() < 1e-13);
        assert!((ch.to_chart(x) - z).norm() < 1e-14);
    }

    #[test]
    fn square_has_no_self_intersection_and_positive_area() {
        let z = [
            C64::new(0.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(1.0, 1.0),
            C64::new(0.0, 1.0),
        ];
        assert!(!self_intersects(&z));
        assert!(signed_area(&z) > 0.0);
        assert_eq!(winding(&z, C64::new(0.5, 0.5)), 1);
        assert!((centroid(&z) - C64::new(0.5, 0.5)).norm() < 1e-15);
        let bow = [z[0], z[2], z[1], z[3]];
        assert!(self_intersects(&bow));
    }
}
