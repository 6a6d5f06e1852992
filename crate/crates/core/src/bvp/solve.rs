//! End-to-end solver for models with one unknown per axis (`I⁻ = J⁻ = 1`).
//!
//! For each axis the unknown is found from its boundary condition on the
//! curve over the interior cut of the other plane: the condition is moved to
//! the unit circle through the conformal map and solved as a Riemann–Hilbert
//! problem, giving one particular solution per isolated scalar plus a
//! homogeneous one. The remaining real constants are fixed by requiring the
//! functional equation at kernel points inside the unit bidisk, and the total
//! mass fixes the overall scale.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::branch::{CutKind, CutSegment};
use crate::config::Tolerances;
use crate::curve::{analyse_plane, trace_curve, BoundaryCurve, Chart};
use crate::error::{Error, Result, Stage};
use crate::fourier::fft;
use crate::kernel::{BiPoly, Plane};
use crate::linalg::null_vector;
use crate::model::{classify_with_bounds, FunctionalEquation, HomogeneityClass};

use super::boundary::BoundaryCondition;
use super::conformal::{conformal_gluing, ConformalGluing};
use super::rh::{eval_series, resample_sigma, solve_rh, taylor_from_circle, unwrapped_arg};

const ZERO: C64 = C64::new(0.0, 0.0);
const PROBE: f64 = 0.3;
const KERNEL_RADIUS: f64 = 0.95;
const KERNEL_ANGLES: usize = 40;
const TORUS_POINTS: usize = 256;
const CIRCLE_POINTS: usize = 512;
const CIRCLE_RADIUS: f64 = 0.8;
const CURVE_SAMPLES: usize = 1024;

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Largest `i` and `j` of the coefficient table.
    pub order: usize,
    pub tol: Tolerances,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            order: 10,
            tol: Tolerances::default(),
        }
    }
}

/// BVP solution for the unknown of one axis, before pinning.
#[derive(Debug, Clone)]
pub struct AxisSolution {
    /// Equation oriented so that this unknown is a function of `x`.
    pub fe: FunctionalEquation,
    pub curve: BoundaryCurve,
    pub gluing: ConformalGluing,
    pub condition: BoundaryCondition,
    /// Anchors of the scalars in the oriented equation.
    pub scalars: Vec<(usize, usize)>,
    /// Taylor coefficients in the disk variable, one set per scalar.
    pub particular: Vec<Vec<C64>>,
    pub homogeneous: Vec<C64>,
    /// Largest negative-frequency magnitude of the circle data.
    pub leak: f64,
}

impl AxisSolution {
    fn build(fe: &FunctionalEquation, cut: &CutSegment, n: usize, tol: &Tolerances) -> Result<Self> {
        let p = &fe.interior_gen;
        let curve = trace_curve(p, cut, n, tol)?;
        let problems = curve.problems(tol);
        if !problems.is_empty() {
            return Err(Error::numerical(Stage::Curve, problems.join("; ")));
        }
        let gluing = conformal_gluing(&curve)?;
        if !(gluing.accuracy < tol.conformal) {
            return Err(Error::numerical(
                Stage::Conformal,
                format!(
                    "conformal map accuracy target not reached: achieved {:.2e} with {} samples",
                    gluing.accuracy, n
                ),
            ));
        }
        let sigma = unwrapped_arg(&gluing.w);
        let (theta, targets) = resample_sigma(&sigma)?;
        let points = curve.points_at(p, &theta);
        let condition = BoundaryCondition::at_points(fe, &curve, points)?.ensure_regular()?;
        if condition.index != 0 {
            return Err(Error::numerical(
                Stage::Solve,
                format!(
                    "index ≠ 0: solution formula requires modification (index {})",
                    condition.index
                ),
            ));
        }
        let s0 = targets[0];
        let mut particular = Vec::new();
        let mut homogeneous = Vec::new();
        let mut leak: f64 = 0.0;
        for h in &condition.h {
            let c: Vec<f64> = h.iter().map(|v| v.im / 2.0).collect();
            let (phi_p, phi_h) = solve_rh(&condition.b, &c)?;
            let (cp, lp) = taylor_from_circle(&phi_p, s0);
            let (ch, lh) = taylor_from_circle(&phi_h, s0);
            leak = leak.max(lp).max(lh);
            particular.push(cp);
            homogeneous = ch;
        }
        Ok(AxisSolution {
            fe: fe.clone(),
            scalars: condition.scalars.clone(),
            curve,
            gluing,
            condition,
            particular,
            homogeneous,
            leak,
        })
    }

    /// Particular solutions and homogeneous solution at a point.
    pub fn basis_at(&self, x: C64) -> Result<(Vec<C64>, C64)> {
        let zeta = self.gluing.eval(x)?;
        Ok((
            self.particular.iter().map(|c| eval_series(c, zeta)).collect(),
            eval_series(&self.homogeneous, zeta),
        ))
    }

    /// Smallest modulus of the curve, a lower bound on the domain radius.
    pub fn domain_radius(&self) -> f64 {
        (0..self.curve.len())
            .map(|k| self.curve.t(k).norm())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Functional-equation residual diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    pub grid_points: usize,
    /// Max of `|FE| / scale` over the grid inside the bidisk.
    pub grid_max_relative: f64,
    pub grid_max_absolute: f64,
    /// Max of `|FE| / scale` at the kernel points used for pinning.
    pub kernel_max_relative: f64,
    pub min_coefficient: f64,
    pub max_imag_coefficient: f64,
    pub window_sum: f64,
    pub total_mass: f64,
}

/// Solution of the stationary problem with evaluators for the unknowns.
#[derive(Debug, Clone)]
pub struct SolutionBundle {
    pub fe: FunctionalEquation,
    pub x_axis: AxisSolution,
    pub y_axis: AxisSolution,
    pub n_samples: usize,
    /// Normalized isolated probabilities by anchor; `(0,0)` first.
    pub scalars: Vec<((usize, usize), f64)>,
    pub pi00: f64,
    /// Real multiples of the homogeneous solutions (unnormalized).
    pub beta: (f64, f64),
    /// Mass before normalization.
    pub raw_mass: f64,
    pub interior_mass: f64,
    /// Singular values of the pinning system, descending.
    pub pinning_singular_values: Vec<f64>,
    pub torus_radius: f64,
    /// Normalized interior coefficients `c[i][j]` of `x^i y^j`.
    pub interior: Vec<Vec<f64>>,
    pub coefficients: Vec<Vec<f64>>,
    pub residual: ResidualReport,
    /// Successive probe values of the refinement, one per sample count.
    pub refinement: Vec<(usize, f64)>,
}

#[allow(clippy::type_complexity)]
struct Pinned {
    scalars: Vec<f64>,
    beta: (f64, f64),
    singular: Vec<f64>,
    kernel_rel: f64,
    y_index: Vec<usize>,
}

fn pin(fe: &FunctionalEquation, xs: &AxisSolution, ys: &AxisSolution) -> Result<Pinned> {
    let p = &fe.interior_gen;
    let g1 = &fe.horizontal[0].generator;
    let g2 = &fe.vertical[0].generator;
    let mut iso: Vec<_> = fe.isolated.iter().collect();
    iso.sort_by_key(|t| t.anchor);
    let ns = iso.len();
    let y_index: Vec<usize> = iso
        .iter()
        .map(|t| {
            ys.scalars
                .iter()
                .position(|&a| a == (t.anchor.1, t.anchor.0))
                .expect("transposed anchors match")
        })
        .collect();
    let mut complex_rows: Vec<(Vec<C64>, f64)> = Vec::new();
    for m in 0..KERNEL_ANGLES {
        let x = C64::from_polar(KERNEL_RADIUS, 2.0 * PI * (m as f64 + 0.5) / KERNEL_ANGLES as f64);
        for y in p.fiber_at_x(x).roots() {
            if y.norm() >= KERNEL_RADIUS {
                continue;
            }
            let (up, uh) = xs.basis_at(x)?;
            let (vp, vh) = ys.basis_at(y)?;
            let (a1, a2) = (g1.eval(x, y), g2.eval(x, y));
            let mut row = Vec::with_capacity(ns + 2);
            let mut scale = 0.0;
            for (s, t) in iso.iter().enumerate() {
                let gs = t.generator.eval(x, y);
                let vps = vp[y_index[s]];
                row.push(a1 * up[s] + a2 * vps + gs);
                scale += (a1 * up[s]).norm() + (a2 * vps).norm() + gs.norm();
            }
            row.push(a1 * uh);
            row.push(a2 * vh);
            scale += (a1 * uh).norm() + (a2 * vh).norm();
            complex_rows.push((row, scale.max(1e-300)));
        }
    }
    if complex_rows.len() < ns + 2 {
        return Err(Error::numerical(
            Stage::Solve,
            "too few kernel points inside the bidisk to pin the constants",
        ));
    }
    let mut rows = Vec::with_capacity(2 * complex_rows.len());
    for (r, s) in &complex_rows {
        rows.push(r.iter().map(|v| v.re / s).collect::<Vec<f64>>());
        rows.push(r.iter().map(|v| v.im / s).collect::<Vec<f64>>());
    }
    let (v, singular) = null_vector(&rows, Stage::Solve)?;
    if v[0].abs() < 1e-14 {
        return Err(Error::numerical(
            Stage::Solve,
            "pinning left the origin probability undetermined",
        ));
    }
    let v: Vec<f64> = v.iter().map(|c| c / v[0]).collect();
    let kernel_rel = complex_rows
        .iter()
        .map(|(r, s)| r.iter().zip(&v).map(|(a, b)| a * b).sum::<C64>().norm() / s)
        .fold(0.0, f64::max);
    Ok(Pinned {
        scalars: v[..ns].to_vec(),
        beta: (v[ns], v[ns + 1]),
        singular,
        kernel_rel,
        y_index,
    })
}

/// Unnormalized unknowns after pinning.
struct Assembled<'a> {
    fe: &'a FunctionalEquation,
    xs: &'a AxisSolution,
    ys: &'a AxisSolution,
    pinned: &'a Pinned,
}

impl Assembled<'_> {
    fn u(&self, x: C64) -> Result<C64> {
        let (up, uh) = self.xs.basis_at(x)?;
        let s: C64 = up.iter().zip(&self.pinned.scalars).map(|(a, &b)| a * b).sum();
        Ok(s + uh * self.pinned.beta.0)
    }

    fn v(&self, y: C64) -> Result<C64> {
        let (vp, vh) = self.ys.basis_at(y)?;
        let s: C64 = self
            .pinned
            .y_index
            .iter()
            .zip(&self.pinned.scalars)
            .map(|(&i, &b)| vp[i] * b)
            .sum();
        Ok(s + vh * self.pinned.beta.1)
    }

    fn known(&self, x: C64, y: C64, u: C64, v: C64) -> C64 {
        let fe = self.fe;
        let mut n = fe.horizontal[0].generator.eval(x, y) * u + fe.vertical[0].generator.eval(x, y) * v;
        let mut iso: Vec<_> = fe.isolated.iter().collect();
        iso.sort_by_key(|t| t.anchor);
        for (t, &c) in iso.iter().zip(&self.pinned.scalars) {
            n += t.generator.eval(x, y) * c;
        }
        n
    }

    /// Interior mass `π_int(1,1)` and the total mass.
    fn mass(&self) -> Result<(f64, f64)> {
        let one = C64::new(1.0, 0.0);
        let u1 = self.u(one)?.re;
        let v1 = self.v(one)?.re;
        let fe = self.fe;
        let mut iso: Vec<_> = fe.isolated.iter().collect();
        iso.sort_by_key(|t| t.anchor);
        let dir = |d: &dyn Fn(&BiPoly) -> BiPoly| -> (f64, f64) {
            let mut n = d(&fe.horizontal[0].generator).eval(one, one) * u1
                + d(&fe.vertical[0].generator).eval(one, one) * v1;
            for (t, &c) in iso.iter().zip(&self.pinned.scalars) {
                n += d(&t.generator).eval(one, one) * c;
            }
            (n.re, d(&fe.interior_gen).eval(one, one).re)
        };
        let (nx, px) = dir(&|g: &BiPoly| g.dx());
        let (ny, py) = dir(&|g: &BiPoly| g.dy());
        let interior = if px.abs() >= py.abs() && px.abs() > 1e-12 {
            -nx / px
        } else if py.abs() > 1e-12 {
            -ny / py
        } else {
            return Err(not_ergodic("zero drift"));
        };
        let total = interior + u1 + v1 + self.pinned.scalars.iter().sum::<f64>();
        Ok((interior, total))
    }
}

/// Branch points outside the unit disk but inside the curve at which the
/// smallest root of the fiber collides with another root. The continuation
/// of the unknown through the small root is multivalued around them.
fn inner_collisions(axis: &AxisSolution, label: Plane) -> Vec<(Plane, C64)> {
    let p = &axis.fe.interior_gen;
    let tol = Tolerances::default();
    let Ok(set) = crate::branch::find_branch_points(p, Plane::X, &tol) else {
        return Vec::new();
    };
    set.points
        .iter()
        .filter(|b| b.location.norm() > 1.0 && axis.curve.encloses(b.location))
        .filter(|b| {
            let Some(y) = b.fiber_collision else {
                return false;
            };
            let smaller = p
                .fiber_at_x(b.location)
                .roots()
                .iter()
                .filter(|r| r.norm() < y.norm() * (1.0 - 1e-6))
                .count();
            smaller == 0
        })
        .map(|b| (label, b.location))
        .collect()
}

fn not_ergodic(why: &str) -> Error {
    Error::numerical(Stage::Solve, format!("model not ergodic (numerically): {why}"))
}

fn interior_cut(fe: &FunctionalEquation, tol: &Tolerances) -> Result<CutSegment> {
    let analysis = analyse_plane(&fe.interior_gen, Plane::Y, CURVE_SAMPLES, tol).map_err(|e| {
        if e.to_string().contains("unit circle") {
            not_ergodic(&e.to_string())
        } else {
            e
        }
    })?;
    let curve = analysis.unique_curve()?;
    if curve.cut.kind != CutKind::Real {
        return Err(Error::Unsupported(
            "conjugate-cut gluing is not supported by the scalar solver".into(),
        ));
    }
    Ok(curve.cut.clone())
}

/// Torus radius for the interior coefficients: the polydisk must lie inside
/// both domains, and the kernel must stay away from zero on the torus.
fn torus_radius(fe: &FunctionalEquation, xs: &AxisSolution, ys: &AxisSolution) -> Result<f64> {
    let upper = (0.9 * xs.domain_radius().min(ys.domain_radius())).min(1.6);
    let b = fe.bounds;
    let terms: Vec<(i64, f64)> = fe
        .interior_gen
        .terms()
        .into_iter()
        .filter(|&(i, j, _)| (i, j) != (b.i_minus as usize, b.j_minus as usize))
        .map(|(i, j, c)| {
            (
                i as i64 - b.i_minus as i64 + j as i64 - b.j_minus as i64,
                c.re,
            )
        })
        .collect();
    let f = |r: f64| terms.iter().map(|&(d, p)| p * r.powi(d as i32)).sum::<f64>();
    let mut best: Option<(f64, f64)> = None;
    let mut r = 1.01;
    while r <= upper + 1e-12 {
        let v = f(r);
        if best.is_none_or(|(_, bv)| v < bv) {
            best = Some((r, v));
        }
        r += 0.01;
    }
    match best {
        Some((r, v)) if v < 1.0 - 1e-6 => Ok(r),
        _ => Err(Error::numerical(
            Stage::Solve,
            "no torus radius separates the kernel from zero inside the solution domain",
        )),
    }
}

fn fft2(grid: &mut [Vec<C64>]) {
    for row in grid.iter_mut() {
        *row = fft(row);
    }
    let n = grid.len();
    let m = grid.first().map_or(0, |r| r.len());
    for j in 0..m {
        let col: Vec<C64> = (0..n).map(|i| grid[i][j]).collect();
        let f = fft(&col);
        for i in 0..n {
            grid[i][j] = f[i];
        }
    }
}

fn interior_series(
    a: &Assembled<'_>,
    r: f64,
    u_override: Option<&dyn Fn(C64) -> C64>,
) -> Result<Vec<Vec<C64>>> {
    let m = TORUS_POINTS;
    let pts: Vec<C64> = (0..m)
        .map(|k| C64::from_polar(r, 2.0 * PI * k as f64 / m as f64))
        .collect();
    let mut uu = Vec::with_capacity(m);
    for &x in &pts {
        let base = a.u(x)?;
        uu.push(match u_override {
            Some(f) => base + f(x),
            None => base,
        });
    }
    let vv: Vec<C64> = pts.iter().map(|&y| a.v(y)).collect::<Result<_>>()?;
    let p = &a.fe.interior_gen;
    let mut grid: Vec<Vec<C64>> = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| -a.known(pts[i], pts[j], uu[i], vv[j]) / p.eval(pts[i], pts[j]))
                .collect()
        })
        .collect();
    fft2(&mut grid);
    let half = m / 2;
    let norm = (m * m) as f64;
    Ok((0..half)
        .map(|i| {
            (0..half)
                .map(|j| grid[i][j] / norm / r.powi((i + j) as i32))
                .collect()
        })
        .collect())
}

fn eval_bivariate(c: &[Vec<C64>], x: C64, y: C64) -> C64 {
    c.iter().rev().fold(ZERO, |acc, row| {
        acc * x + row.iter().rev().fold(ZERO, |s, &v| s * y + v)
    })
}

fn circle_coefficients(f: &dyn Fn(C64) -> Result<C64>, count: usize, radius: f64) -> Result<Vec<C64>> {
    let m = CIRCLE_POINTS;
    let vals: Vec<C64> = (0..m)
        .map(|k| f(C64::from_polar(radius, 2.0 * PI * k as f64 / m as f64)))
        .collect::<Result<_>>()?;
    let spec = fft(&vals);
    Ok((0..count)
        .map(|k| spec[k] / m as f64 / radius.powi(k as i32))
        .collect())
}

/// Points of the residual grid: two Vogel spirals inside the bidisk.
fn grid_points() -> Vec<(C64, C64)> {
    let golden = PI * (3.0 - 5f64.sqrt());
    let spiral = |k: usize, phase: f64| {
        let r = 0.95 * ((k as f64 + 0.5) / 20.0).sqrt();
        C64::from_polar(r, k as f64 * golden + phase)
    };
    let mut out = Vec::with_capacity(400);
    for a in 0..20 {
        for b in 0..20 {
            out.push((spiral(a, 0.0), spiral(b, 1.0)));
        }
    }
    out
}

struct GridResidual {
    max_rel: f64,
    max_abs: f64,
}

fn grid_residual(
    a: &Assembled<'_>,
    interior: &[Vec<C64>],
    u_override: Option<&dyn Fn(C64) -> C64>,
) -> Result<GridResidual> {
    let fe = a.fe;
    let mut iso: Vec<_> = fe.isolated.iter().collect();
    iso.sort_by_key(|t| t.anchor);
    let mut out = GridResidual {
        max_rel: 0.0,
        max_abs: 0.0,
    };
    for (x, y) in grid_points() {
        let mut u = a.u(x)?;
        if let Some(f) = u_override {
            u += f(x);
        }
        let v = a.v(y)?;
        let pint = eval_bivariate(interior, x, y);
        let res = fe.interior_gen.eval(x, y) * pint + a.known(x, y, u, v);
        let mut scale = fe.interior_gen.abs_eval(x, y) * pint.norm()
            + fe.horizontal[0].generator.abs_eval(x, y) * u.norm()
            + fe.vertical[0].generator.abs_eval(x, y) * v.norm();
        for (t, &c) in iso.iter().zip(&a.pinned.scalars) {
            scale += t.generator.abs_eval(x, y) * c.abs();
        }
        out.max_abs = out.max_abs.max(res.norm());
        out.max_rel = out.max_rel.max(res.norm() / scale.max(1e-300));
    }
    Ok(out)
}

fn check_unit_negative(fe: &FunctionalEquation) -> Result<()> {
    let b = fe.bounds;
    if b.i_minus != 1 || b.j_minus != 1 {
        return Err(Error::Unsupported(format!(
            "the scalar solver needs I⁻ = J⁻ = 1 (got I⁻ = {}, J⁻ = {}); use the vector assembly instead",
            b.i_minus, b.j_minus
        )));
    }
    Ok(())
}

/// Solves a model whose west and south jumps have size one.
pub fn solve_lukasiewicz(fe: &FunctionalEquation, opts: &SolveOptions) -> Result<SolutionBundle> {
    check_unit_negative(fe)?;
    solve_unit_negative(fe, opts)
}

/// Solves a small-step model (or any model with `I⁻ = J⁻ = 1`).
pub fn solve_small_steps(fe: &FunctionalEquation, opts: &SolveOptions) -> Result<SolutionBundle> {
    check_unit_negative(fe)?;
    solve_unit_negative(fe, opts)
}

fn solve_unit_negative(fe: &FunctionalEquation, opts: &SolveOptions) -> Result<SolutionBundle> {
    let tol = &opts.tol;
    let fe_t = fe.transposed();
    let cut_x = interior_cut(fe, tol)?;
    let cut_y = interior_cut(&fe_t, tol)?;

    let n_min = (tol.bvp_min_samples as usize).max(16);
    let n_max = (tol.bvp_max_samples as usize).max(n_min);
    let mut n = n_min;
    let mut previous: Option<(C64, C64)> = None;
    let mut refinement = Vec::new();
    let mut last_err: Option<Error> = None;
    let mut accepted = None;
    while n <= n_max {
        let level = (|| -> Result<_> {
            let xs = AxisSolution::build(fe, &cut_x, n, tol)?;
            let ys = AxisSolution::build(&fe_t, &cut_y, n, tol)?;
            let pinned = pin(fe, &xs, &ys)?;
            let a = Assembled {
                fe,
                xs: &xs,
                ys: &ys,
                pinned: &pinned,
            };
            let (_, mass) = a.mass()?;
            let probe = C64::new(PROBE, 0.0);
            let values = (a.u(probe)? / mass, a.v(probe)? / mass);
            Ok((xs, ys, pinned, values))
        })();
        match level {
            Ok((xs, ys, pinned, values)) => {
                let change = previous.map(|(pu, pv)| (values.0 - pu).norm().max((values.1 - pv).norm()));
                refinement.push((n, change.unwrap_or(f64::NAN)));
                previous = Some(values);
                last_err = None;
                if change.is_some_and(|c| c < tol.bvp_refine) {
                    accepted = Some((xs, ys, pinned, n));
                    break;
                }
            }
            Err(e) => {
                refinement.push((n, f64::NAN));
                previous = None;
                last_err = Some(e);
            }
        }
        n *= 2;
    }
    let Some((xs, ys, pinned, n)) = accepted else {
        if let Some(e) = last_err {
            return Err(e);
        }
        let last = refinement.last().map_or(f64::NAN, |r| r.1);
        return Err(Error::numerical(
            Stage::Solve,
            format!(
                "refinement did not converge: successive π(0.3) differ by {last:.2e} at {} samples",
                n / 2
            ),
        ));
    };
    finish(fe, xs, ys, pinned, n, refinement, opts)
}

fn finish(
    fe: &FunctionalEquation,
    xs: AxisSolution,
    ys: AxisSolution,
    pinned: Pinned,
    n: usize,
    refinement: Vec<(usize, f64)>,
    opts: &SolveOptions,
) -> Result<SolutionBundle> {
    let a = Assembled {
        fe,
        xs: &xs,
        ys: &ys,
        pinned: &pinned,
    };
    let (interior_raw, mass) = a.mass()?;
    if !(mass > 0.0) {
        return Err(not_ergodic("normalization mass is not positive"));
    }
    let r = torus_radius(fe, &xs, &ys)?;
    let interior_c = interior_series(&a, r, None)?;
    let resid = grid_residual(&a, &interior_c, None)?;

    let order = opts.order;
    let b = fe.bounds;
    let (ax, _) = fe.horizontal[0].anchor;
    let (_, by) = fe.vertical[0].anchor;
    let cu = circle_coefficients(&|x| a.u(x), order + 1, CIRCLE_RADIUS)?;
    let cv = circle_coefficients(&|y| a.v(y), order + 1, CIRCLE_RADIUS)?;
    let mut iso: Vec<_> = fe.isolated.iter().map(|t| t.anchor).collect();
    iso.sort();
    let mut table = vec![vec![0.0; order + 1]; order + 1];
    let mut max_imag: f64 = 0.0;
    for (i, row) in table.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let v = match classify_with_bounds(&b, i, j) {
                HomogeneityClass::Interior => interior_c
                    .get(i)
                    .and_then(|r| r.get(j))
                    .copied()
                    .unwrap_or(ZERO),
                HomogeneityClass::HorizontalStrip(_) => cu[i - ax],
                HomogeneityClass::VerticalStrip(_) => cv[j - by],
                HomogeneityClass::IsolatedPoint(k, l) => {
                    let s = iso.iter().position(|&q| q == (k, l)).unwrap();
                    C64::new(pinned.scalars[s], 0.0)
                }
            } / mass;
            max_imag = max_imag.max(v.im.abs());
            *cell = v.re;
        }
    }
    let interior: Vec<Vec<f64>> = interior_c
        .iter()
        .map(|row| row.iter().map(|c| c.re / mass).collect())
        .collect();
    let min_coefficient = table.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let window_sum: f64 = table.iter().flatten().sum();
    let scalars: Vec<((usize, usize), f64)> = iso
        .iter()
        .zip(&pinned.scalars)
        .map(|(&a, &v)| (a, v / mass))
        .collect();
    let pi00 = scalars[0].1;
    let fe_rel = pinned.kernel_rel.max(resid.max_rel);
    if !(fe_rel <= opts.tol.fe_residual) {
        let mut msg = format!(
            "functional equation residual {fe_rel:.2e} exceeds {:.1e}: no holomorphic solution of the boundary value problem fits",
            opts.tol.fe_residual
        );
        let bad: Vec<String> = inner_collisions(&xs, Plane::X)
            .into_iter()
            .chain(inner_collisions(&ys, Plane::Y))
            .map(|(pl, z)| format!("{} = {z:.4}", pl.name()))
            .collect();
        if !bad.is_empty() {
            msg.push_str(&format!(
                "; the small root has branch points inside the domain at {}",
                bad.join(", ")
            ));
        }
        return Err(Error::numerical(Stage::Solve, msg));
    }
    if min_coefficient < -opts.tol.negativity {
        return Err(Error::numerical(
            Stage::Solve,
            format!("negative probability {min_coefficient:.2e} in the coefficient table"),
        ));
    }
    let residual = ResidualReport {
        grid_points: 400,
        grid_max_relative: resid.max_rel,
        grid_max_absolute: resid.max_abs / mass,
        kernel_max_relative: pinned.kernel_rel,
        min_coefficient,
        max_imag_coefficient: max_imag,
        window_sum,
        total_mass: 1.0,
    };
    Ok(SolutionBundle {
        fe: fe.clone(),
        n_samples: n,
        scalars,
        pi00,
        beta: pinned.beta,
        raw_mass: mass,
        interior_mass: interior_raw / mass,
        pinning_singular_values: pinned.singular.clone(),
        torus_radius: r,
        interior,
        coefficients: table,
        residual,
        refinement,
        x_axis: xs,
        y_axis: ys,
    })
}

impl SolutionBundle {
    fn assembled<'a>(&'a self, pinned: &'a Pinned) -> Assembled<'a> {
        Assembled {
            fe: &self.fe,
            xs: &self.x_axis,
            ys: &self.y_axis,
            pinned,
        }
    }

    fn pinned(&self) -> Pinned {
        let y_index = self
            .fe
            .isolated
            .iter()
            .map(|t| t.anchor)
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .map(|(k, l)| {
                self.y_axis
                    .scalars
                    .iter()
                    .position(|&a| a == (l, k))
                    .expect("transposed anchors match")
            })
            .collect();
        Pinned {
            scalars: self.scalars.iter().map(|s| s.1 * self.raw_mass).collect(),
            beta: self.beta,
            singular: self.pinning_singular_values.clone(),
            kernel_rel: self.residual.kernel_max_relative,
            y_index,
        }
    }

    /// `π(x) = Σ_i π_{i,0} x^{i−a}`, the x-axis generating function.
    pub fn pi_x(&self, x: C64) -> Result<C64> {
        let p = self.pinned();
        Ok(self.assembled(&p).u(x)? / self.raw_mass)
    }

    /// `π̃(y)`, the y-axis generating function.
    pub fn pi_y(&self, y: C64) -> Result<C64> {
        let p = self.pinned();
        Ok(self.assembled(&p).v(y)? / self.raw_mass)
    }

    /// Interior generating function `Σ π_{i,j} x^i y^j` inside the bidisk.
    pub fn pi_xy(&self, x: C64, y: C64) -> Result<C64> {
        if x.norm() >= 1.0 || y.norm() >= 1.0 {
            return Err(Error::Domain("interior evaluator is limited to the open unit bidisk".into()));
        }
        let c: Vec<Vec<C64>> = self
            .interior
            .iter()
            .map(|r| r.iter().map(|&v| C64::new(v, 0.0)).collect())
            .collect();
        Ok(eval_bivariate(&c, x, y))
    }

    pub fn coefficient(&self, i: usize, j: usize) -> Option<f64> {
        self.coefficients.get(i).and_then(|r| r.get(j)).copied()
    }

    /// Taylor coefficients of `π(x)` from a circle of the given radius.
    pub fn taylor_x(&self, radius: f64, count: usize) -> Result<Vec<C64>> {
        circle_coefficients(&|x| self.pi_x(x), count, radius)
    }

    pub fn taylor_y(&self, radius: f64, count: usize) -> Result<Vec<C64>> {
        circle_coefficients(&|y| self.pi_y(y), count, radius)
    }

    /// Grid residual after adding `eps · w(x)²` to the x-axis unknown and
    /// rebuilding the interior from the perturbed data.
    pub fn perturbed_residual(&self, eps: f64) -> Result<f64> {
        let p = self.pinned();
        let a = self.assembled(&p);
        let g = &self.x_axis.gluing;
        let scale = self.raw_mass;
        let bump = move |x: C64| g.eval(x).map(|w| w * w * eps * scale).unwrap_or(ZERO);
        let c = interior_series(&a, self.torus_radius, Some(&bump))?;
        Ok(grid_residual(&a, &c, Some(&bump))?.max_rel)
    }

    /// Sample counts and π(0.3) changes of the refinement.
    pub fn refinement(&self) -> &[(usize, f64)] {
        &self.refinement
    }

    pub fn charts(&self) -> (Chart, Chart) {
        (self.x_axis.curve.chart, self.y_axis.curve.chart)
    }
}
