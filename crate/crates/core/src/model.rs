//! Step models: jump bounds, homogeneity classes, validation and assembly of
//! the functional equation.
//!
//! Every class generator is stored multiplied by `x^{I⁻} y^{J⁻}` and by the
//! monomial of the class's minimal corner, so all stored objects are genuine
//! polynomials and every unknown function starts at degree zero:
//!
//! ```text
//! P(x,y) π(x,y) + Σ_ℓ G'_ℓ(x,y) u_ℓ(x) + Σ_k G''_k(x,y) v_k(y) + Σ G_(k,l)(x,y) π_(k,l) = 0
//! ```
//!
//! with `π(x,y) = Σ_{interior} π_ij x^i y^j`, `u_ℓ(x) = Σ_i π_{i,ℓ} x^{i-a_ℓ}` and
//! `v_k(y) = Σ_j π_{k,j} y^{j-b_k}` where `(a_ℓ, ℓ)` and `(k, b_k)` are the
//! corners of the strips.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use num_complex::Complex64 as C64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::kernel::BiPoly;

/// Maximal jump amplitudes and axis-class offsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpBounds {
    pub i_minus: u32,
    pub i_plus: u32,
    pub j_minus: u32,
    pub j_plus: u32,
    pub i_zero: u32,
    pub j_zero: u32,
}

impl JumpBounds {
    pub fn small_steps() -> Self {
        JumpBounds {
            i_minus: 1,
            i_plus: 1,
            j_minus: 1,
            j_plus: 1,
            i_zero: 1,
            j_zero: 1,
        }
    }

    fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (name, v) in [
            ("i_minus", self.i_minus),
            ("i_plus", self.i_plus),
            ("j_minus", self.j_minus),
            ("j_plus", self.j_plus),
            ("i_zero", self.i_zero),
            ("j_zero", self.j_zero),
        ] {
            if v == 0 {
                out.push(format!("bound {name} must be at least 1"));
            }
        }
        if self.i_zero < self.i_minus {
            out.push(format!(
                "i_zero = {} is smaller than i_minus = {}",
                self.i_zero, self.i_minus
            ));
        }
        if self.j_zero < self.j_minus {
            out.push(format!(
                "j_zero = {} is smaller than j_minus = {}",
                self.j_zero, self.j_minus
            ));
        }
        out
    }

    /// First abscissa of the horizontal strip at height `l`.
    pub fn strip_h_start(&self, l: usize) -> usize {
        if l == 0 {
            self.i_zero as usize
        } else {
            self.i_minus as usize
        }
    }

    /// First ordinate of the vertical strip at abscissa `k`.
    pub fn strip_v_start(&self, k: usize) -> usize {
        if k == 0 {
            self.j_zero as usize
        } else {
            self.j_minus as usize
        }
    }

    /// Isolated points in lexicographic order.
    pub fn isolated_points(&self) -> Vec<(usize, usize)> {
        let mut pts = Vec::new();
        for k in 0..self.i_zero as usize {
            for l in 0..self.j_zero as usize {
                if classify_with_bounds(self, k, l) == HomogeneityClass::IsolatedPoint(k, l) {
                    pts.push((k, l));
                }
            }
        }
        pts
    }

    pub fn is_small_steps(&self) -> bool {
        *self == JumpBounds::small_steps()
    }
}

/// One of the domains of spatial homogeneity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum HomogeneityClass {
    Interior,
    HorizontalStrip(usize),
    VerticalStrip(usize),
    IsolatedPoint(usize, usize),
}

impl fmt::Display for HomogeneityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HomogeneityClass::Interior => write!(f, "interior"),
            HomogeneityClass::HorizontalStrip(l) => write!(f, "horizontal strip {l}"),
            HomogeneityClass::VerticalStrip(k) => write!(f, "vertical strip {k}"),
            HomogeneityClass::IsolatedPoint(k, l) => write!(f, "isolated point ({k},{l})"),
        }
    }
}

impl HomogeneityClass {
    /// Minimal corner of the class.
    pub fn anchor(&self, b: &JumpBounds) -> (usize, usize) {
        match *self {
            HomogeneityClass::Interior => (b.i_minus as usize, b.j_minus as usize),
            HomogeneityClass::HorizontalStrip(l) => (b.strip_h_start(l), l),
            HomogeneityClass::VerticalStrip(k) => (k, b.strip_v_start(k)),
            HomogeneityClass::IsolatedPoint(k, l) => (k, l),
        }
    }
}

/// Transition law of one class: offsets with probabilities, in input order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StepDistribution {
    jumps: Vec<(i32, i32, f64)>,
}

impl StepDistribution {
    pub fn new(jumps: Vec<(i32, i32, f64)>) -> Self {
        StepDistribution { jumps }
    }

    pub fn jumps(&self) -> &[(i32, i32, f64)] {
        &self.jumps
    }

    /// Total probability of the offset (duplicates are added).
    pub fn get(&self, di: i32, dj: i32) -> f64 {
        self.jumps
            .iter()
            .filter(|j| j.0 == di && j.1 == dj)
            .map(|j| j.2)
            .sum()
    }

    pub fn total(&self) -> f64 {
        self.jumps.iter().map(|j| j.2).sum()
    }

    /// Mean displacement.
    pub fn drift(&self) -> (f64, f64) {
        self.jumps.iter().fold((0.0, 0.0), |(a, b), &(di, dj, p)| {
            (a + p * di as f64, b + p * dj as f64)
        })
    }

    fn positive(&self) -> impl Iterator<Item = &(i32, i32, f64)> {
        self.jumps.iter().filter(|j| j.2 > 0.0)
    }

    /// Swaps the roles of the two coordinates.
    pub fn transposed(&self) -> StepDistribution {
        StepDistribution::new(self.jumps.iter().map(|&(a, b, p)| (b, a, p)).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsolatedClass {
    pub k: usize,
    pub l: usize,
    pub jumps: StepDistribution,
}

/// A quarter-plane walk with class-dependent bounded jumps.
///
/// The serde representation is the model file format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepModel {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub bounds: JumpBounds,
    pub interior: StepDistribution,
    pub strips_h: Vec<StepDistribution>,
    pub strips_v: Vec<StepDistribution>,
    pub isolated: Vec<IsolatedClass>,
}

impl StepModel {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serialization cannot fail")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::InvalidModel(format!("cannot read {}: {e}", path.display()))
        })?;
        StepModel::from_json(&text)
    }

    pub fn label(&self) -> &str {
        self.name.as_deref().unwrap_or("model")
    }

    /// Transition law of a class, if present.
    pub fn distribution(&self, class: HomogeneityClass) -> Option<&StepDistribution> {
        match class {
            HomogeneityClass::Interior => Some(&self.interior),
            HomogeneityClass::HorizontalStrip(l) => self.strips_h.get(l),
            HomogeneityClass::VerticalStrip(k) => self.strips_v.get(k),
            HomogeneityClass::IsolatedPoint(k, l) => self
                .isolated
                .iter()
                .find(|c| c.k == k && c.l == l)
                .map(|c| &c.jumps),
        }
    }

    /// Transition law at a state; `None` if the class is missing.
    pub fn distribution_at(&self, i: usize, j: usize) -> Option<&StepDistribution> {
        self.distribution(classify_with_bounds(&self.bounds, i, j))
    }

    /// The model with x and y exchanged.
    pub fn transposed(&self) -> StepModel {
        let b = self.bounds;
        StepModel {
            name: self.name.as_ref().map(|n| format!("{n}^T")),
            bounds: JumpBounds {
                i_minus: b.j_minus,
                i_plus: b.j_plus,
                j_minus: b.i_minus,
                j_plus: b.i_plus,
                i_zero: b.j_zero,
                j_zero: b.i_zero,
            },
            interior: self.interior.transposed(),
            strips_h: self.strips_v.iter().map(|d| d.transposed()).collect(),
            strips_v: self.strips_h.iter().map(|d| d.transposed()).collect(),
            isolated: {
                let mut v: Vec<IsolatedClass> = self
                    .isolated
                    .iter()
                    .map(|c| IsolatedClass {
                        k: c.l,
                        l: c.k,
                        jumps: c.jumps.transposed(),
                    })
                    .collect();
                v.sort_by_key(|c| (c.k, c.l));
                v
            },
        }
    }
}

/// Unique class containing `(i, j)`.
pub fn classify_state(m: &StepModel, i: i64, j: i64) -> Result<HomogeneityClass> {
    if i < 0 || j < 0 {
        return Err(Error::Domain(format!(
            "state ({i},{j}) lies outside the quarter plane"
        )));
    }
    Ok(classify_with_bounds(&m.bounds, i as usize, j as usize))
}

pub fn classify_with_bounds(b: &JumpBounds, i: usize, j: usize) -> HomogeneityClass {
    let (im, jm) = (b.i_minus as usize, b.j_minus as usize);
    if i >= im && j >= jm {
        HomogeneityClass::Interior
    } else if j < jm && i >= b.strip_h_start(j) {
        HomogeneityClass::HorizontalStrip(j)
    } else if i < im && j >= b.strip_v_start(i) {
        HomogeneityClass::VerticalStrip(i)
    } else {
        HomogeneityClass::IsolatedPoint(i, j)
    }
}

/// Errors are fatal, warnings are advisory.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.errors.is_empty() && self.warnings.is_empty() {
            return writeln!(f, "model is well-formed");
        }
        for e in &self.errors {
            writeln!(f, "error: {e}")?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}

pub fn validate_model(m: &StepModel) -> ValidationReport {
    validate_model_with(m, &Tolerances::default())
}

pub fn validate_model_with(m: &StepModel, tol: &Tolerances) -> ValidationReport {
    let mut rep = ValidationReport::default();
    let b = m.bounds;
    rep.errors.extend(b.problems());
    if !rep.errors.is_empty() {
        return rep;
    }

    let mut classes = vec![(HomogeneityClass::Interior, Some(&m.interior))];
    let jm = b.j_minus as usize;
    let im = b.i_minus as usize;
    if m.strips_h.len() != jm {
        rep.errors.push(format!(
            "expected {jm} horizontal strip distributions, found {}",
            m.strips_h.len()
        ));
    }
    if m.strips_v.len() != im {
        rep.errors.push(format!(
            "expected {im} vertical strip distributions, found {}",
            m.strips_v.len()
        ));
    }
    for l in 0..m.strips_h.len().min(jm) {
        classes.push((HomogeneityClass::HorizontalStrip(l), m.strips_h.get(l)));
    }
    for k in 0..m.strips_v.len().min(im) {
        classes.push((HomogeneityClass::VerticalStrip(k), m.strips_v.get(k)));
    }

    let expected = b.isolated_points();
    let mut seen = BTreeMap::new();
    for c in &m.isolated {
        *seen.entry((c.k, c.l)).or_insert(0usize) += 1;
    }
    for (&(k, l), &n) in &seen {
        if n > 1 {
            rep.errors
                .push(format!("isolated point ({k},{l}) is given {n} times"));
        }
        if !expected.contains(&(k, l)) {
            let class = classify_with_bounds(&b, k, l);
            rep.errors.push(format!(
                "({k},{l}) is not an isolated point for these bounds (it belongs to the {class})"
            ));
        }
    }
    for &(k, l) in &expected {
        match m.isolated.iter().find(|c| c.k == k && c.l == l) {
            Some(c) => classes.push((HomogeneityClass::IsolatedPoint(k, l), Some(&c.jumps))),
            None => rep
                .errors
                .push(format!("missing distribution for isolated point ({k},{l})")),
        }
    }

    for (class, dist) in classes {
        let Some(d) = dist else { continue };
        check_distribution(&b, class, d, tol, &mut rep);
    }

    let pos: Vec<_> = m.interior.positive().collect();
    if !pos.iter().any(|j| j.0 < 0) || !pos.iter().any(|j| j.1 < 0) {
        rep.warnings
            .push("no negative drift possible — ergodicity doubtful".to_string());
    }
    if !pos.is_empty() {
        let min_i = pos.iter().map(|j| j.0).min().unwrap();
        let max_i = pos.iter().map(|j| j.0).max().unwrap();
        let min_j = pos.iter().map(|j| j.1).min().unwrap();
        let max_j = pos.iter().map(|j| j.1).max().unwrap();
        for (name, bound, got) in [
            ("i_minus", b.i_minus as i32, -min_i),
            ("i_plus", b.i_plus as i32, max_i),
            ("j_minus", b.j_minus as i32, -min_j),
            ("j_plus", b.j_plus as i32, max_j),
        ] {
            if got < bound {
                rep.warnings.push(format!(
                    "bound {name} = {bound} is not attained by the interior jumps (largest is {})",
                    got.max(0)
                ));
            }
        }
    }
    rep
}

fn check_distribution(
    b: &JumpBounds,
    class: HomogeneityClass,
    d: &StepDistribution,
    tol: &Tolerances,
    rep: &mut ValidationReport,
) {
    let mut offsets = BTreeMap::new();
    for &(di, dj, p) in d.jumps() {
        if !p.is_finite() || !(0.0..=1.0).contains(&p) {
            rep.errors.push(format!(
                "{class}: probability {p} of jump ({di},{dj}) is outside [0,1]"
            ));
        }
        *offsets.entry((di, dj)).or_insert(0usize) += 1;
    }
    for (&(di, dj), &n) in &offsets {
        if n > 1 {
            rep.errors
                .push(format!("{class}: jump ({di},{dj}) is listed {n} times"));
        }
    }
    let total = d.total();
    if !total.is_finite() || (total - 1.0).abs() > tol.prob_sum {
        rep.errors.push(format!(
            "{class}: probabilities sum to {total} ≠ 1"
        ));
    }
    let (a0, b0) = class.anchor(b);
    for &(di, dj, p) in d.jumps() {
        if p == 0.0 {
            continue;
        }
        if class == HomogeneityClass::Interior {
            if di < -(b.i_minus as i32) || di > b.i_plus as i32 {
                rep.errors.push(format!(
                    "interior: jump ({di},{dj}) violates -{} <= di <= {}",
                    b.i_minus, b.i_plus
                ));
            }
            if dj < -(b.j_minus as i32) || dj > b.j_plus as i32 {
                rep.errors.push(format!(
                    "interior: jump ({di},{dj}) violates -{} <= dj <= {}",
                    b.j_minus, b.j_plus
                ));
            }
        }
        if (a0 as i64) + (di as i64) < 0 || (b0 as i64) + (dj as i64) < 0 {
            rep.errors.push(format!(
                "{class}: jump ({di},{dj}) leaves the quarter plane from ({a0},{b0})"
            ));
        }
    }
}

/// Generator of one class together with the monomial shift of its unknown.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassTerm {
    pub class: HomogeneityClass,
    pub anchor: (usize, usize),
    pub generator: BiPoly,
}

/// Coefficient polynomials of the functional equation.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalEquation {
    pub bounds: JumpBounds,
    /// `P = x^{I⁻} y^{J⁻} R`.
    pub interior_gen: BiPoly,
    /// One per horizontal strip; multiplies `u_ℓ(x)`.
    pub horizontal: Vec<ClassTerm>,
    /// One per vertical strip; multiplies `v_k(y)`.
    pub vertical: Vec<ClassTerm>,
    /// One per isolated point; multiplies the scalar `π_(k,l)`.
    pub isolated: Vec<ClassTerm>,
}

impl FunctionalEquation {
    pub fn unknown_function_count(&self) -> usize {
        self.horizontal.len() + self.vertical.len()
    }

    pub fn scalar_count(&self) -> usize {
        self.isolated.len()
    }

    pub fn class_terms(&self) -> impl Iterator<Item = &ClassTerm> {
        self.horizontal
            .iter()
            .chain(&self.vertical)
            .chain(&self.isolated)
    }

    pub fn transposed(&self) -> FunctionalEquation {
        let b = self.bounds;
        let tr = |t: &ClassTerm| ClassTerm {
            class: match t.class {
                HomogeneityClass::Interior => HomogeneityClass::Interior,
                HomogeneityClass::HorizontalStrip(l) => HomogeneityClass::VerticalStrip(l),
                HomogeneityClass::VerticalStrip(k) => HomogeneityClass::HorizontalStrip(k),
                HomogeneityClass::IsolatedPoint(k, l) => HomogeneityClass::IsolatedPoint(l, k),
            },
            anchor: (t.anchor.1, t.anchor.0),
            generator: t.generator.transpose(),
        };
        let mut isolated: Vec<ClassTerm> = self.isolated.iter().map(tr).collect();
        isolated.sort_by_key(|t| t.anchor);
        FunctionalEquation {
            bounds: JumpBounds {
                i_minus: b.j_minus,
                i_plus: b.j_plus,
                j_minus: b.i_minus,
                j_plus: b.i_plus,
                i_zero: b.j_zero,
                j_zero: b.i_zero,
            },
            interior_gen: self.interior_gen.transpose(),
            horizontal: self.vertical.iter().map(tr).collect(),
            vertical: self.horizontal.iter().map(tr).collect(),
            isolated,
        }
    }

    /// Left-hand side of the equation for a finite table `pi[i][j]`, with
    /// every generating function truncated to the table.
    pub fn residual_for_table(&self, pi: &[Vec<f64>], x: C64, y: C64) -> (C64, f64) {
        let b = self.bounds;
        let mut total = C64::new(0.0, 0.0);
        let mut scale = 0.0;
        let mut add = |g: &BiPoly, f: C64, fabs: f64| {
            let gv = g.eval(x, y);
            total += gv * f;
            scale += g.abs_eval(x, y) * fabs;
        };
        let (im, jm) = (b.i_minus as usize, b.j_minus as usize);
        let mut int = C64::new(0.0, 0.0);
        let mut int_abs = 0.0;
        for (i, row) in pi.iter().enumerate().skip(im) {
            for (j, &p) in row.iter().enumerate().skip(jm) {
                int += p * x.powu(i as u32) * y.powu(j as u32);
                int_abs += p.abs() * x.norm().powi(i as i32) * y.norm().powi(j as i32);
            }
        }
        add(&self.interior_gen, int, int_abs);
        for t in &self.horizontal {
            let (a, l) = t.anchor;
            let (f, fa) = series_along(pi.iter().skip(a).map(|r| r.get(l).copied().unwrap_or(0.0)), x);
            add(&t.generator, f, fa);
        }
        for t in &self.vertical {
            let (k, bb) = t.anchor;
            let row = pi.get(k).map(|r| r.as_slice()).unwrap_or(&[]);
            let (f, fa) = series_along(row.iter().skip(bb).copied(), y);
            add(&t.generator, f, fa);
        }
        for t in &self.isolated {
            let (k, l) = t.anchor;
            let p = pi.get(k).and_then(|r| r.get(l)).copied().unwrap_or(0.0);
            add(&t.generator, C64::new(p, 0.0), p.abs());
        }
        (total, scale)
    }
}

fn series_along(coeffs: impl Iterator<Item = f64>, t: C64) -> (C64, f64) {
    let mut pw = C64::new(1.0, 0.0);
    let mut s = C64::new(0.0, 0.0);
    let mut sa = 0.0;
    for c in coeffs {
        s += pw * c;
        sa += c.abs() * pw.norm();
        pw *= t;
    }
    (s, sa)
}

/// `x^{I⁻+a} y^{J⁻+b} (−1 + Σ p x^di y^dj)`.
fn class_generator(b: &JumpBounds, d: &StepDistribution, anchor: (usize, usize)) -> BiPoly {
    let ox = b.i_minus as i64 + anchor.0 as i64;
    let oy = b.j_minus as i64 + anchor.1 as i64;
    let mut terms = vec![(ox as usize, oy as usize, C64::new(-1.0, 0.0))];
    for &(di, dj, p) in d.jumps() {
        if p == 0.0 {
            continue;
        }
        terms.push((
            (ox + di as i64) as usize,
            (oy + dj as i64) as usize,
            C64::new(p, 0.0),
        ));
    }
    BiPoly::from_terms(terms)
}

pub fn assemble_functional_equation(m: &StepModel) -> Result<FunctionalEquation> {
    let rep = validate_model(m);
    if !rep.is_ok() {
        return Err(Error::InvalidModel(rep.errors.join("; ")));
    }
    let b = m.bounds;
    let term = |class: HomogeneityClass, d: &StepDistribution, anchor: (usize, usize)| ClassTerm {
        class,
        anchor,
        generator: class_generator(&b, d, anchor),
    };
    let interior_gen = class_generator(&b, &m.interior, (0, 0));
    let horizontal = m
        .strips_h
        .iter()
        .enumerate()
        .map(|(l, d)| {
            let c = HomogeneityClass::HorizontalStrip(l);
            term(c, d, c.anchor(&b))
        })
        .collect();
    let vertical = m
        .strips_v
        .iter()
        .enumerate()
        .map(|(k, d)| {
            let c = HomogeneityClass::VerticalStrip(k);
            term(c, d, c.anchor(&b))
        })
        .collect();
    let isolated = b
        .isolated_points()
        .into_iter()
        .map(|(k, l)| {
            let c = HomogeneityClass::IsolatedPoint(k, l);
            term(c, m.distribution(c).expect("validated"), (k, l))
        })
        .collect();
    Ok(FunctionalEquation {
        bounds: b,
        interior_gen,
        horizontal,
        vertical,
        isolated,
    })
}

/// Ergodicity of a small-step model by the classical drift conditions.
/// `None` when the interior drift is not negative in both coordinates.
pub fn small_step_ergodic(m: &StepModel) -> Option<bool> {
    if !m.bounds.is_small_steps() {
        return None;
    }
    let (mx, my) = m.interior.drift();
    let (_, my1) = m.strips_h.first()?.drift();
    let (mx1, _) = m.strips_h.first()?.drift();
    let (mx2, my2) = m.strips_v.first()?.drift();
    if !(mx < 0.0 && my < 0.0) {
        return None;
    }
    Some(mx * my1 - my * mx1 < 0.0 && my * mx2 - mx * my2 < 0.0)
}

fn random_distribution<R: Rng>(
    rng: &mut R,
    di: std::ops::RangeInclusive<i32>,
    dj: std::ops::RangeInclusive<i32>,
    required: &[(i32, i32)],
    density: f64,
) -> StepDistribution {
    let mut raw: Vec<(i32, i32, f64)> = Vec::new();
    for a in di.clone() {
        for c in dj.clone() {
            let forced = required.contains(&(a, c));
            if forced || rng.random::<f64>() < density {
                raw.push((a, c, 0.05 + rng.random::<f64>()));
            }
        }
    }
    if raw.is_empty() {
        raw.push((*di.end(), *dj.end(), 1.0));
    }
    normalize(raw)
}

fn normalize(mut raw: Vec<(i32, i32, f64)>) -> StepDistribution {
    let s: f64 = raw.iter().map(|j| j.2).sum();
    for j in raw.iter_mut() {
        j.2 /= s;
    }
    // Put the rounding residue on the largest weight so the sum is exact to
    // within one ulp.
    let resid = 1.0 - raw.iter().map(|j| j.2).sum::<f64>();
    if let Some(big) = raw
        .iter_mut()
        .max_by(|a, b| a.2.total_cmp(&b.2))
    {
        big.2 += resid;
    }
    StepDistribution::new(raw)
}

/// Random well-formed model for the given bounds. Interior jumps attain every
/// bound; boundary classes use jumps of amplitude at most one in the
/// directions allowed by their position.
pub fn random_model_with_bounds<R: Rng>(rng: &mut R, b: JumpBounds) -> StepModel {
    let (im, ip, jm, jp) = (
        b.i_minus as i32,
        b.i_plus as i32,
        b.j_minus as i32,
        b.j_plus as i32,
    );
    let interior = random_distribution(
        rng,
        -im..=ip,
        -jm..=jp,
        &[(-im, 0), (ip, 0), (0, -jm), (0, jp)],
        0.5,
    );
    let boundary = |rng: &mut R, a: usize, c: usize| {
        let lo_i = -(a.min(1) as i32);
        let lo_j = -(c.min(1) as i32);
        random_distribution(rng, lo_i..=1, lo_j..=1, &[], 0.6)
    };
    let strips_h = (0..b.j_minus as usize)
        .map(|l| boundary(rng, b.strip_h_start(l), l))
        .collect();
    let strips_v = (0..b.i_minus as usize)
        .map(|k| boundary(rng, k, b.strip_v_start(k)))
        .collect();
    let isolated = b
        .isolated_points()
        .into_iter()
        .map(|(k, l)| IsolatedClass {
            k,
            l,
            jumps: boundary(rng, k, l),
        })
        .collect();
    StepModel {
        name: None,
        bounds: b,
        interior,
        strips_h,
        strips_v,
        isolated,
    }
}

/// Random bounds with each amplitude in `1..=max` and axis offsets equal to
/// the negative amplitudes or one more.
pub fn random_bounds<R: Rng>(rng: &mut R, max: u32) -> JumpBounds {
    let im = rng.random_range(1..=max);
    let jm = rng.random_range(1..=max);
    JumpBounds {
        i_minus: im,
        i_plus: rng.random_range(1..=max),
        j_minus: jm,
        j_plus: rng.random_range(1..=max),
        i_zero: im + rng.random_range(0..=1),
        j_zero: jm + rng.random_range(0..=1),
    }
}

pub fn random_model<R: Rng>(rng: &mut R, max_amplitude: u32) -> StepModel {
    let b = random_bounds(rng, max_amplitude);
    random_model_with_bounds(rng, b)
}

/// Random small-step model with all nine interior jumps present.
pub fn random_small_step_model<R: Rng>(rng: &mut R) -> StepModel {
    let b = JumpBounds::small_steps();
    let interior = random_distribution(rng, -1..=1, -1..=1, &[], 2.0);
    let mut m = random_model_with_bounds(rng, b);
    m.interior = interior;
    m
}

/// Random ergodic small-step model (rejection sampling on the drift
/// conditions, with the interior biased towards the origin).
pub fn random_ergodic_small_step_model<R: Rng>(rng: &mut R) -> StepModel {
    loop {
        let mut raw = Vec::new();
        for a in -1..=1 {
            for c in -1..=1 {
                let bias = 1.0 + 1.5 * ((a < 0) as i32 + (c < 0) as i32) as f64;
                raw.push((a, c, (0.05 + rng.random::<f64>()) * bias));
            }
        }
        let mut m = random_model_with_bounds(rng, JumpBounds::small_steps());
        m.interior = normalize(raw);
        m.strips_h[0] = normalize(
            [(-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)]
                .iter()
                .map(|&(a, c)| {
                    let w = if a < 0 { 2.0 } else { 1.0 };
                    (a, c, (0.05 + rng.random::<f64>()) * w)
                })
                .collect(),
        );
        m.strips_v[0] = normalize(
            [(0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]
                .iter()
                .map(|&(a, c)| {
                    let w = if c < 0 { 2.0 } else { 1.0 };
                    (a, c, (0.05 + rng.random::<f64>()) * w)
                })
                .collect(),
        );
        if small_step_ergodic(&m) == Some(true) {
            return m;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figure_partition_has_six_isolated_points() {
        let b = JumpBounds {
            i_minus: 2,
            i_plus: 1,
            j_minus: 2,
            j_plus: 1,
            i_zero: 3,
            j_zero: 3,
        };
        let pts = b.isolated_points();
        assert_eq!(pts, vec![(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (2, 0)]);
        assert_eq!(classify_with_bounds(&b, 5, 7), HomogeneityClass::Interior);
        assert_eq!(
            classify_with_bounds(&b, 3, 0),
            HomogeneityClass::HorizontalStrip(0)
        );
        assert_eq!(
            classify_with_bounds(&b, 2, 1),
            HomogeneityClass::HorizontalStrip(1)
        );
        assert_eq!(
            classify_with_bounds(&b, 1, 2),
            HomogeneityClass::VerticalStrip(1)
        );
    }

    #[test]
    fn negative_coordinates_are_a_domain_error() {
        let m = crate::fixtures::m1();
        assert!(matches!(classify_state(&m, -1, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn bad_bounds_are_reported() {
        let mut m = crate::fixtures::m1();
        m.bounds.i_zero = 0;
        let rep = validate_model(&m);
        assert!(!rep.is_ok());
    }
}
