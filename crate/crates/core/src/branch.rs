//! Branch points of the algebraic functions defined by the kernel, their
//! position relative to the unit disk, pairing into cuts, and the genus of
//! the kernel curve.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::config::Tolerances;
use crate::error::{Error, Result, Stage};
use crate::kernel::{branch_count_bound, cluster_roots, discriminant, BiPoly, Plane, Poly};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiskPosition {
    Inside,
    Outside,
    OnCircle,
}

impl DiskPosition {
    pub fn name(self) -> &'static str {
        match self {
            DiskPosition::Inside => "interior",
            DiskPosition::Outside => "exterior",
            DiskPosition::OnCircle => "on-circle",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchPoint {
    pub location: C64,
    pub plane: Plane,
    pub multiplicity: usize,
    pub position: DiskPosition,
    /// The coinciding root in the other variable; `None` when the
    /// collision happens at infinity.
    pub fiber_collision: Option<C64>,
}

impl BranchPoint {
    pub fn is_real(&self, tol: f64) -> bool {
        self.location.im.abs() < tol * self.location.norm().max(1.0)
    }
}

/// All finite branch points of one plane.
#[derive(Debug, Clone, Serialize)]
pub struct BranchSet {
    pub plane: Plane,
    pub points: Vec<BranchPoint>,
    /// Degree deficit of the discriminant: roots at infinity.
    pub at_infinity: usize,
    /// Upper bound on the number of branch points for this plane.
    pub bound: usize,
    #[serde(skip)]
    pub discriminant: Poly,
}

impl BranchSet {
    /// Finite branch points counted with multiplicity.
    pub fn finite_count(&self) -> usize {
        self.points.iter().map(|p| p.multiplicity).sum()
    }

    pub fn interior_count(&self) -> usize {
        self.points
            .iter()
            .filter(|p| p.position == DiskPosition::Inside)
            .map(|p| p.multiplicity)
            .sum()
    }
}

fn position(z: C64, tol: &Tolerances) -> DiskPosition {
    let r = z.norm();
    if (r - 1.0).abs() < tol.on_circle {
        DiskPosition::OnCircle
    } else if r < 1.0 {
        DiskPosition::Inside
    } else {
        DiskPosition::Outside
    }
}

/// Branch points in `plane`: roots of the discriminant of `P` with respect
/// to the other variable, with merged multiplicities.
pub fn find_branch_points(p: &BiPoly, plane: Plane, tol: &Tolerances) -> Result<BranchSet> {
    let disc = discriminant(p, plane)?;
    let roots = disc.roots();
    let bound = branch_count_bound(p, plane);
    let clusters = cluster_roots(&roots, tol.root_merge);
    let points = clusters
        .into_iter()
        .map(|(z, m)| BranchPoint {
            location: z,
            plane,
            multiplicity: m,
            position: position(z, tol),
            fiber_collision: fiber_collision(p, plane, z),
        })
        .collect::<Vec<_>>();
    let finite: usize = points.iter().map(|p| p.multiplicity).sum();
    Ok(BranchSet {
        plane,
        points,
        at_infinity: bound.saturating_sub(finite),
        bound,
        discriminant: disc,
    })
}

/// Double root of the fiber over a branch point.
fn fiber_collision(p: &BiPoly, plane: Plane, z: C64) -> Option<C64> {
    let coeffs = p.coeffs_over(plane);
    let nominal = coeffs.len().saturating_sub(1);
    let vals: Vec<C64> = coeffs.iter().map(|c| c.eval(z)).collect();
    let scale: f64 = coeffs
        .iter()
        .map(|c| c.abs_eval(z))
        .fold(0.0, f64::max)
        .max(1e-300);
    let mut deg = nominal;
    while deg > 0 && vals[deg].norm() < 1e-9 * scale {
        deg -= 1;
    }
    if nominal - deg >= 2 {
        return None;
    }
    let roots = Poly::new(vals[..=deg].to_vec()).roots();
    let mut best: Option<(f64, C64)> = None;
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            let d = (roots[i] - roots[j]).norm();
            if best.is_none_or(|b| d < b.0) {
                best = Some((d, (roots[i] + roots[j]) / 2.0));
            }
        }
    }
    // A single finite root left over with a deficit of one: the partner
    // escaped to infinity.
    if nominal - deg == 1 {
        return None;
    }
    best.map(|b| b.1)
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Classification {
    pub interior: Vec<BranchPoint>,
    pub exterior: Vec<BranchPoint>,
    pub boundary: Vec<BranchPoint>,
}

/// Splits points by modulus; any point on the unit circle is an error.
pub fn classify_branch_points(points: &[BranchPoint]) -> Result<Classification> {
    let mut c = Classification::default();
    for p in points {
        match p.position {
            DiskPosition::Inside => c.interior.push(p.clone()),
            DiskPosition::Outside => c.exterior.push(p.clone()),
            DiskPosition::OnCircle => c.boundary.push(p.clone()),
        }
    }
    if let Some(b) = c.boundary.first() {
        return Err(Error::numerical(
            Stage::Branch,
            format!(
                "branch point on unit circle — model at ergodicity boundary ({} at {:.12}{:+.12}i)",
                b.plane.name(),
                b.location.re,
                b.location.im
            ),
        ));
    }
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CutKind {
    Real,
    Conjugate,
}

/// Straight segment between two paired branch points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutSegment {
    pub start: BranchPoint,
    pub end: BranchPoint,
    pub kind: CutKind,
}

impl CutSegment {
    pub fn plane(&self) -> Plane {
        self.start.plane
    }

    /// Point at parameter `s ∈ [0,1]`.
    pub fn point(&self, s: f64) -> C64 {
        self.start.location + (self.end.location - self.start.location) * s
    }

    /// Point reached at angle `θ` of the closed parametrization
    /// `start → end → start` with cosine spacing.
    pub fn point_at_angle(&self, th: f64) -> C64 {
        self.point((1.0 - th.cos()) / 2.0)
    }

    pub fn contains(&self, z: C64, tol: f64) -> bool {
        let a = self.start.location;
        let d = self.end.location - a;
        let len2 = d.norm_sqr();
        if len2 == 0.0 {
            return (z - a).norm() < tol;
        }
        let s = ((z - a) * d.conj()).re / len2;
        let s = s.clamp(0.0, 1.0);
        (self.point(s) - z).norm() < tol * d.norm().max(1.0)
    }
}

/// Pairs interior points into real and conjugate cuts.
pub fn pair_cuts(points: &[BranchPoint], tol: &Tolerances) -> Result<Vec<CutSegment>> {
    let total: usize = points.iter().map(|p| p.multiplicity).sum();
    if !total.is_multiple_of(2) {
        return Err(Error::numerical(
            Stage::Branch,
            format!("cut pairing failed: odd number ({total}) of interior branch points"),
        ));
    }
    let mut real: Vec<&BranchPoint> = points
        .iter()
        .filter(|p| p.is_real(tol.real_axis))
        .collect();
    real.sort_by(|a, b| a.location.re.total_cmp(&b.location.re));
    let mut cuts = Vec::new();
    let mut leftovers = Vec::new();
    let mut k = 0;
    while k < real.len() {
        if k + 1 < real.len() {
            let (a, b) = (real[k], real[k + 1]);
            cuts.push(CutSegment {
                start: snap_real(a),
                end: snap_real(b),
                kind: CutKind::Real,
            });
            k += 2;
        } else {
            leftovers.push(real[k].clone());
            k += 1;
        }
    }
    let upper: Vec<&BranchPoint> = points
        .iter()
        .filter(|p| !p.is_real(tol.real_axis) && p.location.im > 0.0)
        .collect();
    let lower: Vec<&BranchPoint> = points
        .iter()
        .filter(|p| !p.is_real(tol.real_axis) && p.location.im < 0.0)
        .collect();
    let mut used = vec![false; lower.len()];
    for u in upper {
        let mirror = u.location.conj();
        let found = lower
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .map(|(i, l)| (i, (l.location - mirror).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        match found {
            Some((i, d)) if d < tol.conjugate_pair * u.location.norm().max(1.0) => {
                used[i] = true;
                cuts.push(CutSegment {
                    start: u.clone(),
                    end: lower[i].clone(),
                    kind: CutKind::Conjugate,
                });
            }
            _ => leftovers.push(u.clone()),
        }
    }
    for (i, l) in lower.iter().enumerate() {
        if !used[i] {
            leftovers.push((*l).clone());
        }
    }
    if !leftovers.is_empty() {
        let list: Vec<String> = leftovers
            .iter()
            .map(|p| format!("{:.10}{:+.10}i", p.location.re, p.location.im))
            .collect();
        return Err(Error::numerical(
            Stage::Branch,
            format!("cut pairing failed: no partner for {}", list.join(", ")),
        ));
    }
    Ok(cuts)
}

fn snap_real(p: &BranchPoint) -> BranchPoint {
    let mut q = p.clone();
    q.location = C64::new(p.location.re, 0.0);
    q
}

/// Number of zeros of `f` inside the unit disk by the argument principle,
/// from `samples` points on the circle.
pub fn zeros_inside_unit_circle(f: &Poly, samples: usize) -> i64 {
    let mut total = 0.0;
    let mut prev = f.eval(C64::new(1.0, 0.0));
    for k in 1..=samples {
        let z = C64::from_polar(1.0, 2.0 * PI * k as f64 / samples as f64);
        let v = f.eval(z);
        total += (v / prev).arg();
        prev = v;
    }
    (total / (2.0 * PI)).round() as i64
}

/// Local and global monodromy data of the kernel seen as a covering of the
/// sphere of one variable.
#[derive(Debug, Clone, Serialize)]
pub struct CoveringData {
    /// The variable of the base of the covering.
    pub base: Plane,
    pub degree: usize,
    /// Special base points with the cycle lengths of their local monodromy.
    pub special: Vec<(C64, Vec<usize>)>,
    pub at_infinity: Vec<usize>,
    /// Total ramification `Σ (e − 1)`.
    pub ramification: usize,
    pub transitive: bool,
    pub genus: i64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GenusReport {
    pub genus: i64,
    pub over_x: CoveringData,
    pub over_y: CoveringData,
}

/// Genus of the kernel curve from the Riemann–Hurwitz formula, with
/// ramification indices measured by numerical monodromy. The covering over
/// each variable is computed independently and the two must agree.
pub fn genus(p: &BiPoly, tol: &Tolerances) -> Result<GenusReport> {
    let over_x = covering(p, Plane::X, tol)?;
    let over_y = covering(&p.transpose(), Plane::X, tol).map(|mut c| {
        c.base = Plane::Y;
        c
    })?;
    if !over_x.transitive || !over_y.transitive {
        return Err(Error::numerical(
            Stage::Genus,
            "kernel is reducible (monodromy group is not transitive)",
        ));
    }
    if over_x.genus != over_y.genus {
        return Err(Error::numerical(
            Stage::Genus,
            format!(
                "genus mismatch between coverings: {} over x, {} over y",
                over_x.genus, over_y.genus
            ),
        ));
    }
    Ok(GenusReport {
        genus: over_x.genus,
        over_x,
        over_y,
    })
}

/// Fiber roots in y over base value x.
fn fiber(p: &BiPoly, x: C64) -> Vec<C64> {
    p.fiber_at_x(x).roots()
}

/// Covering `(x, y) ↦ x` of degree `deg_y P`.
fn covering(p: &BiPoly, _base: Plane, tol: &Tolerances) -> Result<CoveringData> {
    let degree = p.y_degree();
    if degree == 0 {
        return Err(Error::numerical(Stage::Genus, "kernel has no fiber"));
    }
    let disc = discriminant(p, Plane::X)?;
    let mut special: Vec<C64> = disc.roots();
    let lead = p.coeffs_in_y().pop().unwrap_or_default();
    special.extend(lead.roots());
    let special: Vec<C64> = cluster_roots(&special, tol.root_merge.max(1e-9))
        .into_iter()
        .map(|(z, _)| z)
        .collect();

    let radius: Vec<f64> = special
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let d = special
                .iter()
                .enumerate()
                .filter(|(m, _)| *m != k)
                .map(|(_, t)| (s - t).norm())
                .fold(f64::INFINITY, f64::min);
            0.25 * d.min(1.0)
        })
        .collect();

    let far = special.iter().map(|s| s.norm()).fold(0.0, f64::max) + 1.0;
    let centre = if special.is_empty() {
        C64::new(0.0, 0.0)
    } else {
        special.iter().sum::<C64>() / special.len() as f64
    };
    let base = pick_base_point(&special, &radius, centre, far);
    let base_roots = fiber(p, base);
    if base_roots.len() != degree {
        return Err(Error::numerical(
            Stage::Genus,
            "fiber over the base point has the wrong size",
        ));
    }

    let mut perms = Vec::new();
    let mut local = Vec::new();
    for (k, &s) in special.iter().enumerate() {
        let rho = radius[k];
        let dir = (base - s) / (base - s).norm();
        let entry = s + dir * rho;
        let phi0 = dir.arg();
        let mut roots = track(p, |t| base + (entry - base) * t, base_roots.clone())?;
        roots = track(
            p,
            |t| s + C64::from_polar(rho, phi0 + 2.0 * PI * t),
            roots,
        )?;
        roots = track(p, |t| entry + (base - entry) * t, roots)?;
        let perm = match_permutation(&base_roots, &roots)?;
        local.push((s, cycle_lengths(&perm)));
        perms.push(perm);
    }
    let big = 2.0 * far + 2.0;
    let start = C64::new(big, 0.0);
    let r0 = fiber(p, start);
    let r1 = track(p, |t| C64::from_polar(big, 2.0 * PI * t), r0.clone())?;
    let inf_perm = match_permutation(&r0, &r1)?;
    let at_infinity = cycle_lengths(&inf_perm);

    let ram: usize = local
        .iter()
        .map(|(_, c)| degree - c.len())
        .sum::<usize>()
        + (degree - at_infinity.len());
    if !ram.is_multiple_of(2) {
        return Err(Error::numerical(
            Stage::Genus,
            format!("odd total ramification {ram}; monodromy is unreliable"),
        ));
    }
    let transitive = is_transitive(&perms, degree);
    Ok(CoveringData {
        base: Plane::X,
        degree,
        special: local,
        at_infinity,
        ramification: ram,
        transitive,
        genus: 1 - degree as i64 + (ram / 2) as i64,
    })
}

/// Base point on a large circle whose straight paths to all special points
/// keep clear of the other special points.
fn pick_base_point(special: &[C64], radius: &[f64], centre: C64, far: f64) -> C64 {
    let mut best = (f64::NEG_INFINITY, centre + C64::new(0.0, -far));
    for a in 0..48 {
        let phi = -PI / 2.0 + 0.1234 + 2.0 * PI * a as f64 / 48.0;
        let b = centre + C64::from_polar(far + 1.0, phi);
        let mut clearance = f64::INFINITY;
        for (k, &s) in special.iter().enumerate() {
            let entry = s + (b - s) / (b - s).norm() * radius[k];
            for (m, &t) in special.iter().enumerate() {
                if m != k {
                    clearance = clearance.min(segment_distance(b, entry, t) / radius[m]);
                }
            }
        }
        if clearance > best.0 {
            best = (clearance, b);
        }
        if clearance > 2.0 {
            break;
        }
    }
    best.1
}

fn segment_distance(a: C64, b: C64, z: C64) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (z - a).norm();
    }
    let s = (((z - a) * d.conj()).re / len2).clamp(0.0, 1.0);
    (a + d * s - z).norm()
}

/// Continues the fiber roots along `path(t)`, `t ∈ [0,1]`.
fn track(p: &BiPoly, path: impl Fn(f64) -> C64, mut roots: Vec<C64>) -> Result<Vec<C64>> {
    let mut t = 0.0;
    let mut dt: f64 = 1.0 / 64.0;
    while t < 1.0 {
        let step = dt.min(1.0 - t);
        let next = fiber(p, path(t + step));
        match assign(&roots, &next) {
            Some(m) => {
                roots = m;
                t += step;
                dt = (dt * 1.5).min(1.0 / 16.0);
            }
            None => {
                dt = step / 2.0;
                if dt < 1e-12 {
                    return Err(Error::numerical(
                        Stage::Genus,
                        format!("monodromy tracking stalled near {}", path(t)),
                    ));
                }
            }
        }
    }
    Ok(roots)
}

/// Nearest-neighbour assignment accepted only when every move is small
/// compared to the separation of the roots.
fn assign(prev: &[C64], next: &[C64]) -> Option<Vec<C64>> {
    if prev.len() != next.len() {
        return None;
    }
    let n = prev.len();
    let mut out = Vec::with_capacity(n);
    let mut used = vec![false; n];
    for (i, &a) in prev.iter().enumerate() {
        let sep = prev
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, &b)| (a - b).norm())
            .fold(f64::INFINITY, f64::min);
        let (j, d) = next
            .iter()
            .enumerate()
            .map(|(j, &b)| (j, (a - b).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))?;
        if used[j] || d > 0.25 * sep {
            return None;
        }
        used[j] = true;
        out.push(next[j]);
    }
    Some(out)
}

fn match_permutation(base: &[C64], end: &[C64]) -> Result<Vec<usize>> {
    let mut perm = Vec::with_capacity(base.len());
    for &e in end {
        let (j, _) = base
            .iter()
            .enumerate()
            .map(|(j, &b)| (j, (e - b).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .ok_or_else(|| Error::numerical(Stage::Genus, "empty fiber"))?;
        perm.push(j);
    }
    let mut seen = perm.clone();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() != perm.len() {
        return Err(Error::numerical(
            Stage::Genus,
            "monodromy loop did not return to the base fiber",
        ));
    }
    Ok(perm)
}

fn cycle_lengths(perm: &[usize]) -> Vec<usize> {
    let mut seen = vec![false; perm.len()];
    let mut out = Vec::new();
    for s in 0..perm.len() {
        if seen[s] {
            continue;
        }
        let mut len = 0;
        let mut i = s;
        while !seen[i] {
            seen[i] = true;
            i = perm[i];
            len += 1;
        }
        out.push(len);
    }
    out.sort_unstable_by(|a, b| b.cmp(a));
    out
}

fn is_transitive(perms: &[Vec<usize>], n: usize) -> bool {
    let mut reached = vec![false; n];
    let mut stack = vec![0];
    reached[0] = true;
    while let Some(i) = stack.pop() {
        for p in perms {
            let j = p[i];
            if !reached[j] {
                reached[j] = true;
                stack.push(j);
            }
        }
    }
    reached.into_iter().all(|r| r)
}
