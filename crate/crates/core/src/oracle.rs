//! Brute-force references: truncated-chain stationary solves, Monte Carlo
//! simulation and grid sweeps for branch points. Nothing here uses the
//! analytic pipeline.

use std::collections::{BTreeMap, VecDeque};

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::Tolerances;
use crate::error::{Error, Result, Stage};
use crate::kernel::{BiPoly, Plane};
use crate::model::{validate_model_with, StepDistribution, StepModel};

/// Transition structure of the walk restricted to `{0..N−1}²`; jumps leaving
/// the window are projected onto the nearest window state.
#[derive(Debug, Clone)]
pub struct TruncatedChain {
    pub size: usize,
    /// Outgoing transitions per state, merged and sorted by target.
    pub rows: Vec<Vec<(usize, f64)>>,
}

impl TruncatedChain {
    pub fn new(m: &StepModel, size: usize) -> Result<TruncatedChain> {
        if size < 2 {
            return Err(Error::Domain("truncation size must be at least 2".into()));
        }
        let last = size as i64 - 1;
        let mut rows = Vec::with_capacity(size * size);
        for i in 0..size {
            for j in 0..size {
                let d = m
                    .distribution_at(i, j)
                    .ok_or_else(|| Error::InvalidModel(format!("no distribution for ({i},{j})")))?;
                let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
                for &(di, dj, p) in d.jumps() {
                    if p == 0.0 {
                        continue;
                    }
                    let a = (i as i64 + di as i64).clamp(0, last) as usize;
                    let b = (j as i64 + dj as i64).clamp(0, last) as usize;
                    *acc.entry(a * size + b).or_insert(0.0) += p;
                }
                rows.push(acc.into_iter().collect());
            }
        }
        Ok(TruncatedChain { size, rows })
    }

    pub fn state_count(&self) -> usize {
        self.rows.len()
    }

    pub fn max_row_defect(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| (r.iter().map(|e| e.1).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Irreducibility: every state reaches the origin and is reached from it.
    pub fn is_irreducible(&self) -> bool {
        let n = self.state_count();
        let mut rev: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (s, r) in self.rows.iter().enumerate() {
            for &(t, _) in r {
                rev[t].push(s);
            }
        }
        let reach = |adj: &dyn Fn(usize) -> Vec<usize>| {
            let mut seen = vec![false; n];
            let mut q = VecDeque::from([0usize]);
            seen[0] = true;
            let mut count = 1;
            while let Some(s) = q.pop_front() {
                for t in adj(s) {
                    if !seen[t] {
                        seen[t] = true;
                        count += 1;
                        q.push_back(t);
                    }
                }
            }
            count == n
        };
        reach(&|s| self.rows[s].iter().map(|e| e.0).collect()) && reach(&|s| rev[s].clone())
    }
}

/// Stationary vector of a truncated chain.
#[derive(Debug, Clone, Serialize)]
pub struct TruncatedSolution {
    pub size: usize,
    /// `pi[i][j]`.
    pub pi: Vec<Vec<f64>>,
    /// Mass on the outer 10% frame of the window.
    pub tail_mass: f64,
    pub min_entry: f64,
}

impl TruncatedSolution {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.pi.get(i).and_then(|r| r.get(j)).copied().unwrap_or(0.0)
    }

    /// Top-left `(order+1)²` block.
    pub fn table(&self, order: usize) -> Vec<Vec<f64>> {
        (0..=order)
            .map(|i| (0..=order).map(|j| self.get(i, j)).collect())
            .collect()
    }
}

/// Solves `πᵀ(T − I) = 0`, `Σπ = 1` by sparse LU; fails when the tail mass
/// exceeds `tol.tail_mass`.
pub fn truncated_stationary(m: &StepModel, size: usize, tol: &Tolerances) -> Result<TruncatedSolution> {
    let sol = truncated_stationary_unchecked(m, size, tol)?;
    if sol.tail_mass > tol.tail_mass {
        return Err(Error::numerical(
            Stage::Oracle,
            format!(
                "tail mass {:.3e} exceeds {:.1e} at N = {size}: increase N",
                sol.tail_mass, tol.tail_mass
            ),
        ));
    }
    Ok(sol)
}

/// Like [`truncated_stationary`] without the tail-mass gate.
pub fn truncated_stationary_unchecked(
    m: &StepModel,
    size: usize,
    tol: &Tolerances,
) -> Result<TruncatedSolution> {
    let rep = validate_model_with(m, tol);
    if !rep.is_ok() {
        return Err(Error::InvalidModel(rep.errors.join("; ")));
    }
    let chain = TruncatedChain::new(m, size)?;
    if chain.max_row_defect() > tol.prob_sum {
        return Err(Error::numerical(Stage::Oracle, "transition rows do not sum to one"));
    }
    if !chain.is_irreducible() {
        return Err(Error::numerical(Stage::Oracle, "truncated chain is reducible"));
    }
    let n = chain.state_count();
    // Column s of (Tᵀ − I) holds the outgoing probabilities of state s; the
    // balance equation of state 0 is replaced by π₀ = 1.
    let mut trip = Vec::with_capacity(n * 10);
    for (s, r) in chain.rows.iter().enumerate() {
        let mut diag = -1.0;
        for &(t, p) in r {
            if t == s {
                diag += p;
            } else if t != 0 {
                trip.push(Triplet::new(t, s, p));
            }
        }
        if s != 0 {
            trip.push(Triplet::new(s, s, diag));
        }
    }
    trip.push(Triplet::new(0usize, 0usize, 1.0));
    let a = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &trip)
        .map_err(|e| Error::numerical(Stage::Oracle, format!("sparse assembly failed: {e:?}")))?;
    let lu = a
        .sp_lu()
        .map_err(|e| Error::numerical(Stage::Oracle, format!("sparse LU failed: {e:?}")))?;
    let mut rhs = Mat::<f64>::zeros(n, 1);
    rhs[(0, 0)] = 1.0;
    let x = lu.solve(&rhs);
    let total: f64 = (0..n).map(|k| x[(k, 0)]).sum();
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::numerical(Stage::Oracle, "stationary solve produced no positive mass"));
    }
    let frame = size - (size as f64 * 0.9).floor() as usize;
    let cut = size - frame.max(1);
    let mut pi = vec![vec![0.0; size]; size];
    let mut tail = 0.0;
    let mut min_entry = f64::INFINITY;
    for i in 0..size {
        for j in 0..size {
            let v = x[(i * size + j, 0)] / total;
            pi[i][j] = v;
            min_entry = min_entry.min(v);
            if i >= cut || j >= cut {
                tail += v;
            }
        }
    }
    Ok(TruncatedSolution {
        size,
        pi,
        tail_mass: tail,
        min_entry,
    })
}

/// Visit frequencies of one long trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalFrequencies {
    pub steps: u64,
    pub burn_in: u64,
    pub seed: u64,
    /// Visit counts after burn-in, keyed by state.
    pub counts: BTreeMap<(u64, u64), u64>,
    /// Batch-means standard error of the origin frequency.
    pub origin_standard_error: f64,
}

impl EmpiricalFrequencies {
    pub fn recorded(&self) -> u64 {
        self.steps - self.burn_in
    }

    pub fn frequency(&self, i: u64, j: u64) -> f64 {
        let r = self.recorded();
        if r == 0 {
            return 0.0;
        }
        self.counts.get(&(i, j)).copied().unwrap_or(0) as f64 / r as f64
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

fn sample(d: &StepDistribution, u: f64) -> (i32, i32) {
    let mut acc = 0.0;
    let jumps = d.jumps();
    for &(di, dj, p) in jumps {
        acc += p;
        if u < acc {
            return (di, dj);
        }
    }
    jumps
        .iter()
        .rev()
        .find(|j| j.2 > 0.0)
        .map_or((0, 0), |j| (j.0, j.1))
}

const BATCHES: u64 = 50;

/// Simulates `steps` steps from the origin, discarding the first `steps/10`.
pub fn monte_carlo(m: &StepModel, steps: u64, seed: u64) -> Result<EmpiricalFrequencies> {
    let rep = validate_model_with(m, &Tolerances::default());
    if !rep.is_ok() {
        return Err(Error::InvalidModel(rep.errors.join("; ")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let burn_in = steps / 10;
    let recorded = steps - burn_in;
    let batch = (recorded / BATCHES).max(1);
    let mut counts = BTreeMap::new();
    let mut batch_hits = vec![0u64; BATCHES as usize];
    let (mut i, mut j) = (0u64, 0u64);
    for step in 0..steps {
        if step >= burn_in {
            *counts.entry((i, j)).or_insert(0) += 1;
            let b = ((step - burn_in) / batch).min(BATCHES - 1) as usize;
            if i == 0 && j == 0 {
                batch_hits[b] += 1;
            }
        }
        let d = m
            .distribution_at(i as usize, j as usize)
            .ok_or_else(|| Error::InvalidModel(format!("no distribution for ({i},{j})")))?;
        let (di, dj) = sample(d, rng.random::<f64>());
        i = (i as i64 + di as i64) as u64;
        j = (j as i64 + dj as i64) as u64;
    }
    let origin_standard_error = if recorded >= BATCHES * 2 {
        let sizes: Vec<f64> = (0..BATCHES)
            .map(|b| {
                if b == BATCHES - 1 {
                    (recorded - batch * (BATCHES - 1)) as f64
                } else {
                    batch as f64
                }
            })
            .collect();
        let means: Vec<f64> = batch_hits
            .iter()
            .zip(&sizes)
            .map(|(&h, &s)| h as f64 / s)
            .collect();
        let mean = means.iter().sum::<f64>() / BATCHES as f64;
        let var = means.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (BATCHES - 1) as f64;
        (var / BATCHES as f64).sqrt()
    } else {
        f64::NAN
    };
    Ok(EmpiricalFrequencies {
        steps,
        burn_in,
        seed,
        counts,
        origin_standard_error,
    })
}

fn chordal(a: C64, b: Option<C64>) -> f64 {
    match b {
        Some(b) => (a - b).norm() / ((1.0 + a.norm_sqr()) * (1.0 + b.norm_sqr())).sqrt(),
        None => 1.0 / (1.0 + a.norm_sqr()).sqrt(),
    }
}

/// Smallest chordal distance between roots of the fiber, counting roots
/// lost to infinity.
fn fiber_gap(q: &BiPoly, l: C64) -> f64 {
    let f = q.fiber_at_y(l);
    let nominal = q.x_degree();
    let scale = f.max_abs();
    if scale == 0.0 {
        return 0.0;
    }
    let mut c = f.coeffs().to_vec();
    while c.len() > 1 && c.last().unwrap().norm() < 1e-14 * scale {
        c.pop();
    }
    let inf = nominal + 1 - c.len();
    if inf >= 2 {
        return 0.0;
    }
    let roots = crate::kernel::Poly::new(c).roots();
    let mut best = f64::INFINITY;
    for a in 0..roots.len() {
        for b in a + 1..roots.len() {
            best = best.min(chordal(roots[a], Some(roots[b])));
        }
        if inf == 1 {
            best = best.min(chordal(roots[a], None));
        }
    }
    best
}

/// Newton on `{Q = 0, ∂ₓQ = 0}` in the unknowns `(x, l)`.
fn newton_double_root(q: &BiPoly, x0: C64, l0: C64) -> Option<(C64, C64)> {
    let qx = q.dx();
    let qy = q.dy();
    let qxx = qx.dx();
    let qxy = qx.dy();
    let (mut x, mut l) = (x0, l0);
    for _ in 0..60 {
        let f1 = q.eval(x, l);
        let f2 = qx.eval(x, l);
        let (a, b) = (qx.eval(x, l), qy.eval(x, l));
        let (c, d) = (qxx.eval(x, l), qxy.eval(x, l));
        let det = a * d - b * c;
        if det.norm() == 0.0 || !det.is_finite() {
            return None;
        }
        let dx = (d * f1 - b * f2) / det;
        let dl = (a * f2 - c * f1) / det;
        x -= dx;
        l -= dl;
        if !(x.is_finite() && l.is_finite()) {
            return None;
        }
        if dx.norm() + dl.norm() < 1e-15 * (1.0 + x.norm() + l.norm()) {
            break;
        }
    }
    Some((x, l))
}

fn reversed_rows(q: &BiPoly) -> BiPoly {
    let mut rows = q.rows().to_vec();
    rows.reverse();
    BiPoly::from_rows(rows)
}

/// Branch points of `plane` found by scanning the fiber root gap on a square
/// grid and refining each grid minimum by Newton's method.
pub fn sweep_branch_points(
    p: &BiPoly,
    plane: Plane,
    grid_radius: f64,
    grid_step: f64,
    tol: &Tolerances,
) -> Vec<C64> {
    // Orient so that the swept variable is y and fibers are in x.
    let q = match plane {
        Plane::Y => p.clone(),
        Plane::X => p.transpose(),
    };
    let qr = reversed_rows(&q);
    let k = (grid_radius / grid_step).round() as i64;
    let side = (2 * k + 1) as usize;
    let at = |a: i64, b: i64| C64::new(a as f64 * grid_step, b as f64 * grid_step);
    let gaps: Vec<f64> = (0..side * side)
        .map(|idx| {
            let (a, b) = ((idx / side) as i64 - k, (idx % side) as i64 - k);
            fiber_gap(&q, at(a, b))
        })
        .collect();
    let g = |a: i64, b: i64| -> f64 {
        if a.abs() > k || b.abs() > k {
            f64::INFINITY
        } else {
            gaps[((a + k) as usize) * side + (b + k) as usize]
        }
    };
    let mut found: Vec<C64> = Vec::new();
    for a in -k..=k {
        for b in -k..=k {
            let v = g(a, b);
            let is_min = (-1..=1).all(|da| {
                (-1..=1).all(|db| (da == 0 && db == 0) || v <= g(a + da, b + db))
            });
            if !is_min || !v.is_finite() {
                continue;
            }
            let l0 = at(a, b);
            if let Some(l) = refine(&q, &qr, l0) {
                if fiber_gap(&q, l) < tol.sweep_gap
                    && !found.iter().any(|f| (f - l).norm() < 1e-8 * (1.0 + l.norm()))
                {
                    found.push(l);
                }
            }
        }
    }
    crate::kernel::sort_complex(&mut found);
    found
}

fn refine(q: &BiPoly, qr: &BiPoly, l0: C64) -> Option<C64> {
    let f = q.fiber_at_y(l0);
    let roots = f.roots();
    // Closest pair, in the chart where it is finite.
    let mut pair: Option<(f64, C64)> = None;
    for a in 0..roots.len() {
        for b in a + 1..roots.len() {
            let d = chordal(roots[a], Some(roots[b]));
            if pair.is_none_or(|p| d < p.0) {
                pair = Some((d, (roots[a] + roots[b]) / 2.0));
            }
        }
    }
    let lost = q.x_degree() + 1 - f.coeffs().len();
    let mean = pair.map(|p| p.1);
    let use_reversed = lost >= 1 || mean.is_none_or(|m| m.norm() > 1.0);
    if use_reversed {
        let r = qr.fiber_at_y(l0).roots();
        let mut best: Option<(f64, C64)> = None;
        for a in 0..r.len() {
            for b in a + 1..r.len() {
                let d = (r[a] - r[b]).norm();
                if best.is_none_or(|p| d < p.0) {
                    best = Some((d, (r[a] + r[b]) / 2.0));
                }
            }
        }
        let (_, xi) = best?;
        newton_double_root(qr, xi, l0).map(|(_, l)| l)
    } else {
        newton_double_root(q, mean?, l0).map(|(_, l)| l)
    }
}

/// `max(sup_a inf_b |a−b|, sup_b inf_a |a−b|)`.
pub fn hausdorff(a: &[C64], b: &[C64]) -> f64 {
    let one = |x: &[C64], y: &[C64]| {
        x.iter()
            .map(|p| y.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    one(a, b).max(one(b, a))
}
