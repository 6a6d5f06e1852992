//! Dense complex polynomials in one and two variables, root finding,
//! resultants and discriminants.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result, Stage};
use crate::model::FunctionalEquation;

/// Trailing coefficients below this fraction of the largest one are dropped.
pub const COEFF_DROP: f64 = 1e-14;

/// Newton polishing steps applied after the companion eigenvalue solve.
pub const NEWTON_STEPS: usize = 3;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Which variable a quantity lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Plane {
    X,
    Y,
}

impl Plane {
    pub fn other(self) -> Plane {
        match self {
            Plane::X => Plane::Y,
            Plane::Y => Plane::X,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Plane::X => "x",
            Plane::Y => "y",
        }
    }
}

/// Univariate polynomial with ascending complex coefficients.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly {
    coeffs: Vec<C64>,
}

impl Poly {
    pub fn new(coeffs: Vec<C64>) -> Self {
        let mut p = Poly { coeffs };
        p.trim();
        p
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Poly::new(coeffs.iter().map(|&c| C64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: C64) -> Self {
        Poly::new(vec![c])
    }

    pub fn one() -> Self {
        Poly::constant(ONE)
    }

    /// `c * t^k`
    pub fn monomial(c: C64, k: usize) -> Self {
        let mut v = vec![ZERO; k + 1];
        v[k] = c;
        Poly::new(v)
    }

    /// Product of `(t - r)` over the given roots.
    pub fn from_roots(roots: &[C64]) -> Self {
        roots.iter().fold(Poly::one(), |acc, &r| {
            &acc * &Poly::new(vec![-r, ONE])
        })
    }

    fn trim(&mut self) {
        let max = self.max_abs();
        if max == 0.0 || !max.is_finite() {
            if max == 0.0 {
                self.coeffs.clear();
            }
            return;
        }
        let cut = COEFF_DROP * max;
        while let Some(last) = self.coeffs.last() {
            if last.norm() <= cut {
                self.coeffs.pop();
            } else {
                break;
            }
        }
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> C64 {
        self.coeffs.get(k).copied().unwrap_or(ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> C64 {
        self.coeffs.last().copied().unwrap_or(ZERO)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
    }

    /// Value and first derivative in one Horner pass.
    pub fn eval_with_derivative(&self, z: C64) -> (C64, C64) {
        let mut p = ZERO;
        let mut dp = ZERO;
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    /// Sum of |c_k| |z|^k, used to scale residuals.
    pub fn abs_eval(&self, z: C64) -> f64 {
        let r = z.norm();
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn scale(&self, s: C64) -> Poly {
        Poly::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    /// Coefficients reversed with respect to `degree`: `t^degree p(1/t)`.
    pub fn reversed(&self, degree: usize) -> Poly {
        let mut v = vec![ZERO; degree + 1];
        for (k, &c) in self.coeffs.iter().enumerate().take(degree + 1) {
            v[degree - k] = c;
        }
        Poly::new(v)
    }

    /// Quotient and remainder of polynomial long division.
    pub fn div_rem(&self, d: &Poly) -> Result<(Poly, Poly)> {
        let dd = d
            .degree()
            .ok_or_else(|| Error::Domain("division by the zero polynomial".into()))?;
        let Some(nd) = self.degree() else {
            return Ok((Poly::zero(), Poly::zero()));
        };
        if nd < dd {
            return Ok((Poly::zero(), self.clone()));
        }
        let mut rem = self.coeffs.clone();
        let mut q = vec![ZERO; nd - dd + 1];
        let lead = d.leading();
        for k in (0..=nd - dd).rev() {
            let c = rem[k + dd] / lead;
            q[k] = c;
            for (i, &dc) in d.coeffs.iter().enumerate() {
                rem[k + i] -= c * dc;
            }
        }
        rem.truncate(dd);
        Ok((Poly::new(q), Poly::new(rem)))
    }

    /// Division known to be exact; the remainder is discarded.
    ///
    /// The quotient is the least-squares solution of the full convolution
    /// system, which stays accurate when the divisor has clustered roots.
    pub fn exact_div(&self, d: &Poly) -> Result<Poly> {
        let dd = d
            .degree()
            .ok_or_else(|| Error::Domain("division by the zero polynomial".into()))?;
        let Some(nd) = self.degree() else {
            return Ok(Poly::zero());
        };
        if nd < dd {
            return Ok(Poly::zero());
        }
        if dd == 0 {
            return Ok(self.scale(ONE / d.coeffs[0]));
        }
        let (rows, cols) = (nd + 1, nd - dd + 1);
        let mut a = vec![ZERO; rows * cols];
        for k in 0..cols {
            for (i, &c) in d.coeffs.iter().enumerate() {
                a[(k + i) * cols + k] = c;
            }
        }
        Ok(Poly::new(crate::linalg::least_squares_complex(
            rows,
            cols,
            &a,
            &self.coeffs,
        )))
    }

    /// All complex roots (with multiplicity), sorted by (re, im).
    pub fn roots(&self) -> Vec<C64> {
        let Some(n) = self.degree() else {
            return Vec::new();
        };
        let mut roots = Vec::with_capacity(n);
        let low = self.coeffs.iter().take_while(|c| **c == ZERO).count();
        roots.extend(std::iter::repeat_n(ZERO, low));
        let core = Poly::new(self.coeffs[low..].to_vec());
        let m = core.degree().unwrap_or(0);
        match m {
            0 => {}
            1 => roots.push(-core.coeffs[0] / core.coeffs[1]),
            _ => {
                for r in companion_roots(&core) {
                    roots.push(polish(&core, r));
                }
            }
        }
        sort_complex(&mut roots);
        roots
    }
}

fn companion_roots(p: &Poly) -> Vec<C64> {
    let n = p.degree().unwrap();
    // Rescale the variable so that the root magnitudes are O(1).
    let s = (p.coeffs[0] / p.coeffs[n]).norm().powf(1.0 / n as f64);
    let s = if s.is_finite() && s > 0.0 { s } else { 1.0 };
    let mut c: Vec<C64> = p
        .coeffs
        .iter()
        .enumerate()
        .map(|(k, &ck)| ck * s.powi(k as i32))
        .collect();
    let lead = c[n];
    for ck in c.iter_mut() {
        *ck /= lead;
    }
    let m = faer::Mat::<C64>::from_fn(n, n, |i, j| {
        if j == n - 1 {
            -c[i]
        } else if i == j + 1 {
            ONE
        } else {
            ZERO
        }
    });
    match m.eigenvalues() {
        Ok(ev) => ev.into_iter().map(|z| z * s).collect(),
        Err(_) => durand_kerner(p),
    }
}

fn durand_kerner(p: &Poly) -> Vec<C64> {
    let n = p.degree().unwrap();
    let lead = p.leading();
    let seed = C64::new(0.4, 0.9);
    let mut z: Vec<C64> = (0..n).map(|k| seed.powu(k as u32)).collect();
    for _ in 0..500 {
        let prev = z.clone();
        for i in 0..n {
            let mut den = lead;
            for j in 0..n {
                if i != j {
                    den *= prev[i] - prev[j];
                }
            }
            z[i] = prev[i] - p.eval(prev[i]) / den;
        }
    }
    z
}

fn polish(p: &Poly, mut z: C64) -> C64 {
    for _ in 0..NEWTON_STEPS {
        let (v, dv) = p.eval_with_derivative(z);
        if dv.norm() == 0.0 || !v.is_finite() {
            break;
        }
        let cand = z - v / dv;
        if cand.is_finite() && p.eval(cand).norm() <= v.norm() {
            z = cand;
        } else {
            break;
        }
    }
    z
}

/// Deterministic (re, im) ordering.
pub fn sort_complex(v: &mut [C64]) {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// Groups roots lying within `radius` of each other; returns (centroid, count).
pub fn cluster_roots(roots: &[C64], radius: f64) -> Vec<(C64, usize)> {
    let n = roots.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut i = i;
        while p[i] != r {
            let next = p[i];
            p[i] = r;
            i = next;
        }
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            let scale = 1.0f64.max(roots[i].norm());
            if (roots[i] - roots[j]).norm() <= radius * scale {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[b.max(a)] = a.min(b);
                }
            }
        }
    }
    let mut out: Vec<(usize, C64, usize)> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match out.iter_mut().find(|(id, _, _)| *id == r) {
            Some(e) => {
                e.1 += roots[i];
                e.2 += 1;
            }
            None => out.push((r, roots[i], 1)),
        }
    }
    let mut res: Vec<(C64, usize)> = out
        .into_iter()
        .map(|(_, s, c)| (s / c as f64, c))
        .collect();
    res.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
    res
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        let n = self.coeffs.len().max(o.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) + o.coeff(k)).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        let n = self.coeffs.len().max(o.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) - o.coeff(k)).collect())
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut v = vec![ZERO; self.coeffs.len() + o.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in o.coeffs.iter().enumerate() {
                v[i + j] += a * b;
            }
        }
        Poly::new(v)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<(usize, usize, C64)> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, &c)| (k, 0, c))
            .collect();
        write_terms(f, &terms, "t", None)
    }
}

fn fmt_coeff(c: C64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else {
        format!("({}{:+}i)", c.re, c.im)
    }
}

fn write_terms(
    f: &mut fmt::Formatter<'_>,
    terms: &[(usize, usize, C64)],
    v1: &str,
    v2: Option<&str>,
) -> fmt::Result {
    let mut first = true;
    for &(i, j, c) in terms {
        if c == ZERO {
            continue;
        }
        if !first {
            f.write_str(" + ")?;
        }
        first = false;
        f.write_str(&fmt_coeff(c))?;
        if i > 0 {
            write!(f, "*{v1}")?;
            if i > 1 {
                write!(f, "^{i}")?;
            }
        }
        if let Some(v2) = v2 {
            if j > 0 {
                write!(f, "*{v2}")?;
                if j > 1 {
                    write!(f, "^{j}")?;
                }
            }
        }
    }
    if first {
        f.write_str("0")?;
    }
    Ok(())
}

/// Polynomial in (x, y) stored as a dense matrix `c[i][j]` of `x^i y^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct BiPoly {
    c: Vec<Vec<C64>>,
}

impl BiPoly {
    /// Zero polynomial with room for the given degrees.
    pub fn zeros(x_degree: usize, y_degree: usize) -> Self {
        BiPoly {
            c: vec![vec![ZERO; y_degree + 1]; x_degree + 1],
        }
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (usize, usize, C64)>) -> Self {
        let terms: Vec<_> = terms.into_iter().collect();
        let xi = terms.iter().map(|t| t.0).max().unwrap_or(0);
        let yj = terms.iter().map(|t| t.1).max().unwrap_or(0);
        let mut p = BiPoly::zeros(xi, yj);
        for (i, j, v) in terms {
            p.c[i][j] += v;
        }
        p
    }

    pub fn from_rows(rows: Vec<Vec<C64>>) -> Self {
        let w = rows.iter().map(|r| r.len()).max().unwrap_or(1).max(1);
        let c = if rows.is_empty() {
            vec![vec![ZERO; 1]]
        } else {
            rows.into_iter()
                .map(|mut r| {
                    r.resize(w, ZERO);
                    r
                })
                .collect()
        };
        BiPoly { c }
    }

    pub fn coeff(&self, i: usize, j: usize) -> C64 {
        self.c
            .get(i)
            .and_then(|r| r.get(j))
            .copied()
            .unwrap_or(ZERO)
    }

    pub fn rows(&self) -> &[Vec<C64>] {
        &self.c
    }

    /// Highest power of x with a nonzero coefficient.
    pub fn x_degree(&self) -> usize {
        (0..self.c.len())
            .rev()
            .find(|&i| self.c[i].iter().any(|v| *v != ZERO))
            .unwrap_or(0)
    }

    /// Highest power of y with a nonzero coefficient.
    pub fn y_degree(&self) -> usize {
        let w = self.c.first().map_or(0, |r| r.len());
        (0..w)
            .rev()
            .find(|&j| self.c.iter().any(|r| r[j] != ZERO))
            .unwrap_or(0)
    }

    pub fn degree(&self, plane: Plane) -> usize {
        match plane {
            Plane::X => self.x_degree(),
            Plane::Y => self.y_degree(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.c
            .iter()
            .flatten()
            .fold(0.0, |m, c| m.max(c.norm()))
    }

    pub fn eval(&self, x: C64, y: C64) -> C64 {
        self.c.iter().rev().fold(ZERO, |acc, row| {
            acc * x + row.iter().rev().fold(ZERO, |a, &c| a * y + c)
        })
    }

    /// Sum of |c_ij| |x|^i |y|^j.
    pub fn abs_eval(&self, x: C64, y: C64) -> f64 {
        let (rx, ry) = (x.norm(), y.norm());
        self.c.iter().rev().fold(0.0, |acc, row| {
            acc * rx + row.iter().rev().fold(0.0, |a, c| a * ry + c.norm())
        })
    }

    /// `a_0(x), …, a_J(x)` with `P = Σ a_j(x) y^j`.
    pub fn coeffs_in_y(&self) -> Vec<Poly> {
        let j_deg = self.y_degree();
        (0..=j_deg)
            .map(|j| Poly::new(self.c.iter().map(|r| r[j]).collect()))
            .collect()
    }

    /// `b_0(y), …, b_I(y)` with `P = Σ b_i(y) x^i`.
    pub fn coeffs_in_x(&self) -> Vec<Poly> {
        let i_deg = self.x_degree();
        (0..=i_deg).map(|i| Poly::new(self.c[i].clone())).collect()
    }

    /// Coefficient polynomials in the variable of `plane`'s complement:
    /// for `Plane::Y` returns the `b_i(y)` (polynomial in x with coefficients in y).
    pub fn coeffs_over(&self, plane: Plane) -> Vec<Poly> {
        match plane {
            Plane::Y => self.coeffs_in_x(),
            Plane::X => self.coeffs_in_y(),
        }
    }

    /// `P(x0, y)` as a polynomial in y.
    pub fn fiber_at_x(&self, x0: C64) -> Poly {
        let w = self.c.first().map_or(0, |r| r.len());
        let mut out = vec![ZERO; w];
        for row in self.c.iter().rev() {
            for (o, &c) in out.iter_mut().zip(row) {
                *o = *o * x0 + c;
            }
        }
        Poly::new(out)
    }

    /// `P(x, y0)` as a polynomial in x.
    pub fn fiber_at_y(&self, y0: C64) -> Poly {
        Poly::new(
            self.c
                .iter()
                .map(|row| row.iter().rev().fold(ZERO, |a, &c| a * y0 + c))
                .collect(),
        )
    }

    /// Fiber over a value in `plane`: a polynomial in the other variable.
    pub fn fiber(&self, plane: Plane, value: C64) -> Poly {
        match plane {
            Plane::X => self.fiber_at_x(value),
            Plane::Y => self.fiber_at_y(value),
        }
    }

    pub fn transpose(&self) -> BiPoly {
        let w = self.c.first().map_or(0, |r| r.len());
        BiPoly {
            c: (0..w)
                .map(|j| self.c.iter().map(|r| r[j]).collect())
                .collect(),
        }
    }

    pub fn dx(&self) -> BiPoly {
        let w = self.c.first().map_or(1, |r| r.len());
        if self.c.len() <= 1 {
            return BiPoly::from_rows(vec![vec![ZERO; w]]);
        }
        BiPoly::from_rows(
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, r)| r.iter().map(|&v| v * i as f64).collect())
                .collect(),
        )
    }

    pub fn dy(&self) -> BiPoly {
        self.transpose().dx().transpose()
    }

    pub fn scale(&self, s: C64) -> BiPoly {
        BiPoly {
            c: self
                .c
                .iter()
                .map(|r| r.iter().map(|&v| v * s).collect())
                .collect(),
        }
    }

    pub fn add(&self, o: &BiPoly) -> BiPoly {
        let rows = self.c.len().max(o.c.len());
        let w = self
            .c
            .first()
            .map_or(0, |r| r.len())
            .max(o.c.first().map_or(0, |r| r.len()));
        let mut p = BiPoly::zeros(rows - 1, w.max(1) - 1);
        for i in 0..rows {
            for j in 0..w {
                p.c[i][j] = self.coeff(i, j) + o.coeff(i, j);
            }
        }
        p
    }

    /// Nonzero terms as `(i, j, c)` in lexicographic order.
    pub fn terms(&self) -> Vec<(usize, usize, C64)> {
        let mut out = Vec::new();
        for (i, r) in self.c.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                if v != ZERO {
                    out.push((i, j, v));
                }
            }
        }
        out
    }
}

impl fmt::Display for BiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(f, &self.terms(), "x", Some("y"))
    }
}

/// The kernel `P(x,y) = x^{I⁻} y^{J⁻} R(x,y)` of a functional equation.
pub fn kernel_from_model(fe: &FunctionalEquation) -> BiPoly {
    fe.interior_gen.clone()
}

fn trim_outer(p: &[Poly]) -> Vec<Poly> {
    let mut v = p.to_vec();
    while v.last().is_some_and(|q| q.is_zero()) {
        v.pop();
    }
    v
}

fn pow_poly(p: &Poly, k: usize) -> Poly {
    (0..k).fold(Poly::one(), |acc, _| &acc * p)
}

fn norm1(p: &Poly) -> f64 {
    p.coeffs().iter().map(|c| c.norm()).sum()
}

/// Resultant of two polynomials in an eliminated variable `t` whose
/// coefficients (`p[k]` multiplies `t^k`) are polynomials in the remaining
/// variable. Computed as the Sylvester determinant by fraction-free
/// (Bareiss) elimination over polynomial entries.
pub fn resultant(p: &[Poly], q: &[Poly]) -> Result<Poly> {
    let p = trim_outer(p);
    let q = trim_outer(q);
    if p.is_empty() && q.is_empty() {
        return Err(Error::Domain("resultant of two zero polynomials".into()));
    }
    if p.is_empty() || q.is_empty() {
        return Ok(Poly::zero());
    }
    let m = p.len() - 1;
    let n = q.len() - 1;
    if m == 0 {
        return Ok(pow_poly(&p[0], n));
    }
    if n == 0 {
        return Ok(pow_poly(&q[0], m));
    }
    let size = m + n;
    let mut a = vec![vec![Poly::zero(); size]; size];
    for r in 0..n {
        for k in 0..=m {
            a[r][r + k] = p[m - k].clone();
        }
    }
    for r in 0..m {
        for k in 0..=n {
            a[n + r][r + k] = q[n - k].clone();
        }
    }
    Ok(bareiss_det(a))
}

fn bareiss_det(mut a: Vec<Vec<Poly>>) -> Poly {
    let size = a.len();
    let mut negate = false;
    let mut prev = Poly::one();
    for k in 0..size.saturating_sub(1) {
        let piv = (k..size)
            .max_by(|&r, &s| norm1(&a[r][k]).total_cmp(&norm1(&a[s][k])))
            .unwrap();
        if a[piv][k].is_zero() {
            return Poly::zero();
        }
        if piv != k {
            a.swap(piv, k);
            negate = !negate;
        }
        for i in k + 1..size {
            for j in k + 1..size {
                let num = &(&a[k][k] * &a[i][j]) - &(&a[i][k] * &a[k][j]);
                a[i][j] = num.exact_div(&prev).expect("nonzero pivot");
            }
            a[i][k] = Poly::zero();
        }
        prev = a[k][k].clone();
    }
    let det = a[size - 1][size - 1].clone();
    if negate {
        -&det
    } else {
        det
    }
}

/// Same resultant computed by evaluating the Sylvester determinant on the
/// roots of unity and interpolating. Independent check of [`resultant`].
pub fn resultant_by_interpolation(p: &[Poly], q: &[Poly], degree_bound: usize) -> Result<Poly> {
    let p = trim_outer(p);
    let q = trim_outer(q);
    if p.is_empty() && q.is_empty() {
        return Err(Error::Domain("resultant of two zero polynomials".into()));
    }
    if p.is_empty() || q.is_empty() {
        return Ok(Poly::zero());
    }
    let m = p.len() - 1;
    let n = q.len() - 1;
    let size = m + n;
    let npts = degree_bound + 1;
    let mut values = Vec::with_capacity(npts);
    for k in 0..npts {
        let z = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / npts as f64);
        if size == 0 {
            values.push(ONE);
            continue;
        }
        let pv: Vec<C64> = p.iter().map(|c| c.eval(z)).collect();
        let qv: Vec<C64> = q.iter().map(|c| c.eval(z)).collect();
        let mut a = vec![vec![ZERO; size]; size];
        for r in 0..n {
            for kk in 0..=m {
                a[r][r + kk] = pv[m - kk];
            }
        }
        for r in 0..m {
            for kk in 0..=n {
                a[n + r][r + kk] = qv[n - kk];
            }
        }
        values.push(det_complex(a));
    }
    // Inverse DFT gives the coefficients.
    let coeffs: Vec<C64> = (0..npts)
        .map(|j| {
            values
                .iter()
                .enumerate()
                .map(|(k, v)| {
                    v * C64::from_polar(
                        1.0,
                        -2.0 * std::f64::consts::PI * (j * k % npts) as f64 / npts as f64,
                    )
                })
                .sum::<C64>()
                / npts as f64
        })
        .collect();
    let scale = coeffs.iter().fold(0.0f64, |m, c| m.max(c.norm()));
    Ok(Poly::new(
        coeffs
            .into_iter()
            .map(|c| if c.norm() < 1e-13 * scale { ZERO } else { c })
            .collect(),
    ))
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn det_complex(mut a: Vec<Vec<C64>>) -> C64 {
    let n = a.len();
    let mut det = ONE;
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&r, &s| a[r][k].norm().total_cmp(&a[s][k].norm()))
            .unwrap();
        if a[piv][k] == ZERO {
            return ZERO;
        }
        if piv != k {
            a.swap(piv, k);
            det = -det;
        }
        let d = a[k][k];
        det *= d;
        for i in k + 1..n {
            let f = a[i][k] / d;
            for j in k..n {
                let v = a[k][j];
                a[i][j] -= f * v;
            }
        }
    }
    det
}

/// Discriminant whose roots are the branch points in `plane`: for
/// `Plane::Y` the polynomial in y vanishing where `P(·, y)` has a multiple
/// root; computed as `Res_x(P, ∂P/∂x) / b_I(y)`.
pub fn discriminant(p: &BiPoly, plane: Plane) -> Result<Poly> {
    let coeffs = p.coeffs_over(plane);
    let deg = coeffs.len().saturating_sub(1);
    if deg == 0 {
        return Err(Error::numerical(
            Stage::Kernel,
            format!(
                "kernel is constant in {}; no fiber to ramify",
                plane.other().name()
            ),
        ));
    }
    let deriv: Vec<Poly> = coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c.scale(C64::new(k as f64, 0.0)))
        .collect();
    let res = resultant(&coeffs, &deriv)?;
    let lead = coeffs[deg].clone();
    let disc = res.exact_div(&lead)?;
    if disc.is_zero() || every_fiber_is_multiple(p, plane) {
        return Err(Error::numerical(
            Stage::Kernel,
            "kernel is non-reduced (discriminant vanishes identically)",
        ));
    }
    Ok(disc)
}

/// True when fibers over a few generic points all have a repeated root.
fn every_fiber_is_multiple(p: &BiPoly, plane: Plane) -> bool {
    [1.0, 2.3, 4.1].iter().all(|&phi| {
        let roots = p.fiber(plane, C64::from_polar(0.7, phi)).roots();
        let scale = roots.iter().fold(1.0f64, |m, r| m.max(r.norm()));
        (0..roots.len()).any(|i| {
            (i + 1..roots.len()).any(|j| (roots[i] - roots[j]).norm() < 1e-6 * scale)
        })
    })
}

/// Upper bound on the number of branch points in `plane`.
pub fn branch_count_bound(p: &BiPoly, plane: Plane) -> usize {
    let i = p.x_degree();
    let j = p.y_degree();
    match plane {
        Plane::Y => 2 * j * i.saturating_sub(1),
        Plane::X => 2 * i * j.saturating_sub(1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn roots_of_known_polynomial() {
        let r = [c(-2.0), c(0.5), C64::new(1.0, 1.0), C64::new(1.0, -1.0)];
        let p = Poly::from_roots(&r);
        let mut found = p.roots();
        let mut want = r.to_vec();
        sort_complex(&mut found);
        sort_complex(&mut want);
        for (a, b) in found.iter().zip(&want) {
            assert!((a - b).norm() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn zero_roots_are_exact() {
        let p = Poly::from_real(&[0.0, 0.0, 2.0, 1.0]);
        let r = p.roots();
        assert_eq!(r.iter().filter(|z| **z == ZERO).count(), 2);
        assert!(r.iter().any(|z| (z - c(-2.0)).norm() < 1e-14));
    }

    #[test]
    fn trimming_drops_tiny_leading_terms() {
        let p = Poly::from_real(&[1.0, 2.0, 1e-16]);
        assert_eq!(p.degree(), Some(1));
        assert!(Poly::from_real(&[0.0, 0.0]).is_zero());
    }

    #[test]
    fn resultant_hand_example() {
        // p = y^2 - x, q = 2y, eliminating y.
        let p = vec![Poly::from_real(&[0.0, -1.0]), Poly::zero(), Poly::one()];
        let q = vec![Poly::zero(), Poly::constant(c(2.0))];
        let r = resultant(&p, &q).unwrap();
        assert_eq!(r.degree(), Some(1));
        assert!((r.coeff(1).norm() - 4.0).abs() < 1e-14);
        assert!(r.coeff(0).norm() < 1e-14);
    }

    #[test]
    fn division_round_trip() {
        let a = Poly::from_real(&[1.0, -3.0, 0.0, 2.0]);
        let b = Poly::from_real(&[0.5, 1.0]);
        let (q, r) = (&a * &b).div_rem(&b).unwrap();
        assert!((&q - &a).max_abs() < 1e-14);
        assert!(r.max_abs() < 1e-14);
    }

    #[test]
    fn bipoly_fibers_agree_with_eval() {
        let p = BiPoly::from_terms([
            (0, 0, c(0.3)),
            (1, 2, c(-1.5)),
            (2, 1, C64::new(0.2, 0.1)),
            (3, 0, c(1.0)),
        ]);
        let (x, y) = (C64::new(0.3, -0.2), C64::new(-0.7, 0.4));
        assert!((p.fiber_at_x(x).eval(y) - p.eval(x, y)).norm() < 1e-15);
        assert!((p.fiber_at_y(y).eval(x) - p.eval(x, y)).norm() < 1e-15);
        assert!((p.transpose().eval(y, x) - p.eval(x, y)).norm() < 1e-15);
        let h = 1e-6;
        let num = (p.eval(x + h, y) - p.eval(x - h, y)) / (2.0 * h);
        assert!((num - p.dx().eval(x, y)).norm() < 1e-8);
        assert!(p.to_string().contains("x^3"));
    }
}
