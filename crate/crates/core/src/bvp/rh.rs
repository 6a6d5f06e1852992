//! Scalar Riemann–Hilbert problem `Im(B φ) = c` on the unit circle for a
//! function `φ` analytic in the disk, with `B` of index zero.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result, Stage};
use crate::fourier::{analytic_from_real, spectrum, trig_eval};

const I: C64 = C64::new(0.0, 1.0);

/// Continuous argument of `w` along the samples.
pub fn unwrapped_arg(w: &[C64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(w.len());
    let mut acc = match w.first() {
        Some(v) => v.arg(),
        None => return out,
    };
    out.push(acc);
    for k in 1..w.len() {
        acc += (w[k] / w[k - 1]).arg();
        out.push(acc);
    }
    out
}

/// Winding number of a closed sampled loop around 0.
pub fn winding_number(f: &[C64]) -> i64 {
    let n = f.len();
    let total: f64 = (0..n).map(|k| (f[(k + 1) % n] / f[k]).arg()).sum();
    (total / (2.0 * PI)).round() as i64
}

/// Parameter values `θ_j` where the boundary angle `σ(θ)` takes the targets
/// `σ(0) + 2π(j + ½)/N`. Returns `(θ_j, σ_j)`.
pub fn resample_sigma(sigma: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = sigma.len();
    let nf = n as f64;
    let periodic: Vec<C64> = (0..n)
        .map(|k| C64::new(sigma[k] - 2.0 * PI * k as f64 / nf, 0.0))
        .collect();
    let spec = spectrum(&periodic);
    let dspec: Vec<C64> = spec
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            if n.is_multiple_of(2) && k == n / 2 {
                C64::new(0.0, 0.0)
            } else {
                c * I * crate::fourier::freq(k, n)
            }
        })
        .collect();
    let mut theta = Vec::with_capacity(n);
    let mut targets = Vec::with_capacity(n);
    for j in 0..n {
        let target = sigma[0] + 2.0 * PI * (j as f64 + 0.5) / nf;
        let mut t = 2.0 * PI * (j as f64 + 0.5) / nf;
        let mut converged = false;
        for _ in 0..50 {
            let f = t + trig_eval(&spec, t).re - target;
            let fp = 1.0 + trig_eval(&dspec, t).re;
            if fp <= 0.0 {
                return Err(Error::numerical(
                    Stage::Solve,
                    "boundary correspondence is not monotone",
                ));
            }
            let step = f / fp;
            t -= step;
            if step.abs() < 1e-13 {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::numerical(
                Stage::Solve,
                "boundary correspondence inversion did not converge",
            ));
        }
        theta.push(t);
        targets.push(target);
    }
    Ok((theta, targets))
}

/// Particular and homogeneous solutions of `Im(B φ) = c` at the equispaced
/// circle points where `B` and `c` are sampled. The general solution is
/// `φ_p + β φ_h` with real `β`.
pub fn solve_rh(b: &[C64], c: &[f64]) -> Result<(Vec<C64>, Vec<C64>)> {
    let arg = unwrapped_arg(b);
    let index = winding_number(b);
    if index != 0 {
        return Err(Error::numerical(
            Stage::Solve,
            format!("index ≠ 0: solution formula requires modification (index {index})"),
        ));
    }
    let gamma = analytic_from_real(&arg);
    let im_psi: Vec<f64> = (0..b.len())
        .map(|k| c[k] * (-gamma[k].im).exp() / b[k].norm())
        .collect();
    let psi: Vec<C64> = analytic_from_real(&im_psi).into_iter().map(|q| I * q).collect();
    let hom: Vec<C64> = gamma.iter().map(|g| (-I * g).exp()).collect();
    let part = hom.iter().zip(&psi).map(|(h, p)| h * p).collect();
    Ok((part, hom))
}

/// Taylor coefficients `φ(ζ) = Σ_k a_k ζ^k` from values at `ζ_j = e^{i(s₀ + 2πj/N)}`,
/// keeping `k < N/2`. Also returns the largest negative-frequency magnitude.
pub fn taylor_from_circle(values: &[C64], s0: f64) -> (Vec<C64>, f64) {
    let n = values.len();
    let spec = spectrum(values);
    let coeffs = (0..n / 2)
        .map(|k| spec[k] * C64::from_polar(1.0, -(k as f64) * s0))
        .collect();
    let leak = spec[n / 2 + 1..].iter().map(|c| c.norm()).fold(0.0, f64::max);
    (coeffs, leak)
}

/// Horner evaluation of a Taylor series.
pub fn eval_series(coeffs: &[C64], z: C64) -> C64 {
    coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
}
