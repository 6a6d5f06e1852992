//! FFT helpers for periodic samples.

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;

/// `Σ_m f_m e^{-2πi km/N}` for every `k`.
pub fn fft(f: &[C64]) -> Vec<C64> {
    let mut buf = f.to_vec();
    if buf.is_empty() {
        return buf;
    }
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf
}

/// Inverse of [`fft`], including the `1/N` factor.
pub fn ifft(f: &[C64]) -> Vec<C64> {
    let mut buf = f.to_vec();
    if buf.is_empty() {
        return buf;
    }
    let n = buf.len() as f64;
    FftPlanner::new().plan_fft_inverse(buf.len()).process(&mut buf);
    for v in buf.iter_mut() {
        *v /= n;
    }
    buf
}

/// Signed frequency of FFT bin `k`.
pub fn freq(k: usize, n: usize) -> f64 {
    if k < n.div_ceil(2) {
        k as f64
    } else {
        k as f64 - n as f64
    }
}

/// First and second derivatives with respect to the uniform angle.
pub fn derivatives(f: &[C64]) -> (Vec<C64>, Vec<C64>) {
    let n = f.len();
    let spec = fft(f);
    let mut d1 = spec.clone();
    let mut d2 = spec;
    for k in 0..n {
        let w = freq(k, n);
        if n.is_multiple_of(2) && k == n / 2 {
            d1[k] = C64::new(0.0, 0.0);
        } else {
            d1[k] *= C64::new(0.0, w);
        }
        d2[k] *= -w * w;
    }
    (ifft(&d1), ifft(&d2))
}

/// Periodic Hilbert transform (multiplier `−i sign k`).
pub fn hilbert(f: &[C64]) -> Vec<C64> {
    let n = f.len();
    let mut spec = fft(f);
    for (k, s) in spec.iter_mut().enumerate() {
        let w = freq(k, n);
        *s *= C64::new(0.0, -w.signum() * (w != 0.0) as i32 as f64);
        if n.is_multiple_of(2) && k == n / 2 {
            *s = C64::new(0.0, 0.0);
        }
    }
    ifft(&spec)
}

/// Boundary values of the function analytic in the disk whose real part is
/// `re` and whose imaginary part vanishes at the centre.
pub fn analytic_from_real(re: &[f64]) -> Vec<C64> {
    let n = re.len();
    let buf: Vec<C64> = re.iter().map(|&r| C64::new(r, 0.0)).collect();
    let mut spec = fft(&buf);
    for (k, s) in spec.iter_mut().enumerate() {
        let w = freq(k, n);
        if w > 0.0 && !(n.is_multiple_of(2) && k == n / 2) {
            *s *= 2.0;
        } else if w != 0.0 {
            *s = C64::new(0.0, 0.0);
        }
    }
    ifft(&spec)
}

/// Evaluates the trigonometric interpolant with spectrum `spec` (as returned
/// by [`fft`] divided by `N`) at angle `th`. The Nyquist term is split evenly.
pub fn trig_eval(spec: &[C64], th: f64) -> C64 {
    let n = spec.len();
    let mut s = C64::new(0.0, 0.0);
    for (k, &c) in spec.iter().enumerate() {
        if n.is_multiple_of(2) && k == n / 2 {
            let h = n as f64 / 2.0;
            s += c * 0.5 * (C64::from_polar(1.0, h * th) + C64::from_polar(1.0, -h * th));
        } else {
            s += c * C64::from_polar(1.0, freq(k, n) * th);
        }
    }
    s
}

/// Normalized spectrum `fft(f) / N`.
pub fn spectrum(f: &[C64]) -> Vec<C64> {
    let n = f.len() as f64;
    fft(f).into_iter().map(|c| c / n).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn derivative_of_a_trig_polynomial() {
        let n = 32;
        let f: Vec<C64> = (0..n)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / n as f64;
                C64::new((3.0 * t).cos(), (2.0 * t).sin())
            })
            .collect();
        let (d1, _) = derivatives(&f);
        for (k, d) in d1.iter().enumerate() {
            let t = 2.0 * PI * k as f64 / n as f64;
            let want = C64::new(-3.0 * (3.0 * t).sin(), 2.0 * (2.0 * t).cos());
            assert!((d - want).norm() < 1e-12);
        }
        let spec = spectrum(&f);
        let v = trig_eval(&spec, 0.3);
        assert!((v - C64::new((0.9f64).cos(), (0.6f64).sin())).norm() < 1e-12);
    }

    #[test]
    fn analytic_extension_of_cosine() {
        let n = 16;
        let re: Vec<f64> = (0..n)
            .map(|k| (2.0 * PI * k as f64 / n as f64).cos())
            .collect();
        let f = analytic_from_real(&re);
        for (k, v) in f.iter().enumerate() {
            let z = C64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64);
            assert!((v - z).norm() < 1e-13);
        }
    }
}
