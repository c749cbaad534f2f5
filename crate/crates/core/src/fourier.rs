//! FFT helpers for equispaced samples of periodic functions.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::series::LaurentPoly;

/// Signed frequency of FFT bin `k` for `m` samples.
fn frequency(k: usize, m: usize) -> i64 {
    if k <= m / 2 {
        k as i64
    } else {
        k as i64 - m as i64
    }
}

/// Normalized discrete Fourier coefficients: `v[j] = sum_k c[k] e^(i freq(k) t_j)`.
pub fn fourier_coefficients(v: &[Complex64]) -> Vec<Complex64> {
    let mut buf = v.to_vec();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    let scale = 1.0 / v.len() as f64;
    buf.iter_mut().for_each(|c| *c *= scale);
    buf
}

/// Derivative in `t` of the trigonometric interpolant of samples at `t_j = 2 pi j / m`.
pub fn spectral_derivative(v: &[Complex64]) -> Vec<Complex64> {
    let m = v.len();
    let mut c = fourier_coefficients(v);
    for (k, ck) in c.iter_mut().enumerate() {
        let f = frequency(k, m);
        // the Nyquist mode has no odd extension
        if m % 2 == 0 && k == m / 2 {
            *ck = Complex64::default();
        } else {
            *ck *= Complex64::new(0.0, f as f64);
        }
    }
    FftPlanner::new().plan_fft_inverse(m).process(&mut c);
    c
}

/// Laurent polynomial in `u` with degrees in `lo..=hi` interpolating
/// samples taken at `u_j = r e^(2 pi i j / m)`.
///
/// Requires `hi - lo < m`; degrees outside the window alias into it.
pub fn laurent_fit(v: &[Complex64], r: f64, lo: i32, hi: i32) -> LaurentPoly {
    let m = v.len();
    assert!(((hi - lo) as usize) < m, "fit window wider than the sample count");
    let c = fourier_coefficients(v);
    let terms: Vec<(i32, Complex64)> = (lo..=hi)
        .map(|d| {
            let k = (d as i64).rem_euclid(m as i64) as usize;
            (d, c[k] / r.powi(d))
        })
        .collect();
    LaurentPoly::from_terms(terms).expect("finite fit")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn derivative_of_trig_polynomial() {
        let m = 64;
        let t: Vec<f64> = (0..m).map(|j| 2.0 * PI * j as f64 / m as f64).collect();
        let v: Vec<Complex64> = t.iter().map(|&t| Complex64::new((3.0 * t).sin(), (-2.0 * t).cos())).collect();
        let d = spectral_derivative(&v);
        for (k, &t) in t.iter().enumerate() {
            let exact = Complex64::new(3.0 * (3.0 * t).cos(), 2.0 * (-2.0 * t).sin());
            assert!((d[k] - exact).norm() < 1e-12);
        }
    }

    #[test]
    fn fit_recovers_laurent_polynomial() {
        let p = LaurentPoly::from_terms([
            (-2, Complex64::new(0.3, 0.1)),
            (0, Complex64::new(1.0, 0.0)),
            (5, Complex64::new(-0.2, 0.7)),
        ])
        .unwrap();
        let r = 0.9;
        let v: Vec<Complex64> =
            (0..32).map(|j| p.eval_unchecked(Complex64::from_polar(r, 2.0 * PI * j as f64 / 32.0))).collect();
        let q = laurent_fit(&v, r, -4, 8).prune(1e-13);
        assert!(q.max_coeff_distance(&p) < 1e-13);
    }
}
