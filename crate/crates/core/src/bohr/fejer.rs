//! Fejér smoothing of step functions on the circle.

use std::f64::consts::TAU;

use num_complex::Complex64;

/// `e(x) = exp(2πix)`.
#[inline]
pub fn e(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, TAU * x)
}

/// Upper bound for `∫ |t| F_K(t) dt` over one period, from
/// `F_K(t) <= min(K+1, 1/(4(K+1)t²))`.
pub fn first_moment_bound(order: usize) -> f64 {
    let k1 = (order + 1) as f64;
    (1.0 + 2.0 * k1.ln()) / (4.0 * k1)
}

/// L1 distance bound between an interval indicator and its Fejér mean of order `K`
/// (one unit jump at each end).
pub fn interval_error(order: usize) -> f64 {
    2.0 * first_moment_bound(order)
}

/// Fourier coefficient of `1_{[lo,hi)}` at frequency `h`.
pub fn interval_coefficient(lo: f64, hi: f64, h: i64) -> Complex64 {
    if h == 0 {
        return Complex64::new(hi - lo, 0.0);
    }
    let hf = h as f64;
    (e(-hf * lo) - e(-hf * hi)) / Complex64::new(0.0, TAU * hf)
}

/// Fejér weight `1 - |h|/(K+1)`.
#[inline]
pub fn weight(order: usize, h: i64) -> f64 {
    1.0 - h.unsigned_abs() as f64 / (order + 1) as f64
}

/// Smoothed coefficients of `1_{[lo,hi)}` for `h = 0..=K`; negative frequencies are
/// the conjugates.
pub fn smoothed_interval(lo: f64, hi: f64, order: usize) -> Vec<Complex64> {
    (0..=order as i64).map(|h| interval_coefficient(lo, hi, h) * weight(order, h)).collect()
}

/// `Σ_{|h| <= K} c(h) e(hx)` for a real function given by `c(0..=K)`.
pub fn eval_real(coeffs: &[Complex64], x: f64) -> f64 {
    let step = e(x);
    let mut z = step;
    let mut s = 0.0;
    for c in &coeffs[1..] {
        s += (c * z).re;
        z *= step;
    }
    coeffs[0].re + 2.0 * s
}
