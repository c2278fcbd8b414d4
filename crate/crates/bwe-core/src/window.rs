//! Window functions: periodic Hann for STFT framing, Kaiser for FIR design.

use alloc::vec::Vec;

/// Periodic Hann window of length n. At 75% overlap the squared windows
/// sum to the constant 1.5, which the ISTFT normalization relies on.
pub fn hann_periodic(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let theta = 2.0 * core::f64::consts::PI * i as f64 / n as f64;
            0.5 * (1.0 - libm::cos(theta))
        })
        .collect()
}

/// Symmetric Hann window (zero at both ends), used by the STOI framing.
pub fn hann_symmetric(n: usize) -> Vec<f64> {
    if n == 1 {
        return alloc::vec![1.0];
    }
    (0..n)
        .map(|i| {
            let theta = 2.0 * core::f64::consts::PI * i as f64 / (n - 1) as f64;
            0.5 * (1.0 - libm::cos(theta))
        })
        .collect()
}

/// Zeroth-order modified Bessel function of the first kind.
pub fn bessel_i0(x: f64) -> f64 {
    // power series; converges quickly for the beta range we use
    let mut sum = 1.0;
    let mut term = 1.0;
    let half_x = x / 2.0;
    for k in 1..64 {
        term *= (half_x / k as f64) * (half_x / k as f64);
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    sum
}

/// Kaiser window of length n with shape parameter beta.
pub fn kaiser(n: usize, beta: f64) -> Vec<f64> {
    let denom = bessel_i0(beta);
    let m = (n - 1) as f64;
    (0..n)
        .map(|i| {
            let r = 2.0 * i as f64 / m - 1.0;
            bessel_i0(beta * libm::sqrt((1.0 - r * r).max(0.0))) / denom
        })
        .collect()
}

/// Kaiser beta for a given stopband attenuation in dB.
pub fn kaiser_beta(atten_db: f64) -> f64 {
    if atten_db > 50.0 {
        0.1102 * (atten_db - 8.7)
    } else if atten_db > 21.0 {
        0.5842 * libm::pow(atten_db - 21.0, 0.4) + 0.07886 * (atten_db - 21.0)
    } else {
        0.0
    }
}
