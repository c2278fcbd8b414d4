//! Iterative radix-2 FFT over `Complex<f64>`, power-of-two lengths only.
//!
//! Everything in the pipeline runs on 2048-point (and 512-point) frames, so
//! a plain Cooley-Tukey kernel with precomputed twiddles is all we need.
//! Forward transform is unnormalized; the inverse divides by N.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Precomputed plan for one transform length.
pub struct Fft {
    len: usize,
    twiddles: Vec<Complex64>,
}

impl Fft {
    pub fn new(len: usize) -> Result<Self> {
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::Contract("FFT length must be a power of two"));
        }
        let mut twiddles = Vec::with_capacity(len / 2);
        for k in 0..len / 2 {
            let theta = -2.0 * core::f64::consts::PI * k as f64 / len as f64;
            twiddles.push(Complex64::new(libm::cos(theta), libm::sin(theta)));
        }
        Ok(Fft { len, twiddles })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    /// In-place forward DFT.
    pub fn forward(&self, buf: &mut [Complex64]) {
        assert_eq!(buf.len(), self.len, "buffer length mismatch");
        self.transform(buf, false);
    }

    /// In-place inverse DFT, normalized by 1/N.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        assert_eq!(buf.len(), self.len, "buffer length mismatch");
        self.transform(buf, true);
        let scale = 1.0 / self.len as f64;
        for v in buf.iter_mut() {
            *v *= scale;
        }
    }

    fn transform(&self, buf: &mut [Complex64], inverse: bool) {
        let n = self.len;
        if n == 1 {
            return;
        }
        // bit-reversal permutation
        let bits = n.trailing_zeros();
        for i in 0..n {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            if j > i {
                buf.swap(i, j);
            }
        }
        let mut size = 2;
        while size <= n {
            let half = size / 2;
            let stride = n / size;
            for start in (0..n).step_by(size) {
                for k in 0..half {
                    let mut w = self.twiddles[k * stride];
                    if inverse {
                        w = w.conj();
                    }
                    let even = buf[start + k];
                    let odd = buf[start + k + half] * w;
                    buf[start + k] = even + odd;
                    buf[start + k + half] = even - odd;
                }
            }
            size *= 2;
        }
    }
}

/// Forward DFT of a real frame, returning the n/2+1 non-redundant bins.
pub fn real_forward(plan: &Fft, frame: &[f64]) -> Vec<Complex64> {
    let n = plan.len();
    assert_eq!(frame.len(), n);
    let mut buf: Vec<Complex64> = frame.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    plan.forward(&mut buf);
    buf.truncate(n / 2 + 1);
    buf
}

/// Inverse of `real_forward`: expands Hermitian symmetry and returns the
/// real time-domain frame.
pub fn real_inverse(plan: &Fft, half: &[Complex64]) -> Vec<f64> {
    let n = plan.len();
    assert_eq!(half.len(), n / 2 + 1);
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    buf[..half.len()].copy_from_slice(half);
    for k in 1..n / 2 {
        buf[n - k] = half[k].conj();
    }
    plan.inverse(&mut buf);
    buf.into_iter().map(|c| c.re).collect()
}

/// Smallest power of two >= n (n >= 1).
pub fn next_pow2(n: usize) -> usize {
    n.next_power_of_two()
}

/// DFT plan for arbitrary lengths: radix-2 directly when the length is a
/// power of two, otherwise Bluestein's chirp-z reduction onto one.
pub struct Dft {
    len: usize,
    kind: DftKind,
}

enum DftKind {
    Radix2(Fft),
    Bluestein {
        plan: Fft,
        /// chirp[j] = exp(-i pi j^2 / n)
        chirp: Vec<Complex64>,
        /// FFT of the conjugate-chirp convolution kernel, length m.
        kernel: Vec<Complex64>,
    },
}

impl Dft {
    pub fn new(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::Contract("DFT length must be positive"));
        }
        if len.is_power_of_two() {
            return Ok(Dft { len, kind: DftKind::Radix2(Fft::new(len)?) });
        }
        let m = next_pow2(2 * len - 1);
        let plan = Fft::new(m)?;
        // j^2 reduced mod 2n keeps the argument small so the angle is exact
        let chirp: Vec<Complex64> = (0..len)
            .map(|j| {
                let sq = ((j as u128 * j as u128) % (2 * len as u128)) as f64;
                let theta = -core::f64::consts::PI * sq / len as f64;
                Complex64::new(libm::cos(theta), libm::sin(theta))
            })
            .collect();
        let mut kernel = vec![Complex64::new(0.0, 0.0); m];
        kernel[0] = chirp[0].conj();
        for j in 1..len {
            kernel[j] = chirp[j].conj();
            kernel[m - j] = chirp[j].conj();
        }
        plan.forward(&mut kernel);
        Ok(Dft { len, kind: DftKind::Bluestein { plan, chirp, kernel } })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    /// In-place forward DFT.
    pub fn forward(&self, buf: &mut [Complex64]) {
        assert_eq!(buf.len(), self.len, "buffer length mismatch");
        match &self.kind {
            DftKind::Radix2(plan) => plan.forward(buf),
            DftKind::Bluestein { plan, chirp, kernel } => {
                let m = plan.len();
                let mut a = vec![Complex64::new(0.0, 0.0); m];
                for (j, v) in buf.iter().enumerate() {
                    a[j] = v * chirp[j];
                }
                plan.forward(&mut a);
                for (av, kv) in a.iter_mut().zip(kernel) {
                    *av *= kv;
                }
                plan.inverse(&mut a);
                for (k, v) in buf.iter_mut().enumerate() {
                    *v = a[k] * chirp[k];
                }
            }
        }
    }

    /// In-place inverse DFT, normalized by 1/N.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        assert_eq!(buf.len(), self.len, "buffer length mismatch");
        if let DftKind::Radix2(plan) = &self.kind {
            plan.inverse(buf);
            return;
        }
        for v in buf.iter_mut() {
            *v = v.conj();
        }
        self.forward(buf);
        let scale = 1.0 / self.len as f64;
        for v in buf.iter_mut() {
            *v = v.conj() * scale;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng as _, SeedableRng};

    fn naive_dft(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                (0..n)
                    .map(|t| {
                        let theta = -2.0 * std::f64::consts::PI * (k * t) as f64 / n as f64;
                        x[t] * Complex64::new(theta.cos(), theta.sin())
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(1);
        for &n in &[2usize, 8, 64, 256] {
            let x: Vec<Complex64> = (0..n)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let want = naive_dft(&x);
            let plan = Fft::new(n).unwrap();
            let mut got = x.clone();
            plan.forward(&mut got);
            for (a, b) in got.iter().zip(&want) {
                assert!((a - b).norm() < 1e-9 * (n as f64), "n={n}");
            }
        }
    }

    #[test]
    fn matches_rustfft() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(2);
        let n = 2048;
        let x: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), 0.0))
            .collect();
        let plan = Fft::new(n).unwrap();
        let mut got = x.clone();
        plan.forward(&mut got);

        let mut planner = rustfft::FftPlanner::new();
        let oracle = planner.plan_fft_forward(n);
        let mut want = x.clone();
        oracle.process(&mut want);
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).norm() < 1e-8);
        }
    }

    #[test]
    fn roundtrip() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        let n = 512;
        let x: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let plan = Fft::new(n).unwrap();
        let mut buf = x.clone();
        plan.forward(&mut buf);
        plan.inverse(&mut buf);
        for (a, b) in buf.iter().zip(&x) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn real_halfspectrum_roundtrip() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(4);
        let n = 256;
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let plan = Fft::new(n).unwrap();
        let half = real_forward(&plan, &x);
        assert_eq!(half.len(), n / 2 + 1);
        let back = real_inverse(&plan, &half);
        for (a, b) in back.iter().zip(&x) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_pow2() {
        assert!(Fft::new(0).is_err());
        assert!(Fft::new(1000).is_err());
    }

    #[test]
    fn dft_matches_naive_for_awkward_lengths() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        for &n in &[1usize, 3, 7, 12, 100, 257, 1000] {
            let x: Vec<Complex64> = (0..n)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let want = naive_dft(&x);
            let plan = Dft::new(n).unwrap();
            let mut got = x.clone();
            plan.forward(&mut got);
            for (a, b) in got.iter().zip(&want) {
                assert!((a - b).norm() < 1e-9 * (n as f64), "n={n}");
            }
            plan.inverse(&mut got);
            for (a, b) in got.iter().zip(&x) {
                assert!((a - b).norm() < 1e-10, "roundtrip n={n}");
            }
        }
    }

    #[test]
    fn dft_matches_rustfft_large_prime() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(6);
        let n = 4801;
        let x: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let plan = Dft::new(n).unwrap();
        let mut got = x.clone();
        plan.forward(&mut got);

        let mut planner = rustfft::FftPlanner::new();
        let oracle = planner.plan_fft_forward(n);
        let mut want = x;
        oracle.process(&mut want);
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).norm() < 1e-7);
        }
    }

    #[test]
    fn dft_pow2_path_matches_fft() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let n = 1024;
        let x: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), 0.0))
            .collect();
        let fft = Fft::new(n).unwrap();
        let dft = Dft::new(n).unwrap();
        let mut a = x.clone();
        let mut b = x;
        fft.forward(&mut a);
        dft.forward(&mut b);
        assert_eq!(a, b);
    }
}
