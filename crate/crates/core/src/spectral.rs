//! Square 2D FFTs on row-major `M×M` arrays and the matching wavenumbers.
//!
//! Index `(i, j)` maps to `i * M + j`, with `i` running along `x1`. The
//! forward transform is unnormalized (`e^{-i k x}`), the inverse divides by
//! `M²`.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub struct Fft2 {
    m: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2").field("m", &self.m).finish()
    }
}

impl Fft2 {
    pub fn new(m: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            m,
            forward: planner.plan_fft_forward(m),
            inverse: planner.plan_fft_inverse(m),
        }
    }

    pub fn size(&self) -> usize {
        self.m
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.forward);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inverse);
        let norm = 1.0 / (self.m * self.m) as f64;
        data.iter_mut().for_each(|v| *v *= norm);
    }

    pub fn forward_real(&self, data: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward(&mut buf);
        buf
    }

    /// Inverse transform keeping the real part.
    pub fn inverse_real(&self, mut spec: Vec<Complex64>) -> Vec<f64> {
        self.inverse(&mut spec);
        spec.into_iter().map(|v| v.re).collect()
    }

    fn transform(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let m = self.m;
        assert_eq!(data.len(), m * m, "Fft2 expects an M×M buffer");
        // rows (contiguous along j)
        fft.process(data);
        transpose_in_place(data, m);
        fft.process(data);
        transpose_in_place(data, m);
    }
}

fn transpose_in_place(data: &mut [Complex64], m: usize) {
    for i in 0..m {
        for j in (i + 1)..m {
            data.swap(i * m + j, j * m + i);
        }
    }
}

/// Signed integer frequency of FFT index `k` on an `m`-point axis.
pub fn signed_freq(k: usize, m: usize) -> i64 {
    if k < m.div_ceil(2) {
        k as i64
    } else {
        k as i64 - m as i64
    }
}

/// Angular wavenumbers `2π f / (2L)` for an axis of `m` points on `[-L, L)`.
/// The Nyquist entry (even `m`) is reported with its signed frequency `-m/2`.
pub fn wavenumbers(m: usize, half_width: f64) -> Vec<f64> {
    let base = std::f64::consts::PI / half_width;
    (0..m).map(|k| base * signed_freq(k, m) as f64).collect()
}

/// True for the unpaired Nyquist index, whose odd-derivative multiplier must
/// vanish for real fields.
pub fn is_nyquist(k: usize, m: usize) -> bool {
    m.is_multiple_of(2) && k == m / 2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_identity() {
        let m = 16;
        let data: Vec<f64> = (0..m * m).map(|k| ((k * 37) % 11) as f64 - 5.0).collect();
        let fft = Fft2::new(m);
        let back = fft.inverse_real(fft.forward_real(&data));
        for (a, b) in data.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn signed_frequencies() {
        let f: Vec<i64> = (0..6).map(|k| signed_freq(k, 6)).collect();
        assert_eq!(f, vec![0, 1, 2, -3, -2, -1]);
        assert!(is_nyquist(3, 6));
        assert!(!is_nyquist(2, 5));
    }

    #[test]
    fn single_mode_lands_in_one_bin() {
        let m = 8;
        let fft = Fft2::new(m);
        // cos(2π·2·i/m) along x1 only
        let data: Vec<f64> = (0..m * m)
            .map(|idx| (2.0 * std::f64::consts::PI * 2.0 * (idx / m) as f64 / m as f64).cos())
            .collect();
        let spec = fft.forward_real(&data);
        let big: Vec<usize> = (0..m * m).filter(|&k| spec[k].norm() > 1e-9).collect();
        assert_eq!(big, vec![2 * m, (m - 2) * m]);
    }
}
