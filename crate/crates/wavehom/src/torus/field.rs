//! Trigonometric polynomials on the unit torus `T^d`.
//!
//! A field stores Fourier coefficients `c_m` with `f(y) = sum c_m e^{2 pi i m.y}`
//! on the lattice `-N/2 < m_i < N/2`. The Nyquist row is kept at zero so every
//! real field stays real under differentiation and products.

use super::fft::{freq, slot, transform};
use num_complex::Complex64;
use std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicField {
    dim: usize,
    n: usize,
    coeffs: Vec<Complex64>,
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

impl PeriodicField {
    pub fn zeros(dim: usize, n: usize) -> Self {
        assert!(dim == 1 || dim == 2, "dimension {dim} is not supported");
        assert!(n >= 8 && n % 2 == 0, "resolution must be even and >= 8");
        PeriodicField {
            dim,
            n,
            coeffs: vec![ZERO; n.pow(dim as u32)],
        }
    }

    pub fn constant(dim: usize, n: usize, value: f64) -> Self {
        let mut f = Self::zeros(dim, n);
        f.coeffs[0] = Complex64::new(value, 0.0);
        f
    }

    /// Field from grid samples at `y_j = j / n` (row-major for d = 2),
    /// truncated to the open lattice.
    pub fn from_samples(dim: usize, n: usize, samples: &[f64]) -> Self {
        let mut f = Self::zeros(dim, n);
        assert_eq!(samples.len(), f.coeffs.len(), "sample count mismatch");
        for (c, s) in f.coeffs.iter_mut().zip(samples) {
            *c = Complex64::new(*s, 0.0);
        }
        transform(&mut f.coeffs, n, dim, false);
        let scale = 1.0 / f.coeffs.len() as f64;
        for c in f.coeffs.iter_mut() {
            *c *= scale;
        }
        f.clear_nyquist();
        f
    }

    pub fn from_fn(dim: usize, n: usize, g: impl Fn(&[f64]) -> f64) -> Self {
        let samples = grid_points(dim, n).iter().map(|y| g(y)).collect::<Vec<_>>();
        Self::from_samples(dim, n, &samples)
    }

    /// Builds a field from a closure over signed frequencies.
    pub fn from_coeff_fn(dim: usize, n: usize, g: impl Fn(&[i64]) -> Complex64) -> Self {
        let mut f = Self::zeros(dim, n);
        for idx in 0..f.coeffs.len() {
            let m = f.freqs_of(idx);
            f.coeffs[idx] = g(&m[..dim]);
        }
        f.clear_nyquist();
        f
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Signed frequency vector of flat slot `idx` (second entry 0 for d = 1).
    pub fn freqs_of(&self, idx: usize) -> [i64; 2] {
        match self.dim {
            1 => [freq(idx, self.n), 0],
            _ => [freq(idx / self.n, self.n), freq(idx % self.n, self.n)],
        }
    }

    pub fn is_nyquist(&self, idx: usize) -> bool {
        let h = (self.n / 2) as i64;
        let m = self.freqs_of(idx);
        m[..self.dim].iter().any(|&v| v == h)
    }

    fn clear_nyquist(&mut self) {
        for idx in 0..self.coeffs.len() {
            if self.is_nyquist(idx) {
                self.coeffs[idx] = ZERO;
            }
        }
    }

    /// Coefficient of frequency `m`, zero outside the lattice.
    pub fn coeff(&self, m: &[i64]) -> Complex64 {
        let h = (self.n / 2) as i64;
        if m.iter().take(self.dim).any(|&v| v.abs() >= h) {
            return ZERO;
        }
        let idx = match self.dim {
            1 => slot(m[0], self.n),
            _ => slot(m[0], self.n) * self.n + slot(m[1], self.n),
        };
        self.coeffs[idx]
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    /// `(I - pi) f`.
    pub fn project_mean(&self) -> Self {
        let mut f = self.clone();
        f.coeffs[0] = ZERO;
        f
    }

    /// Grid samples at `y_j = j / n`.
    pub fn samples(&self) -> Vec<f64> {
        self.samples_on(self.n)
    }

    /// Samples on a finer (or equal) grid of `m` points per axis.
    pub fn samples_on(&self, m: usize) -> Vec<f64> {
        assert!(m >= self.n, "sampling grid must not be coarser than the field");
        let buf = self.padded(m);
        buf.into_iter().map(|c| c.re).collect()
    }

    /// Complex grid values on an `m^d` grid (inverse transform of the zero-padded spectrum).
    pub(crate) fn padded(&self, m: usize) -> Vec<Complex64> {
        let mut buf = vec![ZERO; m.pow(self.dim as u32)];
        for idx in 0..self.coeffs.len() {
            let c = self.coeffs[idx];
            if c == ZERO {
                continue;
            }
            let f = self.freqs_of(idx);
            let j = match self.dim {
                1 => slot(f[0], m),
                _ => slot(f[0], m) * m + slot(f[1], m),
            };
            buf[j] = c;
        }
        transform(&mut buf, m, self.dim, true);
        buf
    }

    /// Inverse of `padded`: forward transform of `m^d` grid values, truncated to this lattice.
    pub(crate) fn truncate_from(dim: usize, n: usize, m: usize, mut buf: Vec<Complex64>) -> Self {
        transform(&mut buf, m, dim, false);
        let scale = 1.0 / buf.len() as f64;
        let mut f = Self::zeros(dim, n);
        for idx in 0..f.coeffs.len() {
            if f.is_nyquist(idx) {
                continue;
            }
            let fr = f.freqs_of(idx);
            let j = match dim {
                1 => slot(fr[0], m),
                _ => slot(fr[0], m) * m + slot(fr[1], m),
            };
            f.coeffs[idx] = buf[j] * scale;
        }
        f
    }

    /// Point evaluation by direct summation (real part).
    pub fn eval(&self, y: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (idx, c) in self.coeffs.iter().enumerate() {
            if *c == ZERO {
                continue;
            }
            let m = self.freqs_of(idx);
            let phase = 2.0 * PI * (0..self.dim).map(|i| m[i] as f64 * y[i]).sum::<f64>();
            acc += c.re * phase.cos() - c.im * phase.sin();
        }
        acc
    }

    /// Spectral derivative `d/dy_axis`.
    pub fn derivative(&self, axis: usize) -> Self {
        let mut f = self.clone();
        for idx in 0..f.coeffs.len() {
            let m = f.freqs_of(idx)[axis] as f64;
            f.coeffs[idx] *= Complex64::new(0.0, 2.0 * PI * m);
        }
        f
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut f = self.clone();
        for c in f.coeffs.iter_mut() {
            *c *= s;
        }
        f
    }

    /// `self += s * other`.
    pub fn axpy(&mut self, s: f64, other: &PeriodicField) {
        self.check_same(other);
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b * s;
        }
    }

    pub fn add(&self, other: &PeriodicField) -> Self {
        let mut f = self.clone();
        f.axpy(1.0, other);
        f
    }

    pub fn sub(&self, other: &PeriodicField) -> Self {
        let mut f = self.clone();
        f.axpy(-1.0, other);
        f
    }

    /// `int_T f g dy` for real fields.
    pub fn inner(&self, other: &PeriodicField) -> f64 {
        self.check_same(other);
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a * b.conj()).re)
            .sum()
    }

    /// L2 norm on the torus.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == ZERO)
    }

    /// Largest imaginary part of the grid samples, a realness check.
    pub fn max_imag_sample(&self) -> f64 {
        self.padded(self.n).iter().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    fn check_same(&self, other: &PeriodicField) {
        assert!(
            self.dim == other.dim && self.n == other.n,
            "field shapes differ: ({}, {}) vs ({}, {})",
            self.dim,
            self.n,
            other.dim,
            other.n
        );
    }
}

/// Collocation points `j / n` in row-major order.
pub fn grid_points(dim: usize, n: usize) -> Vec<Vec<f64>> {
    let h = 1.0 / n as f64;
    match dim {
        1 => (0..n).map(|i| vec![i as f64 * h]).collect(),
        2 => (0..n * n)
            .map(|k| vec![(k / n) as f64 * h, (k % n) as f64 * h])
            .collect(),
        _ => panic!("dimension {dim} is not supported"),
    }
}
