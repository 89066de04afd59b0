//! Separable sources `f(t, x) = p(t) g(x)` supported in `0 <= t <= 1`.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Time profile supported in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub enum TimePulse {
    /// `exp(1 - 1/(4 t (1 - t)))`: C-infinity, every derivative vanishes at both ends.
    SmoothBump,
    /// `t^2 (1 - t)^2`, continuously differentiable once at the ends.
    Polynomial,
    /// Constant value on `[0, 1)`.
    Constant(f64),
}

impl TimePulse {
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "bump" | "smooth_bump" => Ok(TimePulse::SmoothBump),
            "poly" | "polynomial" => Ok(TimePulse::Polynomial),
            _ => {
                if let Some(v) = s.strip_prefix("constant(").and_then(|r| r.strip_suffix(')')) {
                    let c = v.trim().parse::<f64>().map_err(|e| Error::invalid(format!("pulse '{s}': {e}")))?;
                    Ok(TimePulse::Constant(c))
                } else {
                    Err(Error::invalid(format!("unknown time pulse '{s}'")))
                }
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            TimePulse::SmoothBump => "bump".into(),
            TimePulse::Polynomial => "poly".into(),
            TimePulse::Constant(c) => format!("constant({c})"),
        }
    }

    /// Support `[0, 1]`.
    pub fn support(&self) -> (f64, f64) {
        (0.0, 1.0)
    }

    pub fn value(&self, t: f64) -> f64 {
        self.derivatives(t, 0)[0]
    }

    /// `[p(t), p'(t), .., p^(n)(t)]`, one-sided limits from inside at the ends.
    pub fn derivatives(&self, t: f64, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n + 1];
        match self {
            TimePulse::SmoothBump => {
                if t <= 0.0 || t >= 1.0 {
                    return out;
                }
                bump_jet(t, n, &mut out);
            }
            TimePulse::Polynomial => {
                if !(0.0..=1.0).contains(&t) {
                    return out;
                }
                // t^2 - 2 t^3 + t^4
                let c = [0.0, 0.0, 1.0, -2.0, 1.0];
                for (k, o) in out.iter_mut().enumerate() {
                    let mut v = 0.0;
                    for (p, cp) in c.iter().enumerate().skip(k) {
                        let fall: f64 = ((p - k + 1)..=p).map(|x| x as f64).product();
                        v += cp * fall * t.powi((p - k) as i32);
                    }
                    *o = v;
                }
            }
            TimePulse::Constant(c) => {
                if (0.0..1.0).contains(&t) {
                    out[0] = *c;
                }
            }
        }
        out
    }

    /// Derivatives as one-sided limits from inside the support at `t = 0` (`right = true`) or `t = 1`.
    pub fn boundary_derivatives(&self, at_start: bool, n: usize) -> Vec<f64> {
        match self {
            TimePulse::SmoothBump => vec![0.0; n + 1],
            TimePulse::Polynomial => self.derivatives(if at_start { 0.0 } else { 1.0 }, n),
            TimePulse::Constant(c) => {
                let mut v = vec![0.0; n + 1];
                v[0] = *c;
                v
            }
        }
    }

    /// `int_0^1 p(s) e^{i omega s} ds` by composite Gauss-Legendre quadrature.
    pub fn fourier(&self, omega: f64) -> Complex64 {
        let panels = (32.0_f64).max((omega.abs() / 2.0).ceil()) as usize;
        let (nodes, weights) = gauss_legendre(10);
        let h = 1.0 / panels as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for p in 0..panels {
            let a = p as f64 * h;
            for (x, w) in nodes.iter().zip(&weights) {
                let s = a + 0.5 * h * (x + 1.0);
                acc += Complex64::from_polar(0.5 * h * w * self.value(s), omega * s);
            }
        }
        acc
    }
}

/// Taylor-mode derivatives of `exp(1 - 1/w)`, `w = 4 t (1 - t)`.
fn bump_jet(t: f64, n: usize, out: &mut [f64]) {
    let w = [4.0 * t * (1.0 - t), 4.0 - 8.0 * t, -4.0];
    let mut inv = vec![0.0; n + 1];
    inv[0] = 1.0 / w[0];
    for k in 1..=n {
        let mut s = w[1] * inv[k - 1];
        if k >= 2 {
            s += w[2] * inv[k - 2];
        }
        inv[k] = -s / w[0];
    }
    let h: Vec<f64> = (0..=n).map(|k| if k == 0 { 1.0 - inv[0] } else { -inv[k] }).collect();
    let mut p = vec![0.0; n + 1];
    p[0] = h[0].exp();
    for k in 1..=n {
        let mut s = 0.0;
        for j in 1..=k {
            s += j as f64 * h[j] * p[k - j];
        }
        p[k] = s / k as f64;
    }
    let mut fact = 1.0;
    for k in 0..=n {
        if k > 0 {
            fact *= k as f64;
        }
        out[k] = fact * p[k];
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let (pn, pn1) = if n == 1 { (z, 1.0) } else { (p1, p0) };
            let dp = n as f64 * (z * pn - pn1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0, z);
        for k in 2..=n {
            let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Spatial profile on the real line, periodized on the box.
#[derive(Clone, Debug, PartialEq)]
pub enum SpatialProfile {
    /// `amplitude exp(-(x - center)^2 / (2 width^2))`.
    Gaussian { center: f64, width: f64, amplitude: f64 },
    /// Grid samples on `[-L/2, L/2)` for a box of length `box_len`.
    Samples { box_len: f64, values: Vec<f64> },
}

impl SpatialProfile {
    pub fn gaussian(width: f64) -> Self {
        SpatialProfile::Gaussian {
            center: 0.0,
            width,
            amplitude: 1.0,
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            SpatialProfile::Gaussian { center, width, amplitude } => amplitude * (-(x - center).powi(2) / (2.0 * width * width)).exp(),
            SpatialProfile::Samples { box_len, values } => {
                let n = values.len();
                let h = box_len / n as f64;
                let j = ((x + 0.5 * box_len) / h).round().rem_euclid(n as f64) as usize;
                values[j]
            }
        }
    }

    /// Box Fourier coefficient `(1/L) int g(x) e^{-i xi x} dx` at `xi = 2 pi q / L`.
    pub fn box_coefficient(&self, q: i64, box_len: f64) -> Result<Complex64> {
        let xi = 2.0 * PI * q as f64 / box_len;
        match self {
            SpatialProfile::Gaussian { center, width, amplitude } => {
                let mag = amplitude * width * (2.0 * PI).sqrt() / box_len * (-0.5 * (xi * width).powi(2)).exp();
                Ok(Complex64::from_polar(mag, -xi * center))
            }
            SpatialProfile::Samples { box_len: l, values } => {
                if (l - box_len).abs() > 1e-12 * box_len {
                    return Err(Error::invalid("sampled profile was given on a different box"));
                }
                let n = values.len();
                let h = box_len / n as f64;
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, v) in values.iter().enumerate() {
                    let x = -0.5 * box_len + j as f64 * h;
                    acc += Complex64::from_polar(*v, -xi * x);
                }
                Ok(acc / n as f64)
            }
        }
    }

    /// Half-width beyond which the profile is below `1e-16` of its peak.
    pub fn radius(&self) -> f64 {
        match self {
            SpatialProfile::Gaussian { center, width, .. } => center.abs() + width * (2.0 * 16.0 * 10f64.ln()).sqrt(),
            SpatialProfile::Samples { box_len, .. } => 0.5 * box_len,
        }
    }

    /// Frequency beyond which box coefficients fall below `tol` relative to the peak.
    pub fn frequency_cutoff(&self, tol: f64) -> f64 {
        match self {
            SpatialProfile::Gaussian { width, .. } => (2.0 * (1.0 / tol).ln()).sqrt() / width,
            SpatialProfile::Samples { box_len, values } => PI * values.len() as f64 / box_len,
        }
    }
}

/// `f(t, x) = p(t) g(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceTerm {
    pub pulse: TimePulse,
    pub profile: SpatialProfile,
}

impl SourceTerm {
    pub fn new(pulse: TimePulse, profile: SpatialProfile) -> Self {
        SourceTerm { pulse, profile }
    }

    /// Smooth bump in time times a unit Gaussian of the given width.
    pub fn default_with_width(width: f64) -> Self {
        SourceTerm::new(TimePulse::SmoothBump, SpatialProfile::gaussian(width))
    }

    pub fn value(&self, t: f64, x: f64) -> f64 {
        self.pulse.value(t) * self.profile.value(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_jet_matches_finite_differences() {
        let p = TimePulse::SmoothBump;
        let t = 0.37;
        let d = p.derivatives(t, 3);
        let h = 1e-4;
        let fd1 = (p.value(t + h) - p.value(t - h)) / (2.0 * h);
        let fd2 = (p.value(t + h) - 2.0 * p.value(t) + p.value(t - h)) / (h * h);
        assert!((d[1] - fd1).abs() < 1e-6 * d[1].abs().max(1.0));
        assert!((d[2] - fd2).abs() < 1e-4 * d[2].abs().max(1.0));
        assert!((p.value(0.5) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(6);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(10)).sum();
        assert!((s - 2.0 / 11.0).abs() < 1e-14);
    }
}
