//! Built-in media, random smooth media and the plain-text coefficient format.
//!
//! Text format: `dim <d>` and `n <N>` header lines, then one block per field
//! (`rho`, `a11`, and for d = 2 also `a12`, `a22`) holding `N^d` grid samples
//! in row-major order. Lines starting with `#` are ignored.

use super::cell::CellCoefficients;
use super::field::PeriodicField;
use crate::error::{Error, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::fmt::Write as _;

/// Two-phase laminate along `y_1`: `a1` on `[0, theta)`, `a2` on `[theta, 1)`.
///
/// `width = 0` samples the sharp interface on the grid and truncates to N
/// modes. `width > 0` mollifies the indicator with a Gaussian of that standard
/// deviation, which keeps every corrector spectrally resolved.
pub fn two_phase(dim: usize, n: usize, a1: f64, a2: f64, theta: f64, width: f64) -> Result<CellCoefficients> {
    if !(0.0 < theta && theta < 1.0) || a1 <= 0.0 || a2 <= 0.0 {
        return Err(Error::invalid("two_phase needs a1, a2 > 0 and 0 < theta < 1"));
    }
    let profile = if width > 0.0 {
        // Fourier coefficients of the indicator of [0, theta), then a Gaussian multiplier.
        let ind = PeriodicField::from_coeff_fn(1, n, |m| {
            let m = m[0];
            if m == 0 {
                Complex64::new(theta, 0.0)
            } else {
                let w = 2.0 * PI * m as f64;
                let val = (Complex64::new(0.0, -w * theta).exp() - 1.0) / Complex64::new(0.0, -w);
                val * (-0.5 * (w * width).powi(2)).exp()
            }
        });
        ind.scale(a1 - a2).add(&PeriodicField::constant(1, n, a2))
    } else {
        PeriodicField::from_fn(1, n, |y| if y[0] < theta { a1 } else { a2 })
    };
    let name = format!("two_phase({a1},{a2},{theta},{width})");
    laminate(dim, n, &profile).map(|c| c.with_name(name))
}

/// `a(y) = 1 + A sin(2 pi y_1)` in d = 1, `1 + A (sin 2 pi y_1 + sin 2 pi y_2) / 2` in d = 2, `rho = 1`.
pub fn smooth_sine(dim: usize, n: usize, amplitude: f64) -> Result<CellCoefficients> {
    if amplitude.abs() >= 1.0 {
        return Err(Error::invalid("smooth_sine amplitude must satisfy |A| < 1"));
    }
    let a = PeriodicField::from_fn(dim, n, |y| {
        if dim == 1 {
            1.0 + amplitude * (2.0 * PI * y[0]).sin()
        } else {
            1.0 + 0.5 * amplitude * ((2.0 * PI * y[0]).sin() + (2.0 * PI * y[1]).sin())
        }
    });
    let rho = PeriodicField::constant(dim, n, 1.0);
    let fields = if dim == 1 {
        vec![a]
    } else {
        vec![a.clone(), PeriodicField::zeros(dim, n), a]
    };
    CellCoefficients::new(rho, fields).map(|c| c.with_name(format!("smooth_sine({amplitude})")))
}

/// Isotropic coefficient depending on `y_1` only, `rho = 1`.
fn laminate(dim: usize, n: usize, profile: &PeriodicField) -> Result<CellCoefficients> {
    let rho = PeriodicField::constant(dim, n, 1.0);
    if dim == 1 {
        return CellCoefficients::new(rho, vec![profile.clone()]);
    }
    let p = profile.clone();
    let a = PeriodicField::from_coeff_fn(2, n, |m| if m[1] == 0 { p.coeff(&[m[0]]) } else { Complex64::new(0.0, 0.0) });
    CellCoefficients::new(rho, vec![a.clone(), PeriodicField::zeros(2, n), a])
}

/// Random smooth field `mean + sum_{0 < |m| <= modes} c_m e^{2 pi i m y}` with
/// oscillation bounded by `spread * mean`.
fn random_smooth_field(rng: &mut ChaCha8Rng, dim: usize, n: usize, mean: f64, spread: f64, modes: i64) -> PeriodicField {
    let mut f = PeriodicField::zeros(dim, n);
    let range: Vec<[i64; 2]> = if dim == 1 {
        (1..=modes).map(|m| [m, 0]).collect()
    } else {
        let mut v = Vec::new();
        for a in 0..=modes {
            for b in -modes..=modes {
                if a > 0 || b > 0 {
                    v.push([a, b]);
                }
            }
        }
        v
    };
    let mut total = 0.0;
    let mut picks = Vec::new();
    for m in range {
        let amp: f64 = rng.random_range(0.2..1.0) / (1.0 + (m[0].abs() + m[1].abs()) as f64);
        let phase: f64 = rng.random_range(0.0..2.0 * PI);
        total += 2.0 * amp;
        picks.push((m, Complex64::from_polar(amp, phase)));
    }
    let s = spread * mean / total;
    let set = |f: &mut PeriodicField, m: [i64; 2], c: Complex64| {
        let n = f.n();
        let idx = |m: [i64; 2]| -> usize {
            let i0 = m[0].rem_euclid(n as i64) as usize;
            if dim == 1 {
                i0
            } else {
                i0 * n + m[1].rem_euclid(n as i64) as usize
            }
        };
        f.coeffs_mut()[idx(m)] = c;
        f.coeffs_mut()[idx([-m[0], -m[1]])] = c.conj();
    };
    for (m, c) in picks {
        set(&mut f, m, c * s);
    }
    f.coeffs_mut()[0] = Complex64::new(mean, 0.0);
    f
}

/// Random smooth medium from a seed: band-limited `a` and `rho` with moderate contrast.
/// `vary_rho = false` keeps `rho = 1`.
pub fn random_smooth(dim: usize, n: usize, seed: u64, vary_rho: bool) -> Result<CellCoefficients> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes = 3;
    let mean_a: f64 = rng.random_range(1.0..2.0);
    let rho = if vary_rho {
        let mean_rho: f64 = rng.random_range(0.8..1.2);
        random_smooth_field(&mut rng, dim, n, mean_rho, 0.4, modes)
    } else {
        PeriodicField::constant(dim, n, 1.0)
    };
    let a = if dim == 1 {
        vec![random_smooth_field(&mut rng, dim, n, mean_a, 0.6, modes)]
    } else {
        let a11 = random_smooth_field(&mut rng, dim, n, mean_a, 0.5, modes);
        let ratio: f64 = rng.random_range(0.7..1.3);
        let a22 = random_smooth_field(&mut rng, dim, n, mean_a * ratio, 0.5, modes);
        // |a12| <= 0.2 mean_a keeps the smallest eigenvalue positive.
        let a12 = random_smooth_field(&mut rng, dim, n, 1.0, 1.0, modes)
            .project_mean()
            .scale(0.2 * mean_a);
        vec![a11, a12, a22]
    };
    CellCoefficients::new(rho, a).map(|c| c.with_name(format!("random_smooth(seed={seed})")))
}

/// Parses a medium name such as `two_phase(1,4,0.5)` or `smooth_sine(0.5)`.
pub fn named(spec: &str, dim: usize, n: usize) -> Result<CellCoefficients> {
    let spec = spec.trim();
    let (name, args) = match spec.find('(') {
        Some(p) if spec.ends_with(')') => (&spec[..p], &spec[p + 1..spec.len() - 1]),
        _ => (spec, ""),
    };
    let nums: Vec<f64> = if args.trim().is_empty() {
        Vec::new()
    } else {
        args.split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|e| Error::invalid(format!("medium '{spec}': {e}"))))
            .collect::<Result<_>>()?
    };
    match (name.trim(), nums.as_slice()) {
        ("two_phase", [a1, a2, th]) => two_phase(dim, n, *a1, *a2, *th, 0.0),
        ("two_phase", [a1, a2, th, w]) => two_phase(dim, n, *a1, *a2, *th, *w),
        ("smooth_sine", [amp]) => smooth_sine(dim, n, *amp),
        ("random_smooth", [seed]) => random_smooth(dim, n, *seed as u64, false),
        ("random_smooth_rho", [seed]) => random_smooth(dim, n, *seed as u64, true),
        ("constant", [a]) => {
            let rho = PeriodicField::constant(dim, n, 1.0);
            let f = PeriodicField::constant(dim, n, *a);
            let fields = if dim == 1 { vec![f] } else { vec![f.clone(), PeriodicField::zeros(dim, n), f] };
            CellCoefficients::new(rho, fields).map(|c| c.with_name(format!("constant({a})")))
        }
        _ => Err(Error::invalid(format!("unknown medium '{spec}'"))),
    }
}

fn field_names(dim: usize) -> &'static [&'static str] {
    if dim == 1 {
        &["rho", "a11"]
    } else {
        &["rho", "a11", "a12", "a22"]
    }
}

/// Reads the plain-text coefficient format.
pub fn parse_coefficients(text: &str) -> Result<CellCoefficients> {
    let mut dim = None;
    let mut n = None;
    let mut blocks: Vec<(String, Vec<f64>)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut words = line.split_whitespace();
        let head = words.next().unwrap_or_default();
        let perr = |msg: String| Error::Parse { line: lineno + 1, msg };
        match head {
            "dim" | "n" => {
                let v: usize = words
                    .next()
                    .ok_or_else(|| perr(format!("missing value for {head}")))?
                    .parse()
                    .map_err(|e| perr(format!("{e}")))?;
                if head == "dim" {
                    dim = Some(v)
                } else {
                    n = Some(v)
                }
            }
            "rho" | "a11" | "a12" | "a22" => blocks.push((head.to_string(), Vec::new())),
            _ => {
                let block = blocks.last_mut().ok_or_else(|| perr("samples before any field name".into()))?;
                for w in line.split_whitespace() {
                    block.1.push(w.parse().map_err(|e| perr(format!("bad number '{w}': {e}")))?);
                }
            }
        }
    }
    let dim = dim.ok_or_else(|| Error::invalid("missing 'dim' header"))?;
    let n = n.ok_or_else(|| Error::invalid("missing 'n' header"))?;
    if !(dim == 1 || dim == 2) || n < 8 || n % 2 != 0 {
        return Err(Error::invalid(format!("unsupported header dim = {dim}, n = {n}")));
    }
    let mut fields = Vec::new();
    for name in field_names(dim) {
        let (_, vals) = blocks
            .iter()
            .find(|(b, _)| b == name)
            .ok_or_else(|| Error::invalid(format!("missing field '{name}'")))?;
        if vals.len() != n.pow(dim as u32) {
            return Err(Error::invalid(format!("field '{name}' has {} samples, expected {}", vals.len(), n.pow(dim as u32))));
        }
        fields.push(PeriodicField::from_samples(dim, n, vals));
    }
    let rho = fields.remove(0);
    CellCoefficients::new(rho, fields)
}

/// Writes grid samples in the plain-text coefficient format.
pub fn format_coefficients(c: &CellCoefficients) -> String {
    let mut s = format!("# medium {}\ndim {}\nn {}\n", c.name, c.dim(), c.n());
    let mut push = |name: &str, f: &PeriodicField| {
        let _ = writeln!(s, "{name}");
        for chunk in f.samples().chunks(8) {
            let line: Vec<String> = chunk.iter().map(|v| format!("{v:.17e}")).collect();
            let _ = writeln!(s, "{}", line.join(" "));
        }
    };
    push("rho", c.rho());
    let names = &field_names(c.dim())[1..];
    for (name, f) in names.iter().zip(c.a_fields()) {
        push(name, f);
    }
    s
}
