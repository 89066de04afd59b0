//! Least-squares power-law fits with 95% confidence intervals.

use crate::error::{Error, Result};
use statrs::distribution::{ContinuousCDF, StudentsT};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Half-width of the 95% interval of the slope (infinite with 2 points).
    pub slope_half_width: f64,
    pub points: usize,
}

impl LinearFit {
    pub fn slope_interval(&self) -> (f64, f64) {
        (self.slope - self.slope_half_width, self.slope + self.slope_half_width)
    }
}

/// Ordinary least squares `y = intercept + slope x`.
pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    let n = x.len();
    if n != y.len() || n < 2 {
        return Err(Error::invalid("a line fit needs at least two paired points"));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::invalid("fit data contain non-finite values"));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("fit abscissae are all equal"));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let half = if n > 2 {
        let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
        let se = (rss / (nf - 2.0) / sxx).sqrt();
        let t = StudentsT::new(0.0, 1.0, nf - 2.0).map_err(|e| Error::invalid(e.to_string()))?;
        t.inverse_cdf(0.975) * se
    } else {
        f64::INFINITY
    };
    Ok(LinearFit {
        slope,
        intercept,
        slope_half_width: half,
        points: n,
    })
}

/// Fit of `log y` against `log x`; requires three points and positive data.
pub fn fit_power_law(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() < 3 {
        return Err(Error::invalid("order fits need at least three points"));
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return Err(Error::invalid("power-law fits need positive data"));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    fit_line(&lx, &ly)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let x = [1.0, 2.0, 4.0, 8.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(2.5)).collect();
        let f = fit_power_law(&x, &y).unwrap();
        assert!((f.slope - 2.5).abs() < 1e-12);
        assert!(f.slope_half_width < 1e-10);
    }
}
