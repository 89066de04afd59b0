//! Smooth radial cutoffs `psi_1`, `psi_2` and the exponent `alpha`.

use crate::error::{Error, Result};

/// `phi(s) / (phi(s) + phi(1 - s))` with `phi(s) = exp(-1/s)` for `s > 0`:
/// C-infinity, 0 for `s <= 0`, 1 for `s >= 1`.
pub fn smooth_step(s: f64) -> f64 {
    let phi = |s: f64| if s > 0.0 { (-1.0 / s).exp() } else { 0.0 };
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        let a = phi(s);
        a / (a + phi(1.0 - s))
    }
}

/// Radial cutoff equal to 1 for `r <= inner` and 0 for `r >= outer`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cutoff {
    pub inner: f64,
    pub outer: f64,
}

impl Cutoff {
    pub fn new(inner: f64, outer: f64) -> Self {
        Cutoff { inner, outer }
    }

    pub fn eval(&self, r: f64) -> f64 {
        smooth_step((self.outer - r.abs()) / (self.outer - self.inner))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FilterSpec {
    pub alpha: f64,
    pub psi1: Cutoff,
    pub psi2: Cutoff,
}

impl Default for FilterSpec {
    fn default() -> Self {
        FilterSpec {
            alpha: 0.5,
            psi1: Cutoff::new(1.0, 2.0),
            psi2: Cutoff::new(2.5, 3.5),
        }
    }
}

impl FilterSpec {
    pub fn new(alpha: f64, psi1: Cutoff, psi2: Cutoff) -> Result<Self> {
        let f = FilterSpec { alpha, psi1, psi2 };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid(format!("alpha = {} must lie in (0, 1)", self.alpha)));
        }
        let ok = self.psi1.inner > 0.0 && self.psi1.inner < self.psi1.outer && self.psi1.outer < self.psi2.inner && self.psi2.inner < self.psi2.outer;
        if !ok {
            return Err(Error::invalid(format!(
                "cutoff radii must satisfy 0 < {} < {} < {} < {}",
                self.psi1.inner, self.psi1.outer, self.psi2.inner, self.psi2.outer
            )));
        }
        Ok(())
    }

    /// `psi_1(eps^alpha |xi|)`.
    pub fn psi1(&self, eps: f64, xi_abs: f64) -> f64 {
        self.psi1.eval(eps.powf(self.alpha) * xi_abs)
    }

    /// `psi_2(eps^alpha |xi|)`.
    pub fn psi2(&self, eps: f64, xi_abs: f64) -> f64 {
        self.psi2.eval(eps.powf(self.alpha) * xi_abs)
    }

    /// Largest `|xi|` where `psi_1(eps^alpha xi) != 0`.
    pub fn source_band(&self, eps: f64) -> f64 {
        self.psi1.outer / eps.powf(self.alpha)
    }

    /// Largest `|xi|` where `psi_2(eps^alpha xi) != 0`.
    pub fn correction_band(&self, eps: f64) -> f64 {
        self.psi2.outer / eps.powf(self.alpha)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_is_symmetric() {
        for s in [0.1, 0.3, 0.5, 0.77] {
            assert!((smooth_step(s) + smooth_step(1.0 - s) - 1.0).abs() < 1e-15);
        }
        let c = Cutoff::new(1.0, 2.0);
        assert_eq!(c.eval(0.5), 1.0);
        assert_eq!(c.eval(-1.0), 1.0);
        assert_eq!(c.eval(2.0), 0.0);
    }
}
