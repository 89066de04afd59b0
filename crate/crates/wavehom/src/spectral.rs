//! Constant-coefficient profiles on a periodic box, stored per Fourier mode.

use crate::error::{Error, Result};
use crate::modal::{ModalSolution, ModeSet, C64};
use crate::poly::HomogenizedPoly;
use crate::torus::MultiIndex;
use std::sync::Arc;

/// Periodic box `[-L/2, L/2)` standing in for the real line up to time `t_final`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoxDomain {
    pub box_len: f64,
    pub t_final: f64,
}

impl BoxDomain {
    pub fn new(box_len: f64, t_final: f64) -> Self {
        BoxDomain { box_len, t_final }
    }

    /// Fails when a front leaving a support of half-width `radius` at `speed`
    /// meets its periodic image before `t_final`.
    pub fn check_reach(&self, radius: f64, speed: f64) -> Result<()> {
        let reach = radius + speed * self.t_final;
        if reach > 0.5 * self.box_len {
            return Err(Error::BoxTooSmall {
                box_len: self.box_len,
                reach,
                t_end: self.t_final,
            });
        }
        Ok(())
    }
}

/// Coefficients of `d_t^s` in `p(d_t, i xi)` for `d = 1`, indexed by `s`.
pub fn mode_multiplier(p: &HomogenizedPoly, xi: f64) -> Vec<C64> {
    let top = p.max_time_order() as usize;
    let mut out = vec![C64::new(0.0, 0.0); top + 1];
    for (b, c) in p.terms() {
        out[b.time as usize] += C64::new(0.0, xi).powu(b.space[0]) * c;
    }
    out
}

/// One scalar profile read from a component of a [`ModalSolution`].
#[derive(Clone)]
pub struct SpectralSolution {
    modal: Arc<ModalSolution>,
    comp: usize,
    order: usize,
    rho_bar: f64,
    stiffness: Option<Arc<Vec<f64>>>,
}

impl SpectralSolution {
    /// `comp` is the index of the value in each mode state; its time derivative
    /// must follow at `comp + 1`.
    pub fn new(modal: Arc<ModalSolution>, comp: usize, order: usize, rho_bar: f64) -> Self {
        SpectralSolution {
            modal,
            comp,
            order,
            rho_bar,
            stiffness: None,
        }
    }

    /// Records `mu(xi)` of a single-oscillator profile `rho_bar v'' + mu v = F`.
    pub fn with_stiffness(mut self, mu: Vec<f64>) -> Self {
        self.stiffness = Some(Arc::new(mu));
        self
    }

    pub fn with_derivative_order(mut self, order: usize) -> Self {
        self.order = order;
        self
    }

    pub fn modal(&self) -> &ModalSolution {
        &self.modal
    }

    pub fn modes(&self) -> &ModeSet {
        self.modal.modes()
    }

    pub fn rho_bar(&self) -> f64 {
        self.rho_bar
    }

    pub fn stiffness(&self) -> Option<&[f64]> {
        self.stiffness.as_ref().map(|v| v.as_slice())
    }

    /// Highest mixed derivative order this profile promises.
    pub fn derivative_order(&self) -> usize {
        self.order
    }

    pub fn t_final(&self) -> f64 {
        self.modal.t_final()
    }

    /// `out[s][i] = d_t^s v^(t, xi_i)` for `s <= s_max`.
    pub fn time_derivatives(&self, t: f64, s_max: usize) -> Result<Vec<Vec<C64>>> {
        if s_max > self.order {
            return Err(Error::InsufficientDerivatives {
                required: s_max,
                available: self.order,
            });
        }
        self.modal.component_derivatives(t, self.comp, s_max)
    }

    /// Fourier coefficients of `d^beta v(t)` on the mode set.
    pub fn mixed_derivative(&self, t: f64, beta: &MultiIndex) -> Result<Vec<C64>> {
        if beta.order() as usize > self.order {
            return Err(Error::InsufficientDerivatives {
                required: beta.order() as usize,
                available: self.order,
            });
        }
        let d = self.time_derivatives(t, beta.time as usize)?;
        let modes = self.modes();
        Ok(d[beta.time as usize]
            .iter()
            .enumerate()
            .map(|(i, v)| v * C64::new(0.0, modes.xi(i)).powu(beta.space[0]))
            .collect())
    }

    /// `d^beta v(t, x)` by direct summation.
    pub fn eval(&self, t: f64, x: f64, beta: &MultiIndex) -> Result<f64> {
        let c = self.mixed_derivative(t, beta)?;
        let modes = self.modes();
        Ok(c.iter()
            .enumerate()
            .map(|(i, v)| (v * C64::from_polar(1.0, modes.xi(i) * x)).re)
            .sum())
    }

    /// Per-mode energy `rho_bar |v'|^2 + mu |v|^2` of a single-oscillator profile.
    pub fn mode_energy(&self, t: f64, i: usize) -> Result<f64> {
        let mu = self.stiffness.as_ref().ok_or_else(|| Error::invalid("profile carries no stiffness"))?;
        let y = self.modal.state(t, i)?;
        Ok(self.rho_bar * y[self.comp + 1].norm_sqr() + mu[i] * y[self.comp].norm_sqr())
    }
}
