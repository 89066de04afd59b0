//! Filtered high-order homogenized equation
//! `rho_bar v'' + mu_eps(D) v = psi_1(eps^alpha D)(1 + R(eps d))f` and the
//! criminal approximation built from it.

use crate::cascade::CorrectorTable;
use crate::error::{Error, Result};
use crate::filter::FilterSpec;
use crate::modal::{ModalSolution, ModeProblem, ModeSet, C64};
use crate::normal_form::NormalForm;
use crate::operators::effective_floor;
use crate::poly::HomogenizedPoly;
use crate::source::SourceTerm;
use crate::spectral::{mode_multiplier, BoxDomain, SpectralSolution};
use crate::two_scale::{apply_corrector_series, TwoScaleExpansion};
use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;
use std::sync::Arc;

/// `mu_eps(xi) = a_2(i xi) + psi_2(eps^alpha xi) sum_j eps^{2j-2} a~_{2j}(i xi)`.
#[derive(Clone, Debug)]
pub struct DispersionSymbol {
    pub eps: f64,
    pub k: usize,
    pub rho_bar: f64,
    pub filter: FilterSpec,
    a2: HomogenizedPoly,
    a_tilde: Vec<HomogenizedPoly>,
    floor: f64,
    eps0: f64,
}

fn norm(xi: &[f64]) -> f64 {
    xi.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl DispersionSymbol {
    fn unchecked(nf: &NormalForm, eps: f64, filter: &FilterSpec) -> Self {
        let mut a2 = nf.a2.clone();
        a2.add_term(crate::torus::MultiIndex::new(2, &[0, 0]), nf.rho_bar);
        DispersionSymbol {
            eps,
            k: nf.k,
            rho_bar: nf.rho_bar,
            filter: *filter,
            a2: nf.a2.clone(),
            a_tilde: nf.a_tilde.clone(),
            floor: effective_floor(&a2),
            eps0: f64::NAN,
        }
    }

    /// `a_2(i xi)`.
    pub fn homogenized(&self, xi: &[f64]) -> f64 {
        self.a2.evaluate_symbol(0.0, xi).re
    }

    /// `sum_j eps^{2j-2} a~_{2j}(i xi)` without the cutoff.
    pub fn correction(&self, xi: &[f64]) -> f64 {
        self.a_tilde
            .iter()
            .enumerate()
            .map(|(j, a)| self.eps.powi(2 * j as i32 + 2) * a.evaluate_symbol(0.0, xi).re)
            .sum()
    }

    /// Unfiltered symbol of the truncated equation.
    pub fn unfiltered(&self, xi: &[f64]) -> f64 {
        self.homogenized(xi) + self.correction(xi)
    }

    pub fn mu(&self, xi: &[f64]) -> f64 {
        let r = norm(xi);
        let psi = self.filter.psi2(self.eps, r);
        let mut m = self.homogenized(xi);
        if psi != 0.0 {
            m += psi * self.correction(xi);
        }
        m
    }

    /// Smallest eigenvalue of the effective tensor.
    pub fn floor(&self) -> f64 {
        self.floor
    }

    /// Stability threshold computed for this normal form and filter.
    pub fn eps0(&self) -> f64 {
        self.eps0
    }

    /// `(min, max)` of `mu / |xi|^2` over the given nonzero frequencies.
    pub fn ratio_bounds<'a>(&self, xis: impl IntoIterator<Item = &'a [f64]>) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for xi in xis {
            let r2: f64 = xi.iter().map(|x| x * x).sum();
            if r2 == 0.0 {
                continue;
            }
            let q = self.mu(xi) / r2;
            lo = lo.min(q);
            hi = hi.max(q);
        }
        (lo, hi)
    }

    /// Phase and group speed bound over `|xi| <= xi_max` (d = 1).
    pub fn max_speed(&self, xi_max: f64) -> f64 {
        let n = 4000;
        let omega = |x: f64| (self.mu(&[x]).max(0.0) / self.rho_bar).sqrt();
        let mut c: f64 = (self.floor / self.rho_bar).sqrt();
        let h = xi_max / n as f64;
        for i in 1..=n {
            let x = i as f64 * h;
            c = c.max(omega(x) / x);
            c = c.max(((omega(x) - omega(x - h)) / h).abs());
        }
        c
    }
}

/// Radial scan points on `|xi| <= r_max`, with 64 directions in d = 2.
fn scan_points(dim: usize, r_max: f64) -> Vec<Vec<f64>> {
    let nr = 1500;
    let mut pts = Vec::new();
    let dirs = if dim == 1 { 1 } else { 64 };
    for d in 0..dirs {
        let th = PI * d as f64 / dirs as f64;
        for i in 1..=nr {
            let r = r_max * i as f64 / nr as f64;
            if dim == 1 {
                pts.push(vec![r]);
            } else {
                pts.push(vec![r * th.cos(), r * th.sin()]);
            }
        }
    }
    pts
}

fn symbol_is_stable(nf: &NormalForm, eps: f64, filter: &FilterSpec) -> bool {
    let s = DispersionSymbol::unchecked(nf, eps, filter);
    let pts = scan_points(nf.dim, filter.correction_band(eps));
    let (lo, _) = s.ratio_bounds(pts.iter().map(|p| p.as_slice()));
    lo >= 0.5 * s.floor
}

/// Largest `eps` in `(0, 1]` for which `mu_eps >= floor/2 |xi|^2` on `supp psi_2`, by bisection.
pub fn stability_threshold(nf: &NormalForm, filter: &FilterSpec) -> f64 {
    if symbol_is_stable(nf, 1.0, filter) {
        return 1.0;
    }
    let (mut lo, mut hi) = (1e-8, 1.0);
    if !symbol_is_stable(nf, lo, filter) {
        return 0.0;
    }
    for _ in 0..60 {
        let mid = (lo * hi).sqrt();
        if symbol_is_stable(nf, mid, filter) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo < 1.0 + 1e-10 {
            break;
        }
    }
    lo
}

pub fn build_symbol(nf: &NormalForm, eps: f64, filter: &FilterSpec) -> Result<DispersionSymbol> {
    filter.validate()?;
    let eps0 = stability_threshold(nf, filter);
    if !(eps > 0.0) || eps > eps0 {
        return Err(Error::EpsilonTooLarge { eps, eps0 });
    }
    let mut s = DispersionSymbol::unchecked(nf, eps, filter);
    s.eps0 = eps0;
    Ok(s)
}

/// `psi_1(eps^alpha D)(1 + sum eps^{2j} R_{2j}(d_t, d_x)) f` for `f = p(t) g(x)`,
/// written per box mode as `g^(xi) sum_s w_s(xi) p^(s)(t)`.
#[derive(Clone, Debug)]
pub struct FilteredForcing {
    pub eps: f64,
    pub filter: FilterSpec,
    pub source: SourceTerm,
    pub box_len: f64,
    multiplier: HomogenizedPoly,
}

pub fn apply_r_source(nf: &NormalForm, eps: f64, filter: &FilterSpec, source: &SourceTerm, box_len: f64) -> FilteredForcing {
    let mut p = HomogenizedPoly::one(nf.dim);
    for (j, r) in nf.r.iter().enumerate() {
        p = p.add(&r.scale(eps.powi(2 * j as i32 + 2)));
    }
    FilteredForcing {
        eps,
        filter: *filter,
        source: source.clone(),
        box_len,
        multiplier: p,
    }
}

impl FilteredForcing {
    /// `w_s(xi)` including the cutoff, indexed by the pulse derivative order.
    pub fn weights(&self, xi: f64) -> Vec<C64> {
        let psi = self.filter.psi1(self.eps, xi.abs());
        mode_multiplier(&self.multiplier, xi).into_iter().map(|w| w * psi).collect()
    }

    /// `F^(t, xi_q)` as a box Fourier coefficient.
    pub fn eval(&self, t: f64, q: i64) -> Result<C64> {
        let xi = 2.0 * PI * q as f64 / self.box_len;
        let w = self.weights(xi);
        let g = self.source.profile.box_coefficient(q, self.box_len)?;
        let d = self.source.pulse.derivatives(t, w.len());
        Ok(g * w.iter().zip(&d).map(|(w, p)| w * p).sum::<C64>())
    }

    pub fn time_order(&self) -> usize {
        self.multiplier.max_time_order() as usize
    }
}

/// Relative threshold below which box coefficients of the source are dropped.
pub const SOURCE_TOL: f64 = 1e-16;

/// Time step used when none is configured.
pub const DEFAULT_DT: f64 = 1e-3;

/// Solves the filtered equation on the box; modes outside `eps^{-alpha} supp psi_1`
/// or outside the source band are identically zero and are not stored.
pub fn solve_filtered(nf: &NormalForm, eps: f64, filter: &FilterSpec, source: &SourceTerm, domain: &BoxDomain, dt: f64) -> Result<SpectralSolution> {
    if nf.dim != 1 {
        return Err(Error::invalid("the filtered solver is implemented for d = 1"));
    }
    let symbol = build_symbol(nf, eps, filter)?;
    let band = source.profile.frequency_cutoff(SOURCE_TOL).min(filter.source_band(eps));
    let modes = ModeSet::covering(domain.box_len, band);
    domain.check_reach(source.profile.radius(), symbol.max_speed(band.max(1e-12)))?;
    let forcing = apply_r_source(nf, eps, filter, source, domain.box_len);
    let rho = nf.rho_bar;
    let mut mu = Vec::with_capacity(modes.len());
    let mut problems = Vec::with_capacity(modes.len());
    for i in 0..modes.len() {
        let xi = modes.xi(i);
        let m = symbol.mu(&[xi]);
        mu.push(m);
        let mat = DMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(-m / rho, 0.0), C64::new(0.0, 0.0)]);
        let g = source.profile.box_coefficient(modes.q(i), domain.box_len)?;
        let b = if g == C64::new(0.0, 0.0) {
            Vec::new()
        } else {
            forcing
                .weights(xi)
                .into_iter()
                .map(|w| DVector::from_vec(vec![C64::new(0.0, 0.0), g * w / rho]))
                .collect()
        };
        problems.push(ModeProblem { m: mat, b });
    }
    let modal = ModalSolution::integrate(modes, source.pulse.clone(), problems, dt, domain.t_final)?;
    Ok(SpectralSolution::new(Arc::new(modal), 0, 2 * nf.k + 4, rho).with_stiffness(mu))
}

/// `V^k = (I + sum_{n=1}^{2k+2} eps^n chi_n) v_0^k`.
pub fn assemble_criminal(v0k: &SpectralSolution, table: &CorrectorTable, eps: f64, k: usize) -> Result<TwoScaleExpansion> {
    apply_corrector_series(table, v0k, eps, 2 * k + 2)
}
