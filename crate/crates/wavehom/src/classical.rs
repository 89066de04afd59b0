//! Classical hierarchy `a*_2 pi u_{2j} = -sum_{m >= 2} a*_{2m} pi u_{2j+2-2m}` (plus `f`
//! at `j = 0`), its two-scale truncation `U^k`, secular growth, and the closed-form
//! growth of one-dimensional media with constant density.

use crate::cascade::CorrectorTable;
use crate::error::{Error, Result};
use crate::fit::{fit_power_law, LinearFit};
use crate::modal::{ModalSolution, ModeProblem, ModeSet, C64};
use crate::operators::{effective_tensor, rho_bar};
use crate::poly::HomogenizedPoly;
use crate::source::SourceTerm;
use crate::spectral::{mode_multiplier, BoxDomain, SpectralSolution};
use crate::torus::{fft, MultiIndex};
use crate::two_scale::{apply_weighted_series, TwoScaleExpansion};
use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;
use std::sync::Arc;

/// Profiles `pi u_0, pi u_2, .., pi u_2k`; odd profiles vanish and are not stored.
#[derive(Clone)]
pub struct ClassicalExpansion {
    pub k: usize,
    pub rho_bar: f64,
    /// `abar` in `a*_2 = rho_bar d_t^2 - abar d_x^2`.
    pub abar: f64,
    series: Vec<HomogenizedPoly>,
    profiles: Vec<SpectralSolution>,
    source: SourceTerm,
}

/// Builds the per-mode block lower-triangular system. Row `2j + 1` holds
/// `rho_bar u_2j'' = -alpha_1 u_2j - sum alpha_{m,s} d_t^s u_{2l}`, where every
/// `d_t^s u_{2l}` with `l < j` is rewritten through the rows already built.
fn hierarchy_problem(series: &[HomogenizedPoly], k: usize, rho: f64, xi: f64, g: C64) -> ModeProblem {
    let n = 2 * (k + 1);
    let zero = C64::new(0.0, 0.0);
    let mut m = DMatrix::from_element(n, n, zero);
    let mut b: Vec<DVector<C64>> = vec![DVector::from_element(n, zero)];
    b[0][1] = g / rho;
    let alpha: Vec<Vec<C64>> = (1..=k + 1).map(|mm| mode_multiplier(&series[2 * mm - 2], xi)).collect();
    for j in 0..=k {
        m[(2 * j, 2 * j + 1)] = C64::new(1.0, 0.0);
        m[(2 * j + 1, 2 * j)] = -alpha[0][0] / rho;
        if j == 0 {
            continue;
        }
        let s_top = alpha.iter().map(|a| a.len()).max().unwrap_or(1);
        let mut powers = vec![DMatrix::identity(n, n)];
        for s in 1..s_top {
            let next = &m * &powers[s - 1];
            powers.push(next);
        }
        let mut row = DVector::from_element(n, zero);
        let mut extra: Vec<(usize, C64)> = Vec::new();
        for mm in 2..=(j + 1) {
            let l = j + 1 - mm;
            for (s, a) in alpha[mm - 1].iter().enumerate() {
                if *a == zero {
                    continue;
                }
                let w = -a / rho;
                for c in 0..n {
                    row[c] += w * powers[s][(2 * l, c)];
                }
                for r in 0..s {
                    for (q, bq) in b.iter().enumerate() {
                        let v = (&powers[s - 1 - r] * bq)[2 * l];
                        if v != zero {
                            extra.push((q + r, w * v));
                        }
                    }
                }
            }
        }
        for c in 0..n {
            m[(2 * j + 1, c)] += row[c];
        }
        for (q, v) in extra {
            while b.len() <= q {
                b.push(DVector::from_element(n, zero));
            }
            b[q][2 * j + 1] += v;
        }
    }
    ModeProblem { m, b }
}

/// Solves the hierarchy for `series = [a*_2, a*_3, .., a*_{2k+2}]` (odd entries unused).
pub fn solve_hierarchy(series: &[HomogenizedPoly], source: &SourceTerm, k: usize, domain: &BoxDomain, dt: f64) -> Result<ClassicalExpansion> {
    if series.len() < 2 * k + 1 {
        return Err(Error::TableTooShallow {
            required: 2 * k + 2,
            depth: series.len() + 1,
        });
    }
    if series[0].dim() != 1 {
        return Err(Error::invalid("the hierarchy solver is implemented for d = 1"));
    }
    let rho = rho_bar(&series[0]);
    let abar = effective_tensor(&series[0])[0][0];
    if !(rho > 0.0 && abar > 0.0) {
        return Err(Error::DegenerateA2(format!("rho_bar = {rho}, abar = {abar}")));
    }
    let band = source.profile.frequency_cutoff(crate::dispersive::SOURCE_TOL);
    let modes = ModeSet::covering(domain.box_len, band);
    domain.check_reach(source.profile.radius(), (abar / rho).sqrt())?;
    let problems: Result<Vec<ModeProblem>> = (0..modes.len())
        .map(|i| {
            let g = source.profile.box_coefficient(modes.q(i), domain.box_len)?;
            Ok(hierarchy_problem(series, k, rho, modes.xi(i), g))
        })
        .collect();
    let modal = Arc::new(ModalSolution::integrate(modes, source.pulse.clone(), problems?, dt, domain.t_final)?);
    let profiles = (0..=k).map(|j| SpectralSolution::new(modal.clone(), 2 * j, 2 * k + 6, rho)).collect();
    Ok(ClassicalExpansion {
        k,
        rho_bar: rho,
        abar,
        series: series.to_vec(),
        profiles,
        source: source.clone(),
    })
}

impl ClassicalExpansion {
    /// `pi u_{2j}`.
    pub fn profile(&self, j: usize) -> &SpectralSolution {
        &self.profiles[j]
    }

    pub fn profiles(&self) -> &[SpectralSolution] {
        &self.profiles
    }

    pub fn wave_speed(&self) -> f64 {
        (self.abar / self.rho_bar).sqrt()
    }

    pub fn series(&self) -> &[HomogenizedPoly] {
        &self.series
    }

    /// Largest relative per-mode defect of the hierarchy equations at time `t`.
    pub fn defect(&self, t: f64) -> Result<f64> {
        let modes = self.profiles[0].modes().clone();
        let top = self.series.iter().map(|p| p.max_time_order() as usize).max().unwrap_or(2);
        let derivs: Vec<Vec<Vec<C64>>> = self.profiles.iter().map(|p| p.time_derivatives(t, top)).collect::<Result<_>>()?;
        let pulse = self.source.pulse.value(t);
        let mut worst: f64 = 0.0;
        for i in 0..modes.len() {
            let xi = modes.xi(i);
            let g = self.source.profile.box_coefficient(modes.q(i), modes.box_len)?;
            for j in 0..=self.k {
                let mut lhs = C64::new(0.0, 0.0);
                let mut scale: f64 = 0.0;
                for mm in 1..=(j + 1) {
                    let l = j + 1 - mm;
                    for (s, a) in mode_multiplier(&self.series[2 * mm - 2], xi).iter().enumerate() {
                        let term = a * derivs[l][s][i];
                        lhs += term;
                        scale = scale.max(term.norm());
                    }
                }
                if j == 0 {
                    lhs -= g * pulse;
                    scale = scale.max((g * pulse).norm());
                }
                if scale > 0.0 {
                    worst = worst.max(lhs.norm() / scale);
                }
            }
        }
        Ok(worst)
    }

    /// `||d^beta pi u_{2j}(t)||_{L^2}` on the box.
    pub fn profile_norm(&self, j: usize, beta: &MultiIndex, t: f64) -> Result<f64> {
        let p = &self.profiles[j];
        let c = p.mixed_derivative(t, beta)?;
        Ok((p.modes().box_len * c.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt())
    }
}

/// `U^k = sum_{j <= k} eps^{2j} (I + sum_{r=1}^{2k+2-2j} eps^r chi_r) pi u_{2j}`.
pub fn assemble_classical(exp: &ClassicalExpansion, table: &CorrectorTable, eps: f64) -> Result<TwoScaleExpansion> {
    let k = exp.k;
    let parts: Result<Vec<TwoScaleExpansion>> = (0..=k)
        .map(|j| apply_weighted_series(table, &exp.profiles[j], eps, 2 * k + 2 - 2 * j, eps.powi(2 * j as i32)))
        .collect();
    TwoScaleExpansion::sum(parts?)
}

/// Growth fit of `||d^beta pi u_{2j}(t)||` over `[t1, t2]`.
#[derive(Clone, Debug)]
pub struct GrowthFit {
    pub level: usize,
    pub beta: MultiIndex,
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    pub fit: LinearFit,
}

pub fn check_window(t1: f64, t2: f64) -> Result<()> {
    if !(t1 >= 2.0 && t2 >= 4.0 * t1) {
        return Err(Error::WindowTooShort { t1, t2 });
    }
    Ok(())
}

/// Least-squares slope of `log ||d^beta pi u_{2j}||` against `log t` on `samples`
/// log-spaced times.
pub fn measure_secular_growth(exp: &ClassicalExpansion, level: usize, beta: &MultiIndex, window: (f64, f64), samples: usize) -> Result<GrowthFit> {
    let (t1, t2) = window;
    check_window(t1, t2)?;
    if beta.order() == 0 {
        return Err(Error::invalid("growth fits are defined for derivatives; use profile_norm for values"));
    }
    let n = samples.max(3);
    let times: Vec<f64> = (0..n).map(|i| t1 * (t2 / t1).powf(i as f64 / (n - 1) as f64)).collect();
    let norms: Vec<f64> = times.iter().map(|t| exp.profile_norm(level, beta, *t)).collect::<Result<_>>()?;
    let fit = fit_power_law(&times, &norms)?;
    Ok(GrowthFit {
        level,
        beta: *beta,
        times,
        norms,
        fit,
    })
}

/// Closed-form data of a one-dimensional medium with constant density:
/// `gamma = -a*_4(+-c, 1)` with `c^2 = abar / rho_bar`.
#[derive(Clone, Copy, Debug)]
pub struct SaturatedGrowth {
    pub c: f64,
    pub rho_bar: f64,
    pub gamma: f64,
}

impl SaturatedGrowth {
    pub fn from_series(series: &[HomogenizedPoly]) -> Result<Self> {
        if series.len() < 3 || series[0].dim() != 1 {
            return Err(Error::invalid("need a*_2 .. a*_4 in d = 1"));
        }
        let rho = rho_bar(&series[0]);
        let abar = effective_tensor(&series[0])[0][0];
        let c = (abar / rho).sqrt();
        let gp = -series[2].evaluate_real(c, &[1.0]);
        let gm = -series[2].evaluate_real(-c, &[1.0]);
        if (gp - gm).abs() > 1e-9 * gp.abs().max(gm.abs()).max(1e-300) {
            return Err(Error::invalid("a*_4 carries odd powers of d_t"));
        }
        Ok(SaturatedGrowth { c, rho_bar: rho, gamma: gp })
    }

    /// `kappa` with `g_n = (kappa d^3)^n g_0` and `h_n = (-kappa d^3)^n h_0`.
    pub fn kappa(&self) -> f64 {
        -self.gamma / (4.0 * self.c * self.c * self.rho_bar)
    }
}

/// Box coefficients of `g_0'` and `h_0'` with `pi u_0 = g_0(x - ct) + h_0(x + ct)` after the source.
#[derive(Clone, Debug)]
pub struct DalembertSplit {
    pub modes: ModeSet,
    pub c: f64,
    pub g0p: Vec<C64>,
    pub h0p: Vec<C64>,
}

/// Splits `pi u_0` at `t_star` through the characteristic combinations
/// `(d_x u_0 -+ d_t u_0 / c) / 2`.
pub fn dalembert_split(u0: &SpectralSolution, c: f64, t_star: f64) -> Result<DalembertSplit> {
    if t_star < u0.modal().pulse().support().1 {
        return Err(Error::invalid("the split needs the source to be off"));
    }
    let d = u0.time_derivatives(t_star, 1)?;
    let modes = u0.modes().clone();
    let mut g0p = Vec::with_capacity(modes.len());
    let mut h0p = Vec::with_capacity(modes.len());
    for i in 0..modes.len() {
        let xi = modes.xi(i);
        let ux = C64::new(0.0, xi) * d[0][i];
        let ut = d[1][i] / c;
        g0p.push((ux - ut) * 0.5 * C64::from_polar(1.0, xi * c * t_star));
        h0p.push((ux + ut) * 0.5 * C64::from_polar(1.0, -xi * c * t_star));
    }
    Ok(DalembertSplit { modes, c, g0p, h0p })
}

impl DalembertSplit {
    fn sample_modes(&self, coeff: impl Fn(usize) -> C64, n: usize) -> Vec<f64> {
        let mut buf = vec![C64::new(0.0, 0.0); n];
        for i in 0..self.modes.len() {
            let q = self.modes.q(i);
            let sign = if q.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            buf[q.rem_euclid(n as i64) as usize] += coeff(i) * sign;
        }
        fft::transform(&mut buf, n, 1, true);
        buf.into_iter().map(|c| c.re).collect()
    }

    fn grid(&self, n: usize) -> Result<usize> {
        let need = 2 * self.modes.q_max as usize + 1;
        Ok(n.max(need).next_power_of_two())
    }

    /// Samples of `d^r g_0'` (`which = 0`) or `d^r h_0'` on the box grid.
    pub fn derivative_samples(&self, which: usize, r: u32, n: usize) -> Result<Vec<f64>> {
        let n = self.grid(n)?;
        let src = if which == 0 { &self.g0p } else { &self.h0p };
        Ok(self.sample_modes(|i| src[i] * C64::new(0.0, self.modes.xi(i)).powu(r), n))
    }

    /// `z_2(t, x) = -kappa' (ct + x) g_0'''(x - ct) + kappa' (ct - x) h_0'''(x + ct)` with
    /// `kappa' = gamma / (4 c^2 rho_bar)`, sampled on the box grid.
    pub fn leading_u2(&self, sat: &SaturatedGrowth, t: f64, n: usize) -> Result<Vec<f64>> {
        let n = self.grid(n)?;
        let c = self.c;
        let l = self.modes.box_len;
        let kappa = sat.kappa();
        let g = self.sample_modes(|i| self.g0p[i] * C64::new(0.0, self.modes.xi(i)).powu(2) * C64::from_polar(1.0, -self.modes.xi(i) * c * t), n);
        let h = self.sample_modes(|i| self.h0p[i] * C64::new(0.0, self.modes.xi(i)).powu(2) * C64::from_polar(1.0, self.modes.xi(i) * c * t), n);
        Ok((0..n)
            .map(|j| {
                let x = -0.5 * l + j as f64 * l / n as f64;
                kappa * (c * t + x) * g[j] - kappa * (c * t - x) * h[j]
            })
            .collect())
    }

    /// `sup_x |sum_{n <= big_n} eps^{2n} [(ct + x)^n / n! g_n(x - ct) + (ct - x)^n / n! h_n(x + ct)]|`
    /// at time `t`, each front evaluated in its own frame `s`.
    pub fn truncated_sup_norm(&self, sat: &SaturatedGrowth, eps: f64, t: f64, big_n: usize, n: usize) -> Result<f64> {
        let n = self.grid(n)?;
        let l = self.modes.box_len;
        let h = l / n as f64;
        let kappa = sat.kappa();
        let ct = self.c * t;
        let mut best: f64 = 0.0;
        let g_prime = self.sample_modes(|i| self.g0p[i], n);
        let h_prime = self.sample_modes(|i| self.h0p[i], n);
        let g_total: f64 = g_prime.iter().sum::<f64>() * h;
        let h_total: f64 = h_prime.iter().sum::<f64>() * h;
        for (which, sign) in [(0usize, 1.0), (1usize, -1.0)] {
            let src = if which == 0 { &self.g0p } else { &self.h0p };
            // g_0 vanishes at +inf and h_0 at -inf; the other profile sits on its plateau.
            let mut base = vec![0.0; n];
            if which == 0 {
                let mut acc = 0.0;
                for j in (0..n).rev() {
                    acc += h * g_prime[j];
                    base[j] = -acc + h_total;
                }
            } else {
                let mut acc = 0.0;
                for j in 0..n {
                    acc += h * h_prime[j];
                    base[j] = acc - g_total;
                }
            }
            let mut terms: Vec<Vec<f64>> = Vec::new();
            let mut fact = 1.0;
            for nn in 1..=big_n {
                fact *= nn as f64;
                let k_n = (sign * kappa).powi(nn as i32);
                let r = (3 * nn - 1) as u32;
                let s = self.sample_modes(|i| src[i] * C64::new(0.0, self.modes.xi(i)).powu(r) * k_n, n);
                terms.push(s.into_iter().map(|v| v / fact).collect());
            }
            for j in 0..n {
                let s = -0.5 * l + j as f64 * h;
                let arm = 2.0 * ct + sign * s;
                let mut v = base[j];
                for (idx, tn) in terms.iter().enumerate() {
                    v += (eps * eps * arm).powi(idx as i32 + 1) * tn[j];
                }
                best = best.max(v.abs());
            }
        }
        Ok(best)
    }
}

/// `2 pi q / L` helper used by oracles.
pub fn box_frequency(q: i64, box_len: f64) -> f64 {
    2.0 * PI * q as f64 / box_len
}
