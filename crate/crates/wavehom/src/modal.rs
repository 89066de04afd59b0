//! Per-mode linear dynamics `Y' = M Y + sum_q b_q p^(q)(t)` on a periodic box.
//!
//! Every Fourier mode carries a small constant matrix `M`. Time derivatives of
//! the pulse are moved onto `M` by exact integration by parts, so the stepper
//! only integrates `Y~' = M Y~ + b~ p(t)` with `b~ = sum_q M^q b_q`. Steps use
//! exact propagation `exp(M h)` and 2-point Gauss quadrature of the Duhamel
//! integral; after the pulse ends the state is propagated exactly.

use crate::error::{Error, Result};
use crate::source::TimePulse;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

pub type C64 = Complex64;

/// Symmetric set of box modes `xi_q = 2 pi q / L`, `|q| <= q_max`, on `[-L/2, L/2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeSet {
    pub box_len: f64,
    pub q_max: i64,
}

impl ModeSet {
    pub fn new(box_len: f64, q_max: i64) -> Self {
        ModeSet { box_len, q_max }
    }

    /// Smallest symmetric set containing every `|xi| <= xi_max`.
    pub fn covering(box_len: f64, xi_max: f64) -> Self {
        let q_max = (xi_max * box_len / (2.0 * PI)).ceil() as i64;
        ModeSet { box_len, q_max }
    }

    pub fn len(&self) -> usize {
        (2 * self.q_max + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn q(&self, i: usize) -> i64 {
        i as i64 - self.q_max
    }

    pub fn xi(&self, i: usize) -> f64 {
        2.0 * PI * self.q(i) as f64 / self.box_len
    }

    pub fn index(&self, q: i64) -> Option<usize> {
        if q.abs() <= self.q_max {
            Some((q + self.q_max) as usize)
        } else {
            None
        }
    }

    pub fn xi_max(&self) -> f64 {
        2.0 * PI * self.q_max as f64 / self.box_len
    }
}

/// Data of one mode: state matrix and forcing vectors for `p, p', p'', ..`.
#[derive(Clone, Debug)]
pub struct ModeProblem {
    pub m: DMatrix<C64>,
    pub b: Vec<DVector<C64>>,
}

/// Propagator `exp(M h)`, closed form for a single oscillator.
pub fn propagator(m: &DMatrix<C64>, h: f64) -> DMatrix<C64> {
    if m.nrows() == 2 && m[(0, 0)] == C64::new(0.0, 0.0) && m[(0, 1)] == C64::new(1.0, 0.0) && m[(1, 1)] == C64::new(0.0, 0.0) {
        // Y'' = lambda Y with lambda = M[1,0].
        let lam = m[(1, 0)];
        let (c, s_over, s_times) = if lam.im == 0.0 {
            let l = lam.re;
            if l < 0.0 {
                let w = (-l).sqrt();
                let (sn, cs) = (w * h).sin_cos();
                (cs, sn / w, -w * sn)
            } else if l > 0.0 {
                let w = l.sqrt();
                let (sh, ch) = ((w * h).sinh(), (w * h).cosh());
                (ch, sh / w, w * sh)
            } else {
                (1.0, h, 0.0)
            }
        } else {
            return (m * C64::new(h, 0.0)).exp();
        };
        return DMatrix::from_row_slice(2, 2, &[C64::new(c, 0.0), C64::new(s_over, 0.0), C64::new(s_times, 0.0), C64::new(c, 0.0)]);
    }
    (m * C64::new(h, 0.0)).exp()
}

const GAUSS_C: [f64; 2] = [0.5 - 0.288_675_134_594_812_9, 0.5 + 0.288_675_134_594_812_9];

struct ModeTrack {
    problem: ModeProblem,
    /// `sum_q M^q b_q`.
    b_tilde: DVector<C64>,
    /// `B_j = sum_{q > j} M^{q-1-j} b_q`, so that `Y = Y~ + sum_j B_j p^(j)`.
    bnd: Vec<DVector<C64>>,
    /// `Y~` at every `stride`-th window step.
    stored: Vec<DVector<C64>>,
    /// `Y` at the end of the pulse.
    y_end: DVector<C64>,
}

/// Integrated per-mode dynamics.
pub struct ModalSolution {
    modes: ModeSet,
    pulse: TimePulse,
    state_dim: usize,
    dt: f64,
    window_steps: usize,
    stride: usize,
    t_final: f64,
    tracks: Vec<ModeTrack>,
}

fn pulse_max_order(problems: &[ModeProblem]) -> usize {
    problems.iter().map(|p| p.b.len()).max().unwrap_or(1)
}

impl ModalSolution {
    /// Integrates every mode over the pulse window with step `dt` (rounded so the
    /// window is an integer number of steps).
    pub fn integrate(modes: ModeSet, pulse: TimePulse, problems: Vec<ModeProblem>, dt: f64, t_final: f64) -> Result<Self> {
        if problems.len() != modes.len() {
            return Err(Error::invalid("one problem per mode is required"));
        }
        if !(dt > 0.0) {
            return Err(Error::invalid("time step must be positive"));
        }
        let state_dim = problems.first().map(|p| p.m.nrows()).unwrap_or(2);
        let (t0, t1) = pulse.support();
        let window = t1 - t0;
        let window_steps = ((window / dt).ceil() as usize).max(1);
        let h = window / window_steps as f64;
        let stride = window_steps.div_ceil(16).max(1);
        let q_max = pulse_max_order(&problems);
        let start_derivs = pulse.boundary_derivatives(true, q_max);
        let end_derivs = pulse.boundary_derivatives(false, q_max);
        // Pulse samples at the Gauss nodes of every step, shared by all modes.
        let gauss_p: Vec<[f64; 2]> = (0..window_steps)
            .map(|n| {
                let tn = t0 + n as f64 * h;
                [pulse.value(tn + GAUSS_C[0] * h), pulse.value(tn + GAUSS_C[1] * h)]
            })
            .collect();
        let tracks: Vec<ModeTrack> = problems
            .into_par_iter()
            .map(|problem| {
                let dim = problem.m.nrows();
                let m = &problem.m;
                let nq = problem.b.len();
                let mut b_tilde = DVector::zeros(dim);
                let mut mpow_b: Vec<DVector<C64>> = Vec::with_capacity(nq);
                for (q, bq) in problem.b.iter().enumerate() {
                    let mut v = bq.clone();
                    for _ in 0..q {
                        v = m * v;
                    }
                    b_tilde += &v;
                    mpow_b.push(v);
                }
                let mut bnd = Vec::with_capacity(nq.saturating_sub(1));
                for j in 0..nq.saturating_sub(1) {
                    let mut acc = DVector::zeros(dim);
                    for q in (j + 1)..nq {
                        let mut v = problem.b[q].clone();
                        for _ in 0..(q - 1 - j) {
                            v = m * v;
                        }
                        acc += v;
                    }
                    bnd.push(acc);
                }
                let boundary = |derivs: &[f64]| -> DVector<C64> {
                    let mut acc = DVector::zeros(dim);
                    for (j, bj) in bnd.iter().enumerate() {
                        acc += bj * C64::new(derivs[j], 0.0);
                    }
                    acc
                };
                let e_h = propagator(m, h);
                let e1 = propagator(m, h * (1.0 - GAUSS_C[0])) * &b_tilde;
                let e2 = propagator(m, h * (1.0 - GAUSS_C[1])) * &b_tilde;
                let mut y = -boundary(&start_derivs);
                let mut stored = vec![y.clone()];
                let mut next = DVector::zeros(dim);
                for (n, gp) in gauss_p.iter().enumerate() {
                    next.gemv(C64::new(1.0, 0.0), &e_h, &y, C64::new(0.0, 0.0));
                    next.axpy(C64::new(0.5 * h * gp[0], 0.0), &e1, C64::new(1.0, 0.0));
                    next.axpy(C64::new(0.5 * h * gp[1], 0.0), &e2, C64::new(1.0, 0.0));
                    std::mem::swap(&mut y, &mut next);
                    if (n + 1) % stride == 0 || n + 1 == window_steps {
                        stored.push(y.clone());
                    }
                }
                let y_end = &y + boundary(&end_derivs);
                let _ = mpow_b;
                ModeTrack {
                    problem,
                    b_tilde,
                    bnd,
                    stored,
                    y_end,
                }
            })
            .collect();
        Ok(ModalSolution {
            modes,
            pulse,
            state_dim,
            dt: h,
            window_steps,
            stride,
            t_final,
            tracks,
        })
    }

    pub fn modes(&self) -> &ModeSet {
        &self.modes
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn pulse(&self) -> &TimePulse {
        &self.pulse
    }

    pub fn problem(&self, i: usize) -> &ModeProblem {
        &self.tracks[i].problem
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(t >= 0.0) || t > self.t_final * (1.0 + 1e-12) {
            return Err(Error::TimeNotStored { t });
        }
        Ok(())
    }

    /// State `Y(t)` of mode `i`.
    pub fn state(&self, t: f64, i: usize) -> Result<DVector<C64>> {
        self.check_time(t)?;
        let tr = &self.tracks[i];
        let (t0, t1) = self.pulse.support();
        if t >= t1 {
            return Ok(propagator(&tr.problem.m, t - t1) * &tr.y_end);
        }
        let local = t - t0;
        let h = self.dt;
        let n_full = ((local / h).floor() as usize).min(self.window_steps);
        let slot = n_full / self.stride;
        let mut n = slot * self.stride;
        let mut y = tr.stored[slot].clone();
        let m = &tr.problem.m;
        let e_h = propagator(m, h);
        let step = |y: &DVector<C64>, tn: f64, hs: f64, e: &DMatrix<C64>| -> DVector<C64> {
            let mut out = e * y;
            for c in GAUSS_C {
                let w = propagator(m, hs * (1.0 - c)) * &tr.b_tilde;
                out += w * C64::new(0.5 * hs * self.pulse.value(tn + c * hs), 0.0);
            }
            out
        };
        while n < n_full {
            y = step(&y, t0 + n as f64 * h, h, &e_h);
            n += 1;
        }
        let rest = local - n as f64 * h;
        if rest > 0.0 {
            y = step(&y, t0 + n as f64 * h, rest, &propagator(m, rest));
        }
        let derivs = self.pulse.derivatives(t, tr.bnd.len());
        for (j, bj) in tr.bnd.iter().enumerate() {
            y += bj * C64::new(derivs[j], 0.0);
        }
        Ok(y)
    }

    /// `[Y, Y', .., Y^(s_max)]` at time `t` for mode `i`.
    pub fn state_derivatives(&self, t: f64, i: usize, s_max: usize) -> Result<Vec<DVector<C64>>> {
        let y = self.state(t, i)?;
        let tr = &self.tracks[i];
        let m = &tr.problem.m;
        let nq = tr.problem.b.len();
        let derivs = self.pulse.derivatives(t, nq + s_max);
        let mut out = Vec::with_capacity(s_max + 1);
        out.push(y);
        for r in 0..s_max {
            let mut next = m * &out[r];
            for (q, bq) in tr.problem.b.iter().enumerate() {
                let p = derivs[q + r];
                if p != 0.0 {
                    next += bq * C64::new(p, 0.0);
                }
            }
            out.push(next);
        }
        Ok(out)
    }

    /// Values of component `comp` of `d_t^s Y` for every mode and every `s <= s_max`,
    /// as `out[s][mode]`.
    pub fn component_derivatives(&self, t: f64, comp: usize, s_max: usize) -> Result<Vec<Vec<C64>>> {
        self.check_time(t)?;
        let per_mode: Result<Vec<Vec<C64>>> = (0..self.modes.len())
            .into_par_iter()
            .map(|i| self.state_derivatives(t, i, s_max).map(|d| d.iter().map(|v| v[comp]).collect()))
            .collect();
        let per_mode = per_mode?;
        Ok((0..=s_max).map(|s| per_mode.iter().map(|d| d[s]).collect()).collect())
    }

    /// Window traces `(t, Y_comp)` of mode `i` on the stored grid.
    pub fn trace(&self, i: usize, comp: usize, dt: f64) -> Result<Vec<(f64, C64)>> {
        let n = (self.t_final / dt).round() as usize;
        (0..=n)
            .map(|k| {
                let t = (k as f64 * dt).min(self.t_final);
                self.state(t, i).map(|y| (t, y[comp]))
            })
            .collect()
    }
}
