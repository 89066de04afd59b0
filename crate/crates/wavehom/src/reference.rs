//! Reference solutions of `rho(x/eps) u_tt - (a(x/eps) u_x)_x = p(t) g(x)` in d = 1,
//! error norms, residuals and the two-scale `L^2` estimate.
//!
//! [`BlochReference`] diagonalizes the operator exactly on each Bloch fiber of the
//! periodic box; [`LeapfrogReference`] is a staggered second-order finite-difference
//! solver with harmonic-mean face coefficients.

use crate::error::{Error, Result};
use crate::modal::C64;
use crate::source::{gauss_legendre, SourceTerm, TimePulse};
use crate::spectral::BoxDomain;
use crate::torus::{fft, CellCoefficients};
use crate::two_scale::{cells_in_box, BoxSnapshot, TwoScaleExpansion};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use std::f64::consts::PI;

/// Anything that yields box Fourier coefficients of `u` and its time derivatives.
pub trait Reference {
    fn eps(&self) -> f64;
    fn box_len(&self) -> f64;
    fn snapshot(&self, t: f64, nder: usize) -> Result<BoxSnapshot>;
}

fn coefficient_bounds(coeffs: &CellCoefficients) -> Result<(f64, f64)> {
    if coeffs.dim() != 1 {
        return Err(Error::invalid("reference solvers are implemented for d = 1"));
    }
    let a = coeffs.a(0, 0).samples_on(4 * coeffs.n());
    let r = coeffs.rho().samples_on(4 * coeffs.n());
    let a_max = a.iter().cloned().fold(f64::MIN, f64::max);
    let r_min = r.iter().cloned().fold(f64::MAX, f64::min);
    Ok((a_max, r_min))
}

/// Largest wave speed `sqrt(a_max / rho_min)` of the oscillating medium.
pub fn max_wave_speed(coeffs: &CellCoefficients) -> Result<f64> {
    let (a_max, r_min) = coefficient_bounds(coeffs)?;
    Ok((a_max / r_min).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochSettings {
    /// Cell harmonics `|m| <= cell_modes` per fiber.
    pub cell_modes: usize,
    /// Fibers whose source coefficients are all below this fraction of the peak are skipped.
    pub fiber_tol: f64,
    /// Eigenmodes whose forced amplitude is below this fraction of the largest one are dropped.
    pub mode_tol: f64,
}

impl Default for BlochSettings {
    fn default() -> Self {
        BlochSettings {
            cell_modes: 32,
            fiber_tol: 1e-16,
            mode_tol: 1e-15,
        }
    }
}

#[derive(Clone, Debug)]
struct BlochMode {
    omega: f64,
    /// Projection of the forcing on the mode.
    gamma: C64,
    /// `int_0^1 p(s) e^{i omega s} ds`, and for `omega ~ 0` the first moment.
    p_hat: C64,
    p_moment: f64,
    shape: Vec<C64>,
}

#[derive(Clone, Debug)]
struct Fiber {
    j: i64,
    modes: Vec<BlochMode>,
}

/// Exact solution by Bloch decomposition: on fiber `k_j = 2 pi j / L` the cell
/// harmonics `m` solve `R u'' + K u = p(t) G` with
/// `K_{m'm} = (k + 2 pi m'/eps)(k + 2 pi m/eps) a^_{m'-m}` and `R_{m'm} = rho^_{m'-m}`.
pub struct BlochReference {
    eps: f64,
    box_len: f64,
    cells: i64,
    cell_modes: i64,
    pulse: TimePulse,
    t_final: f64,
    fibers: Vec<Fiber>,
}

const OMEGA_ZERO: f64 = 1e-9;

/// Gauss-Legendre panels of the pulse support with tabulated pulse values.
struct PulseTable {
    lo: f64,
    h: f64,
    panels: usize,
    offsets: Vec<f64>,
    /// `0.5 h w_k p(s)` per node, panel-major.
    weights: Vec<f64>,
    nodes: Vec<f64>,
}

impl PulseTable {
    fn new(pulse: &TimePulse, omega_max: f64) -> Self {
        let (lo, hi) = pulse.support();
        let panels = ((omega_max.abs() * (hi - lo) / 4.0).ceil() as usize).max(32);
        let (x, w) = gauss_legendre(10);
        let h = (hi - lo) / panels as f64;
        let offsets: Vec<f64> = x.iter().map(|xi| 0.5 * h * (xi + 1.0)).collect();
        let mut weights = Vec::with_capacity(panels * x.len());
        let mut nodes = Vec::with_capacity(panels * x.len());
        for p in 0..panels {
            let a = lo + p as f64 * h;
            for (o, wi) in offsets.iter().zip(&w) {
                let s = a + o;
                nodes.push(s);
                weights.push(0.5 * h * wi * pulse.value(s));
            }
        }
        PulseTable {
            lo,
            h,
            panels,
            offsets,
            weights,
            nodes,
        }
    }

    /// `(int_0^1 p e^{i omega s} ds, int_0^1 s p ds)`.
    fn transform(&self, omega: f64) -> (C64, f64) {
        let k = self.offsets.len();
        let inner: Vec<C64> = self.offsets.iter().map(|o| C64::from_polar(1.0, omega * o)).collect();
        let step = C64::from_polar(1.0, omega * self.h);
        let mut start = C64::from_polar(1.0, omega * self.lo);
        let mut acc = C64::new(0.0, 0.0);
        let mut moment = 0.0;
        for p in 0..self.panels {
            if p % 64 == 0 {
                start = C64::from_polar(1.0, omega * (self.lo + p as f64 * self.h));
            }
            let mut panel = C64::new(0.0, 0.0);
            for i in 0..k {
                let w = self.weights[p * k + i];
                panel += inner[i] * w;
                moment += w * self.nodes[p * k + i];
            }
            acc += start * panel;
            start *= step;
        }
        (acc, moment)
    }
}

/// `int_0^t p(s) e^{i omega s} ds` and its first moment by composite Gauss-Legendre quadrature.
fn pulse_transform(pulse: &TimePulse, omega: f64, t: f64) -> (C64, f64) {
    let (lo, hi) = pulse.support();
    let b = t.min(hi);
    if b <= lo {
        return (C64::new(0.0, 0.0), 0.0);
    }
    let panels = ((omega.abs() * (b - lo) / 4.0).ceil() as usize).max(32);
    let (x, w) = gauss_legendre(10);
    let h = (b - lo) / panels as f64;
    let mut acc = C64::new(0.0, 0.0);
    let mut moment = 0.0;
    for p in 0..panels {
        let a = lo + p as f64 * h;
        for (xi, wi) in x.iter().zip(&w) {
            let s = a + 0.5 * h * (xi + 1.0);
            let v = 0.5 * h * wi * pulse.value(s);
            acc += C64::from_polar(v, omega * s);
            moment += v * s;
        }
    }
    (acc, moment)
}

/// Per-fiber eigensolver; the Cholesky factors are shared across fibers.
struct FiberSolver<'a> {
    eps: f64,
    box_len: f64,
    cells: i64,
    mh: i64,
    settings: BlochSettings,
    source: &'a SourceTerm,
    g_peak: f64,
    la_h: DMatrix<C64>,
    lr: DMatrix<C64>,
    lr_inv_h: DMatrix<C64>,
    table: PulseTable,
    p_l1: f64,
}

impl<'a> FiberSolver<'a> {
    fn new(coeffs: &CellCoefficients, eps: f64, source: &'a SourceTerm, box_len: f64, settings: &BlochSettings) -> Result<(Self, i64)> {
        let cells = cells_in_box(box_len, eps)?;
        let mh = settings.cell_modes as i64;
        let band = source.profile.frequency_cutoff(settings.fiber_tol);
        let j_max = ((band * box_len / (2.0 * PI)).ceil() as i64).min(cells / 2 - 1).max(0);
        let g_peak = source.profile.box_coefficient(0, box_len)?.norm().max(1e-300);
        let size = (2 * mh + 1) as usize;
        let a = coeffs.a(0, 0);
        let rho = coeffs.rho();
        let amat = DMatrix::from_fn(size, size, |r1, r2| a.coeff(&[r1 as i64 - r2 as i64]));
        let rmat = DMatrix::from_fn(size, size, |r1, r2| rho.coeff(&[r1 as i64 - r2 as i64]));
        let lr = rmat.cholesky().ok_or_else(|| Error::invalid("density matrix is not positive definite"))?.l();
        let la = amat.cholesky().ok_or_else(|| Error::invalid("stiffness matrix is not positive definite"))?.l();
        let lr_inv_h = lr
            .adjoint()
            .solve_upper_triangular(&DMatrix::identity(size, size))
            .ok_or_else(|| Error::invalid("singular density factor"))?;
        let omega_top = max_wave_speed(coeffs)? * (2.0 * PI * (mh + 1) as f64 / eps + band);
        let table = PulseTable::new(&source.pulse, omega_top);
        let p_l1: f64 = table.weights.iter().map(|w| w.abs()).sum();
        Ok((
            FiberSolver {
                eps,
                box_len,
                cells,
                mh,
                settings: *settings,
                source,
                g_peak,
                la_h: la.adjoint(),
                lr,
                lr_inv_h,
                table,
                p_l1,
            },
            j_max,
        ))
    }

    fn fiber(&self, j: i64) -> Result<Option<Fiber>> {
        let (mh, size) = (self.mh, (2 * self.mh + 1) as usize);
        let k = 2.0 * PI * j as f64 / self.box_len;
        let mut g = DVector::from_element(size, C64::new(0.0, 0.0));
        let mut any = false;
        for (r, m) in (-mh..=mh).enumerate() {
            let v = self.source.profile.box_coefficient(j + m * self.cells, self.box_len)?;
            if v.norm() > self.settings.fiber_tol * self.g_peak {
                any = true;
            }
            g[r] = v;
        }
        if !any {
            return Ok(None);
        }
        // H = L_r^{-1} K L_r^{-H} = M^H M with M = L_a^H D L_r^{-H}; the singular
        // values of M give omega with absolute accuracy eps_mach |M|.
        let mut dm = self.lr_inv_h.clone();
        for (r, m) in (-mh..=mh).enumerate() {
            dm.row_mut(r).scale_mut(k + 2.0 * PI * m as f64 / self.eps);
        }
        let svd = (&self.la_h * dm).svd(false, true);
        let v_t = svd.v_t.ok_or_else(|| Error::invalid("singular value decomposition failed"))?;
        let linv_g = self.lr.solve_lower_triangular(&g).ok_or_else(|| Error::invalid("singular density factor"))?;
        let mut candidates = Vec::with_capacity(size);
        let mut bound_max: f64 = 0.0;
        for n in 0..size {
            let v: DVector<C64> = v_t.row(n).adjoint();
            let gamma = v.dotc(&linv_g);
            let omega = svd.singular_values[n];
            let bound = gamma.norm() * (self.p_l1 + 1.0 / (1.0 + omega * omega));
            bound_max = bound_max.max(bound);
            candidates.push((omega, gamma, bound, v));
        }
        // Forced amplitude: displacement bound inside the pulse plus the free amplitude after it.
        let mut kept = Vec::new();
        let mut scale: f64 = 0.0;
        for (omega, gamma, bound, v) in candidates {
            if bound <= self.settings.mode_tol * bound_max {
                continue;
            }
            let (p_hat, p_moment) = self.table.transform(omega);
            let amp = gamma.norm() * (p_hat.norm() + 1.0 / (1.0 + omega * omega));
            scale = scale.max(amp);
            kept.push((omega, gamma, amp, v, p_hat, p_moment));
        }
        let modes = kept
            .into_iter()
            .filter(|m| m.2 > self.settings.mode_tol * scale)
            .map(|(omega, gamma, _, v, p_hat, p_moment)| BlochMode {
                omega,
                gamma,
                p_hat,
                p_moment,
                shape: (&self.lr_inv_h * v).iter().cloned().collect(),
            })
            .collect();
        Ok(Some(Fiber { j, modes }))
    }
}

/// `[S, S', S'']` of `S(t) = int_0^t p(s) sin(omega (t - s)) / omega ds`.
fn time_factor(pulse: &TimePulse, mode: &BlochMode, t: f64) -> [f64; 3] {
    let (_, t1) = pulse.support();
    let (p_hat, moment) = if t >= t1 { (mode.p_hat, mode.p_moment) } else { pulse_transform(pulse, mode.omega, t) };
    let p_t = pulse.value(t);
    let w = mode.omega;
    if w < OMEGA_ZERO {
        let p0 = p_hat.re;
        return [t * p0 - moment, p0, p_t];
    }
    let z = C64::from_polar(1.0, w * t) * p_hat.conj();
    let s = z.im / w;
    [s, z.re, p_t - w * w * s]
}

/// Adds the contribution of one fiber at time `t` to a snapshot.
fn accumulate(snap: &mut BoxSnapshot, pulse: &TimePulse, fiber: &Fiber, mh: i64, t: f64, nder: usize) {
    let mut acc = vec![[C64::new(0.0, 0.0); 3]; (2 * mh + 1) as usize];
    for mode in &fiber.modes {
        let tf = time_factor(pulse, mode, t);
        for (r, phi) in mode.shape.iter().enumerate() {
            let base = phi * mode.gamma;
            for s in 0..3 {
                acc[r][s] += base * tf[s];
            }
        }
    }
    for (r, v) in acc.iter().enumerate() {
        let e = snap.entry_mut(fiber.j, r as i64 - mh);
        e[..nder].copy_from_slice(&v[..nder]);
    }
}

impl BlochReference {
    pub fn solve(coeffs: &CellCoefficients, eps: f64, source: &SourceTerm, domain: &BoxDomain, settings: &BlochSettings) -> Result<Self> {
        domain.check_reach(source.profile.radius(), max_wave_speed(coeffs)?)?;
        let (solver, j_max) = FiberSolver::new(coeffs, eps, source, domain.box_len, settings)?;
        let fibers: Result<Vec<Option<Fiber>>> = (-j_max..=j_max).into_par_iter().map(|j| solver.fiber(j)).collect();
        Ok(BlochReference {
            eps,
            box_len: domain.box_len,
            cells: solver.cells,
            cell_modes: solver.mh,
            pulse: source.pulse.clone(),
            t_final: domain.t_final,
            fibers: fibers?.into_iter().flatten().collect(),
        })
    }

    /// Snapshots at the given times without keeping the eigenmodes, for boxes too
    /// large to hold every fiber in memory.
    pub fn stream_snapshots(coeffs: &CellCoefficients, eps: f64, source: &SourceTerm, domain: &BoxDomain, settings: &BlochSettings, times: &[f64], nder: usize) -> Result<Vec<BoxSnapshot>> {
        domain.check_reach(source.profile.radius(), max_wave_speed(coeffs)?)?;
        if nder > 3 {
            return Err(Error::invalid("at most u, u_t and u_tt are available"));
        }
        if let Some(t) = times.iter().find(|t| !(0.0..=domain.t_final * (1.0 + 1e-12)).contains(*t)) {
            return Err(Error::TimeNotStored { t: *t });
        }
        let (solver, j_max) = FiberSolver::new(coeffs, eps, source, domain.box_len, settings)?;
        let mh = solver.mh;
        let mut snaps: Vec<BoxSnapshot> = times
            .iter()
            .map(|t| BoxSnapshot::zeros(domain.box_len, solver.cells, *t, nder, (-j_max, j_max), (-mh, mh)))
            .collect::<Result<_>>()?;
        let chunk = 256;
        let mut lo = -j_max;
        while lo <= j_max {
            let hi = (lo + chunk - 1).min(j_max);
            let fibers: Result<Vec<Option<Fiber>>> = (lo..=hi).into_par_iter().map(|j| solver.fiber(j)).collect();
            for f in fibers?.into_iter().flatten() {
                for (snap, t) in snaps.iter_mut().zip(times) {
                    accumulate(snap, &source.pulse, &f, mh, *t, nder);
                }
            }
            lo = hi + 1;
        }
        Ok(snaps)
    }

    pub fn fiber_count(&self) -> usize {
        self.fibers.len()
    }

    pub fn mode_count(&self) -> usize {
        self.fibers.iter().map(|f| f.modes.len()).sum()
    }
}

impl Reference for BlochReference {
    fn eps(&self) -> f64 {
        self.eps
    }

    fn box_len(&self) -> f64 {
        self.box_len
    }

    fn snapshot(&self, t: f64, nder: usize) -> Result<BoxSnapshot> {
        if !(0.0..=self.t_final * (1.0 + 1e-12)).contains(&t) || nder > 3 {
            return Err(Error::TimeNotStored { t });
        }
        let j_max = self.fibers.iter().map(|f| f.j.abs()).max().unwrap_or(0);
        let mh = self.cell_modes;
        let mut snap = BoxSnapshot::zeros(self.box_len, self.cells, t, nder, (-j_max, j_max), (-mh, mh))?;
        for f in &self.fibers {
            accumulate(&mut snap, &self.pulse, f, mh, t, nder);
        }
        Ok(snap)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LeapfrogSettings {
    pub points_per_period: usize,
    pub cfl: f64,
}

impl Default for LeapfrogSettings {
    fn default() -> Self {
        LeapfrogSettings {
            points_per_period: 32,
            cfl: 0.9,
        }
    }
}

/// Fine-grid samples of `u` and `u_t` at the requested output times and the discrete energy trace.
#[derive(Clone, Debug)]
pub struct LeapfrogReference {
    pub eps: f64,
    pub box_len: f64,
    pub n: usize,
    pub dt: f64,
    pub steps: usize,
    cells: i64,
    times: Vec<f64>,
    u: Vec<Vec<f64>>,
    ut: Vec<Vec<f64>>,
    /// `(t, E)` at every recorded step.
    pub energy: Vec<(f64, f64)>,
    /// Largest `|E(t) - E(t_off)| / E(t_off)` after the source is off.
    pub energy_drift: f64,
}

impl LeapfrogReference {
    /// Output times must be integer multiples of the smallest positive one.
    pub fn solve(coeffs: &CellCoefficients, eps: f64, source: &SourceTerm, domain: &BoxDomain, settings: &LeapfrogSettings, output_times: &[f64]) -> Result<Self> {
        domain.check_reach(source.profile.radius(), max_wave_speed(coeffs)?)?;
        Self::solve_periodic(coeffs, eps, source, domain, settings, output_times)
    }

    /// Same scheme without the wrap-around check: the problem is posed on the periodic box.
    pub fn solve_periodic(coeffs: &CellCoefficients, eps: f64, source: &SourceTerm, domain: &BoxDomain, settings: &LeapfrogSettings, output_times: &[f64]) -> Result<Self> {
        let (a_max, r_min) = coefficient_bounds(coeffs)?;
        if settings.points_per_period < 16 {
            return Err(Error::invalid("at least 16 points per period are required"));
        }
        let l = domain.box_len;
        let cells = cells_in_box(l, eps)?;
        let n = settings.points_per_period * cells as usize;
        let h = l / n as f64;
        let limit = h * (r_min / a_max).sqrt();
        if !(settings.cfl > 0.0 && settings.cfl <= 1.0) {
            return Err(Error::CflViolation {
                dt: settings.cfl * limit,
                limit,
            });
        }
        let t_end = output_times.iter().cloned().fold(0.0, f64::max);
        let unit = output_times.iter().cloned().filter(|t| *t > 0.0).fold(f64::INFINITY, f64::min);
        let unit = if unit.is_finite() { unit } else { 1.0 };
        let per_unit = (unit / (settings.cfl * limit)).ceil().max(1.0);
        let dt = unit / per_unit;
        if dt > limit {
            return Err(Error::CflViolation { dt, limit });
        }
        let mut out_steps = Vec::new();
        for &t in output_times {
            let s = t / dt;
            if (s - s.round()).abs() > 1e-6 || t < 0.0 || t > domain.t_final * (1.0 + 1e-12) {
                return Err(Error::TimeNotStored { t });
            }
            out_steps.push(s.round() as usize);
        }
        let steps = (t_end / dt).round() as usize;
        // Node samples of rho and a; y = x / eps repeats with period points_per_period.
        let ppp = settings.points_per_period;
        let y0 = -0.5 * cells as f64;
        let a_cell: Vec<f64> = (0..ppp).map(|i| coeffs.a(0, 0).eval(&[y0 + i as f64 / ppp as f64])).collect();
        let r_cell: Vec<f64> = (0..ppp).map(|i| coeffs.rho().eval(&[y0 + i as f64 / ppp as f64])).collect();
        let rho: Vec<f64> = (0..n).map(|i| r_cell[i % ppp]).collect();
        let face: Vec<f64> = (0..n)
            .map(|i| {
                let (p, q) = (a_cell[i % ppp], a_cell[(i + 1) % ppp]);
                2.0 * p * q / (p + q)
            })
            .collect();
        let g: Vec<f64> = (0..n).map(|i| source.profile.value(-0.5 * l + i as f64 * h)).collect();
        let mut prev = vec![0.0; n];
        let mut cur = vec![0.0; n];
        let mut next = vec![0.0; n];
        let mut times = Vec::new();
        let mut u_out = Vec::new();
        let mut ut_out = Vec::new();
        let mut energy = Vec::new();
        let record_every = (steps / 4000).max(1);
        let t_off = source.pulse.support().1;
        let mut e_ref: Option<f64> = None;
        let mut drift: f64 = 0.0;
        let c2 = dt * dt / (h * h);
        let mut order: Vec<usize> = (0..out_steps.len()).collect();
        order.sort_by_key(|&i| out_steps[i]);
        let mut stored: Vec<Option<(Vec<f64>, Vec<f64>)>> = vec![None; out_steps.len()];
        for step in 0..=steps {
            let t = step as f64 * dt;
            let p = source.pulse.value(t);
            for i in 0..n {
                let ip = if i + 1 == n { 0 } else { i + 1 };
                let im = if i == 0 { n - 1 } else { i - 1 };
                let flux = face[i] * (cur[ip] - cur[i]) - face[im] * (cur[i] - cur[im]);
                next[i] = 2.0 * cur[i] - prev[i] + (c2 * flux + dt * dt * p * g[i]) / rho[i];
            }
            // E at step + 1/2.
            let mut e = 0.0;
            for i in 0..n {
                let ip = if i + 1 == n { 0 } else { i + 1 };
                let v = (next[i] - cur[i]) / dt;
                e += 0.5 * rho[i] * v * v * h + 0.5 * face[i] * (next[ip] - next[i]) * (cur[ip] - cur[i]) / h;
            }
            let t_half = t + 0.5 * dt;
            if step % record_every == 0 {
                energy.push((t_half, e));
            }
            if t > t_off {
                match e_ref {
                    None => e_ref = Some(e),
                    Some(e0) => drift = drift.max((e - e0).abs() / e0.abs().max(1e-300)),
                }
            }
            for (k, &s) in out_steps.iter().enumerate() {
                if s == step {
                    let ut: Vec<f64> = (0..n).map(|i| (next[i] - prev[i]) / (2.0 * dt)).collect();
                    stored[k] = Some((cur.clone(), ut));
                }
            }
            std::mem::swap(&mut prev, &mut cur);
            std::mem::swap(&mut cur, &mut next);
        }
        for k in order {
            let (u, ut) = stored[k].take().expect("output step reached");
            times.push(output_times[k]);
            u_out.push(u);
            ut_out.push(ut);
        }
        Ok(LeapfrogReference {
            eps,
            box_len: l,
            n,
            dt,
            steps,
            cells,
            times,
            u: u_out,
            ut: ut_out,
            energy,
            energy_drift: drift,
        })
    }

    fn index_of(&self, t: f64) -> Result<usize> {
        self.times
            .iter()
            .position(|s| (s - t).abs() <= 1e-9 * t.abs().max(1.0))
            .ok_or(Error::TimeNotStored { t })
    }

    /// Grid samples `(u, u_t)` at a stored time, on `x_i = -L/2 + i L / n`.
    pub fn samples(&self, t: f64) -> Result<(&[f64], &[f64])> {
        let i = self.index_of(t)?;
        Ok((&self.u[i], &self.ut[i]))
    }

    pub fn grid(&self) -> Vec<f64> {
        (0..self.n).map(|i| -0.5 * self.box_len + i as f64 * self.box_len / self.n as f64).collect()
    }

    pub fn stored_times(&self) -> &[f64] {
        &self.times
    }

    /// Discrete energy at the recorded step closest to `t`.
    pub fn energy_at(&self, t: f64) -> f64 {
        self.energy
            .iter()
            .min_by(|a, b| (a.0 - t).abs().total_cmp(&(b.0 - t).abs()))
            .map(|e| e.1)
            .unwrap_or(0.0)
    }
}

/// Box coefficients of grid samples on `x_i = -L/2 + i L / n`, frequencies `|Q| < n/2`.
pub fn grid_coefficients(samples: &[f64]) -> Vec<(i64, C64)> {
    let n = samples.len();
    let mut buf: Vec<C64> = samples.iter().map(|v| C64::new(*v, 0.0)).collect();
    fft::transform(&mut buf, n, 1, false);
    let half = (n / 2) as i64;
    (-half + 1..half)
        .map(|q| {
            let sign = if q.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            (q, buf[q.rem_euclid(n as i64) as usize] * (sign / n as f64))
        })
        .collect()
}

impl Reference for LeapfrogReference {
    fn eps(&self) -> f64 {
        self.eps
    }

    fn box_len(&self) -> f64 {
        self.box_len
    }

    fn snapshot(&self, t: f64, nder: usize) -> Result<BoxSnapshot> {
        if nder > 2 {
            return Err(Error::invalid("the leapfrog reference stores u and u_t only"));
        }
        let i = self.index_of(t)?;
        let half = (self.n / 2) as i64;
        let tmp = BoxSnapshot::zeros(self.box_len, self.cells, t, 1, (-(self.cells / 2), self.cells - self.cells / 2 - 1), (0, 0))?;
        let (_, m_lo) = tmp.split(-half + 1);
        let (_, m_hi) = tmp.split(half - 1);
        let mut snap = BoxSnapshot::zeros(self.box_len, self.cells, t, nder, (-(self.cells / 2), self.cells - self.cells / 2 - 1), (m_lo, m_hi))?;
        for (s, data) in [&self.u[i], &self.ut[i]].into_iter().enumerate().take(nder) {
            for (big, c) in grid_coefficients(data) {
                let (q, m) = snap.split(big);
                snap.add(q, m, s, c);
            }
        }
        Ok(snap)
    }
}

/// Energy-norm and `L^2` errors between two snapshots.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorPair {
    pub energy: f64,
    pub l2: f64,
}

/// `||grad_{t,x}(u - U)||` and `||u - U||` by Parseval on the box.
pub fn snapshot_error(reference: &BoxSnapshot, approx: &BoxSnapshot) -> Result<ErrorPair> {
    let d = reference.difference(approx)?;
    Ok(ErrorPair {
        energy: d.energy_norm(),
        l2: d.l2_norm(),
    })
}

/// Error of a two-scale approximation against a reference at time `t`.
pub fn energy_error(reference: &dyn Reference, approx: &TwoScaleExpansion, t: f64) -> Result<ErrorPair> {
    let r = reference.snapshot(t, 2)?;
    let a = approx.snapshot(t, 2)?;
    snapshot_error(&r, &a)
}

/// Same errors by trapezoid quadrature of grid samples on the leapfrog grid;
/// `d_x` of both functions is taken spectrally.
pub fn grid_energy_error(reference: &LeapfrogReference, approx: &TwoScaleExpansion, t: f64) -> Result<ErrorPair> {
    let (u, ut) = reference.samples(t)?;
    let n = reference.n;
    let snap = approx.snapshot(t, 2)?;
    let av = snap.samples(n, 0)?;
    let at = snap.samples(n, 1)?;
    let du: Vec<f64> = u.iter().zip(&av).map(|(a, b)| a - b).collect();
    let dut: Vec<f64> = ut.iter().zip(&at).map(|(a, b)| a - b).collect();
    let mut buf: Vec<C64> = du.iter().map(|v| C64::new(*v, 0.0)).collect();
    fft::transform(&mut buf, n, 1, false);
    for (i, c) in buf.iter_mut().enumerate() {
        let q = fft::freq(i, n);
        let xi = if 2 * q.unsigned_abs() as usize == n { 0.0 } else { 2.0 * PI * q as f64 / reference.box_len };
        *c *= C64::new(0.0, xi / n as f64);
    }
    fft::transform(&mut buf, n, 1, true);
    let h = reference.box_len / n as f64;
    let e2: f64 = dut.iter().zip(&buf).map(|(a, b)| a * a + b.re * b.re).sum::<f64>() * h;
    let l2: f64 = du.iter().map(|a| a * a).sum::<f64>() * h;
    Ok(ErrorPair {
        energy: e2.sqrt(),
        l2: l2.sqrt(),
    })
}

/// `H^{-1}` proxy `sqrt(L sum |r_Q|^2 / (1 + xi_Q^2))` of
/// `r = rho(x/eps) U_tt - (a(x/eps) U_x)_x - f` from a snapshot holding `U, U_t, U_tt`.
pub fn residual_h_minus1(approx: &BoxSnapshot, coeffs: &CellCoefficients, source: &SourceTerm) -> Result<f64> {
    if approx.derivative_count() < 3 {
        return Err(Error::invalid("the residual needs the second time derivative"));
    }
    let half = coeffs.n() as i64 / 2;
    let (q_lo, q_hi) = approx.q_range();
    let (m_lo, m_hi) = approx.m_range();
    let mut r = BoxSnapshot::zeros(approx.box_len, approx.cells, approx.t, 1, (q_lo, q_hi), (m_lo - half, m_hi + half))?;
    let a = coeffs.a(0, 0);
    let rho = coeffs.rho();
    approx.for_each(|q, m, v| {
        let xi_src = approx.xi(q, m);
        for p in -half + 1..half {
            let (ap, rp) = (a.coeff(&[p]), rho.coeff(&[p]));
            if ap == C64::new(0.0, 0.0) && rp == C64::new(0.0, 0.0) {
                continue;
            }
            let xi_out = r.xi(q, m + p);
            r.add(q, m + p, 0, rp * v[2] + ap * (xi_out * xi_src) * v[0]);
        }
    });
    let p_t = source.pulse.value(approx.t);
    if p_t != 0.0 {
        let (m_lo, m_hi) = r.m_range();
        for m in m_lo..=m_hi {
            for q in q_lo..=q_hi {
                let g = source.profile.box_coefficient(q + m * approx.cells, approx.box_len)?;
                r.add(q, m, 0, -g * p_t);
            }
        }
    }
    let mut acc = 0.0;
    r.for_each(|q, m, v| {
        let xi = r.xi(q, m);
        acc += v[0].norm_sqr() / (1.0 + xi * xi);
    });
    Ok((approx.box_len * acc).sqrt())
}

/// `||v c(./eps)||^2 / (||c||^2_{L^2(T)} (||v||^2 + ||eps v'||^2))` for a box profile
/// `v = sum v_q e^{i xi_q x}` and a cell function `c = sum c_m e^{2 pi i m y}`.
pub fn two_scale_l2_ratio(box_len: f64, eps: f64, v: &[(i64, C64)], c: &[(i64, C64)]) -> Result<f64> {
    let cells = cells_in_box(box_len, eps)?;
    let q_top = v.iter().map(|(q, _)| q.abs()).max().unwrap_or(0);
    let m_top = c.iter().map(|(m, _)| m.abs()).max().unwrap_or(0);
    let n = (2 * (q_top + m_top * cells) as usize + 2).next_power_of_two() * 2;
    let mut vb = vec![C64::new(0.0, 0.0); n];
    let mut cb = vec![C64::new(0.0, 0.0); n];
    for (q, val) in v {
        vb[q.rem_euclid(n as i64) as usize] += val;
    }
    for (m, val) in c {
        cb[(m * cells).rem_euclid(n as i64) as usize] += val;
    }
    fft::transform(&mut vb, n, 1, true);
    fft::transform(&mut cb, n, 1, true);
    let h = box_len / n as f64;
    let lhs: f64 = vb.iter().zip(&cb).map(|(a, b)| (a * b).norm_sqr()).sum::<f64>() * h;
    let c2: f64 = c.iter().map(|(_, x)| x.norm_sqr()).sum();
    let v2: f64 = v.iter().map(|(_, x)| x.norm_sqr()).sum::<f64>() * box_len;
    let dv2: f64 = v
        .iter()
        .map(|(q, x)| {
            let xi = 2.0 * PI * *q as f64 / box_len;
            (eps * xi).powi(2) * x.norm_sqr()
        })
        .sum::<f64>()
        * box_len;
    Ok(lhs / (c2 * (v2 + dv2)))
}

/// Ratios of [`two_scale_l2_ratio`] for `count` seeded random pairs: `v` band-limited to
/// `|xi| <= 1.5 pi / eps` with smoothly decaying amplitudes, `c` with `|m| <= 8` and
/// square-summable amplitudes.
pub fn sample_two_scale_ratios(box_len: f64, eps: f64, count: usize, seed: u64) -> Result<Vec<f64>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let q_top = (0.75 * box_len / eps).floor() as i64;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let scale = rng.random_range(0.1..1.0) * q_top as f64;
        let v: Vec<(i64, C64)> = (-q_top..=q_top)
            .map(|q| {
                let amp = (-(q as f64 / scale).powi(2)).exp();
                (q, C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * amp)
            })
            .collect();
        let c: Vec<(i64, C64)> = (-8i64..=8)
            .map(|m| {
                let amp = 1.0 / (1.0 + m.abs() as f64);
                (m, C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * amp)
            })
            .collect();
        out.push(two_scale_l2_ratio(box_len, eps, &v, &c)?);
    }
    Ok(out)
}
