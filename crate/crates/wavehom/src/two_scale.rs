//! Two-scale functions `sum c(x/eps) d^beta v(t, x)` on a periodic box of
//! length `L = J eps`.
//!
//! A box mode `q` of a slow profile times a cell mode `m` of a coefficient is
//! the box mode `Q = q + m J`, so every composed function is held exactly by
//! its box Fourier coefficients.

use crate::cascade::CorrectorTable;
use crate::error::{Error, Result};
use crate::modal::C64;
use crate::spectral::SpectralSolution;
use crate::torus::fft;
use crate::torus::MultiIndex;
use std::f64::consts::PI;

/// Number of cells `J = L / eps`, which must be an integer.
pub fn cells_in_box(box_len: f64, eps: f64) -> Result<i64> {
    let j = box_len / eps;
    let r = j.round();
    if (j - r).abs() > 1e-9 * j.max(1.0) || r < 1.0 {
        return Err(Error::invalid(format!("box length {box_len} is not a multiple of eps = {eps}")));
    }
    Ok(r as i64)
}

/// Box Fourier coefficients `w^_Q` and `d_t^s w^_Q` of a real function at one time,
/// stored densely over `Q = q + m J`, `q in [q_lo, q_hi]`, `m in [m_lo, m_hi]`.
#[derive(Clone, Debug)]
pub struct BoxSnapshot {
    pub box_len: f64,
    pub cells: i64,
    pub t: f64,
    nder: usize,
    q_lo: i64,
    q_hi: i64,
    m_lo: i64,
    m_hi: i64,
    data: Vec<C64>,
}

impl BoxSnapshot {
    /// Zero snapshot holding `d_t^s` for `s < nder`.
    pub fn zeros(box_len: f64, cells: i64, t: f64, nder: usize, q: (i64, i64), m: (i64, i64)) -> Result<Self> {
        let half = cells / 2;
        if q.0 < -half || q.1 >= cells - half || q.0 > q.1 || m.0 > m.1 {
            return Err(Error::invalid(format!("slow range [{}, {}] does not fit {cells} cells", q.0, q.1)));
        }
        let len = ((q.1 - q.0 + 1) * (m.1 - m.0 + 1)) as usize * nder;
        Ok(BoxSnapshot {
            box_len,
            cells,
            t,
            nder,
            q_lo: q.0,
            q_hi: q.1,
            m_lo: m.0,
            m_hi: m.1,
            data: vec![C64::new(0.0, 0.0); len],
        })
    }

    pub fn derivative_count(&self) -> usize {
        self.nder
    }

    pub fn q_range(&self) -> (i64, i64) {
        (self.q_lo, self.q_hi)
    }

    pub fn m_range(&self) -> (i64, i64) {
        (self.m_lo, self.m_hi)
    }

    /// Splits a box index into `(q, m)` with `q in [-J/2, J - J/2)`.
    pub fn split(&self, big_q: i64) -> (i64, i64) {
        let half = self.cells / 2;
        let m = (big_q + half).div_euclid(self.cells);
        (big_q - m * self.cells, m)
    }

    fn offset(&self, q: i64, m: i64) -> Option<usize> {
        if q < self.q_lo || q > self.q_hi || m < self.m_lo || m > self.m_hi {
            return None;
        }
        let nq = self.q_hi - self.q_lo + 1;
        Some((((m - self.m_lo) * nq + (q - self.q_lo)) as usize) * self.nder)
    }

    pub fn xi(&self, q: i64, m: i64) -> f64 {
        2.0 * PI * (q + m * self.cells) as f64 / self.box_len
    }

    pub fn get(&self, q: i64, m: i64, s: usize) -> C64 {
        match self.offset(q, m) {
            Some(o) if s < self.nder => self.data[o + s],
            _ => C64::new(0.0, 0.0),
        }
    }

    pub fn add(&mut self, q: i64, m: i64, s: usize, v: C64) {
        let o = self.offset(q, m).expect("index inside the snapshot layout");
        self.data[o + s] += v;
    }

    /// Mutable `[d_t^0, .., d_t^{nder-1}]` coefficients at `(q, m)`.
    pub fn entry_mut(&mut self, q: i64, m: i64) -> &mut [C64] {
        let o = self.offset(q, m).expect("index inside the snapshot layout");
        let n = self.nder;
        &mut self.data[o..o + n]
    }

    /// Visits every stored `(q, m, [coefficients])`.
    pub fn for_each(&self, mut f: impl FnMut(i64, i64, &[C64])) {
        for m in self.m_lo..=self.m_hi {
            for q in self.q_lo..=self.q_hi {
                let o = self.offset(q, m).unwrap();
                f(q, m, &self.data[o..o + self.nder]);
            }
        }
    }

    /// `self - other` on the union of both layouts.
    pub fn difference(&self, other: &BoxSnapshot) -> Result<BoxSnapshot> {
        if self.cells != other.cells || (self.box_len - other.box_len).abs() > 1e-12 * self.box_len {
            return Err(Error::invalid("snapshots live on different boxes"));
        }
        let nder = self.nder.min(other.nder);
        let mut out = BoxSnapshot::zeros(
            self.box_len,
            self.cells,
            self.t,
            nder,
            (self.q_lo.min(other.q_lo), self.q_hi.max(other.q_hi)),
            (self.m_lo.min(other.m_lo), self.m_hi.max(other.m_hi)),
        )?;
        self.for_each(|q, m, v| {
            let e = out.entry_mut(q, m);
            for s in 0..nder {
                e[s] += v[s];
            }
        });
        other.for_each(|q, m, v| {
            let e = out.entry_mut(q, m);
            for s in 0..nder {
                e[s] -= v[s];
            }
        });
        Ok(out)
    }

    /// `||w||_{L^2}` over the box.
    pub fn l2_norm(&self) -> f64 {
        let mut acc = 0.0;
        self.for_each(|_, _, v| acc += v[0].norm_sqr());
        (self.box_len * acc).sqrt()
    }

    /// `||grad_{t,x} w||_{L^2}`.
    pub fn energy_norm(&self) -> f64 {
        assert!(self.nder >= 2, "energy norm needs the time derivative");
        let mut acc = 0.0;
        self.for_each(|q, m, v| {
            let xi = self.xi(q, m);
            acc += v[1].norm_sqr() + xi * xi * v[0].norm_sqr();
        });
        (self.box_len * acc).sqrt()
    }

    /// Samples of `d_t^s w` on `x_j = -L/2 + j L / n`; `n` must exceed twice the largest `|Q|`.
    pub fn samples(&self, n: usize, s: usize) -> Result<Vec<f64>> {
        let q_abs = (self.q_lo + self.m_lo * self.cells).abs().max((self.q_hi + self.m_hi * self.cells).abs());
        if (2 * q_abs) as usize >= n {
            return Err(Error::invalid(format!("{n} samples cannot resolve box mode {q_abs}")));
        }
        let mut buf = vec![C64::new(0.0, 0.0); n];
        self.for_each(|q, m, v| {
            let big = q + m * self.cells;
            // x_0 = -L/2 contributes the phase e^{-i pi Q}.
            let sign = if big.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            buf[big.rem_euclid(n as i64) as usize] += v[s] * sign;
        });
        fft::transform(&mut buf, n, 1, true);
        Ok(buf.into_iter().map(|c| c.re).collect())
    }

    /// `d_t^s d_x^r w(x)` by direct summation.
    pub fn eval(&self, x: f64, s: usize, r: u32) -> f64 {
        let mut acc = C64::new(0.0, 0.0);
        self.for_each(|q, m, v| {
            let xi = self.xi(q, m);
            acc += v[s] * C64::new(0.0, xi).powu(r) * C64::from_polar(1.0, xi * x);
        });
        acc.re
    }

    pub fn max_abs(&self, s: usize) -> f64 {
        let mut best: f64 = 0.0;
        self.for_each(|_, _, v| best = best.max(v[s].norm()));
        best
    }
}

#[derive(Clone, Debug)]
struct CellTerm {
    m: i64,
    beta: MultiIndex,
    coeff: C64,
}

#[derive(Clone)]
struct Part {
    profile: SpectralSolution,
    terms: Vec<CellTerm>,
    max_time: usize,
    order: usize,
}

/// `sum_parts (I + sum_{n <= order} eps^n chi_n) v_part` evaluated at `y = x / eps`.
#[derive(Clone)]
pub struct TwoScaleExpansion {
    pub eps: f64,
    pub box_len: f64,
    cells: i64,
    parts: Vec<Part>,
}

/// `weight (I + sum_{n=1}^{order} eps^n chi_n)` applied to `base`.
pub fn apply_weighted_series(table: &CorrectorTable, base: &SpectralSolution, eps: f64, order: usize, weight: f64) -> Result<TwoScaleExpansion> {
    if table.dim() != 1 {
        return Err(Error::invalid("two-scale sampling is implemented for d = 1"));
    }
    table.require_depth(order)?;
    if base.derivative_order() < order {
        return Err(Error::InsufficientDerivatives {
            required: order,
            available: base.derivative_order(),
        });
    }
    let box_len = base.modes().box_len;
    let cells = cells_in_box(box_len, eps)?;
    if 2 * base.modes().q_max >= cells {
        return Err(Error::invalid("slow modes overlap the first cell harmonic"));
    }
    let mut terms = vec![CellTerm {
        m: 0,
        beta: MultiIndex::ZERO,
        coeff: C64::new(weight, 0.0),
    }];
    for n in 1..=order {
        let en = weight * eps.powi(n as i32);
        for (beta, field) in table.level(n) {
            for (idx, c) in field.coeffs().iter().enumerate() {
                if *c != C64::new(0.0, 0.0) {
                    terms.push(CellTerm {
                        m: field.freqs_of(idx)[0],
                        beta: *beta,
                        coeff: c * en,
                    });
                }
            }
        }
    }
    let max_time = terms.iter().map(|t| t.beta.time as usize).max().unwrap_or(0);
    Ok(TwoScaleExpansion {
        eps,
        box_len,
        cells,
        parts: vec![Part {
            profile: base.clone(),
            terms,
            max_time,
            order,
        }],
    })
}

/// `(I + sum_{n=1}^{order} eps^n chi_n) base`, sampled at `y = x / eps`.
pub fn apply_corrector_series(table: &CorrectorTable, base: &SpectralSolution, eps: f64, order: usize) -> Result<TwoScaleExpansion> {
    apply_weighted_series(table, base, eps, order, 1.0)
}

impl TwoScaleExpansion {
    /// Sum of expansions on the same box and `eps`.
    pub fn sum(mut parts: Vec<TwoScaleExpansion>) -> Result<TwoScaleExpansion> {
        let mut first = parts.drain(..1).next().ok_or_else(|| Error::invalid("empty sum"))?;
        for p in parts {
            if p.cells != first.cells || p.eps != first.eps {
                return Err(Error::invalid("expansions live on different boxes"));
            }
            first.parts.extend(p.parts);
        }
        Ok(first)
    }

    pub fn cells(&self) -> i64 {
        self.cells
    }

    /// Largest corrector order used by any part.
    pub fn order(&self) -> usize {
        self.parts.iter().map(|p| p.order).max().unwrap_or(0)
    }

    /// Box coefficients of the composed function and its first `nder - 1` time derivatives.
    pub fn snapshot(&self, t: f64, nder: usize) -> Result<BoxSnapshot> {
        let q_max = self.parts.iter().map(|p| p.profile.modes().q_max).max().unwrap_or(0);
        let m_max = self.parts.iter().flat_map(|p| p.terms.iter().map(|c| c.m.abs())).max().unwrap_or(0);
        let mut snap = BoxSnapshot::zeros(self.box_len, self.cells, t, nder, (-q_max, q_max), (-m_max, m_max))?;
        for part in &self.parts {
            let s_top = part.max_time + nder - 1;
            let d = part.profile.time_derivatives(t, s_top)?;
            let modes = part.profile.modes();
            let nq = modes.len();
            let max_space = part.terms.iter().map(|c| c.beta.space[0]).max().unwrap_or(0) as usize;
            let powers: Vec<Vec<C64>> = (0..nq)
                .map(|i| {
                    let z = C64::new(0.0, modes.xi(i));
                    let mut v = vec![C64::new(1.0, 0.0); max_space + 1];
                    for p in 1..=max_space {
                        v[p] = v[p - 1] * z;
                    }
                    v
                })
                .collect();
            for term in &part.terms {
                let bt = term.beta.time as usize;
                let bx = term.beta.space[0] as usize;
                for i in 0..nq {
                    let f = term.coeff * powers[i][bx];
                    let e = snap.entry_mut(modes.q(i), term.m);
                    for (s, slot) in e.iter_mut().enumerate() {
                        *slot += f * d[bt + s][i];
                    }
                }
            }
        }
        Ok(snap)
    }

    /// Value, `d_t` and `d_x` of the composed function at `(t, x)`.
    pub fn sample(&self, t: f64, x: f64) -> Result<[f64; 3]> {
        let s = self.snapshot(t, 2)?;
        Ok([s.eval(x, 0, 0), s.eval(x, 1, 0), s.eval(x, 0, 1)])
    }
}
