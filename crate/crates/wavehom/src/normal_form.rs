//! Elimination of time derivatives from the homogenized series.
//!
//! Finds `R_2, .., R_2k` with `(1 + R_2 + ..)(a*_2 + a*_4 + ..) = a*_2 + a~_4 + .. + O_{2k+4}`
//! where every `a~_{2j}` is free of `d_t`. At each degree the correction solves a
//! triangular recursion in the powers of `d_t`.

use crate::error::{Error, Result};
use crate::operators::{effective_floor, rho_bar};
use crate::poly::HomogenizedPoly;
use crate::torus::MultiIndex;

#[derive(Clone, Debug)]
pub struct NormalForm {
    pub k: usize,
    pub dim: usize,
    pub rho_bar: f64,
    /// Time-free part of `a*_2`.
    pub a2: HomogenizedPoly,
    /// `R_2, R_4, .., R_2k`.
    pub r: Vec<HomogenizedPoly>,
    /// `a~_4, .., a~_{2k+2}`.
    pub a_tilde: Vec<HomogenizedPoly>,
    /// Largest coefficient dropped because it carried an odd power of `d_t`.
    pub dropped_odd: f64,
}

/// Splits `p` by powers of `d_t` and finds `r` so that `r a*_2 + p` is time-free.
/// Returns `(r, r a*_2 + p)` with the remainder's time part removed.
fn eliminate_degree(p: &HomogenizedPoly, rho: f64, a2: &HomogenizedPoly, a_star2: &HomogenizedPoly, deg: u32) -> (HomogenizedPoly, HomogenizedPoly) {
    let dim = p.dim();
    let m = deg / 2;
    // s_{2l} is the coefficient of d_t^{2m-2l}.
    let s: Vec<HomogenizedPoly> = (0..=m).map(|l| p.time_slice(2 * m - 2 * l)).collect();
    let mut q: Vec<HomogenizedPoly> = Vec::new();
    for l in 0..m as usize {
        let mut acc = s[l].clone();
        if l > 0 {
            acc = acc.add(&q[l - 1].mul(a2));
        }
        q.push(acc.scale(-1.0 / rho));
    }
    let r = HomogenizedPoly::sum_of(
        dim,
        q.iter()
            .enumerate()
            .map(|(l, ql)| ql.times_dt(2 * m - 2 - 2 * l as u32))
            .collect::<Vec<_>>()
            .iter(),
    );
    let reduced = r.mul(a_star2).add(p).time_slice(0);
    (r, reduced)
}

fn check_a2(a_star2: &HomogenizedPoly) -> Result<(f64, HomogenizedPoly)> {
    let rho = rho_bar(a_star2);
    if !(rho > 0.0) {
        return Err(Error::DegenerateA2(format!("coefficient of d_t^2 is {rho}")));
    }
    let scale = a_star2.norm();
    for (b, c) in a_star2.terms() {
        if b.order() != 2 {
            return Err(Error::DegenerateA2(format!("a*_2 has a term of order {}", b.order())));
        }
        if b.time == 1 && c.abs() > 1e-12 * scale {
            return Err(Error::DegenerateA2("a*_2 mixes d_t with d_x".into()));
        }
    }
    let floor = effective_floor(a_star2);
    if !(floor > 1e-12 * scale) {
        return Err(Error::DegenerateA2(format!("effective tensor is not positive definite (floor {floor:.3e})")));
    }
    Ok((rho, a_star2.time_slice(0)))
}

/// Normal form of order `k` from `series = [a*_2, a*_3, .., a*_{2k+2}]`.
/// Odd-degree entries are ignored; they vanish identically.
pub fn compute_normal_form(series: &[HomogenizedPoly], k: usize) -> Result<NormalForm> {
    if series.len() < 2 * k + 1 {
        return Err(Error::TableTooShallow {
            required: 2 * k + 2,
            depth: series.len() + 1,
        });
    }
    let a_star2 = &series[0];
    let dim = a_star2.dim();
    let (rho, a2) = check_a2(a_star2)?;
    let even = |deg: u32| -> &HomogenizedPoly { &series[deg as usize - 2] };
    let mut r: Vec<HomogenizedPoly> = Vec::new();
    let mut a_tilde = Vec::new();
    let mut dropped_odd: f64 = 0.0;
    for m in 2..=(k as u32 + 1) {
        let deg = 2 * m;
        let mut lhs = HomogenizedPoly::one(dim);
        for rj in &r {
            lhs = lhs.add(rj);
        }
        let mut ops = HomogenizedPoly::zero(dim);
        for j in 1..=m {
            ops = ops.add(even(2 * j));
        }
        let p = lhs.mul_truncated(&ops, Some(deg)).homogeneous_part(deg);
        for (b, c) in p.terms() {
            if b.time % 2 == 1 {
                dropped_odd = dropped_odd.max(c.abs());
            }
        }
        let (rj, at) = eliminate_degree(&p, rho, &a2, a_star2, deg);
        r.push(rj);
        a_tilde.push(at);
    }
    Ok(NormalForm {
        k,
        dim,
        rho_bar: rho,
        a2,
        r,
        a_tilde,
        dropped_odd,
    })
}

impl NormalForm {
    /// `1 + R_2 + .. + R_2k`.
    pub fn one_plus_r(&self) -> HomogenizedPoly {
        let mut p = HomogenizedPoly::one(self.dim);
        for rj in &self.r {
            p = p.add(rj);
        }
        p
    }

    /// `a*_2 + a~_4 + .. + a~_{2k+2}`.
    pub fn reduced_operator(&self) -> HomogenizedPoly {
        let mut p = self.a2.add(&HomogenizedPoly::monomial(self.dim, MultiIndex::new(2, &[0, 0]), self.rho_bar));
        for a in &self.a_tilde {
            p = p.add(a);
        }
        p
    }

    /// Text dump: `R n beta coeff` and `A n beta coeff` records in canonical order.
    pub fn dump(&self) -> String {
        let mut s = format!("# normal form k = {} rho_bar = {:.17e}\n", self.k, self.rho_bar);
        for (j, rj) in self.r.iter().enumerate() {
            s.push_str(&rj.dump(&format!("R {}", 2 * j + 2)));
        }
        for (j, a) in self.a_tilde.iter().enumerate() {
            s.push_str(&a.dump(&format!("A {}", 2 * j + 4)));
        }
        s
    }
}

/// Degree-wise residual report of an operator identity.
#[derive(Clone, Debug)]
pub struct ResidualReport {
    /// `(degree, |residual| / scale)` for every degree checked.
    pub per_degree: Vec<(u32, f64)>,
    /// Lowest degree whose residual is above the tolerance used to build the report.
    pub lowest_nonzero_degree: Option<u32>,
}

impl ResidualReport {
    pub fn max_relative(&self) -> f64 {
        self.per_degree.iter().map(|(_, r)| *r).fold(0.0, f64::max)
    }

    fn build(lhs: &HomogenizedPoly, rhs: &HomogenizedPoly, degrees: impl Iterator<Item = u32>, tol: f64) -> Self {
        Self::build_scaled(lhs, rhs, degrees, tol, |_| 0.0)
    }

    /// `extra(deg)` adds a reference size for identities whose both sides cancel.
    fn build_scaled(lhs: &HomogenizedPoly, rhs: &HomogenizedPoly, degrees: impl Iterator<Item = u32>, tol: f64, extra: impl Fn(u32) -> f64) -> Self {
        let diff = lhs.sub(rhs);
        let mut per_degree = Vec::new();
        let mut lowest = None;
        for deg in degrees {
            let scale = lhs.homogeneous_part(deg).norm().max(rhs.homogeneous_part(deg).norm()).max(extra(deg)).max(1e-300);
            let rel = diff.homogeneous_part(deg).norm() / scale;
            if rel > tol && lowest.is_none() {
                lowest = Some(deg);
            }
            per_degree.push((deg, rel));
        }
        ResidualReport {
            per_degree,
            lowest_nonzero_degree: lowest,
        }
    }
}

fn even_sum(series: &[HomogenizedPoly], max_deg: u32) -> HomogenizedPoly {
    let dim = series[0].dim();
    let mut p = HomogenizedPoly::zero(dim);
    for deg in (2..=max_deg).step_by(2) {
        p = p.add(&series[deg as usize - 2]);
    }
    p
}

/// Residual of `(1 + R)(a*_2 + .. + a*_{2k+2}) = a*_2 + a~_4 + ..` by degree.
pub fn verify_reduction(nf: &NormalForm, series: &[HomogenizedPoly], tol: f64) -> ResidualReport {
    let top = 2 * nf.k as u32 + 2;
    let lhs = nf.one_plus_r().mul_truncated(&even_sum(series, top), Some(top));
    ResidualReport::build(&lhs, &nf.reduced_operator(), 2..=top, tol)
}

/// `R~` with `1 + R~ = (1 + R)^{-1}` up to degree `2k`, as `[R~_2, .., R~_2k]`.
pub fn invert_r_series(nf: &NormalForm) -> Vec<HomogenizedPoly> {
    let top = 2 * nf.k as u32;
    let one = HomogenizedPoly::one(nf.dim);
    let minus_r = nf.one_plus_r().sub(&one).scale(-1.0);
    let mut total = one.clone();
    let mut power = one;
    for _ in 0..nf.k {
        power = power.mul_truncated(&minus_r, Some(top));
        total = total.add(&power);
    }
    (1..=nf.k as u32).map(|j| total.homogeneous_part(2 * j)).collect()
}

/// Residual of `(1 + R~)(1 + R) = 1` up to degree `2k`.
pub fn verify_inverse(nf: &NormalForm, r_tilde: &[HomogenizedPoly], tol: f64) -> ResidualReport {
    let top = 2 * nf.k as u32;
    let mut inv = HomogenizedPoly::one(nf.dim);
    for r in r_tilde {
        inv = inv.add(r);
    }
    let one_plus_r = nf.one_plus_r();
    let lhs = inv.mul_truncated(&one_plus_r, Some(top));
    // Both sides vanish above degree 0, so residuals are measured against the factor sizes.
    let size = |deg: u32| {
        (0..=deg)
            .map(|i| inv.homogeneous_part(i).norm() * one_plus_r.homogeneous_part(deg - i).norm())
            .sum::<f64>()
    };
    ResidualReport::build_scaled(&lhs, &HomogenizedPoly::one(nf.dim), (2..=top).step_by(2), tol, size)
}

/// Residual of `(1 + R~)(a*_2 + a~_4 + .. + a~_{2k+2}) = a*_2 + .. + a*_{2k+2}` up to degree `2k+2`.
pub fn verify_inverse_reduction(nf: &NormalForm, r_tilde: &[HomogenizedPoly], series: &[HomogenizedPoly], tol: f64) -> ResidualReport {
    let top = 2 * nf.k as u32 + 2;
    let mut inv = HomogenizedPoly::one(nf.dim);
    for r in r_tilde {
        inv = inv.add(r);
    }
    let lhs = inv.mul_truncated(&nf.reduced_operator(), Some(top));
    ResidualReport::build(&lhs, &even_sum(series, top), 2..=top, tol)
}
