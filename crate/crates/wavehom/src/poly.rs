//! Constant-coefficient differential operators in `(d_t, d_x)` as polynomials.
//!
//! Coefficients are keyed by multi-index, so the map order is the canonical
//! order used by every dump. Products use compensated summation.

use crate::torus::MultiIndex;
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Neumaier-compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HomogenizedPoly {
    dim: usize,
    terms: BTreeMap<MultiIndex, f64>,
}

fn ipow(k: u32) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

impl HomogenizedPoly {
    pub fn zero(dim: usize) -> Self {
        HomogenizedPoly {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(dim: usize) -> Self {
        Self::monomial(dim, MultiIndex::ZERO, 1.0)
    }

    pub fn monomial(dim: usize, beta: MultiIndex, coeff: f64) -> Self {
        let mut p = Self::zero(dim);
        p.add_term(beta, coeff);
        p
    }

    pub fn from_terms(dim: usize, terms: impl IntoIterator<Item = (MultiIndex, f64)>) -> Self {
        let mut p = Self::zero(dim);
        for (b, c) in terms {
            p.add_term(b, c);
        }
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &BTreeMap<MultiIndex, f64> {
        &self.terms
    }

    pub fn add_term(&mut self, beta: MultiIndex, coeff: f64) {
        if coeff == 0.0 {
            return;
        }
        let e = self.terms.entry(beta).or_insert(0.0);
        *e += coeff;
        if *e == 0.0 {
            self.terms.remove(&beta);
        }
    }

    pub fn coeff(&self, beta: &MultiIndex) -> f64 {
        self.terms.get(beta).copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Highest total order present, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|b| b.order()).max()
    }

    pub fn lowest_degree(&self) -> Option<u32> {
        self.terms.keys().map(|b| b.order()).min()
    }

    pub fn is_homogeneous(&self) -> bool {
        self.degree() == self.lowest_degree()
    }

    pub fn homogeneous_part(&self, deg: u32) -> Self {
        Self::from_terms(self.dim, self.terms.iter().filter(|(b, _)| b.order() == deg).map(|(b, c)| (*b, *c)))
    }

    pub fn truncated(&self, max_deg: u32) -> Self {
        Self::from_terms(self.dim, self.terms.iter().filter(|(b, _)| b.order() <= max_deg).map(|(b, c)| (*b, *c)))
    }

    /// Coefficient polynomial of `d_t^power`, as a time-free polynomial.
    pub fn time_slice(&self, power: u32) -> Self {
        Self::from_terms(
            self.dim,
            self.terms.iter().filter(|(b, _)| b.time == power).map(|(b, c)| (b.without_time(), *c)),
        )
    }

    pub fn max_time_order(&self) -> u32 {
        self.terms.keys().map(|b| b.time).max().unwrap_or(0)
    }

    pub fn is_time_free(&self) -> bool {
        self.terms.keys().all(|b| b.time == 0)
    }

    /// Multiplies every term by `d_t^power`.
    pub fn times_dt(&self, power: u32) -> Self {
        Self::from_terms(self.dim, self.terms.iter().map(|(b, c)| (b.bump_time(power), *c)))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_terms(self.dim, self.terms.iter().map(|(b, c)| (*b, c * s)))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut p = self.clone();
        for (b, c) in &other.terms {
            p.add_term(*b, *c);
        }
        p
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    /// Product, optionally dropping every term above `max_deg`.
    pub fn mul_truncated(&self, other: &Self, max_deg: Option<u32>) -> Self {
        let mut acc: BTreeMap<MultiIndex, CompensatedSum> = BTreeMap::new();
        for (b1, c1) in &self.terms {
            for (b2, c2) in &other.terms {
                let b = b1.add(b2);
                if max_deg.is_some_and(|m| b.order() > m) {
                    continue;
                }
                acc.entry(b).or_default().add(c1 * c2);
            }
        }
        Self::from_terms(self.dim, acc.into_iter().map(|(b, s)| (b, s.value())))
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.mul_truncated(other, None)
    }

    /// Sum of `polys` with compensated accumulation.
    pub fn sum_of<'a>(dim: usize, polys: impl IntoIterator<Item = &'a HomogenizedPoly>) -> Self {
        let mut acc: BTreeMap<MultiIndex, CompensatedSum> = BTreeMap::new();
        for p in polys {
            for (b, c) in &p.terms {
                acc.entry(*b).or_default().add(*c);
            }
        }
        Self::from_terms(dim, acc.into_iter().map(|(b, s)| (b, s.value())))
    }

    /// Largest absolute coefficient.
    pub fn norm(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Value with `d_t -> i tau`, `d_x -> i xi`.
    pub fn evaluate_symbol(&self, tau: f64, xi: &[f64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (b, c) in &self.terms {
            let mut mag = c * tau.powi(b.time as i32);
            for (j, s) in b.space.iter().enumerate().take(self.dim) {
                mag *= xi[j].powi(*s as i32);
            }
            acc += ipow(b.order()) * mag;
        }
        acc
    }

    /// Plain polynomial value at real `(tau, xi)`.
    pub fn evaluate_real(&self, tau: f64, xi: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (b, c) in &self.terms {
            let mut v = c * tau.powi(b.time as i32);
            for (j, s) in b.space.iter().enumerate().take(self.dim) {
                v *= xi[j].powi(*s as i32);
            }
            acc += v;
        }
        acc
    }

    /// Records `label beta coeff` in canonical order.
    pub fn dump(&self, label: &str) -> String {
        let mut s = String::new();
        for (b, c) in &self.terms {
            let _ = writeln!(s, "{label} {b} {c:.17e}");
        }
        s
    }
}

impl std::fmt::Display for HomogenizedPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (b, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c:.6e}")?;
            if b.time > 0 {
                write!(f, " dt^{}", b.time)?;
            }
            for (j, s) in b.space.iter().enumerate().take(self.dim) {
                if *s > 0 {
                    write!(f, " dx{}^{}", j + 1, s)?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(t: u32, x: u32) -> MultiIndex {
        MultiIndex::new(t, &[x])
    }

    #[test]
    fn symbol_convention() {
        // d_t^2 - 1.6 d_x^2  ->  -tau^2 + 1.6 xi^2
        let p = HomogenizedPoly::from_terms(1, [(m(2, 0), 1.0), (m(0, 2), -1.6)]);
        let v = p.evaluate_symbol(0.0, &[2.0]);
        assert!((v.re - 6.4).abs() < 1e-14 && v.im == 0.0);
        assert!((p.evaluate_real(0.0, &[2.0]) + 6.4).abs() < 1e-14);
    }

    #[test]
    fn product_and_truncation() {
        let a = HomogenizedPoly::from_terms(1, [(m(0, 0), 1.0), (m(2, 0), -1.0)]);
        let b = HomogenizedPoly::from_terms(1, [(m(0, 0), 1.0), (m(2, 0), 1.0)]);
        let p = a.mul(&b);
        assert_eq!(p.coeff(&m(4, 0)), -1.0);
        assert_eq!(p.coeff(&m(2, 0)), 0.0);
        assert!(a.mul_truncated(&b, Some(2)).coeff(&m(4, 0)) == 0.0);
    }
}
