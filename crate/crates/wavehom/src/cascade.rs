//! Corrector recursion `chi_k = -A_yy^{-1} (I - pi) [A_xy chi_{k-1} + (A_xx - rho d_t^2) chi_{k-2}]`.
//!
//! Each `chi_k` is stored as `sum_{|beta| = k} c_{beta,k}(y) d^beta` with
//! `beta` a space-time multi-index. Entries whose right-hand side vanishes
//! identically are omitted.

use crate::error::{Error, Result};
use crate::torus::{CellCoefficients, CellOperator, MultiIndex, PeriodicField, SolverOptions};
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Coefficient fields of one operator `sum c_beta(y) d^beta`.
pub type CorrectorLevel = BTreeMap<MultiIndex, PeriodicField>;

/// Highest order accepted by the word-sum oracle (its cost grows like Fibonacci numbers).
pub const WORD_SUM_MAX_ORDER: usize = 6;

#[derive(Clone, Debug)]
pub struct CorrectorTable {
    dim: usize,
    n: usize,
    levels: Vec<CorrectorLevel>,
}

/// Tolerance used for cell solves inside the cascade.
pub fn cascade_solver_options() -> SolverOptions {
    SolverOptions {
        tol: 1e-13,
        max_iter: 4000,
    }
}

impl CorrectorTable {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Highest corrector order stored.
    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, k: usize) -> &CorrectorLevel {
        &self.levels[k]
    }

    pub fn levels(&self) -> &[CorrectorLevel] {
        &self.levels
    }

    pub fn require_depth(&self, k: usize) -> Result<()> {
        if k > self.depth() {
            return Err(Error::TableTooShallow {
                required: k,
                depth: self.depth(),
            });
        }
        Ok(())
    }

    /// One record per `(k, beta)`: header line, then `re im` per Fourier slot in FFT order.
    pub fn dump(&self) -> String {
        let mut s = format!("# corrector table dim {} n {} depth {}\n", self.dim, self.n, self.depth());
        for (k, level) in self.levels.iter().enumerate().skip(1) {
            for (beta, f) in level {
                let _ = writeln!(s, "record {k} {beta} {}", f.coeffs().len());
                for c in f.coeffs() {
                    let _ = writeln!(s, "{:.17e} {:.17e}", c.re, c.im);
                }
            }
        }
        s
    }
}

/// `A_xy` applied to a level: every space direction raises the order by one.
fn apply_axy(coeffs: &CellCoefficients, level: &CorrectorLevel, out: &mut CorrectorLevel) {
    for (beta, c) in level {
        for i in 0..coeffs.dim() {
            let f = coeffs.apply(CellOperator::AxyComponent(i), c);
            accumulate(out, beta.bump_space(i), f);
        }
    }
}

/// `(A_xx - rho d_t^2)` applied to a level.
fn apply_axx_minus_rho(coeffs: &CellCoefficients, level: &CorrectorLevel, out: &mut CorrectorLevel) {
    let d = coeffs.dim();
    for (beta, c) in level {
        for i in 0..d {
            for j in i..d {
                let mult = if i == j { 1.0 } else { 2.0 };
                let f = coeffs.apply(CellOperator::AxxPair(i, j), c).scale(mult);
                accumulate(out, beta.bump_space(i).bump_space(j), f);
            }
        }
        let f = coeffs.apply(CellOperator::RhoMult, c).scale(-1.0);
        accumulate(out, beta.bump_time(2), f);
    }
}

fn accumulate(out: &mut CorrectorLevel, beta: MultiIndex, f: PeriodicField) {
    match out.get_mut(&beta) {
        Some(g) => g.axpy(1.0, &f),
        None => {
            out.insert(beta, f);
        }
    }
}

/// `-A_yy^{-1} (I - pi)` applied entrywise.
fn invert_level(coeffs: &CellCoefficients, rhs: CorrectorLevel, opts: SolverOptions) -> Result<CorrectorLevel> {
    let items: Vec<(MultiIndex, PeriodicField)> = rhs.into_iter().collect();
    let solved: Result<Vec<Option<(MultiIndex, PeriodicField)>>> = items
        .into_par_iter()
        .map(|(beta, f)| {
            let g = f.project_mean();
            if g.is_zero() {
                return Ok(None);
            }
            let u = coeffs.solve_cell(&g, opts)?;
            Ok(Some((beta, u.scale(-1.0))))
        })
        .collect();
    Ok(solved?.into_iter().flatten().collect())
}

fn identity_level(coeffs: &CellCoefficients) -> CorrectorLevel {
    let mut l = CorrectorLevel::new();
    l.insert(MultiIndex::ZERO, PeriodicField::constant(coeffs.dim(), coeffs.n(), 1.0));
    l
}

/// Correctors `chi_0 .. chi_k`.
pub fn compute_correctors(coeffs: &CellCoefficients, k: usize) -> Result<CorrectorTable> {
    compute_correctors_with(coeffs, k, cascade_solver_options())
}

pub fn compute_correctors_with(coeffs: &CellCoefficients, k: usize, opts: SolverOptions) -> Result<CorrectorTable> {
    let mut levels = vec![identity_level(coeffs)];
    for order in 1..=k {
        let mut rhs = CorrectorLevel::new();
        apply_axy(coeffs, &levels[order - 1], &mut rhs);
        if order >= 2 {
            apply_axx_minus_rho(coeffs, &levels[order - 2], &mut rhs);
        }
        levels.push(invert_level(coeffs, rhs, opts)?);
    }
    Ok(CorrectorTable {
        dim: coeffs.dim(),
        n: coeffs.n(),
        levels,
    })
}

/// Independent evaluation of `chi_k` as the sum over all words in
/// `C1 = -A_yy^{-1}(I-pi)A_xy` and `C2 = -A_yy^{-1}(I-pi)(A_xx - rho d_t^2)`
/// with `#C1 + 2 #C2 = k`, applied to `chi_0`.
pub fn word_sum_oracle(coeffs: &CellCoefficients, k: usize, opts: SolverOptions) -> Result<CorrectorLevel> {
    if k > WORD_SUM_MAX_ORDER {
        return Err(Error::OrderTooLarge {
            requested: k,
            max: WORD_SUM_MAX_ORDER,
        });
    }
    let mut words: Vec<Vec<u8>> = Vec::new();
    fn build(rest: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if rest == 0 {
            out.push(cur.clone());
            return;
        }
        cur.push(1);
        build(rest - 1, cur, out);
        cur.pop();
        if rest >= 2 {
            cur.push(2);
            build(rest - 2, cur, out);
            cur.pop();
        }
    }
    build(k, &mut Vec::new(), &mut words);
    let mut total = CorrectorLevel::new();
    for word in words {
        let mut cur = identity_level(coeffs);
        // The rightmost letter acts first.
        for letter in word.iter().rev() {
            let mut rhs = CorrectorLevel::new();
            if *letter == 1 {
                apply_axy(coeffs, &cur, &mut rhs);
            } else {
                apply_axx_minus_rho(coeffs, &cur, &mut rhs);
            }
            cur = invert_level(coeffs, rhs, opts)?;
        }
        for (beta, f) in cur {
            accumulate(&mut total, beta, f);
        }
    }
    Ok(total)
}

/// Largest relative difference between two levels over the union of their entries.
pub fn level_difference(a: &CorrectorLevel, b: &CorrectorLevel) -> f64 {
    let scale = a.values().chain(b.values()).map(|f| f.norm()).fold(0.0, f64::max).max(1e-300);
    let mut worst: f64 = 0.0;
    for beta in a.keys().chain(b.keys()) {
        let d = match (a.get(beta), b.get(beta)) {
            (Some(x), Some(y)) => x.sub(y).norm(),
            (Some(x), None) | (None, Some(x)) => x.norm(),
            (None, None) => 0.0,
        };
        worst = worst.max(d / scale);
    }
    worst
}
