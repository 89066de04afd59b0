//! Homogenized operators `a*_n = pi((rho d_t^2 - A_xx) chi_{n-2} - A_xy chi_{n-1})`.

use crate::cascade::CorrectorTable;
use crate::error::{Error, Result};
use crate::poly::{CompensatedSum, HomogenizedPoly};
use crate::torus::{CellCoefficients, CellOperator, MultiIndex};
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// `a*_n` from a table of depth at least `n - 1`.
pub fn compute_a_star(coeffs: &CellCoefficients, table: &CorrectorTable, n: usize) -> Result<HomogenizedPoly> {
    if n < 2 {
        return Err(Error::invalid("homogenized operators start at n = 2"));
    }
    table.require_depth(n - 1)?;
    let d = coeffs.dim();
    let mut acc: BTreeMap<MultiIndex, CompensatedSum> = BTreeMap::new();
    let mut push = |beta: MultiIndex, v: f64| acc.entry(beta).or_default().add(v);
    for (beta, c) in table.level(n - 2) {
        for i in 0..d {
            for j in i..d {
                let mult = if i == j { 1.0 } else { 2.0 };
                let m = coeffs.apply(CellOperator::AxxPair(i, j), c).mean();
                push(beta.bump_space(i).bump_space(j), -mult * m);
            }
        }
        push(beta.bump_time(2), coeffs.apply(CellOperator::RhoMult, c).mean());
    }
    for (beta, c) in table.level(n - 1) {
        for i in 0..d {
            let m = coeffs.apply(CellOperator::AxyComponent(i), c).mean();
            push(beta.bump_space(i), -m);
        }
    }
    Ok(HomogenizedPoly::from_terms(d, acc.into_iter().map(|(b, s)| (b, s.value()))))
}

/// `[a*_2, a*_3, .., a*_{n_max}]`.
pub fn a_star_series(coeffs: &CellCoefficients, table: &CorrectorTable, n_max: usize) -> Result<Vec<HomogenizedPoly>> {
    (2..=n_max).map(|n| compute_a_star(coeffs, table, n)).collect()
}

/// Natural size of a degree-`n` operator: `|a*_2| (2 pi)^{-(n-2)}`, since every
/// extra derivative order costs one inverse cell wavenumber.
pub fn matched_scale(a2: &HomogenizedPoly, n: usize) -> f64 {
    a2.norm() * (2.0 * PI).powi(-(n as i32 - 2))
}

/// Largest `|a*_n| / matched_scale(n)` over odd `n` in a series starting at `a*_2`.
pub fn odd_operator_ratio(series: &[HomogenizedPoly]) -> f64 {
    let a2 = &series[0];
    series
        .iter()
        .enumerate()
        .map(|(idx, p)| (idx + 2, p))
        .filter(|(n, _)| n % 2 == 1)
        .map(|(n, p)| p.norm() / matched_scale(a2, n))
        .fold(0.0, f64::max)
}

/// `rho_bar`, the coefficient of `d_t^2` in `a*_2`.
pub fn rho_bar(a2: &HomogenizedPoly) -> f64 {
    a2.coeff(&MultiIndex::new(2, &[0, 0]))
}

/// Effective tensor `abar` with `a*_2 = rho_bar d_t^2 - sum abar_ij d_i d_j`.
pub fn effective_tensor(a2: &HomogenizedPoly) -> [[f64; 2]; 2] {
    let d = a2.dim();
    let mut t = [[0.0; 2]; 2];
    for i in 0..d {
        for j in 0..d {
            let beta = MultiIndex::ZERO.bump_space(i).bump_space(j);
            let c = a2.coeff(&beta);
            t[i][j] = if i == j { -c } else { -0.5 * c };
        }
    }
    t
}

/// Smallest eigenvalue of the effective tensor.
pub fn effective_floor(a2: &HomogenizedPoly) -> f64 {
    let t = effective_tensor(a2);
    if a2.dim() == 1 {
        t[0][0]
    } else {
        0.5 * (t[0][0] + t[1][1]) - (0.25 * (t[0][0] - t[1][1]).powi(2) + t[0][1] * t[0][1]).sqrt()
    }
}

/// Records `n beta coeff` for a whole series, canonical order within each degree.
pub fn dump_series(series: &[HomogenizedPoly], first_degree: usize) -> String {
    let mut s = String::from("# n beta(time:space..) coeff\n");
    for (idx, p) in series.iter().enumerate() {
        s.push_str(&p.dump(&(first_degree + idx).to_string()));
    }
    s
}
