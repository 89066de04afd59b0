//! Periodic coefficients, the cell operators and the cell-problem solver.
//!
//! Products with `a` and `rho` are Galerkin-exact: both factors are lifted to a
//! grid with 3/2 padding, multiplied pointwise and truncated back.

use super::field::PeriodicField;
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Which cell operator to apply to a scalar coefficient field.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellOperator {
    /// `div_y a grad_y`.
    Ayy,
    /// Coefficient of `d/dx_i` in `A_xy`: `sum_j a_ij d_j c + d_j (a_ij c)`.
    AxyComponent(usize),
    /// Coefficient of `d/dx_i d/dx_j` in `A_xx`: `a_ij c`.
    AxxPair(usize, usize),
    /// Multiplication by `rho`.
    RhoMult,
}

#[derive(Clone, Copy, Debug)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-10,
            max_iter: 2000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CellCoefficients {
    dim: usize,
    n: usize,
    rho: PeriodicField,
    /// Upper triangle of `a`: (0,0) | (0,0),(0,1),(1,1).
    a: Vec<PeriodicField>,
    pad: usize,
    rho_pad: Vec<f64>,
    a_pad: Vec<Vec<f64>>,
    a_mean: [[f64; 2]; 2],
    pub name: String,
}

fn pair_index(dim: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    match dim {
        1 => 0,
        _ => match (i, j) {
            (0, 0) => 0,
            (0, 1) => 1,
            _ => 2,
        },
    }
}

impl CellCoefficients {
    /// `a` holds the upper triangle: `[a11]` for d = 1, `[a11, a12, a22]` for d = 2.
    pub fn new(rho: PeriodicField, a: Vec<PeriodicField>) -> Result<Self> {
        let dim = rho.dim();
        let n = rho.n();
        let expect = if dim == 1 { 1 } else { 3 };
        if a.len() != expect {
            return Err(Error::invalid(format!(
                "expected {expect} coefficient fields for d = {dim}, got {}",
                a.len()
            )));
        }
        if a.iter().any(|f| f.dim() != dim || f.n() != n) {
            return Err(Error::invalid("coefficient fields have mismatched shapes"));
        }
        let samples: Vec<Vec<f64>> = a.iter().map(|f| f.samples()).collect();
        let rs = rho.samples();
        for (k, r) in rs.iter().enumerate() {
            if !(*r > 0.0) {
                return Err(Error::invalid(format!("rho is not positive at grid point {k}: {r}")));
            }
            let lam = if dim == 1 {
                samples[0][k]
            } else {
                let (p, q, s) = (samples[0][k], samples[1][k], samples[2][k]);
                0.5 * (p + s) - (0.25 * (p - s).powi(2) + q * q).sqrt()
            };
            if !(lam > 0.0) {
                return Err(Error::invalid(format!(
                    "a is not uniformly elliptic at grid point {k}: smallest eigenvalue {lam}"
                )));
            }
        }
        let pad = 3 * n / 2;
        let rho_pad = rho.samples_on(pad);
        let a_pad = a.iter().map(|f| f.samples_on(pad)).collect();
        let mut a_mean = [[0.0; 2]; 2];
        for i in 0..dim {
            for j in 0..dim {
                a_mean[i][j] = a[pair_index(dim, i, j)].mean();
            }
        }
        Ok(CellCoefficients {
            dim,
            n,
            rho,
            a,
            pad,
            rho_pad,
            a_pad,
            a_mean,
            name: String::from("custom"),
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rho(&self) -> &PeriodicField {
        &self.rho
    }

    pub fn a(&self, i: usize, j: usize) -> &PeriodicField {
        &self.a[pair_index(self.dim, i, j)]
    }

    pub fn a_fields(&self) -> &[PeriodicField] {
        &self.a
    }

    pub fn rho_mean(&self) -> f64 {
        self.rho.mean()
    }

    pub fn a_mean(&self) -> [[f64; 2]; 2] {
        self.a_mean
    }

    /// True when `rho` has no oscillating part.
    pub fn rho_is_constant(&self) -> bool {
        self.rho.project_mean().max_abs_coeff() == 0.0
    }

    pub fn a_is_constant(&self) -> bool {
        self.a.iter().all(|f| f.project_mean().max_abs_coeff() == 0.0)
    }

    pub fn zero_field(&self) -> PeriodicField {
        PeriodicField::zeros(self.dim, self.n)
    }

    /// Galerkin product `P_N(w f)` with `w` given on the padded grid.
    fn product(&self, weight: &[f64], f: &PeriodicField) -> PeriodicField {
        let mut buf = f.padded(self.pad);
        for (v, w) in buf.iter_mut().zip(weight) {
            *v *= *w;
        }
        PeriodicField::truncate_from(self.dim, self.n, self.pad, buf)
    }

    fn a_pad_of(&self, i: usize, j: usize) -> &[f64] {
        &self.a_pad[pair_index(self.dim, i, j)]
    }

    pub fn apply(&self, op: CellOperator, f: &PeriodicField) -> PeriodicField {
        match op {
            CellOperator::Ayy => self.apply_ayy(f),
            CellOperator::AxyComponent(i) => {
                let mut out = self.zero_field();
                for j in 0..self.dim {
                    let w = self.a_pad_of(i, j);
                    out.axpy(1.0, &self.product(w, &f.derivative(j)));
                    out.axpy(1.0, &self.product(w, f).derivative(j));
                }
                out
            }
            CellOperator::AxxPair(i, j) => self.product(self.a_pad_of(i, j), f),
            CellOperator::RhoMult => self.product(&self.rho_pad, f),
        }
    }

    fn apply_ayy(&self, f: &PeriodicField) -> PeriodicField {
        let grads: Vec<PeriodicField> = (0..self.dim).map(|j| f.derivative(j)).collect();
        let mut out = self.zero_field();
        for i in 0..self.dim {
            // Pointwise flux component sum_j a_ij d_j f on the padded grid.
            let mut flux = vec![Complex64::new(0.0, 0.0); self.pad.pow(self.dim as u32)];
            for (j, g) in grads.iter().enumerate() {
                let gp = g.padded(self.pad);
                let w = self.a_pad_of(i, j);
                for ((acc, v), wv) in flux.iter_mut().zip(gp).zip(w) {
                    *acc += v * *wv;
                }
            }
            let q = PeriodicField::truncate_from(self.dim, self.n, self.pad, flux);
            out.axpy(1.0, &q.derivative(i));
        }
        out
    }

    /// Symbol of the mean-coefficient Laplacian `(2 pi)^2 m . abar m`.
    fn mean_symbol(&self, m: [i64; 2]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                s += self.a_mean[i][j] * m[i] as f64 * m[j] as f64;
            }
        }
        4.0 * PI * PI * s
    }

    /// Solves `A_yy u = rhs` for mean-zero `u`; `rhs` must be mean-zero.
    pub fn solve_cell(&self, rhs: &PeriodicField, opts: SolverOptions) -> Result<PeriodicField> {
        let scale = rhs.norm();
        if rhs.mean().abs() > 1e-12 * scale.max(1e-300) && rhs.mean().abs() > 1e-14 {
            return Err(Error::NonZeroMeanRhs { mean: rhs.mean() });
        }
        let mut u = self.zero_field();
        if scale == 0.0 {
            return Ok(u);
        }
        // Conjugate gradients on the SPD operator -A_yy restricted to mean-zero fields.
        let b = rhs.project_mean().scale(-1.0);
        let precond = |r: &PeriodicField| -> PeriodicField {
            let mut z = r.clone();
            for idx in 0..z.coeffs().len() {
                let m = z.freqs_of(idx);
                let s = self.mean_symbol(m);
                z.coeffs_mut()[idx] = if s > 0.0 {
                    z.coeffs()[idx] / s
                } else {
                    Complex64::new(0.0, 0.0)
                };
            }
            z
        };
        let mut r = b.clone();
        let mut z = precond(&r);
        let mut p = z.clone();
        let mut rz = r.inner(&z);
        let bnorm = b.norm();
        for it in 0..opts.max_iter {
            let ap = self.apply_ayy(&p).scale(-1.0);
            let pap = p.inner(&ap);
            if pap <= 0.0 {
                return Err(Error::NoConvergence {
                    solver: "cell PCG",
                    residual: r.norm() / bnorm,
                    iterations: it,
                });
            }
            let alpha = rz / pap;
            u.axpy(alpha, &p);
            r.axpy(-alpha, &ap);
            let res = r.norm() / bnorm;
            if res <= opts.tol {
                return Ok(u);
            }
            z = precond(&r);
            let rz_new = r.inner(&z);
            let beta = rz_new / rz;
            rz = rz_new;
            let mut pn = z.clone();
            pn.axpy(beta, &p);
            p = pn;
        }
        Err(Error::NoConvergence {
            solver: "cell PCG",
            residual: r.norm() / bnorm,
            iterations: opts.max_iter,
        })
    }
}
