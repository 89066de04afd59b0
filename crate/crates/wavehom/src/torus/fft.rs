//! Cached FFT plans and small helpers for d = 1, 2 transforms.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

type Plan = Arc<dyn Fft<f64>>;

fn planner() -> &'static Mutex<(FftPlanner<f64>, HashMap<(usize, bool), Plan>)> {
    static CELL: OnceLock<Mutex<(FftPlanner<f64>, HashMap<(usize, bool), Plan>)>> =
        OnceLock::new();
    CELL.get_or_init(|| Mutex::new((FftPlanner::new(), HashMap::new())))
}

pub fn plan(n: usize, inverse: bool) -> Plan {
    let mut guard = planner().lock().expect("fft planner poisoned");
    let (p, cache) = &mut *guard;
    cache
        .entry((n, inverse))
        .or_insert_with(|| {
            if inverse {
                p.plan_fft_inverse(n)
            } else {
                p.plan_fft_forward(n)
            }
        })
        .clone()
}

/// Unnormalized transform of an `n^dim` row-major array.
/// Forward uses `exp(-2 pi i ..)`, inverse `exp(+2 pi i ..)`.
pub fn transform(data: &mut [Complex64], n: usize, dim: usize, inverse: bool) {
    let fft = plan(n, inverse);
    match dim {
        1 => fft.process(data),
        2 => {
            debug_assert_eq!(data.len(), n * n);
            for row in data.chunks_exact_mut(n) {
                fft.process(row);
            }
            let mut col = vec![Complex64::new(0.0, 0.0); n];
            for j in 0..n {
                for i in 0..n {
                    col[i] = data[i * n + j];
                }
                fft.process(&mut col);
                for i in 0..n {
                    data[i * n + j] = col[i];
                }
            }
        }
        _ => panic!("dimension {dim} is not supported"),
    }
}

/// Signed frequency of FFT slot `i` on a grid of size `n`.
#[inline]
pub fn freq(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// FFT slot of signed frequency `m` on a grid of size `n`.
#[inline]
pub fn slot(m: i64, n: usize) -> usize {
    m.rem_euclid(n as i64) as usize
}
