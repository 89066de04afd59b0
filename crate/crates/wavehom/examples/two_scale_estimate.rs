//! Constant in ||v c(./eps)||^2 <= C ||c||^2 (||v||^2 + ||eps v'||^2) over random samples.

use wavehom::reference::sample_two_scale_ratios;

fn main() -> wavehom::Result<()> {
    for eps in [0.125, 0.0625, 0.03125] {
        let r = sample_two_scale_ratios(8.0, eps, 200, 1)?;
        let max = r.iter().cloned().fold(0.0, f64::max);
        let mean = r.iter().sum::<f64>() / r.len() as f64;
        println!("eps = {eps:8}: C = {max:.4}, mean ratio {mean:.4}");
    }
    Ok(())
}
