//! Denoising decoder under bounded measurement noise: reconstruction error
//! relative to the noise radius as the noise level grows.
//!
//!     cargo run --release --example noisy_recovery

use csnet::cs_core::{
    bounded_noise, generate_sparse_signal, measure, MeasurementMatrix, SupportLaw, ValueLaw,
};
use csnet::rng::derive_seed;
use csnet::solver::{basis_pursuit_denoise, DenoiseConfig};

fn main() -> csnet::Result<()> {
    let (n, k, m, trials) = (128, 4, 48, 40);
    println!("{:>8} {:>12} {:>12}", "eps/|y|", "median", "worst");
    for ratio in [0.001, 0.01, 0.05, 0.1] {
        let mut ratios = Vec::with_capacity(trials);
        for t in 0..trials as u64 {
            let phi = MeasurementMatrix::bernoulli(m, n, derive_seed(2, "phi", t))?;
            let x = generate_sparse_signal(
                n,
                SupportLaw::FixedK(k),
                ValueLaw::UniformInteger { levels: 16 },
                derive_seed(2, "x", t),
            )?;
            let y0 = measure(&phi, &x)?;
            let eps = ratio * y0.iter().map(|v| v * v).sum::<f64>().sqrt();
            let noise = bounded_noise(m, eps, derive_seed(2, "noise", t));
            let y: Vec<f64> = y0.iter().zip(&noise).map(|(a, b)| a + b).collect();
            let r = basis_pursuit_denoise(&phi, &y, &DenoiseConfig::new(eps))?;
            let err = r
                .solution
                .values()
                .iter()
                .zip(x.values())
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
            ratios.push(err / eps);
        }
        ratios.sort_by(f64::total_cmp);
        println!(
            "{ratio:>8} {:>12.4} {:>12.4}",
            ratios[trials / 2],
            ratios[trials - 1]
        );
    }
    Ok(())
}
