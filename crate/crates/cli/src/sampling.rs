//! Seeded sample generation for the assumption validators.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::ValidationConfig;

pub struct ValidatorSamples {
    pub s: Vec<f64>,
    pub xi: Vec<[f64; 2]>,
    pub x: Vec<[f64; 2]>,
}

/// Draws the sample sets: scalars uniform on `[-s_range, s_range]`, gradient
/// arguments in the ball of radius `xi_radius` (half uniform in radius, half
/// log-uniform towards small magnitudes so near-zero behaviour is probed),
/// and spatial points uniform in the unit domain.
pub fn draw(cfg: &ValidationConfig, dim: usize, seed: u64) -> ValidatorSamples {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = (0..cfg.s_samples.max(2))
        .map(|_| rng.random_range(-cfg.s_range..cfg.s_range))
        .collect();
    let xi = (0..cfg.xi_samples.max(2))
        .map(|k| {
            let r: f64 = if k % 2 == 0 {
                rng.random_range(0.0..cfg.xi_radius)
            } else {
                cfg.xi_radius * 10.0f64.powf(rng.random_range(-8.0..0.0))
            };
            if dim == 1 {
                let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                [sign * r, 0.0]
            } else {
                let angle: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                [r * angle.cos(), r * angle.sin()]
            }
        })
        .collect();
    let x = (0..cfg.x_samples.max(1))
        .map(|_| {
            [
                rng.random_range(0.0..1.0),
                if dim == 2 {
                    rng.random_range(0.0..1.0)
                } else {
                    0.0
                },
            ]
        })
        .collect();
    ValidatorSamples { s, xi, x }
}
