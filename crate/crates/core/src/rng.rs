//! Seeded random streams. Every randomized operation takes an explicit seed
//! and owns its generator.

use crate::linalg::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub type SimRng = ChaCha8Rng;

/// Generator for `seed`, restricted to the independent substream `stream`.
pub fn substream(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Circularly-symmetric complex Gaussian sample with variance `var`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> C64 {
    let s = libm::sqrt(var / 2.0);
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(s * re, s * im)
}

pub fn uniform_phase<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random::<f64>() * 2.0 * core::f64::consts::PI - core::f64::consts::PI
}

/// Zero-mean Laplacian sample with standard deviation `std`.
pub fn laplacian<R: Rng + ?Sized>(rng: &mut R, std: f64) -> f64 {
    let b = std / core::f64::consts::SQRT_2;
    let u: f64 = rng.random::<f64>() - 0.5;
    let sign = if u < 0.0 { -1.0 } else { 1.0 };
    -b * sign * libm::log((1.0 - 2.0 * u.abs()).max(f64::MIN_POSITIVE))
}
