//! Seeded Gaussian sampling shared by the Monte Carlo oracles.
//!
//! ChaCha8 is the crate-wide generator: counter-based, seedable, and with
//! independent streams per work partition so results do not depend on how
//! trials are split across threads.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// One standard-normal pair via Box-Muller.
pub(crate) fn normal_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let u1: f64 = rng.gen::<f64>().max(1e-300);
    let u2: f64 = rng.gen();
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = 2.0 * std::f64::consts::PI * u2;
    (r * theta.cos(), r * theta.sin())
}

/// Circularly symmetric complex Gaussian with total variance `var`
/// (each real component carries var/2).
pub(crate) fn complex_normal(rng: &mut ChaCha8Rng, var: f64) -> Complex64 {
    let (a, b) = normal_pair(rng);
    let s = (0.5 * var).sqrt();
    Complex64::new(s * a, s * b)
}

/// Unit-mean exponential draw, for |ξ|² with ξ ~ CN(0, 1).
pub(crate) fn unit_exponential(rng: &mut ChaCha8Rng) -> f64 {
    -rng.gen::<f64>().max(1e-300).ln()
}
