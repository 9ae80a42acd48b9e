//! Minimal normal sampling on top of `rand`, kept local so every module
//! draws from the same deterministic stream discipline.

use rand::Rng;

/// Standard normal via Box–Muller.
pub fn normal_f64<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}
