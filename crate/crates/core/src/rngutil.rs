//! Small seeded-RNG helpers shared by the synthetic generator and tests.

use rand::RngExt;

/// Standard normal draw via Box–Muller. Deterministic given the RNG stream.
pub(crate) fn standard_normal<R: RngExt>(rng: &mut R) -> f64 {
    // u1 in (0, 1] so the log is finite.
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}
