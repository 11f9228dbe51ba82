//! Counter-based Gaussian noise.
//!
//! A draw is a pure function of `(seed, counter)`: SplitMix64 evaluated at
//! stream positions `2c + 1` and `2c + 2`, turned into a standard normal by
//! Box–Muller. Any worker can produce any draw without sharing generator
//! state, so results do not depend on thread scheduling.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const TWO_PI: f64 = std::f64::consts::TAU;

/// SplitMix64 output function.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for sub-stream `index` of `base` (paths, tuning configs).
pub fn derive_seed(base: u64, index: u64) -> u64 {
    mix64(mix64(base ^ 0xD6E8_FEB8_6659_FD93).wrapping_add(index.wrapping_mul(GOLDEN)))
}

#[inline]
fn uniform_open(bits: u64) -> f64 {
    // (0, 1]: never zero, so ln is finite
    ((bits >> 11) + 1) as f64 * (1.0 / 9_007_199_254_740_992.0)
}

/// Standard normal draw number `counter` of stream `seed`.
#[inline]
pub fn normal_at(seed: u64, counter: u64) -> f64 {
    let pos = counter.wrapping_mul(2);
    let a = mix64(seed.wrapping_add(pos.wrapping_add(1).wrapping_mul(GOLDEN)));
    let b = mix64(seed.wrapping_add(pos.wrapping_add(2).wrapping_mul(GOLDEN)));
    let radius = (-2.0 * uniform_open(a).ln()).sqrt();
    radius * (TWO_PI * uniform_open(b)).cos()
}
