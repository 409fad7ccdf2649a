//! Counter-based keyed randomness.
//!
//! Every random decision in the engine is a pure function of a small integer
//! key such as `(seed, iteration, edge ordinal, direction)`. There is no
//! generator state to advance, so draws can be evaluated in any order, skipped
//! entirely when a probability clamps to 1, and reproduced exactly by any
//! consumer holding the same key. The peeling variants rely on this: a run
//! that samples several digraphs in one pass sees draw-for-draw the same
//! variates as a run that samples one digraph per pass.

/// SplitMix64 finalizer. Full avalanche on 64-bit inputs.
#[inline]
fn fmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes four key words into a uniform 64-bit value.
#[inline]
pub fn mix4(a: u64, b: u64, c: u64, d: u64) -> u64 {
    const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
    let mut h = fmix64(a.wrapping_add(GOLDEN));
    h = fmix64(h ^ b.wrapping_add(GOLDEN.wrapping_mul(2)));
    h = fmix64(h ^ c.wrapping_add(GOLDEN.wrapping_mul(3)));
    h = fmix64(h ^ d.wrapping_add(GOLDEN.wrapping_mul(5)));
    h
}

/// Uniform double in [0, 1) from the top 53 bits of a mixed key.
#[inline]
pub fn unit_f64(a: u64, b: u64, c: u64, d: u64) -> f64 {
    (mix4(a, b, c, d) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Bernoulli trial with probability `p`, keyed by `(a, b, c, d)`.
///
/// `p <= 0` never fires and `p >= 1` always fires without touching the mixer.
#[inline]
pub fn bernoulli(a: u64, b: u64, c: u64, d: u64, p: f64) -> bool {
    if p >= 1.0 {
        return true;
    }
    if p <= 0.0 {
        return false;
    }
    let threshold = (p * (1u128 << 64) as f64) as u128;
    (mix4(a, b, c, d) as u128) < threshold
}

/// True with probability ~1/count (exact to within 2^-64 per draw).
///
/// This is the single-item reservoir decision for the `count`-th candidate.
#[inline]
pub fn one_in(a: u64, b: u64, c: u64, count: u64) -> bool {
    debug_assert!(count >= 1);
    let u = mix4(a, b, c, count);
    (u as u128).wrapping_mul(count as u128) >> 64 == 0
}
