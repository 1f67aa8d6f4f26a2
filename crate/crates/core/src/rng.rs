//! Counter-based randomness: every random decision is a pure function of
//! `(seed, node, round, purpose)`, so outcomes do not depend on placement,
//! machine count or thread scheduling.

#[inline]
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Combines two words into a well-mixed 64-bit value.
#[inline]
pub fn mix(a: u64, b: u64) -> u64 {
    splitmix(splitmix(a) ^ b.rotate_left(17))
}

/// Purpose tags keep the streams of different decisions independent.
#[derive(Debug, Clone, Copy)]
#[repr(u64)]
pub enum Stream {
    Subsample = 1,
    Coin = 2,
    Mark = 3,
    Retry = 4,
}

#[inline]
pub fn draw(seed: u64, stream: Stream, node: u64, round: u64) -> u64 {
    mix(mix(mix(seed, stream as u64), node), round)
}

/// Uniform in `[0, 1)` with 53 bits of precision.
#[inline]
pub fn unit(seed: u64, stream: Stream, node: u64, round: u64) -> f64 {
    (draw(seed, stream, node, round) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// True with probability exactly `2^-k` (for `k <= 63`).
#[inline]
pub fn dyadic(seed: u64, stream: Stream, node: u64, round: u64, k: u32) -> bool {
    debug_assert!(k <= 63);
    k == 0 || draw(seed, stream, node, round) >> (64 - k) == 0
}

/// Seed for retry `attempt` of a guarded step.
pub fn reseed(seed: u64, attempt: u64) -> u64 {
    if attempt == 0 {
        seed
    } else {
        draw(seed, Stream::Retry, attempt, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_is_roughly_uniform() {
        let n = 100_000;
        let mean = (0..n).map(|i| unit(7, Stream::Mark, i, 3)).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.01, "{mean}");
    }

    #[test]
    fn dyadic_frequency() {
        let n = 200_000u64;
        let hits = (0..n).filter(|&i| dyadic(1, Stream::Mark, i, 0, 3)).count() as f64;
        let expect = n as f64 / 8.0;
        let sigma = (n as f64 * 0.125 * 0.875).sqrt();
        assert!((hits - expect).abs() < 4.0 * sigma);
        assert!((0..1000).all(|i| dyadic(1, Stream::Mark, i, 0, 0)));
    }

    #[test]
    fn streams_differ() {
        assert_ne!(draw(1, Stream::Mark, 5, 5), draw(1, Stream::Coin, 5, 5));
        assert_eq!(reseed(9, 0), 9);
        assert_ne!(reseed(9, 1), reseed(9, 2));
    }
}
