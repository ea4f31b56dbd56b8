//! Counter-based splittable random streams.
//!
//! Every random draw is a pure function of `(master seed, trial index,
//! call path, counter)`, so results do not depend on scheduling, worker
//! count, or platform. The construction is fixed as part of the output
//! contract:
//!
//! * `finalize(z)` is the SplitMix64 finalizer:
//!   `z ^= z >> 30; z *= 0xBF58476D1CE4E5B9; z ^= z >> 27;
//!    z *= 0x94D049BB133111EB; z ^= z >> 31`.
//! * trial stream key: `finalize(seed ^ finalize((trial + 1) * GOLDEN))`
//! * child stream key: `finalize(key ^ (child_index + 1) * GOLDEN)`
//! * n-th draw from a stream: `finalize(key + n * GOLDEN)` with `n >= 1`
//!
//! where `GOLDEN = 0x9E3779B97F4A7C15` and all arithmetic wraps.

pub(crate) const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
pub(crate) fn finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A stream of random words tied to one node of the recursion tree.
#[derive(Debug, Clone, Copy)]
pub struct PathRng {
    key: u64,
    counter: u64,
}

impl PathRng {
    /// Root stream for trial `trial` under `seed`.
    pub fn for_trial(seed: u64, trial: u64) -> Self {
        PathRng {
            key: finalize(seed ^ finalize(trial.wrapping_add(1).wrapping_mul(GOLDEN))),
            counter: 0,
        }
    }

    /// Stream for the `index`-th child of this node.
    pub fn child(&self, index: u32) -> Self {
        PathRng {
            key: finalize(self.key ^ u64::from(index + 1).wrapping_mul(GOLDEN)),
            counter: 0,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        finalize(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN)))
    }

    /// Unbiased uniform draw from `{0, .., n-1}` by rejection sampling.
    pub fn uniform(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        if n == 1 {
            // Still consume a word so the draw sequence is size-independent.
            let _ = self.next_u64();
            return 0;
        }
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let v = self.next_u64();
            if v < zone {
                return v % n;
            }
        }
    }

    /// Uniform double in `[0, 1)` with 53 random bits.
    pub fn unit_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_deterministic_and_distinct() {
        let mut a = PathRng::for_trial(42, 0);
        let mut b = PathRng::for_trial(42, 0);
        assert_eq!(a.next_u64(), b.next_u64());
        assert_eq!(a.next_u64(), b.next_u64());

        let mut c = PathRng::for_trial(42, 1);
        let mut d = PathRng::for_trial(43, 0);
        let base = PathRng::for_trial(42, 0).next_u64();
        assert_ne!(base, c.next_u64());
        assert_ne!(base, d.next_u64());

        let parent = PathRng::for_trial(7, 3);
        let mut l = parent.child(0);
        let mut r = parent.child(1);
        assert_ne!(l.next_u64(), r.next_u64());
    }

    #[test]
    fn uniform_is_in_range_and_roughly_uniform() {
        let mut rng = PathRng::for_trial(1, 1);
        let mut counts = [0u32; 5];
        for _ in 0..50_000 {
            counts[rng.uniform(5) as usize] += 1;
        }
        for &c in &counts {
            assert!((9_000..11_000).contains(&c), "counts {counts:?}");
        }
    }

    #[test]
    fn unit_f64_in_range() {
        let mut rng = PathRng::for_trial(9, 9);
        for _ in 0..1000 {
            let v = rng.unit_f64();
            assert!((0.0..1.0).contains(&v));
        }
    }
}
