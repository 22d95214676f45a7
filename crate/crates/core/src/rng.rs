//! Deterministic random streams.
//!
//! The generator is xoshiro256** seeded through SplitMix64 (the
//! `rand_xoshiro` seeding routine). Every derived quantity is defined here
//! rather than delegated to `rand`'s distribution code so the streams are
//! reproducible from this description alone:
//!
//! * `next_f64`: `(next_u64() >> 11) * 2^-53`, uniform on `[0, 1)`.
//! * `below(n)`: Lemire's multiply-shift with rejection, uniform on `0..n`.
//! * `normal()`: Box-Muller, `sqrt(-2 ln(1 - u1)) * cos(2π u2)`, one draw
//!   consumes two `next_u64` values and the sine branch is discarded.
//! * `shuffle`: Fisher-Yates from the back, `j = below(i + 1)`.
//! * `derive(seed, path)`: folds each path element into the seed with the
//!   SplitMix64 finalizer, giving independent sub-streams.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

#[derive(Debug, Clone)]
pub struct Rng {
    inner: Xoshiro256StarStar,
}

fn splitmix_mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: Xoshiro256StarStar::seed_from_u64(seed),
        }
    }

    /// Sub-stream identified by `path` under `seed`.
    pub fn derive(seed: u64, path: &[u64]) -> Self {
        let mut s = seed;
        for &p in path {
            s = splitmix_mix(s ^ splitmix_mix(p.wrapping_add(0x9e37_79b9_7f4a_7c15)));
        }
        Self::new(s)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in `0..n`. Panics if `n == 0`.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        let threshold = n.wrapping_neg() % n;
        loop {
            let m = (self.next_u64() as u128) * (n as u128);
            if (m as u64) >= threshold {
                return (m >> 64) as u64;
            }
        }
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = self.next_f64();
        let u2 = self.next_f64();
        (-2.0 * (1.0 - u1).ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}
