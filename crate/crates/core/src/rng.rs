//! Seeded pseudorandom generation pinned to a fixed, portable algorithm.
//!
//! Instances must be bit-reproducible from their seed alone, on any platform
//! and in any future port, so the generator is specified here by algorithm
//! rather than delegated to a library: a [`splitmix64`] stage expands the
//! 64-bit seed into the state of a xoshiro256** stream, uniform doubles take
//! the top 53 bits, and normal deviates use the Box-Muller transform on two
//! consecutive uniforms. None of these choices may change without breaking
//! every stored instance file.

/// xoshiro256** generator with splitmix64 seeding.
#[derive(Debug, Clone)]
pub struct Rng {
    state: [u64; 4],
}

fn splitmix64(x: &mut u64) -> u64 {
    *x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl Rng {
    pub fn seed_from_u64(seed: u64) -> Self {
        let mut x = seed;
        let state = [
            splitmix64(&mut x),
            splitmix64(&mut x),
            splitmix64(&mut x),
            splitmix64(&mut x),
        ];
        Rng { state }
    }

    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.state;
        let result = s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform double in `[0, 1)` from the top 53 bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal deviate via Box-Muller (cosine branch).
    ///
    /// Consumes exactly two words of the stream. The first uniform is shifted
    /// into `(0, 1]` so the logarithm is always finite.
    pub fn standard_normal(&mut self) -> f64 {
        let u1 = ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    /// Random coupling from {-1, +1}, one word per draw.
    pub fn pm1(&mut self) -> f64 {
        if self.next_u64() >> 63 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Uniform integer in `[0, bound)` by masked rejection (no modulo bias).
    pub fn below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        if bound == 1 {
            return 0;
        }
        let mask = bound.next_power_of_two().wrapping_sub(1);
        loop {
            let x = self.next_u64() & mask;
            if x < bound {
                return x;
            }
        }
    }

    /// Fisher-Yates shuffle, swapping from the top index down.
    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            xs.swap(i, j);
        }
    }
}
