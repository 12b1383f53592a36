//! Deterministic seeded sampling.
//!
//! Reports embed their seed, so every run must reproduce bit-identically
//! across platforms. A small splitmix64 generator keeps that guarantee
//! independent of external crate versions.

use crate::rat::{rat, Rat};

#[derive(Clone, Debug)]
pub struct Sampler {
    state: u64,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            state: seed.wrapping_add(0x9e37_79b9_7f4a_7c15),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in `0..n` (n > 0).
    pub fn below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        // Modulo bias is irrelevant for test sampling purposes.
        self.next_u64() % n
    }

    pub fn int_in(&mut self, lo: i64, hi: i64) -> i64 {
        debug_assert!(lo <= hi);
        lo + self.below((hi - lo + 1) as u64) as i64
    }

    pub fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.below(items.len() as u64) as usize]
    }

    pub fn bool(&mut self) -> bool {
        self.next_u64() & 1 == 1
    }

    /// Small rational with numerator in `[-num_abs, num_abs]` and
    /// denominator in `[1, den_max]`.
    pub fn rat_in(&mut self, num_abs: i64, den_max: i64) -> Rat {
        let n = self.int_in(-num_abs, num_abs);
        let d = self.int_in(1, den_max);
        rat(n, d)
    }

    /// Nonzero rational of the shape `u * p^k` with `u` a p-unit, so that
    /// the sampled valuations cover `[-k_abs, k_abs]`.
    pub fn padic_scalar(&mut self, p: u64, k_abs: i64) -> Rat {
        let units: [i64; 6] = [1, -1, 3, -3, 5, 7];
        let mut u = *self.pick(&units);
        if u.unsigned_abs() % p == 0 {
            u = 1;
        }
        let k = self.int_in(-k_abs, k_abs);
        let pk = rat(p as i64, 1);
        let mut x = rat(u, 1);
        if k >= 0 {
            for _ in 0..k {
                x *= pk.clone();
            }
        } else {
            for _ in 0..(-k) {
                x /= pk.clone();
            }
        }
        x
    }

    pub fn point(&mut self, dim: usize, num_abs: i64, den_max: i64) -> Vec<Rat> {
        (0..dim).map(|_| self.rat_in(num_abs, den_max)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::padic_val;

    #[test]
    fn deterministic() {
        let mut a = Sampler::new(0);
        let mut b = Sampler::new(0);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn padic_scalars_have_spread_valuations() {
        let mut s = Sampler::new(0);
        let mut seen = std::collections::BTreeSet::new();
        for _ in 0..200 {
            let x = s.padic_scalar(2, 3);
            seen.insert(padic_val(&x, 2));
        }
        assert!(seen.len() >= 5);
    }
}
