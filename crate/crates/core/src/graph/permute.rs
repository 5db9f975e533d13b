//! Keyed pseudorandom bijections on `[0, size)`.
//!
//! A balanced Feistel network on the smallest even bit width covering
//! `size`, restricted to the domain by cycle walking. The width is at most
//! one bit above ⌈log₂ size⌉ rounded to even, so a walk needs fewer than four
//! steps on average.

use serde::{Deserialize, Serialize};

const ROUNDS: usize = 6;
const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a subkey from a root seed and a path of indices.
pub fn derive_key(seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix64(seed), |acc, &p| mix64(acc ^ mix64(p.wrapping_add(1))))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyedPermutation {
    size: u64,
    half_bits: u32,
    round_keys: [u64; ROUNDS],
}

impl KeyedPermutation {
    pub fn new(size: u64, key: u64) -> Self {
        assert!(size >= 1, "empty permutation domain");
        let bits = if size <= 1 { 0 } else { 64 - (size - 1).leading_zeros() };
        let width = bits.max(2).div_ceil(2) * 2;
        assert!(width <= 64, "domain too large");
        let mut round_keys = [0u64; ROUNDS];
        for (r, rk) in round_keys.iter_mut().enumerate() {
            *rk = derive_key(key, &[r as u64]);
        }
        KeyedPermutation { size, half_bits: width / 2, round_keys }
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    fn mask(&self) -> u64 {
        if self.half_bits == 32 {
            u32::MAX as u64
        } else {
            (1u64 << self.half_bits) - 1
        }
    }

    fn round(&self, r: usize, x: u64) -> u64 {
        mix64(x ^ self.round_keys[r]) & self.mask()
    }

    fn encrypt(&self, x: u64) -> u64 {
        let mask = self.mask();
        let (mut l, mut r) = (x >> self.half_bits, x & mask);
        for k in 0..ROUNDS {
            let next = l ^ self.round(k, r);
            l = r;
            r = next;
        }
        (l << self.half_bits) | r
    }

    fn decrypt(&self, y: u64) -> u64 {
        let mask = self.mask();
        let (mut l, mut r) = (y >> self.half_bits, y & mask);
        for k in (0..ROUNDS).rev() {
            let prev = r ^ self.round(k, l);
            r = l;
            l = prev;
        }
        (l << self.half_bits) | r
    }

    pub fn apply(&self, x: u64) -> u64 {
        debug_assert!(x < self.size);
        let mut y = self.encrypt(x);
        while y >= self.size {
            y = self.encrypt(y);
        }
        y
    }

    pub fn invert(&self, y: u64) -> u64 {
        debug_assert!(y < self.size);
        let mut x = self.decrypt(y);
        while x >= self.size {
            x = self.decrypt(x);
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn bijective_on_small_domains() {
        for size in [1u64, 2, 3, 5, 16, 17, 100, 1000] {
            let p = KeyedPermutation::new(size, 42 + size);
            let mut seen = vec![false; size as usize];
            for x in 0..size {
                let y = p.apply(x);
                assert!(y < size);
                assert!(!seen[y as usize]);
                seen[y as usize] = true;
                assert_eq!(p.invert(y), x);
            }
        }
    }

    #[test]
    fn keys_give_different_permutations() {
        let a = KeyedPermutation::new(64, 1);
        let b = KeyedPermutation::new(64, 2);
        let differs = (0..64).filter(|&x| a.apply(x) != b.apply(x)).count();
        assert!(differs > 32);
    }

    proptest! {
        #[test]
        fn invert_undoes_apply(size in 1u64..(1u64 << 62), key: u64, x in any::<u64>()) {
            let p = KeyedPermutation::new(size, key);
            let x = x % size;
            let y = p.apply(x);
            prop_assert!(y < size);
            prop_assert_eq!(p.invert(y), x);
        }
    }
}
