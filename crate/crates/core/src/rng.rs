//! Deterministic, platform-independent random numbers.
//!
//! The generator is SplitMix64 used in counter mode: the `i`-th output of a
//! stream with key `k` is `mix(k + (i + 1) * GAMMA)`, where `mix` is the
//! SplitMix64 finalizer. Because every output is a pure function of
//! `(key, counter)`, independent child streams can be derived with
//! [`SeededRng::derive`] without sharing state, which is what lets parallel
//! workers reproduce serial results. The algorithm and all derived
//! distributions (uniform floats, bounded integers, Box-Muller normals) are
//! implemented here so that streams never change with dependency upgrades.

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeededRng {
    seed: u64,
    key: u64,
    counter: u64,
    spare_normal: Option<u64>,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            key: mix(seed ^ 0x5EED_5EED_5EED_5EED),
            counter: 0,
            spare_normal: None,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent child stream identified by `stream`. Does not advance `self`.
    pub fn derive(&self, stream: u64) -> Self {
        let key = mix(self.key ^ mix(stream.wrapping_add(GAMMA)));
        Self {
            seed: self.seed,
            key,
            counter: 0,
            spare_normal: None,
        }
    }

    /// Child stream for a two-level index such as (environment, trial).
    pub fn derive2(&self, a: u64, b: u64) -> Self {
        self.derive(a).derive(b)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix(self.key.wrapping_add(self.counter.wrapping_mul(GAMMA)))
    }

    /// Uniform in [0, 1) with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [lo, hi).
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in [0, n). Unbiased (rejection on the widening product).
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0)");
        let n = n as u64;
        let threshold = n.wrapping_neg() % n;
        loop {
            let x = self.next_u64();
            let m = (x as u128) * (n as u128);
            if (m as u64) >= threshold {
                return (m >> 64) as usize;
            }
        }
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// Standard normal via Box-Muller; the second variate of each pair is cached.
    pub fn normal(&mut self) -> f64 {
        if let Some(bits) = self.spare_normal.take() {
            return f64::from_bits(bits);
        }
        let u1 = 1.0 - self.next_f64(); // (0, 1]
        let u2 = self.next_f64();
        let r = (-2.0 * u1.ln()).sqrt();
        let t = std::f64::consts::TAU * u2;
        self.spare_normal = Some((r * t.sin()).to_bits());
        r * t.cos()
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }
}
