use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seeded random stream.
///
/// Substreams are derived from the stream's *seed*, never from its current
/// position, so `derive` gives the same child regardless of how much of the
/// parent has been consumed. That is what keeps parallel runs reproducible.
#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    rng: ChaCha8Rng,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn fnv1a(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3))
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        RandomStream { seed, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Child stream keyed by an integer tag.
    pub fn derive(&self, tag: u64) -> RandomStream {
        RandomStream::new(splitmix64(self.seed ^ splitmix64(tag.wrapping_add(0x5851_F42D))))
    }

    /// Child stream keyed by a string label.
    pub fn derive_named(&self, label: &str) -> RandomStream {
        self.derive(fnv1a(label))
    }

    /// Child stream keyed by a path of integer tags.
    pub fn derive_path(&self, path: &[u64]) -> RandomStream {
        path.iter().fold(self.clone(), |s, &t| s.derive(t))
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    /// Uniform integer in `[0, bound)`.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "bound must be positive");
        self.rng.gen_range(0..bound)
    }

    /// Uniform index in `[0, len)`.
    pub fn index(&mut self, len: usize) -> usize {
        self.below(len as u64) as usize
    }

    pub fn coin(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        items.shuffle(&mut self.rng);
    }
}
