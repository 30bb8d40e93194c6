//! Seed derivation.
//!
//! Every random quantity in a stream is drawn from a `Xoshiro256PlusPlus`
//! generator whose seed is a hash of the stream seed, a domain tag and an
//! index. Rows are therefore a pure function of `(spec, seed, row index)`.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

pub type StreamRng = Xoshiro256PlusPlus;

/// Domain tags that keep derived seeds for unrelated purposes apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Row = 1,
    Instance = 2,
    Adversary = 3,
    Permutation = 4,
    Trial = 5,
    Arm = 6,
    Detector = 7,
    Sampler = 8,
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(parent: u64, domain: Domain, index: u64) -> u64 {
    let d = splitmix64(parent ^ splitmix64(domain as u64));
    splitmix64(d ^ splitmix64(index.wrapping_add(0xD1B5_4A32_D192_ED03)))
}

pub fn rng_from(seed: u64) -> StreamRng {
    StreamRng::seed_from_u64(seed)
}

pub fn derived_rng(parent: u64, domain: Domain, index: u64) -> StreamRng {
    rng_from(derive_seed(parent, domain, index))
}
