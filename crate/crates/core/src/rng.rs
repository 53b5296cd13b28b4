//! Counter-based random streams.
//!
//! Every random object in the crate is addressed by a `(seed, index)` pair.
//! The seed keys a ChaCha8 generator and the index selects one of its 2^64
//! independent streams, so the draws for slice `l` never depend on how many
//! other slices were generated before it or on which thread generated them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent generator for stream `index` of `seed`.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Derives a child seed from a parent seed and a tag (SplitMix64 finalizer).
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed
        .wrapping_add(tag.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Tags used with [`derive_seed`] so that unrelated consumers of one user seed
/// never share streams.
pub(crate) mod tag {
    pub const PROBE: u64 = 0x5052_4f42;
    pub const RESTART: u64 = 0x5253_5452;
    pub const AMBIENT_SLICES: u64 = 0x414d_4231;
    pub const REDUCED_SLICES: u64 = 0x5245_4431;
    pub const SUBSPACE: u64 = 0x5355_4253;
    pub const CLOUD_A: u64 = 0x434c_4f41;
    pub const CLOUD_B: u64 = 0x434c_4f42;
    pub const SUBSAMPLE: u64 = 0x5355_4253_4d50;
    pub const PALETTE: u64 = 0x5041_4c54;
}
