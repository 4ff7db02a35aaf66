use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator for replica `index` of a run seeded with `seed`. Each
/// replica gets its own ChaCha stream, so results do not depend on how
/// replicas are spread over threads.
pub fn replica_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Splits `0..n` into fixed chunks so aggregation order never depends on
/// the thread pool.
pub(crate) fn chunks(n: u64, size: u64) -> Vec<std::ops::Range<u64>> {
    (0..n.div_ceil(size)).map(|c| c * size..((c + 1) * size).min(n)).collect()
}
