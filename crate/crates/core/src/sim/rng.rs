//! Counter-based substreams.
//!
//! Every trial draws from its own ChaCha8 stream selected by the trial index,
//! keyed by the run seed. A trial's randomness therefore depends only on
//! `(seed, index)`, never on which thread ran it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Name of the generator, recorded in reports.
pub const GENERATOR: &str = "chacha8-stream";

#[derive(Debug, Clone)]
pub struct Substreams {
    root: ChaCha8Rng,
}

impl Substreams {
    pub fn new(seed: u64) -> Self {
        Substreams {
            root: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Generator positioned at the start of stream `index`.
    pub fn stream(&self, index: u64) -> ChaCha8Rng {
        let mut rng = self.root.clone();
        rng.set_stream(index);
        rng.set_word_pos(0);
        rng
    }
}
