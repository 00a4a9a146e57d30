//! Deterministic random-number substreams.
//!
//! Every randomized quantity in the toolkit is drawn from a ChaCha8 stream
//! derived from `(seed, domain, point, item)`. Trials, bound realizations and
//! capacity realizations each get their own independent stream, so results
//! are byte-identical regardless of how work is scheduled across threads.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Top-level usage domains, kept disjoint so e.g. BER trials and bound
/// realizations never share a stream even at the same seed and SNR.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    BerTrial = 1,
    AberRealization = 2,
    CapacityRealization = 3,
}

/// Derives per-item [`ChaCha8Rng`] substreams for one (seed, domain, point).
///
/// `point` is typically the bit pattern of the SNR value, so a point's
/// stream does not depend on its position in a sweep grid.
#[derive(Debug, Clone)]
pub struct SubstreamFactory {
    base: ChaCha8Rng,
}

impl SubstreamFactory {
    pub fn new(seed: u64, domain: Domain, point: u64) -> Self {
        let mut x = seed;
        x = splitmix64(x ^ (domain as u64).wrapping_mul(0x9e3779b97f4a7c15));
        x = splitmix64(x ^ point);
        Self {
            base: ChaCha8Rng::seed_from_u64(x),
        }
    }

    /// Independent generator for item `item` (trial or realization index).
    pub fn substream(&self, item: u64) -> ChaCha8Rng {
        let mut rng = self.base.clone();
        rng.set_stream(item);
        rng
    }
}

/// Convenience constructor keyed by an SNR grid point.
pub fn snr_point_factory(seed: u64, domain: Domain, snr_db: f64) -> SubstreamFactory {
    SubstreamFactory::new(seed, domain, snr_db.to_bits())
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}
