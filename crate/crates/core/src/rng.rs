//! Seed derivation and per-position random substreams.
//!
//! Every stream is a `Pcg64Mcg` seeded from [`derive_seed`], a SplitMix64 chain
//! over `(master, tags…)`. Frequency-based optimizers give each bit position its
//! own stream per offspring slot, so relabelling positions (and their streams)
//! relabels the whole trajectory without changing it.

use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64Mcg;

pub type StreamRng = Pcg64Mcg;

/// Stream roles mixed into the seed derivation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Role {
    FirstOffspring = 1,
    SecondOffspring = 2,
    TieBreak = 3,
    Population = 4,
    Trial = 5,
}

#[inline]
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hashes a master seed and a sequence of tags into a child seed.
///
/// The chain is `h ← splitmix64(splitmix64(h) ^ tag)`; mixing only the running
/// state keeps `(master, tag)` and `(tag, master)` apart.
pub fn derive_seed(master: u64, tags: &[u64]) -> u64 {
    tags.iter()
        .fold(splitmix64(master), |h, &t| splitmix64(splitmix64(h) ^ t))
}

pub fn stream(master: u64, role: Role, index: u64) -> StreamRng {
    StreamRng::seed_from_u64(derive_seed(master, &[role as u64, index]))
}

/// Two offspring streams per position plus one tie-break stream.
#[derive(Debug, Clone)]
pub struct Substreams {
    offspring: [Vec<StreamRng>; 2],
    tie_break: StreamRng,
}

impl Substreams {
    pub fn new(master: u64, n: usize) -> Self {
        let identity: Vec<usize> = (0..n).collect();
        Self::with_position_map(master, &identity)
    }

    /// Position `j` draws from the streams that position `map[j]` would use
    /// under [`Substreams::new`].
    pub fn with_position_map(master: u64, map: &[usize]) -> Self {
        let make = |role| {
            map.iter()
                .map(|&i| stream(master, role, i as u64))
                .collect()
        };
        Self {
            offspring: [make(Role::FirstOffspring), make(Role::SecondOffspring)],
            tie_break: stream(master, Role::TieBreak, 0),
        }
    }

    pub fn len(&self) -> usize {
        self.offspring[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Uniform draw in `[0, 1)` for `slot` (0 or 1) at `position`.
    #[inline]
    pub fn uniform(&mut self, slot: usize, position: usize) -> f64 {
        self.offspring[slot][position].random::<f64>()
    }

    pub fn tie_break(&mut self) -> &mut StreamRng {
        &mut self.tie_break
    }
}
