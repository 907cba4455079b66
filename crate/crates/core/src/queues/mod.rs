//! Bounded-capacity pair priority queues backed by the word arena.
//!
//! Both queue flavors share the layout contract: a linear-probing hash from
//! pairs to queue-array slots, and an array of per-pair records holding the
//! `(P, L, F)` range into the position array. Capacity, record shape and the
//! priority machinery differ between the high- and low-frequency flavors.

use crate::arena::Arena;
use crate::math::ceil_sqrt_div;
use crate::symbols::Pair;
use crate::sort::PositionArray;
use crate::text::TextBuffer;

mod hf;
mod lf;

pub use hf::HfQueue;
pub use lf::{LfQueue, LightCapacityPolicy};

/// Sentinel word for empty hash slots, tombstoned records and null links.
pub(crate) const NULL: usize = usize::MAX;

/// Pairs at or above this count are high-frequency; the clamp to 2 keeps
/// frequency-1 pairs out of the queues on tiny inputs where `sqrt(n)/3 < 2`.
pub fn hf_threshold(n: usize) -> usize {
    ceil_sqrt_div(n, 3).max(2)
}

/// Common interface the substitution engine drives.
pub trait PairQueue {
    /// The `(P, L, F)` triple of a stored pair: all text occurrences of the
    /// pair lie in positions `P .. P+L` of the position array, and `F` is its
    /// frequency in the text.
    fn get(&self, arena: &Arena, pair: Pair) -> Option<(usize, usize, usize)>;
    fn max_pair(&self, arena: &Arena) -> Option<Pair>;
    fn min_pair(&self, arena: &Arena) -> Option<Pair>;
    fn contains(&self, arena: &Arena, pair: Pair) -> bool;
    fn size(&self) -> usize;
    /// Decrease the pair's frequency by one, dropping it from the queue when
    /// it falls below the flavor's floor.
    fn decrease(&mut self, arena: &mut Arena, pair: Pair);
    fn remove(&mut self, arena: &mut Arena, pair: Pair);
    /// Re-sort the pair's position range, shrink it to the exact occurrences
    /// and harvest any new pairs found there (evicting minima to make room).
    fn synchronize(&mut self, arena: &mut Arena, text: &TextBuffer, tp: &PositionArray, pair: Pair);
    /// Refresh the cached least-frequent pair at round start.
    fn cache_min(&mut self, arena: &Arena);
}

/// Open-addressing hash from pairs to slot indices, resident in the arena:
/// three words per slot `(a, b, value)`, linear probing, and backward-shift
/// deletion so the load factor bound stays meaningful without tombstones.
#[derive(Debug, Clone)]
pub(crate) struct PairHash {
    offset: usize,
    slots: usize,
    seed: u64,
    len: usize,
}

impl PairHash {
    pub fn new(arena: &mut Arena, offset: usize, slots: usize, seed: u64) -> Self {
        debug_assert!(slots >= 2);
        for i in 0..slots {
            arena.set(offset + 3 * i, NULL);
        }
        PairHash {
            offset,
            slots,
            seed,
            len: 0,
        }
    }

    #[inline]
    fn base(&self, slot: usize) -> usize {
        self.offset + 3 * slot
    }

    /// Multiply-shift style mix of the 2-word key with the run seed.
    #[inline]
    fn ideal(&self, (a, b): Pair) -> usize {
        let mut h = (a as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
            ^ (b as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F)
            ^ self.seed;
        h ^= h >> 33;
        h = h.wrapping_mul(0xFF51_AFD7_ED55_8CCD);
        h ^= h >> 29;
        (h % self.slots as u64) as usize
    }

    fn slot_of(&self, arena: &Arena, pair: Pair) -> Option<usize> {
        let mut i = self.ideal(pair);
        loop {
            let a = arena.get(self.base(i));
            if a == NULL {
                return None;
            }
            if (a, arena.get(self.base(i) + 1)) == pair {
                return Some(i);
            }
            i = (i + 1) % self.slots;
        }
    }

    pub fn get(&self, arena: &Arena, pair: Pair) -> Option<usize> {
        self.slot_of(arena, pair)
            .map(|s| arena.get(self.base(s) + 2))
    }

    pub fn contains(&self, arena: &Arena, pair: Pair) -> bool {
        self.slot_of(arena, pair).is_some()
    }

    /// Insert an absent pair. The caller keeps `len <= slots / 2`.
    pub fn insert(&mut self, arena: &mut Arena, pair: Pair, value: usize) {
        debug_assert!(!self.contains(arena, pair));
        debug_assert!(2 * (self.len + 1) <= self.slots, "hash load above 0.5");
        let mut i = self.ideal(pair);
        while arena.get(self.base(i)) != NULL {
            i = (i + 1) % self.slots;
        }
        arena.set(self.base(i), pair.0);
        arena.set(self.base(i) + 1, pair.1);
        arena.set(self.base(i) + 2, value);
        self.len += 1;
    }

    /// Overwrite the value of a present pair.
    pub fn set(&mut self, arena: &mut Arena, pair: Pair, value: usize) {
        let s = self.slot_of(arena, pair).expect("set on absent pair");
        arena.set(self.base(s) + 2, value);
    }

    /// Backward-shift deletion: close the hole by moving displaced entries
    /// back toward their ideal slots.
    pub fn remove(&mut self, arena: &mut Arena, pair: Pair) -> bool {
        let Some(mut hole) = self.slot_of(arena, pair) else {
            return false;
        };
        self.len -= 1;
        let mut j = hole;
        loop {
            j = (j + 1) % self.slots;
            let a = arena.get(self.base(j));
            if a == NULL {
                break;
            }
            let ideal = self.ideal((a, arena.get(self.base(j) + 1)));
            let movable = if j > hole {
                ideal <= hole || ideal > j
            } else {
                ideal <= hole && ideal > j
            };
            if movable {
                for w in 0..3 {
                    let v = arena.get(self.base(j) + w);
                    arena.set(self.base(hole) + w, v);
                }
                hole = j;
            }
        }
        arena.set(self.base(hole), NULL);
        true
    }

    pub fn len(&self) -> usize {
        self.len
    }
}

/// High-frequency queue sizing: capacity `ceil(sqrt(n)/11)`, hash slots
/// `ceil(2 sqrt(n)/11)` (at least twice the capacity for the load bound).
pub fn hf_capacity(n: usize) -> usize {
    ceil_sqrt_div(n, 11).max(1)
}

pub fn hf_hash_slots(n: usize) -> usize {
    ceil_sqrt_div(4 * n, 11).max(2 * hf_capacity(n))
}

/// Words for the high-frequency queue: 3 per hash slot, 5 per record.
pub fn hf_words(n: usize) -> usize {
    3 * hf_hash_slots(n) + 5 * hf_capacity(n)
}

/// Fast-variant low-frequency capacity `ceil(eps * n / 13)`.
pub fn lf_capacity_fast(n: usize, epsilon: f64) -> usize {
    ((epsilon * n as f64) / 13.0).ceil().max(1.0) as usize
}

/// Words for a low-frequency queue of `capacity` pairs: 7 per record plus
/// 3 per hash slot with twice the capacity in slots.
pub fn lf_words(capacity: usize) -> usize {
    13 * capacity
}

/// Words for the frequency vector indexing all low frequencies below the
/// threshold: three words per frequency.
pub fn freq_vector_words(n: usize) -> usize {
    3 * hf_threshold(n)
}
