//! High-frequency pairs queue: a linear-probing hash over pairs plus a flat
//! array of `(pair, P, L, F)` records, capacity `ceil(sqrt(n)/11)`. Max and
//! min are found by scanning the record array.

use super::{PairHash, PairQueue, NULL};
use crate::arena::Arena;
use crate::sort::{build_frequency_list, sort_position_range, PositionArray};
use crate::symbols::Pair;
use crate::text::TextBuffer;

const REC: usize = 5; // a, b, P, L, F
const REC_P: usize = 2;
const REC_L: usize = 3;
const REC_F: usize = 4;

#[derive(Debug)]
pub struct HfQueue {
    hash: PairHash,
    rec_offset: usize,
    capacity: usize,
    rec_len: usize,
    size: usize,
    /// Pairs whose frequency falls below this are dropped (they reappear as
    /// low-frequency pairs in a later phase).
    threshold: usize,
    /// Engine-refreshed least-frequent pair, re-validated before use.
    min_cache: Option<Pair>,
    /// Records violating `F > L/2`; must be zero whenever max() runs.
    low_entries: usize,
}

#[inline]
fn is_low(l: usize, f: usize) -> bool {
    2 * f <= l
}

impl HfQueue {
    /// Build the queue from a sorted position array over the compacted text.
    ///
    /// The array's prefix is rewritten into the frequency list (count, first
    /// position per pair with count >= 2), sorted by decreasing count, the
    /// top `capacity` pairs at or above `threshold` are marked in the hash,
    /// and the position array is rebuilt to fill the records.
    ///
    /// The queue occupies `arena[region_offset ..]`: hash slots first, then
    /// the record array.
    #[allow(clippy::too_many_arguments)]
    pub fn build(
        text: &TextBuffer,
        tp: &mut PositionArray,
        arena: &mut Arena,
        region_offset: usize,
        hash_slots: usize,
        capacity: usize,
        threshold: usize,
        seed: u64,
    ) -> HfQueue {
        let tp_range = tp.arena_range(0..tp.used());
        let entries = build_frequency_list(text, arena.slice_mut(tp_range.clone()));
        let mut queue = HfQueue {
            hash: PairHash::new(arena, region_offset, hash_slots, seed),
            rec_offset: region_offset + 3 * hash_slots,
            capacity,
            rec_len: 0,
            size: 0,
            threshold,
            min_cache: None,
            low_entries: 0,
        };
        let mut admitted = 0usize;
        for e in 0..entries {
            if admitted == queue.capacity {
                break;
            }
            let count = arena.get(tp_range.start + 2 * e);
            if count < threshold {
                break; // list is sorted by decreasing count
            }
            let first = arena.get(tp_range.start + 2 * e + 1);
            let pair = text.pair_at(first).expect("list positions are valid");
            queue.hash.insert(arena, pair, NULL);
            admitted += 1;
        }
        *tp = PositionArray::build(text, arena, tp_range.start);
        let mut i = 0usize;
        while i < tp.used() {
            let pair = text
                .pair_at(tp.get(arena, i))
                .expect("compacted text has no stale positions");
            let start = i;
            i += 1;
            while i < tp.used() && text.pair_at(tp.get(arena, i)) == Some(pair) {
                i += 1;
            }
            if queue.hash.contains(arena, pair) {
                queue.hash.set(arena, pair, queue.rec_len);
                queue.write_record(arena, queue.rec_len, pair, start, i - start, i - start);
                queue.rec_len += 1;
                queue.size += 1;
            }
        }
        debug_assert_eq!(queue.size, admitted, "every admitted pair has a cluster");
        queue
    }

    fn rec(&self, slot: usize) -> usize {
        self.rec_offset + REC * slot
    }

    fn write_record(
        &mut self,
        arena: &mut Arena,
        slot: usize,
        pair: Pair,
        p: usize,
        l: usize,
        f: usize,
    ) {
        let base = self.rec(slot);
        arena.set(base, pair.0);
        arena.set(base + 1, pair.1);
        arena.set(base + REC_P, p);
        arena.set(base + REC_L, l);
        arena.set(base + REC_F, f);
        if is_low(l, f) {
            self.low_entries += 1;
        }
    }

    fn scan_extreme(&self, arena: &Arena, want_max: bool) -> Option<Pair> {
        let mut best: Option<(usize, Pair)> = None;
        for slot in 0..self.rec_len {
            let base = self.rec(slot);
            let a = arena.get(base);
            if a == NULL {
                continue; // tombstone
            }
            let f = arena.get(base + REC_F);
            // strict comparison keeps the lowest record index on ties
            let better = match best {
                None => true,
                Some((bf, _)) => {
                    if want_max {
                        f > bf
                    } else {
                        f < bf
                    }
                }
            };
            if better {
                best = Some((f, (a, arena.get(base + 1))));
            }
        }
        best.map(|(_, pair)| pair)
    }

    fn drop_record(&mut self, arena: &mut Arena, pair: Pair, slot: usize) {
        let base = self.rec(slot);
        if is_low(arena.get(base + REC_L), arena.get(base + REC_F)) {
            self.low_entries -= 1;
        }
        arena.set(base, NULL);
        self.hash.remove(arena, pair);
        self.size -= 1;
        if self.min_cache == Some(pair) {
            self.min_cache = None;
        }
    }

    /// Current least-frequent pair for eviction decisions: the cached pair
    /// when still live, otherwise a fresh scan.
    fn eviction_min(&mut self, arena: &Arena) -> Option<Pair> {
        match self.min_cache {
            Some(p) if self.hash.contains(arena, p) => Some(p),
            _ => {
                self.min_cache = self.scan_extreme(arena, false);
                self.min_cache
            }
        }
    }

    #[cfg(test)]
    pub(crate) fn check_consistency(&self, arena: &Arena) {
        let mut live = 0;
        let mut low = 0;
        for slot in 0..self.rec_len {
            let base = self.rec(slot);
            let a = arena.get(base);
            if a == NULL {
                continue;
            }
            live += 1;
            let pair = (a, arena.get(base + 1));
            assert_eq!(self.hash.get(arena, pair), Some(slot), "hash/record link");
            let (l, f) = (arena.get(base + REC_L), arena.get(base + REC_F));
            assert!(f >= self.threshold, "stored frequency below threshold");
            if is_low(l, f) {
                low += 1;
            }
        }
        assert_eq!(live, self.size);
        assert_eq!(live, self.hash.len());
        assert_eq!(low, self.low_entries);
        assert!(self.size <= self.capacity);
    }
}

impl PairQueue for HfQueue {
    fn get(&self, arena: &Arena, pair: Pair) -> Option<(usize, usize, usize)> {
        let slot = self.hash.get(arena, pair)?;
        let base = self.rec(slot);
        Some((
            arena.get(base + REC_P),
            arena.get(base + REC_L),
            arena.get(base + REC_F),
        ))
    }

    fn max_pair(&self, arena: &Arena) -> Option<Pair> {
        debug_assert_eq!(
            self.low_entries, 0,
            "F > L/2 must hold for every entry when max() runs"
        );
        self.scan_extreme(arena, true)
    }

    fn min_pair(&self, arena: &Arena) -> Option<Pair> {
        self.scan_extreme(arena, false)
    }

    fn contains(&self, arena: &Arena, pair: Pair) -> bool {
        self.hash.contains(arena, pair)
    }

    fn size(&self) -> usize {
        self.size
    }

    fn decrease(&mut self, arena: &mut Arena, pair: Pair) {
        let Some(slot) = self.hash.get(arena, pair) else {
            debug_assert!(false, "decrease on absent pair");
            return;
        };
        let base = self.rec(slot);
        let l = arena.get(base + REC_L);
        let f = arena.get(base + REC_F);
        if f - 1 < self.threshold {
            self.drop_record(arena, pair, slot);
            return;
        }
        arena.set(base + REC_F, f - 1);
        self.low_entries += is_low(l, f - 1) as usize;
        self.low_entries -= is_low(l, f) as usize;
    }

    fn remove(&mut self, arena: &mut Arena, pair: Pair) {
        if let Some(slot) = self.hash.get(arena, pair) {
            self.drop_record(arena, pair, slot);
        }
    }

    fn synchronize(&mut self, arena: &mut Arena, text: &TextBuffer, tp: &PositionArray, ab: Pair) {
        let slot = self
            .hash
            .get(arena, ab)
            .expect("synchronize requires a stored pair");
        let p0 = arena.get(self.rec(slot) + REC_P);
        let l0 = arena.get(self.rec(slot) + REC_L);
        let valid = sort_position_range(text, arena.slice_mut(tp.arena_range(p0..p0 + l0)));

        let mut saw_ab = false;
        let mut i = 0usize;
        while i < valid {
            let pair = text
                .pair_at(tp.get(arena, p0 + i))
                .expect("valid prefix positions");
            let start = i;
            i += 1;
            while i < valid && text.pair_at(tp.get(arena, p0 + i)) == Some(pair) {
                i += 1;
            }
            let count = i - start;
            if pair == ab {
                // the pair being synchronized: shrink its range to the exact
                // occurrences (the engine may have removed it mid-round)
                if let Some(own) = self.hash.get(arena, ab) {
                    let base = self.rec(own);
                    if is_low(arena.get(base + REC_L), arena.get(base + REC_F)) {
                        self.low_entries -= 1;
                    }
                    arena.set(base + REC_P, p0 + start);
                    arena.set(base + REC_L, count);
                    arena.set(base + REC_F, count);
                    saw_ab = true;
                    if let Some(minp) = self.eviction_min(arena) {
                        let (_, _, fmin) = self.get(arena, minp).unwrap();
                        if count < fmin {
                            self.min_cache = Some(ab);
                        }
                    }
                }
                continue;
            }
            let Some(minp) = self.eviction_min(arena) else {
                continue;
            };
            let (_, _, fmin) = self.get(arena, minp).unwrap();
            if count > fmin {
                // evict the least frequent pair and reuse its record slot
                let free = self.hash.get(arena, minp).unwrap();
                self.drop_record(arena, minp, free);
                self.hash.insert(arena, pair, free);
                self.write_record(arena, free, pair, p0 + start, count, count);
                self.size += 1;
                self.min_cache = self.scan_extreme(arena, false);
            }
        }
        if !saw_ab {
            // no occurrences left; the engine removes the pair next
            if let Some(own) = self.hash.get(arena, ab) {
                let base = self.rec(own);
                if is_low(arena.get(base + REC_L), arena.get(base + REC_F)) {
                    self.low_entries -= 1;
                }
                arena.set(base + REC_L, 0);
                arena.set(base + REC_F, 0);
                self.low_entries += 1; // 2*0 <= 0; cleared by the removal
            }
        }
    }

    fn cache_min(&mut self, arena: &Arena) {
        self.min_cache = self.scan_extreme(arena, false);
    }
}
