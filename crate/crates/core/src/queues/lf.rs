//! Low-frequency pairs queue: records chained into per-frequency doubly
//! linked lists, indexed by a frequency vector whose non-empty entries are
//! themselves doubly linked, plus MAX/MIN registers. All priority operations
//! are constant time; capacity policy differs between the fast variant
//! (fixed `eps * n / 13` pairs) and the light variant (grows from the words
//! reclaimed by text compactions, 13 words per pair).

use super::{PairHash, PairQueue, NULL};
use crate::arena::Arena;
use crate::sort::{build_frequency_list, sort_position_range, PositionArray};
use crate::symbols::Pair;
use crate::text::TextBuffer;

const REC: usize = 7; // a, b, P, L, F, prev, next
const REC_P: usize = 2;
const REC_L: usize = 3;
const REC_F: usize = 4;
const REC_PREV: usize = 5;
const REC_NEXT: usize = 6;

const FV: usize = 3; // head, prev-freq, next-freq
const FV_HEAD: usize = 0;
const FV_PREV: usize = 1;
const FV_NEXT: usize = 2;

#[inline]
fn is_low(l: usize, f: usize) -> bool {
    2 * f <= l
}

#[derive(Debug)]
pub struct LfQueue {
    hash: PairHash,
    rec_offset: usize,
    freq_offset: usize,
    /// Exclusive upper bound on stored frequencies; also the length of the
    /// frequency vector. Frequencies 0 and 1 are never stored.
    freq_bound: usize,
    capacity: usize,
    rec_len: usize,
    size: usize,
    max_freq: usize,
    min_freq: usize,
    low_entries: usize,
}

impl LfQueue {
    /// Build from a sorted position array over the compacted text, admitting
    /// at most `capacity` pairs with `2 <= count < freq_bound`, most frequent
    /// first. `region_offset` addresses the hash-plus-records block (13 words
    /// per pair of capacity); `freq_offset` addresses the frequency vector
    /// (3 words per frequency below `freq_bound`).
    #[allow(clippy::too_many_arguments)]
    pub fn build(
        text: &TextBuffer,
        tp: &mut PositionArray,
        arena: &mut Arena,
        region_offset: usize,
        freq_offset: usize,
        freq_bound: usize,
        capacity: usize,
        seed: u64,
    ) -> LfQueue {
        let tp_range = tp.arena_range(0..tp.used());
        let entries = build_frequency_list(text, arena.slice_mut(tp_range.clone()));
        let hash_slots = (2 * capacity).max(2);
        let mut queue = LfQueue {
            hash: PairHash::new(arena, region_offset, hash_slots, seed),
            rec_offset: region_offset + 3 * hash_slots,
            freq_offset,
            freq_bound,
            capacity,
            rec_len: 0,
            size: 0,
            max_freq: NULL,
            min_freq: NULL,
            low_entries: 0,
        };
        for f in 0..freq_bound {
            for w in 0..FV {
                arena.set(freq_offset + FV * f + w, NULL);
            }
        }

        // Admission scan in decreasing frequency order; chain the distinct
        // frequencies of admitted pairs while walking.
        let mut admitted = 0usize;
        let mut last_freq = NULL;
        for e in 0..entries {
            if admitted == capacity {
                break;
            }
            let count = arena.get(tp_range.start + 2 * e);
            if count < 2 {
                break;
            }
            if count >= freq_bound {
                debug_assert!(false, "high-frequency pair offered to the LF queue");
                continue;
            }
            let first = arena.get(tp_range.start + 2 * e + 1);
            let pair = text.pair_at(first).expect("list positions are valid");
            queue.hash.insert(arena, pair, NULL);
            admitted += 1;
            if last_freq == NULL {
                queue.max_freq = count;
            } else if count != last_freq {
                arena.set(queue.fv(count) + FV_NEXT, last_freq);
                arena.set(queue.fv(last_freq) + FV_PREV, count);
            }
            last_freq = count;
        }
        queue.min_freq = last_freq;

        // Rebuild the position array and fill records cluster by cluster:
        // hash points at the record, the old bucket head's prev is patched,
        // the record is appended with next = old head, and the bucket head
        // moves to the new record.
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
            let count = i - start;
            if !queue.hash.contains(arena, pair) {
                continue;
            }
            let slot = queue.rec_len;
            queue.hash.set(arena, pair, slot);
            let head = arena.get(queue.fv(count) + FV_HEAD);
            if head != NULL {
                arena.set(queue.rec(head) + REC_PREV, slot);
            }
            queue.write_record(arena, slot, pair, start, count, count, NULL, head);
            arena.set(queue.fv(count) + FV_HEAD, slot);
            queue.rec_len += 1;
            queue.size += 1;
        }
        debug_assert_eq!(queue.size, admitted);
        queue
    }

    #[inline]
    fn rec(&self, slot: usize) -> usize {
        self.rec_offset + REC * slot
    }

    #[inline]
    fn fv(&self, freq: usize) -> usize {
        debug_assert!(freq < self.freq_bound);
        self.freq_offset + FV * freq
    }

    #[allow(clippy::too_many_arguments)]
    fn write_record(
        &mut self,
        arena: &mut Arena,
        slot: usize,
        pair: Pair,
        p: usize,
        l: usize,
        f: usize,
        prev: usize,
        next: usize,
    ) {
        let base = self.rec(slot);
        arena.set(base, pair.0);
        arena.set(base + 1, pair.1);
        arena.set(base + REC_P, p);
        arena.set(base + REC_L, l);
        arena.set(base + REC_F, f);
        arena.set(base + REC_PREV, prev);
        arena.set(base + REC_NEXT, next);
        if is_low(l, f) {
            self.low_entries += 1;
        }
    }

    /// Unlink a record from its frequency bucket. When the bucket empties,
    /// splice the frequency out of the chain and move MAX/MIN along it.
    fn bucket_unlink(&mut self, arena: &mut Arena, slot: usize) {
        let base = self.rec(slot);
        let f = arena.get(base + REC_F);
        let prev = arena.get(base + REC_PREV);
        let next = arena.get(base + REC_NEXT);
        if prev == NULL {
            arena.set(self.fv(f) + FV_HEAD, next);
        } else {
            arena.set(self.rec(prev) + REC_NEXT, next);
        }
        if next != NULL {
            arena.set(self.rec(next) + REC_PREV, prev);
        }
        if arena.get(self.fv(f) + FV_HEAD) == NULL {
            let pf = arena.get(self.fv(f) + FV_PREV);
            let nf = arena.get(self.fv(f) + FV_NEXT);
            if pf != NULL {
                arena.set(self.fv(pf) + FV_NEXT, nf);
            }
            if nf != NULL {
                arena.set(self.fv(nf) + FV_PREV, pf);
            }
            arena.set(self.fv(f) + FV_PREV, NULL);
            arena.set(self.fv(f) + FV_NEXT, NULL);
            if self.max_freq == f {
                self.max_freq = pf;
            }
            if self.min_freq == f {
                self.min_freq = nf;
            }
        }
    }

    /// Link a record (already holding frequency `f`) at the head of bucket
    /// `f`. For a new bucket the chain neighbors are either supplied by the
    /// caller or located by walking up from MIN.
    fn bucket_link(
        &mut self,
        arena: &mut Arena,
        slot: usize,
        f: usize,
        hint: Option<(usize, usize)>,
    ) {
        let head = arena.get(self.fv(f) + FV_HEAD);
        if head != NULL {
            arena.set(self.rec(slot) + REC_PREV, NULL);
            arena.set(self.rec(slot) + REC_NEXT, head);
            arena.set(self.rec(head) + REC_PREV, slot);
            arena.set(self.fv(f) + FV_HEAD, slot);
            return;
        }
        arena.set(self.rec(slot) + REC_PREV, NULL);
        arena.set(self.rec(slot) + REC_NEXT, NULL);
        arena.set(self.fv(f) + FV_HEAD, slot);
        let (lower, upper) = hint.unwrap_or_else(|| self.chain_neighbors(arena, f));
        arena.set(self.fv(f) + FV_PREV, lower);
        arena.set(self.fv(f) + FV_NEXT, upper);
        if lower != NULL {
            arena.set(self.fv(lower) + FV_NEXT, f);
        } else {
            self.min_freq = f;
        }
        if upper != NULL {
            arena.set(self.fv(upper) + FV_PREV, f);
        } else {
            self.max_freq = f;
        }
    }

    /// Nearest non-empty frequencies around an empty `f`, walking the chain
    /// upward from MIN. Needed only when synchronization creates a bucket.
    fn chain_neighbors(&self, arena: &Arena, f: usize) -> (usize, usize) {
        if self.min_freq == NULL {
            return (NULL, NULL);
        }
        if f < self.min_freq {
            return (NULL, self.min_freq);
        }
        if f > self.max_freq {
            return (self.max_freq, NULL);
        }
        let mut lower = self.min_freq;
        loop {
            let next = arena.get(self.fv(lower) + FV_NEXT);
            debug_assert!(next != NULL, "f lies inside the chain");
            if next > f {
                return (lower, next);
            }
            lower = next;
        }
    }

    fn drop_record(&mut self, arena: &mut Arena, pair: Pair, slot: usize) {
        self.bucket_unlink(arena, slot);
        let base = self.rec(slot);
        if is_low(arena.get(base + REC_L), arena.get(base + REC_F)) {
            self.low_entries -= 1;
        }
        arena.set(base, NULL);
        self.hash.remove(arena, pair);
        self.size -= 1;
    }

    fn pair_of(&self, arena: &Arena, slot: usize) -> Pair {
        (arena.get(self.rec(slot)), arena.get(self.rec(slot) + 1))
    }

    #[cfg(test)]
    pub(crate) fn check_consistency(&self, arena: &Arena) {
        // walking every bucket chain visits each live record exactly once,
        // with its frequency equal to the bucket index
        let mut seen = 0usize;
        let mut low = 0usize;
        if self.max_freq != NULL {
            let mut f = self.max_freq;
            let mut prev_f = NULL;
            loop {
                assert_eq!(arena.get(self.fv(f) + FV_NEXT), prev_f, "chain link at {f}");
                let mut slot = arena.get(self.fv(f) + FV_HEAD);
                assert!(slot != NULL, "chained frequency {f} has a head");
                let mut prev_slot = NULL;
                while slot != NULL {
                    let base = self.rec(slot);
                    assert_eq!(arena.get(base + REC_F), f, "bucket member frequency");
                    assert_eq!(arena.get(base + REC_PREV), prev_slot);
                    let pair = self.pair_of(arena, slot);
                    assert_eq!(self.hash.get(arena, pair), Some(slot), "hash link");
                    if is_low(arena.get(base + REC_L), f) {
                        low += 1;
                    }
                    seen += 1;
                    prev_slot = slot;
                    slot = arena.get(base + REC_NEXT);
                }
                let down = arena.get(self.fv(f) + FV_PREV);
                if down == NULL {
                    assert_eq!(self.min_freq, f);
                    break;
                }
                prev_f = f;
                f = down;
            }
        } else {
            assert_eq!(self.size, 0);
            assert_eq!(self.min_freq, NULL);
        }
        assert_eq!(seen, self.size);
        assert_eq!(self.hash.len(), self.size);
        assert_eq!(low, self.low_entries);
        assert!(self.size <= self.capacity);
    }
}

impl PairQueue for LfQueue {
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
        if self.max_freq == NULL {
            return None;
        }
        Some(self.pair_of(arena, arena.get(self.fv(self.max_freq) + FV_HEAD)))
    }

    fn min_pair(&self, arena: &Arena) -> Option<Pair> {
        if self.min_freq == NULL {
            return None;
        }
        Some(self.pair_of(arena, arena.get(self.fv(self.min_freq) + FV_HEAD)))
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
        let f = arena.get(base + REC_F);
        let l = arena.get(base + REC_L);
        // capture the chain neighborhood before unlinking so the f-1 bucket
        // can be spliced in O(1)
        let pf_before = arena.get(self.fv(f) + FV_PREV);
        self.bucket_unlink(arena, slot);
        if f - 1 == 1 {
            if is_low(l, f) {
                self.low_entries -= 1;
            }
            arena.set(base, NULL);
            self.hash.remove(arena, pair);
            self.size -= 1;
            return;
        }
        arena.set(base + REC_F, f - 1);
        self.low_entries += is_low(l, f - 1) as usize;
        self.low_entries -= is_low(l, f) as usize;
        let hint = if arena.get(self.fv(f) + FV_HEAD) != NULL {
            // old bucket survives: f-1 sits right below it
            (arena.get(self.fv(f) + FV_PREV), f)
        } else {
            // old bucket vanished: f-1 takes its place between pf and nf;
            // bucket_unlink already rewired MAX/MIN through them
            (pf_before, arena.get(self.fv(f) + FV_NEXT))
        };
        // recompute the upper side when the old bucket vanished
        let hint = if hint.1 == NULL && self.max_freq != NULL && self.max_freq > f - 1 {
            (hint.0, self.chain_neighbors(arena, f - 1).1)
        } else {
            hint
        };
        self.bucket_link(arena, slot, f - 1, Some(hint));
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
                // overwrite the stored range in place; the frequency field
                // already equals the true count, so the links stay valid
                if let Some(own) = self.hash.get(arena, ab) {
                    let base = self.rec(own);
                    let (l, f) = (arena.get(base + REC_L), arena.get(base + REC_F));
                    if f == count {
                        if is_low(l, f) {
                            self.low_entries -= 1;
                        }
                        arena.set(base + REC_P, p0 + start);
                        arena.set(base + REC_L, count);
                        if is_low(count, f) {
                            self.low_entries += 1;
                        }
                    } else {
                        // stale frequency: relink into the right bucket
                        debug_assert!(false, "stored frequency diverged from the text");
                        self.bucket_unlink(arena, own);
                        if is_low(l, f) {
                            self.low_entries -= 1;
                        }
                        arena.set(base + REC_P, p0 + start);
                        arena.set(base + REC_L, count);
                        arena.set(base + REC_F, count);
                        self.bucket_link(arena, own, count, None);
                    }
                }
                continue;
            }
            if count >= self.freq_bound {
                debug_assert!(false, "new pair at high frequency during the LF phase");
                continue;
            }
            let Some(minp) = self.min_pair(arena) else {
                continue;
            };
            let fmin = arena.get(self.rec(self.hash.get(arena, minp).unwrap()) + REC_F);
            if count > fmin {
                // evict the least frequent pair, reuse its record slot, and
                // take the smaller of XY and the new chain minimum as MIN
                let free = self.hash.get(arena, minp).unwrap();
                self.drop_record(arena, minp, free);
                self.hash.insert(arena, pair, free);
                self.write_record(arena, free, pair, p0 + start, count, count, NULL, NULL);
                self.size += 1;
                self.bucket_link(arena, free, count, None);
            }
        }
    }

    fn cache_min(&mut self, _arena: &Arena) {
        // MIN is tracked continuously through the frequency chain
    }
}

/// Capacity schedule of the light variant: one pair initially, growing by
/// one pair per 13 words reclaimed from text compactions. Unconsumed
/// remainders carry forward.
#[derive(Debug, Clone)]
pub struct LightCapacityPolicy {
    round: usize,
    capacity: usize,
    pool_words: usize,
}

impl Default for LightCapacityPolicy {
    fn default() -> Self {
        Self::new()
    }
}

impl LightCapacityPolicy {
    pub fn new() -> Self {
        LightCapacityPolicy {
            round: 0,
            capacity: 1,
            pool_words: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn round(&self) -> usize {
        self.round
    }

    /// Absorb the words reclaimed since the last round and advance to the
    /// next round's capacity.
    pub fn next_capacity(&mut self, reclaimed_words: usize) -> usize {
        self.pool_words += reclaimed_words;
        self.capacity += self.pool_words / 13;
        self.pool_words %= 13;
        self.round += 1;
        self.capacity
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::ArenaAccountant;

    /// Same worked example as the high-frequency queue tests.
    fn figure_text() -> TextBuffer {
        TextBuffer::from_codes(vec![
            10, 3, 4, 6, 10, 3, 5, 7, 10, 3, 4, 6, 10, 3, 4, 8, 10, 3, 5, 7,
        ])
    }

    fn build(
        text: &TextBuffer,
        capacity: usize,
        freq_bound: usize,
    ) -> (LfQueue, Arena, PositionArray) {
        let n = text.n();
        let mut acct = ArenaAccountant::new(None);
        let region = n;
        let freq_off = region + 13 * capacity;
        let mut arena = Arena::new(freq_off + FV * freq_bound, &mut acct).unwrap();
        let mut tp = PositionArray::build(text, &mut arena, 0);
        let q = LfQueue::build(
            text, &mut tp, &mut arena, region, freq_off, freq_bound, capacity, 0x5EED,
        );
        (q, arena, tp)
    }

    fn bucket_members(q: &LfQueue, arena: &Arena, f: usize) -> Vec<Pair> {
        let mut out = Vec::new();
        let mut slot = arena.get(q.fv(f) + FV_HEAD);
        while slot != NULL {
            out.push(q.pair_of(arena, slot));
            slot = arena.get(q.rec(slot) + REC_NEXT);
        }
        out
    }

    #[test]
    fn figure_buckets() {
        let text = figure_text();
        let (q, arena, _tp) = build(&text, 5, 6);
        q.check_consistency(&arena);
        assert_eq!(q.size(), 5);
        assert_eq!(bucket_members(&q, &arena, 5), vec![(10, 3)]); // Bd
        assert_eq!(bucket_members(&q, &arena, 3), vec![(3, 4)]); // de
        // df, eg, fh share bucket 2, chained from the latest insertion
        assert_eq!(
            bucket_members(&q, &arena, 2),
            vec![(5, 7), (4, 6), (3, 5)]
        );
        assert_eq!(q.max_pair(&arena), Some((10, 3)));
        assert_eq!(q.min_pair(&arena), Some((5, 7)));
        assert_eq!(q.get(&arena, (10, 3)).map(|t| t.2), Some(5));
    }

    #[test]
    fn capacity_one_admits_top_tie() {
        // abracadabra: ab, br, ra all at count 2; ab wins the pair tie
        let (codes, _) = crate::symbols::remap_input(b"abracadabra");
        let text = TextBuffer::from_codes(codes);
        let (q, arena, _tp) = build(&text, 1, 6);
        assert_eq!(q.size(), 1);
        assert!(q.contains(&arena, (0, 1)));
    }

    #[test]
    fn empty_when_nothing_repeats() {
        let text = TextBuffer::from_codes(vec![0, 1, 2, 3, 4, 5, 0, 2, 4, 1, 3, 5]);
        let (q, arena, _tp) = build(&text, 4, 6);
        assert_eq!(q.size(), 0);
        assert_eq!(q.max_pair(&arena), None);
        assert_eq!(q.min_pair(&arena), None);
    }

    #[test]
    fn max_moves_along_chain_after_removal() {
        let text = figure_text();
        let (mut q, mut arena, _tp) = build(&text, 5, 6);
        q.remove(&mut arena, (10, 3)); // only F=5 pair
        q.check_consistency(&arena);
        assert_eq!(q.max_pair(&arena), Some((3, 4))); // de at F=3
        q.remove(&mut arena, (3, 4));
        assert_eq!(q.max_pair(&arena), Some((5, 7)));
        assert_eq!(q.size(), 3);
    }

    #[test]
    fn min_moves_after_removing_sole_member() {
        let text = figure_text();
        let (mut q, mut arena, _tp) = build(&text, 5, 6);
        for pair in [(5, 7), (4, 6), (3, 5)] {
            q.remove(&mut arena, pair);
        }
        q.check_consistency(&arena);
        assert_eq!(q.min_pair(&arena), Some((3, 4))); // bucket 2 emptied
    }

    #[test]
    fn decrease_boundary_and_relink() {
        let text = figure_text();
        let (mut q, mut arena, _tp) = build(&text, 5, 6);
        // F=2 pairs vanish on decrease ("becomes equal to 1")
        q.decrease(&mut arena, (4, 6));
        assert!(!q.contains(&arena, (4, 6)));
        q.check_consistency(&arena);
        // de is the sole member of bucket 3: the bucket empties and the
        // record heads bucket 2
        q.decrease(&mut arena, (3, 4));
        q.check_consistency(&arena);
        assert_eq!(bucket_members(&q, &arena, 2), vec![(3, 4), (5, 7), (3, 5)]);
        let (_, _, f) = q.get(&arena, (3, 4)).unwrap();
        assert_eq!(f, 2);
        // MIN follows the moved pair when its bucket becomes the smallest
        assert_eq!(q.min_pair(&arena), Some((3, 4)));
        // Bd down from 5: creates bucket 4 at the top
        q.decrease(&mut arena, (10, 3));
        q.check_consistency(&arena);
        assert_eq!(q.max_pair(&arena), Some((10, 3)));
        assert_eq!(q.get(&arena, (10, 3)).map(|t| t.2), Some(4));
    }

    #[test]
    fn light_capacity_schedule() {
        let mut policy = LightCapacityPolicy::new();
        assert_eq!(policy.capacity(), 1);
        assert_eq!(policy.round(), 0);
        assert_eq!(policy.next_capacity(130), 11); // 130/13 = 10 more pairs
        assert_eq!(policy.round(), 1);
        // remainders carry forward: 12 then 1 word crosses the boundary
        assert_eq!(policy.next_capacity(12), 11);
        assert_eq!(policy.next_capacity(1), 12);
    }
}
