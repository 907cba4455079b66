//! Sorting text positions by character pairs inside the word arena.
//!
//! [`sort_pairs`] clusters all positions of a compacted text by the pair that
//! starts there, using only the arena words plus constant locals: positions
//! are expanded in phases into 3-word `(left, right, position)` keys, each
//! phase filling exactly the words freed so far, sorted in place and shrunk
//! back to bare positions; the sorted phase segments are then merged from
//! right to left with a rotation-based in-place merge.
//!
//! [`sort_position_range`] re-sorts an arbitrary subrange of positions during
//! queue synchronization. The subrange has no adjacent free words, so keys
//! are fetched from the text on demand and an in-place heapsort is used.

use crate::arena::Arena;
use crate::math::bytes_for_value;
use crate::symbols::Pair;
use crate::text::TextBuffer;

/// Text positions clustered by pair, occupying a range of the arena.
#[derive(Debug, Clone)]
pub struct PositionArray {
    offset: usize,
    used: usize,
}

impl PositionArray {
    /// Sort all pair positions of `text` into the arena words starting at
    /// `offset`. The text must be compacted.
    pub fn build(text: &TextBuffer, arena: &mut Arena, offset: usize) -> PositionArray {
        let avail = text.n().saturating_sub(1);
        let used = sort_pairs(text, arena.slice_mut(offset..offset + avail));
        PositionArray { offset, used }
    }

    pub fn used(&self) -> usize {
        self.used
    }

    #[inline]
    pub fn get(&self, arena: &Arena, i: usize) -> usize {
        debug_assert!(i < self.used);
        arena.get(self.offset + i)
    }

    /// Arena index range for a relative range of entries.
    pub(crate) fn arena_range(&self, range: core::ops::Range<usize>) -> core::ops::Range<usize> {
        debug_assert!(range.end <= self.used);
        self.offset + range.start..self.offset + range.end
    }

    pub(crate) fn words<'a>(&self, arena: &'a Arena) -> &'a [usize] {
        arena.slice(self.offset..self.offset + self.used)
    }
}

/// Cluster all pair positions of the compacted `text` into `arena`, ordered
/// by `(pair, position)`. Returns the number of entries (`live - 1`).
pub fn sort_pairs(text: &TextBuffer, arena: &mut [usize]) -> usize {
    let m = text.live_len();
    debug_assert_eq!(m, text.live_prefix().len());
    if m < 2 {
        return 0;
    }
    let pairs = m - 1;
    let a = &mut arena[..pairs];
    let cells = text.live_prefix();
    let width = bytes_for_value(text.n() - 1);

    // Expansion phases: with r pairs remaining there are exactly r free
    // words, so floor(r/3) pairs fit as 3-word keys; the last one or two
    // pairs become singleton segments.
    let mut segment_starts = [0usize; MAX_SEGMENTS];
    let mut segments = 0usize;
    let mut used = 0usize;
    while used < pairs {
        let remaining = pairs - used;
        if remaining < 3 {
            for t in 0..remaining {
                segment_starts[segments] = used + t;
                segments += 1;
                a[used + t] = used + t;
            }
            break;
        }
        let take = remaining / 3;
        for t in 0..take {
            let p = used + t;
            a[used + 3 * t] = cells[p];
            a[used + 3 * t + 1] = cells[p + 1];
            a[used + 3 * t + 2] = p;
        }
        sort_key_tuples(&mut a[used..used + 3 * take], width, 0);
        for t in 0..take {
            a[used + t] = a[used + 3 * t + 2];
        }
        segment_starts[segments] = used;
        segments += 1;
        used += take;
    }

    // Merge segments right to left; borders follow from the phase recurrence.
    let key = |p: usize| (cells[p], cells[p + 1], p);
    for s in (0..segments.saturating_sub(1)).rev() {
        let start = segment_starts[s];
        let mid = segment_starts[s + 1] - start;
        merge_in_place(&mut a[start..], mid, &key);
    }
    pairs
}

// Phase sizes shrink by a third each round, so segment count is logarithmic.
const MAX_SEGMENTS: usize = 64;

/// Partition stale entries (blank cell, or no following symbol) to the
/// suffix of `range`, sort the valid prefix by `(pair, position)` fetching
/// keys from the text on demand, and return the prefix length.
pub fn sort_position_range(text: &TextBuffer, range: &mut [usize]) -> usize {
    let mut valid = 0;
    let mut stale = range.len();
    while valid < stale {
        if text.pair_at(range[valid]).is_some() {
            valid += 1;
        } else {
            stale -= 1;
            range.swap(valid, stale);
        }
    }
    heapsort_by_key(&mut range[..valid], |p| {
        let (a, b) = text.pair_at(p).expect("partitioned prefix is valid");
        (a, b, p)
    });
    valid
}

/// A maximal group of equal-pair positions in a sorted position slice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cluster {
    pub pair: Pair,
    pub start: usize,
    pub count: usize,
}

/// Iterate the maximal clusters of a position slice sorted by pair.
pub fn clusters<'a>(
    text: &'a TextBuffer,
    positions: &'a [usize],
) -> impl Iterator<Item = Cluster> + 'a {
    let mut i = 0usize;
    core::iter::from_fn(move || {
        if i >= positions.len() {
            return None;
        }
        let start = i;
        let pair = text
            .pair_at(positions[i])
            .expect("cluster scan over valid positions");
        i += 1;
        while i < positions.len() && text.pair_at(positions[i]) == Some(pair) {
            i += 1;
        }
        Some(Cluster {
            pair,
            start,
            count: i - start,
        })
    })
}

/// One record per pair with its positional frequency and the index of its
/// first cluster entry; a single left-to-right scan of the sorted positions.
pub fn count_frequencies<'a>(
    text: &'a TextBuffer,
    positions: &'a [usize],
) -> impl Iterator<Item = (Pair, usize, usize)> + 'a {
    clusters(text, positions).map(|c| (c.pair, c.count, c.start))
}

/// Maximum positional pair count of the compacted text; linear time, reuses
/// the arena words.
pub fn highest_frequency(text: &TextBuffer, arena: &mut [usize]) -> usize {
    if text.live_len() < 2 {
        return 0;
    }
    let used = sort_pairs(text, arena);
    count_frequencies(text, &arena[..used])
        .map(|(_, k, _)| k)
        .max()
        .unwrap_or(0)
}

/// Rewrite a sorted position prefix into the frequency list: 2-word entries
/// `(count, first_position)` for every pair with count >= 2, sorted by
/// descending count, ties by ascending pair. Returns the entry count.
pub(crate) fn build_frequency_list(text: &TextBuffer, tp: &mut [usize]) -> usize {
    let mut write = 0usize;
    let mut read = 0usize;
    while read < tp.len() {
        let pair = text.pair_at(tp[read]);
        debug_assert!(pair.is_some(), "frequency list needs a compacted text");
        let start = read;
        read += 1;
        while read < tp.len() && text.pair_at(tp[read]) == pair {
            read += 1;
        }
        let count = read - start;
        if count >= 2 {
            let first = tp[start];
            tp[write] = count;
            tp[write + 1] = first;
            write += 2;
        }
    }
    let entries = write / 2;
    heapsort_stride2_by_key(&mut tp[..write], |count, pos| {
        let pair = text.pair_at(pos).expect("list positions are valid");
        (core::cmp::Reverse(count), pair)
    });
    entries
}

// ---------------------------------------------------------------------
// In-place primitives
// ---------------------------------------------------------------------

const RADIX_CUTOFF: usize = 16;

#[inline]
fn tuple_at(seg: &[usize], e: usize) -> (usize, usize, usize) {
    (seg[3 * e], seg[3 * e + 1], seg[3 * e + 2])
}

fn swap_tuples(seg: &mut [usize], i: usize, j: usize) {
    for w in 0..3 {
        seg.swap(3 * i + w, 3 * j + w);
    }
}

fn insertion_sort_tuples(seg: &mut [usize]) {
    let k = seg.len() / 3;
    for i in 1..k {
        let mut j = i;
        while j > 0 && tuple_at(seg, j - 1) > tuple_at(seg, j) {
            swap_tuples(seg, j - 1, j);
            j -= 1;
        }
    }
}

/// In-place MSD radix sort of 3-word keys, byte digits high to low; small
/// segments fall back to insertion sort. Counting buffers are fixed-size
/// stack locals.
fn sort_key_tuples(seg: &mut [usize], width: u32, level: u32) {
    let k = seg.len() / 3;
    if k <= RADIX_CUTOFF {
        insertion_sort_tuples(seg);
        return;
    }
    if level >= 3 * width {
        return;
    }
    let word = (level / width) as usize;
    let shift = 8 * (width - 1 - level % width);
    let digit = |seg: &[usize], e: usize| (seg[3 * e + word] >> shift) & 0xFF;

    let mut counts = [0usize; 256];
    for e in 0..k {
        counts[digit(seg, e)] += 1;
    }
    if counts.iter().any(|&c| c == k) {
        return sort_key_tuples(seg, width, level + 1);
    }

    let mut starts = [0usize; 256];
    let mut acc = 0usize;
    for b in 0..256 {
        starts[b] = acc;
        acc += counts[b];
    }
    let mut heads = starts;
    for b in 0..256 {
        let end = starts[b] + counts[b];
        while heads[b] < end {
            let d = digit(seg, heads[b]);
            if d == b {
                heads[b] += 1;
            } else {
                let target = heads[d];
                heads[d] += 1;
                swap_tuples(seg, heads[b], target);
            }
        }
    }
    for b in 0..256 {
        if counts[b] > 1 {
            sort_key_tuples(&mut seg[3 * starts[b]..3 * (starts[b] + counts[b])], width, level + 1);
        }
    }
}

const MERGE_CUTOFF: usize = 12;

/// Merge the two sorted runs `a[..mid]` and `a[mid..]` in place with the
/// rotation-based divide and conquer scheme; O(1) words beyond the recursion.
fn merge_in_place<K: Ord>(a: &mut [usize], mid: usize, key: &impl Fn(usize) -> K) {
    let (n1, n2) = (mid, a.len() - mid);
    if n1 == 0 || n2 == 0 || key(a[mid - 1]) <= key(a[mid]) {
        return;
    }
    if n1 + n2 <= MERGE_CUTOFF {
        for i in 1..a.len() {
            let mut j = i;
            while j > 0 && key(a[j - 1]) > key(a[j]) {
                a.swap(j - 1, j);
                j -= 1;
            }
        }
        return;
    }
    let (i, j);
    if n1 >= n2 {
        i = n1 / 2;
        let pivot = key(a[i]);
        j = a[mid..].partition_point(|&p| key(p) < pivot);
    } else {
        j = n2 / 2;
        let pivot = key(a[mid + j]);
        i = a[..mid].partition_point(|&p| key(p) <= pivot);
    }
    a[i..mid + j].rotate_left(mid - i);
    let new_mid = i + j;
    merge_in_place(&mut a[..new_mid], i, key);
    merge_in_place(&mut a[new_mid..], mid - i, key);
}

/// In-place heapsort of single-word entries ordered by a key of the value.
fn heapsort_by_key<K: Ord>(a: &mut [usize], key: impl Fn(usize) -> K) {
    let sift = |a: &mut [usize], mut root: usize, end: usize| loop {
        let mut child = 2 * root + 1;
        if child >= end {
            break;
        }
        if child + 1 < end && key(a[child]) < key(a[child + 1]) {
            child += 1;
        }
        if key(a[root]) < key(a[child]) {
            a.swap(root, child);
            root = child;
        } else {
            break;
        }
    };
    let len = a.len();
    for root in (0..len / 2).rev() {
        sift(a, root, len);
    }
    for end in (1..len).rev() {
        a.swap(0, end);
        sift(a, 0, end);
    }
}

/// Heapsort of 2-word entries `(w[2i], w[2i+1])` ordered by a key of both.
fn heapsort_stride2_by_key<K: Ord>(words: &mut [usize], key: impl Fn(usize, usize) -> K) {
    let len = words.len() / 2;
    let swap2 = |w: &mut [usize], i: usize, j: usize| {
        w.swap(2 * i, 2 * j);
        w.swap(2 * i + 1, 2 * j + 1);
    };
    let sift = |w: &mut [usize], mut root: usize, end: usize| loop {
        let k = |w: &[usize], e: usize| key(w[2 * e], w[2 * e + 1]);
        let mut child = 2 * root + 1;
        if child >= end {
            break;
        }
        if child + 1 < end && k(w, child) < k(w, child + 1) {
            child += 1;
        }
        if k(w, root) < k(w, child) {
            swap2(w, root, child);
            root = child;
        } else {
            break;
        }
    };
    for root in (0..len / 2).rev() {
        sift(words, root, len);
    }
    for end in (1..len).rev() {
        swap2(words, 0, end);
        sift(words, 0, end);
    }
}
