//! Deterministic corpus generators shared by the integration suites.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gen_random(rng: &mut ChaCha8Rng, len: usize, alphabet: usize) -> Vec<u8> {
    (0..len)
        .map(|_| (rng.gen_range(0..alphabet.max(1))) as u8)
        .collect()
}

/// A short random motif tiled to length, with sparse random mutations.
pub fn gen_repetitive(rng: &mut ChaCha8Rng, len: usize) -> Vec<u8> {
    if len == 0 {
        return Vec::new();
    }
    let motif_len = rng.gen_range(2..=64.min(len.max(2)));
    let motif: Vec<u8> = (0..motif_len).map(|_| rng.gen_range(0..16) as u8).collect();
    let mut out: Vec<u8> = (0..len).map(|i| motif[i % motif_len]).collect();
    for _ in 0..len / 50 {
        let at = rng.gen_range(0..len);
        out[at] = rng.gen();
    }
    out
}

/// Strict tiling of a short motif: maximally regular input.
pub fn gen_periodic(rng: &mut ChaCha8Rng, len: usize) -> Vec<u8> {
    if len == 0 {
        return Vec::new();
    }
    let period = rng.gen_range(1..=8.min(len.max(1)));
    (0..len).map(|i| b'a' + (i % period) as u8).collect()
}

pub fn gen_single(len: usize) -> Vec<u8> {
    vec![b'z'; len]
}

const LEXICON: &[&str] = &[
    "the", "of", "and", "to", "in", "is", "was", "for", "that", "with", "on", "as", "by",
    "at", "from", "compression", "grammar", "queue", "buffer", "frequency", "sort", "merge",
    "pair", "symbol", "text", "position", "round", "replace", "space",
];

/// Word soup with natural-language-like repetition.
pub fn gen_text_like(rng: &mut ChaCha8Rng, len: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(len + 16);
    while out.len() < len {
        let word = LEXICON[rng.gen_range(0..LEXICON.len())];
        out.extend_from_slice(word.as_bytes());
        out.push(if rng.gen_ratio(1, 12) { b'.' } else { b' ' });
    }
    out.truncate(len);
    out
}

/// ACGT with repeated blocks, like genomic data.
pub fn gen_dna(rng: &mut ChaCha8Rng, len: usize) -> Vec<u8> {
    const BASES: [u8; 4] = *b"ACGT";
    let mut out = Vec::with_capacity(len);
    while out.len() < len {
        if rng.gen_ratio(1, 4) && !out.is_empty() {
            // copy an earlier block
            let take = rng.gen_range(4..=64.min(out.len()));
            let from = rng.gen_range(0..=out.len() - take);
            let block: Vec<u8> = out[from..from + take].to_vec();
            out.extend_from_slice(&block);
        } else {
            for _ in 0..rng.gen_range(4..32) {
                out.push(BASES[rng.gen_range(0..4)]);
            }
        }
    }
    out.truncate(len);
    out
}

pub const CLASSES: usize = 7;

/// One input from each structural family, selected by index.
pub fn corpus_input(rng: &mut ChaCha8Rng, class: usize, len: usize) -> Vec<u8> {
    match class % CLASSES {
        0 => gen_random(rng, len, 256),
        1 => gen_random(rng, len, 4),
        2 => gen_repetitive(rng, len),
        3 => gen_periodic(rng, len),
        4 => gen_single(len),
        5 => gen_text_like(rng, len),
        _ => gen_dna(rng, len),
    }
}

/// Log-uniform length in `[1, max]`, biased toward small inputs.
pub fn log_uniform_len(rng: &mut ChaCha8Rng, max: usize) -> usize {
    let exp = rng.gen_range(0.0..(max as f64).ln());
    (exp.exp() as usize).clamp(1, max)
}
