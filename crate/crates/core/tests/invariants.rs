//! Engine-level invariants over a fuzz corpus: round trips, replay validity,
//! monotone progress, the synchronize work bound and the space accounting.
//! Debug assertions stay on in the test profile, so the `F > L/2` scan-free
//! counters inside the queues are armed throughout.

mod common;

use common::*;
use rpse::engine::{compress, CompressOptions};
use rpse::oracle::replay_validate;
use rpse::symbols::expand;

fn configs() -> Vec<CompressOptions> {
    vec![
        CompressOptions::fast(0.1),
        CompressOptions::fast(0.5),
        CompressOptions::fast(1.0),
        CompressOptions::light(),
    ]
}

#[test]
fn fuzz_round_trip_and_replay() {
    let mut r = rng(0xA11CE);
    let mut max_work_ratio = 0.0f64;
    for case in 0..600 {
        let len = log_uniform_len(&mut r, 4096);
        let input = corpus_input(&mut r, case, len);
        for opts in configs() {
            let c = compress(&input, &opts).unwrap();
            assert_eq!(
                expand(&c.grammar).unwrap(),
                input,
                "round trip, case {case} {:?}",
                opts.variant
            );
            // replay is quadratic; keep it to the small half of the corpus
            if input.len() <= 512 {
                let report = replay_validate(&input, &c.grammar.rules);
                assert!(
                    report.passed(),
                    "replay, case {case} {:?}: {:?}",
                    opts.variant,
                    report.first_failure().map(|i| report.checks[i])
                );
            }
            let s = &c.stats;
            assert!(s.rules < input.len().max(1), "rule count bound");
            assert!(s.replacements >= s.rules, "every rule replaces something");
            if !s.fallback {
                assert!(
                    s.peak_words <= s.bound_words,
                    "space bound, case {case} {:?}: {} > {}",
                    opts.variant,
                    s.peak_words,
                    s.bound_words
                );
                // dictionary stayed clear of the reserved codes
                assert!(s.sigma + s.rules <= input.len().saturating_sub(2).max(1));
                // amortization: synchronize work is proportional to the
                // replacements plus the position arrays built
                let work = s.sync_positions as f64;
                let budget = (s.replacements as u64 + s.tp_words_built) as f64;
                if budget > 0.0 {
                    max_work_ratio = max_work_ratio.max(work / budget);
                    assert!(
                        work <= 8.0 * budget,
                        "synchronize work {work} vs budget {budget}, case {case} {:?}",
                        opts.variant
                    );
                }
            }
        }
    }
    println!("max synchronize work ratio observed: {max_work_ratio:.3}");
}

#[test]
fn light_round_growth() {
    // light-variant rounds on structured megascale input stay logarithmic
    let mut r = rng(0xB0B);
    for class in 0..CLASSES {
        let input = corpus_input(&mut r, class, 1 << 16);
        let c = compress(&input, &CompressOptions::light()).unwrap();
        let bound = 65.0 * (input.len() as f64).ln() + 16.0;
        assert!(
            (c.stats.lf_rounds as f64) <= bound,
            "class {class}: {} rounds > {bound}",
            c.stats.lf_rounds
        );
    }
}

#[test]
fn fallback_paths_round_trip() {
    // saturated alphabets and minimal inputs take the reference path
    let mut dense: Vec<u8> = (0..=255).collect();
    for extra in 0..4usize {
        let c = compress(&dense, &CompressOptions::fast(1.0)).unwrap();
        assert_eq!(expand(&c.grammar).unwrap(), dense);
        dense.push((extra * 37) as u8);
    }
    for tiny in [&b"aaa"[..], b"aa", b"ab", b"a", b""] {
        for opts in configs() {
            let c = compress(tiny, &opts).unwrap();
            assert_eq!(expand(&c.grammar).unwrap(), tiny);
        }
    }
}
