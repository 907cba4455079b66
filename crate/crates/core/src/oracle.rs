//! Reference compressor and replay validator.
//!
//! [`naive_repair`] is the straightforward quadratic algorithm over an
//! explicit symbol array: count every adjacent pair, replace the most
//! frequent one greedily left to right, repeat until nothing occurs twice.
//! It doubles as the fallback path for inputs too small to host the
//! in-place engine's reserved codes.
//!
//! [`replay_validate`] replays an arbitrary rule stream over the same input
//! and checks, rule by rule, that the replaced pair was a most frequent one
//! at that moment. Tie choices are accepted: eviction and postponement can
//! legitimately break ties differently without breaking the guarantee.

use crate::symbols::{remap_input, Grammar, Pair, Rule};
use std::collections::HashMap;

/// Compute the grammar with the reference algorithm. Ties on frequency go to
/// the numerically smallest pair.
pub fn naive_repair(input: &[u8]) -> Grammar {
    let (mut symbols, alphabet) = remap_input(input);
    let sigma = alphabet.sigma();
    let mut rules = Vec::new();
    while let Some((pair, count)) = most_frequent(&symbols) {
        if count < 2 {
            break;
        }
        let lhs = sigma + rules.len();
        rules.push(Rule {
            lhs,
            left: pair.0,
            right: pair.1,
        });
        replace_greedy(&mut symbols, pair, lhs);
    }
    Grammar {
        alphabet,
        rules,
        final_sequence: symbols,
        original_length: input.len(),
    }
}

fn most_frequent(symbols: &[usize]) -> Option<(Pair, usize)> {
    let mut counts: HashMap<Pair, usize> = HashMap::new();
    for w in symbols.windows(2) {
        *counts.entry((w[0], w[1])).or_default() += 1;
    }
    counts
        .into_iter()
        .max_by_key(|&(pair, count)| (count, core::cmp::Reverse(pair)))
}

fn replace_greedy(symbols: &mut Vec<usize>, pair: Pair, lhs: usize) {
    let mut out = Vec::with_capacity(symbols.len());
    let mut i = 0;
    while i < symbols.len() {
        if i + 1 < symbols.len() && (symbols[i], symbols[i + 1]) == pair {
            out.push(lhs);
            i += 2;
        } else {
            out.push(symbols[i]);
            i += 1;
        }
    }
    *symbols = out;
}

/// Outcome of replaying one rule.
#[derive(Debug, Clone, Copy)]
pub struct RuleCheck {
    pub rule: Rule,
    /// Positional frequency of the rule's pair when it was applied.
    pub frequency: usize,
    /// Highest positional frequency of any pair at that moment.
    pub max_frequency: usize,
    /// Lhs code expected from consecutive numbering.
    pub expected_lhs: usize,
}

impl RuleCheck {
    pub fn passed(&self) -> bool {
        self.frequency >= 2
            && self.frequency == self.max_frequency
            && self.rule.lhs == self.expected_lhs
    }
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub checks: Vec<RuleCheck>,
    /// Highest pair frequency left after all rules were applied.
    pub residual_max: usize,
    /// The residual text the rules leave behind.
    pub residual: Vec<usize>,
}

impl ValidationReport {
    /// True when every rule replaced a most-frequent pair of frequency >= 2
    /// and no pair occurs twice in the residual.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(RuleCheck::passed) && self.residual_max < 2
    }

    pub fn first_failure(&self) -> Option<usize> {
        self.checks.iter().position(|c| !c.passed())
    }
}

/// Replay a rule stream over `input`, collecting per-rule verdicts instead
/// of failing fast.
pub fn replay_validate(input: &[u8], rules: &[Rule]) -> ValidationReport {
    let (mut symbols, alphabet) = remap_input(input);
    let sigma = alphabet.sigma();
    let mut checks = Vec::with_capacity(rules.len());
    for (i, rule) in rules.iter().enumerate() {
        let pair = (rule.left, rule.right);
        let mut frequency = 0usize;
        let mut max_frequency = 0usize;
        let mut counts: HashMap<Pair, usize> = HashMap::new();
        for w in symbols.windows(2) {
            let c = counts.entry((w[0], w[1])).or_default();
            *c += 1;
            max_frequency = max_frequency.max(*c);
        }
        if let Some(&c) = counts.get(&pair) {
            frequency = c;
        }
        checks.push(RuleCheck {
            rule: *rule,
            frequency,
            max_frequency,
            expected_lhs: sigma + i,
        });
        replace_greedy(&mut symbols, pair, rule.lhs);
    }
    let residual_max = most_frequent(&symbols).map_or(0, |(_, c)| c);
    ValidationReport {
        checks,
        residual_max,
        residual: symbols,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::expand;

    #[test]
    fn abracadabra_grammar() {
        let g = naive_repair(b"abracadabra");
        // a=0 b=1 r=2 c=3 d=4: X->ab, Y->ra, Z->XY leaving "ZcadZ"
        assert_eq!(
            g.rules,
            vec![
                Rule { lhs: 5, left: 0, right: 1 },
                Rule { lhs: 6, left: 2, right: 0 },
                Rule { lhs: 7, left: 5, right: 6 },
            ]
        );
        assert_eq!(g.final_sequence, vec![7, 3, 0, 4, 7]);
        assert_eq!(expand(&g).unwrap(), b"abracadabra");
    }

    #[test]
    fn abab_and_abc() {
        let g = naive_repair(b"abab");
        assert_eq!(g.rules, vec![Rule { lhs: 2, left: 0, right: 1 }]);
        assert_eq!(g.final_sequence, vec![2, 2]);

        let g = naive_repair(b"abc");
        assert!(g.rules.is_empty());
        assert_eq!(g.final_sequence, vec![0, 1, 2]);
    }

    #[test]
    fn overlapping_runs() {
        // "aaaa": frequency 3, two greedy replacements
        let g = naive_repair(b"aaaa");
        assert_eq!(g.rules, vec![Rule { lhs: 1, left: 0, right: 0 }]);
        assert_eq!(g.final_sequence, vec![1, 1]);
        assert_eq!(expand(&g).unwrap(), b"aaaa");
    }

    #[test]
    fn replay_accepts_own_output() {
        for input in [&b"abracadabra"[..], b"abab", b"aaaa", b"mississippi"] {
            let g = naive_repair(input);
            let report = replay_validate(input, &g.rules);
            assert!(report.passed(), "replay failed on {input:?}");
            assert_eq!(report.residual, g.final_sequence);
        }
    }

    #[test]
    fn replay_rejects_swapped_order() {
        // replacing a frequency-1 pair first must fail at that rule
        let g = naive_repair(b"abracadabra");
        let mut swapped = g.rules.clone();
        swapped.swap(0, 2); // Z->XY first references undefined symbols
        let report = replay_validate(b"abracadabra", &swapped);
        assert!(!report.passed());
        assert_eq!(report.first_failure(), Some(0));
    }

    #[test]
    fn replay_empty_rules() {
        let report = replay_validate(b"abc", &[]);
        assert!(report.passed());
        assert_eq!(report.residual_max, 1);
    }
}
