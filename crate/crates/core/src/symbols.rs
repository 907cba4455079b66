//! Symbol codes, alphabet remapping and the grammar produced by compression.
//!
//! All symbols live in one machine word. For an input of length `n` the codes
//! `0 ..= n-3` are available for alphabet characters and dictionary symbols;
//! `n-2` and `n-1` are reserved by [`crate::text::TextBuffer`] for the run
//! delimiter `*` and the blank filler `_`.

use thiserror::Error;

/// A symbol: an alphabet character or a dictionary symbol, one word wide.
pub type SymbolCode = usize;

/// A pair of adjacent symbols.
pub type Pair = (SymbolCode, SymbolCode);

/// Bijection between the distinct bytes of the input and the dense codes
/// `0 .. sigma`, in first-occurrence order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlphabetMap {
    dense_to_original: Vec<u8>,
    original_to_dense: [u16; 256],
}

const UNMAPPED: u16 = u16::MAX;

impl AlphabetMap {
    /// Number of distinct input bytes.
    pub fn sigma(&self) -> usize {
        self.dense_to_original.len()
    }

    /// Dense code of an input byte, if the byte occurs in the input.
    pub fn dense(&self, byte: u8) -> Option<SymbolCode> {
        match self.original_to_dense[byte as usize] {
            UNMAPPED => None,
            c => Some(c as SymbolCode),
        }
    }

    /// Original byte for a dense code `< sigma`.
    pub fn original(&self, code: SymbolCode) -> Option<u8> {
        self.dense_to_original.get(code).copied()
    }

    /// The dense-code-to-byte table, used by the serialized format.
    pub fn table(&self) -> &[u8] {
        &self.dense_to_original
    }

    /// Rebuild a map from a serialized table. Fails on duplicate bytes.
    pub fn from_table(table: &[u8]) -> Option<Self> {
        let mut original_to_dense = [UNMAPPED; 256];
        for (code, &byte) in table.iter().enumerate() {
            if original_to_dense[byte as usize] != UNMAPPED {
                return None;
            }
            original_to_dense[byte as usize] = code as u16;
        }
        Some(AlphabetMap {
            dense_to_original: table.to_vec(),
            original_to_dense,
        })
    }
}

/// Remap the input bytes onto dense codes `0 .. sigma` in first-occurrence
/// order. Returns the remapped sequence together with the map.
pub fn remap_input(input: &[u8]) -> (Vec<SymbolCode>, AlphabetMap) {
    let mut original_to_dense = [UNMAPPED; 256];
    let mut dense_to_original = Vec::new();
    let mut out = Vec::with_capacity(input.len());
    for &byte in input {
        let slot = &mut original_to_dense[byte as usize];
        if *slot == UNMAPPED {
            *slot = dense_to_original.len() as u16;
            dense_to_original.push(byte);
        }
        out.push(*slot as SymbolCode);
    }
    (
        out,
        AlphabetMap {
            dense_to_original,
            original_to_dense,
        },
    )
}

/// A grammar rule `lhs -> left right`. Lhs codes are assigned consecutively
/// starting at `sigma`, in emission order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rule {
    pub lhs: SymbolCode,
    pub left: SymbolCode,
    pub right: SymbolCode,
}

/// The output of a compression run: the alphabet, the rule list and the
/// residual symbol sequence. Expanding `final_sequence` through `rules`
/// reproduces the original input exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grammar {
    pub alphabet: AlphabetMap,
    pub rules: Vec<Rule>,
    pub final_sequence: Vec<SymbolCode>,
    pub original_length: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GrammarError {
    #[error("symbol code {code} is not defined (sigma={sigma}, rules={rules})")]
    UndefinedSymbol {
        code: SymbolCode,
        sigma: usize,
        rules: usize,
    },
    #[error("rule {index} for symbol {lhs} references code {code} >= lhs")]
    ForwardReference {
        index: usize,
        lhs: SymbolCode,
        code: SymbolCode,
    },
    #[error("expansion produced {produced} bytes, grammar declares {declared}")]
    LengthMismatch { produced: usize, declared: usize },
}

impl Grammar {
    /// Total number of symbol codes in use: `sigma + d`.
    pub fn symbol_count(&self) -> usize {
        self.alphabet.sigma() + self.rules.len()
    }

    /// Check structural invariants: consecutive lhs numbering and acyclicity
    /// (rhs codes strictly smaller than their lhs).
    pub fn validate(&self) -> Result<(), GrammarError> {
        let sigma = self.alphabet.sigma();
        for (i, rule) in self.rules.iter().enumerate() {
            let lhs = sigma + i;
            if rule.lhs != lhs {
                return Err(GrammarError::ForwardReference {
                    index: i,
                    lhs: rule.lhs,
                    code: rule.lhs,
                });
            }
            for code in [rule.left, rule.right] {
                if code >= lhs {
                    return Err(GrammarError::ForwardReference {
                        index: i,
                        lhs,
                        code,
                    });
                }
            }
        }
        let total = self.symbol_count();
        for &code in &self.final_sequence {
            if code >= total {
                return Err(GrammarError::UndefinedSymbol {
                    code,
                    sigma,
                    rules: self.rules.len(),
                });
            }
        }
        Ok(())
    }
}

/// Expand a grammar back into the original byte sequence.
///
/// Expansion walks each final-sequence symbol with an explicit stack, so the
/// recursion depth of the grammar does not map onto the call stack.
pub fn expand(grammar: &Grammar) -> Result<Vec<u8>, GrammarError> {
    grammar.validate()?;
    let sigma = grammar.alphabet.sigma();
    let mut out = Vec::with_capacity(grammar.original_length);
    let mut stack: Vec<SymbolCode> = Vec::new();
    for &start in &grammar.final_sequence {
        stack.push(start);
        while let Some(code) = stack.pop() {
            if code < sigma {
                // validate() guarantees the code is mapped
                out.push(grammar.alphabet.original(code).unwrap());
            } else {
                let rule = &grammar.rules[code - sigma];
                stack.push(rule.right);
                stack.push(rule.left);
            }
        }
    }
    if out.len() != grammar.original_length {
        return Err(GrammarError::LengthMismatch {
            produced: out.len(),
            declared: grammar.original_length,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn remap_first_occurrence_order() {
        let (codes, map) = remap_input(b"abab");
        assert_eq!(codes, vec![0, 1, 0, 1]);
        assert_eq!(map.sigma(), 2);
        assert_eq!(map.original(0), Some(b'a'));
        assert_eq!(map.original(1), Some(b'b'));
    }

    #[test]
    fn remap_banana() {
        // first-occurrence order gives b->0, a->1, n->2
        let (codes, map) = remap_input(b"banana");
        assert_eq!(codes, vec![0, 1, 2, 1, 2, 1]);
        assert_eq!(map.sigma(), 3);
        assert_eq!(map.dense(b'n'), Some(2));
    }

    #[test]
    fn remap_roundtrip_table() {
        let (_, map) = remap_input(b"the quick brown fox");
        let rebuilt = AlphabetMap::from_table(map.table()).unwrap();
        assert_eq!(map, rebuilt);
        assert_eq!(AlphabetMap::from_table(&[1, 2, 1]), None);
    }

    /// sigma can exceed n-2 only on tiny inputs; the compressor falls back to
    /// the reference algorithm there. This checks the boundary itself.
    #[test]
    fn sigma_boundary() {
        // n = 257 with 256 distinct bytes: sigma = 256 > n-2 = 255
        let mut input: Vec<u8> = (0..=255).collect();
        input.push(0);
        let (_, map) = remap_input(&input);
        assert!(map.sigma() > input.len() - 2);

        // n = 258 with the same alphabet: sigma = 256 = n-2, no fallback
        input.push(1);
        let (_, map) = remap_input(&input);
        assert!(map.sigma() <= input.len() - 2);
    }

    fn grammar(
        alphabet: &[u8],
        rules: &[(SymbolCode, SymbolCode)],
        final_sequence: &[SymbolCode],
        original_length: usize,
    ) -> Grammar {
        let sigma = alphabet.len();
        Grammar {
            alphabet: AlphabetMap::from_table(alphabet).unwrap(),
            rules: rules
                .iter()
                .enumerate()
                .map(|(i, &(left, right))| Rule {
                    lhs: sigma + i,
                    left,
                    right,
                })
                .collect(),
            final_sequence: final_sequence.to_vec(),
            original_length,
        }
    }

    #[test]
    fn expand_single_rule() {
        // X -> ab, final "XX"
        let g = grammar(b"ab", &[(0, 1)], &[2, 2], 4);
        assert_eq!(expand(&g).unwrap(), b"abab");
    }

    #[test]
    fn expand_no_rules() {
        let g = grammar(b"abc", &[], &[0, 1, 2], 3);
        assert_eq!(expand(&g).unwrap(), b"abc");
    }

    #[test]
    fn expand_abracadabra() {
        // a=0 b=1 r=2 c=3 d=4; X=5->ab, Y=6->ra, Z=7->XY; final "ZcadZ"
        let g = grammar(b"abrcd", &[(0, 1), (2, 0), (5, 6)], &[7, 3, 0, 4, 7], 11);
        assert_eq!(expand(&g).unwrap(), b"abracadabra");
    }

    #[test]
    fn expand_rejects_undefined_code() {
        let g = grammar(b"ab", &[(0, 1)], &[3], 2);
        assert!(matches!(
            expand(&g),
            Err(GrammarError::UndefinedSymbol { code: 3, .. })
        ));
    }

    #[test]
    fn expand_rejects_forward_reference() {
        let mut g = grammar(b"ab", &[(0, 1)], &[2], 2);
        g.rules[0].right = 2; // X -> aX
        assert!(matches!(
            expand(&g),
            Err(GrammarError::ForwardReference { .. })
        ));
    }

    #[test]
    fn expand_checks_declared_length() {
        let g = grammar(b"ab", &[(0, 1)], &[2, 2], 3);
        assert!(matches!(
            expand(&g),
            Err(GrammarError::LengthMismatch {
                produced: 4,
                declared: 3
            })
        ));
    }
}
