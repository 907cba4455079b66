//! The word arena and the working-space accountant.
//!
//! The compressor makes a single word allocation per run and carves every
//! working structure (position array, queues, frequency vector) out of it.
//! The accountant registers heap allocations made on top of the rewritable
//! input buffer, in machine words; fixed-size stack locals are not counted.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("working space budget exceeded: needed {needed} words, budget {budget}")]
pub struct SpaceBudgetExceeded {
    pub needed: usize,
    pub budget: usize,
}

/// Tracks working-space words: current usage, the peak, reclaimable words
/// returned by text compactions, and an optional hard budget.
#[derive(Debug, Clone, Default)]
pub struct ArenaAccountant {
    current_words: usize,
    peak_words: usize,
    reclaimable_words: usize,
    budget_words: Option<usize>,
}

impl ArenaAccountant {
    pub fn new(budget_words: Option<usize>) -> Self {
        ArenaAccountant {
            budget_words,
            ..Default::default()
        }
    }

    /// Register an allocation of `words`.
    pub fn alloc(&mut self, words: usize) -> Result<(), SpaceBudgetExceeded> {
        self.current_words += words;
        if let Some(budget) = self.budget_words {
            if self.current_words > budget {
                return Err(SpaceBudgetExceeded {
                    needed: self.current_words,
                    budget,
                });
            }
        }
        self.peak_words = self.peak_words.max(self.current_words);
        Ok(())
    }

    /// Register that an allocation was released.
    pub fn release(&mut self, words: usize) {
        debug_assert!(words <= self.current_words);
        self.current_words = self.current_words.saturating_sub(words);
    }

    /// Note words of the input buffer freed by a compaction; these are
    /// reusable by the light-variant queue without new allocations.
    pub fn note_reclaimable(&mut self, words: usize) {
        self.reclaimable_words += words;
    }

    pub fn current_words(&self) -> usize {
        self.current_words
    }

    pub fn peak_words(&self) -> usize {
        self.peak_words
    }

    pub fn reclaimable_words(&self) -> usize {
        self.reclaimable_words
    }
}

/// A flat word arena; structures address it through index ranges so that
/// several of them can share the one allocation.
#[derive(Debug)]
pub struct Arena {
    words: Vec<usize>,
}

impl Arena {
    pub fn new(
        words: usize,
        accountant: &mut ArenaAccountant,
    ) -> Result<Self, SpaceBudgetExceeded> {
        accountant.alloc(words)?;
        Ok(Arena {
            words: vec![0; words],
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    #[inline]
    pub fn get(&self, idx: usize) -> usize {
        self.words[idx]
    }

    #[inline]
    pub fn set(&mut self, idx: usize, value: usize) {
        self.words[idx] = value;
    }

    pub fn slice(&self, range: core::ops::Range<usize>) -> &[usize] {
        &self.words[range]
    }

    pub fn slice_mut(&mut self, range: core::ops::Range<usize>) -> &mut [usize] {
        &mut self.words[range]
    }
}
