//! Grammar compression with the recursive pairing scheme, engineered for
//! small working space: the rewritable input buffer plus one word arena
//! holding the position array and two bounded priority queues, with blank
//! runs encoded in the text itself for constant-time skipping.
//!
//! The library exposes the compression engine ([`engine`]), the serialized
//! grammar format and decompressor ([`io`]), and a quadratic reference
//! implementation with a rule-stream validator ([`oracle`]) used by the
//! test suite and the `verify` command.

pub mod arena;
pub mod engine;
pub mod io;
pub mod math;
pub mod oracle;
pub mod queues;
pub mod sort;
pub mod symbols;
pub mod text;

pub use arena::{Arena, ArenaAccountant, SpaceBudgetExceeded};
pub use engine::{
    bound_words, compress, compress_stream, CompressError, CompressOptions, CompressStats,
    Compression, StreamOutcome, Variant, DEFAULT_SEED,
};
pub use io::{decompress, file_size, read_grammar, read_summary, write_grammar, GrammarIoError, GrammarSummary};
pub use oracle::{naive_repair, replay_validate, ValidationReport};
pub use symbols::{expand, remap_input, AlphabetMap, Grammar, GrammarError, Pair, Rule, SymbolCode};
pub use text::TextBuffer;
