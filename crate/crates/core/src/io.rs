//! Bit-exact grammar serialization and the streaming decompressor.
//!
//! File layout, all integers little-endian:
//!
//! ```text
//! magic   4 bytes  "RPSE"
//! version u8       1
//! flags   u8       bit 0: variant (0 fast, 1 light)
//! n       u64      original byte length
//! sigma   u32      alphabet size
//! table   sigma bytes, dense code -> original byte
//! d       u32      rule count
//! rules   d * (u32 left, u32 right); lhs is implicit as sigma + index
//! seq_len u64
//! seq     seq_len * u32 codes
//! ```

use crate::engine::Variant;
use crate::symbols::{AlphabetMap, Grammar, Rule, SymbolCode};
use std::io::{Read, Write};
use thiserror::Error;

pub const MAGIC: [u8; 4] = *b"RPSE";
pub const VERSION: u8 = 1;
const FLAG_LIGHT: u8 = 1;

/// Fixed header bytes: magic, version, flags, n, sigma, d, seq_len.
pub const HEADER_BYTES: usize = 4 + 1 + 1 + 8 + 4 + 4 + 8;

#[derive(Debug, Error)]
pub enum GrammarIoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("not a grammar file (bad magic)")]
    BadMagic,
    #[error("unsupported format version {0}")]
    BadVersion(u8),
    #[error("file truncated while reading {0}")]
    Truncated(&'static str),
    #[error("alphabet table repeats a byte")]
    DuplicateAlphabetByte,
    #[error("symbol code {code} out of range ({limit} symbols defined)")]
    CodeOutOfRange { code: u64, limit: u64 },
    #[error("input length {0} exceeds the 32-bit code space")]
    TooLarge(u64),
    #[error("declared length {declared}, expansion produced {produced}")]
    LengthMismatch { declared: u64, produced: u64 },
}

fn read_exact(
    source: &mut impl Read,
    buf: &mut [u8],
    what: &'static str,
) -> Result<(), GrammarIoError> {
    source.read_exact(buf).map_err(|e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            GrammarIoError::Truncated(what)
        } else {
            GrammarIoError::Io(e)
        }
    })
}

fn read_u32(source: &mut impl Read, what: &'static str) -> Result<u32, GrammarIoError> {
    let mut b = [0u8; 4];
    read_exact(source, &mut b, what)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(source: &mut impl Read, what: &'static str) -> Result<u64, GrammarIoError> {
    let mut b = [0u8; 8];
    read_exact(source, &mut b, what)?;
    Ok(u64::from_le_bytes(b))
}

/// Serialize a grammar. Inputs of `2^32` bytes or more are rejected: codes
/// are stored in 32 bits.
pub fn write_grammar(
    grammar: &Grammar,
    variant: Variant,
    sink: &mut impl Write,
) -> Result<(), GrammarIoError> {
    if grammar.original_length as u64 >= 1 << 32 {
        return Err(GrammarIoError::TooLarge(grammar.original_length as u64));
    }
    debug_assert!(grammar.validate().is_ok());
    sink.write_all(&MAGIC)?;
    sink.write_all(&[VERSION])?;
    let flags = if variant.is_light() { FLAG_LIGHT } else { 0 };
    sink.write_all(&[flags])?;
    sink.write_all(&(grammar.original_length as u64).to_le_bytes())?;
    sink.write_all(&(grammar.alphabet.sigma() as u32).to_le_bytes())?;
    sink.write_all(grammar.alphabet.table())?;
    sink.write_all(&(grammar.rules.len() as u32).to_le_bytes())?;
    for rule in &grammar.rules {
        sink.write_all(&(rule.left as u32).to_le_bytes())?;
        sink.write_all(&(rule.right as u32).to_le_bytes())?;
    }
    sink.write_all(&(grammar.final_sequence.len() as u64).to_le_bytes())?;
    for &code in &grammar.final_sequence {
        sink.write_all(&(code as u32).to_le_bytes())?;
    }
    Ok(())
}

/// Exact serialized size in bytes.
pub fn file_size(grammar: &Grammar) -> usize {
    HEADER_BYTES + grammar.alphabet.sigma() + 8 * grammar.rules.len() + 4 * grammar.final_sequence.len()
}

/// Summary of a grammar file, readable without decoding the body.
#[derive(Debug, Clone, PartialEq)]
pub struct GrammarSummary {
    pub variant: Variant,
    pub original_length: u64,
    pub sigma: u32,
    pub rules: u32,
    pub final_len: u64,
}

fn read_header(
    source: &mut impl Read,
) -> Result<(Variant, u64, AlphabetMap), GrammarIoError> {
    let mut magic = [0u8; 4];
    read_exact(source, &mut magic, "magic")?;
    if magic != MAGIC {
        return Err(GrammarIoError::BadMagic);
    }
    let mut version = [0u8; 1];
    read_exact(source, &mut version, "version")?;
    if version[0] != VERSION {
        return Err(GrammarIoError::BadVersion(version[0]));
    }
    let mut flags = [0u8; 1];
    read_exact(source, &mut flags, "flags")?;
    let variant = if flags[0] & FLAG_LIGHT != 0 {
        Variant::Light
    } else {
        Variant::Fast { epsilon: 1.0 }
    };
    let n = read_u64(source, "length")?;
    let sigma = read_u32(source, "alphabet size")?;
    let mut table = vec![0u8; sigma as usize];
    read_exact(source, &mut table, "alphabet table")?;
    let alphabet =
        AlphabetMap::from_table(&table).ok_or(GrammarIoError::DuplicateAlphabetByte)?;
    Ok((variant, n, alphabet))
}

/// Parse and validate a grammar file.
pub fn read_grammar(source: &mut impl Read) -> Result<(Grammar, Variant), GrammarIoError> {
    let (variant, n, alphabet) = read_header(source)?;
    let sigma = alphabet.sigma() as u64;
    let rule_count = read_u32(source, "rule count")?;
    let mut rules = Vec::with_capacity(rule_count as usize);
    for index in 0..rule_count as u64 {
        let lhs = sigma + index;
        let left = read_u32(source, "rule")? as u64;
        let right = read_u32(source, "rule")? as u64;
        for code in [left, right] {
            // rhs strictly below lhs keeps the grammar acyclic
            if code >= lhs {
                return Err(GrammarIoError::CodeOutOfRange { code, limit: lhs });
            }
        }
        rules.push(Rule {
            lhs: lhs as SymbolCode,
            left: left as SymbolCode,
            right: right as SymbolCode,
        });
    }
    let seq_len = read_u64(source, "sequence length")?;
    let limit = sigma + rule_count as u64;
    let mut final_sequence = Vec::with_capacity(seq_len as usize);
    for _ in 0..seq_len {
        let code = read_u32(source, "sequence")? as u64;
        if code >= limit {
            return Err(GrammarIoError::CodeOutOfRange { code, limit });
        }
        final_sequence.push(code as SymbolCode);
    }
    Ok((
        Grammar {
            alphabet,
            rules,
            final_sequence,
            original_length: n as usize,
        },
        variant,
    ))
}

/// Header and counts only, skipping the rule and sequence bodies.
pub fn read_summary(source: &mut impl Read) -> Result<GrammarSummary, GrammarIoError> {
    let (variant, n, alphabet) = read_header(source)?;
    let rules = read_u32(source, "rule count")?;
    let mut body = std::io::Read::take(source.by_ref(), 8 * rules as u64);
    let skipped = std::io::copy(&mut body, &mut std::io::sink())?;
    if skipped != 8 * rules as u64 {
        return Err(GrammarIoError::Truncated("rule"));
    }
    let final_len = read_u64(source, "sequence length")?;
    Ok(GrammarSummary {
        variant,
        original_length: n,
        sigma: alphabet.sigma() as u32,
        rules,
        final_len,
    })
}

/// Decompress a grammar file onto `sink`, expanding each final-sequence
/// symbol with an explicit stack (no recursion on grammar depth) and an
/// 8 KiB output buffer.
pub fn decompress(
    source: &mut impl Read,
    sink: &mut impl Write,
) -> Result<(), GrammarIoError> {
    let (grammar, _) = read_grammar(source)?;
    let sigma = grammar.alphabet.sigma();
    let mut produced: u64 = 0;
    let mut buffer = Vec::with_capacity(8192);
    let mut stack: Vec<SymbolCode> = Vec::new();
    for &start in &grammar.final_sequence {
        stack.push(start);
        while let Some(code) = stack.pop() {
            if code < sigma {
                buffer.push(grammar.alphabet.original(code).expect("validated code"));
                if buffer.len() == buffer.capacity() {
                    sink.write_all(&buffer)?;
                    produced += buffer.len() as u64;
                    buffer.clear();
                }
            } else {
                let rule = &grammar.rules[code - sigma];
                stack.push(rule.right);
                stack.push(rule.left);
            }
        }
    }
    sink.write_all(&buffer)?;
    produced += buffer.len() as u64;
    if produced != grammar.original_length as u64 {
        return Err(GrammarIoError::LengthMismatch {
            declared: grammar.original_length as u64,
            produced,
        });
    }
    Ok(())
}
