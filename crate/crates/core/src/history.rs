//! Per-position winner-bit histories with suffix one-counts.
//!
//! Two storage modes sit behind [`History`]:
//!
//! * [`ExactHistory`] keeps every bit plus a rolling one-count for each window of
//!   length `2^m ≤ |H|`, so `ones_in_suffix(2^m)` is exact and O(1).
//! * [`CondensedHistory`] keeps only a list of power-of-two blocks, using
//!   logarithmic memory. A suffix query of length `len` is answered over the
//!   shortest whole-block suffix of length `ℓ' ∈ [len, 2·len)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HistoryError {
    #[error("suffix length {len} is not a power of two")]
    NotPowerOfTwo { len: u64 },
    #[error("suffix length {len} outside 1..={available}")]
    OutOfRange { len: u64, available: u64 },
    #[error("unknown history mode {0:?} (expected exact or condensed)")]
    UnknownMode(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HistoryMode {
    #[default]
    Exact,
    Condensed,
}

impl HistoryMode {
    pub fn name(self) -> &'static str {
        match self {
            HistoryMode::Exact => "exact",
            HistoryMode::Condensed => "condensed",
        }
    }
}

impl fmt::Display for HistoryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for HistoryMode {
    type Err = HistoryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(HistoryMode::Exact),
            "condensed" => Ok(HistoryMode::Condensed),
            _ => Err(HistoryError::UnknownMode(s.to_string())),
        }
    }
}

/// Append-only bit sequence with cached one-counts over every power-of-two suffix.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExactHistory {
    words: Vec<u64>,
    len: u64,
    /// `suffix_ones[m]` = ones among the last `2^m` bits; one entry per `2^m ≤ len`.
    suffix_ones: Vec<u64>,
    total_ones: u64,
}

impl ExactHistory {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn len(&self) -> u64 {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn total_ones(&self) -> u64 {
        self.total_ones
    }

    #[inline]
    fn bit(&self, idx: u64) -> u64 {
        (self.words[(idx / 64) as usize] >> (idx % 64)) & 1
    }

    pub fn append(&mut self, bit: bool) {
        let old = self.len;
        let b = bit as u64;
        // Each existing window slides by one: the bit at old - 2^m leaves it.
        for (m, count) in self.suffix_ones.iter_mut().enumerate() {
            let leaving = old - (1u64 << m);
            let out = (self.words[(leaving / 64) as usize] >> (leaving % 64)) & 1;
            *count = *count + b - out;
        }
        if old.is_multiple_of(64) {
            self.words.push(0);
        }
        self.words[(old / 64) as usize] |= b << (old % 64);
        self.len = old + 1;
        self.total_ones += b;
        if self.len.is_power_of_two() {
            self.suffix_ones.push(self.total_ones);
        }
    }

    /// Ones among the last `len` bits; `len` must be a power of two `≤ |H|`.
    pub fn ones_in_suffix(&self, len: u64) -> Result<u64, HistoryError> {
        if len == 0 || len > self.len {
            return Err(HistoryError::OutOfRange {
                len,
                available: self.len,
            });
        }
        if !len.is_power_of_two() {
            return Err(HistoryError::NotPowerOfTwo { len });
        }
        Ok(self.suffix_ones[len.trailing_zeros() as usize])
    }

    /// Cached counts, index `m` covering the last `2^m` bits.
    pub fn suffix_counts(&self) -> &[u64] {
        &self.suffix_ones
    }

    /// Ones among the last `len` bits by direct recount.
    pub fn naive_ones_in_suffix(&self, len: u64) -> u64 {
        (self.len - len..self.len).map(|i| self.bit(i)).sum()
    }

    pub fn reset(&mut self) {
        self.words.clear();
        self.len = 0;
        self.suffix_ones.clear();
        self.total_ones = 0;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Block {
    pub span: u64,
    pub ones: u64,
}

/// Condensed history: power-of-two blocks, earliest first.
///
/// After every append, for the largest span `2^k` present, each span `2^j` with
/// `j ≤ k` occurs once or twice.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CondensedHistory {
    blocks: Vec<Block>,
    total_length: u64,
    total_ones: u64,
}

impl CondensedHistory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    #[inline]
    pub fn len(&self) -> u64 {
        self.total_length
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.total_length == 0
    }

    pub fn total_ones(&self) -> u64 {
        self.total_ones
    }

    /// Appends a span-1 block, then merges the two earliest of any three
    /// consecutive equal-span blocks until no such triple remains. Returns the
    /// number of merges performed.
    pub fn append(&mut self, bit: bool) -> usize {
        self.blocks.push(Block {
            span: 1,
            ones: bit as u64,
        });
        self.total_length += 1;
        self.total_ones += bit as u64;

        // A merge at (k-2, k-1) can only create a new triple ending at k-2.
        let mut merges = 0;
        let mut end = self.blocks.len() - 1;
        while end >= 2 {
            let span = self.blocks[end].span;
            if self.blocks[end - 1].span != span || self.blocks[end - 2].span != span {
                break;
            }
            let later = self.blocks.remove(end - 1);
            let merged = &mut self.blocks[end - 2];
            merged.span += later.span;
            merged.ones += later.ones;
            merges += 1;
            end -= 2;
        }
        merges
    }

    /// Shortest whole-block suffix covering at least `len` bits, as
    /// `(effective_len, ones)` with `len ≤ effective_len < 2·len`.
    pub fn ones_in_block_suffix(&self, len: u64) -> Result<(u64, u64), HistoryError> {
        if len == 0 || len > self.total_length {
            return Err(HistoryError::OutOfRange {
                len,
                available: self.total_length,
            });
        }
        let mut span = 0;
        let mut ones = 0;
        for block in self.blocks.iter().rev() {
            span += block.span;
            ones += block.ones;
            if span >= len {
                break;
            }
        }
        Ok((span, ones))
    }

    /// Checks the one-or-two-blocks-per-span property and block ordering.
    pub fn structure_ok(&self) -> bool {
        if self.blocks.is_empty() {
            return self.total_length == 0;
        }
        let mut expected = 1u64;
        let mut run = 0;
        for block in self.blocks.iter().rev() {
            if !block.span.is_power_of_two() || block.ones > block.span {
                return false;
            }
            if block.span == expected {
                run += 1;
            } else if block.span == expected * 2 && run >= 1 {
                expected *= 2;
                run = 1;
            } else {
                return false;
            }
            if run > 2 {
                return false;
            }
        }
        self.blocks.iter().map(|b| b.span).sum::<u64>() == self.total_length
            && self.blocks.iter().map(|b| b.ones).sum::<u64>() == self.total_ones
    }

    pub fn reset(&mut self) {
        self.blocks.clear();
        self.total_length = 0;
        self.total_ones = 0;
    }
}

/// One history in either storage mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum History {
    Exact(ExactHistory),
    Condensed(CondensedHistory),
}

impl History {
    pub fn new(mode: HistoryMode) -> Self {
        match mode {
            HistoryMode::Exact => History::Exact(ExactHistory::new()),
            HistoryMode::Condensed => History::Condensed(CondensedHistory::new()),
        }
    }

    pub fn mode(&self) -> HistoryMode {
        match self {
            History::Exact(_) => HistoryMode::Exact,
            History::Condensed(_) => HistoryMode::Condensed,
        }
    }

    #[inline]
    pub fn len(&self) -> u64 {
        match self {
            History::Exact(h) => h.len(),
            History::Condensed(h) => h.len(),
        }
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn append(&mut self, bit: bool) {
        match self {
            History::Exact(h) => h.append(bit),
            History::Condensed(h) => {
                h.append(bit);
            }
        }
    }

    /// `(effective_len, ones)` for a requested power-of-two suffix `len ≤ |H|`.
    /// Exact mode always returns `effective_len == len`.
    #[inline]
    pub fn suffix(&self, len: u64) -> Result<(u64, u64), HistoryError> {
        match self {
            History::Exact(h) => h.ones_in_suffix(len).map(|ones| (len, ones)),
            History::Condensed(h) => h.ones_in_block_suffix(len),
        }
    }

    pub fn reset(&mut self) {
        match self {
            History::Exact(h) => h.reset(),
            History::Condensed(h) => h.reset(),
        }
    }
}
