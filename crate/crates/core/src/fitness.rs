//! Pseudo-Boolean benchmark functions over packed bit strings.
//!
//! All three functions (OneMax, LeadingOnes, BinVal) share the all-ones string as
//! their unique maximizer. The optimizers only ever need to *order* two
//! individuals, so the hot path works on [`Fitness::cmp_fitness`]; exact numeric
//! values are available through [`FitnessFunction::value`] for reporting.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use thiserror::Error;

const WORD: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FitnessError {
    #[error("length mismatch: expected {expected} bits, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid bit character {0:?}")]
    InvalidBit(char),
    #[error("unknown fitness function {0:?} (expected onemax, leadingones or binval)")]
    UnknownFunction(String),
    #[error("problem size must be at least 1")]
    EmptyProblem,
}

/// Fixed-length bit string stored as packed 64-bit words.
///
/// Position `i` (0-based, leftmost = 0) lives in word `i / 64` at bit `i % 64`.
/// Bits past `len` in the last word are always zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Individual {
    words: Vec<u64>,
    len: usize,
}

impl Individual {
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(WORD)],
            len,
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut x = Self {
            words: vec![u64::MAX; len.div_ceil(WORD)],
            len,
        };
        x.clear_tail();
        x
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut words = Vec::new();
        let mut len = 0;
        for b in bits {
            if len % WORD == 0 {
                words.push(0);
            }
            if b {
                words[len / WORD] |= 1 << (len % WORD);
            }
            len += 1;
        }
        Self { words, len }
    }

    fn clear_tail(&mut self) {
        let rem = self.len % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, bit: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % WORD);
        if bit {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn leading_ones(&self) -> usize {
        let mut total = 0;
        for &w in &self.words {
            let run = w.trailing_ones() as usize;
            total += run;
            if run < WORD {
                break;
            }
        }
        total.min(self.len)
    }

    pub fn is_all_ones(&self) -> bool {
        self.count_ones() == self.len
    }

    /// Lexicographic comparison with position 0 most significant.
    pub fn cmp_lex(&self, other: &Self) -> Ordering {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter().zip(&other.words) {
            let diff = a ^ b;
            if diff != 0 {
                let first = diff.trailing_zeros();
                return if (a >> first) & 1 == 1 {
                    Ordering::Greater
                } else {
                    Ordering::Less
                };
            }
        }
        Ordering::Equal
    }

    /// Packed words, position `i` at word `i / 64`, bit `i % 64`.
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Builds from packed words; bits past `len` are cleared.
    pub fn from_words(words: Vec<u64>, len: usize) -> Self {
        assert_eq!(
            words.len(),
            len.div_ceil(WORD),
            "word count does not match length"
        );
        let mut x = Self { words, len };
        x.clear_tail();
        x
    }

    /// Returns the individual whose bit `j` is this individual's bit `map[j]`.
    pub fn gather(&self, map: &[usize]) -> Self {
        Self::from_bits(map.iter().map(|&src| self.get(src)))
    }
}

impl fmt::Debug for Individual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Individual({self})")
    }
}

impl fmt::Display for Individual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Individual {
    type Err = FitnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(FitnessError::InvalidBit(other)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::from_bits(bits))
    }
}

pub fn one_max(x: &Individual) -> u64 {
    x.count_ones() as u64
}

pub fn leading_ones(x: &Individual) -> u64 {
    x.leading_ones() as u64
}

/// Σ 2^(n-i)·x_i with the leftmost bit most significant.
pub fn bin_val(x: &Individual) -> BigUint {
    let mut value = BigUint::default();
    for b in x.iter() {
        value <<= 1u32;
        if b {
            value += 1u32;
        }
    }
    value
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitnessKind {
    OneMax,
    LeadingOnes,
    BinVal,
}

impl FitnessKind {
    pub const ALL: [FitnessKind; 3] = [
        FitnessKind::OneMax,
        FitnessKind::LeadingOnes,
        FitnessKind::BinVal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FitnessKind::OneMax => "onemax",
            FitnessKind::LeadingOnes => "leadingones",
            FitnessKind::BinVal => "binval",
        }
    }
}

impl fmt::Display for FitnessKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FitnessKind {
    type Err = FitnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "onemax" => Ok(FitnessKind::OneMax),
            "leadingones" => Ok(FitnessKind::LeadingOnes),
            "binval" => Ok(FitnessKind::BinVal),
            _ => Err(FitnessError::UnknownFunction(s.to_string())),
        }
    }
}

/// Order-only view of a fitness function, which is all the optimizers consume.
pub trait Fitness: Sync {
    fn dimension(&self) -> usize;

    /// Compares `x` against `y`; both must have length [`Fitness::dimension`].
    fn cmp_fitness(&self, x: &Individual, y: &Individual) -> Ordering;

    fn is_optimum(&self, x: &Individual) -> bool;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FitnessFunction {
    pub kind: FitnessKind,
    pub n: usize,
}

impl FitnessFunction {
    pub fn new(kind: FitnessKind, n: usize) -> Result<Self, FitnessError> {
        if n == 0 {
            return Err(FitnessError::EmptyProblem);
        }
        Ok(Self { kind, n })
    }

    fn check(&self, x: &Individual) -> Result<(), FitnessError> {
        if x.len() != self.n {
            return Err(FitnessError::LengthMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Exact numeric fitness. BinVal uses arbitrary precision.
    pub fn value(&self, x: &Individual) -> Result<BigUint, FitnessError> {
        self.check(x)?;
        Ok(match self.kind {
            FitnessKind::OneMax => BigUint::from(one_max(x)),
            FitnessKind::LeadingOnes => BigUint::from(leading_ones(x)),
            FitnessKind::BinVal => bin_val(x),
        })
    }

    /// `Greater` means `x` is strictly better.
    pub fn compare(&self, x: &Individual, y: &Individual) -> Result<Ordering, FitnessError> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.cmp_fitness(x, y))
    }
}

impl Fitness for FitnessFunction {
    fn dimension(&self) -> usize {
        self.n
    }

    fn cmp_fitness(&self, x: &Individual, y: &Individual) -> Ordering {
        match self.kind {
            FitnessKind::OneMax => x.count_ones().cmp(&y.count_ones()),
            FitnessKind::LeadingOnes => x.leading_ones().cmp(&y.leading_ones()),
            FitnessKind::BinVal => x.cmp_lex(y),
        }
    }

    fn is_optimum(&self, x: &Individual) -> bool {
        x.is_all_ones()
    }
}

/// `f ∘ σ⁻¹`: position `j` of the argument plays the role of position `map[j]`
/// of the wrapped function.
///
/// If an optimizer on `f` draws position `i` from stream `i`, then running it on
/// `Permuted { map }` with position `j` drawing from stream `map[j]` produces the
/// same trajectory with positions relabelled by `map`.
pub struct Permuted<F> {
    inner: F,
    inverse: Vec<usize>,
}

impl<F: Fitness> Permuted<F> {
    /// `map` must be a permutation of `0..inner.dimension()`.
    pub fn new(inner: F, map: &[usize]) -> Self {
        let mut inverse = vec![usize::MAX; map.len()];
        for (j, &i) in map.iter().enumerate() {
            inverse[i] = j;
        }
        assert!(
            map.len() == inner.dimension() && inverse.iter().all(|&j| j != usize::MAX),
            "map is not a permutation"
        );
        Self { inner, inverse }
    }

    fn unpermute(&self, x: &Individual) -> Individual {
        x.gather(&self.inverse)
    }
}

impl<F: Fitness> Fitness for Permuted<F> {
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    fn cmp_fitness(&self, x: &Individual, y: &Individual) -> Ordering {
        self.inner
            .cmp_fitness(&self.unpermute(x), &self.unpermute(y))
    }

    fn is_optimum(&self, x: &Individual) -> bool {
        self.inner.is_optimum(&self.unpermute(x))
    }
}
