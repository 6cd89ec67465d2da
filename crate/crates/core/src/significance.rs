//! Significance threshold and the three-case significance test on a history.
//!
//! A history at frequency level `τ` is scanned over suffixes of length `2^m`,
//! `m = 0, 1, …` with `2^m ≤ |H|`, stopping at the first length whose count of
//! the rare value (ones at `1/n`, zeros at `1 − 1/n`, either at `1/2`) reaches
//! `μ + s(ε, μ)` where `μ = 2^m · min(τ, 1 − τ)` and
//! `s(ε, μ) = ε · max{√(μ ln n), ln n}`.

use std::fmt;

use thiserror::Error;

use crate::history::History;

/// Below this value of ε the run-time guarantees no longer apply.
pub const RECOMMENDED_MIN_EPSILON: f64 = 12.0;

pub const DEFAULT_EPSILON: f64 = 13.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SignificanceError {
    #[error("epsilon must be positive and finite, got {0}")]
    InvalidEpsilon(f64),
    #[error("expectation must be non-negative, got {0}")]
    InvalidExpectation(f64),
    #[error("problem size must be at least 2 for the significance threshold, got {0}")]
    ProblemTooSmall(usize),
    #[error("frequency {tau} is not one of 1/n, 1/2, 1-1/n for n = {n}")]
    NotAdmissible { tau: f64, n: usize },
}

/// `ε · max{√(μ ln n), ln n}`.
pub fn threshold(epsilon: f64, mu: f64, n: usize) -> Result<f64, SignificanceError> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(SignificanceError::InvalidEpsilon(epsilon));
    }
    if mu.is_nan() || mu < 0.0 {
        return Err(SignificanceError::InvalidExpectation(mu));
    }
    if n < 2 {
        return Err(SignificanceError::ProblemTooSmall(n));
    }
    Ok(raw_threshold(epsilon, mu, (n as f64).ln()))
}

#[inline]
fn raw_threshold(epsilon: f64, mu: f64, ln_n: f64) -> f64 {
    epsilon * (mu * ln_n).sqrt().max(ln_n)
}

/// The three frequency values a sig-cGA position can take.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    /// `1/n`
    Low,
    /// `1/2`
    Half,
    /// `1 − 1/n`
    High,
}

impl Level {
    pub fn value(self, n: usize) -> f64 {
        match self {
            Level::Low => 1.0 / n as f64,
            Level::Half => 0.5,
            Level::High => 1.0 - 1.0 / n as f64,
        }
    }

    pub fn from_frequency(tau: f64, n: usize) -> Result<Self, SignificanceError> {
        [Level::Half, Level::Low, Level::High]
            .into_iter()
            .find(|level| level.value(n) == tau)
            .ok_or(SignificanceError::NotAdmissible { tau, n })
    }

    fn index(self) -> usize {
        match self {
            Level::Low => 0,
            Level::Half => 1,
            Level::High => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Up,
    Down,
    Stay,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Up => "up",
            Verdict::Down => "down",
            Verdict::Stay => "stay",
        })
    }
}

/// Outcome of a scan; `trigger` is the power-of-two suffix length that fired.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SigVerdict {
    pub verdict: Verdict,
    pub trigger: Option<u64>,
}

impl SigVerdict {
    pub const STAY: SigVerdict = SigVerdict {
        verdict: Verdict::Stay,
        trigger: None,
    };

    fn fired(verdict: Verdict, len: u64) -> Self {
        Self {
            verdict,
            trigger: Some(len),
        }
    }
}

const MAX_LOG_LEN: usize = 64;

#[derive(Debug, Clone)]
pub struct SignificanceParams {
    epsilon: f64,
    n: usize,
    ln_n: f64,
    /// `required[level][m] = 2^m·τ' + s(ε, 2^m·τ')` for the exact-length scan.
    required: [Vec<f64>; 3],
}

impl SignificanceParams {
    pub fn new(epsilon: f64, n: usize) -> Result<Self, SignificanceError> {
        threshold(epsilon, 0.0, n)?;
        if epsilon <= RECOMMENDED_MIN_EPSILON {
            log::warn!("epsilon = {epsilon} is at most {RECOMMENDED_MIN_EPSILON}; run-time guarantees assume a larger value");
        }
        let ln_n = (n as f64).ln();
        let table = |rare: f64| -> Vec<f64> {
            (0..MAX_LOG_LEN)
                .map(|m| {
                    let mu = (1u64 << m) as f64 * rare;
                    mu + raw_threshold(epsilon, mu, ln_n)
                })
                .collect()
        };
        let inv_n = 1.0 / n as f64;
        Ok(Self {
            epsilon,
            n,
            ln_n,
            required: [table(inv_n), table(0.5), table(inv_n)],
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Probability of the value whose surplus triggers a change at `level`.
    fn rare_probability(&self, level: Level) -> f64 {
        match level {
            Level::Half => 0.5,
            Level::Low | Level::High => 1.0 / self.n as f64,
        }
    }

    /// `μ + s(ε, μ)` for an expectation over `len` bits at `level`.
    pub fn required_count(&self, level: Level, len: u64) -> f64 {
        if len.is_power_of_two() {
            return self.required[level.index()][len.trailing_zeros() as usize];
        }
        let mu = len as f64 * self.rare_probability(level);
        mu + raw_threshold(self.epsilon, mu, self.ln_n)
    }
}

/// Verdict at a single suffix of `eff_len` bits holding `ones` ones.
#[inline]
fn verdict_at(level: Level, eff_len: u64, ones: u64, required: f64) -> Verdict {
    let zeros = eff_len - ones;
    match level {
        Level::Half if ones as f64 >= required => Verdict::Up,
        Level::Half if zeros as f64 >= required => Verdict::Down,
        Level::Low if ones as f64 >= required => Verdict::Up,
        Level::High if zeros as f64 >= required => Verdict::Down,
        _ => Verdict::Stay,
    }
}

/// Scans `history` at frequency `level`. In condensed mode the expectation is
/// taken over the effective (whole-block) length of each suffix.
pub fn sig(level: Level, history: &History, params: &SignificanceParams) -> SigVerdict {
    match history {
        History::Exact(h) => {
            let table = &params.required[level.index()];
            for (m, &ones) in h.suffix_counts().iter().enumerate() {
                let len = 1u64 << m;
                let v = verdict_at(level, len, ones, table[m]);
                if v != Verdict::Stay {
                    return SigVerdict::fired(v, len);
                }
            }
            SigVerdict::STAY
        }
        History::Condensed(h) => {
            let mut len = 1u64;
            while len <= h.len() {
                let (eff, ones) = h
                    .ones_in_block_suffix(len)
                    .expect("suffix length within history");
                let v = verdict_at(level, eff, ones, params.required_count(level, eff));
                if v != Verdict::Stay {
                    return SigVerdict::fired(v, len);
                }
                len <<= 1;
            }
            SigVerdict::STAY
        }
    }
}
