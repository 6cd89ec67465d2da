//! Significance-based compact GA.
//!
//! Each position holds a frequency in `{1/n, 1/2, 1 − 1/n}` and a history of
//! winner bits since that frequency last changed. After every iteration all
//! histories grow by the winner's bit; a position whose history shows a
//! significant surplus (see [`crate::significance::sig`]) jumps to `1 − 1/n`
//! (up) or `1/n` (down) and starts a fresh history.

use serde::{Deserialize, Serialize};

use super::sampling::{sample_offspring, select_winner};
use super::{AlgorithmError, Optimizer, Step, TerminalState};
use crate::fitness::{Fitness, Individual};
use crate::history::{History, HistoryMode};
use crate::rng::Substreams;
use crate::significance::{sig, Level, SignificanceParams, Verdict, DEFAULT_EPSILON};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigCgaConfig {
    pub epsilon: f64,
    pub history_mode: HistoryMode,
}

impl Default for SigCgaConfig {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
            history_mode: HistoryMode::Exact,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SigCga {
    n: usize,
    levels: Vec<Level>,
    histories: Vec<History>,
    /// `None` for `n = 1`, where `ln n = 0` leaves the threshold undefined and
    /// the frequency simply stays at 1/2.
    params: Option<SignificanceParams>,
    streams: Substreams,
    iterations: u64,
    evaluations: u64,
}

impl SigCga {
    pub fn new(n: usize, config: &SigCgaConfig, seed: u64) -> Result<Self, AlgorithmError> {
        Self::with_streams(n, config, Substreams::new(seed, n))
    }

    /// Position `j` draws from the streams of position `map[j]`.
    pub fn with_position_map(
        config: &SigCgaConfig,
        seed: u64,
        map: &[usize],
    ) -> Result<Self, AlgorithmError> {
        Self::with_streams(map.len(), config, Substreams::with_position_map(seed, map))
    }

    fn with_streams(
        n: usize,
        config: &SigCgaConfig,
        streams: Substreams,
    ) -> Result<Self, AlgorithmError> {
        let params = if n >= 2 {
            Some(SignificanceParams::new(config.epsilon, n)?)
        } else {
            None
        };
        Ok(Self {
            n,
            levels: vec![Level::Half; n],
            histories: vec![History::new(config.history_mode); n],
            params,
            streams,
            iterations: 0,
            evaluations: 0,
        })
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn histories(&self) -> &[History] {
        &self.histories
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.value(self.n)).collect()
    }

    /// One iteration: sample, select, append winner bits, test significance.
    /// Returns the sampled pair as `(first, second)` along with the step outcome.
    pub fn step_with_samples<F: Fitness>(&mut self, f: &F) -> (Step, Individual, Individual) {
        let n = self.n;
        let levels = &self.levels;
        let x = sample_offspring(&mut self.streams, 0, n, |i| levels[i].value(n));
        let y = sample_offspring(&mut self.streams, 1, n, |i| levels[i].value(n));
        self.iterations += 1;
        self.evaluations += 2;

        let found = [&x, &y].into_iter().find(|z| f.is_optimum(z)).cloned();
        let (winner, _) = select_winner(x.clone(), y.clone(), f, self.streams.tie_break());

        for i in 0..n {
            let history = &mut self.histories[i];
            history.append(winner.get(i));
            let Some(params) = &self.params else { continue };
            let level = self.levels[i];
            let next = match sig(level, history, params).verdict {
                Verdict::Up => Level::High,
                Verdict::Down => Level::Low,
                Verdict::Stay => level,
            };
            if next != level {
                self.levels[i] = next;
                history.reset();
            }
        }

        let step = match found {
            Some(opt) => Step::Optimum(opt),
            None => Step::Continue,
        };
        (step, x, y)
    }
}

impl Optimizer for SigCga {
    fn step<F: Fitness>(&mut self, f: &F) -> Step {
        self.step_with_samples(f).0
    }

    fn evaluations(&self) -> u64 {
        self.evaluations
    }

    fn iterations(&self) -> u64 {
        self.iterations
    }

    fn next_step_cost(&self) -> u64 {
        2
    }

    fn terminal_state(&self) -> TerminalState {
        TerminalState::Frequencies(self.frequencies())
    }
}
