//! Classic compact GA with frequency borders `[1/n, 1 − 1/n]`.

use super::sampling::{sample_offspring, select_winner};
use super::{AlgorithmError, Optimizer, Step, TerminalState};
use crate::fitness::Fitness;
use crate::rng::Substreams;

/// `1/⌈√n·ln n⌉`, capped at 1/2.
pub fn default_rho(n: usize) -> f64 {
    let k = ((n as f64).sqrt() * (n as f64).ln()).ceil().max(2.0);
    1.0 / k
}

pub(crate) fn validate_rho(rho: f64) -> Result<(), AlgorithmError> {
    if rho > 0.0 && rho < 1.0 {
        Ok(())
    } else {
        Err(AlgorithmError::InvalidParameter {
            name: "rho",
            value: rho,
            reason: "must lie in (0, 1)",
        })
    }
}

fn borders(n: usize) -> (f64, f64) {
    if n >= 2 {
        (1.0 / n as f64, 1.0 - 1.0 / n as f64)
    } else {
        (0.0, 1.0)
    }
}

/// `τ + ρ·(x_i − y_i)` clamped to the borders.
pub fn cga_update_position(tau: f64, x_i: bool, y_i: bool, rho: f64, n: usize) -> f64 {
    if x_i == y_i {
        return tau;
    }
    let (lo, hi) = borders(n);
    let step = if x_i { rho } else { -rho };
    (tau + step).clamp(lo, hi)
}

#[derive(Debug, Clone)]
pub struct Cga {
    rho: f64,
    freqs: Vec<f64>,
    streams: Substreams,
    iterations: u64,
    evaluations: u64,
}

impl Cga {
    pub fn new(n: usize, rho: f64, seed: u64) -> Result<Self, AlgorithmError> {
        validate_rho(rho)?;
        Ok(Self {
            rho,
            freqs: vec![0.5; n],
            streams: Substreams::new(seed, n),
            iterations: 0,
            evaluations: 0,
        })
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.freqs
    }
}

impl Optimizer for Cga {
    fn step<F: Fitness>(&mut self, f: &F) -> Step {
        let n = self.freqs.len();
        let freqs = &self.freqs;
        let x = sample_offspring(&mut self.streams, 0, n, |i| freqs[i]);
        let y = sample_offspring(&mut self.streams, 1, n, |i| freqs[i]);
        self.iterations += 1;
        self.evaluations += 2;
        let found = [&x, &y].into_iter().find(|z| f.is_optimum(z)).cloned();
        let (winner, loser) = select_winner(x, y, f, self.streams.tie_break());
        for (i, tau) in self.freqs.iter_mut().enumerate() {
            *tau = cga_update_position(*tau, winner.get(i), loser.get(i), self.rho, n);
        }
        match found {
            Some(opt) => Step::Optimum(opt),
            None => Step::Continue,
        }
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
        TerminalState::Frequencies(self.freqs.clone())
    }
}
