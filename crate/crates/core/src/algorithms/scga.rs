//! Stable compact GA: a cGA whose updates are biased toward 1/2 and whose
//! frequencies commit to 0 or 1 for good once they reach the borders `1 − d` / `d`.

use serde::{Deserialize, Serialize};

use super::sampling::{sample_offspring, select_winner};
use super::{AlgorithmError, FailureKind, Optimizer, Step, TerminalState};
use crate::fitness::Fitness;
use crate::rng::Substreams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScgaParams {
    /// Step size ρ.
    pub rho: f64,
    /// Extra step toward 1/2.
    pub a: f64,
    /// Commit border in (1/2, 1).
    pub d: f64,
}

impl ScgaParams {
    /// `ρ = 1/(2 ln n)`, `a = ρ/2`, `d = 5/6`. For `n < 3` the logarithm is taken
    /// at 3 so that `ρ + a` stays below 1/2.
    pub fn defaults_for(n: usize) -> Self {
        let rho = 1.0 / (2.0 * (n.max(3) as f64).ln());
        Self {
            rho,
            a: rho / 2.0,
            d: 5.0 / 6.0,
        }
    }

    pub fn validate(&self) -> Result<(), AlgorithmError> {
        let bad = |name, value, reason| {
            Err(AlgorithmError::InvalidParameter {
                name,
                value,
                reason,
            })
        };
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return bad("rho", self.rho, "must lie in (0, 1)");
        }
        if !(self.a >= 0.0 && self.a.is_finite()) {
            return bad("a", self.a, "must be non-negative");
        }
        if !(self.d > 0.5 && self.d < 1.0) {
            return bad("d", self.d, "must lie in (1/2, 1)");
        }
        Ok(())
    }
}

/// New frequency at one position given the winner bit `x_i` and loser bit `y_i`.
/// All branch conditions read the pre-update value.
pub fn scga_update_position(tau: f64, x_i: bool, y_i: bool, p: &ScgaParams) -> f64 {
    let next = match (x_i, y_i) {
        (true, false) => {
            if tau <= 0.5 {
                tau + p.rho + p.a
            } else if tau < p.d {
                tau + p.rho
            } else {
                1.0
            }
        }
        (false, true) => {
            if tau >= 0.5 {
                tau - p.rho - p.a
            } else if tau > 1.0 - p.d {
                tau - p.rho
            } else {
                0.0
            }
        }
        _ => return tau,
    };
    next.clamp(0.0, 1.0)
}

#[derive(Debug, Clone)]
pub struct Scga {
    params: ScgaParams,
    freqs: Vec<f64>,
    streams: Substreams,
    iterations: u64,
    evaluations: u64,
    band_exit: Option<u64>,
    stop_on_band_exit: bool,
}

impl Scga {
    pub fn new(n: usize, params: ScgaParams, seed: u64) -> Result<Self, AlgorithmError> {
        params.validate()?;
        Ok(Self {
            params,
            freqs: vec![0.5; n],
            streams: Substreams::new(seed, n),
            iterations: 0,
            evaluations: 0,
            band_exit: None,
            stop_on_band_exit: false,
        })
    }

    /// Halt with [`FailureKind::LeftBand`] once some frequency leaves `(1 − d, d)`.
    pub fn stop_on_band_exit(&mut self, stop: bool) {
        self.stop_on_band_exit = stop;
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.freqs
    }

    pub fn band_exit(&self) -> Option<u64> {
        self.band_exit
    }
}

impl Optimizer for Scga {
    fn step<F: Fitness>(&mut self, f: &F) -> Step {
        let n = self.freqs.len();
        let freqs = &self.freqs;
        let x = sample_offspring(&mut self.streams, 0, n, |i| freqs[i]);
        let y = sample_offspring(&mut self.streams, 1, n, |i| freqs[i]);
        self.iterations += 1;
        self.evaluations += 2;
        let found = [&x, &y].into_iter().find(|z| f.is_optimum(z)).cloned();
        let (winner, loser) = select_winner(x, y, f, self.streams.tie_break());

        let (lo, hi) = (1.0 - self.params.d, self.params.d);
        let mut outside = false;
        for (i, tau) in self.freqs.iter_mut().enumerate() {
            *tau = scga_update_position(*tau, winner.get(i), loser.get(i), &self.params);
            outside |= *tau <= lo || *tau >= hi;
        }
        if outside && self.band_exit.is_none() {
            self.band_exit = Some(self.iterations);
        }

        match found {
            Some(opt) => Step::Optimum(opt),
            None if outside && self.stop_on_band_exit => Step::Halt(FailureKind::LeftBand),
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

    fn band_exit_iteration(&self) -> Option<u64> {
        self.band_exit
    }
}
