//! Convex search algorithm.
//!
//! Each generation drops every individual of lowest fitness and samples `μ`
//! offspring from the convex hull of the rest: positions on which the reduced
//! parents agree are copied, all others are uniform. A population of identical
//! copies is terminal; a population of equal fitness but distinct members is
//! passed on unchanged.

use std::cmp::Ordering;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{AlgorithmError, FailureKind, Optimizer, Step, TerminalState};
use crate::fitness::{Fitness, Individual};
use crate::rng::{stream, Role, StreamRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsaConfig {
    pub mu: usize,
    /// Start over from a fresh random population on a non-optimal terminal state.
    pub restart: bool,
}

impl CsaConfig {
    pub fn validate(&self) -> Result<(), AlgorithmError> {
        if self.mu < 2 {
            return Err(AlgorithmError::InvalidParameter {
                name: "mu",
                value: self.mu as f64,
                reason: "population size must be at least 2",
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CsaStep {
    Terminal(Individual),
    Unchanged,
    Offspring(Vec<Individual>),
}

fn random_individual<R: Rng>(n: usize, rng: &mut R) -> Individual {
    let words = (0..n.div_ceil(64)).map(|_| rng.random::<u64>()).collect();
    Individual::from_words(words, n)
}

/// One generation on a non-empty `population`; the offspring count equals the
/// population size.
pub fn csa_step<F: Fitness, R: Rng>(population: &[Individual], f: &F, rng: &mut R) -> CsaStep {
    let first = &population[0];
    if population.iter().all(|x| x == first) {
        return CsaStep::Terminal(first.clone());
    }
    let worst = population
        .iter()
        .min_by(|a, b| f.cmp_fitness(a, b))
        .expect("non-empty population");
    let reduced: Vec<&Individual> = population
        .iter()
        .filter(|x| f.cmp_fitness(x, worst) != Ordering::Equal)
        .collect();
    if reduced.is_empty() {
        return CsaStep::Unchanged;
    }

    let width = first.words().len();
    let mut all = vec![u64::MAX; width];
    let mut any = vec![0u64; width];
    for x in &reduced {
        for (k, &w) in x.words().iter().enumerate() {
            all[k] &= w;
            any[k] |= w;
        }
    }
    let offspring = (0..population.len())
        .map(|_| {
            let words = (0..width)
                .map(|k| all[k] | (any[k] & !all[k] & rng.random::<u64>()))
                .collect();
            Individual::from_words(words, first.len())
        })
        .collect();
    CsaStep::Offspring(offspring)
}

#[derive(Debug, Clone)]
pub struct Csa {
    n: usize,
    config: CsaConfig,
    population: Vec<Individual>,
    rng: StreamRng,
    restarts: u64,
    iterations: u64,
    evaluations: u64,
}

impl Csa {
    pub fn new(n: usize, config: CsaConfig, seed: u64) -> Result<Self, AlgorithmError> {
        config.validate()?;
        Ok(Self {
            n,
            config,
            population: Vec::new(),
            rng: stream(seed, Role::Population, 0),
            restarts: 0,
            iterations: 0,
            evaluations: 0,
        })
    }

    pub fn population(&self) -> &[Individual] {
        &self.population
    }

    fn adopt<F: Fitness>(&mut self, population: Vec<Individual>, f: &F) -> Step {
        self.evaluations += self.config.mu as u64;
        let found = population.iter().find(|x| f.is_optimum(x)).cloned();
        self.population = population;
        match found {
            Some(x) => Step::Optimum(x),
            None => Step::Continue,
        }
    }

    fn fresh_population(&mut self) -> Vec<Individual> {
        (0..self.config.mu)
            .map(|_| random_individual(self.n, &mut self.rng))
            .collect()
    }

    fn is_converged(&self) -> bool {
        self.population.windows(2).all(|w| w[0] == w[1])
    }
}

impl Optimizer for Csa {
    fn step<F: Fitness>(&mut self, f: &F) -> Step {
        if self.population.is_empty() {
            let pop = self.fresh_population();
            return self.adopt(pop, f);
        }
        match csa_step(&self.population, f, &mut self.rng) {
            CsaStep::Terminal(x) if f.is_optimum(&x) => Step::Optimum(x),
            CsaStep::Terminal(_) if self.config.restart => {
                self.restarts += 1;
                let pop = self.fresh_population();
                self.adopt(pop, f)
            }
            CsaStep::Terminal(_) => Step::Halt(FailureKind::WrongFixation),
            CsaStep::Unchanged => Step::Stalled,
            CsaStep::Offspring(pop) => {
                self.iterations += 1;
                self.adopt(pop, f)
            }
        }
    }

    fn evaluations(&self) -> u64 {
        self.evaluations
    }

    fn iterations(&self) -> u64 {
        self.iterations
    }

    fn next_step_cost(&self) -> u64 {
        // Recognising a terminal state evaluates nothing new.
        if !self.population.is_empty() && !self.config.restart && self.is_converged() {
            0
        } else {
            self.config.mu as u64
        }
    }

    fn terminal_state(&self) -> TerminalState {
        TerminalState::Population(self.population.clone())
    }

    fn restarts(&self) -> u64 {
        self.restarts
    }
}
