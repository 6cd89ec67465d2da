//! Estimation-of-distribution algorithms on pseudo-Boolean benchmarks.
//!
//! The centrepiece is the significance-based compact GA ([`algorithms::SigCga`]),
//! which only moves a frequency once the winner-bit history at that position
//! shows a statistically significant surplus. The stable cGA, the classic cGA and
//! the convex search algorithm are included as comparison points, together with
//! an experiment harness that measures run times and checks their scaling.

pub mod algorithms;
pub mod cli;
pub mod fitness;
pub mod harness;
pub mod history;
pub mod presets;
pub mod rng;
pub mod significance;

pub use algorithms::{AlgorithmConfig, AlgorithmKind, FailureKind, ResolvedAlgorithm, RunResult};
pub use fitness::{Fitness, FitnessFunction, FitnessKind, Individual};
pub use history::{History, HistoryMode};
