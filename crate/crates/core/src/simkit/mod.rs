//! Monte-Carlo world for benchmarking joint diagonalizers: noisy congruent
//! diagonal sets, the permutation-closeness index and summary statistics.

mod generate;
mod metrics;
pub mod rng;
mod scenario;

pub use generate::{build_trial_set, congruent_diagonal, gen_diag_targets, gen_mixing, gen_noise, TrialSet};
pub use metrics::{performance_index, performance_index_as_printed, t_test, SummaryStats, TTest};
pub use rng::SimRng;
pub use scenario::{
    run_scenario, run_trial, Algorithm, Mixing, Scenario, ScenarioRun, TrialFailure, TrialOutcome, TrialResult,
};
