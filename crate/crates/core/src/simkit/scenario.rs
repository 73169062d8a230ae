use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use super::generate::build_trial_set;
use super::metrics::{performance_index, performance_index_as_printed, SummaryStats};
use crate::error::{Error, Result};
use crate::ojd::{ojd_run, OjdConfig};
use crate::sdiag::{sdiag_run, SdiagConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mixing {
    Orthogonal,
    General,
}

impl Mixing {
    pub fn as_str(self) -> &'static str {
        match self {
            Mixing::Orthogonal => "orthogonal",
            Mixing::General => "general",
        }
    }
}

impl fmt::Display for Mixing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mixing {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "orthogonal" => Ok(Mixing::Orthogonal),
            "general" => Ok(Mixing::General),
            other => Err(format!(
                "unknown mixing kind `{other}` (expected orthogonal or general)"
            )),
        }
    }
}

/// Recipe for a batch of simulated matrix sets `{A·D_k·Aᵀ + N_k}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub n: usize,
    pub k: usize,
    pub sigma: f64,
    pub mixing: Mixing,
    pub trials: usize,
    pub master_seed: u64,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidConfig(format!("n must be at least 2, got {}", self.n)));
        }
        if self.k < 1 {
            return Err(Error::InvalidConfig("k must be at least 1".into()));
        }
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "sigma must be finite and >= 0, got {}",
                self.sigma
            )));
        }
        if self.trials < 1 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Algorithm {
    Sdiag(SdiagConfig),
    Ojd(OjdConfig),
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Sdiag(_) => "sdiag",
            Algorithm::Ojd(_) => "ojd",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialResult {
    pub trial_index: usize,
    pub performance_index: f64,
    pub index_as_printed: f64,
    /// SDIAG iterations or OJD sweeps.
    pub iterations: usize,
    pub converged: bool,
    pub final_off: f64,
    pub elapsed: Duration,
    pub seed_used: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialFailure {
    pub trial_index: usize,
    pub seed_used: u64,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq)]
pub enum TrialOutcome {
    Ok(TrialResult),
    Failed(TrialFailure),
}

impl TrialOutcome {
    pub fn trial_index(&self) -> usize {
        match self {
            TrialOutcome::Ok(r) => r.trial_index,
            TrialOutcome::Failed(f) => f.trial_index,
        }
    }

    pub fn ok(&self) -> Option<&TrialResult> {
        match self {
            TrialOutcome::Ok(r) => Some(r),
            TrialOutcome::Failed(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioRun {
    /// One entry per trial, ordered by trial index.
    pub outcomes: Vec<TrialOutcome>,
    /// Over successful trials only; `None` if every trial failed.
    pub stats: Option<SummaryStats>,
    pub failures: usize,
}

impl ScenarioRun {
    pub fn indices(&self) -> Vec<f64> {
        self.outcomes
            .iter()
            .filter_map(|o| o.ok())
            .map(|r| r.performance_index)
            .collect()
    }
}

/// Builds trial `trial_index`, runs the algorithm and scores `G = BᵀA`.
pub fn run_trial(scenario: &Scenario, algorithm: &Algorithm, trial_index: usize) -> Result<TrialResult> {
    let start = Instant::now();
    let trial = build_trial_set(scenario, trial_index)?;
    let (b, iterations, converged, final_off) = match algorithm {
        Algorithm::Sdiag(cfg) => {
            let report = sdiag_run(&trial.set, cfg)?;
            let d = report.diagonalizer;
            (d.b, d.iterations_run, d.converged, d.final_off)
        }
        Algorithm::Ojd(cfg) => {
            let r = ojd_run(&trial.set, cfg)?;
            (r.b, r.sweeps_used, r.converged, r.final_off)
        }
    };
    if b.cols() != scenario.n {
        return Err(Error::DegenerateInput(format!(
            "demixing matrix has rank {} < n = {}",
            b.cols(),
            scenario.n
        )));
    }
    let g = b.tr_matmul(&trial.mixing);
    Ok(TrialResult {
        trial_index,
        performance_index: performance_index(&g)?,
        index_as_printed: performance_index_as_printed(&g)?,
        iterations,
        converged,
        final_off,
        elapsed: start.elapsed(),
        seed_used: trial.seed,
    })
}

/// Runs every trial of `scenario` on the current rayon pool. Outcomes are
/// collected in trial order, so the result does not depend on scheduling.
pub fn run_scenario(scenario: &Scenario, algorithm: &Algorithm) -> Result<ScenarioRun> {
    scenario.validate()?;
    if let Algorithm::Sdiag(cfg) = algorithm {
        cfg.validate()?;
    }
    if let Algorithm::Ojd(cfg) = algorithm {
        cfg.validate()?;
    }
    let outcomes: Vec<TrialOutcome> = (0..scenario.trials)
        .into_par_iter()
        .map(|t| match run_trial(scenario, algorithm, t) {
            Ok(r) => TrialOutcome::Ok(r),
            Err(e) => TrialOutcome::Failed(TrialFailure {
                trial_index: t,
                seed_used: super::rng::trial_seed(scenario.master_seed, t as u64),
                message: e.to_string(),
            }),
        })
        .collect();
    let failures = outcomes.iter().filter(|o| o.ok().is_none()).count();
    let indices: Vec<f64> = outcomes
        .iter()
        .filter_map(|o| o.ok())
        .map(|r| r.performance_index)
        .collect();
    Ok(ScenarioRun {
        stats: SummaryStats::from_values(&indices),
        outcomes,
        failures,
    })
}
