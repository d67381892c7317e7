//! Five-method benchmark runner over a task set.

use std::collections::BTreeMap;
use std::time::Instant;

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::core::{Query, SearchConfig, TokenId};
use crate::engine::run_search;
use crate::error::Result;
use crate::harness::baselines::{baseline_decode, tuned_mcts, BaselineMode};
use crate::harness::tasks::ToyTask;
use crate::policy::BackendTriple;
use crate::reward::RewardModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    Base,
    Tuned,
    TunedMCTS,
    ProxyTuning,
    GBoost,
}

pub const ALL_METHODS: [Method; 5] = [
    Method::Base,
    Method::Tuned,
    Method::TunedMCTS,
    Method::ProxyTuning,
    Method::GBoost,
];

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Base => "Base",
            Method::Tuned => "Tuned",
            Method::TunedMCTS => "TunedMCTS",
            Method::ProxyTuning => "ProxyTuning",
            Method::GBoost => "GBoost",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodOutcome {
    pub answer: Vec<TokenId>,
    pub correct: bool,
    /// Recorded instead of failing the whole run.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub query: Vec<TokenId>,
    pub oracle: Vec<TokenId>,
    pub outcomes: BTreeMap<String, MethodOutcome>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WallTimeStats {
    pub total_secs: f64,
    pub per_task_mean_secs: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub accuracy: BTreeMap<String, f64>,
    pub records: Vec<QueryRecord>,
    pub config: SearchConfig,
    pub wall_time: WallTimeStats,
}

fn run_method(
    method: Method,
    task: &ToyTask,
    backends: &BackendTriple,
    prm: &dyn RewardModel,
    config: &SearchConfig,
) -> MethodOutcome {
    // Stable per-task seed so the benchmark is order-independent.
    let task_config = SearchConfig {
        seed: config.seed ^ task.seed.wrapping_mul(0x9e3779b97f4a7c15),
        ..config.clone()
    };
    let query: Query = task.query.clone();
    let result: Result<Vec<TokenId>> = match method {
        Method::Base => {
            baseline_decode(BaselineMode::Base, backends, &query, &task_config).map(|o| o.answer_tokens)
        }
        Method::Tuned => {
            baseline_decode(BaselineMode::Tuned, backends, &query, &task_config).map(|o| o.answer_tokens)
        }
        Method::ProxyTuning => baseline_decode(BaselineMode::ProxyTuning, backends, &query, &task_config)
            .map(|o| o.answer_tokens),
        Method::TunedMCTS => tuned_mcts(backends, prm, query, &task_config).map(|r| r.answer_tokens),
        Method::GBoost => run_search(query, backends, prm, &task_config).map(|r| r.answer_tokens),
    };
    match result {
        Ok(answer) => {
            let correct = answer == task.oracle_answer;
            MethodOutcome { answer, correct, error: None }
        }
        Err(e) => MethodOutcome { answer: Vec::new(), correct: false, error: Some(e.to_string()) },
    }
}

fn evaluate_task(
    task: &ToyTask,
    backends: &BackendTriple,
    prm: &dyn RewardModel,
    config: &SearchConfig,
) -> QueryRecord {
    let mut outcomes = BTreeMap::new();
    for method in ALL_METHODS {
        outcomes.insert(method.name().to_string(), run_method(method, task, backends, prm, config));
    }
    QueryRecord {
        query: task.query.token_ids.clone(),
        oracle: task.oracle_answer.clone(),
        outcomes,
    }
}

/// Sequential evaluation path, always available; the parallel build uses it
/// as the comparison baseline in benches.
pub fn evaluate_tasks_seq(
    tasks: &[ToyTask],
    backends: &BackendTriple,
    prm: &dyn RewardModel,
    config: &SearchConfig,
) -> Vec<QueryRecord> {
    tasks.iter().map(|t| evaluate_task(t, backends, prm, config)).collect()
}

/// Data-parallel evaluation: searches are independent, so tasks fan out
/// across the rayon pool. Results are collected in task order.
#[cfg(feature = "parallel")]
pub fn evaluate_tasks_par(
    tasks: &[ToyTask],
    backends: &BackendTriple,
    prm: &(dyn RewardModel + Sync),
    config: &SearchConfig,
) -> Vec<QueryRecord> {
    tasks.par_iter().map(|t| evaluate_task(t, backends, prm, config)).collect()
}

fn assemble(records: Vec<QueryRecord>, config: &SearchConfig, started: Instant, n: usize) -> BenchmarkReport {
    let mut accuracy = BTreeMap::new();
    for method in ALL_METHODS {
        let correct = records
            .iter()
            .filter(|r| r.outcomes[method.name()].correct)
            .count();
        accuracy.insert(method.name().to_string(), correct as f64 / records.len() as f64);
    }
    let total = started.elapsed().as_secs_f64();
    BenchmarkReport {
        accuracy,
        records,
        config: config.clone(),
        wall_time: WallTimeStats { total_secs: total, per_task_mean_secs: total / n as f64 },
    }
}

/// Evaluate all five methods on the task set.
pub fn run_benchmark(
    tasks: &[ToyTask],
    backends: &BackendTriple,
    prm: &(dyn RewardModel + Sync),
    config: &SearchConfig,
) -> Result<BenchmarkReport> {
    if tasks.is_empty() {
        return Err(crate::error::GBoostError::InvalidInput("empty task set".into()));
    }
    config.validate()?;
    let started = Instant::now();
    #[cfg(feature = "parallel")]
    let records = evaluate_tasks_par(tasks, backends, prm, config);
    #[cfg(not(feature = "parallel"))]
    let records = evaluate_tasks_seq(tasks, backends, prm, config);
    Ok(assemble(records, config, started, tasks.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::synthetic::{synthetic_triple, SyntheticProfile, SYNTH_STEP_LEN};
    use crate::harness::tasks::{generate_tasks, oracle_prm_for};

    fn config() -> SearchConfig {
        SearchConfig {
            step_length: SYNTH_STEP_LEN,
            max_depth: 3,
            max_iterations: 32,
            expansion_budget: 2,
            deterministic_top1: true,
            ..SearchConfig::default()
        }
    }

    #[test]
    fn accuracies_in_range_and_records_complete() {
        let seed = 41;
        let profile = SyntheticProfile::Complementary;
        let backends = synthetic_triple(seed, profile);
        let tasks = generate_tasks(seed, 20, profile);
        let prm = oracle_prm_for(&tasks);
        let report = run_benchmark(&tasks, &backends, &prm, &config()).unwrap();
        assert_eq!(report.records.len(), tasks.len());
        for (m, acc) in &report.accuracy {
            assert!((0.0..=1.0).contains(acc), "{m}: {acc}");
        }
        for r in &report.records {
            assert_eq!(r.outcomes.len(), ALL_METHODS.len());
        }
    }

    #[test]
    fn deterministic_given_config_and_seed() {
        let seed = 42;
        let profile = SyntheticProfile::Complementary;
        let backends = synthetic_triple(seed, profile);
        let tasks = generate_tasks(seed, 10, profile);
        let prm = oracle_prm_for(&tasks);
        let a = run_benchmark(&tasks, &backends, &prm, &config()).unwrap();
        let b = run_benchmark(&tasks, &backends, &prm, &config()).unwrap();
        assert_eq!(a.accuracy, b.accuracy);
        assert_eq!(a.records, b.records);
    }

    #[test]
    fn seq_and_par_agree() {
        let seed = 43;
        let profile = SyntheticProfile::Complementary;
        let backends = synthetic_triple(seed, profile);
        let tasks = generate_tasks(seed, 8, profile);
        let prm = oracle_prm_for(&tasks);
        let seq = evaluate_tasks_seq(&tasks, &backends, &prm, &config());
        #[cfg(feature = "parallel")]
        {
            let par = evaluate_tasks_par(&tasks, &backends, &prm, &config());
            assert_eq!(seq, par);
        }
        assert_eq!(seq.len(), 8);
    }
}
