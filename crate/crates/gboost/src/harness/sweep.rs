//! Ablation sweep runner: one benchmark per parameter value plus a CSV
//! summary for plotting.

use std::path::Path;

use crate::core::{ExpandStrategy, SearchConfig};
use crate::error::{GBoostError, Result};
use crate::harness::benchmark::{run_benchmark, BenchmarkReport, ALL_METHODS};
use crate::harness::tasks::ToyTask;
use crate::policy::BackendTriple;
use crate::reward::RewardModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    CExplore,
    StepLength,
    MaxIterations,
    PCollab,
    ExpandStrategy,
}

impl std::str::FromStr for SweepParam {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "c_explore" | "c-explore" => Ok(Self::CExplore),
            "step_length" | "step-length" => Ok(Self::StepLength),
            "max_iterations" | "iterations" => Ok(Self::MaxIterations),
            "p_collab" | "p-collab" => Ok(Self::PCollab),
            "expand_strategy" | "expand" => Ok(Self::ExpandStrategy),
            other => Err(format!("unknown sweep parameter '{other}'")),
        }
    }
}

/// One swept value, parsed from its CSV form.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepValue {
    Number(f64),
    Strategy(ExpandStrategy),
}

impl SweepValue {
    pub fn parse(param: SweepParam, raw: &str) -> Result<Self> {
        match param {
            SweepParam::ExpandStrategy => match raw.to_ascii_lowercase().as_str() {
                "single" => Ok(Self::Strategy(ExpandStrategy::Single)),
                "full" => Ok(Self::Strategy(ExpandStrategy::Full)),
                other => Err(GBoostError::InvalidInput(format!("unknown strategy '{other}'"))),
            },
            _ => raw
                .trim()
                .parse::<f64>()
                .map(Self::Number)
                .map_err(|e| GBoostError::InvalidInput(format!("bad sweep value '{raw}': {e}"))),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Number(n) => format!("{n}"),
            Self::Strategy(ExpandStrategy::Single) => "single".to_string(),
            Self::Strategy(ExpandStrategy::Full) => "full".to_string(),
        }
    }

    fn apply(&self, param: SweepParam, config: &SearchConfig) -> Result<SearchConfig> {
        let mut c = config.clone();
        match (param, self) {
            (SweepParam::CExplore, Self::Number(v)) => c.c_explore = *v,
            (SweepParam::StepLength, Self::Number(v)) => c.step_length = *v as usize,
            (SweepParam::MaxIterations, Self::Number(v)) => c.max_iterations = *v as usize,
            (SweepParam::PCollab, Self::Number(v)) => c.p_collab = *v,
            (SweepParam::ExpandStrategy, Self::Strategy(s)) => c.expand_strategy = *s,
            _ => {
                return Err(GBoostError::InvalidInput(
                    "sweep value kind does not match parameter".into(),
                ))
            }
        }
        c.validate()?;
        Ok(c)
    }
}

/// Run one benchmark per value of the swept parameter.
pub fn sweep(
    param: SweepParam,
    values: &[SweepValue],
    tasks: &[ToyTask],
    backends: &BackendTriple,
    prm: &(dyn RewardModel + Sync),
    config: &SearchConfig,
) -> Result<Vec<(SweepValue, BenchmarkReport)>> {
    if values.len() < 2 {
        return Err(GBoostError::InvalidInput("sweep needs at least 2 values".into()));
    }
    let mut out = Vec::with_capacity(values.len());
    for v in values {
        let cfg = v.apply(param, config)?;
        out.push((v.clone(), run_benchmark(tasks, backends, prm, &cfg)?));
    }
    Ok(out)
}

/// CSV summary: one row per (value, method).
pub fn sweep_csv(
    param: SweepParam,
    results: &[(SweepValue, BenchmarkReport)],
) -> String {
    let param_name = match param {
        SweepParam::CExplore => "c_explore",
        SweepParam::StepLength => "step_length",
        SweepParam::MaxIterations => "max_iterations",
        SweepParam::PCollab => "p_collab",
        SweepParam::ExpandStrategy => "expand_strategy",
    };
    let mut csv = String::from("param,value,method,accuracy\n");
    for (value, report) in results {
        for m in ALL_METHODS {
            csv.push_str(&format!(
                "{param_name},{},{},{}\n",
                value.label(),
                m.name(),
                report.accuracy[m.name()]
            ));
        }
    }
    csv
}

pub fn write_sweep_csv(
    param: SweepParam,
    results: &[(SweepValue, BenchmarkReport)],
    path: &Path,
) -> Result<()> {
    std::fs::write(path, sweep_csv(param, results))?;
    Ok(())
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
            max_iterations: 16,
            expansion_budget: 2,
            deterministic_top1: true,
            ..SearchConfig::default()
        }
    }

    #[test]
    fn sweep_needs_two_values() {
        let seed = 51;
        let profile = SyntheticProfile::Complementary;
        let backends = synthetic_triple(seed, profile);
        let tasks = generate_tasks(seed, 4, profile);
        let prm = oracle_prm_for(&tasks);
        let r = sweep(
            SweepParam::PCollab,
            &[SweepValue::Number(0.5)],
            &tasks,
            &backends,
            &prm,
            &config(),
        );
        assert!(r.is_err());
    }

    #[test]
    fn expand_strategy_sweep_emits_both_rows() {
        let seed = 52;
        let profile = SyntheticProfile::Complementary;
        let backends = synthetic_triple(seed, profile);
        let tasks = generate_tasks(seed, 6, profile);
        let prm = oracle_prm_for(&tasks);
        let values = [
            SweepValue::parse(SweepParam::ExpandStrategy, "single").unwrap(),
            SweepValue::parse(SweepParam::ExpandStrategy, "full").unwrap(),
        ];
        let results =
            sweep(SweepParam::ExpandStrategy, &values, &tasks, &backends, &prm, &config()).unwrap();
        let csv = sweep_csv(SweepParam::ExpandStrategy, &results);
        assert!(csv.contains("expand_strategy,single,"));
        assert!(csv.contains("expand_strategy,full,"));
        // header + values x methods
        assert_eq!(csv.lines().count(), 1 + 2 * ALL_METHODS.len());
    }

    #[test]
    fn bad_values_rejected() {
        assert!(SweepValue::parse(SweepParam::PCollab, "abc").is_err());
        assert!(SweepValue::parse(SweepParam::ExpandStrategy, "both").is_err());
    }
}
