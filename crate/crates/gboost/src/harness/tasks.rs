//! Toy task generation and task-set file I/O.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::backends::synthetic::{synthetic_vocabulary, task_spec, Difficulty, SyntheticProfile};
use crate::core::{Query, TokenId};
use crate::error::{GBoostError, Result};
use crate::reward::OraclePRM;

/// One benchmark item with a known ground-truth answer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToyTask {
    pub query: Query,
    pub oracle_answer: Vec<TokenId>,
    pub difficulty: Difficulty,
    pub seed: u64,
}

/// Deterministic task set consistent with `synthetic_triple(seed, profile)`.
pub fn generate_tasks(seed: u64, n: usize, profile: SyntheticProfile) -> Vec<ToyTask> {
    (0..n as u64)
        .map(|i| {
            let spec = task_spec(seed, profile, i);
            ToyTask {
                query: Query { token_ids: spec.query, text: None },
                oracle_answer: spec.answer,
                difficulty: spec.difficulty,
                seed: i,
            }
        })
        .collect()
}

/// Oracle PRM whose answer table covers the given tasks.
pub fn oracle_prm_for(tasks: &[ToyTask]) -> OraclePRM {
    let mut table = HashMap::new();
    for t in tasks {
        table.insert(t.query.token_ids.clone(), t.oracle_answer.clone());
    }
    OraclePRM::new(table, synthetic_vocabulary().eos_id)
}

#[derive(Serialize, Deserialize)]
struct TaskLine {
    query: Vec<u32>,
    oracle: Vec<u32>,
    difficulty: String,
}

pub fn tasks_to_jsonl(tasks: &[ToyTask]) -> Result<String> {
    let mut out = String::new();
    for t in tasks {
        let line = TaskLine {
            query: t.query.token_ids.iter().map(|t| t.0).collect(),
            oracle: t.oracle_answer.iter().map(|t| t.0).collect(),
            difficulty: match t.difficulty {
                Difficulty::Easy => "easy".to_string(),
                Difficulty::Hard => "hard".to_string(),
            },
        };
        out.push_str(&serde_json::to_string(&line)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn write_tasks(tasks: &[ToyTask], path: &Path) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(tasks_to_jsonl(tasks)?.as_bytes())?;
    Ok(())
}

pub fn read_tasks(path: &Path) -> Result<Vec<ToyTask>> {
    let f = std::fs::File::open(path)?;
    let mut tasks = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: TaskLine = serde_json::from_str(&line)
            .map_err(|e| GBoostError::InvalidInput(format!("task line {}: {e}", i + 1)))?;
        let difficulty = match parsed.difficulty.as_str() {
            "easy" => Difficulty::Easy,
            "hard" => Difficulty::Hard,
            other => {
                return Err(GBoostError::InvalidInput(format!(
                    "task line {}: unknown difficulty '{other}'",
                    i + 1
                )))
            }
        };
        tasks.push(ToyTask {
            query: Query::new(parsed.query.into_iter().map(TokenId).collect())?,
            oracle_answer: parsed.oracle.into_iter().map(TokenId).collect(),
            difficulty,
            seed: i as u64,
        });
    }
    if tasks.is_empty() {
        return Err(GBoostError::InvalidInput("task file contains no tasks".into()));
    }
    Ok(tasks)
}

/// Raw record of a real math dataset (GSM8K / MATH-style JSONL).
///
/// These items carry text only; running them requires external model servers
/// and a tokenizer on the server side. The shipped test suite never depends
/// on them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub question: String,
    pub answer: String,
}

pub fn read_dataset(path: &Path) -> Result<Vec<DatasetRecord>> {
    let f = std::fs::File::open(path)?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: DatasetRecord = serde_json::from_str(&line)
            .map_err(|e| GBoostError::InvalidInput(format!("dataset line {}: {e}", i + 1)))?;
        out.push(rec);
    }
    Ok(out)
}

/// Free-text numeric answer normalizer for real datasets: extracts the last
/// number in the string and strips commas and trailing zeros.
pub fn normalize_numeric_answer(text: &str) -> Option<String> {
    let cleaned = text.replace(',', "");
    let mut last: Option<String> = None;
    let mut cur = String::new();
    for ch in cleaned.chars() {
        if ch.is_ascii_digit() || ch == '.' || (cur.is_empty() && ch == '-') {
            cur.push(ch);
        } else if !cur.is_empty() {
            if cur.chars().any(|c| c.is_ascii_digit()) {
                last = Some(cur.clone());
            }
            cur.clear();
        }
    }
    if !cur.is_empty() && cur.chars().any(|c| c.is_ascii_digit()) {
        last = Some(cur);
    }
    last.map(|s| {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    })
}
