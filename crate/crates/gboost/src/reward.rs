//! Process reward scoring of partial reasoning paths behind an abstract
//! interface, with a programmatic oracle for tests and the toy benchmark.

use std::collections::HashMap;

use crate::core::{Query, ReasoningStep, TokenId};
use crate::error::{GBoostError, Result};

/// Scalar reward for a reasoning prefix, clamped to [0,1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardScore {
    pub value: f64,
    /// Unclamped score, when the implementation produces one.
    pub raw: Option<f64>,
}

impl RewardScore {
    pub fn from_raw(raw: f64) -> Self {
        Self { value: raw.clamp(0.0, 1.0), raw: Some(raw) }
    }
}

/// Abstract (query, steps) -> scalar scorer.
pub trait RewardModel: Send + Sync {
    fn score(&self, query: &Query, steps: &[ReasoningStep]) -> Result<RewardScore>;
    fn id(&self) -> &str;
}

/// Scores the whole step prefix, enforcing the non-empty precondition and
/// the [0,1] range at the interface boundary.
pub fn score(model: &dyn RewardModel, query: &Query, steps: &[ReasoningStep]) -> Result<RewardScore> {
    if steps.is_empty() {
        return Err(GBoostError::InvalidInput("reward model needs at least one step".into()));
    }
    let s = model.score(query, steps)?;
    Ok(RewardScore { value: s.value.clamp(0.0, 1.0), raw: s.raw })
}

/// Ground-truth prefix scorer for toy tasks.
///
/// The concatenated step tokens (everything before the first eos) are
/// compared against the answer recorded for the query. The score is the
/// matched-prefix fraction, halved once for every token generated past the
/// first mismatch, so it is exactly 1.0 on the full correct answer and
/// monotone non-increasing once a wrong token appears.
pub struct OraclePRM {
    answer_table: HashMap<Vec<TokenId>, Vec<TokenId>>,
    eos_id: TokenId,
    wrong_token_decay: f64,
}

impl OraclePRM {
    pub fn new(answer_table: HashMap<Vec<TokenId>, Vec<TokenId>>, eos_id: TokenId) -> Self {
        Self { answer_table, eos_id, wrong_token_decay: 0.5 }
    }

    fn generated_tokens(&self, steps: &[ReasoningStep]) -> Vec<TokenId> {
        let mut out = Vec::new();
        'outer: for s in steps {
            for &t in &s.token_ids {
                if t == self.eos_id {
                    break 'outer;
                }
                out.push(t);
            }
        }
        out
    }
}

impl RewardModel for OraclePRM {
    fn score(&self, query: &Query, steps: &[ReasoningStep]) -> Result<RewardScore> {
        let answer = self.answer_table.get(&query.token_ids).ok_or_else(|| {
            GBoostError::InvalidInput("query not present in oracle answer table".into())
        })?;
        let generated = self.generated_tokens(steps);
        let matched = generated
            .iter()
            .zip(answer.iter())
            .take_while(|(g, a)| g == a)
            .count();
        let wrong = generated.len() - matched;
        let raw = (matched as f64 / answer.len() as f64)
            * self.wrong_token_decay.powi(wrong as i32);
        Ok(RewardScore::from_raw(raw))
    }

    fn id(&self) -> &str {
        "oracle-prm"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::ActionKind;

    fn step(tokens: &[u32]) -> ReasoningStep {
        ReasoningStep {
            token_ids: tokens.iter().map(|&t| TokenId(t)).collect(),
            log_prob: -1.0,
            action: ActionKind::Private,
            is_terminal: false,
        }
    }

    fn oracle(answer: &[u32]) -> (OraclePRM, Query) {
        let query = Query::new(vec![TokenId(2), TokenId(3)]).unwrap();
        let mut table = HashMap::new();
        table.insert(query.token_ids.clone(), answer.iter().map(|&t| TokenId(t)).collect());
        (OraclePRM::new(table, TokenId(0)), query)
    }

    #[test]
    fn exact_answer_scores_one() {
        let (prm, q) = oracle(&[5, 6, 7]);
        let r = score(&prm, &q, &[step(&[5, 6]), step(&[7, 0])]).unwrap();
        assert_eq!(r.value, 1.0);
    }

    #[test]
    fn wrong_first_step_scores_zero() {
        let (prm, q) = oracle(&[5, 6, 7]);
        let r = score(&prm, &q, &[step(&[9])]).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn empty_steps_rejected() {
        let (prm, q) = oracle(&[5]);
        assert!(score(&prm, &q, &[]).is_err());
    }

    #[test]
    fn raw_clamped_at_boundary() {
        struct Hot;
        impl RewardModel for Hot {
            fn score(&self, _q: &Query, _s: &[ReasoningStep]) -> Result<RewardScore> {
                Ok(RewardScore::from_raw(1.37))
            }
            fn id(&self) -> &str {
                "hot"
            }
        }
        let q = Query::new(vec![TokenId(2)]).unwrap();
        let r = score(&Hot, &q, &[step(&[5])]).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(r.raw, Some(1.37));
    }

    #[test]
    fn correct_continuation_never_scores_below_wrong() {
        // Exhaustive over answers of length <= 3 on a 3-token alphabet and
        // every split of the prefix.
        let alphabet = [5u32, 6, 7];
        for &a0 in &alphabet {
            for &a1 in &alphabet {
                for &a2 in &alphabet {
                    let answer = [a0, a1, a2];
                    let (prm, q) = oracle(&answer);
                    for cut in 0..answer.len() {
                        let prefix = step(&answer[..cut]);
                        let good = score(&prm, &q, &[prefix.clone(), step(&[answer[cut]])])
                            .unwrap()
                            .value;
                        for &w in &alphabet {
                            if w == answer[cut] {
                                continue;
                            }
                            let bad =
                                score(&prm, &q, &[prefix.clone(), step(&[w])]).unwrap().value;
                            assert!(good >= bad, "answer {answer:?} cut {cut} wrong {w}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn determinism() {
        let (prm, q) = oracle(&[5, 6]);
        let steps = [step(&[5]), step(&[9, 9])];
        let a = score(&prm, &q, &steps).unwrap();
        let b = score(&prm, &q, &steps).unwrap();
        assert_eq!(a, b);
    }
}
