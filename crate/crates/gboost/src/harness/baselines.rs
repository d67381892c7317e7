//! Straight-line decoding baselines and the exhaustive action-sequence
//! oracle used to check the search.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::core::{ActionKind, Query, ReasoningStep, SearchConfig, TokenId};
use crate::engine::{run_search, ReasoningResult};
use crate::error::{GBoostError, Result};
use crate::policy::{
    detect_termination, fused_distribution, sample_step_collaborative, sample_step_private,
    BackendTriple,
};
use crate::reward::{score, RewardModel};

/// Which straight-line decoder to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineMode {
    /// Untuned base SLM.
    Base,
    /// Fine-tuned private SLM.
    Tuned,
    /// Fused distribution for every token, no tree and no PRM.
    ProxyTuning,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaselineOutput {
    pub answer_tokens: Vec<TokenId>,
    /// Set when decoding hit the `max_depth * step_length` token cap
    /// without terminating.
    pub truncated: bool,
}

fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Decode to termination with a single fixed mode.
pub fn baseline_decode(
    mode: BaselineMode,
    backends: &BackendTriple,
    query: &Query,
    config: &SearchConfig,
) -> Result<BaselineOutput> {
    config.validate()?;
    let vocab = backends.vocabulary();
    let cap = config.max_depth * config.step_length;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut ctx = query.token_ids.clone();
    let mut answer = Vec::new();
    let mut truncated = true;
    for _ in 0..cap {
        let probs = match mode {
            BaselineMode::Base => {
                let z = backends.base.next_logits(&ctx)?;
                softmax(&z.0.iter().map(|v| v / config.temperature).collect::<Vec<_>>())
            }
            BaselineMode::Tuned => {
                let z = backends.tuned.next_logits(&ctx)?;
                softmax(&z.0.iter().map(|v| v / config.temperature).collect::<Vec<_>>())
            }
            BaselineMode::ProxyTuning => {
                let z_c = backends.general.next_logits(&ctx)?;
                let z_p = backends.tuned.next_logits(&ctx)?;
                let z_m = backends.base.next_logits(&ctx)?;
                fused_distribution(&z_c, &z_p, &z_m, config.temperature)?
            }
        };
        let chosen = if config.deterministic_top1 {
            (0..probs.len()).max_by(|a, b| probs[*a].total_cmp(&probs[*b])).unwrap()
        } else {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut pick = probs.len() - 1;
            for (i, p) in probs.iter().enumerate() {
                acc += p;
                if u < acc {
                    pick = i;
                    break;
                }
            }
            pick
        };
        let tok = TokenId(chosen as u32);
        if tok == vocab.eos_id {
            truncated = false;
            break;
        }
        answer.push(tok);
        ctx.push(tok);
        let marker = &vocab.answer_marker_ids;
        if !marker.is_empty()
            && answer.len() >= marker.len()
            && answer[answer.len() - marker.len()..] == marker[..]
        {
            truncated = false;
            break;
        }
    }
    Ok(BaselineOutput { answer_tokens: answer, truncated })
}

/// Private SLM guided by MCTS without collaboration: the search with
/// `p_collab` forced to zero.
pub fn tuned_mcts(
    backends: &BackendTriple,
    prm: &dyn RewardModel,
    query: Query,
    config: &SearchConfig,
) -> Result<ReasoningResult> {
    let config = SearchConfig { p_collab: 0.0, ..config.clone() };
    run_search(query, backends, prm, &config)
}

/// Exhaustively enumerate action sequences in {Collaborative, Private}^<=D
/// with deterministic top-1 decoding, score every terminal with the PRM, and
/// return the best reward and its action sequence.
pub fn brute_force_best(
    backends: &BackendTriple,
    prm: &dyn RewardModel,
    query: &Query,
    config: &SearchConfig,
    depth_limit: usize,
) -> Result<(f64, Vec<ActionKind>)> {
    if depth_limit > 4 {
        return Err(GBoostError::InvalidInput(
            "brute force depth limit capped at 4".into(),
        ));
    }
    if !config.deterministic_top1 {
        return Err(GBoostError::InvalidInput(
            "brute force requires deterministic_top1".into(),
        ));
    }
    let vocab = backends.vocabulary();
    let mut best = (0.0f64, Vec::new());

    #[allow(clippy::too_many_arguments)]
    fn recurse(
        backends: &BackendTriple,
        prm: &dyn RewardModel,
        query: &Query,
        config: &SearchConfig,
        vocab: &crate::core::Vocabulary,
        depth_limit: usize,
        steps: &mut Vec<ReasoningStep>,
        actions: &mut Vec<ActionKind>,
        best: &mut (f64, Vec<ActionKind>),
    ) -> Result<()> {
        for action in [ActionKind::Collaborative, ActionKind::Private] {
            // rng is unused under top-1 decoding; any seed gives the same step
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            let mut sample = match action {
                ActionKind::Collaborative => {
                    sample_step_collaborative(backends, query, steps, config, &mut rng)?
                }
                ActionKind::Private => sample_step_private(
                    backends.tuned.as_ref(),
                    query,
                    steps,
                    config,
                    &mut rng,
                )?,
            };
            let depth = steps.len() + 1;
            sample.step.is_terminal =
                detect_termination(&sample.step.token_ids, vocab, depth, depth_limit);
            let terminal = sample.step.is_terminal;
            steps.push(sample.step);
            actions.push(action);
            if terminal {
                let r = score(prm, query, steps)?.value;
                if r > best.0 {
                    *best = (r, actions.clone());
                }
            } else {
                recurse(backends, prm, query, config, vocab, depth_limit, steps, actions, best)?;
            }
            steps.pop();
            actions.pop();
        }
        Ok(())
    }

    let mut steps = Vec::new();
    let mut actions = Vec::new();
    recurse(
        backends,
        prm,
        query,
        config,
        &vocab,
        depth_limit,
        &mut steps,
        &mut actions,
        &mut best,
    )?;
    Ok(best)
}
