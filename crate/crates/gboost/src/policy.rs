//! Next-step generation: the fused collaborative distribution, the
//! private-SLM distribution, and termination detection.

use rand::Rng;

use crate::core::{
    ActionKind, LogitVector, Query, ReasoningStep, SearchConfig, TokenId, Vocabulary,
};
use crate::error::{GBoostError, Result};

/// Abstract next-token-logits provider.
pub trait GenerationBackend: Send + Sync {
    fn next_logits(&self, context: &[TokenId]) -> Result<LogitVector>;
    fn vocabulary(&self) -> Vocabulary;
    fn id(&self) -> &str;
}

/// The three models of the collaborative decoding space: the general LLM,
/// the tuned private SLM, and the untuned base SLM.
pub struct BackendTriple {
    pub general: std::sync::Arc<dyn GenerationBackend>,
    pub tuned: std::sync::Arc<dyn GenerationBackend>,
    pub base: std::sync::Arc<dyn GenerationBackend>,
}

impl BackendTriple {
    pub fn new(
        general: std::sync::Arc<dyn GenerationBackend>,
        tuned: std::sync::Arc<dyn GenerationBackend>,
        base: std::sync::Arc<dyn GenerationBackend>,
    ) -> Result<Self> {
        let v = general.vocabulary();
        for b in [&tuned, &base] {
            let w = b.vocabulary();
            if w.size != v.size || w.eos_id != v.eos_id || w.answer_marker_ids != v.answer_marker_ids
            {
                return Err(GBoostError::InvalidInput(format!(
                    "backend '{}' vocabulary differs from '{}'",
                    b.id(),
                    general.id()
                )));
            }
        }
        Ok(Self { general, tuned, base })
    }

    pub fn vocabulary(&self) -> Vocabulary {
        self.tuned.vocabulary()
    }
}

/// A generated step plus its per-token log probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct StepSample {
    pub step: ReasoningStep,
    pub per_token_log_probs: Vec<f64>,
}

fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Fused collaborative distribution: `softmax((z_c + z_plus - z_minus) / temperature)`.
pub fn fused_distribution(
    z_c: &LogitVector,
    z_plus: &LogitVector,
    z_minus: &LogitVector,
    temperature: f64,
) -> Result<Vec<f64>> {
    if z_plus.len() != z_c.len() {
        return Err(GBoostError::Shape { expected: z_c.len(), actual: z_plus.len() });
    }
    if z_minus.len() != z_c.len() {
        return Err(GBoostError::Shape { expected: z_c.len(), actual: z_minus.len() });
    }
    if temperature.is_nan() || temperature <= 0.0 {
        return Err(GBoostError::InvalidInput("temperature must be > 0".into()));
    }
    let mut fused = Vec::with_capacity(z_c.len());
    for i in 0..z_c.len() {
        let z = z_c.0[i] + z_plus.0[i] - z_minus.0[i];
        if !z.is_finite() {
            return Err(GBoostError::InvalidInput(format!("non-finite fused logit at {i}")));
        }
        fused.push(z / temperature);
    }
    Ok(softmax(&fused))
}

/// True iff eos is present, the answer-marker pattern occurs contiguously,
/// or the node sits at the depth cap.
pub fn detect_termination(
    tokens: &[TokenId],
    vocab: &Vocabulary,
    depth: usize,
    max_depth: usize,
) -> bool {
    if depth >= max_depth {
        return true;
    }
    if tokens.contains(&vocab.eos_id) {
        return true;
    }
    let marker = &vocab.answer_marker_ids;
    !marker.is_empty() && tokens.windows(marker.len()).any(|w| w == marker.as_slice())
}

fn ends_with_marker(tokens: &[TokenId], vocab: &Vocabulary) -> bool {
    let marker = &vocab.answer_marker_ids;
    !marker.is_empty() && tokens.len() >= marker.len() && tokens[tokens.len() - marker.len()..] == marker[..]
}

fn pick_token<R: Rng>(probs: &[f64], deterministic_top1: bool, rng: &mut R) -> usize {
    if deterministic_top1 {
        let mut best = 0;
        for (i, p) in probs.iter().enumerate() {
            if *p > probs[best] {
                best = i;
            }
        }
        return best;
    }
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

fn build_context(query: &Query, prior_steps: &[ReasoningStep], tokens_so_far: &[TokenId]) -> Vec<TokenId> {
    let mut ctx = query.token_ids.clone();
    for s in prior_steps {
        ctx.extend_from_slice(&s.token_ids);
    }
    ctx.extend_from_slice(tokens_so_far);
    ctx
}

fn sample_step<R, F>(
    vocab: &Vocabulary,
    query: &Query,
    prior_steps: &[ReasoningStep],
    config: &SearchConfig,
    action: ActionKind,
    rng: &mut R,
    mut next_probs: F,
) -> Result<StepSample>
where
    R: Rng,
    F: FnMut(&[TokenId], usize) -> Result<Vec<f64>>,
{
    let mut tokens: Vec<TokenId> = Vec::new();
    let mut log_probs: Vec<f64> = Vec::new();
    for pos in 0..config.step_length {
        let ctx = build_context(query, prior_steps, &tokens);
        let probs = next_probs(&ctx, pos)?;
        if probs.len() != vocab.size {
            return Err(GBoostError::Shape { expected: vocab.size, actual: probs.len() });
        }
        let chosen = pick_token(&probs, config.deterministic_top1, rng);
        tokens.push(TokenId(chosen as u32));
        log_probs.push(probs[chosen].ln());
        if tokens[tokens.len() - 1] == vocab.eos_id || ends_with_marker(&tokens, vocab) {
            break;
        }
    }
    let terminal = tokens.contains(&vocab.eos_id) || ends_with_marker(&tokens, vocab);
    let step = ReasoningStep {
        token_ids: tokens,
        log_prob: log_probs.iter().sum(),
        action,
        is_terminal: terminal,
    };
    Ok(StepSample { step, per_token_log_probs: log_probs })
}

/// Generate a step from the fused distribution, conditioning all three
/// backends on query + prior steps + tokens generated so far.
pub fn sample_step_collaborative<R: Rng>(
    backends: &BackendTriple,
    query: &Query,
    prior_steps: &[ReasoningStep],
    config: &SearchConfig,
    rng: &mut R,
) -> Result<StepSample> {
    let vocab = backends.vocabulary();
    sample_step(
        &vocab,
        query,
        prior_steps,
        config,
        ActionKind::Collaborative,
        rng,
        |ctx, pos| {
            let tag = |backend: &dyn GenerationBackend, e: GBoostError| GBoostError::Backend {
                backend: backend.id().to_string(),
                position: pos,
                message: e.to_string(),
            };
            let z_c = backends
                .general
                .next_logits(ctx)
                .map_err(|e| tag(backends.general.as_ref(), e))?;
            let z_plus = backends
                .tuned
                .next_logits(ctx)
                .map_err(|e| tag(backends.tuned.as_ref(), e))?;
            let z_minus = backends
                .base
                .next_logits(ctx)
                .map_err(|e| tag(backends.base.as_ref(), e))?;
            fused_distribution(&z_c, &z_plus, &z_minus, config.temperature)
        },
    )
}

/// Generate a step from the tuned SLM alone.
pub fn sample_step_private<R: Rng>(
    tuned: &dyn GenerationBackend,
    query: &Query,
    prior_steps: &[ReasoningStep],
    config: &SearchConfig,
    rng: &mut R,
) -> Result<StepSample> {
    let vocab = tuned.vocabulary();
    sample_step(
        &vocab,
        query,
        prior_steps,
        config,
        ActionKind::Private,
        rng,
        |ctx, pos| {
            let z = tuned.next_logits(ctx).map_err(|e| GBoostError::Backend {
                backend: tuned.id().to_string(),
                position: pos,
                message: e.to_string(),
            })?;
            if z.len() != vocab.size {
                return Err(GBoostError::Shape { expected: vocab.size, actual: z.len() });
            }
            let scaled: Vec<f64> = z.0.iter().map(|v| v / config.temperature).collect();
            Ok(softmax(&scaled))
        },
    )
}
