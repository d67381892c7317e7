//! Deterministic in-memory models standing in for the tuned SLM, its base
//! version, and the general LLM at desk scale.
//!
//! Each task is identified by a three-token query. The oracle decode for a
//! task is a short token sequence ending in eos, and every position carries a
//! role that fixes which decoding mode gets it right:
//!
//! * `Easy` — the tuned model dominates; fused decoding also agrees.
//! * `GeneralEasy` — the general model dominates.
//! * `CollabNeeded` — only the fused logits `z_c + z_plus - z_minus` pick the
//!   correct token; the tuned, base, and general argmaxes are all distractors.
//! * `PrivateNeeded` — the tuned model is right and the general model's logits
//!   are strong enough to drag the fused argmax onto a distractor.
//!
//! Hard tasks in the `Complementary` profile mix `CollabNeeded` and
//! `PrivateNeeded` steps, so no fixed decoding mode can solve them; the
//! action sequence has to be chosen per step.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::core::{LogitVector, TokenId, Vocabulary};
use crate::error::Result;
use crate::policy::{BackendTriple, GenerationBackend};

/// Vocabulary shared by all synthetic models: eos at 0, a one-token answer
/// marker at 1, content tokens 2..=15.
pub fn synthetic_vocabulary() -> Vocabulary {
    Vocabulary::new(16, TokenId(0), vec![TokenId(1)]).unwrap()
}

const CONTENT_BASE: u32 = 2;
const CONTENT_COUNT: u32 = 14;
pub const QUERY_LEN: usize = 3;
/// Step length the synthetic role tables are laid out for.
pub const SYNTH_STEP_LEN: usize = 2;
/// Noise amplitude added to every logit; small enough to never disturb the
/// structured scores, large enough to break argmax ties deterministically.
const NOISE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SyntheticProfile {
    GeneralStrong,
    TunedStrong,
    Complementary,
}

impl SyntheticProfile {
    fn tag(&self) -> u64 {
        match self {
            SyntheticProfile::GeneralStrong => 0x47454e,
            SyntheticProfile::TunedStrong => 0x54554e,
            SyntheticProfile::Complementary => 0x434f4d,
        }
    }
}

impl std::str::FromStr for SyntheticProfile {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "general-strong" | "generalstrong" => Ok(Self::GeneralStrong),
            "tuned-strong" | "tunedstrong" => Ok(Self::TunedStrong),
            "complementary" => Ok(Self::Complementary),
            other => Err(format!("unknown profile '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PositionRole {
    Easy,
    GeneralEasy,
    CollabNeeded,
    PrivateNeeded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Difficulty {
    Easy,
    Hard,
}

/// Everything the models and the task generator agree on for one task.
#[derive(Debug, Clone)]
pub struct TaskSpec {
    pub index: u64,
    pub query: Vec<TokenId>,
    /// Oracle answer, content tokens only.
    pub answer: Vec<TokenId>,
    /// Full oracle decode: answer followed by eos.
    pub decode: Vec<TokenId>,
    /// One role per decode position.
    pub roles: Vec<PositionRole>,
    pub difficulty: Difficulty,
}

// splitmix64; stable across platforms and runs.
fn mix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

struct MixRng(u64);

impl MixRng {
    fn new(seed: u64) -> Self {
        Self(mix(seed))
    }
    fn next_u64(&mut self) -> u64 {
        self.0 = mix(self.0);
        self.0
    }
    fn next_range(&mut self, n: u64) -> u64 {
        self.next_u64() % n
    }
}

fn hash01(parts: &[u64]) -> f64 {
    let mut h = 0xcbf29ce484222325u64;
    for &p in parts {
        h = mix(h ^ p);
    }
    (h >> 11) as f64 / (1u64 << 53) as f64
}

/// Query tokens for task `index`: three base-14 digits over content tokens.
pub fn task_query(index: u64) -> Vec<TokenId> {
    let b = CONTENT_COUNT as u64;
    assert!(index < b * b * b, "task index out of range");
    vec![
        TokenId(CONTENT_BASE + (index / (b * b)) as u32),
        TokenId(CONTENT_BASE + ((index / b) % b) as u32),
        TokenId(CONTENT_BASE + (index % b) as u32),
    ]
}

fn parse_task_index(query: &[TokenId]) -> Option<u64> {
    if query.len() != QUERY_LEN {
        return None;
    }
    let mut index = 0u64;
    for t in query {
        if t.0 < CONTENT_BASE || t.0 >= CONTENT_BASE + CONTENT_COUNT {
            return None;
        }
        index = index * CONTENT_COUNT as u64 + (t.0 - CONTENT_BASE) as u64;
    }
    Some(index)
}

fn content_token(rng: &mut MixRng) -> TokenId {
    TokenId(CONTENT_BASE + rng.next_range(CONTENT_COUNT as u64) as u32)
}

/// Deterministic task derivation shared by the models and the generator.
pub fn task_spec(seed: u64, profile: SyntheticProfile, index: u64) -> TaskSpec {
    let mut rng = MixRng::new(mix(seed ^ profile.tag()) ^ mix(index.wrapping_add(1)));
    let n_steps = 2 + rng.next_range(2) as usize; // 2 or 3 steps
    let difficulty = match profile {
        SyntheticProfile::Complementary if index % 2 == 1 => Difficulty::Hard,
        _ => Difficulty::Easy,
    };
    let step_roles: Vec<PositionRole> = match profile {
        SyntheticProfile::TunedStrong => vec![PositionRole::Easy; n_steps],
        SyntheticProfile::GeneralStrong => vec![PositionRole::GeneralEasy; n_steps],
        SyntheticProfile::Complementary => match difficulty {
            Difficulty::Easy => vec![PositionRole::Easy; n_steps],
            Difficulty::Hard => {
                // At least one step needs each mode.
                let mut roles = vec![PositionRole::CollabNeeded, PositionRole::PrivateNeeded];
                if n_steps == 3 {
                    roles.push(match rng.next_range(3) {
                        0 => PositionRole::Easy,
                        1 => PositionRole::CollabNeeded,
                        _ => PositionRole::PrivateNeeded,
                    });
                }
                if rng.next_range(2) == 1 {
                    roles.swap(0, 1);
                }
                roles
            }
        },
    };
    let decode_len = n_steps * SYNTH_STEP_LEN;
    let mut decode = Vec::with_capacity(decode_len);
    let mut roles = Vec::with_capacity(decode_len);
    for pos in 0..decode_len {
        decode.push(if pos == decode_len - 1 {
            TokenId(0) // eos closes the final step
        } else {
            content_token(&mut rng)
        });
        roles.push(step_roles[pos / SYNTH_STEP_LEN]);
    }
    let answer = decode[..decode.len() - 1].to_vec();
    TaskSpec { index, query: task_query(index), answer, decode, roles, difficulty }
}

/// Two distractor tokens for a position, distinct from the target and from
/// each other, always in the content range.
fn distractors(seed: u64, profile: SyntheticProfile, index: u64, pos: usize, target: TokenId) -> (TokenId, TokenId) {
    let mut rng = MixRng::new(mix(seed ^ profile.tag() ^ 0xd15) ^ mix(index) ^ mix(pos as u64 + 1));
    let mut w = content_token(&mut rng);
    while w == target {
        w = content_token(&mut rng);
    }
    let mut u = content_token(&mut rng);
    while u == target || u == w {
        u = content_token(&mut rng);
    }
    (w, u)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    General,
    Tuned,
    Base,
}

impl ModelKind {
    fn tag(&self) -> u64 {
        match self {
            ModelKind::General => 1,
            ModelKind::Tuned => 2,
            ModelKind::Base => 3,
        }
    }
}

/// A pure function of (seed, context) exposing the next-logits interface.
pub struct SyntheticModel {
    vocab: Vocabulary,
    seed: u64,
    profile: SyntheticProfile,
    kind: ModelKind,
    name: String,
}

impl SyntheticModel {
    pub fn new(seed: u64, profile: SyntheticProfile, kind: ModelKind) -> Self {
        let name = match kind {
            ModelKind::General => "synthetic-general",
            ModelKind::Tuned => "synthetic-tuned",
            ModelKind::Base => "synthetic-base",
        };
        Self { vocab: synthetic_vocabulary(), seed, profile, kind, name: name.to_string() }
    }

    fn structured_logits(&self, role: PositionRole, target: TokenId, w: TokenId, u: TokenId, out: &mut [f64]) {
        let c = target.0 as usize;
        let w = w.0 as usize;
        let u = u.0 as usize;
        match (role, self.kind) {
            (PositionRole::Easy, ModelKind::Tuned) => out[c] += 6.0,
            (PositionRole::Easy, ModelKind::General) => out[c] += 2.0,
            (PositionRole::Easy, ModelKind::Base) => {}
            (PositionRole::GeneralEasy, ModelKind::General) => out[c] += 6.0,
            (PositionRole::GeneralEasy, _) => {}
            (PositionRole::CollabNeeded, ModelKind::Tuned) => {
                out[c] += 3.0;
                out[w] += 4.0;
            }
            (PositionRole::CollabNeeded, ModelKind::Base) => out[w] += 4.0,
            (PositionRole::CollabNeeded, ModelKind::General) => {
                out[c] += 1.0;
                out[w] += 2.0;
                out[u] += 2.5;
            }
            (PositionRole::PrivateNeeded, ModelKind::Tuned) => out[c] += 4.0,
            (PositionRole::PrivateNeeded, ModelKind::Base) => {}
            (PositionRole::PrivateNeeded, ModelKind::General) => out[w] += 8.0,
        }
    }
}

impl GenerationBackend for SyntheticModel {
    fn next_logits(&self, context: &[TokenId]) -> Result<LogitVector> {
        let mut logits = vec![0.0f64; self.vocab.size];
        // Tie-breaking noise, a pure function of (seed, model, context, token).
        let mut ctx_hash = mix(self.seed ^ self.kind.tag());
        for t in context {
            ctx_hash = mix(ctx_hash ^ (t.0 as u64 + 0x100));
        }
        for (tok, slot) in logits.iter_mut().enumerate() {
            *slot = NOISE * hash01(&[ctx_hash, tok as u64]);
        }

        let index = context.get(..QUERY_LEN).and_then(parse_task_index);
        let on_path = index.map(|i| {
            let spec = task_spec(self.seed, self.profile, i);
            let suffix = &context[QUERY_LEN..];
            // prefixes of the oracle decode get structured logits; anything
            // else (divergent or past its end) falls through to the eos bias
            if suffix.len() < spec.decode.len() && *suffix == spec.decode[..suffix.len()] {
                Some((spec, suffix.len()))
            } else {
                None
            }
        });

        match (index, on_path.flatten()) {
            (Some(i), Some((spec, pos))) => {
                let target = spec.decode[pos];
                let (w, u) = distractors(self.seed, self.profile, i, pos, target);
                self.structured_logits(spec.roles[pos], target, w, u, &mut logits);
            }
            (Some(_), None) => {
                // Off the oracle path or past its end: bias toward eos so
                // stray branches terminate quickly.
                logits[self.vocab.eos_id.0 as usize] += 2.0;
            }
            (None, _) => {
                logits[self.vocab.eos_id.0 as usize] += 2.0;
            }
        }

        debug_assert!(logits.iter().all(|z| z.abs() <= 20.0));
        LogitVector::new(logits)
    }

    fn vocabulary(&self) -> Vocabulary {
        self.vocab.clone()
    }

    fn id(&self) -> &str {
        &self.name
    }
}

/// Build the three synthetic models sharing one vocabulary.
/// Search settings matched to the synthetic tasks: one decode position pair
/// per step, answers at most three steps deep, and top-1 decoding so the
/// per-position logit structure decides every token.
pub fn recommended_search_config() -> crate::core::SearchConfig {
    crate::core::SearchConfig {
        step_length: SYNTH_STEP_LEN,
        max_depth: 3,
        expansion_budget: 2,
        deterministic_top1: true,
        ..crate::core::SearchConfig::default()
    }
}

pub fn synthetic_triple(seed: u64, profile: SyntheticProfile) -> BackendTriple {
    BackendTriple::new(
        Arc::new(SyntheticModel::new(seed, profile, ModelKind::General)),
        Arc::new(SyntheticModel::new(seed, profile, ModelKind::Tuned)),
        Arc::new(SyntheticModel::new(seed, profile, ModelKind::Base)),
    )
    .expect("synthetic models share a vocabulary")
}
