//! The search loop: UCT descent, trajectory re-selection by value, expansion
//! through one of the two decoding modes, PRM evaluation, and backpropagation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::core::{
    path_steps, tree_new, uct_score, ActionKind, ExpandStrategy, NodeId, Query, SearchConfig,
    SearchTree, TokenId, TraceEvent,
};
use crate::error::{GBoostError, Result};
use crate::policy::{
    detect_termination, sample_step_collaborative, sample_step_private, BackendTriple, StepSample,
};
use crate::reward::{score, RewardModel};

/// Final output of a search.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReasoningResult {
    pub best_path: Vec<NodeId>,
    pub answer_tokens: Vec<TokenId>,
    pub best_value: f64,
    pub iterations_run: usize,
    pub terminal_found: bool,
    pub trace: Vec<TraceEvent>,
    /// Set when the search aborted early on an unrecoverable backend failure.
    pub error: Option<String>,
}

/// Descend from the root by UCT until a childless node is reached.
/// Unvisited children win immediately; ties break by creation order.
pub fn select_leaf(tree: &SearchTree, c: f64) -> Result<NodeId> {
    let mut cur = tree.root;
    loop {
        let node = tree.node(cur)?;
        if node.children.is_empty() {
            return Ok(cur);
        }
        let mut best = node.children[0];
        let mut best_score = f64::NEG_INFINITY;
        for &child_id in &node.children {
            let child = tree.node(child_id)?;
            let s = uct_score(child.value, child.visits, node.visits, c)?;
            if s > best_score {
                best_score = s;
                best = child_id;
            }
        }
        cur = best;
    }
}

/// Nodes on the root-to-leaf trajectory that still have unexpanded actions
/// and are not terminal.
pub fn candidate_set(tree: &SearchTree, leaf: NodeId) -> Result<Vec<NodeId>> {
    let mut out = Vec::new();
    for id in tree.path_ids(leaf)? {
        let node = tree.node(id)?;
        let terminal = node.step.as_ref().map(|s| s.is_terminal).unwrap_or(false);
        if node.expansions_remaining > 0 && !terminal {
            out.push(id);
        }
    }
    Ok(out)
}

/// Highest-value candidate; ties break by earliest creation.
pub fn pick_expansion_node(tree: &SearchTree, candidates: &[NodeId]) -> Result<NodeId> {
    let mut best: Option<NodeId> = None;
    for &id in candidates {
        let node = tree.node(id)?;
        match best {
            None => best = Some(id),
            Some(b) => {
                if node.value > tree.node(b)?.value {
                    best = Some(id);
                }
            }
        }
    }
    best.ok_or_else(|| GBoostError::Invariant("empty candidate set".into()))
}

/// Propagate a reward from `origin` up to the root, updating running means
/// and visit counts.
pub fn backpropagate(tree: &mut SearchTree, origin: NodeId, reward: f64) -> Result<Vec<(NodeId, f64, u64)>> {
    if !(0.0..=1.0).contains(&reward) {
        return Err(GBoostError::InvalidInput(format!("reward {reward} outside [0,1]")));
    }
    tree.node_mut(origin)?.eval_count += 1;
    let mut updated = Vec::new();
    let mut cur = Some(origin);
    while let Some(id) = cur {
        let node = tree.node_mut(id)?;
        node.visits += 1;
        node.value = ((node.visits - 1) as f64 * node.value + reward) / node.visits as f64;
        updated.push((id, node.value, node.visits));
        cur = node.parent;
    }
    Ok(updated)
}

/// One search over one query. Construct, then call [`SearchEngine::run`], or
/// drive iterations manually with [`SearchEngine::step`].
pub struct SearchEngine<'a> {
    tree: SearchTree,
    backends: &'a BackendTriple,
    prm: &'a dyn RewardModel,
    config: SearchConfig,
    rng: ChaCha8Rng,
    iteration: usize,
    trace: Vec<TraceEvent>,
}

impl<'a> SearchEngine<'a> {
    pub fn new(
        query: Query,
        backends: &'a BackendTriple,
        prm: &'a dyn RewardModel,
        config: SearchConfig,
    ) -> Result<Self> {
        config.validate()?;
        let tree = tree_new(query, &config)?;
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        Ok(Self { tree, backends, prm, config, rng, iteration: 0, trace: Vec::new() })
    }

    pub fn tree(&self) -> &SearchTree {
        &self.tree
    }

    pub fn trace(&self) -> &[TraceEvent] {
        &self.trace
    }

    fn draw_action(&mut self) -> ActionKind {
        let u: f64 = self.rng.random();
        if u < self.config.p_collab {
            ActionKind::Collaborative
        } else {
            ActionKind::Private
        }
    }

    fn generate_step(&mut self, parent: NodeId, action: ActionKind) -> Result<StepSample> {
        let prior = path_steps(&self.tree, parent)?;
        let query = self.tree.query.clone();
        match action {
            ActionKind::Collaborative => {
                sample_step_collaborative(self.backends, &query, &prior, &self.config, &mut self.rng)
            }
            ActionKind::Private => sample_step_private(
                self.backends.tuned.as_ref(),
                &query,
                &prior,
                &self.config,
                &mut self.rng,
            ),
        }
    }

    /// Expand `node` with one child (Single) or all remaining-budget children
    /// (Full), evaluating and backpropagating each in creation order.
    /// Returns the created children and the trace fields of the first one.
    fn expand_and_evaluate(&mut self, node: NodeId) -> Result<ExpandOutcome> {
        let n = self.tree.node(node)?;
        if n.expansions_remaining == 0 {
            return Err(GBoostError::Invariant("expansion budget exhausted".into()));
        }
        if n.step.as_ref().map(|s| s.is_terminal).unwrap_or(false) {
            return Err(GBoostError::Invariant("cannot expand a terminal node".into()));
        }
        let count = match self.config.expand_strategy {
            ExpandStrategy::Single => 1,
            ExpandStrategy::Full => n.expansions_remaining,
        };
        let child_depth = self.tree.depth(node)? + 1;
        let vocab = self.backends.vocabulary();

        // Generate all steps before touching the tree so a backend failure
        // leaves it unchanged.
        let mut samples = Vec::with_capacity(count);
        for _ in 0..count {
            let mut action = self.draw_action();
            // Under top-1 decoding a repeated action reproduces an existing
            // child verbatim; switch to the unused action when one exists so
            // a budget of two can cover both modes.
            if self.config.deterministic_top1
                && self.config.p_collab > 0.0
                && self.config.p_collab < 1.0
            {
                let node_ref = self.tree.node(node)?;
                let has = |a: ActionKind| {
                    node_ref.children.iter().any(|c| {
                        self.tree.nodes[c.0].step.as_ref().map(|s| s.action) == Some(a)
                    }) || samples.iter().any(|s: &StepSample| s.step.action == a)
                };
                if has(action) {
                    let other = match action {
                        ActionKind::Collaborative => ActionKind::Private,
                        ActionKind::Private => ActionKind::Collaborative,
                    };
                    if !has(other) {
                        action = other;
                    }
                }
            }
            let mut sample = self.generate_step(node, action)?;
            sample.step.is_terminal = detect_termination(
                &sample.step.token_ids,
                &vocab,
                child_depth,
                self.config.max_depth,
            );
            samples.push(sample);
        }

        let mut children = Vec::with_capacity(count);
        type FirstChild = (ActionKind, Vec<TokenId>, f64, Vec<(NodeId, f64, u64)>);
        let mut first: Option<FirstChild> = None;
        for sample in samples {
            let action = sample.step.action;
            let tokens = sample.step.token_ids.clone();
            let child = self.tree.add_child(node, sample.step, self.config.expansion_budget)?;
            self.tree.node_mut(node)?.expansions_remaining -= 1;
            let steps = path_steps(&self.tree, child)?;
            let reward = score(self.prm, &self.tree.query, &steps)?;
            self.tree.node_mut(child)?.cached_reward = Some(reward.value);
            let updated = backpropagate(&mut self.tree, child, reward.value)?;
            if first.is_none() {
                first = Some((action, tokens, reward.value, updated));
            }
            children.push(child);
        }
        let (action, tokens, reward, updated) = first.expect("count >= 1");
        Ok(ExpandOutcome { children, action, tokens, reward, updated })
    }

    /// Run one iteration of the search loop.
    pub fn step(&mut self) -> Result<TraceEvent> {
        self.iteration += 1;
        let leaf = select_leaf(&self.tree, self.config.c_explore)?;
        let selected_path = self.tree.path_ids(leaf)?;
        let candidates = candidate_set(&self.tree, leaf)?;

        let event = if candidates.is_empty() {
            // Nothing to expand on this trajectory: re-backpropagate the
            // leaf's cached reward so the iteration still counts.
            let node = self.tree.node(leaf)?;
            let reward = node.cached_reward.unwrap_or(node.value);
            let action = node.step.as_ref().map(|s| s.action).unwrap_or(ActionKind::Private);
            let updated = backpropagate(&mut self.tree, leaf, reward)?;
            TraceEvent {
                iteration: self.iteration,
                selected_path,
                expanded_from: leaf,
                action,
                new_node: leaf,
                sampled_tokens: Vec::new(),
                reward,
                updated_values: updated,
            }
        } else {
            let target = pick_expansion_node(&self.tree, &candidates)?;
            let outcome = self.expand_and_evaluate(target)?;
            TraceEvent {
                iteration: self.iteration,
                selected_path,
                expanded_from: target,
                action: outcome.action,
                new_node: outcome.children[0],
                sampled_tokens: outcome.tokens,
                reward: outcome.reward,
                updated_values: outcome.updated,
            }
        };
        self.trace.push(event.clone());
        Ok(event)
    }

    /// Run the configured number of iterations and extract the answer.
    pub fn run(mut self) -> Result<ReasoningResult> {
        let mut error = None;
        for _ in 0..self.config.max_iterations {
            if let Err(e) = self.step() {
                error = Some(e.to_string());
                self.iteration -= 1;
                break;
            }
        }
        let mut result = extract_answer(&self.tree, self.backends, &self.config)?;
        result.iterations_run = self.iteration;
        result.trace = self.trace;
        result.error = error;
        Ok(result)
    }
}

struct ExpandOutcome {
    children: Vec<NodeId>,
    action: ActionKind,
    tokens: Vec<TokenId>,
    reward: f64,
    updated: Vec<(NodeId, f64, u64)>,
}

/// Single-call search: build an engine, run `T` iterations, extract.
pub fn run_search(
    query: Query,
    backends: &BackendTriple,
    prm: &dyn RewardModel,
    config: &SearchConfig,
) -> Result<ReasoningResult> {
    SearchEngine::new(query, backends, prm, config.clone())?.run()
}

fn answer_from_tokens(all: impl IntoIterator<Item = TokenId>, eos: TokenId) -> Vec<TokenId> {
    let mut out = Vec::new();
    for t in all {
        if t == eos {
            break;
        }
        out.push(t);
    }
    out
}

/// Pick the best terminal path, or greedy-complete the best leaf with the
/// private model when no terminal node exists.
pub fn extract_answer(
    tree: &SearchTree,
    backends: &BackendTriple,
    config: &SearchConfig,
) -> Result<ReasoningResult> {
    let vocab = backends.vocabulary();
    if !tree.terminal_ids.is_empty() {
        let mut best = tree.terminal_ids[0];
        for &id in &tree.terminal_ids[1..] {
            let a = tree.node(id)?;
            let b = tree.node(best)?;
            let key = |n: &crate::core::SearchNode, depth: usize| {
                (n.value, n.cached_reward.unwrap_or(0.0), std::cmp::Reverse(depth))
            };
            let ka = key(a, tree.depth(id)?);
            let kb = key(b, tree.depth(best)?);
            // Strictly better on (value, cached reward, shallower depth);
            // equal keys keep the earlier-created node.
            if ka.partial_cmp(&kb) == Some(std::cmp::Ordering::Greater) {
                best = id;
            }
        }
        let path = tree.path_ids(best)?;
        let tokens = path_steps(tree, best)?.into_iter().flat_map(|s| s.token_ids);
        return Ok(ReasoningResult {
            best_path: path,
            answer_tokens: answer_from_tokens(tokens, vocab.eos_id),
            best_value: tree.node(best)?.value,
            iterations_run: tree.node(tree.root)?.visits as usize,
            terminal_found: true,
            trace: Vec::new(),
            error: None,
        });
    }

    // Fallback: no terminal found within budget. Greedy-complete the
    // highest-value leaf with the private model.
    let mut best_leaf = tree.root;
    let mut best_value = f64::NEG_INFINITY;
    for node in &tree.nodes {
        if node.children.is_empty() && node.value > best_value {
            best_value = node.value;
            best_leaf = node.id;
        }
    }
    let mut steps = path_steps(tree, best_leaf)?;
    let mut depth = tree.depth(best_leaf)?;
    let greedy = SearchConfig { deterministic_top1: true, ..config.clone() };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    while depth < config.max_depth {
        let sample =
            sample_step_private(backends.tuned.as_ref(), &tree.query, &steps, &greedy, &mut rng)?;
        depth += 1;
        let terminal = detect_termination(&sample.step.token_ids, &vocab, depth, config.max_depth);
        steps.push(sample.step);
        if terminal {
            break;
        }
    }
    let tokens = steps.into_iter().flat_map(|s| s.token_ids);
    Ok(ReasoningResult {
        best_path: tree.path_ids(best_leaf)?,
        answer_tokens: answer_from_tokens(tokens, vocab.eos_id),
        best_value: tree.node(best_leaf)?.value,
        iterations_run: tree.node(tree.root)?.visits as usize,
        terminal_found: false,
        trace: Vec::new(),
        error: None,
    })
}
