//! Domain types for the reasoning tree: tokens, steps, node statistics, and
//! search configuration. Pure state, no model or network access.

use serde::{Deserialize, Serialize};

use crate::error::{GBoostError, Result};

/// Index into a shared vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenId(pub u32);

/// Shared vocabulary description. All backends in a search must agree on it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    pub size: usize,
    pub eos_id: TokenId,
    /// Token pattern whose appearance marks a final answer.
    pub answer_marker_ids: Vec<TokenId>,
}

impl Vocabulary {
    pub fn new(size: usize, eos_id: TokenId, answer_marker_ids: Vec<TokenId>) -> Result<Self> {
        if size == 0 {
            return Err(GBoostError::InvalidInput("vocabulary size must be positive".into()));
        }
        if eos_id.0 as usize >= size {
            return Err(GBoostError::InvalidInput(format!(
                "eos id {} out of range for vocabulary of size {size}",
                eos_id.0
            )));
        }
        if let Some(bad) = answer_marker_ids.iter().find(|t| t.0 as usize >= size) {
            return Err(GBoostError::InvalidInput(format!(
                "answer marker id {} out of range for vocabulary of size {size}",
                bad.0
            )));
        }
        Ok(Self { size, eos_id, answer_marker_ids })
    }
}

/// Input query, tokenized against the shared vocabulary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    pub token_ids: Vec<TokenId>,
    pub text: Option<String>,
}

impl Query {
    pub fn new(token_ids: Vec<TokenId>) -> Result<Self> {
        if token_ids.is_empty() {
            return Err(GBoostError::InvalidInput("query token list is empty".into()));
        }
        Ok(Self { token_ids, text: None })
    }

    pub fn with_text(mut self, text: impl Into<String>) -> Self {
        self.text = Some(text.into());
        self
    }
}

/// Which policy generated a reasoning step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ActionKind {
    Collaborative,
    Private,
}

/// One reasoning step: up to `L` tokens plus generation metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReasoningStep {
    pub token_ids: Vec<TokenId>,
    pub log_prob: f64,
    pub action: ActionKind,
    pub is_terminal: bool,
}

/// How a node may be expanded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExpandStrategy {
    /// One child per expanding iteration.
    Single,
    /// All remaining-budget children at once.
    Full,
}

/// All search hyperparameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    /// Exploration constant `C` in the UCT score.
    pub c_explore: f64,
    /// Maximum tokens per reasoning step (`L`).
    pub step_length: usize,
    /// Search iterations (`T`).
    pub max_iterations: usize,
    /// Probability of choosing the collaborative action at expansion.
    pub p_collab: f64,
    /// Maximum children per node (`B`).
    pub expansion_budget: usize,
    pub expand_strategy: ExpandStrategy,
    /// Steps after which a node is forced terminal.
    pub max_depth: usize,
    pub temperature: f64,
    pub seed: u64,
    /// Take the argmax token at every position instead of sampling.
    pub deterministic_top1: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            c_explore: 1.0,
            step_length: 64,
            max_iterations: 32,
            p_collab: 0.5,
            expansion_budget: 3,
            expand_strategy: ExpandStrategy::Single,
            max_depth: 16,
            temperature: 1.0,
            seed: 0,
            deterministic_top1: false,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.c_explore.is_nan() || self.c_explore < 0.0 {
            return Err(GBoostError::InvalidInput("c_explore must be >= 0".into()));
        }
        if self.step_length == 0 {
            return Err(GBoostError::InvalidInput("step_length must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(GBoostError::InvalidInput("max_iterations must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.p_collab) {
            return Err(GBoostError::InvalidInput("p_collab must be in [0,1]".into()));
        }
        if self.expansion_budget == 0 {
            return Err(GBoostError::InvalidInput("expansion_budget must be positive".into()));
        }
        if self.max_depth == 0 {
            return Err(GBoostError::InvalidInput("max_depth must be positive".into()));
        }
        if self.temperature.is_nan() || self.temperature <= 0.0 {
            return Err(GBoostError::InvalidInput("temperature must be > 0".into()));
        }
        Ok(())
    }
}

/// Unnormalized scores over the shared vocabulary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LogitVector(pub Vec<f64>);

impl LogitVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(GBoostError::InvalidInput(format!("non-finite logit {bad}")));
        }
        Ok(Self(values))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Handle into a [`SearchTree`]'s node store. Ids are assigned in creation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

/// One node of the reasoning tree with its MCTS statistics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchNode {
    pub id: NodeId,
    pub parent: Option<NodeId>,
    /// Absent only at the root.
    pub step: Option<ReasoningStep>,
    /// Running-mean value `V_s`.
    pub value: f64,
    /// Visit count `N_s`.
    pub visits: u64,
    /// Times this node was the backprop origin.
    pub eval_count: u64,
    pub children: Vec<NodeId>,
    pub expansions_remaining: usize,
    /// Reward assigned when this node was first evaluated; reused when
    /// selection lands on it again.
    pub cached_reward: Option<f64>,
}

/// Per-iteration record of the search loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub iteration: usize,
    pub selected_path: Vec<NodeId>,
    pub expanded_from: NodeId,
    pub action: ActionKind,
    pub new_node: NodeId,
    pub sampled_tokens: Vec<TokenId>,
    pub reward: f64,
    pub updated_values: Vec<(NodeId, f64, u64)>,
}

/// The search tree for one query.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchTree {
    pub query: Query,
    pub nodes: Vec<SearchNode>,
    pub root: NodeId,
    pub terminal_ids: Vec<NodeId>,
}

/// Initialize a tree with a single root node holding the query.
pub fn tree_new(query: Query, config: &SearchConfig) -> Result<SearchTree> {
    config.validate()?;
    if query.token_ids.is_empty() {
        return Err(GBoostError::InvalidInput("query token list is empty".into()));
    }
    let root = SearchNode {
        id: NodeId(0),
        parent: None,
        step: None,
        value: 0.0,
        visits: 0,
        eval_count: 0,
        children: Vec::new(),
        expansions_remaining: config.expansion_budget,
        cached_reward: None,
    };
    Ok(SearchTree {
        query,
        nodes: vec![root],
        root: NodeId(0),
        terminal_ids: Vec::new(),
    })
}

impl SearchTree {
    pub fn node(&self, id: NodeId) -> Result<&SearchNode> {
        self.nodes.get(id.0).ok_or(GBoostError::NodeNotFound(id))
    }

    pub fn node_mut(&mut self, id: NodeId) -> Result<&mut SearchNode> {
        self.nodes.get_mut(id.0).ok_or(GBoostError::NodeNotFound(id))
    }

    /// Append a child node under `parent`. Caller maintains budget bookkeeping.
    pub fn add_child(
        &mut self,
        parent: NodeId,
        step: ReasoningStep,
        expansion_budget: usize,
    ) -> Result<NodeId> {
        self.node(parent)?;
        let id = NodeId(self.nodes.len());
        let terminal = step.is_terminal;
        self.nodes.push(SearchNode {
            id,
            parent: Some(parent),
            step: Some(step),
            value: 0.0,
            visits: 0,
            eval_count: 0,
            children: Vec::new(),
            expansions_remaining: expansion_budget,
            cached_reward: None,
        });
        self.nodes[parent.0].children.push(id);
        if terminal {
            self.terminal_ids.push(id);
        }
        Ok(id)
    }

    /// Node ids from root to `node`, inclusive.
    pub fn path_ids(&self, node: NodeId) -> Result<Vec<NodeId>> {
        let mut ids = Vec::new();
        let mut cur = Some(node);
        while let Some(id) = cur {
            ids.push(id);
            cur = self.node(id)?.parent;
        }
        ids.reverse();
        Ok(ids)
    }

    /// Depth in steps: 0 at the root.
    pub fn depth(&self, node: NodeId) -> Result<usize> {
        Ok(self.path_ids(node)?.len() - 1)
    }

    /// Checks the visit-count bookkeeping over the whole tree:
    /// `N_s == eval_count + sum of children N_s` for every node.
    pub fn validate_counts(&self) -> Result<()> {
        for node in &self.nodes {
            let child_sum: u64 = node
                .children
                .iter()
                .map(|c| self.nodes[c.0].visits)
                .sum();
            if node.visits != node.eval_count + child_sum {
                return Err(GBoostError::Invariant(format!(
                    "node {:?}: visits {} != eval_count {} + children {}",
                    node.id, node.visits, node.eval_count, child_sum
                )));
            }
        }
        Ok(())
    }
}

/// Reasoning steps along the root-to-node trajectory, excluding the stepless root.
pub fn path_steps(tree: &SearchTree, node: NodeId) -> Result<Vec<ReasoningStep>> {
    let ids = tree.path_ids(node)?;
    Ok(ids
        .into_iter()
        .filter_map(|id| tree.nodes[id.0].step.clone())
        .collect())
}

/// UCT score `V_s + C * sqrt(ln N_parent / N_s)`.
///
/// Unvisited nodes score positive infinity so each fresh child is visited
/// once before any comparison by value.
pub fn uct_score(value: f64, visits: u64, parent_visits: u64, c: f64) -> Result<f64> {
    if visits == 0 {
        return Ok(f64::INFINITY);
    }
    if parent_visits == 0 {
        return Err(GBoostError::Invariant(
            "visited node under an unvisited parent".into(),
        ));
    }
    Ok(value + c * ((parent_visits as f64).ln() / visits as f64).sqrt())
}
