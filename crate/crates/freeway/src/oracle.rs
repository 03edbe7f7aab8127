//! Shortest-crossing search over `(timestep, Y)` nodes.
//!
//! The chicken's step sizes depend on the whole action history, so a
//! `(t, Y)` key does not fully determine the outgoing edges. The search
//! therefore pins one canonical path per node: whichever path first
//! creates a node owns it, and that node's edges are always simulated
//! from the canonical state. This trades a sliver of optimality for a
//! tractable graph; in deterministic mode the dynamics are Markovian and
//! the answer is exactly optimal.
//!
//! Edges are explored in the order up, stay, down, and ties in `f` are
//! broken toward deeper nodes, both of which favor runs of consecutive
//! up moves. An optional rollout speculatively extends an all-up chain
//! from each newly opened up-child until it hits a collision, a terminal,
//! an existing node, or the end of the game.

use crate::env::{replay, step, Action, GameConfig, GameOver, GameState, StepResult};
use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

/// Graph node identity: one node per `(timestep, Y)` pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeKey {
    pub t: u32,
    pub y: i32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Open,
    Closed,
    Collision,
    Terminal,
}

/// Search bookkeeping for one node. `(parent, action_from_parent)` are
/// set at creation and never change; that is the canonical-path pinning.
#[derive(Clone, Debug)]
pub struct NodeRecord {
    pub key: NodeKey,
    pub g: u32,
    pub parent: Option<NodeKey>,
    pub action_from_parent: Option<Action>,
    pub kind: NodeKind,
    /// Memoized result of replaying the canonical action sequence;
    /// present for nodes the search may continue from.
    pub cached_state: Option<GameState>,
}

/// All nodes created during one solve.
#[derive(Debug, Default)]
pub struct NodeGraph {
    nodes: HashMap<NodeKey, NodeRecord>,
}

impl NodeGraph {
    pub fn get(&self, key: NodeKey) -> Option<&NodeRecord> {
        self.nodes.get(&key)
    }

    pub fn contains(&self, key: NodeKey) -> bool {
        self.nodes.contains_key(&key)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &NodeRecord> {
        self.nodes.values()
    }

    fn insert(&mut self, record: NodeRecord) {
        let prev = self.nodes.insert(record.key, record);
        debug_assert!(prev.is_none(), "node keys are created at most once");
    }
}

/// A crossing found by the search: the action suffix to append after the
/// solve's prefix, plus search-size counters.
#[derive(Clone, Debug)]
pub struct CrossingSolution {
    pub start: NodeKey,
    pub actions: Vec<Action>,
    pub length: u32,
    pub nodes_expanded: u64,
    pub nodes_created: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("no crossing is reachable before the game ends")]
    NoPath,
    #[error("start state has cooldown {0}; callers must burn cooldown first")]
    StartCooldown(u32),
    #[error(transparent)]
    GameOver(#[from] GameOver),
    #[error("broken parent chain at node (t={0}, y={1})")]
    BrokenParentChain(u32, i32),
}

/// Remaining-cost lower bound: the chicken covers at most `step_max`
/// Y-units per timestep and never fewer than zero.
pub fn heuristic(y: i32, config: &GameConfig) -> u32 {
    assert!(
        y >= config.y_min && y <= config.y_cap,
        "heuristic: y out of range"
    );
    if y >= config.y_cross {
        0
    } else {
        ((config.y_cross - y + config.step_max - 1) / config.step_max) as u32
    }
}

/// Frontier ordering: lowest f first, ties toward larger g, then FIFO.
#[derive(PartialEq, Eq)]
struct FrontierEntry {
    f: u32,
    g: u32,
    seq: u64,
    key: NodeKey,
}

impl Ord for FrontierEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .cmp(&self.f)
            .then_with(|| self.g.cmp(&other.g))
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for FrontierEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

const EDGE_ORDER: [Action; 3] = [Action::Up, Action::Stay, Action::Down];

/// One crossing search over one session. Holds the node graph for
/// post-solve inspection; not shared across threads during a solve.
pub struct AstarSolver<'a> {
    config: &'a GameConfig,
    seed: u64,
    use_heuristic: bool,
    graph: NodeGraph,
    frontier: BinaryHeap<FrontierEntry>,
    seq: u64,
    nodes_expanded: u64,
    popped_f: Vec<u32>,
}

impl<'a> AstarSolver<'a> {
    pub fn new(seed: u64, config: &'a GameConfig) -> Self {
        AstarSolver {
            config,
            seed,
            use_heuristic: true,
            graph: NodeGraph::default(),
            frontier: BinaryHeap::new(),
            seq: 0,
            nodes_expanded: 0,
            popped_f: Vec::new(),
        }
    }

    /// Degrade to uniform-cost search (f = g). Used to measure how much
    /// work the heuristic saves.
    pub fn without_heuristic(mut self) -> Self {
        self.use_heuristic = false;
        self
    }

    pub fn graph(&self) -> &NodeGraph {
        &self.graph
    }

    /// f-values in pop order of the last solve.
    pub fn popped_f(&self) -> &[u32] {
        &self.popped_f
    }

    fn f_value(&self, g: u32, y: i32) -> u32 {
        if self.use_heuristic {
            g + heuristic(y, self.config)
        } else {
            g
        }
    }

    fn push_frontier(&mut self, key: NodeKey, g: u32) {
        let f = self.f_value(g, key.y);
        self.seq += 1;
        self.frontier.push(FrontierEntry {
            f,
            g,
            seq: self.seq,
            key,
        });
    }

    fn classify(result: &StepResult) -> NodeKind {
        if result.collided {
            NodeKind::Collision
        } else if result.crossed {
            NodeKind::Terminal
        } else {
            NodeKind::Open
        }
    }

    /// Create the child reached by `action` from `parent`, unless its key
    /// is already owned by an earlier path. Returns the new child's key
    /// and kind.
    fn try_create_child(
        &mut self,
        parent: NodeKey,
        parent_state: &GameState,
        parent_g: u32,
        action: Action,
    ) -> Result<Option<(NodeKey, NodeKind)>, GameOver> {
        let mut state = *parent_state;
        let result = step(&mut state, action, self.config)?;
        let key = NodeKey {
            t: result.t_after,
            y: result.new_y,
        };
        if self.graph.contains(key) {
            return Ok(None);
        }
        let kind = Self::classify(&result);
        let g = parent_g + 1;
        self.graph.insert(NodeRecord {
            key,
            g,
            parent: Some(parent),
            action_from_parent: Some(action),
            kind,
            cached_state: (kind == NodeKind::Open).then_some(state),
        });
        if kind != NodeKind::Collision {
            self.push_frontier(key, g);
        }
        Ok(Some((key, kind)))
    }

    /// Process a node: one child per action in up/stay/down order, then
    /// optionally the all-up rollout from a fresh up-child. The node ends
    /// closed; a game-over during simulation just means no children.
    fn expand(&mut self, key: NodeKey) -> Result<(), OracleError> {
        let record = self.graph.get(key).expect("expanding unknown node");
        debug_assert_eq!(record.kind, NodeKind::Open);
        let state = record.cached_state.expect("open node lost its state");
        let g = record.g;
        self.nodes_expanded += 1;

        let mut up_child = None;
        for action in EDGE_ORDER {
            match self.try_create_child(key, &state, g, action) {
                Ok(Some((child, NodeKind::Open))) if action == Action::Up => {
                    up_child = Some(child);
                }
                Ok(_) => {}
                Err(GameOver { .. }) => break,
            }
        }

        if self.config.rollout {
            if let Some(from) = up_child {
                self.rollout_up(from);
            }
        }

        self.graph
            .nodes
            .get_mut(&key)
            .expect("expanded node vanished")
            .kind = NodeKind::Closed;
        Ok(())
    }

    /// Speculatively chain up-moves from an open node, pinning each link
    /// to its predecessor, until a collision, terminal, existing key, or
    /// the end of the game stops the chain.
    fn rollout_up(&mut self, from: NodeKey) {
        let mut cur = from;
        loop {
            let record = self.graph.get(cur).expect("rollout from unknown node");
            debug_assert_eq!(record.kind, NodeKind::Open);
            let state = record.cached_state.expect("open node lost its state");
            let g = record.g;
            match self.try_create_child(cur, &state, g, Action::Up) {
                Ok(Some((child, NodeKind::Open))) => cur = child,
                Ok(_) | Err(GameOver { .. }) => break,
            }
        }
    }

    /// Find the shortest crossing after replaying `prefix`.
    pub fn solve(&mut self, prefix: &[Action]) -> Result<CrossingSolution, OracleError> {
        self.graph = NodeGraph::default();
        self.frontier.clear();
        self.seq = 0;
        self.nodes_expanded = 0;
        self.popped_f.clear();

        let start_state = replay(self.seed, prefix, self.config)?;
        if start_state.cooldown > 0 {
            return Err(OracleError::StartCooldown(start_state.cooldown));
        }
        let start = NodeKey {
            t: start_state.t,
            y: start_state.y,
        };
        self.graph.insert(NodeRecord {
            key: start,
            g: 0,
            parent: None,
            action_from_parent: None,
            kind: if start_state.y >= self.config.y_cross {
                NodeKind::Terminal
            } else {
                NodeKind::Open
            },
            cached_state: Some(start_state),
        });
        self.push_frontier(start, 0);

        while let Some(entry) = self.frontier.pop() {
            self.popped_f.push(entry.f);
            let kind = self
                .graph
                .get(entry.key)
                .expect("frontier entry without node")
                .kind;
            match kind {
                NodeKind::Terminal => {
                    let actions = reconstruct_path(&self.graph, entry.key)?;
                    return Ok(CrossingSolution {
                        start,
                        length: actions.len() as u32,
                        actions,
                        nodes_expanded: self.nodes_expanded,
                        nodes_created: self.graph.len() as u64,
                    });
                }
                NodeKind::Open => self.expand(entry.key)?,
                NodeKind::Closed | NodeKind::Collision => {
                    unreachable!("closed or collision nodes are never queued")
                }
            }
        }
        Err(OracleError::NoPath)
    }
}

/// Walk the pinned back edges from `terminal` to the start node and
/// return the actions in forward order.
pub fn reconstruct_path(graph: &NodeGraph, terminal: NodeKey) -> Result<Vec<Action>, OracleError> {
    let broken = |key: NodeKey| OracleError::BrokenParentChain(key.t, key.y);
    let mut actions = Vec::new();
    let mut cur = graph.get(terminal).ok_or_else(|| broken(terminal))?;
    let budget = cur.g as usize + 1;
    while let Some(parent) = cur.parent {
        if actions.len() >= budget {
            return Err(broken(cur.key));
        }
        actions.push(cur.action_from_parent.ok_or_else(|| broken(cur.key))?);
        cur = graph.get(parent).ok_or_else(|| broken(parent))?;
    }
    actions.reverse();
    Ok(actions)
}

/// Shortest crossing after `prefix`, with a fresh graph per call.
pub fn solve_crossing(
    seed: u64,
    prefix: &[Action],
    config: &GameConfig,
) -> Result<CrossingSolution, OracleError> {
    AstarSolver::new(seed, config).solve(prefix)
}
