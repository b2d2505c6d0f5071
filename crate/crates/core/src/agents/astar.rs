use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashMap;

use super::episode::{Decision, Planner, StopReason};
use super::goal::Goal;
use super::heuristic::Heuristic;
use super::moves::{apply_move, moves, Move};
use crate::sim::{Game, GameState, SimState};

/// Expansion budget per decision used throughout the studies.
pub const DEFAULT_NODE_BUDGET: usize = 2000;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub expanded: usize,
    pub generated: usize,
    pub goal_found: bool,
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    /// First edge of the chosen path, or why there is none.
    pub step: Result<Move, StopReason>,
    /// Action count of the chosen path's end node, relative to the root.
    pub path_cost: u32,
    pub stats: SearchStats,
}

struct Node {
    state: SimState,
    g: u32,
    f: f64,
    key: u64,
    first: Option<Move>,
}

#[derive(Clone, Copy)]
struct Entry {
    f: f64,
    clock: u64,
    key: u64,
    ix: u32,
}

impl Entry {
    fn rank(&self, other: &Self) -> Ordering {
        self.f
            .total_cmp(&other.f)
            .then(self.clock.cmp(&other.clock))
            .then(self.key.cmp(&other.key))
    }
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.rank(other) == Ordering::Equal
    }
}
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other.rank(self)
    }
}

/// Bounded best-first search from `root`, where `actions_taken` is the
/// episode's action count so far (for the hard action limit).
///
/// Nodes are expanded by (f, elapsed clock, random key drawn at push). The
/// goal test happens at pop. When the budget runs out, the first edge toward
/// the open node with least f is returned; least g then the random key break
/// ties.
pub fn search(
    game: &Game,
    heuristic: &Heuristic,
    root: &SimState,
    actions_taken: u32,
    node_budget: usize,
    rng: &mut ChaCha8Rng,
) -> SearchResult {
    let goal: &Goal = heuristic.goal();
    let mut stats = SearchStats::default();
    let done = |step, path_cost, stats| SearchResult {
        step,
        path_cost,
        stats,
    };
    if goal.satisfied(root) {
        stats.goal_found = true;
        return done(Err(StopReason::GoalReached), 0, stats);
    }
    if moves(game, root).is_empty() {
        return done(Err(StopReason::Deadlock), 0, stats);
    }

    let mut nodes: Vec<Node> = Vec::with_capacity(node_budget * 4);
    let mut best_g: FxHashMap<SimState, u32> = FxHashMap::default();
    let mut open = BinaryHeap::new();
    let h0 = heuristic.eval(game, root);
    nodes.push(Node {
        state: root.clone(),
        g: 0,
        f: h0,
        key: rng.random(),
        first: None,
    });
    best_g.insert(root.clone(), 0);
    open.push(Entry {
        f: h0,
        clock: root.clock(),
        key: nodes[0].key,
        ix: 0,
    });

    while let Some(entry) = open.pop() {
        let ix = entry.ix as usize;
        let g = nodes[ix].g;
        if best_g.get(&nodes[ix].state).is_some_and(|&b| b < g) {
            continue;
        }
        if goal.satisfied(&nodes[ix].state) {
            stats.goal_found = true;
            let first = nodes[ix].first.expect("root is not a goal");
            return done(Ok(first), g, stats);
        }
        if stats.expanded >= node_budget {
            // put it back so it competes as a frontier node
            open.push(entry);
            break;
        }
        stats.expanded += 1;
        let parent = nodes[ix].state.clone();
        let first = nodes[ix].first;
        for m in moves(game, &parent) {
            let mut child = parent.clone();
            if apply_move(game, &mut child, m, &mut ()).is_err() {
                continue;
            }
            let cg = g + m.cost();
            if !goal.within_limits(child.clock(), actions_taken + cg) {
                continue;
            }
            if best_g.get(&child).is_some_and(|&b| b <= cg) {
                continue;
            }
            stats.generated += 1;
            best_g.insert(child.clone(), cg);
            let f = cg as f64 + heuristic.eval(game, &child);
            let key = rng.random();
            let clock = child.clock();
            nodes.push(Node {
                state: child,
                g: cg,
                f,
                key,
                first: Some(first.unwrap_or(m)),
            });
            open.push(Entry {
                f,
                clock,
                key,
                ix: (nodes.len() - 1) as u32,
            });
        }
    }

    let frontier = open
        .iter()
        .filter(|e| {
            let n = &nodes[e.ix as usize];
            n.first.is_some() && best_g.get(&n.state).is_none_or(|&b| b >= n.g)
        })
        .min_by(|a, b| {
            let (na, nb) = (&nodes[a.ix as usize], &nodes[b.ix as usize]);
            na.f.total_cmp(&nb.f)
                .then(na.g.cmp(&nb.g))
                .then(na.key.cmp(&nb.key))
        });
    match frontier {
        Some(e) => {
            let n = &nodes[e.ix as usize];
            done(Ok(n.first.expect("filtered")), n.g, stats)
        }
        None if stats.generated == 0 => done(Err(StopReason::HardLimit), 0, stats),
        None => done(Err(StopReason::Unreachable), 0, stats),
    }
}

/// Receding-horizon A*: replans from scratch before every decision and
/// commits only to the first edge.
#[derive(Debug, Clone)]
pub struct AStarAgent {
    pub heuristic: Heuristic,
    pub node_budget: usize,
    last: SearchStats,
}

impl AStarAgent {
    pub fn new(heuristic: Heuristic, node_budget: usize) -> Self {
        assert!(node_budget >= 1, "node budget must be at least 1");
        AStarAgent {
            heuristic,
            node_budget,
            last: SearchStats::default(),
        }
    }

    pub fn last_stats(&self) -> SearchStats {
        self.last
    }
}

impl Planner for AStarAgent {
    fn decide(&mut self, game: &Game, state: &GameState, rng: &mut ChaCha8Rng) -> Decision {
        let result = search(
            game,
            &self.heuristic,
            &state.sim,
            state.counters.total_actions,
            self.node_budget,
            rng,
        );
        self.last = result.stats;
        match result.step {
            Ok(m) => Decision::from_move(game, &state.sim, m),
            Err(reason) => Decision::Stop(reason),
        }
    }

    fn last_expanded(&self) -> usize {
        self.last.expanded
    }
}
