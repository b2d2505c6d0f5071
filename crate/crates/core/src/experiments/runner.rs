use rayon::prelude::*;

use crate::agents::{
    run_episode, AStarAgent, Goal, Heuristic, Planner, SoftmaxAgent, SoftmaxPolicy, TrialRecord,
};
use crate::sim::{Game, ScenarioOverrides, SimError};

/// The agent every trial of one batch plays with.
#[derive(Debug, Clone)]
pub enum TrialAgent {
    AStar {
        heuristic: Heuristic,
        node_budget: usize,
    },
    Softmax(SoftmaxPolicy),
}

impl TrialAgent {
    pub fn label(&self) -> String {
        match self {
            TrialAgent::AStar { .. } => "astar".into(),
            TrialAgent::Softmax(p) => format!("softmax@{}", p.temperature),
        }
    }

    fn planner(&self, game: &Game) -> Box<dyn Planner> {
        match self {
            TrialAgent::AStar {
                heuristic,
                node_budget,
            } => Box::new(AStarAgent::new(heuristic.clone(), *node_budget)),
            TrialAgent::Softmax(p) => Box::new(SoftmaxAgent::new(game, p.clone())),
        }
    }
}

/// Runs seeded trial batches, optionally on a private thread pool. Results
/// come back in trial order whatever the pool size.
pub struct Runner {
    pool: Option<rayon::ThreadPool>,
}

impl Runner {
    pub fn new(parallel: usize) -> Result<Self, rayon::ThreadPoolBuildError> {
        let pool = if parallel > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(parallel)
                    .build()?,
            )
        } else {
            None
        };
        Ok(Runner { pool })
    }

    pub fn sequential() -> Self {
        Runner { pool: None }
    }

    /// Trial `i` uses seed `base_seed ^ i`. Traces are dropped to keep memory
    /// flat; the event log and wait intervals are kept.
    pub fn trials(
        &self,
        game: &Game,
        scenario: &ScenarioOverrides,
        goal: &Goal,
        agent: &TrialAgent,
        trials: u32,
        base_seed: u64,
    ) -> Result<Vec<TrialRecord>, SimError> {
        let one = |i: u32| {
            let seed = base_seed ^ i as u64;
            let mut planner = agent.planner(game);
            let mut rec = run_episode(game, scenario, seed, planner.as_mut(), goal)?;
            rec.trial = i;
            rec.counters.trace = Vec::new();
            Ok(rec)
        };
        match &self.pool {
            Some(pool) => pool.install(|| (0..trials).into_par_iter().map(one).collect()),
            None => (0..trials).map(one).collect(),
        }
    }
}
