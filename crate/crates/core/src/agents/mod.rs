//! Playtesting agents: bounded receding-horizon A* and a Softmax baseline.

mod astar;
mod episode;
mod goal;
mod heuristic;
mod moves;
mod softmax;

pub use astar::{search, AStarAgent, SearchResult, SearchStats, DEFAULT_NODE_BUDGET};
pub use episode::{run_episode, Decision, Planner, StopReason, TrialRecord};
pub use goal::{Goal, GoalPredicate, GoalSpec, HardLimits, Target};
pub use heuristic::{Heuristic, DEFAULT_WEIGHT, HeuristicError, HeuristicSpec, Term};
pub use moves::{apply_move, moves, wait_target, Move, Moves};
pub use softmax::{
    episode_return, softmax, softmax_decide, train_softmax, FeatureTable, PolicyError,
    SoftmaxAgent, SoftmaxPolicy, TrainConfig, TrainError, TrainOutcome, FEATURE_NAMES,
    N_FEATURES,
};
