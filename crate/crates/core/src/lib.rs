//! Tuning data model, deterministic game simulator, playtesting agents and
//! experiment harness.

pub mod agents;
pub mod experiments;
pub mod sim;
pub mod tuning;

pub use sim::{Game, GameState, ScenarioOverrides, SimError, SimState};
pub use tuning::{parse_tuning, TuningConfig, TuningError};
