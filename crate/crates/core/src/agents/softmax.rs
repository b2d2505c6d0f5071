use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::episode::{Decision, Planner, StopReason};
use super::goal::Goal;
use super::moves::{apply_move, moves, Move};
use crate::sim::{Game, GameState, ScenarioOverrides, SimError, SimState};

/// Feature order of [`SoftmaxPolicy::weights`].
pub const FEATURE_NAMES: [&str; 11] = [
    "cost",
    "items_consumed",
    "duration",
    "cooldown",
    "career_xp",
    "event_xp",
    "relationship_xp",
    "resource_reward",
    "item_reward",
    "starts_event",
    "is_wait",
];
pub const N_FEATURES: usize = FEATURE_NAMES.len();

type Features = [f64; N_FEATURES];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolicyError {
    #[error("expected {expected} weights, found {found}")]
    WeightCount { expected: usize, found: usize },
    #[error("feature {index} is `{found}`, expected `{expected}`")]
    FeatureName {
        index: usize,
        found: String,
        expected: String,
    },
    #[error("weights must be finite")]
    NonFiniteWeight,
    #[error("temperature must be finite and positive, got {0}")]
    BadTemperature(f64),
}

/// Linear utility over static action parameters, sampled through a softmax.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoftmaxPolicy {
    pub feature_names: Vec<String>,
    pub weights: Vec<f64>,
    pub temperature: f64,
}

impl SoftmaxPolicy {
    pub fn zeros(temperature: f64) -> Self {
        SoftmaxPolicy {
            feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
            weights: vec![0.0; N_FEATURES],
            temperature,
        }
    }

    pub fn with_temperature(&self, temperature: f64) -> Self {
        SoftmaxPolicy {
            temperature,
            ..self.clone()
        }
    }

    pub fn check(&self) -> Result<(), PolicyError> {
        if self.weights.len() != N_FEATURES {
            return Err(PolicyError::WeightCount {
                expected: N_FEATURES,
                found: self.weights.len(),
            });
        }
        for (i, (found, expected)) in self.feature_names.iter().zip(FEATURE_NAMES).enumerate() {
            if found != expected {
                return Err(PolicyError::FeatureName {
                    index: i,
                    found: found.clone(),
                    expected: expected.into(),
                });
            }
        }
        if self.feature_names.len() != N_FEATURES {
            return Err(PolicyError::WeightCount {
                expected: N_FEATURES,
                found: self.feature_names.len(),
            });
        }
        if self.weights.iter().any(|w| !w.is_finite()) {
            return Err(PolicyError::NonFiniteWeight);
        }
        if !(self.temperature.is_finite() && self.temperature > 0.0) {
            return Err(PolicyError::BadTemperature(self.temperature));
        }
        Ok(())
    }

    fn utility(&self, phi: &Features) -> f64 {
        self.weights.iter().zip(phi).map(|(w, x)| w * x).sum()
    }
}

/// Static per-action features, each scaled by its maximum over all actions so
/// every feature lies in [0, 1].
#[derive(Debug, Clone)]
pub struct FeatureTable {
    actions: Vec<Features>,
}

impl FeatureTable {
    pub fn new(game: &Game) -> Self {
        let raw: Vec<Features> = game
            .actions()
            .iter()
            .map(|a| {
                let mut f = [0.0; N_FEATURES];
                f[0] = a.costs.iter().map(|&(_, n)| n as f64).sum();
                f[1] = a.consumes.iter().map(|&(_, n)| n as f64).sum();
                f[2] = a.duration as f64;
                f[3] = a.cooldown as f64;
                f[4] = a.reward.career_xp as f64;
                f[5] = a.reward.event_xp as f64;
                f[6] = a.reward.relationship_xp as f64;
                f[7] = a.reward.resources.iter().map(|&(_, n)| n as f64).sum();
                f[8] = a.reward.items.iter().map(|&(_, n)| n as f64).sum();
                f
            })
            .collect();
        let mut max = [0.0f64; N_FEATURES];
        for f in &raw {
            for (m, x) in max.iter_mut().zip(f) {
                *m = m.max(*x);
            }
        }
        let actions = raw
            .into_iter()
            .map(|mut f| {
                for (x, m) in f.iter_mut().zip(&max) {
                    if *m > 0.0 {
                        *x /= m;
                    }
                }
                f
            })
            .collect();
        FeatureTable { actions }
    }

    pub fn of(&self, m: Move) -> Features {
        match m {
            Move::Act(a) => self.actions[a.ix()],
            Move::Start(_) => {
                let mut f = [0.0; N_FEATURES];
                f[9] = 1.0;
                f
            }
            Move::WaitAvailability | Move::WaitDeadline => {
                let mut f = [0.0; N_FEATURES];
                f[10] = 1.0;
                f
            }
        }
    }
}

/// Softmax probabilities of `utilities / temperature`.
pub fn softmax(utilities: &[f64], temperature: f64) -> Vec<f64> {
    let max = utilities.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = utilities
        .iter()
        .map(|u| ((u - max) / temperature).exp())
        .collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

fn sample(probs: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let r: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if r < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// One sampled move with everything the policy gradient needs.
struct Choice {
    moves: Vec<Features>,
    probs: Vec<f64>,
    chosen: usize,
}

fn choose(
    policy: &SoftmaxPolicy,
    table: &FeatureTable,
    game: &Game,
    s: &SimState,
    rng: &mut ChaCha8Rng,
) -> Option<(Move, Choice)> {
    let options = moves(game, s);
    if options.is_empty() {
        return None;
    }
    let feats: Vec<Features> = options.iter().map(|&m| table.of(m)).collect();
    let utilities: Vec<f64> = feats.iter().map(|f| policy.utility(f)).collect();
    let probs = softmax(&utilities, policy.temperature);
    let chosen = sample(&probs, rng);
    Some((
        options[chosen],
        Choice {
            moves: feats,
            probs,
            chosen,
        },
    ))
}

/// Samples one decision. With no move available the result is a stop.
pub fn softmax_decide(
    policy: &SoftmaxPolicy,
    table: &FeatureTable,
    game: &Game,
    s: &SimState,
    rng: &mut ChaCha8Rng,
) -> Decision {
    match choose(policy, table, game, s, rng) {
        Some((m, _)) => Decision::from_move(game, s, m),
        None => Decision::Stop(StopReason::Deadlock),
    }
}

#[derive(Debug, Clone)]
pub struct SoftmaxAgent {
    pub policy: SoftmaxPolicy,
    table: FeatureTable,
}

impl SoftmaxAgent {
    pub fn new(game: &Game, policy: SoftmaxPolicy) -> Self {
        SoftmaxAgent {
            policy,
            table: FeatureTable::new(game),
        }
    }
}

impl Planner for SoftmaxAgent {
    fn decide(&mut self, game: &Game, state: &GameState, rng: &mut ChaCha8Rng) -> Decision {
        softmax_decide(&self.policy, &self.table, game, &state.sim, rng)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub episodes: u32,
    pub step_size: f64,
    pub temperature: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            episodes: 2000,
            step_size: 0.05,
            temperature: 1.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrainError {
    #[error("episodes must be at least 1")]
    NoEpisodes,
    #[error("step size must be finite and positive")]
    BadStepSize,
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("goal unreachable: {reached} of {episodes} episodes reached it, {deadlocked} deadlocked")]
    GoalUnreachable {
        episodes: u32,
        reached: u32,
        deadlocked: u32,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub policy: SoftmaxPolicy,
    /// Return of every training episode, in order.
    pub returns: Vec<f64>,
    pub reached: u32,
}

/// Episode return: minus the action count, or a large penalty on failure.
pub fn episode_return(goal: &Goal, reached: bool, actions: u32) -> f64 {
    if reached {
        -(actions as f64)
    } else {
        -2.0 * goal.limits.max_actions as f64
    }
}

struct Rollout {
    choices: Vec<Choice>,
    reached: bool,
    deadlocked: bool,
    actions: u32,
}

fn rollout(
    policy: &SoftmaxPolicy,
    table: &FeatureTable,
    game: &Game,
    scenario: &ScenarioOverrides,
    goal: &Goal,
    rng: &mut ChaCha8Rng,
) -> Result<Rollout, SimError> {
    let mut s = game.initial_sim(scenario)?;
    let mut choices = Vec::new();
    let mut actions = 0u32;
    loop {
        if goal.satisfied(&s) {
            return Ok(Rollout {
                choices,
                reached: true,
                deadlocked: false,
                actions,
            });
        }
        if !goal.within_limits(s.clock(), actions) {
            break;
        }
        let Some((m, choice)) = choose(policy, table, game, &s, rng) else {
            return Ok(Rollout {
                choices,
                reached: false,
                deadlocked: true,
                actions,
            });
        };
        match apply_move(game, &mut s, m, &mut ()) {
            Ok(()) => {}
            Err(SimError::Deadlock) => {
                return Ok(Rollout {
                    choices,
                    reached: false,
                    deadlocked: true,
                    actions,
                })
            }
            Err(e) => return Err(e),
        }
        actions += m.cost();
        choices.push(choice);
    }
    Ok(Rollout {
        choices,
        reached: false,
        deadlocked: false,
        actions,
    })
}

/// REINFORCE with a running-mean baseline. Advantages are scaled by the
/// running standard deviation of returns and the per-episode gradient is
/// averaged over its decisions, which keeps one step size usable across
/// configs of very different episode lengths.
pub fn train_softmax(
    game: &Game,
    scenario: &ScenarioOverrides,
    goal: &Goal,
    config: &TrainConfig,
) -> Result<TrainOutcome, TrainError> {
    if config.episodes == 0 {
        return Err(TrainError::NoEpisodes);
    }
    if !(config.step_size.is_finite() && config.step_size > 0.0) {
        return Err(TrainError::BadStepSize);
    }
    let mut policy = SoftmaxPolicy::zeros(config.temperature);
    policy.check()?;
    let table = FeatureTable::new(game);
    let mut returns = Vec::with_capacity(config.episodes as usize);
    let (mut reached, mut deadlocked) = (0u32, 0u32);
    // Welford running mean / variance of returns
    let (mut n, mut mean, mut m2) = (0f64, 0f64, 0f64);

    for episode in 0..config.episodes {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ episode as u64);
        let run = rollout(&policy, &table, game, scenario, goal, &mut rng)?;
        reached += run.reached as u32;
        deadlocked += run.deadlocked as u32;
        let g = episode_return(goal, run.reached, run.actions);
        returns.push(g);

        let baseline = if n > 0.0 { mean } else { g };
        let std = if n > 1.0 { (m2 / n).sqrt() } else { 0.0 };
        n += 1.0;
        let delta = g - mean;
        mean += delta / n;
        m2 += delta * (g - mean);

        let advantage = (g - baseline) / std.max(1.0);
        if advantage == 0.0 || run.choices.is_empty() {
            continue;
        }
        let mut grad = [0.0; N_FEATURES];
        for c in &run.choices {
            let mut expected = [0.0; N_FEATURES];
            for (phi, p) in c.moves.iter().zip(&c.probs) {
                for k in 0..N_FEATURES {
                    expected[k] += p * phi[k];
                }
            }
            for k in 0..N_FEATURES {
                grad[k] += (c.moves[c.chosen][k] - expected[k]) / policy.temperature;
            }
        }
        let scale = config.step_size * advantage / run.choices.len() as f64;
        for (w, d) in policy.weights.iter_mut().zip(grad) {
            *w += scale * d;
        }
    }

    if reached == 0 || deadlocked * 2 > config.episodes {
        return Err(TrainError::GoalUnreachable {
            episodes: config.episodes,
            reached,
            deadlocked,
        });
    }
    Ok(TrainOutcome {
        policy,
        returns,
        reached,
    })
}
