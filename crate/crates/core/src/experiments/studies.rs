use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Serialize, Serializer};

use super::config::{AgentSpec, CareerTarget, ExperimentConfig, Study};
use super::output::{ChartData, ChartGroup, ChartSeries, TrialRow};
use super::runner::{Runner, TrialAgent};
use super::stats::{running_mean, Accumulator, AggregateStats};
use super::ExperimentError;
use crate::agents::{
    train_softmax, Goal, GoalSpec, HeuristicSpec, SoftmaxPolicy, TrainConfig, TrialRecord,
    DEFAULT_NODE_BUDGET,
};
use crate::sim::{EventOwner, Game, ScenarioOverrides};
use crate::tuning::parse_tuning;

pub fn load_game(path: &Path) -> Result<Game, ExperimentError> {
    let text = std::fs::read_to_string(path).map_err(|e| ExperimentError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let config = parse_tuning(&text).map_err(|source| ExperimentError::Tuning {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(Game::new(config)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationshipGroup {
    pub category: String,
    /// 1-based position in the category's chain.
    pub index: u32,
    /// Actions performed inside the event, summed over retries.
    pub event_actions: AggregateStats,
    /// Times the event was started, including timed-out attempts.
    pub attempts: AggregateStats,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CareerRow {
    pub career: String,
    pub target_level: u32,
    pub goal_reached: u32,
    pub total_actions: AggregateStats,
    pub event_actions: AggregateStats,
    pub sessions: AggregateStats,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObjectRow {
    pub career: String,
    pub target_level: u32,
    /// Objects unlocking below the target level; the only ones that can help.
    pub objects: Vec<String>,
    pub price_total: u64,
    pub baseline: AggregateStats,
    pub with_objects: AggregateStats,
    pub actions_reduction_pct: f64,
    #[serde(serialize_with = "ratio_or_na")]
    pub rho_per_action_saved: Option<f64>,
}

fn ratio_or_na<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(x) => s.serialize_f64(*x),
        None => s.serialize_str("n/a"),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BuildRow {
    pub career: String,
    pub build: String,
    pub target_level: u32,
    pub goal_reached: u32,
    pub event_actions: AggregateStats,
    pub total_actions: AggregateStats,
    pub sessions: AggregateStats,
    /// Every gap between sessions, pooled over trials; absent if no trial
    /// ever waited.
    pub wait_minutes: Option<AggregateStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SoftmaxRow {
    pub temperature: f64,
    pub goal_reached: u32,
    pub total_actions: AggregateStats,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentRow {
    pub career: String,
    pub target_level: u32,
    pub astar_goal_reached: u32,
    pub astar: AggregateStats,
    pub softmax: Vec<SoftmaxRow>,
    pub policy: SoftmaxPolicy,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "study", rename_all = "snake_case")]
pub enum StudyResult {
    RelationshipBalance {
        groups: Vec<RelationshipGroup>,
        /// Trials that ended locked into each category.
        category_trials: BTreeMap<String, u32>,
    },
    CareerProgression {
        careers: Vec<CareerRow>,
    },
    ObjectImpact {
        careers: Vec<ObjectRow>,
    },
    BuildComparison {
        rows: Vec<BuildRow>,
    },
    AgentComparison {
        careers: Vec<AgentRow>,
    },
}

/// Everything one experiment produced.
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub result: StudyResult,
    pub rows: Vec<TrialRow>,
    pub charts: ChartData,
    pub max_expanded: usize,
    pub max_decision_micros: u64,
}

/// Shared plumbing for one experiment.
struct Ctx<'a> {
    xc: &'a ExperimentConfig,
    base_dir: &'a Path,
    runner: &'a Runner,
    rows: Vec<TrialRow>,
    groups: Vec<ChartGroup>,
    series: Vec<ChartSeries>,
    max_expanded: usize,
    max_micros: u64,
}

impl Ctx<'_> {
    fn resolve(&self, p: &Path) -> PathBuf {
        self.base_dir.join(p)
    }

    fn batch(
        &mut self,
        game: &Game,
        scenario: &ScenarioOverrides,
        goal: &Goal,
        agent: &TrialAgent,
        group: &str,
    ) -> Result<Vec<TrialRecord>, ExperimentError> {
        let recs = self
            .runner
            .trials(game, scenario, goal, agent, self.xc.trials, self.xc.base_seed)?;
        let label = agent.label();
        for r in &recs {
            self.max_expanded = self.max_expanded.max(r.max_expanded);
            self.max_micros = self.max_micros.max(r.max_decision_micros);
            self.rows
                .push(TrialRow::new(&self.xc.id, group, &game.config().build_id, &label, r));
        }
        Ok(recs)
    }

    fn heuristic(&self, game: &Game, career: bool) -> HeuristicSpec {
        self.xc.heuristic.clone().unwrap_or_else(|| {
            if career {
                HeuristicSpec::career_default(game)
            } else {
                HeuristicSpec::relationship_default()
            }
        })
    }

    fn agent(
        &self,
        game: &Game,
        scenario: &ScenarioOverrides,
        goal: &Goal,
        career: bool,
    ) -> Result<TrialAgent, ExperimentError> {
        match &self.xc.agent {
            AgentSpec::Astar { node_budget } => Ok(TrialAgent::AStar {
                heuristic: self.heuristic(game, career).compile(game, goal)?,
                node_budget: *node_budget,
            }),
            AgentSpec::Softmax { policy, train } => Ok(TrialAgent::Softmax(self.policy(
                game,
                scenario,
                goal,
                policy.as_deref(),
                train.as_ref(),
            )?)),
        }
    }

    fn policy(
        &self,
        game: &Game,
        scenario: &ScenarioOverrides,
        goal: &Goal,
        file: Option<&Path>,
        train: Option<&TrainConfig>,
    ) -> Result<SoftmaxPolicy, ExperimentError> {
        if let Some(file) = file {
            let path = self.resolve(file);
            let io = |message: String| ExperimentError::Io {
                path: path.clone(),
                message,
            };
            let text = std::fs::read_to_string(&path).map_err(|e| io(e.to_string()))?;
            let policy: SoftmaxPolicy =
                serde_json::from_str(&text).map_err(|e| io(e.to_string()))?;
            policy.check()?;
            return Ok(policy);
        }
        let cfg = train.copied().unwrap_or_default();
        Ok(train_softmax(game, scenario, goal, &cfg)?.policy)
    }

    fn career_goal(&self, game: &Game, c: &CareerTarget) -> Result<Goal, ExperimentError> {
        let limits = self.xc.hard_limits();
        Ok(GoalSpec::career_level(&c.career, c.target_level)
            .with_limits(limits.max_minutes, limits.max_actions)
            .compile(game)?)
    }

    fn finish(self, result: StudyResult, legend: &str) -> ExperimentOutcome {
        ExperimentOutcome {
            result,
            rows: self.rows,
            charts: ChartData {
                id: self.xc.id.clone(),
                study: self.xc.study.as_str().into(),
                legend: legend.into(),
                groups: self.groups,
                series: self.series,
            },
            max_expanded: self.max_expanded,
            max_decision_micros: self.max_micros,
        }
    }
}

fn check_career(game: &Game, c: &CareerTarget) -> Result<(), ExperimentError> {
    if c.target_level == 0 {
        return Err(ExperimentError::Config(format!(
            "target level for `{}` must be at least 1",
            c.career
        )));
    }
    let id = game
        .career_id(&c.career)
        .ok_or_else(|| ExperimentError::UnknownCareer(c.career.clone()))?;
    let max = game.career(id).max_level;
    if c.target_level > max {
        return Err(ExperimentError::TargetAboveCap {
            career: c.career.clone(),
            target: c.target_level,
            max,
        });
    }
    Ok(())
}

fn with_career(base: &ScenarioOverrides, career: &str) -> ScenarioOverrides {
    ScenarioOverrides {
        career: Some(career.into()),
        ..base.clone()
    }
}

fn stats_of(key: &str, recs: &[TrialRecord], f: impl Fn(&TrialRecord) -> u64) -> AggregateStats {
    AggregateStats::from_values(key, recs.iter().map(f)).expect("trials >= 1")
}

fn reached(recs: &[TrialRecord]) -> u32 {
    recs.iter().filter(|r| r.goal_reached).count() as u32
}

fn chart(key: &str, metric: &str, s: &AggregateStats) -> ChartGroup {
    ChartGroup {
        key: key.into(),
        metric: metric.into(),
        mean: s.mean,
        variance: s.variance,
        count: s.count,
    }
}

/// Event actions per (category, chain position). Each trial's category is
/// whichever its agent started first.
pub fn relationship_balance(
    game: &Game,
    xc: &ExperimentConfig,
    runner: &Runner,
) -> Result<ExperimentOutcome, ExperimentError> {
    relationship_balance_in(game, ctx(xc, Path::new("."), runner))
}

fn ctx<'a>(xc: &'a ExperimentConfig, base_dir: &'a Path, runner: &'a Runner) -> Ctx<'a> {
    Ctx {
        xc,
        base_dir,
        runner,
        rows: Vec::new(),
        groups: Vec::new(),
        series: Vec::new(),
        max_expanded: 0,
        max_micros: 0,
    }
}

fn relationship_balance_in(
    game: &Game,
    mut cx: Ctx<'_>,
) -> Result<ExperimentOutcome, ExperimentError> {
    if game.categories().iter().all(|c| c.chain.is_empty()) {
        return Err(ExperimentError::NoRelationshipEvents);
    }
    let spec = cx
        .xc
        .goal
        .as_ref()
        .ok_or_else(|| ExperimentError::Config("relationship_balance needs a goal".into()))?;
    let goal = spec.compile(game)?;
    let scenario = cx.xc.scenario.clone();
    let agent = cx.agent(game, &scenario, &goal, false)?;
    let recs = cx.batch(game, &scenario, &goal, &agent, "relationships")?;

    let n_cat = game.categories().len();
    let mut actions: Vec<Vec<Accumulator>> = game
        .categories()
        .iter()
        .map(|c| vec![Accumulator::default(); c.chain.len()])
        .collect();
    let mut attempts = actions.clone();
    let mut category_trials = BTreeMap::new();
    for r in &recs {
        if let Some(c) = &r.relationship_category {
            *category_trials.entry(c.clone()).or_insert(0) += 1;
        }
        // per-trial totals, keyed by (category, chain position)
        let mut per: BTreeMap<(usize, usize), (u64, u64)> = BTreeMap::new();
        for a in &r.counters.event_log {
            let ev = game.event(a.event);
            if let (EventOwner::Category(c), Some(ix)) = (ev.owner, ev.chain_index) {
                let slot = per.entry((c.ix(), ix as usize)).or_default();
                slot.0 += a.event_actions as u64;
                slot.1 += 1;
            }
        }
        for ((c, ix), (n, k)) in per {
            debug_assert!(c < n_cat);
            actions[c][ix].push(n);
            attempts[c][ix].push(k);
        }
    }

    let mut groups = Vec::new();
    for (ci, cat) in game.categories().iter().enumerate() {
        for ix in 0..cat.chain.len() {
            let key = format!("{}/{}", cat.name, ix + 1);
            let (Some(ea), Some(at)) = (actions[ci][ix].finish(&key), attempts[ci][ix].finish(&key))
            else {
                continue;
            };
            cx.groups.push(chart(&key, "event_actions", &ea));
            groups.push(RelationshipGroup {
                category: cat.name.clone(),
                index: ix as u32 + 1,
                event_actions: ea,
                attempts: at,
            });
        }
    }
    Ok(cx.finish(
        StudyResult::RelationshipBalance {
            groups,
            category_trials,
        },
        "mean event actions (actions taken inside the event) per chain position; attempts counts event starts",
    ))
}

/// Total actions to reach each career's target level under one heuristic.
pub fn career_progression(
    game: &Game,
    xc: &ExperimentConfig,
    runner: &Runner,
) -> Result<ExperimentOutcome, ExperimentError> {
    let mut cx = ctx(xc, Path::new("."), runner);
    let careers = career_rows(game, &mut cx)?;
    Ok(cx.finish(
        StudyResult::CareerProgression { careers },
        "mean total actions to reach the target level",
    ))
}

fn career_rows(game: &Game, cx: &mut Ctx<'_>) -> Result<Vec<CareerRow>, ExperimentError> {
    for c in &cx.xc.careers {
        check_career(game, c)?;
    }
    let mut rows = Vec::new();
    for c in &cx.xc.careers {
        let scenario = with_career(&cx.xc.scenario, &c.career);
        let goal = cx.career_goal(game, c)?;
        let agent = cx.agent(game, &scenario, &goal, true)?;
        let recs = cx.batch(game, &scenario, &goal, &agent, &c.career)?;
        let total = stats_of(&c.career, &recs, |r| r.total_actions as u64);
        cx.groups.push(chart(&c.career, "total_actions", &total));
        rows.push(CareerRow {
            career: c.career.clone(),
            target_level: c.target_level,
            goal_reached: reached(&recs),
            total_actions: total,
            event_actions: stats_of(&c.career, &recs, |r| r.event_actions as u64),
            sessions: stats_of(&c.career, &recs, |r| r.sessions as u64),
        });
    }
    Ok(rows)
}

/// Baseline versus free objects at their unlock level.
pub fn object_impact(
    game: &Game,
    xc: &ExperimentConfig,
    runner: &Runner,
) -> Result<ExperimentOutcome, ExperimentError> {
    object_impact_in(game, ctx(xc, Path::new("."), runner))
}

fn object_impact_in(game: &Game, mut cx: Ctx<'_>) -> Result<ExperimentOutcome, ExperimentError> {
    for c in &cx.xc.careers {
        check_career(game, c)?;
    }
    let mut rows = Vec::new();
    for c in &cx.xc.careers {
        let def = game.career(game.career_id(&c.career).expect("checked"));
        let useful: Vec<_> = def
            .unlocks
            .iter()
            .filter(|u| u.unlock_level < c.target_level)
            .collect();
        let objects = useful
            .iter()
            .map(|u| game.objects()[u.object.ix()].name.clone())
            .collect();
        let price_total: u64 = useful.iter().map(|u| u.price).sum();

        let goal = cx.career_goal(game, c)?;
        let mut scenario = with_career(&cx.xc.scenario, &c.career);
        let mut run = |grant: bool, cx: &mut Ctx<'_>| {
            scenario.grant_objects = grant;
            let agent = cx.agent(game, &scenario, &goal, true)?;
            let group = format!("{}{}", c.career, if grant { "+objects" } else { "" });
            let recs = cx.batch(game, &scenario, &goal, &agent, &group)?;
            let s = stats_of(&group, &recs, |r| r.total_actions as u64);
            cx.groups.push(chart(&group, "total_actions", &s));
            Ok::<_, ExperimentError>(s)
        };
        let baseline = run(false, &mut cx)?;
        let with_objects = run(true, &mut cx)?;

        let saved = baseline.mean - with_objects.mean;
        let actions_reduction_pct = if baseline.mean > 0.0 {
            saved / baseline.mean * 100.0
        } else {
            0.0
        };
        rows.push(ObjectRow {
            career: c.career.clone(),
            target_level: c.target_level,
            objects,
            price_total,
            baseline,
            with_objects,
            actions_reduction_pct,
            rho_per_action_saved: (saved > 0.0).then(|| price_total as f64 / saved),
        });
    }
    Ok(cx.finish(
        StudyResult::ObjectImpact { careers: rows },
        "mean total actions without and with free career objects",
    ))
}

/// The same careers and goals played on two builds.
pub fn build_comparison(
    a: &Game,
    b: &Game,
    xc: &ExperimentConfig,
    runner: &Runner,
) -> Result<ExperimentOutcome, ExperimentError> {
    build_comparison_in(a, b, ctx(xc, Path::new("."), runner))
}

fn build_comparison_in(
    a: &Game,
    b: &Game,
    mut cx: Ctx<'_>,
) -> Result<ExperimentOutcome, ExperimentError> {
    for c in &cx.xc.careers {
        for game in [a, b] {
            if game.career_id(&c.career).is_none() {
                return Err(ExperimentError::CareerMissingInBuild {
                    career: c.career.clone(),
                    build: game.config().build_id.clone(),
                });
            }
            check_career(game, c)?;
        }
    }
    let mut rows = Vec::new();
    for c in &cx.xc.careers {
        for game in [a, b] {
            let build = &game.config().build_id;
            let scenario = with_career(&cx.xc.scenario, &c.career);
            let goal = cx.career_goal(game, c)?;
            let agent = cx.agent(game, &scenario, &goal, true)?;
            let recs = cx.batch(game, &scenario, &goal, &agent, &c.career)?;
            let key = format!("{}@{build}", c.career);
            let total = stats_of(&key, &recs, |r| r.total_actions as u64);
            let sessions = stats_of(&key, &recs, |r| r.sessions as u64);
            let wait_minutes = AggregateStats::from_values(
                &key,
                recs.iter().flat_map(|r| r.wait_intervals.iter().copied()),
            );
            cx.groups.push(chart(&key, "total_actions", &total));
            cx.groups.push(chart(&key, "sessions", &sessions));
            if let Some(w) = &wait_minutes {
                cx.groups.push(chart(&key, "wait_minutes", w));
            }
            rows.push(BuildRow {
                career: c.career.clone(),
                build: build.clone(),
                target_level: c.target_level,
                goal_reached: reached(&recs),
                event_actions: stats_of(&key, &recs, |r| r.event_actions as u64),
                total_actions: total,
                sessions,
                wait_minutes,
            });
        }
    }
    Ok(cx.finish(
        StudyResult::BuildComparison { rows },
        "per build: event actions, total actions, sessions and minutes waited between sessions",
    ))
}

/// A* against the softmax baseline at one or more temperatures.
pub fn agent_comparison(
    game: &Game,
    xc: &ExperimentConfig,
    runner: &Runner,
) -> Result<ExperimentOutcome, ExperimentError> {
    agent_comparison_in(game, ctx(xc, Path::new("."), runner))
}

fn agent_comparison_in(
    game: &Game,
    mut cx: Ctx<'_>,
) -> Result<ExperimentOutcome, ExperimentError> {
    let AgentSpec::Softmax { policy, train } = cx.xc.agent.clone() else {
        return Err(ExperimentError::Config(
            "agent_comparison needs a softmax agent to compare against".into(),
        ));
    };
    for c in &cx.xc.careers {
        check_career(game, c)?;
    }
    let mut rows = Vec::new();
    for c in &cx.xc.careers {
        let scenario = with_career(&cx.xc.scenario, &c.career);
        let goal = cx.career_goal(game, c)?;
        let astar = TrialAgent::AStar {
            heuristic: cx.heuristic(game, true).compile(game, &goal)?,
            node_budget: DEFAULT_NODE_BUDGET,
        };
        let recs = cx.batch(game, &scenario, &goal, &astar, &c.career)?;
        let totals: Vec<u64> = recs.iter().map(|r| r.total_actions as u64).collect();
        let astar_stats = stats_of(&format!("{}/astar", c.career), &recs, |r| {
            r.total_actions as u64
        });
        cx.groups.push(chart(&astar_stats.group_key, "total_actions", &astar_stats));
        cx.series.push(ChartSeries {
            name: astar_stats.group_key.clone(),
            running_mean: running_mean(&totals),
        });
        let astar_goal_reached = reached(&recs);

        let trained = cx.policy(game, &scenario, &goal, policy.as_deref(), train.as_ref())?;
        let temps = if cx.xc.softmax_temperatures.is_empty() {
            vec![trained.temperature]
        } else {
            cx.xc.softmax_temperatures.clone()
        };
        let mut softmax = Vec::new();
        for t in temps {
            let agent = TrialAgent::Softmax(trained.with_temperature(t));
            let recs = cx.batch(game, &scenario, &goal, &agent, &c.career)?;
            let key = format!("{}/{}", c.career, agent.label());
            let totals: Vec<u64> = recs.iter().map(|r| r.total_actions as u64).collect();
            let s = stats_of(&key, &recs, |r| r.total_actions as u64);
            cx.groups.push(chart(&key, "total_actions", &s));
            cx.series.push(ChartSeries {
                name: key,
                running_mean: running_mean(&totals),
            });
            softmax.push(SoftmaxRow {
                temperature: t,
                goal_reached: reached(&recs),
                total_actions: s,
            });
        }
        rows.push(AgentRow {
            career: c.career.clone(),
            target_level: c.target_level,
            astar_goal_reached,
            astar: astar_stats,
            softmax,
            policy: trained,
        });
    }
    Ok(cx.finish(
        StudyResult::AgentComparison { careers: rows },
        "total actions per agent; series hold the running mean over trials",
    ))
}

/// Validates `xc`, loads its tuning files relative to `base_dir` and runs the
/// study.
pub fn run_experiment(
    xc: &ExperimentConfig,
    base_dir: &Path,
    runner: &Runner,
) -> Result<ExperimentOutcome, ExperimentError> {
    xc.check()?;
    let mut cx = ctx(xc, base_dir, runner);
    let games = xc
        .tuning
        .paths()
        .into_iter()
        .map(|p| load_game(&cx.resolve(p)))
        .collect::<Result<Vec<_>, _>>()?;
    match xc.study {
        Study::RelationshipBalance => relationship_balance_in(&games[0], cx),
        Study::CareerProgression => {
            let careers = career_rows(&games[0], &mut cx)?;
            Ok(cx.finish(
                StudyResult::CareerProgression { careers },
                "mean total actions to reach the target level",
            ))
        }
        Study::ObjectImpact => object_impact_in(&games[0], cx),
        Study::BuildComparison => build_comparison_in(&games[0], &games[1], cx),
        Study::AgentComparison => agent_comparison_in(&games[0], cx),
    }
}
