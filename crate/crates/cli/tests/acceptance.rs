//! Acceptance checks. Runs without the libtest harness so every criterion
//! prints its own PASS/FAIL line; exits non-zero if any fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use common::{
    career_scenario, check_regen_split, check_walk, oracle_fixtures, random_config, STATE_CAP,
};
use playtest_core::agents::{
    run_episode, search, AStarAgent, GoalSpec, HeuristicSpec, Move, DEFAULT_NODE_BUDGET,
};
use playtest_core::sim::WaitKind;
use playtest_core::{parse_tuning, Game, ScenarioOverrides};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

const ORACLE_FIXTURES: usize = 20;
const ORACLE_TIME: Duration = Duration::from_secs(60);
const MAX_EXPANSIONS: u64 = 2000;
const MAX_DECISION_MICROS: u64 = 1_000_000;
const TRANSITIONS: u64 = 1_000_000;
const MIN_TRANSITIONS_PER_SEC: f64 = 1000.0;
const OUTLIER_RATIO: f64 = 1.8;
const OUTLIER_TRIALS: u64 = 1000;
const OUTLIER_TIME_MS: u64 = 5 * 60 * 1000;
const BUGGED_RUNS: u64 = 100;
const VARIANCE_TRIALS: u64 = 2000;
const BUILD_ACTIONS_RATIO: f64 = 4.0;
const BUILD_SESSIONS_RATIO: f64 = 4.0;
const BUILD_WAIT_RATIO: f64 = 5.0;
const REPRO_SEED: &str = "42";
const TIE_SEEDS: u64 = 1000;
const TIE_TOLERANCE: f64 = 0.05;
const WALKS: u64 = 1000;
const REGEN_CASES: u64 = 2000;

type Outcome = Result<String, String>;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn fixture(name: &str) -> Game {
    let text = std::fs::read_to_string(fixtures().join(format!("{name}.json"))).unwrap();
    Game::new(parse_tuning(&text).unwrap()).unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// One suite run through the binary, into a fresh directory.
struct SuiteRun {
    dir: tempfile::TempDir,
}

impl SuiteRun {
    fn new(parallel: &str) -> Result<SuiteRun, String> {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let suite = fixtures().join("studies.json");
        let out = Command::new(env!("CARGO_BIN_EXE_playtest"))
            .arg("run")
            .arg(&suite)
            .args(["--seed", REPRO_SEED, "--parallel", parallel, "--out"])
            .arg(dir.path())
            .output()
            .map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!(
                "suite run failed ({}): {}",
                out.status,
                String::from_utf8_lossy(&out.stderr)
            ));
        }
        Ok(SuiteRun { dir })
    }

    fn ids(&self) -> Vec<String> {
        let text = std::fs::read_to_string(fixtures().join("studies.json")).unwrap();
        playtest_core::experiments::parse_suite(&text)
            .unwrap()
            .into_iter()
            .map(|x| x.id)
            .collect()
    }

    fn file(&self, id: &str, name: &str) -> PathBuf {
        self.dir.path().join(id).join(name)
    }

    fn stats(&self, id: &str) -> Value {
        read_json(&self.file(id, "stats.json"))
    }
}

fn astar_optimal_on_oracle_fixtures() -> Outcome {
    let started = Instant::now();
    let fixtures = oracle_fixtures(ORACLE_FIXTURES);
    let mut largest = 0;
    for (seed, game, spec, opt, states) in &fixtures {
        largest = largest.max(*states);
        if *states > STATE_CAP {
            return Err(format!("config {seed} has {states} states"));
        }
        let goal = spec.compile(game).unwrap();
        let h = HeuristicSpec::career_default(game).compile(game, &goal).unwrap();
        let mut agent = AStarAgent::new(h, DEFAULT_NODE_BUDGET);
        let rec = run_episode(game, &career_scenario(), *seed, &mut agent, &goal).unwrap();
        if !rec.goal_reached || rec.total_actions != *opt {
            return Err(format!(
                "config {seed}: astar {} actions ({}), optimum {opt}",
                rec.total_actions, rec.stop_reason
            ));
        }
    }
    let elapsed = started.elapsed();
    if elapsed > ORACLE_TIME {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!(
        "{} configs, up to {largest} states, all optimal in {:.1?}",
        fixtures.len(),
        elapsed
    ))
}

fn decisions_within_budget(run: &SuiteRun) -> Outcome {
    let (mut worst_exp, mut worst_us, mut rows) = (0u64, 0u64, 0);
    for id in run.ids() {
        let mut reader = csv::Reader::from_path(run.file(&id, "trials.csv")).map_err(|e| e.to_string())?;
        let headers = reader.headers().unwrap().clone();
        let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
        let (exp, us) = (col("max_expanded"), col("max_decision_micros"));
        for rec in reader.records() {
            let rec = rec.map_err(|e| e.to_string())?;
            worst_exp = worst_exp.max(rec[exp].parse().unwrap());
            worst_us = worst_us.max(rec[us].parse().unwrap());
            rows += 1;
        }
    }
    let msg = format!("{rows} trials: max {worst_exp} expansions, slowest decision {worst_us} us");
    if worst_exp <= MAX_EXPANSIONS && worst_us <= MAX_DECISION_MICROS {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn transition_throughput() -> Outcome {
    let game = fixture("desk_base");
    let scenario = ScenarioOverrides::career("culinary");
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut s = game.initial_sim(&scenario).unwrap();
    let (mut applied, mut steps) = (0u64, 0u64);
    let started = Instant::now();
    while applied < TRANSITIONS {
        let legal = game.legal_actions(&s);
        if legal.is_empty() {
            if game.close_session_if_idle_mut(&mut s, &mut ()).is_err() {
                s = game.initial_sim(&scenario).unwrap();
            }
        } else {
            let a = legal[rng.random_range(0..legal.len())];
            let mut next = s.clone();
            game.apply_action_mut(&mut next, a, &mut ()).unwrap();
            applied += 1;
            let until = next.locked_until().max(next.clock());
            game.advance_time_mut(&mut next, until, &mut ()).unwrap();
            s = next;
        }
        if let Some(e) = game.startable_events(&s).first() {
            game.start_event_mut(&mut s, *e, &mut ()).unwrap();
        }
        steps += 1;
    }
    let secs = started.elapsed().as_secs_f64();
    let rate = applied as f64 / secs;
    let msg = format!("{applied} actions applied ({steps} steps) in {secs:.2} s: {rate:.0}/s");
    if rate >= MIN_TRANSITIONS_PER_SEC {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn romance_outlier(run: &SuiteRun) -> Outcome {
    let id = "relationship_balance";
    let stats = run.stats(id);
    let trials = stats["trials"].as_u64().unwrap();
    let wall = read_json(&run.file(id, "bundle.json"))["timing"]["wall_ms"].as_u64().unwrap();
    let groups = stats["result"]["groups"].as_array().unwrap();
    let index2: Vec<(&str, f64)> = groups
        .iter()
        .filter(|g| g["index"] == 2)
        .map(|g| (g["category"].as_str().unwrap(), g["event_actions"]["mean"].as_f64().unwrap()))
        .collect();
    let romance = index2.iter().find(|(c, _)| *c == "romance").map(|p| p.1);
    let others: Vec<f64> = index2.iter().filter(|(c, _)| *c != "romance").map(|p| p.1).collect();
    let Some(romance) = romance else {
        return Err("no romance trials".into());
    };
    if others.is_empty() {
        return Err("no other category was played".into());
    }
    let worst = others.iter().map(|o| romance / o).fold(f64::INFINITY, f64::min);
    let msg = format!(
        "{trials} trials in {wall} ms: romance index-2 mean {romance}, others {others:?}, min ratio {worst:.2}"
    );
    if trials >= OUTLIER_TRIALS && worst >= OUTLIER_RATIO && wall <= OUTLIER_TIME_MS {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn bugged_event_exploited() -> Outcome {
    let game = fixture("bugged_event");
    let spec = GoalSpec::career_level("intern", 3);
    let goal = spec.compile(&game).unwrap();
    let h = HeuristicSpec::career_default(&game).compile(&game, &goal).unwrap();
    let ev = game.event(game.event_id("intern_project").unwrap());
    let (step1, step2) = (ev.steps[0].threshold, ev.steps[1].threshold);
    let per_action = game.action(game.action_id("file").unwrap()).reward.event_xp as u32;
    let mut exploited = 0;
    for seed in 0..BUGGED_RUNS {
        let mut agent = AStarAgent::new(h.clone(), DEFAULT_NODE_BUDGET);
        let rec = run_episode(&game, &ScenarioOverrides::career("intern"), seed, &mut agent, &goal)
            .unwrap();
        let deadline_waits: Vec<u64> = rec
            .counters
            .trace
            .iter()
            .filter_map(|t| match t.detail {
                playtest_core::sim::Detail::Wait(WaitKind::Deadline, until) => Some(until),
                _ => None,
            })
            .collect();
        let ok = rec.goal_reached
            && !rec.counters.event_log.is_empty()
            && rec.counters.event_log.iter().all(|a| {
                let xp = (a.event_actions * per_action) as u64;
                xp >= step1 && xp < step2 && a.ended_at.is_some_and(|t| deadline_waits.contains(&t))
            });
        exploited += ok as u64;
    }
    let msg = format!("{exploited}/{BUGGED_RUNS} runs stop at step 1 and wait out the deadline");
    if exploited == BUGGED_RUNS {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn variance_ordering(run: &SuiteRun) -> Outcome {
    let row = &run.stats("agent_comparison")["result"]["careers"][0];
    let astar = row["astar"]["variance"].as_f64().unwrap();
    let soft: Vec<(f64, f64, u64)> = row["softmax"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| {
            (
                s["temperature"].as_f64().unwrap(),
                s["total_actions"]["variance"].as_f64().unwrap(),
                s["total_actions"]["count"].as_u64().unwrap(),
            )
        })
        .collect();
    let warm = soft.iter().find(|s| s.0 == 1.0);
    let cold = soft.iter().find(|s| s.0 == 1e-3);
    let (Some(&(_, vw, nw)), Some(&(_, vc, _))) = (warm, cold) else {
        return Err(format!("missing temperatures: {soft:?}"));
    };
    let msg = format!("astar variance {astar}, softmax T=1 {vw} over {nw} trials, T=1e-3 {vc}");
    if astar == 0.0 && vw > 0.0 && nw >= VARIANCE_TRIALS && vc < vw {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn build_b_grinds(run: &SuiteRun) -> Outcome {
    let rows = run.stats("build_comparison")["result"]["rows"].as_array().unwrap().clone();
    let mut notes = Vec::new();
    let mut ok = true;
    let careers: Vec<&str> = rows.iter().map(|r| r["career"].as_str().unwrap()).collect();
    let mut seen = Vec::new();
    for career in careers {
        if seen.contains(&career) {
            continue;
        }
        seen.push(career);
        let pick = |build: &str| {
            rows.iter()
                .find(|r| r["career"] == career && r["build"] == build)
                .unwrap()
                .clone()
        };
        let (a, b) = (pick("build_a"), pick("build_b"));
        let mean = |r: &Value, k: &str| r[k]["mean"].as_f64().unwrap();
        let actions = mean(&b, "total_actions") / mean(&a, "total_actions");
        let sessions = mean(&b, "sessions") / mean(&a, "sessions");
        let wait = mean(&a, "wait_minutes") / mean(&b, "wait_minutes");
        ok &= actions >= BUILD_ACTIONS_RATIO && sessions >= BUILD_SESSIONS_RATIO && wait >= BUILD_WAIT_RATIO;
        notes.push(format!(
            "{career}: actions x{actions:.2}, sessions x{sessions:.2}, wait /{wait:.2}"
        ));
    }
    let msg = notes.join("; ");
    if ok && !seen.is_empty() {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn reproducible(runs: &[&SuiteRun]) -> Outcome {
    let ids = runs[0].ids();
    for id in &ids {
        let first = std::fs::read(runs[0].file(id, "stats.json")).map_err(|e| e.to_string())?;
        for (k, other) in runs.iter().enumerate().skip(1) {
            let bytes = std::fs::read(other.file(id, "stats.json")).map_err(|e| e.to_string())?;
            if bytes != first {
                return Err(format!("{id}/stats.json differs in run {}", k + 1));
            }
        }
    }
    Ok(format!("{} stats.json files byte-identical across 2 sequential runs and --parallel 8", ids.len()))
}

fn properties_hold() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let desk = fixture("desk_base");
    let (mut steps, mut closes) = (0, 0);
    for i in 0..WALKS {
        let choices: Vec<u16> = (0..120).map(|_| rng.random()).collect();
        let (game, root) = if i % 2 == 0 {
            let g = Game::new(parse_tuning(&random_config(i)).unwrap()).unwrap();
            let root = g.initial_sim(&career_scenario()).unwrap();
            (g, root)
        } else {
            let career = desk.careers()[(i / 2) as usize % desk.careers().len()].name.clone();
            let sc = ScenarioOverrides {
                career: (i % 3 != 0).then_some(career),
                grant_objects: i % 5 == 0,
                ..Default::default()
            };
            let root = desk.initial_sim(&sc).unwrap();
            (desk.clone(), root)
        };
        let walk = check_walk(&game, root, &choices).map_err(|e| format!("walk {i}: {e}"))?;
        steps += walk.steps;
        closes += walk.counters.event_log.iter().filter(|a| a.ended_at.is_some()).count();
    }
    if closes == 0 {
        return Err("no walk closed an event; payout check never ran".into());
    }
    for i in 0..REGEN_CASES {
        let game = Game::new(parse_tuning(&random_config(i % 400)).unwrap()).unwrap();
        check_regen_split(&game, rng.random_range(0..=6), rng.random_range(0..60), rng.random_range(0..60))
            .map_err(|e| format!("regen case {i}: {e}"))?;
    }

    let tie = fixture("symmetric_tie");
    let goal = GoalSpec::career_level("walker", 2).compile(&tie).unwrap();
    let h = HeuristicSpec::career_default(&tie).compile(&tie, &goal).unwrap();
    let root = tie.initial_sim(&ScenarioOverrides::career("walker")).unwrap();
    let left = tie.action_id("left").unwrap();
    let hits = (0..TIE_SEEDS)
        .filter(|&seed| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            search(&tie, &h, &root, 0, DEFAULT_NODE_BUDGET, &mut r).step == Ok(Move::Act(left))
        })
        .count();
    let freq = hits as f64 / TIE_SEEDS as f64;
    let msg = format!(
        "{WALKS} walks ({steps} moves, {closes} event closes) and {REGEN_CASES} regen splits clean; tie-break left {freq:.3}"
    );
    if (freq - 0.5).abs() <= TIE_TOLERANCE {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn main() -> ExitCode {
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    results.push(("1 astar matches exhaustive optimum", astar_optimal_on_oracle_fixtures()));

    let runs = [SuiteRun::new("1"), SuiteRun::new("1"), SuiteRun::new("8")];
    match &runs {
        [Ok(a), Ok(b), Ok(c)] => {
            results.push(("2 decision budget and latency", decisions_within_budget(a)));
            results.push(("3 simulator throughput", transition_throughput()));
            results.push(("4 romance outlier detected", romance_outlier(a)));
            results.push(("5 bugged event exploited", bugged_event_exploited()));
            results.push(("6 variance ordering", variance_ordering(a)));
            results.push(("7 build B grind", build_b_grinds(a)));
            results.push(("8 reproducible stats", reproducible(&[a, b, c])));
        }
        _ => {
            let err = runs
                .iter()
                .find_map(|r| r.as_ref().err().cloned())
                .unwrap_or_default();
            results.push(("2 decision budget and latency", Err(err.clone())));
            results.push(("3 simulator throughput", transition_throughput()));
            results.push(("4 romance outlier detected", Err(err.clone())));
            results.push(("5 bugged event exploited", bugged_event_exploited()));
            results.push(("6 variance ordering", Err(err.clone())));
            results.push(("7 build B grind", Err(err.clone())));
            results.push(("8 reproducible stats", Err(err)));
        }
    }
    results.push(("9 simulator properties and tie-break", properties_hold()));

    let mut failed = 0;
    for (name, outcome) in &results {
        match outcome {
            Ok(m) => println!("PASS  criterion {name}: {m}"),
            Err(m) => {
                failed += 1;
                println!("FAIL  criterion {name}: {m}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
