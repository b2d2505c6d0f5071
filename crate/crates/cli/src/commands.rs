use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Value};

use playtest_core::agents::{train_softmax, GoalSpec, TrainConfig, TrainError};
use playtest_core::experiments::{
    inputs_digest, parse_suite, run_experiment, write_outputs, AgentSpec, ExperimentConfig,
    Runner,
};
use playtest_core::tuning::{diff_builds, lint, parse_unchecked, validate as check, TuningError};
use playtest_core::{Game, ScenarioOverrides};

use crate::{DiffArgs, Format, RunArgs, TrainArgs, ValidateArgs};

pub const OK: u8 = 0;
pub const DOMAIN: u8 = 1;
pub const USAGE: u8 = 2;

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json value"));
}

fn tuning_exit(e: &TuningError) -> u8 {
    match e {
        TuningError::Syntax { .. } => USAGE,
        _ => DOMAIN,
    }
}

pub fn validate(args: &ValidateArgs) -> u8 {
    let mut code = OK;
    let mut reports = Vec::new();
    for path in &args.paths {
        let (status, diags, error) = match std::fs::read_to_string(path) {
            Err(e) => {
                code = code.max(USAGE);
                ("unreadable", Vec::new(), Some(e.to_string()))
            }
            Ok(text) => match parse_unchecked(&text) {
                Err(e) => {
                    code = code.max(tuning_exit(&e));
                    ("invalid", Vec::new(), Some(e.to_string()))
                }
                Ok(cfg) => {
                    let mut diags = check(&cfg);
                    diags.extend(lint(&cfg, args.anomaly_ratio));
                    let bad = diags.iter().any(|d| d.is_error());
                    if bad {
                        code = code.max(DOMAIN);
                    }
                    (if bad { "invalid" } else { "ok" }, diags, None)
                }
            },
        };
        match args.format {
            Format::Text => {
                println!("{}: {status}", path.display());
                if let Some(e) = &error {
                    println!("  {e}");
                }
                for d in &diags {
                    println!("  {d}");
                }
            }
            Format::Csv => {
                if reports.is_empty() {
                    println!("path,severity,rule,entity_kind,entity_id,message");
                }
                for d in &diags {
                    println!(
                        "{},{},{},{},{},{}",
                        csv_field(&path.display().to_string()),
                        if d.is_error() { "error" } else { "warning" },
                        d.rule,
                        d.entity_kind,
                        csv_field(&d.entity_id),
                        csv_field(&d.message)
                    );
                }
                if let Some(e) = &error {
                    println!("{},error,{status},,,{}", csv_field(&path.display().to_string()), csv_field(e));
                }
            }
            Format::Json => {}
        }
        reports.push(json!({
            "path": path,
            "status": status,
            "error": error,
            "diagnostics": diags,
        }));
    }
    if args.format == Format::Json {
        print_json(&Value::Array(reports));
    }
    code
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

struct Summary {
    id: String,
    study: &'static str,
    status: &'static str,
    trials: u32,
    wall_ms: u128,
    max_expanded: Option<usize>,
    error: Option<String>,
}

fn read_inputs(suite_text: &[u8], base: &Path, xc: &ExperimentConfig) -> (String, Vec<Value>) {
    let mut contents: Vec<Vec<u8>> = vec![suite_text.to_vec()];
    let mut listed = Vec::new();
    let mut paths: Vec<PathBuf> = xc.tuning.paths().iter().map(|p| base.join(p)).collect();
    if let AgentSpec::Softmax {
        policy: Some(p), ..
    } = &xc.agent
    {
        paths.push(base.join(p));
    }
    for p in paths {
        match std::fs::read(&p) {
            Ok(bytes) => {
                listed.push(json!({ "path": p, "bytes": bytes.len() }));
                contents.push(bytes);
            }
            Err(_) => listed.push(json!({ "path": p, "missing": true })),
        }
    }
    (inputs_digest(contents.iter().map(Vec::as_slice)), listed)
}

pub fn run(args: &RunArgs) -> u8 {
    let suite_text = match std::fs::read(&args.suite) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.suite.display());
            return USAGE;
        }
    };
    let suite = match std::str::from_utf8(&suite_text)
        .map_err(|e| e.to_string())
        .and_then(|t| parse_suite(t).map_err(|e| e.to_string()))
    {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {}: {e}", args.suite.display());
            return USAGE;
        }
    };
    let mut seen = std::collections::BTreeSet::new();
    if let Some(dup) = suite.iter().find(|x| !seen.insert(x.id.as_str())) {
        eprintln!("error: experiment id `{}` appears twice", dup.id);
        return USAGE;
    }
    let base = args.suite.parent().unwrap_or(Path::new("")).to_path_buf();
    let runner = match Runner::new(args.parallel as usize) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return USAGE;
        }
    };

    let mut summaries = Vec::new();
    for mut xc in suite {
        if let Some(seed) = args.seed {
            xc.base_seed = seed;
            if let AgentSpec::Softmax {
                train: Some(t), ..
            } = &mut xc.agent
            {
                t.seed = seed;
            }
        }
        let started = Instant::now();
        let outcome = run_experiment(&xc, &base, &runner);
        let wall_ms = started.elapsed().as_millis();
        let dir = args.out.join(&xc.id);
        let files = match write_outputs(&dir, &xc, outcome.as_ref()) {
            Ok(f) => f,
            Err(e) => {
                eprintln!("error: writing {}: {e}", dir.display());
                return USAGE;
            }
        };
        let (digest, inputs) = read_inputs(&suite_text, &base, &xc);
        let name = |p: &Option<PathBuf>| {
            p.as_ref()
                .and_then(|p| p.file_name())
                .map(|n| n.to_string_lossy().into_owned())
        };
        let bundle = json!({
            "experiment_id": xc.id,
            "generated_at": chrono::Utc::now().to_rfc3339(),
            "inputs_digest": digest,
            "inputs": inputs,
            "tables": name(&files.trials).into_iter().collect::<Vec<_>>(),
            "charts": name(&files.chartdata).into_iter().collect::<Vec<_>>(),
            "stats": "stats.json",
            "timing": {
                "wall_ms": wall_ms,
                "parallel": args.parallel,
                "max_decision_micros": outcome.as_ref().ok().map(|o| o.max_decision_micros),
            },
        });
        let mut text = serde_json::to_string_pretty(&bundle).expect("json value");
        text.push('\n');
        if let Err(e) = std::fs::write(dir.join("bundle.json"), text) {
            eprintln!("error: writing bundle for {}: {e}", xc.id);
            return USAGE;
        }
        summaries.push(Summary {
            id: xc.id.clone(),
            study: xc.study.as_str(),
            status: if outcome.is_ok() { "ok" } else { "failed" },
            trials: xc.trials,
            wall_ms,
            max_expanded: outcome.as_ref().ok().map(|o| o.max_expanded),
            error: outcome.as_ref().err().map(|e| e.to_string()),
        });
    }

    print_summary(&summaries, args.format);
    if summaries.iter().any(|s| s.status != "ok") {
        DOMAIN
    } else {
        OK
    }
}

fn print_summary(rows: &[Summary], format: Format) {
    match format {
        Format::Json => print_json(&Value::Array(
            rows.iter()
                .map(|s| {
                    json!({
                        "id": s.id, "study": s.study, "status": s.status, "trials": s.trials,
                        "wall_ms": s.wall_ms, "max_expanded": s.max_expanded, "error": s.error,
                    })
                })
                .collect(),
        )),
        Format::Csv => {
            println!("id,study,status,trials,wall_ms,max_expanded,error");
            for s in rows {
                println!(
                    "{},{},{},{},{},{},{}",
                    csv_field(&s.id),
                    s.study,
                    s.status,
                    s.trials,
                    s.wall_ms,
                    s.max_expanded.map_or(String::new(), |n| n.to_string()),
                    csv_field(s.error.as_deref().unwrap_or(""))
                );
            }
        }
        Format::Text => {
            let w = rows.iter().map(|s| s.id.len()).max().unwrap_or(2).max(2);
            let mut out = format!(
                "{:<w$}  {:<20}  {:<6}  {:>6}  {:>9}  {:>8}\n",
                "id", "study", "status", "trials", "wall_ms", "max_exp"
            );
            for s in rows {
                let _ = writeln!(
                    out,
                    "{:<w$}  {:<20}  {:<6}  {:>6}  {:>9}  {:>8}",
                    s.id,
                    s.study,
                    s.status,
                    s.trials,
                    s.wall_ms,
                    s.max_expanded.map_or("-".into(), |n| n.to_string())
                );
                if let Some(e) = &s.error {
                    let _ = writeln!(out, "{:<w$}  error: {e}", "");
                }
            }
            print!("{out}");
        }
    }
}

pub fn diff(args: &DiffArgs) -> u8 {
    let load = |p: &Path| -> Result<_, String> {
        let text = std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
        parse_unchecked(&text).map_err(|e| format!("{}: {e}", p.display()))
    };
    let (a, b) = match (load(&args.a), load(&args.b)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => {
            eprintln!("error: {e}");
            return USAGE;
        }
    };
    let d = diff_builds(&a, &b);
    match args.format {
        Format::Json => print_json(&serde_json::to_value(&d).expect("diff serializes")),
        Format::Csv => {
            println!("kind,entity_kind,entity_id,field,old,new");
            for e in &d.entries {
                let show = |v: &Option<Value>| v.as_ref().map_or(String::new(), Value::to_string);
                println!(
                    "{},{},{},{},{},{}",
                    serde_json::to_value(e.kind).expect("kind").as_str().unwrap_or(""),
                    e.entity_kind,
                    csv_field(&e.entity_id),
                    csv_field(e.field.as_deref().unwrap_or("")),
                    csv_field(&show(&e.old)),
                    csv_field(&show(&e.new)),
                );
            }
        }
        Format::Text if d.is_empty() => println!("no differences"),
        Format::Text => {
            println!("{} -> {}", d.from_build, d.to_build);
            for e in &d.entries {
                println!("{e}");
            }
        }
    }
    OK
}

pub fn train(args: &TrainArgs) -> u8 {
    let text = match std::fs::read_to_string(&args.tuning) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.tuning.display());
            return USAGE;
        }
    };
    let game = match playtest_core::parse_tuning(&text)
        .map_err(|e| (tuning_exit(&e), e.to_string()))
        .and_then(|c| Game::new(c).map_err(|e| (DOMAIN, e.to_string())))
    {
        Ok(g) => g,
        Err((code, msg)) => {
            eprintln!("error: {}: {msg}", args.tuning.display());
            return code;
        }
    };
    let (spec, mut scenario) = match (&args.career, args.level, args.chain) {
        (Some(c), Some(l), None) => (GoalSpec::career_level(c, l), ScenarioOverrides::career(c)),
        (None, None, Some(n)) => (GoalSpec::any_relationship_chain(n), ScenarioOverrides::default()),
        _ => {
            eprintln!("error: give either --career with --level, or --chain");
            return USAGE;
        }
    };
    scenario.grant_objects = args.grant_objects;
    let goal = match spec.compile(&game) {
        Ok(g) => g,
        Err(e) => {
            eprintln!("error: {e}");
            return USAGE;
        }
    };
    let cfg = TrainConfig {
        episodes: args.episodes,
        step_size: args.step_size,
        temperature: args.temperature,
        seed: args.seed,
    };
    let outcome = match train_softmax(&game, &scenario, &goal, &cfg) {
        Ok(o) => o,
        Err(e @ (TrainError::GoalUnreachable { .. } | TrainError::Sim(_))) => {
            eprintln!("error: {e}");
            return DOMAIN;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return USAGE;
        }
    };

    let returns_path = args.out.with_extension("returns.csv");
    let mut csv = String::from("episode,return\n");
    for (i, g) in outcome.returns.iter().enumerate() {
        let _ = writeln!(csv, "{i},{g}");
    }
    let mut policy = serde_json::to_string_pretty(&outcome.policy).expect("policy serializes");
    policy.push('\n');
    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        if let Err(e) = std::fs::create_dir_all(dir) {
            eprintln!("error: {}: {e}", dir.display());
            return USAGE;
        }
    }
    for (path, body) in [(&args.out, policy), (&returns_path, csv)] {
        if let Err(e) = std::fs::write(path, body) {
            eprintln!("error: writing {}: {e}", path.display());
            return USAGE;
        }
    }
    println!(
        "trained {} episodes, {} reached the goal; policy -> {}, returns -> {}",
        args.episodes,
        outcome.reached,
        args.out.display(),
        returns_path.display()
    );
    OK
}
