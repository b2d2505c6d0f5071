use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn playtest(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_playtest"))
        .args(args)
        .env_remove("PLAYTEST_OUT")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn fx(name: &str) -> String {
    fixtures().join(name).display().to_string()
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&o.stdout))
    })
}

#[test]
fn validate_exit_codes() {
    assert_eq!(code(&playtest(&["validate", &fx("desk_base.json")])), 0);

    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.json");
    assert_eq!(code(&playtest(&["validate", missing.to_str().unwrap()])), 2);

    let malformed = dir.path().join("bad.json");
    std::fs::write(&malformed, "{ \"schema_version\": 1,").unwrap();
    let o = playtest(&["validate", malformed.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stdout).contains("line"));

    // parses, but an action pays in a resource that does not exist
    let mut v: Value =
        serde_json::from_str(&std::fs::read_to_string(fixtures().join("desk_base.json")).unwrap())
            .unwrap();
    v["actions"][0]["costs"] = json!({ "gold": 1 });
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, v.to_string()).unwrap();
    let o = playtest(&["validate", "--format", "json", broken.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let report = stdout_json(&o);
    assert_eq!(report[0]["status"], "invalid");
    assert!(!report[0]["diagnostics"].as_array().unwrap().is_empty());
}

#[test]
fn validate_warns_about_reward_curve_anomalies() {
    let o = playtest(&["validate", "--format", "json", &fx("bugged_event.json")]);
    assert_eq!(code(&o), 0);
    let report = stdout_json(&o);
    assert_eq!(report[0]["status"], "ok");
    let diags = report[0]["diagnostics"].as_array().unwrap();
    assert!(diags.iter().any(|d| d["rule"] == "step_reward_anomaly"
        && d["entity_id"] == "intern_project"));

    let o = playtest(&["validate", "--format", "csv", &fx("bugged_event.json")]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("path,severity,rule,entity_kind,entity_id,message\n"));
    assert!(text.contains(",warning,step_reward_anomaly,"));
}

#[test]
fn diff_reports_changes_and_identity() {
    let o = playtest(&["diff", &fx("build_a.json"), &fx("build_a.json")]);
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "no differences");

    let o = playtest(&["diff", "--format", "json", &fx("build_a.json"), &fx("build_b.json")]);
    assert_eq!(code(&o), 0);
    let d = stdout_json(&o);
    let entries = d["entries"].as_array().unwrap();
    assert!(entries.iter().any(|e| e["entity_id"] == "energy"));
    assert_eq!(code(&playtest(&["diff", &fx("build_a.json"), "/nonexistent.json"])), 2);
}

fn write_suite(dir: &Path, experiments: Value) -> PathBuf {
    for f in ["desk_base.json", "clerk_variance.json"] {
        std::fs::copy(fixtures().join(f), dir.join(f)).unwrap();
    }
    let path = dir.join("suite.json");
    std::fs::write(&path, experiments.to_string()).unwrap();
    path
}

fn careers(id: &str, tuning: &str) -> Value {
    json!({
        "id": id, "study": "career_progression", "tuning": tuning,
        "careers": [{ "career": "barista", "target_level": 3 }],
        "trials": 2, "base_seed": 1
    })
}

#[test]
fn run_writes_every_artifact_and_honours_the_env_dir() {
    let dir = tempfile::tempdir().unwrap();
    let suite = write_suite(dir.path(), json!([careers("careers", "desk_base.json")]));
    let out = dir.path().join("from_env");
    let o = Command::new(env!("CARGO_BIN_EXE_playtest"))
        .args(["run", suite.to_str().unwrap(), "--format", "json"])
        .env("PLAYTEST_OUT", &out)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary = stdout_json(&o);
    assert_eq!(summary[0]["status"], "ok");
    let exp = out.join("careers");
    for f in ["stats.json", "trials.csv", "chartdata.json", "bundle.json"] {
        assert!(exp.join(f).exists(), "{f}");
    }
    let bundle: Value =
        serde_json::from_str(&std::fs::read_to_string(exp.join("bundle.json")).unwrap()).unwrap();
    assert_eq!(bundle["experiment_id"], "careers");
    assert_eq!(bundle["inputs_digest"].as_str().unwrap().len(), 64);
    assert_eq!(bundle["tables"], json!(["trials.csv"]));
    let chart: Value =
        serde_json::from_str(&std::fs::read_to_string(exp.join("chartdata.json")).unwrap()).unwrap();
    assert_eq!(chart["id"], "careers");
}

#[test]
fn a_failing_experiment_does_not_stop_the_others() {
    let dir = tempfile::tempdir().unwrap();
    let suite = write_suite(
        dir.path(),
        json!([careers("first", "desk_base.json"), careers("gone", "missing.json"), careers("last", "desk_base.json")]),
    );
    let out = dir.path().join("out");
    let o = playtest(&["run", suite.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    for id in ["first", "last"] {
        assert!(out.join(id).join("trials.csv").exists());
    }
    let stats: Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("gone/stats.json")).unwrap()).unwrap();
    assert_eq!(stats["status"], "failed");
    assert!(stats["error"].as_str().unwrap().contains("missing.json"));
    assert!(!out.join("gone/trials.csv").exists());
}

#[test]
fn bad_suites_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    let dup = write_suite(dir.path(), json!([careers("x", "desk_base.json"), careers("x", "desk_base.json")]));
    assert_eq!(code(&playtest(&["run", dup.to_str().unwrap(), "--out", out])), 2);
    let garbage = dir.path().join("garbage.json");
    std::fs::write(&garbage, "[{").unwrap();
    assert_eq!(code(&playtest(&["run", garbage.to_str().unwrap(), "--out", out])), 2);
    assert_eq!(code(&playtest(&["run", "/no/such/suite.json", "--out", out])), 2);
    let s = dup.to_str().unwrap();
    assert_eq!(code(&playtest(&["run", s, "--parallel", "0", "--out", out])), 2);
}

#[test]
fn inputs_digest_follows_tuning_contents() {
    let dir = tempfile::tempdir().unwrap();
    let suite = write_suite(dir.path(), json!([careers("careers", "desk_base.json")]));
    let digest = |run: &str| -> String {
        let out = dir.path().join(run);
        assert_eq!(code(&playtest(&["run", suite.to_str().unwrap(), "--out", out.to_str().unwrap()])), 0);
        let b: Value = serde_json::from_str(
            &std::fs::read_to_string(out.join("careers/bundle.json")).unwrap(),
        )
        .unwrap();
        b["inputs_digest"].as_str().unwrap().to_string()
    };
    let first = digest("a");
    assert_eq!(first, digest("b"));
    let tuning = dir.path().join("desk_base.json");
    let mut text = std::fs::read_to_string(&tuning).unwrap();
    text.push('\n');
    std::fs::write(&tuning, text).unwrap();
    assert_ne!(first, digest("c"));
}

#[test]
fn seed_override_changes_nothing_for_a_deterministic_agent_but_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let suite = write_suite(dir.path(), json!([careers("careers", "desk_base.json")]));
    let out = dir.path().join("out");
    let o = playtest(&["run", suite.to_str().unwrap(), "--seed", "77", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let stats: Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("careers/stats.json")).unwrap()).unwrap();
    assert_eq!(stats["base_seed"], 77);
    let csv = std::fs::read_to_string(out.join("careers/trials.csv")).unwrap();
    // trial seeds are base ^ index
    let seeds: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').nth(5).unwrap()).collect();
    assert_eq!(seeds, vec!["77", "76"]);
}

#[test]
fn train_writes_policy_and_returns() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("policy.json");
    let o = playtest(&[
        "train",
        &fx("clerk_variance.json"),
        "--career",
        "clerk",
        "--level",
        "3",
        "--episodes",
        "50",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let policy: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(policy["temperature"], 1.0);
    assert_eq!(policy["weights"].as_array().unwrap().len(), policy["feature_names"].as_array().unwrap().len());
    let returns = std::fs::read_to_string(dir.path().join("policy.returns.csv")).unwrap();
    assert_eq!(returns.lines().count(), 51);

    let o = playtest(&[
        "train",
        &fx("unreachable.json"),
        "--career",
        "jeweler",
        "--level",
        "2",
        "--episodes",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 1);
    let o = playtest(&["train", &fx("clerk_variance.json"), "--chain", "1", "--career", "clerk", "--out", "x"]);
    assert_eq!(code(&o), 2);
    let o = playtest(&["train", &fx("clerk_variance.json"), "--career", "clerk", "--level", "3", "--episodes", "0", "--out", "x"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn softmax_agent_comparison_runs_from_a_suite() {
    let dir = tempfile::tempdir().unwrap();
    let suite = write_suite(
        dir.path(),
        json!([{
            "id": "agents", "study": "agent_comparison", "tuning": "clerk_variance.json",
            "careers": [{ "career": "clerk", "target_level": 3 }], "trials": 40, "base_seed": 2,
            "agent": { "softmax": { "train": { "episodes": 100, "step_size": 0.05, "temperature": 1.0, "seed": 2 } } },
            "softmax_temperatures": [1.0, 0.001]
        }]),
    );
    let out = dir.path().join("out");
    let o = playtest(&["run", suite.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stats: Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("agents/stats.json")).unwrap()).unwrap();
    let row = &stats["result"]["careers"][0];
    assert_eq!(row["astar"]["variance"], 0.0);
    assert_eq!(row["softmax"].as_array().unwrap().len(), 2);
}
