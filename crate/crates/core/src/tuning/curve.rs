use serde::{Deserialize, Serialize};

use super::{Diagnostic, EntityKind, EventKind, EventSpec, Rule, TuningConfig};

/// Linter threshold: a later step is suspicious when its marginal reward per
/// unit of marginal threshold falls below this fraction of the first step's.
pub const DEFAULT_ANOMALY_RATIO: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepPoint {
    pub xp_threshold: u64,
    pub cumulative_reward: u64,
}

/// Cost/reward curve of one event: each step's threshold paired with the
/// total career XP paid out by the time that step is reached.
pub fn event_step_curve(config: &TuningConfig, event_id: &str) -> Option<Vec<StepPoint>> {
    let event = config.event(event_id)?;
    Some(curve_of(event, |s| s.reward.career_xp))
}

fn curve_of(event: &EventSpec, value: impl Fn(&super::EventStep) -> u64) -> Vec<StepPoint> {
    let mut total = 0u64;
    event
        .steps
        .iter()
        .map(|s| {
            total = total.saturating_add(value(s));
            StepPoint {
                xp_threshold: s.xp_threshold,
                cumulative_reward: total,
            }
        })
        .collect()
}

/// Flags event steps whose marginal reward per marginal threshold is far below
/// the first step's. Career events are measured in career XP, relationship
/// events in relationship XP.
pub fn flag_step_anomalies(config: &TuningConfig, anomaly_ratio: f64) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for event in &config.events {
        let curve = match event.kind {
            EventKind::Career => curve_of(event, |s| s.reward.career_xp),
            EventKind::Relationship => curve_of(event, |s| s.reward.relationship_xp),
        };
        let Some(first) = curve.first() else { continue };
        let base = first.cumulative_reward as f64 / first.xp_threshold.max(1) as f64;
        for (i, w) in curve.windows(2).enumerate() {
            let d_threshold = w[1].xp_threshold.saturating_sub(w[0].xp_threshold);
            let d_reward = w[1].cumulative_reward - w[0].cumulative_reward;
            if d_threshold == 0 {
                continue;
            }
            let ratio = d_reward as f64 / d_threshold as f64;
            if d_reward == 0 || ratio < anomaly_ratio * base {
                out.push(Diagnostic::warning(
                    Rule::StepRewardAnomaly,
                    EntityKind::Event,
                    &event.id,
                    format!(
                        "step {} adds {d_threshold} xp of effort for {d_reward} reward \
                         ({ratio:.3}/xp vs {base:.3}/xp at step 1)",
                        i + 2
                    ),
                ));
            }
        }
    }
    out
}
