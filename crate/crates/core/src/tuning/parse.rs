use serde_json::Value;
use thiserror::Error;

use super::{validate, Diagnostic, Rule, TuningConfig};

/// Top-level keys every tuning document must carry.
pub const REQUIRED_TOP_LEVEL: [&str; 7] = [
    "build_id",
    "resources",
    "actions",
    "events",
    "careers",
    "relationships",
    "objects",
];

const OPTIONAL_TOP_LEVEL: [&str; 1] = ["schema_version"];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TuningError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema error: {message}")]
    Schema {
        message: String,
        missing: Vec<String>,
    },
    #[error("dangling reference: \"{site}\" -> \"{target}\"")]
    DanglingReference { site: String, target: String },
    #[error("invariant violation [{rule}] on \"{entity}\": {message}")]
    InvariantViolation {
        rule: Rule,
        entity: String,
        message: String,
        /// Every error-severity diagnostic, the first of which is reported above.
        diagnostics: Vec<Diagnostic>,
    },
}

impl TuningError {
    fn from_json(err: serde_json::Error) -> Self {
        use serde_json::error::Category;
        match err.classify() {
            Category::Data => TuningError::Schema {
                message: err.to_string(),
                missing: Vec::new(),
            },
            Category::Syntax | Category::Eof | Category::Io => TuningError::Syntax {
                line: err.line(),
                column: err.column(),
                message: strip_position(&err.to_string()),
            },
        }
    }
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(ix) => msg[..ix].to_string(),
        None => msg.to_string(),
    }
}

/// Parses a tuning document checking syntax and schema only. The result may
/// still violate config invariants; run [`validate`] on it.
pub fn parse_unchecked(text: &str) -> Result<TuningConfig, TuningError> {
    let value: Value = serde_json::from_str(text).map_err(TuningError::from_json)?;
    let Value::Object(map) = &value else {
        return Err(TuningError::Schema {
            message: "top level must be a JSON object".into(),
            missing: REQUIRED_TOP_LEVEL.iter().map(|s| s.to_string()).collect(),
        });
    };
    let missing: Vec<String> = REQUIRED_TOP_LEVEL
        .iter()
        .filter(|k| !map.contains_key(**k))
        .map(|k| k.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(TuningError::Schema {
            message: format!("missing required top-level fields: {}", missing.join(", ")),
            missing,
        });
    }
    if let Some(extra) = map
        .keys()
        .find(|k| !REQUIRED_TOP_LEVEL.contains(&k.as_str()) && !OPTIONAL_TOP_LEVEL.contains(&k.as_str()))
    {
        return Err(TuningError::Schema {
            message: format!("unknown top-level field `{extra}`"),
            missing: Vec::new(),
        });
    }
    // Re-parse from text rather than from the Value so data errors keep their
    // line/column.
    serde_json::from_str(text).map_err(TuningError::from_json)
}

/// Parses and fully validates a tuning document.
pub fn parse_tuning(text: &str) -> Result<TuningConfig, TuningError> {
    let config = parse_unchecked(text)?;
    let errors: Vec<Diagnostic> = validate(&config)
        .into_iter()
        .filter(Diagnostic::is_error)
        .collect();
    let Some(first) = errors.first() else {
        return Ok(config);
    };
    if let Some(d) = errors.iter().find(|d| d.rule == Rule::DanglingReference) {
        return Err(TuningError::DanglingReference {
            site: d.entity_id.clone(),
            target: d.target.clone().unwrap_or_default(),
        });
    }
    Err(TuningError::InvariantViolation {
        rule: first.rule,
        entity: first.entity_id.clone(),
        message: first.message.clone(),
        diagnostics: errors,
    })
}

/// Canonical pretty-printed JSON for a config.
pub fn to_json(config: &TuningConfig) -> String {
    serde_json::to_string_pretty(config).expect("tuning config serializes")
}
