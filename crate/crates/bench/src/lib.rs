//! Shared fixtures for the criterion benches.

use std::path::Path;

use playtest_core::{parse_tuning, Game};

/// Loads `fixtures/<name>.json` from the workspace root.
pub fn fixture(name: &str) -> Game {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(format!("{name}.json"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    Game::new(parse_tuning(&text).expect("fixture parses")).expect("fixture is valid")
}
