//! Run a bundled scenario end to end — parse, build, compile, tick against
//! the simulation backend — and print the result record as JSON.
//!
//!     cargo run --example run_scenario

use scenrun::compiler::PluginRegistry;
use scenrun::report::result_json;
use scenrun::runner::{load_model, run_model, EngineOptions};
use std::path::Path;

fn main() {
    let scenario = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/nav_timeout.osc");
    let model = load_model(&scenario, &[]).expect("loads");
    let registry = PluginRegistry::with_builtins();

    let result = run_model(&model, &registry, EngineOptions::default());
    println!(
        "{}",
        serde_json::to_string_pretty(&result_json(&result)).unwrap()
    );
    println!("\nevent log ({}):", result.event_output);
    for record in &result.event_log {
        println!("  {}", serde_json::to_string(record).unwrap());
    }
}
