//! The recording gate: a scenario that records channels does not tick until
//! every recorded channel has a publisher. Here one channel shows up five
//! steps late, so the first behavior tick happens at step 5 exactly.
//!
//!     cargo run --example recording_gate

use scenrun::compiler::PluginRegistry;
use scenrun::model::build_model;
use scenrun::runner::{run_model, EngineOptions};
use scenrun::{parse, tokenize};
use std::collections::BTreeMap;

const SRC: &str = "\
import osc.standard

scenario gated:
    do serial:
        record(channels: ['camera/image'], output: 'gated.jsonl')
        wait elapsed(0.1s)
        emit end
";

fn main() {
    let tokens = tokenize(SRC, "gated.osc").expect("lexes");
    let ast = parse(&tokens).expect("parses");
    let model = build_model(&ast, &BTreeMap::new()).expect("builds").remove(0);
    let registry = PluginRegistry::with_builtins();

    let opts = EngineOptions {
        // register 'camera/image' after 5 gate steps
        channel_schedule: vec![(5, "camera/image".to_string())],
        ..EngineOptions::default()
    };
    let result = run_model(&model, &registry, opts);
    println!("verdict: {}", result.verdict.as_str());
    println!("first tick at step {}", result.metrics["first_tick_step"]);

    // Without a publisher the gate can never open: that is an Error.
    let result = run_model(&model, &registry, EngineOptions::default());
    println!("\nwithout the late publisher: {}", result.verdict.as_str());
    for d in &result.diagnostics {
        println!("  {d}");
    }
}
