//! Compile a scenario into its behavior tree without running it, then show
//! the node structure and the channels it would record and publish.
//!
//!     cargo run --example compile_to_tree

use scenrun::compiler::{compile, PluginRegistry};
use scenrun::model::build_model;
use scenrun::btree::snapshot;
use scenrun::{parse, tokenize};
use std::collections::BTreeMap;

const SRC: &str = "\
import osc.standard
import osc.robotics

scenario example_nav:
    robot: differential_drive_robot
    do parallel:
        serial:
            record(channels: ['robot/ground_truth'], output: 'nav.jsonl')
            robot.init_localization(pose_3d(position_3d(x: 0.0m, y: 0.0m)))
            robot.nav_to_pose(pose_3d(position_3d(x: 3.0m, y: -3.0m)))
            emit end
        time_out: serial:
            wait elapsed(60s)
            emit fail
";

fn main() {
    let tokens = tokenize(SRC, "example_nav.osc").expect("lexes");
    let ast = parse(&tokens).expect("parses");
    let model = build_model(&ast, &BTreeMap::new()).expect("builds").remove(0);
    let registry = PluginRegistry::with_builtins();

    let compiled = compile(&model, &registry).expect("compiles");
    println!("{} nodes:\n{}", compiled.root.node_count(), snapshot(&compiled.root));
    println!("recorded channels: {:?}", compiled.recorded_channels);
    println!("published channels: {:?}", compiled.published_channels);
    println!("event output: {}", compiled.event_output);
}
