//! Sweep an 8×8 fault-injection matrix (sensor noise σ × measurement drop
//! probability) in parallel and print the summary CSV plus the error trend
//! along the σ axis.
//!
//!     cargo run --release --example fault_sweep

use scenrun::compiler::PluginRegistry;
use scenrun::runner::{load_model, sweep_model, sweep_summary_csv, RunConfig};
use std::path::Path;

fn main() {
    let scenario = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/fault_sweep.osc");
    let model = load_model(&scenario, &[]).expect("loads");
    let registry = PluginRegistry::with_builtins();
    let config = RunConfig::new(&scenario);
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());

    let start = std::time::Instant::now();
    let results = sweep_model(&model, &registry, &config, None, jobs).expect("sweeps");
    println!(
        "ran {} variants with {jobs} workers in {:.1} s\n",
        results.len(),
        start.elapsed().as_secs_f64()
    );

    let csv = sweep_summary_csv(&model, &results);
    println!("{csv}");

    // Error vs sigma at drop probability 0 (variant ids are sigma_drop).
    println!("mean localization error vs sigma (drop = 0):");
    for row in csv.lines().skip(1) {
        let cols: Vec<&str> = row.split(',').collect();
        if cols[2] == "0.0" {
            println!("  sigma={}  error={:.4}", cols[1], cols[4].parse::<f64>().unwrap());
        }
    }
}
