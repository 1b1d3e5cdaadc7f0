//! Expand a scenario's `keep(... in [...])` constraints into the Cartesian
//! product of concrete variants and write one `.osc` file per variant.
//!
//!     cargo run --example expand_variations

use scenrun::runner::load_model;
use scenrun::variation::{enumerate_variations, variation_axes, write_variants};
use std::path::Path;

fn main() {
    let scenario = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/fault_sweep.osc");
    let model = load_model(&scenario, &[]).expect("loads");

    let axes = variation_axes(&model);
    println!("scenario '{}' has {} axes:", model.name, axes.len());
    for axis in &axes {
        println!("  {} ({} values)", axis.param, axis.values.len());
    }

    let variants = enumerate_variations(&model).expect("within cap");
    println!("expands to {} variants", variants.len());
    println!("first: {}", variants.first().unwrap().variant_id);
    println!("last:  {}", variants.last().unwrap().variant_id);

    let out = std::env::temp_dir().join("scenrun_variants");
    let written = write_variants(&model, &variants, &out).expect("writes");
    println!("wrote {} files to {}", written.len(), out.display());
}
