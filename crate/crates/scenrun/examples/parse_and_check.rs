//! Parse scenario sources, report diagnostics with source context, and check
//! whether a scenario is concrete or still carries open variation axes.
//!
//!     cargo run --example parse_and_check

use scenrun::model::{build_model, check_concrete};
use scenrun::variation::variation_axes;
use scenrun::{parse, render_diagnostics, tokenize};
use std::collections::BTreeMap;

const OPEN: &str = "\
import osc.standard

scenario speed_check:
    do serial:
        set_node_parameter(node_name: 'laserscan_modification',
                           parameter_name: 'gaussian_noise_std_deviation') with:
            keep(it.parameter_value in ['0.0', '0.1', '0.2'])
        wait elapsed(1s)
        emit end
";

const BROKEN: &str = "\
scenario broken:
    do serial:
        wait elapsed(2x)
";

fn main() {
    // A well-formed scenario with one open axis.
    let tokens = tokenize(OPEN, "speed_check.osc").expect("lexes");
    let ast = parse(&tokens).expect("parses");
    let models = build_model(&ast, &BTreeMap::new()).expect("builds");
    let model = &models[0];
    println!("scenario '{}': {:?}", model.name, check_concrete(model));
    for axis in variation_axes(model) {
        println!("  axis '{}' with {} values", axis.param, axis.values.len());
    }

    // A broken one: diagnostics point at the offending span.
    println!("\n--- diagnostics for a bad unit suffix ---");
    match tokenize(BROKEN, "broken.osc") {
        Err(diags) => println!("{}", render_diagnostics(&diags, BROKEN)),
        Ok(tokens) => match parse(&tokens) {
            Err(diags) => println!("{}", render_diagnostics(&diags, BROKEN)),
            Ok(_) => println!("unexpectedly parsed"),
        },
    }
}
