use clap::{Args, Parser, Subcommand};
use scenrun::model::check_concrete;
use scenrun::runner::{self, RunConfig};
use scenrun::variation;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "scenrun", about = "Scenario execution engine", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunFlags {
    /// Scenario file (.osc)
    scenario: PathBuf,
    /// Directory of importable library files; repeatable
    #[arg(long = "lib-path")]
    lib_path: Vec<PathBuf>,
    /// Plugin manifest (`action = provider` lines)
    #[arg(long)]
    plugin_manifest: Option<PathBuf>,
    /// Map file (`#` wall, `.` free, `L` landmark); defaults to the bundled maze
    #[arg(long)]
    map: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Simulation step, seconds
    #[arg(long, default_value_t = scenrun::simworld::DEFAULT_DT)]
    dt: f64,
    /// Wall-clock limit, seconds
    #[arg(long = "timeout", default_value_t = runner::DEFAULT_WALL_CLOCK_LIMIT_S)]
    timeout: f64,
    /// Artifact directory (result.json, events, junit.xml)
    #[arg(long, short, default_value = "runs")]
    output: PathBuf,
    /// Append behavior-tree snapshots to tree.log on every status change
    #[arg(long)]
    log_tree: bool,
    /// Sleep so sim-time tracks wall-time
    #[arg(long)]
    real_time: bool,
}

impl RunFlags {
    fn to_config(&self) -> RunConfig {
        let mut config = RunConfig::new(&self.scenario);
        config.library_dirs = self.lib_path.clone();
        config.plugin_manifest = self.plugin_manifest.clone();
        config.map = self.map.clone();
        config.seed = self.seed;
        config.dt = self.dt;
        config.wall_clock_limit = self.timeout;
        config.output_dir = self.output.clone();
        config.log_tree = self.log_tree;
        config.real_time = self.real_time;
        config
    }
}

#[derive(Subcommand)]
enum Command {
    /// Execute one concrete scenario
    Run(RunFlags),
    /// Expand a scenario's value lists into concrete variant files
    Variations {
        scenario: PathBuf,
        #[arg(long = "lib-path")]
        lib_path: Vec<PathBuf>,
        /// Output directory for the variant files
        #[arg(short, long)]
        output: PathBuf,
        /// Expansion cap
        #[arg(long, default_value_t = variation::DEFAULT_EXPANSION_CAP)]
        max: usize,
    },
    /// Expand and execute every variant
    Sweep {
        #[command(flatten)]
        flags: RunFlags,
        /// Concurrent variant runs
        #[arg(short = 'j', long, default_value_t = 1)]
        jobs: usize,
    },
    /// Parse, resolve and report concreteness without executing
    Check {
        scenario: PathBuf,
        #[arg(long = "lib-path")]
        lib_path: Vec<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run(flags) => {
            let config = flags.to_config();
            let result = runner::run_scenario(&config);
            for diagnostic in &result.diagnostics {
                eprintln!("{diagnostic}");
            }
            println!(
                "{}: {} (sim {:.2}s, wall {:.2}s)",
                result.scenario,
                result.verdict.as_str(),
                result.sim_duration_s,
                result.wall_duration_s
            );
            runner::exit_code(std::slice::from_ref(&result))
        }
        Command::Variations {
            scenario,
            lib_path,
            output,
            max,
        } => match run_variations(&scenario, &lib_path, &output, max) {
            Ok(count) => {
                println!("wrote {count} variant files to {}", output.display());
                0
            }
            Err(errors) => {
                for e in errors {
                    eprintln!("{e}");
                }
                2
            }
        },
        Command::Sweep { flags, jobs } => {
            let config = flags.to_config();
            match runner::run_sweep(&config, jobs) {
                Ok(results) => {
                    for result in &results {
                        println!(
                            "{}: {}",
                            result.variant.as_deref().unwrap_or(&result.scenario),
                            result.verdict.as_str()
                        );
                    }
                    println!(
                        "{} variants, summary at {}",
                        results.len(),
                        config.output_dir.join("summary.csv").display()
                    );
                    runner::exit_code(&results)
                }
                Err(errors) => {
                    for e in errors {
                        eprintln!("{e}");
                    }
                    2
                }
            }
        }
        Command::Check { scenario, lib_path } => match runner::check_scenario(&scenario, &lib_path)
        {
            Ok((model, concreteness)) => {
                match concreteness {
                    scenrun::model::Concreteness::Concrete => {
                        println!("{}: ok, concrete", model.name);
                    }
                    scenrun::model::Concreteness::NotConcrete(open) => {
                        let axes = variation::variation_axes(&model);
                        let product: usize = axes.iter().map(|a| a.values.len()).product();
                        println!(
                            "{}: ok, {} open parameter(s), {} variant(s)",
                            model.name,
                            open.len(),
                            product
                        );
                        for axis in axes {
                            println!("  {} ({} values)", axis.param, axis.values.len());
                        }
                    }
                }
                0
            }
            Err(errors) => {
                for e in errors {
                    eprintln!("{e}");
                }
                2
            }
        },
    };
    ExitCode::from(code as u8)
}

fn run_variations(
    scenario: &PathBuf,
    lib_path: &[PathBuf],
    output: &PathBuf,
    max: usize,
) -> Result<usize, Vec<String>> {
    let model = runner::load_model(scenario, lib_path)?;
    if let scenrun::model::Concreteness::Concrete = check_concrete(&model) {
        eprintln!("note: scenario is already concrete; writing a single variant");
    }
    let variants =
        variation::enumerate_variations_capped(&model, max).map_err(|e| vec![e.to_string()])?;
    let written =
        variation::write_variants(&model, &variants, output).map_err(|e| vec![e.to_string()])?;
    Ok(written.len())
}
