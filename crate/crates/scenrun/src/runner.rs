//! Run orchestration: the full pipeline from scenario file to verdict,
//! plus parameter-sweep execution.
//!
//! Pipeline: tokenize → parse → build_model → check_concrete → compile →
//! gate on recorded channels → loop { step world; tick tree; poll terminal }.

use crate::btree::{snapshot, tick, Blackboard, TickContext};
use crate::compiler::{compile, CompiledScenario, PluginRegistry};
use crate::diagnostics::render_diagnostics;
use crate::events::EventLogRecord;
use crate::lexer::tokenize;
use crate::model::{build_model, check_concrete, Concreteness, ScenarioModel, TypeKind, Value};
use crate::parser::parse;
use crate::simworld::map::GridMap;
use crate::simworld::rng::mix_seed;
use crate::simworld::WorldState;
use crate::variation::{enumerate_variations_capped, materialize, variation_axes};
use crate::{report, AstNode};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

pub const DEFAULT_WALL_CLOCK_LIMIT_S: f64 = 300.0;

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub scenario_file: PathBuf,
    pub library_dirs: Vec<PathBuf>,
    pub plugin_manifest: Option<PathBuf>,
    pub map: Option<PathBuf>,
    pub seed: u64,
    pub dt: f64,
    /// Wall-clock safety net, independent of any scenario-level timeout.
    pub wall_clock_limit: f64,
    pub output_dir: PathBuf,
    pub log_tree: bool,
    /// Sleep so sim-time tracks wall-time (demos); default is as fast as
    /// possible.
    pub real_time: bool,
    /// Scripted late channel registrations: (gate step, channel name).
    pub channel_schedule: Vec<(u64, String)>,
}

impl RunConfig {
    pub fn new(scenario_file: impl Into<PathBuf>) -> Self {
        RunConfig {
            scenario_file: scenario_file.into(),
            library_dirs: Vec::new(),
            plugin_manifest: None,
            map: None,
            seed: 0,
            dt: crate::simworld::DEFAULT_DT,
            wall_clock_limit: DEFAULT_WALL_CLOCK_LIMIT_S,
            output_dir: PathBuf::from("runs"),
            log_tree: false,
            real_time: false,
            channel_schedule: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Success,
    Fail,
    Error,
    Timeout,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Success => "success",
            Verdict::Fail => "fail",
            Verdict::Error => "error",
            Verdict::Timeout => "timeout",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub scenario: String,
    pub variant: Option<String>,
    pub verdict: Verdict,
    pub sim_duration_s: f64,
    pub wall_duration_s: f64,
    pub seed: u64,
    /// Every event emitted on the blackboard, (name, sim-time).
    pub events: Vec<(String, f64)>,
    pub metrics: BTreeMap<String, f64>,
    pub event_log: Vec<EventLogRecord>,
    /// Event-log filename, from the scenario's `record` action.
    pub event_output: String,
    pub tree_log: Option<String>,
    /// Human-readable problems (compile errors, faults); empty on Success.
    pub diagnostics: Vec<String>,
}

impl RunResult {
    fn error(scenario: &str, variant: Option<String>, seed: u64, diagnostics: Vec<String>) -> Self {
        RunResult {
            scenario: scenario.to_string(),
            variant,
            verdict: Verdict::Error,
            sim_duration_s: 0.0,
            wall_duration_s: 0.0,
            seed,
            events: Vec::new(),
            metrics: BTreeMap::new(),
            event_log: Vec::new(),
            event_output: "events.jsonl".to_string(),
            tree_log: None,
            diagnostics,
        }
    }
}

/// 0 iff all Success; 1 if any Fail/Timeout; 2 if any Error.
pub fn exit_code(results: &[RunResult]) -> i32 {
    if results.iter().any(|r| r.verdict == Verdict::Error) {
        2
    } else if results
        .iter()
        .any(|r| matches!(r.verdict, Verdict::Fail | Verdict::Timeout))
    {
        1
    } else {
        0
    }
}

/// Parse one `.osc` file into an AST, rendering lex/parse errors as text.
fn parse_file(path: &Path) -> Result<(AstNode, String), Vec<String>> {
    let source = std::fs::read_to_string(path)
        .map_err(|e| vec![format!("cannot read {}: {e}", path.display())])?;
    let file_name = path.to_string_lossy().into_owned();
    let tokens =
        tokenize(&source, &file_name).map_err(|d| vec![render_diagnostics(&d, &source)])?;
    let ast = parse(&tokens).map_err(|d| vec![render_diagnostics(&d, &source)])?;
    Ok((ast, source))
}

/// Every `.osc` file in the given directories becomes an importable library
/// named after its file stem.
fn load_libraries(dirs: &[PathBuf]) -> Result<BTreeMap<String, AstNode>, Vec<String>> {
    let mut libraries = BTreeMap::new();
    for dir in dirs {
        let entries = std::fs::read_dir(dir)
            .map_err(|e| vec![format!("cannot read library dir {}: {e}", dir.display())])?;
        let mut paths: Vec<PathBuf> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|ext| ext == "osc"))
            .collect();
        paths.sort();
        for path in paths {
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            let (ast, _) = parse_file(&path)?;
            libraries.insert(name, ast);
        }
    }
    Ok(libraries)
}

/// Load and resolve the first scenario declared in the file.
pub fn load_model(path: &Path, library_dirs: &[PathBuf]) -> Result<ScenarioModel, Vec<String>> {
    let (ast, source) = parse_file(path)?;
    let libraries = load_libraries(library_dirs)?;
    let mut models = build_model(&ast, &libraries)
        .map_err(|d| vec![render_diagnostics(&d, &source)])?;
    if models.is_empty() {
        return Err(vec![format!(
            "{} declares no scenario",
            path.display()
        )]);
    }
    Ok(models.remove(0))
}

fn build_registry(manifest: Option<&Path>) -> Result<PluginRegistry, Vec<String>> {
    let mut registry = PluginRegistry::with_builtins();
    if let Some(path) = manifest {
        let text = std::fs::read_to_string(path)
            .map_err(|e| vec![format!("cannot read plugin manifest {}: {e}", path.display())])?;
        registry.load_manifest(&text).map_err(|e| vec![e])?;
    }
    Ok(registry)
}

fn load_map(path: Option<&Path>) -> Result<Option<GridMap>, Vec<String>> {
    match path {
        None => Ok(None),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| vec![format!("cannot read map {}: {e}", path.display())])?;
            GridMap::parse(&text)
                .map(Some)
                .map_err(|e| vec![format!("map {}: {e}", path.display())])
        }
    }
}

/// Engine knobs for one in-process run (no file I/O).
#[derive(Debug, Clone)]
pub struct EngineOptions {
    pub seed: u64,
    pub dt: f64,
    pub wall_clock_limit: f64,
    pub map: Option<GridMap>,
    pub log_tree: bool,
    pub real_time: bool,
    pub channel_schedule: Vec<(u64, String)>,
    pub variant: Option<String>,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            seed: 0,
            dt: crate::simworld::DEFAULT_DT,
            wall_clock_limit: DEFAULT_WALL_CLOCK_LIMIT_S,
            map: None,
            log_tree: false,
            real_time: false,
            channel_schedule: Vec::new(),
            variant: None,
        }
    }
}

impl EngineOptions {
    fn from_config(config: &RunConfig, map: Option<GridMap>) -> Self {
        EngineOptions {
            seed: config.seed,
            dt: config.dt,
            wall_clock_limit: config.wall_clock_limit,
            map,
            log_tree: config.log_tree,
            real_time: config.real_time,
            channel_schedule: config.channel_schedule.clone(),
            variant: None,
        }
    }
}

/// Execute one concrete model: compile, set up the world, enforce the
/// recording gate, then drive the tick loop to a verdict.
pub fn run_model(
    model: &ScenarioModel,
    registry: &PluginRegistry,
    opts: EngineOptions,
) -> RunResult {
    let start = Instant::now();
    let fail = |diagnostics: Vec<String>| {
        let mut r = RunResult::error(&model.name, opts.variant.clone(), opts.seed, diagnostics);
        r.wall_duration_s = start.elapsed().as_secs_f64();
        r
    };

    if let Concreteness::NotConcrete(open) = check_concrete(model) {
        let params: Vec<String> = open.iter().map(|(_, p)| p.clone()).collect();
        return fail(vec![format!(
            "scenario is not concrete (open parameters: {}); expand it with the variations or sweep subcommand",
            params.join(", ")
        )]);
    }

    let mut compiled: CompiledScenario = match compile(model, registry) {
        Ok(c) => c,
        Err(errors) => return fail(errors),
    };

    let map = opts
        .map
        .clone()
        .unwrap_or_else(|| GridMap::parse(crate::simworld::map::DEFAULT_MAP).expect("bundled map"));
    let mut world = WorldState::new(map, opts.seed, opts.dt);
    world.channel_schedule = opts.channel_schedule.clone();

    let mut robots = Vec::new();
    for (name, ty) in &model.actors {
        let is_robot = ty.short_name() == "differential_drive_robot"
            || ty.inherits.as_deref() == Some("differential_drive_robot");
        if ty.kind == TypeKind::Actor && is_robot {
            world.add_robot(name);
            robots.push(name.clone());
        }
    }
    for channel in &compiled.published_channels {
        world.register_channel(channel);
    }

    // recording gate: hold the sim clock at zero until every recorded
    // channel has a publisher
    let wall_limit = Duration::from_secs_f64(opts.wall_clock_limit);
    let mut gate_steps: u64 = 0;
    loop {
        world.apply_channel_schedule(gate_steps);
        let missing: Vec<&String> = compiled
            .recorded_channels
            .iter()
            .filter(|c| !world.has_channel(c))
            .collect();
        if missing.is_empty() {
            break;
        }
        let all_pending = missing
            .iter()
            .all(|m| world.channel_schedule.iter().any(|(_, n)| &n == m));
        if !all_pending {
            return fail(vec![format!(
                "recorded channel '{}' has no publisher",
                missing[0]
            )]);
        }
        if start.elapsed() >= wall_limit {
            let mut r = fail(vec!["recording gate never opened".to_string()]);
            r.verdict = Verdict::Timeout;
            return r;
        }
        gate_steps += 1;
    }

    let mut blackboard = Blackboard::new(&model.name);
    let mut records: Vec<EventLogRecord> = Vec::new();
    let mut tree_log = if opts.log_tree {
        Some(String::new())
    } else {
        None
    };
    let mut last_snapshot = snapshot(&compiled.root);
    if let Some(log) = tree_log.as_mut() {
        log.push_str("# t=0.000\n");
        log.push_str(&last_snapshot);
    }

    let mut error_sum = 0.0;
    let mut error_count = 0usize;
    let mut ticks: u64 = 0;
    let (verdict, sim_end);
    loop {
        world.step();
        for name in &robots {
            let localized = world
                .robot(name)
                .map(|(_, c)| c.localized)
                .unwrap_or(false);
            if localized {
                error_sum += world.localization_error(name).unwrap_or(0.0);
                error_count += 1;
            }
        }
        let status = {
            let mut ctx = TickContext {
                sim_time: world.clock,
                blackboard: &mut blackboard,
                world: &mut world,
                records: &mut records,
            };
            tick(&mut compiled.root, &mut ctx)
        };
        ticks += 1;
        if let Some(log) = tree_log.as_mut() {
            let snap = snapshot(&compiled.root);
            if snap != last_snapshot {
                log.push_str(&format!("# t={:.3}\n", world.clock));
                log.push_str(&snap);
                last_snapshot = snap;
            }
        }
        if let Some((name, t)) = blackboard.terminal_event() {
            verdict = if name == "end" {
                Verdict::Success
            } else {
                Verdict::Fail
            };
            sim_end = t;
            break;
        }
        if status.is_finished() {
            // the tree completed without a terminal event
            let faulted = records.iter().any(|r| r.kind == "fault");
            verdict = if faulted {
                Verdict::Error
            } else if status == crate::btree::NodeStatus::Success {
                Verdict::Success
            } else {
                Verdict::Fail
            };
            sim_end = world.clock;
            break;
        }
        if start.elapsed() >= wall_limit {
            verdict = Verdict::Timeout;
            sim_end = world.clock;
            break;
        }
        if opts.real_time {
            let target = Duration::from_secs_f64(world.clock);
            let elapsed = start.elapsed();
            if target > elapsed {
                std::thread::sleep(target - elapsed);
            }
        }
    }

    let mut metrics = BTreeMap::new();
    metrics.insert("ticks".to_string(), ticks as f64);
    metrics.insert("first_tick_step".to_string(), gate_steps as f64);
    if error_count > 0 {
        metrics.insert(
            "mean_localization_error".to_string(),
            error_sum / error_count as f64,
        );
    }
    let diagnostics: Vec<String> = records
        .iter()
        .filter(|r| r.kind == "fault")
        .map(|r| {
            format!(
                "{}: {}",
                r.source,
                r.data
                    .get("message")
                    .and_then(|v| v.as_str())
                    .unwrap_or("fault")
            )
        })
        .collect();
    RunResult {
        scenario: model.name.clone(),
        variant: opts.variant,
        verdict,
        sim_duration_s: sim_end,
        wall_duration_s: start.elapsed().as_secs_f64(),
        seed: opts.seed,
        events: blackboard.events().to_vec(),
        metrics,
        event_log: records,
        event_output: compiled.event_output,
        tree_log,
        diagnostics,
    }
}

/// Full file-to-artifacts run of one scenario.
pub fn run_scenario(config: &RunConfig) -> RunResult {
    let scenario_name = config
        .scenario_file
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".to_string());
    let result = (|| -> Result<RunResult, Vec<String>> {
        let model = load_model(&config.scenario_file, &config.library_dirs)?;
        let registry = build_registry(config.plugin_manifest.as_deref())?;
        let map = load_map(config.map.as_deref())?;
        Ok(run_model(
            &model,
            &registry,
            EngineOptions::from_config(config, map),
        ))
    })()
    .unwrap_or_else(|diagnostics| {
        RunResult::error(&scenario_name, None, config.seed, diagnostics)
    });
    if let Err(e) = report::write_run_artifacts(&result, &config.output_dir) {
        eprintln!("warning: could not write artifacts: {e}");
    }
    if let Err(e) = report::write_junit(std::slice::from_ref(&result), &config.output_dir) {
        eprintln!("warning: could not write junit.xml: {e}");
    }
    result
}

/// Expand every variation of the scenario and run the variants, `parallelism`
/// at a time. Results come back in enumeration order; a summary CSV and a
/// combined junit.xml are written to the output directory.
pub fn run_sweep(config: &RunConfig, parallelism: usize) -> Result<Vec<RunResult>, Vec<String>> {
    let model = load_model(&config.scenario_file, &config.library_dirs)?;
    let registry = build_registry(config.plugin_manifest.as_deref())?;
    let map = load_map(config.map.as_deref())?;
    let results = sweep_model(&model, &registry, config, map, parallelism)?;
    write_sweep_artifacts(&model, &results, &config.output_dir)?;
    Ok(results)
}

/// In-process sweep core, reusable without touching the filesystem.
pub fn sweep_model(
    model: &ScenarioModel,
    registry: &PluginRegistry,
    config: &RunConfig,
    map: Option<GridMap>,
    parallelism: usize,
) -> Result<Vec<RunResult>, Vec<String>> {
    let variants = enumerate_variations_capped(model, crate::variation::DEFAULT_EXPANSION_CAP)
        .map_err(|e| vec![e.to_string()])?;
    let parallelism = parallelism.max(1);
    let next = std::sync::atomic::AtomicUsize::new(0);
    let slots: Vec<std::sync::Mutex<Option<RunResult>>> =
        (0..variants.len()).map(|_| std::sync::Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..parallelism.min(variants.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if i >= variants.len() {
                    break;
                }
                let variant = &variants[i];
                let result = match materialize(model, variant) {
                    Ok(concrete) => run_model(
                        &concrete,
                        registry,
                        EngineOptions {
                            seed: mix_seed(config.seed, i as u64),
                            dt: config.dt,
                            wall_clock_limit: config.wall_clock_limit,
                            map: map.clone(),
                            log_tree: false,
                            real_time: false,
                            channel_schedule: config.channel_schedule.clone(),
                            variant: Some(variant.variant_id.clone()),
                        },
                    ),
                    Err(e) => RunResult::error(
                        &model.name,
                        Some(variant.variant_id.clone()),
                        config.seed,
                        vec![e.to_string()],
                    ),
                };
                *slots[i].lock().expect("result slot") = Some(result);
            });
        }
    });
    Ok(slots
        .into_iter()
        .map(|slot| slot.into_inner().expect("slot").expect("worker filled slot"))
        .collect())
}

fn csv_value(value: &Value) -> String {
    match value {
        Value::Str(s) => s.clone(),
        Value::Physical(p) => format!("{}", p.magnitude),
        Value::Bool(b) => b.to_string(),
        other => format!("{other:?}"),
    }
}

/// Summary CSV: variant-id, one column per variation axis, verdict, mean
/// localization error (blank when the backend exposed none).
pub fn sweep_summary_csv(model: &ScenarioModel, results: &[RunResult]) -> String {
    let axes = variation_axes(model);
    let variants = enumerate_variations_capped(model, crate::variation::DEFAULT_EXPANSION_CAP)
        .unwrap_or_default();
    let mut header = vec!["variant_id".to_string()];
    for axis in &axes {
        header.push(axis.param.clone());
    }
    header.push("verdict".to_string());
    header.push("mean_localization_error".to_string());
    let mut out = header.join(",") + "\n";
    for (variant, result) in variants.iter().zip(results) {
        let mut row = vec![variant.variant_id.clone()];
        for axis in &axes {
            let value = variant
                .assignment
                .get(&(axis.call_id, axis.param.clone()))
                .map(csv_value)
                .unwrap_or_default();
            row.push(value);
        }
        row.push(result.verdict.as_str().to_string());
        row.push(
            result
                .metrics
                .get("mean_localization_error")
                .map(|e| format!("{e}"))
                .unwrap_or_default(),
        );
        out.push_str(&(row.join(",") + "\n"));
    }
    out
}

fn write_sweep_artifacts(
    model: &ScenarioModel,
    results: &[RunResult],
    out_dir: &Path,
) -> Result<(), Vec<String>> {
    std::fs::create_dir_all(out_dir).map_err(|e| vec![format!("cannot create {}: {e}", out_dir.display())])?;
    std::fs::write(out_dir.join("summary.csv"), sweep_summary_csv(model, results))
        .map_err(|e| vec![format!("cannot write summary.csv: {e}")])?;
    report::write_junit(results, out_dir).map_err(|e| vec![format!("cannot write junit.xml: {e}")])?;
    let results_dir = out_dir.join("results");
    std::fs::create_dir_all(&results_dir)
        .map_err(|e| vec![format!("cannot create {}: {e}", results_dir.display())])?;
    for result in results {
        let name = result.variant.as_deref().unwrap_or(&result.scenario);
        let path = results_dir.join(format!("{name}.json"));
        std::fs::write(
            &path,
            serde_json::to_string_pretty(&report::result_json(result)).expect("serializes") + "\n",
        )
        .map_err(|e| vec![format!("cannot write {}: {e}", path.display())])?;
    }
    Ok(())
}

/// Check-only pipeline: parse, build and report concreteness, no execution.
pub fn check_scenario(path: &Path, library_dirs: &[PathBuf]) -> Result<(ScenarioModel, Concreteness), Vec<String>> {
    let model = load_model(path, library_dirs)?;
    let concreteness = check_concrete(&model);
    Ok((model, concreteness))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexer::tokenize;
    use crate::parser::parse;

    fn model(src: &str) -> ScenarioModel {
        let tokens = tokenize(src, "t.osc").expect("lexes");
        let ast = parse(&tokens).expect("parses");
        build_model(&ast, &BTreeMap::new()).expect("builds").remove(0)
    }

    const LISTING1: &str = "\
import osc.robotics

scenario example_nav:
    robot: differential_drive_robot
    do parallel:
        serial:
            robot.init_localization(pose_3d(position_3d(x: 0.0m, y: 0.0m)))
            robot.nav_to_pose(pose_3d(position_3d(x: 3.0m, y: -3.0m)))
            emit end
        time_out: serial:
            wait elapsed(60s)
            emit fail
";

    #[test]
    fn listing1_runs_to_success_before_timeout() {
        let registry = PluginRegistry::with_builtins();
        let result = run_model(&model(LISTING1), &registry, EngineOptions::default());
        assert_eq!(result.verdict, Verdict::Success, "{:?}", result.diagnostics);
        assert!(result.sim_duration_s < 60.0);
        assert_eq!(result.events.last().map(|(n, _)| n.as_str()), Some("end"));
    }

    #[test]
    fn identical_seeds_reproduce_results() {
        let registry = PluginRegistry::with_builtins();
        let m = model(LISTING1);
        let a = run_model(&m, &registry, EngineOptions::default());
        let b = run_model(&m, &registry, EngineOptions::default());
        assert_eq!(a.verdict, b.verdict);
        assert_eq!(a.sim_duration_s, b.sim_duration_s);
        assert_eq!(a.events, b.events);
        assert_eq!(a.event_log, b.event_log);
        assert_eq!(a.metrics, b.metrics);
    }

    #[test]
    fn non_concrete_model_suggests_variations() {
        let m = model(
            "import osc.standard\n\nscenario s:\n    do serial:\n        set_node_parameter(node_name: 'laserscan_modification', parameter_name: 'gaussian_noise_std_deviation') with:\n            keep(it.parameter_value in ['0.0', '0.1'])\n        emit end\n",
        );
        let registry = PluginRegistry::with_builtins();
        let result = run_model(&m, &registry, EngineOptions::default());
        assert_eq!(result.verdict, Verdict::Error);
        assert!(result.diagnostics[0].contains("variations"));
    }

    #[test]
    fn wall_clock_limit_yields_timeout() {
        let m = model("scenario s:\n    do serial:\n        wait elapsed(100000s)\n        emit end\n");
        let registry = PluginRegistry::with_builtins();
        let result = run_model(
            &m,
            &registry,
            EngineOptions {
                wall_clock_limit: 0.05,
                ..EngineOptions::default()
            },
        );
        assert_eq!(result.verdict, Verdict::Timeout);
    }

    #[test]
    fn recording_gate_waits_for_late_channel() {
        let m = model(
            "import osc.standard\n\nscenario s:\n    do serial:\n        record(channels: ['external/camera'])\n        emit end\n",
        );
        let registry = PluginRegistry::with_builtins();
        let result = run_model(
            &m,
            &registry,
            EngineOptions {
                channel_schedule: vec![(5, "external/camera".to_string())],
                ..EngineOptions::default()
            },
        );
        assert_eq!(result.verdict, Verdict::Success, "{:?}", result.diagnostics);
        assert_eq!(result.metrics["first_tick_step"], 5.0);
    }

    #[test]
    fn recording_gate_without_publisher_is_an_error() {
        let m = model(
            "import osc.standard\n\nscenario s:\n    do serial:\n        record(channels: ['nobody/pub'])\n        emit end\n",
        );
        let registry = PluginRegistry::with_builtins();
        let result = run_model(&m, &registry, EngineOptions::default());
        assert_eq!(result.verdict, Verdict::Error);
        assert!(result.diagnostics[0].contains("no publisher"));
    }

    #[test]
    fn recorded_robot_channels_open_gate_immediately() {
        let m = model(
            "import osc.robotics\nimport osc.standard\n\nscenario s:\n    robot: differential_drive_robot\n    do serial:\n        record(channels: ['robot/scan', 'robot/cmd_vel'])\n        emit end\n",
        );
        let registry = PluginRegistry::with_builtins();
        let result = run_model(&m, &registry, EngineOptions::default());
        assert_eq!(result.verdict, Verdict::Success);
        assert_eq!(result.metrics["first_tick_step"], 0.0);
    }

    #[test]
    fn tree_completion_without_terminal_event_uses_root_status() {
        let m = model(
            "import osc.standard\n\nscenario s:\n    do serial:\n        log(msg: 'quiet run')\n",
        );
        let registry = PluginRegistry::with_builtins();
        let result = run_model(&m, &registry, EngineOptions::default());
        assert_eq!(result.verdict, Verdict::Success);
        assert!(result.events.is_empty());
    }

    #[test]
    fn runtime_fault_without_terminal_event_is_error() {
        let m = model(
            "import osc.standard\n\nscenario s:\n    do serial:\n        set_node_parameter(node_name: 'bogus_node', parameter_name: 'x', parameter_value: '1')\n",
        );
        let registry = PluginRegistry::with_builtins();
        let result = run_model(&m, &registry, EngineOptions::default());
        assert_eq!(result.verdict, Verdict::Error);
        assert!(result.diagnostics[0].contains("unknown node"));
    }

    #[test]
    fn broken_file_reports_error_verdict() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("broken.osc");
        std::fs::write(&path, "scenario s:\n\tdo serial:\n").unwrap();
        let mut config = RunConfig::new(&path);
        config.output_dir = dir.path().join("out");
        let result = run_scenario(&config);
        assert_eq!(result.verdict, Verdict::Error);
        assert!(!result.diagnostics.is_empty());
        assert!(config.output_dir.join("result.json").exists());
    }

    #[test]
    fn log_tree_records_status_transitions() {
        let registry = PluginRegistry::with_builtins();
        let result = run_model(
            &model(LISTING1),
            &registry,
            EngineOptions {
                log_tree: true,
                ..EngineOptions::default()
            },
        );
        let log = result.tree_log.unwrap();
        assert!(log.contains("example_nav [IDLE]"));
        assert!(log.contains("example_nav [RUNNING]"));
        // the run stops on the terminal event, after nav_to_pose succeeded
        assert!(log.contains("nav_to_pose [SUCCESS]"));
    }

    #[test]
    fn sweep_runs_every_variant_in_order() {
        let m = model(
            "import osc.standard\n\nscenario fault_matrix:\n    do serial:\n        set_node_parameter(node_name: 'laserscan_modification', parameter_name: 'gaussian_noise_std_deviation') with:\n            keep(it.parameter_value in ['0.0', '0.1', '0.2'])\n        emit end\n",
        );
        let registry = PluginRegistry::with_builtins();
        let config = RunConfig::new("unused.osc");
        let results = sweep_model(&m, &registry, &config, None, 2).unwrap();
        assert_eq!(results.len(), 3);
        let ids: Vec<&str> = results
            .iter()
            .map(|r| r.variant.as_deref().unwrap())
            .collect();
        assert_eq!(ids, ["fault_matrix.0", "fault_matrix.1", "fault_matrix.2"]);
        assert!(results.iter().all(|r| r.verdict == Verdict::Success));
        let csv = sweep_summary_csv(&m, &results);
        assert!(csv.starts_with("variant_id,parameter_value,verdict,mean_localization_error\n"));
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn exit_codes_follow_contract() {
        let ok = RunResult::error("s", None, 0, vec![]);
        let mut success = ok.clone();
        success.verdict = Verdict::Success;
        let mut failed = ok.clone();
        failed.verdict = Verdict::Fail;
        let mut timed_out = ok.clone();
        timed_out.verdict = Verdict::Timeout;
        assert_eq!(exit_code(&[success.clone()]), 0);
        assert_eq!(exit_code(&[success.clone(), failed.clone()]), 1);
        assert_eq!(exit_code(&[success.clone(), timed_out]), 1);
        assert_eq!(exit_code(&[success, failed, ok]), 2);
        assert_eq!(exit_code(&[]), 0);
    }
}
