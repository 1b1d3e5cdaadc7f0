//! Translate a concrete [`ScenarioModel`] into an executable behavior tree.
//!
//! Every action call is looked up in a [`PluginRegistry`]; the plugin's
//! factory turns the call's argument map into a leaf [`Behavior`]. The
//! standard libraries (osc.standard / osc.robotics / osc.sim) are backed by
//! builtin plugins registered by [`PluginRegistry::with_builtins`].

use crate::btree::{emit_event, Behavior, BehaviorFault, NodeStatus, TickContext, TreeNode};
use crate::events::EventLogRecord;
use crate::model::{
    check_concrete, ActionCall, BehaviorSpec, Concreteness, ScenarioModel, StructVal, Value,
};
use crate::simworld::{Pose2D, ROBOT_RADIUS_M};
use crate::units::Dimension;
use std::collections::BTreeMap;

type FactoryFn = Box<dyn Fn(&ActionCall) -> Result<Box<dyn Behavior>, String> + Send + Sync>;

pub struct ActionPlugin {
    /// Qualified action name, e.g. `osc.robotics.nav_to_pose`.
    pub name: String,
    /// Channels the behavior publishes, `{actor}` substituted at compile
    /// time; feeds the recording gate.
    pub declared_channels: Vec<String>,
    factory: FactoryFn,
}

impl ActionPlugin {
    pub fn new(
        name: &str,
        declared_channels: &[&str],
        factory: impl Fn(&ActionCall) -> Result<Box<dyn Behavior>, String> + Send + Sync + 'static,
    ) -> Self {
        ActionPlugin {
            name: name.to_string(),
            declared_channels: declared_channels.iter().map(|c| c.to_string()).collect(),
            factory: Box::new(factory),
        }
    }
}

#[derive(Default)]
pub struct PluginRegistry {
    plugins: BTreeMap<String, ActionPlugin>,
}

impl PluginRegistry {
    pub fn new() -> Self {
        PluginRegistry::default()
    }

    /// Registry with every builtin library action registered.
    pub fn with_builtins() -> Self {
        let mut registry = PluginRegistry::new();
        for plugin in builtin_plugins() {
            registry.register(plugin).expect("builtin names are unique");
        }
        registry
    }

    pub fn register(&mut self, plugin: ActionPlugin) -> Result<(), String> {
        if self.plugins.contains_key(&plugin.name) {
            return Err(format!("plugin '{}' is already registered", plugin.name));
        }
        self.plugins.insert(plugin.name.clone(), plugin);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&ActionPlugin> {
        self.plugins.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.plugins.keys().map(String::as_str)
    }

    /// Load user plugins from a manifest: one `action-name = provider` pair
    /// per line, `#` comments. Providers are in-process factories; `noop`
    /// (succeed immediately, log the invocation) is the one shipped here.
    pub fn load_manifest(&mut self, text: &str) -> Result<(), String> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (name, provider) = line
                .split_once('=')
                .map(|(a, b)| (a.trim().to_string(), b.trim().to_string()))
                .ok_or_else(|| format!("manifest line {}: expected 'action = provider'", lineno + 1))?;
            let plugin = match provider.as_str() {
                "noop" => {
                    let action = name.clone();
                    ActionPlugin::new(&name, &[], move |_call| {
                        Ok(Box::new(Noop {
                            action: action.clone(),
                        }))
                    })
                }
                other => {
                    return Err(format!(
                        "manifest line {}: unknown provider '{other}'",
                        lineno + 1
                    ))
                }
            };
            self.register(plugin)
                .map_err(|e| format!("manifest line {}: {e}", lineno + 1))?;
        }
        Ok(())
    }
}

/// Compiled run unit: the executable tree plus the recording declaration
/// pulled out of any `record` calls.
#[derive(Debug)]
pub struct CompiledScenario {
    pub root: TreeNode,
    /// Channels that must have a publisher before the scenario may start.
    pub recorded_channels: Vec<String>,
    /// Event-log output filename (from `record`, default `events.jsonl`).
    pub event_output: String,
    /// Channels published by the compiled behaviors ({actor} substituted).
    pub published_channels: Vec<String>,
}

struct Compiler<'a> {
    registry: &'a PluginRegistry,
    next_id: usize,
    errors: Vec<String>,
    recorded_channels: Vec<String>,
    event_output: String,
    published_channels: Vec<String>,
}

/// Compile a concrete model against the registry. Returns every problem at
/// once: unregistered actions, factory rejections, non-concrete input.
pub fn compile(
    model: &ScenarioModel,
    registry: &PluginRegistry,
) -> Result<CompiledScenario, Vec<String>> {
    let mut errors = Vec::new();
    if let Concreteness::NotConcrete(open) = check_concrete(model) {
        for (_, param) in open {
            errors.push(format!(
                "model is not concrete: parameter '{param}' is still bound to a value list"
            ));
        }
    }
    let mut compiler = Compiler {
        registry,
        next_id: 0,
        errors,
        recorded_channels: Vec::new(),
        event_output: "events.jsonl".to_string(),
        published_channels: Vec::new(),
    };
    // the root node, named after the scenario, wraps the `do` composition
    let root_id = compiler.id();
    let body = compiler.node(&model.behavior);
    if !compiler.errors.is_empty() {
        return Err(compiler.errors);
    }
    let root = TreeNode::serial(
        root_id,
        model.name.clone(),
        vec![body.expect("no errors implies a tree")],
    );
    Ok(CompiledScenario {
        root,
        recorded_channels: compiler.recorded_channels,
        event_output: compiler.event_output,
        published_channels: compiler.published_channels,
    })
}

impl Compiler<'_> {
    fn id(&mut self) -> usize {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    fn node(&mut self, spec: &BehaviorSpec) -> Option<TreeNode> {
        let id = self.id();
        match spec {
            BehaviorSpec::Serial { label, children } | BehaviorSpec::Parallel { label, children } => {
                let serial = matches!(spec, BehaviorSpec::Serial { .. });
                let default = if serial { "serial" } else { "parallel" };
                let name = label.clone().unwrap_or_else(|| default.to_string());
                let compiled: Vec<TreeNode> = children
                    .iter()
                    .filter_map(|c| self.node(c))
                    .collect();
                if compiled.len() != children.len() {
                    return None; // children reported their own errors
                }
                Some(if serial {
                    TreeNode::serial(id, name, compiled)
                } else {
                    TreeNode::parallel(id, name, compiled)
                })
            }
            BehaviorSpec::Wait { label, duration } => {
                if duration.dimension != Dimension::Time {
                    self.errors
                        .push("wait duration must be a time value".to_string());
                    return None;
                }
                if duration.magnitude < 0.0 {
                    self.errors
                        .push(format!("negative wait duration {}s", duration.magnitude));
                    return None;
                }
                let name = label.clone().unwrap_or_else(|| "wait".to_string());
                Some(TreeNode::leaf(
                    id,
                    name,
                    Box::new(WaitElapsed {
                        duration: duration.magnitude,
                        start: None,
                    }),
                ))
            }
            BehaviorSpec::Emit { label, event } => {
                let name = label.clone().unwrap_or_else(|| "emit".to_string());
                Some(TreeNode::leaf(
                    id,
                    name,
                    Box::new(Emit {
                        event: event.clone(),
                    }),
                ))
            }
            BehaviorSpec::ActionCall(call) => {
                let plugin = match self.registry.get(&call.action.name) {
                    Some(p) => p,
                    None => {
                        let known: Vec<&str> = self.registry.names().collect();
                        self.errors.push(format!(
                            "no plugin registered for action '{}'; registered actions: {}",
                            call.action.name,
                            known.join(", ")
                        ));
                        return None;
                    }
                };
                if call.action.name == "osc.standard.record" {
                    match (channel_list(call), arg_str(call, "output")) {
                        (Ok(channels), Ok(output)) => {
                            self.recorded_channels.extend(channels);
                            self.event_output = output;
                        }
                        (Err(e), _) | (_, Err(e)) => {
                            self.errors.push(format!("record: {e}"));
                            return None;
                        }
                    }
                }
                for template in &plugin.declared_channels {
                    let channel = match &call.actor {
                        Some(actor) => template.replace("{actor}", actor),
                        None => template.clone(),
                    };
                    if !self.published_channels.contains(&channel) {
                        self.published_channels.push(channel);
                    }
                }
                let behavior = match (plugin.factory)(call) {
                    Ok(b) => b,
                    Err(e) => {
                        self.errors
                            .push(format!("{}: {e}", call.action.short_name()));
                        return None;
                    }
                };
                let name = call
                    .label
                    .clone()
                    .unwrap_or_else(|| call.action.short_name().to_string());
                Some(TreeNode::leaf(id, name, behavior))
            }
        }
    }
}

// ---- argument extraction -------------------------------------------------

fn arg<'a>(call: &'a ActionCall, name: &str) -> Result<&'a Value, String> {
    call.args
        .get(name)
        .ok_or_else(|| format!("missing argument '{name}'"))
}

fn arg_str(call: &ActionCall, name: &str) -> Result<String, String> {
    arg(call, name)?
        .as_str()
        .map(str::to_string)
        .ok_or_else(|| format!("argument '{name}' must be a string"))
}

fn arg_number(call: &ActionCall, name: &str) -> Result<f64, String> {
    arg(call, name)?
        .as_physical()
        .map(|p| p.magnitude)
        .ok_or_else(|| format!("argument '{name}' must be numeric"))
}

fn actor_of(call: &ActionCall) -> Result<String, String> {
    call.actor
        .clone()
        .ok_or_else(|| "action must be called on an actor".to_string())
}

fn channel_list(call: &ActionCall) -> Result<Vec<String>, String> {
    match arg(call, "channels")? {
        Value::List(items) => items
            .iter()
            .map(|v| {
                v.as_str()
                    .map(str::to_string)
                    .ok_or_else(|| "channel names must be strings".to_string())
            })
            .collect(),
        _ => Err("argument 'channels' must be a string list".to_string()),
    }
}

fn point_of(sv: &StructVal) -> (f64, f64) {
    let get = |name: &str| {
        sv.field(name)
            .and_then(Value::as_physical)
            .map(|p| p.magnitude)
            .unwrap_or(0.0)
    };
    (get("x"), get("y"))
}

/// Project a `pose_3d` (or bare `position_3d`) value onto the plane.
fn arg_pose(call: &ActionCall, name: &str) -> Result<Pose2D, String> {
    let sv = arg(call, name)?
        .as_struct()
        .ok_or_else(|| format!("argument '{name}' must be a pose"))?;
    match sv.type_name.as_str() {
        "pose_3d" => {
            let (x, y) = sv
                .field("position")
                .and_then(Value::as_struct)
                .map(point_of)
                .unwrap_or((0.0, 0.0));
            let yaw = sv
                .field("orientation")
                .and_then(Value::as_struct)
                .and_then(|o| o.field("yaw"))
                .and_then(Value::as_physical)
                .map(|p| p.magnitude)
                .unwrap_or(0.0);
            Ok(Pose2D::new(x, y, yaw))
        }
        "position_3d" => {
            let (x, y) = point_of(sv);
            Ok(Pose2D::new(x, y, 0.0))
        }
        other => Err(format!("argument '{name}': expected a pose, got '{other}'")),
    }
}

fn arg_point(call: &ActionCall, name: &str) -> Result<(f64, f64), String> {
    let pose = arg_pose(call, name)?;
    Ok((pose.x, pose.y))
}

// ---- builtin behaviors ---------------------------------------------------

struct WaitElapsed {
    duration: f64,
    start: Option<f64>,
}

impl Behavior for WaitElapsed {
    fn step(&mut self, ctx: &mut TickContext<'_>) -> Result<NodeStatus, BehaviorFault> {
        let start = *self.start.get_or_insert(ctx.sim_time);
        if ctx.sim_time - start >= self.duration - 1e-12 {
            Ok(NodeStatus::Success)
        } else {
            Ok(NodeStatus::Running)
        }
    }

    fn reset(&mut self) {
        self.start = None;
    }
}

struct Emit {
    event: String,
}

impl Behavior for Emit {
    fn step(&mut self, ctx: &mut TickContext<'_>) -> Result<NodeStatus, BehaviorFault> {
        emit_event(ctx.blackboard, &self.event, ctx.sim_time);
        let record = EventLogRecord::new(ctx.sim_time, "scenario", "event")
            .with("name", self.event.clone());
        ctx.record(record);
        Ok(NodeStatus::Success)
    }
}

struct Log {
    msg: String,
}

impl Behavior for Log {
    fn step(&mut self, ctx: &mut TickContext<'_>) -> Result<NodeStatus, BehaviorFault> {
        let record =
            EventLogRecord::new(ctx.sim_time, "scenario", "log").with("msg", self.msg.clone());
        ctx.record(record);
        Ok(NodeStatus::Success)
    }
}

/// The gate itself is enforced by the runner before the first tick; at
/// runtime the record action just marks the log as started.
struct Record {
    channels: Vec<String>,
}

impl Behavior for Record {
    fn step(&mut self, ctx: &mut TickContext<'_>) -> Result<NodeStatus, BehaviorFault> {
        let record = EventLogRecord::new(ctx.sim_time, "scenario", "record_started")
            .with("channels", self.channels.clone());
        ctx.record(record);
        Ok(NodeStatus::Success)
    }
}

struct Noop {
    action: String,
}

impl Behavior for Noop {
    fn step(&mut self, ctx: &mut TickContext<'_>) -> Result<NodeStatus, BehaviorFault> {
        let record = EventLogRecord::new(ctx.sim_time, "plugin", "invoked")
            .with("action", self.action.clone());
        ctx.record(record);
        Ok(NodeStatus::Success)
    }
}

/// Names accepted by set_node_parameter; the fault-injection node is the
/// only parameterizable backend node.
const KNOWN_NODES: &[&str] = &["laserscan_modification"];

struct SetNodeParameter {
    node_name: String,
    parameter_name: String,
    parameter_value: String,
}

impl Behavior for SetNodeParameter {
    fn step(&mut self, ctx: &mut TickContext<'_>) -> Result<NodeStatus, BehaviorFault> {
        if !KNOWN_NODES.contains(&self.node_name.as_str()) {
            return Err(BehaviorFault::new(format!(
                "unknown node '{}'",
                self.node_name
            )));
        }
        let value: f64 = self
            .parameter_value
            .parse()
            .map_err(|_| BehaviorFault::new(format!("value '{}' is not a number", self.parameter_value)))?;
        ctx.world
            .set_fault_params(&self.parameter_name, value)
            .map_err(BehaviorFault::new)?;
        let record = EventLogRecord::new(ctx.sim_time, self.node_name.clone(), "parameter_set")
            .with("name", self.parameter_name.clone())
            .with("value", value);
        ctx.record(record);
        Ok(NodeStatus::Success)
    }
}

struct InitLocalization {
    actor: String,
    initial_pose: Pose2D,
}

impl Behavior for InitLocalization {
    fn step(&mut self, ctx: &mut TickContext<'_>) -> Result<NodeStatus, BehaviorFault> {
        ctx.world
            .seed_localization(&self.actor, self.initial_pose)
            .map_err(BehaviorFault::new)?;
        Ok(NodeStatus::Success)
    }
}

struct NavToPose {
    actor: String,
    goal: Pose2D,
    tolerance: f64,
    started: bool,
}

impl Behavior for NavToPose {
    fn step(&mut self, ctx: &mut TickContext<'_>) -> Result<NodeStatus, BehaviorFault> {
        let pose = ctx
            .world
            .pose_in_frame(&self.actor, "ground_truth")
            .ok_or_else(|| BehaviorFault::new(format!("unknown robot '{}'", self.actor)))?;
        if pose.distance_to(&self.goal) <= self.tolerance {
            ctx.world.set_idle(&self.actor).map_err(BehaviorFault::new)?;
            let record = EventLogRecord::new(ctx.sim_time, self.actor.clone(), "goal_reached")
                .with("x", pose.x)
                .with("y", pose.y);
            ctx.record(record);
            return Ok(NodeStatus::Success);
        }
        if !self.started {
            ctx.world
                .navigate(&self.actor, self.goal, self.tolerance)
                .map_err(BehaviorFault::new)?;
            self.started = true;
            let record = EventLogRecord::new(ctx.sim_time, self.actor.clone(), "nav_goal")
                .with("x", self.goal.x)
                .with("y", self.goal.y);
            ctx.record(record);
        } else if ctx.world.path_needs_replan(&self.actor) {
            ctx.world.replan(&self.actor).map_err(BehaviorFault::new)?;
            ctx.record(EventLogRecord::new(
                ctx.sim_time,
                self.actor.clone(),
                "replan",
            ));
        }
        Ok(NodeStatus::Running)
    }

    fn reset(&mut self) {
        self.started = false;
    }
}

struct TfCloseTo {
    actor: String,
    reference: (f64, f64),
    threshold: f64,
    frame: String,
}

impl Behavior for TfCloseTo {
    fn step(&mut self, ctx: &mut TickContext<'_>) -> Result<NodeStatus, BehaviorFault> {
        let pose = ctx
            .world
            .pose_in_frame(&self.actor, &self.frame)
            .ok_or_else(|| BehaviorFault::new(format!("unknown robot '{}'", self.actor)))?;
        let dist = (pose.x - self.reference.0).hypot(pose.y - self.reference.1);
        if dist <= self.threshold {
            let record = EventLogRecord::new(ctx.sim_time, self.actor.clone(), "tf_close_to")
                .with("x", pose.x)
                .with("y", pose.y)
                .with("frame", self.frame.clone());
            ctx.record(record);
            Ok(NodeStatus::Success)
        } else {
            Ok(NodeStatus::Running)
        }
    }
}

struct SetVelocity {
    actor: String,
    linear: f64,
    angular: f64,
}

impl Behavior for SetVelocity {
    fn step(&mut self, ctx: &mut TickContext<'_>) -> Result<NodeStatus, BehaviorFault> {
        ctx.world
            .set_velocity(&self.actor, self.linear, self.angular)
            .map_err(BehaviorFault::new)?;
        Ok(NodeStatus::Success)
    }
}

struct SetPose {
    actor: String,
    pose: Pose2D,
}

impl Behavior for SetPose {
    fn step(&mut self, ctx: &mut TickContext<'_>) -> Result<NodeStatus, BehaviorFault> {
        ctx.world
            .set_pose(&self.actor, self.pose)
            .map_err(BehaviorFault::new)?;
        Ok(NodeStatus::Success)
    }
}

struct Spawn {
    entity: String,
    pose: Pose2D,
    half_extent: f64,
}

impl Behavior for Spawn {
    fn step(&mut self, ctx: &mut TickContext<'_>) -> Result<NodeStatus, BehaviorFault> {
        ctx.world
            .spawn_obstacle(&self.entity, self.pose.x, self.pose.y, self.half_extent)
            .map_err(BehaviorFault::new)?;
        let record = EventLogRecord::new(ctx.sim_time, self.entity.clone(), "spawned")
            .with("x", self.pose.x)
            .with("y", self.pose.y);
        ctx.record(record);
        Ok(NodeStatus::Success)
    }
}

/// `pkg://models/box.sdf` → catalog half-extent. Only the basename selects.
fn shape_from_model_uri(uri: &str) -> Result<f64, String> {
    let path = uri
        .split_once("://")
        .map(|(_, rest)| rest)
        .ok_or_else(|| format!("model '{uri}' is not a <pkg>://models/<name> URI"))?;
    let basename = path
        .rsplit('/')
        .next()
        .unwrap_or("")
        .trim_end_matches(".sdf");
    match basename {
        // 0.4 m box → 0.2 m half extent
        "box" => Ok(ROBOT_RADIUS_M),
        other => Err(format!("unknown model '{other}' (catalog: box)")),
    }
}

fn builtin_plugins() -> Vec<ActionPlugin> {
    vec![
        ActionPlugin::new("osc.standard.log", &[], |call| {
            Ok(Box::new(Log {
                msg: arg_str(call, "msg")?,
            }))
        }),
        ActionPlugin::new("osc.standard.record", &[], |call| {
            Ok(Box::new(Record {
                channels: channel_list(call)?,
            }))
        }),
        ActionPlugin::new("osc.standard.set_node_parameter", &[], |call| {
            Ok(Box::new(SetNodeParameter {
                node_name: arg_str(call, "node_name")?,
                parameter_name: arg_str(call, "parameter_name")?,
                parameter_value: arg_str(call, "parameter_value")?,
            }))
        }),
        ActionPlugin::new(
            "osc.robotics.init_localization",
            &["{actor}/estimated"],
            |call| {
                Ok(Box::new(InitLocalization {
                    actor: actor_of(call)?,
                    initial_pose: arg_pose(call, "initial_pose")?,
                }))
            },
        ),
        ActionPlugin::new("osc.robotics.init_nav2", &["{actor}/estimated"], |call| {
            Ok(Box::new(InitLocalization {
                actor: actor_of(call)?,
                initial_pose: arg_pose(call, "initial_pose")?,
            }))
        }),
        ActionPlugin::new("osc.robotics.nav_to_pose", &["{actor}/cmd_vel"], |call| {
            let tolerance = arg_number(call, "tolerance")?;
            if tolerance <= 0.0 {
                return Err(format!("tolerance must be positive, got {tolerance}"));
            }
            Ok(Box::new(NavToPose {
                actor: actor_of(call)?,
                goal: arg_pose(call, "goal")?,
                tolerance,
                started: false,
            }))
        }),
        ActionPlugin::new("osc.robotics.tf_close_to", &[], |call| {
            let threshold = arg_number(call, "threshold")?;
            if threshold <= 0.0 {
                return Err(format!("threshold must be positive, got {threshold}"));
            }
            let frame = arg_str(call, "frame")?;
            if frame != "ground_truth" && frame != "estimated" {
                return Err(format!(
                    "unknown frame '{frame}' (expected 'ground_truth' or 'estimated')"
                ));
            }
            Ok(Box::new(TfCloseTo {
                actor: actor_of(call)?,
                reference: arg_point(call, "reference_point")?,
                threshold,
                frame,
            }))
        }),
        ActionPlugin::new("osc.robotics.set_velocity", &["{actor}/cmd_vel"], |call| {
            Ok(Box::new(SetVelocity {
                actor: actor_of(call)?,
                linear: arg_number(call, "linear")?,
                angular: arg_number(call, "angular")?,
            }))
        }),
        ActionPlugin::new("osc.robotics.set_pose", &["{actor}/ground_truth"], |call| {
            Ok(Box::new(SetPose {
                actor: actor_of(call)?,
                pose: arg_pose(call, "pose")?,
            }))
        }),
        ActionPlugin::new("osc.sim.spawn", &[], |call| {
            Ok(Box::new(Spawn {
                entity: actor_of(call)?,
                pose: arg_pose(call, "spawn_pose")?,
                half_extent: shape_from_model_uri(&arg_str(call, "model")?)?,
            }))
        }),
    ]
}
