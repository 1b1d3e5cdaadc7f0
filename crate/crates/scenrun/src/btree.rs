//! Tick-driven behavior-tree runtime with a blackboard and terminal events.

use std::collections::BTreeMap;
use std::fmt;

use crate::events::EventLogRecord;
use crate::model::Value;
use crate::simworld::WorldState;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeStatus {
    Idle,
    Running,
    Success,
    Failure,
}

impl NodeStatus {
    pub fn is_finished(self) -> bool {
        matches!(self, NodeStatus::Success | NodeStatus::Failure)
    }
}

impl fmt::Display for NodeStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            NodeStatus::Idle => "IDLE",
            NodeStatus::Running => "RUNNING",
            NodeStatus::Success => "SUCCESS",
            NodeStatus::Failure => "FAILURE",
        };
        f.write_str(s)
    }
}

/// Execution fault raised by a leaf behavior; turns the leaf's status into
/// Failure and is recorded on the blackboard.
#[derive(Debug, Clone)]
pub struct BehaviorFault {
    pub message: String,
}

impl BehaviorFault {
    pub fn new(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
        }
    }
}

/// Shared key-value store and event ledger of one run. Keys are namespaced
/// `<scenario>/<key>`.
#[derive(Debug, Default)]
pub struct Blackboard {
    scenario: String,
    entries: BTreeMap<String, Value>,
    events: Vec<(String, f64)>,
    terminal: Option<(String, f64)>,
}

impl Blackboard {
    pub fn new(scenario: &str) -> Self {
        Self {
            scenario: scenario.to_string(),
            ..Default::default()
        }
    }

    fn key(&self, key: &str) -> String {
        format!("{}/{}", self.scenario, key)
    }

    pub fn set(&mut self, key: &str, value: Value) {
        let key = self.key(key);
        self.entries.insert(key, value);
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.entries.get(&self.key(key))
    }

    pub fn events(&self) -> &[(String, f64)] {
        &self.events
    }

    /// First terminal event ("end" or "fail") emitted during the run.
    pub fn terminal_event(&self) -> Option<(&str, f64)> {
        self.terminal.as_ref().map(|(n, t)| (n.as_str(), *t))
    }
}

/// Append an event. "end" and "fail" set the terminal flag the runner polls
/// after each tick; the first terminal event wins.
pub fn emit_event(blackboard: &mut Blackboard, name: &str, sim_time: f64) {
    blackboard.events.push((name.to_string(), sim_time));
    if (name == "end" || name == "fail") && blackboard.terminal.is_none() {
        blackboard.terminal = Some((name.to_string(), sim_time));
    }
}

/// Everything a leaf behavior sees during one step.
pub struct TickContext<'a> {
    pub sim_time: f64,
    pub blackboard: &'a mut Blackboard,
    pub world: &'a mut WorldState,
    pub records: &'a mut Vec<EventLogRecord>,
}

impl TickContext<'_> {
    pub fn record(&mut self, record: EventLogRecord) {
        self.records.push(record);
    }
}

/// A leaf behavior's step function, driven once per tick while Running.
pub trait Behavior {
    fn step(&mut self, ctx: &mut TickContext<'_>) -> Result<NodeStatus, BehaviorFault>;

    /// Re-initialize for a fresh run.
    fn reset(&mut self) {}
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Serial,
    Parallel,
    Leaf,
}

pub struct TreeNode {
    pub id: usize,
    pub name: String,
    pub kind: NodeKind,
    pub children: Vec<TreeNode>,
    behavior: Option<Box<dyn Behavior>>,
    pub status: NodeStatus,
    cursor: usize,
}

impl TreeNode {
    pub fn serial(id: usize, name: impl Into<String>, children: Vec<TreeNode>) -> Self {
        debug_assert!(!children.is_empty(), "composite children must be non-empty");
        Self {
            id,
            name: name.into(),
            kind: NodeKind::Serial,
            children,
            behavior: None,
            status: NodeStatus::Idle,
            cursor: 0,
        }
    }

    pub fn parallel(id: usize, name: impl Into<String>, children: Vec<TreeNode>) -> Self {
        debug_assert!(!children.is_empty(), "composite children must be non-empty");
        Self {
            id,
            name: name.into(),
            kind: NodeKind::Parallel,
            children,
            behavior: None,
            status: NodeStatus::Idle,
            cursor: 0,
        }
    }

    pub fn leaf(id: usize, name: impl Into<String>, behavior: Box<dyn Behavior>) -> Self {
        Self {
            id,
            name: name.into(),
            kind: NodeKind::Leaf,
            children: Vec::new(),
            behavior: Some(behavior),
            status: NodeStatus::Idle,
            cursor: 0,
        }
    }

    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(TreeNode::node_count).sum::<usize>()
    }
}

impl fmt::Debug for TreeNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TreeNode")
            .field("id", &self.id)
            .field("name", &self.name)
            .field("kind", &self.kind)
            .field("status", &self.status)
            .field("children", &self.children)
            .finish()
    }
}

/// Run one tick over the tree.
///
/// Serial composites tick children from their cursor and advance within the
/// same tick on Success (sequence with memory); Parallel composites tick all
/// unfinished children and fail as soon as any child fails. Finished nodes
/// are never re-ticked until reset.
pub fn tick(node: &mut TreeNode, ctx: &mut TickContext<'_>) -> NodeStatus {
    if node.status.is_finished() {
        return node.status;
    }
    let status = match node.kind {
        NodeKind::Serial => loop {
            if node.cursor >= node.children.len() {
                break NodeStatus::Success;
            }
            let child_status = tick(&mut node.children[node.cursor], ctx);
            match child_status {
                NodeStatus::Success => {
                    node.cursor += 1;
                    if node.cursor == node.children.len() {
                        break NodeStatus::Success;
                    }
                }
                NodeStatus::Failure => break NodeStatus::Failure,
                _ => break NodeStatus::Running,
            }
        },
        NodeKind::Parallel => {
            for child in &mut node.children {
                if !child.status.is_finished() {
                    tick(child, ctx);
                }
            }
            if node
                .children
                .iter()
                .any(|c| c.status == NodeStatus::Failure)
            {
                NodeStatus::Failure
            } else if node
                .children
                .iter()
                .all(|c| c.status == NodeStatus::Success)
            {
                NodeStatus::Success
            } else {
                NodeStatus::Running
            }
        }
        NodeKind::Leaf => {
            let behavior = node.behavior.as_mut().expect("leaf carries a behavior");
            match behavior.step(ctx) {
                Ok(NodeStatus::Idle) => NodeStatus::Running,
                Ok(status) => status,
                Err(fault) => {
                    ctx.blackboard.set(
                        &format!("faults/{}", node.name),
                        Value::Str(fault.message.clone()),
                    );
                    ctx.record(
                        EventLogRecord::new(ctx.sim_time, node.name.clone(), "fault")
                            .with("message", fault.message),
                    );
                    NodeStatus::Failure
                }
            }
        }
    };
    node.status = status;
    status
}

/// Return every node to Idle, reset Serial cursors and re-initialize leaf
/// behaviors. Idempotent.
pub fn reset(node: &mut TreeNode) {
    node.status = NodeStatus::Idle;
    node.cursor = 0;
    if let Some(behavior) = node.behavior.as_mut() {
        behavior.reset();
    }
    for child in &mut node.children {
        reset(child);
    }
}

/// Indented one-line-per-node rendering, `name [STATUS]`.
pub fn snapshot(root: &TreeNode) -> String {
    let mut out = String::new();
    write_snapshot(root, 0, &mut out);
    out
}

fn write_snapshot(node: &TreeNode, depth: usize, out: &mut String) {
    out.push_str(&"  ".repeat(depth));
    out.push_str(&format!("{} [{}]\n", node.name, node.status));
    for child in &node.children {
        write_snapshot(child, depth + 1, out);
    }
}


#[cfg(test)]
mod tests {
    use super::test_behaviors::*;
    use super::*;
    use crate::simworld::WorldState;

    fn ctx_parts() -> (Blackboard, WorldState, Vec<EventLogRecord>) {
        (Blackboard::new("t"), WorldState::empty(0), Vec::new())
    }

    fn tick_once(root: &mut TreeNode, t: f64) -> NodeStatus {
        let (mut bb, mut world, mut records) = ctx_parts();
        let mut ctx = TickContext {
            sim_time: t,
            blackboard: &mut bb,
            world: &mut world,
            records: &mut records,
        };
        tick(root, &mut ctx)
    }

    fn leaf(status: NodeStatus) -> TreeNode {
        TreeNode::leaf(0, "leaf", Box::new(Always(status)))
    }

    #[test]
    fn serial_runs_to_completion_in_one_tick() {
        let mut root = TreeNode::serial(
            10,
            "root",
            vec![leaf(NodeStatus::Success), leaf(NodeStatus::Success)],
        );
        assert_eq!(tick_once(&mut root, 0.0), NodeStatus::Success);
    }

    #[test]
    fn parallel_fails_on_one_failing_child() {
        let mut root = TreeNode::parallel(
            10,
            "root",
            vec![leaf(NodeStatus::Running), leaf(NodeStatus::Failure)],
        );
        assert_eq!(tick_once(&mut root, 0.0), NodeStatus::Failure);
    }

    #[test]
    fn serial_memory_resumes_at_cursor() {
        let mut root = TreeNode::serial(
            10,
            "root",
            vec![
                TreeNode::leaf(0, "slow", Box::new(SucceedAfter::new(2))),
                leaf(NodeStatus::Success),
            ],
        );
        assert_eq!(tick_once(&mut root, 0.0), NodeStatus::Running);
        assert_eq!(tick_once(&mut root, 0.1), NodeStatus::Running);
        assert_eq!(tick_once(&mut root, 0.2), NodeStatus::Success);
    }

    #[test]
    fn finished_node_not_reticked() {
        struct Counting(std::rc::Rc<std::cell::Cell<u32>>);
        impl Behavior for Counting {
            fn step(&mut self, _ctx: &mut TickContext<'_>) -> Result<NodeStatus, BehaviorFault> {
                self.0.set(self.0.get() + 1);
                Ok(NodeStatus::Success)
            }
        }
        let count = std::rc::Rc::new(std::cell::Cell::new(0));
        let mut root = TreeNode::parallel(
            10,
            "root",
            vec![
                TreeNode::leaf(0, "counted", Box::new(Counting(count.clone()))),
                TreeNode::leaf(1, "slow", Box::new(SucceedAfter::new(3))),
            ],
        );
        for t in 0..4 {
            tick_once(&mut root, t as f64);
        }
        assert_eq!(count.get(), 1);
        assert_eq!(root.status, NodeStatus::Success);
    }

    #[test]
    fn fault_turns_leaf_into_failure_and_records_on_blackboard() {
        let mut root = TreeNode::leaf(0, "exploder", Box::new(Faulty));
        let (mut bb, mut world, mut records) = ctx_parts();
        let mut ctx = TickContext {
            sim_time: 1.0,
            blackboard: &mut bb,
            world: &mut world,
            records: &mut records,
        };
        assert_eq!(tick(&mut root, &mut ctx), NodeStatus::Failure);
        assert_eq!(
            bb.get("faults/exploder"),
            Some(&Value::Str("boom".to_string()))
        );
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].kind, "fault");
    }

    #[test]
    fn reset_returns_tree_to_idle_and_is_idempotent() {
        let mut root = TreeNode::serial(
            10,
            "root",
            vec![leaf(NodeStatus::Success), leaf(NodeStatus::Success)],
        );
        tick_once(&mut root, 0.0);
        assert_eq!(root.status, NodeStatus::Success);
        reset(&mut root);
        assert_eq!(root.status, NodeStatus::Idle);
        assert!(root.children.iter().all(|c| c.status == NodeStatus::Idle));
        let snap1 = snapshot(&root);
        reset(&mut root);
        assert_eq!(snapshot(&root), snap1);
    }

    #[test]
    fn reset_reproduces_identical_status_trace() {
        let mut root = TreeNode::serial(
            10,
            "root",
            vec![
                TreeNode::leaf(0, "a", Box::new(SucceedAfter::new(1))),
                TreeNode::leaf(1, "b", Box::new(SucceedAfter::new(2))),
            ],
        );
        let mut trace1 = Vec::new();
        for t in 0..5 {
            trace1.push(tick_once(&mut root, t as f64));
        }
        reset(&mut root);
        let mut trace2 = Vec::new();
        for t in 0..5 {
            trace2.push(tick_once(&mut root, t as f64));
        }
        assert_eq!(trace1, trace2);
    }

    #[test]
    fn snapshot_single_idle_leaf() {
        let root = TreeNode::leaf(0, "nav_to_pose", Box::new(Always(NodeStatus::Idle)));
        assert_eq!(snapshot(&root), "nav_to_pose [IDLE]\n");
    }

    #[test]
    fn snapshot_stable_without_ticks() {
        let root = TreeNode::serial(
            10,
            "root",
            vec![leaf(NodeStatus::Success), leaf(NodeStatus::Success)],
        );
        assert_eq!(snapshot(&root), snapshot(&root));
    }

    #[test]
    fn terminal_flag_first_event_wins() {
        let mut bb = Blackboard::new("t");
        emit_event(&mut bb, "end", 4.2);
        emit_event(&mut bb, "fail", 5.0);
        emit_event(&mut bb, "checkpoint", 6.0);
        assert_eq!(bb.terminal_event(), Some(("end", 4.2)));
        assert_eq!(bb.events().len(), 3);
    }

    #[test]
    fn custom_events_are_not_terminal() {
        let mut bb = Blackboard::new("t");
        emit_event(&mut bb, "checkpoint", 1.0);
        assert_eq!(bb.terminal_event(), None);
    }
}
