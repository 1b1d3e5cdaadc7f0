//! Drive a hand-built behavior tree tick by tick and print the status
//! snapshot after each tick. Serial children advance within a tick; parallel
//! children run side by side and finished nodes are never re-ticked.
//!
//!     cargo run --example tick_behavior_tree

use scenrun::btree::{
    emit_event, snapshot, tick, Behavior, BehaviorFault, Blackboard, NodeStatus, TickContext,
    TreeNode,
};
use scenrun::simworld::WorldState;

/// Succeeds after a fixed number of ticks.
struct CountDown(u32);

impl Behavior for CountDown {
    fn step(&mut self, _ctx: &mut TickContext<'_>) -> Result<NodeStatus, BehaviorFault> {
        if self.0 == 0 {
            return Ok(NodeStatus::Success);
        }
        self.0 -= 1;
        Ok(NodeStatus::Running)
    }
}

/// Emits the terminal "end" event.
struct EmitEnd;

impl Behavior for EmitEnd {
    fn step(&mut self, ctx: &mut TickContext<'_>) -> Result<NodeStatus, BehaviorFault> {
        emit_event(ctx.blackboard, "end", ctx.sim_time);
        Ok(NodeStatus::Success)
    }
}

fn main() {
    let mut root = TreeNode::parallel(
        0,
        "demo",
        vec![
            TreeNode::serial(
                1,
                "mission",
                vec![
                    TreeNode::leaf(2, "warm_up", Box::new(CountDown(2))),
                    TreeNode::leaf(3, "work", Box::new(CountDown(3))),
                    TreeNode::leaf(4, "emit end", Box::new(EmitEnd)),
                ],
            ),
            TreeNode::leaf(5, "watchdog", Box::new(CountDown(100))),
        ],
    );

    let mut world = WorldState::empty(0);
    let mut blackboard = Blackboard::new("demo");
    let mut records = Vec::new();
    for step in 0u32.. {
        let mut ctx = TickContext {
            sim_time: f64::from(step) * 0.02,
            blackboard: &mut blackboard,
            world: &mut world,
            records: &mut records,
        };
        tick(&mut root, &mut ctx);
        println!("--- tick {step} ---\n{}", snapshot(&root));
        if let Some((name, t)) = blackboard.terminal_event() {
            println!("terminal event '{name}' at t={t:.2}");
            break;
        }
    }
}
