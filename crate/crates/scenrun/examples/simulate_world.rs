//! Use the simulation backend directly: navigate a differential-drive robot
//! through the maze, spawn a box in its way mid-run, replan around it, and
//! watch the range-only localizer track the ground truth.
//!
//!     cargo run --example simulate_world

use scenrun::simworld::{Pose2D, WorldState, DEFAULT_DT};

fn main() {
    let mut world = WorldState::default_maze(42, DEFAULT_DT);
    world.add_robot("robot");
    world.init_localization("robot").unwrap();
    world
        .set_fault_params("gaussian_noise_std_deviation", 0.05)
        .unwrap();
    world
        .navigate("robot", Pose2D::new(3.0, -3.0, 0.0), 0.3)
        .unwrap();

    let mut spawned = false;
    for step in 0..6000 {
        world.step();
        let (pose, _) = world.robot("robot").unwrap();
        let pose = *pose;

        if !spawned && pose.distance_to(&Pose2D::new(1.5, -1.5, 0.0)) < 0.4 {
            world.spawn_obstacle("box", 2.0, -2.0, 0.2).unwrap();
            spawned = true;
            println!(
                "t={:5.2}  spawned box at (2.0, -2.0), robot at ({:.2}, {:.2})",
                world.clock, pose.x, pose.y
            );
            if world.path_needs_replan("robot") {
                world.replan("robot").unwrap();
                println!("t={:5.2}  replanned around the box", world.clock);
            }
        }

        if step % 100 == 0 {
            let err = world.localization_error("robot").unwrap();
            println!(
                "t={:5.2}  pose ({:+.2}, {:+.2})  localization error {:.3} m",
                world.clock, pose.x, pose.y, err
            );
        }
        if pose.distance_to(&Pose2D::new(3.0, -3.0, 0.0)) < 0.3 {
            println!("t={:5.2}  goal reached", world.clock);
            break;
        }
    }
}
