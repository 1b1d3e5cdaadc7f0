//! Deterministic 2D kinematic simulation backend.
//!
//! Differential-drive robots on a bounded occupancy map, static square
//! obstacles, a range-only landmark sensor with injectable faults
//! (gaussian noise, random drops) and a Gauss-Newton localizer. Everything
//! is driven by one seeded generator, split into per-robot streams, so a
//! run is a pure function of (scenario, map, seed, dt).

pub mod localizer;
pub mod map;
pub mod planner;
pub mod rng;

use localizer::RangeMeasurement;
use map::{GridMap, Occupancy};
use planner::PlanError;
use rng::{hash_name, mix_seed, SplitMix64};
use std::collections::{BTreeMap, BTreeSet};

pub const ROBOT_RADIUS_M: f64 = 0.2;
pub const MAX_SPEED: f64 = 0.5; // m/s
pub const MAX_TURN: f64 = 1.5; // rad/s
pub const DEFAULT_DT: f64 = 0.02;
/// Dead-reckoning odometry error, as a fraction of the per-step translation.
/// Large enough that extended sensor outages visibly degrade the estimate.
const ODOMETRY_NOISE_FRAC: f64 = 2.5;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Pose2D {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose2D {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Pose2D {
            x,
            y,
            theta: normalize_angle(theta),
        }
    }

    pub fn distance_to(&self, other: &Pose2D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Normalize to (−π, π].
pub fn normalize_angle(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(std::f64::consts::TAU);
    if t > std::f64::consts::PI {
        t -= std::f64::consts::TAU;
    }
    t
}

#[derive(Debug, Clone)]
pub enum ControlMode {
    Idle,
    Velocity { v: f64, omega: f64 },
    Navigate {
        goal: Pose2D,
        tolerance: f64,
        path: Vec<(f64, f64)>,
        waypoint: usize,
    },
}

#[derive(Debug, Clone)]
pub struct RobotController {
    pub mode: ControlMode,
    pub estimate: Pose2D,
    /// Set by init_localization; the sensor/localizer loop only runs after.
    pub localized: bool,
    /// Last Gauss-Newton attempt diverged (estimate fell back to prediction).
    pub diverged: bool,
    rng: SplitMix64,
}

#[derive(Debug, Clone)]
pub enum EntityKind {
    Robot(RobotController),
    Obstacle { half_extent: f64 },
}

#[derive(Debug, Clone)]
pub struct Entity {
    pub pose: Pose2D,
    pub kind: EntityKind,
}

impl Entity {
    pub fn controller(&self) -> Option<&RobotController> {
        match &self.kind {
            EntityKind::Robot(c) => Some(c),
            EntityKind::Obstacle { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FaultParams {
    /// gaussian_noise_std_deviation, meters
    pub sigma: f64,
    /// random_drop_percentage, fraction in [0, 1]
    pub drop: f64,
}

/// One sensor sweep: per-landmark range, `None` where the detection was
/// dropped, in the map's landmark order.
#[derive(Debug, Clone)]
pub struct SensorReading {
    pub ranges: Vec<Option<f64>>,
    pub timestamp: f64,
}

#[derive(Debug)]
pub struct WorldState {
    pub map: GridMap,
    pub entities: BTreeMap<String, Entity>,
    pub clock: f64,
    pub dt: f64,
    pub fault: FaultParams,
    pub seed: u64,
    pub step_count: u64,
    channels: BTreeSet<String>,
    /// Channels whose publisher comes up late: (step at which it appears, name).
    pub channel_schedule: Vec<(u64, String)>,
}

impl WorldState {
    pub fn new(map: GridMap, seed: u64, dt: f64) -> Self {
        assert!(dt > 0.0, "dt must be positive");
        WorldState {
            map,
            entities: BTreeMap::new(),
            clock: 0.0,
            dt,
            fault: FaultParams { sigma: 0.0, drop: 0.0 },
            seed,
            step_count: 0,
            channels: BTreeSet::new(),
            channel_schedule: Vec::new(),
        }
    }

    /// A bare 8x8 m open world, handy for tests.
    pub fn empty(seed: u64) -> Self {
        WorldState::new(GridMap::open(8.0), seed, DEFAULT_DT)
    }

    pub fn default_maze(seed: u64, dt: f64) -> Self {
        WorldState::new(
            GridMap::parse(map::DEFAULT_MAP).expect("bundled map is valid"),
            seed,
            dt,
        )
    }

    /// Add a robot at the origin. Its sensor/odometry stream is derived
    /// from the world seed and the robot name.
    pub fn add_robot(&mut self, name: &str) {
        let rng = SplitMix64::new(mix_seed(self.seed, hash_name(name)));
        self.entities.insert(
            name.to_string(),
            Entity {
                pose: Pose2D::default(),
                kind: EntityKind::Robot(RobotController {
                    mode: ControlMode::Idle,
                    estimate: Pose2D::default(),
                    localized: false,
                    diverged: false,
                    rng,
                }),
            },
        );
        for topic in ["ground_truth", "estimated", "scan", "cmd_vel"] {
            self.channels.insert(format!("{name}/{topic}"));
        }
    }

    /// Place a static square obstacle. Fails on a duplicate name or when
    /// another obstacle already sits at (effectively) the same center.
    pub fn spawn_obstacle(
        &mut self,
        name: &str,
        x: f64,
        y: f64,
        half_extent: f64,
    ) -> Result<(), String> {
        if self.entities.contains_key(name) {
            return Err(format!("entity '{name}' already exists"));
        }
        for (other, entity) in &self.entities {
            if let EntityKind::Obstacle { .. } = entity.kind {
                if (entity.pose.x - x).hypot(entity.pose.y - y) < 0.01 {
                    return Err(format!("obstacle '{other}' already occupies ({x}, {y})"));
                }
            }
        }
        self.entities.insert(
            name.to_string(),
            Entity {
                pose: Pose2D::new(x, y, 0.0),
                kind: EntityKind::Obstacle { half_extent },
            },
        );
        Ok(())
    }

    pub fn set_pose(&mut self, name: &str, pose: Pose2D) -> Result<(), String> {
        let entity = self
            .entities
            .get_mut(name)
            .ok_or_else(|| format!("unknown entity '{name}'"))?;
        entity.pose = pose;
        if let EntityKind::Robot(c) = &mut entity.kind {
            c.estimate = pose;
        }
        Ok(())
    }

    pub fn robot(&self, name: &str) -> Option<(&Pose2D, &RobotController)> {
        self.entities.get(name).and_then(|e| match &e.kind {
            EntityKind::Robot(c) => Some((&e.pose, c)),
            _ => None,
        })
    }

    fn robot_mut(&mut self, name: &str) -> Result<(&mut Pose2D, &mut RobotController), String> {
        match self.entities.get_mut(name) {
            Some(Entity {
                pose,
                kind: EntityKind::Robot(c),
            }) => Ok((pose, c)),
            Some(_) => Err(format!("'{name}' is not a robot")),
            None => Err(format!("unknown robot '{name}'")),
        }
    }

    pub fn init_localization(&mut self, name: &str) -> Result<(), String> {
        let (pose, controller) = self.robot_mut(name)?;
        controller.estimate = *pose;
        controller.localized = true;
        Ok(())
    }

    /// Seed the localizer with an externally supplied initial pose; seeding
    /// twice re-seeds.
    pub fn seed_localization(&mut self, name: &str, pose: Pose2D) -> Result<(), String> {
        let (_, controller) = self.robot_mut(name)?;
        controller.estimate = pose;
        controller.localized = true;
        controller.diverged = false;
        Ok(())
    }

    pub fn set_velocity(&mut self, name: &str, v: f64, omega: f64) -> Result<(), String> {
        let (_, controller) = self.robot_mut(name)?;
        controller.mode = ControlMode::Velocity {
            v: v.clamp(-MAX_SPEED, MAX_SPEED),
            omega: omega.clamp(-MAX_TURN, MAX_TURN),
        };
        Ok(())
    }

    pub fn set_idle(&mut self, name: &str) -> Result<(), String> {
        let (_, controller) = self.robot_mut(name)?;
        controller.mode = ControlMode::Idle;
        Ok(())
    }

    /// Plan from the robot's current pose and switch it to navigation mode.
    pub fn navigate(&mut self, name: &str, goal: Pose2D, tolerance: f64) -> Result<(), String> {
        let from = self
            .robot(name)
            .ok_or_else(|| format!("unknown robot '{name}'"))?
            .0
            .to_owned();
        let path = self
            .plan_path((from.x, from.y), (goal.x, goal.y))
            .map_err(|e| format!("navigation for '{name}': {e}"))?;
        let (_, controller) = self.robot_mut(name)?;
        controller.mode = ControlMode::Navigate {
            goal,
            tolerance,
            path,
            waypoint: 1, // waypoint 0 is the start pose
        };
        Ok(())
    }

    /// Re-plan the remaining route of a navigating robot (after a new
    /// obstacle appeared). No-op for robots not in navigation mode.
    pub fn replan(&mut self, name: &str) -> Result<(), String> {
        let (from, goal, tolerance) = match self.robot(name) {
            Some((pose, controller)) => match &controller.mode {
                ControlMode::Navigate { goal, tolerance, .. } => (*pose, *goal, *tolerance),
                _ => return Ok(()),
            },
            None => return Err(format!("unknown robot '{name}'")),
        };
        let path = self
            .plan_path((from.x, from.y), (goal.x, goal.y))
            .map_err(|e| format!("replanning for '{name}': {e}"))?;
        let (_, controller) = self.robot_mut(name)?;
        controller.mode = ControlMode::Navigate {
            goal,
            tolerance,
            path,
            waypoint: 1,
        };
        Ok(())
    }

    /// True when a navigating robot's remaining path crosses an obstacle
    /// that was not there when it planned.
    pub fn path_needs_replan(&self, name: &str) -> bool {
        let Some((_, controller)) = self.robot(name) else {
            return false;
        };
        let ControlMode::Navigate { path, waypoint, .. } = &controller.mode else {
            return false;
        };
        let remaining = &path[(*waypoint).saturating_sub(1).min(path.len())..];
        planner::path_blocked(&self.occupancy(), remaining)
    }

    pub fn obstacles(&self) -> Vec<(f64, f64, f64)> {
        self.entities
            .values()
            .filter_map(|e| match e.kind {
                EntityKind::Obstacle { half_extent } => {
                    Some((e.pose.x, e.pose.y, half_extent))
                }
                _ => None,
            })
            .collect()
    }

    pub fn occupancy(&self) -> Occupancy {
        self.map.occupancy_with(&self.obstacles())
    }

    pub fn plan_path(
        &self,
        from: (f64, f64),
        to: (f64, f64),
    ) -> Result<Vec<(f64, f64)>, PlanError> {
        planner::plan(&self.occupancy(), from, to)
    }

    pub fn set_fault_params(&mut self, name: &str, value: f64) -> Result<(), String> {
        match name {
            "gaussian_noise_std_deviation" => {
                self.fault.sigma = value.max(0.0);
                Ok(())
            }
            "random_drop_percentage" => {
                self.fault.drop = value.clamp(0.0, 1.0);
                Ok(())
            }
            other => Err(format!("unknown fault parameter '{other}'")),
        }
    }

    /// Planar distance between the localizer's estimate and ground truth.
    pub fn localization_error(&self, name: &str) -> Option<f64> {
        let (pose, controller) = self.robot(name)?;
        Some(pose.distance_to(&controller.estimate))
    }

    pub fn pose_in_frame(&self, name: &str, frame: &str) -> Option<Pose2D> {
        let (pose, controller) = self.robot(name)?;
        match frame {
            "ground_truth" => Some(*pose),
            "estimated" => Some(controller.estimate),
            _ => None,
        }
    }

    pub fn register_channel(&mut self, channel: &str) {
        self.channels.insert(channel.to_string());
    }

    pub fn has_channel(&self, channel: &str) -> bool {
        self.channels.contains(channel)
    }

    /// Bring up any scheduled channels whose step has arrived. Called by the
    /// runner while the recording gate holds the clock at zero.
    pub fn apply_channel_schedule(&mut self, step: u64) {
        let mut i = 0;
        while i < self.channel_schedule.len() {
            if self.channel_schedule[i].0 <= step {
                let (_, name) = self.channel_schedule.remove(i);
                self.channels.insert(name);
            } else {
                i += 1;
            }
        }
    }

    /// One fixed-dt integration step: apply controls, move robots (with
    /// obstacle blocking), then run each localizing robot's sensor and
    /// estimator update.
    pub fn step(&mut self) {
        let names: Vec<String> = self
            .entities
            .iter()
            .filter(|(_, e)| matches!(e.kind, EntityKind::Robot(_)))
            .map(|(n, _)| n.clone())
            .collect();
        let occ = self.occupancy();
        for name in &names {
            let dt = self.dt;
            let (pose, controller) = self.robot_mut(name).expect("robot listed above");
            let (v, omega) = command_for(&pose.clone(), &mut controller.mode);
            let v = v.clamp(-MAX_SPEED, MAX_SPEED);
            let omega = omega.clamp(-MAX_TURN, MAX_TURN);
            let old = *pose;
            let nx = pose.x + v * pose.theta.cos() * dt;
            let ny = pose.y + v * pose.theta.sin() * dt;
            let blocked = Self::position_blocked(&occ, nx, ny);
            if !blocked {
                pose.x = nx;
                pose.y = ny;
            }
            pose.theta = normalize_angle(pose.theta + omega * dt);
            debug_assert!(
                !Self::position_blocked(&occ, pose.x, pose.y)
                    || Self::position_blocked(&occ, old.x, old.y),
                "robot '{name}' tunneled into an obstacle"
            );
            let moved = Pose2D {
                x: pose.x - old.x,
                y: pose.y - old.y,
                theta: normalize_angle(pose.theta - old.theta),
            };
            if controller.localized {
                self.localize_robot(name, moved);
            }
        }
        self.clock += self.dt;
        self.step_count += 1;
    }

    fn position_blocked(occ: &Occupancy, x: f64, y: f64) -> bool {
        match occ.cell_of(x, y) {
            Some((ix, iy)) => occ.occupied(ix as isize, iy as isize),
            None => true,
        }
    }

    /// One sensor sweep for a robot: per landmark, the detection is dropped
    /// with probability p, otherwise the true distance plus N(0, σ²) noise,
    /// clamped at zero. Draw order is fixed (one uniform and one gaussian
    /// per landmark) so the stream position depends only on the step count.
    pub fn read_sensor(&mut self, name: &str) -> Result<SensorReading, String> {
        let landmarks = self.map.landmarks.clone();
        let fault = self.fault;
        let clock = self.clock;
        let (pose, controller) = self.robot_mut(name)?;
        let truth = *pose;
        let mut ranges = Vec::with_capacity(landmarks.len());
        for (lx, ly) in landmarks {
            let u = controller.rng.next_f64();
            let g = controller.rng.next_gaussian();
            if u < fault.drop {
                ranges.push(None);
            } else {
                let true_range = (truth.x - lx).hypot(truth.y - ly);
                ranges.push(Some((true_range + fault.sigma * g).max(0.0)));
            }
        }
        Ok(SensorReading {
            ranges,
            timestamp: clock,
        })
    }

    /// Dead-reckon the estimate forward by the (noisy) odometry delta, then
    /// refine the position by Gauss-Newton when at least three ranges came
    /// through. Heading always comes from odometry.
    fn localize_robot(&mut self, name: &str, moved: Pose2D) {
        let landmarks = self.map.landmarks.clone();
        {
            let (_, controller) = self.robot_mut(name).expect("caller checked");
            let translation = moved.x.hypot(moved.y);
            let noise = ODOMETRY_NOISE_FRAC * translation;
            let gx = controller.rng.next_gaussian();
            let gy = controller.rng.next_gaussian();
            controller.estimate = Pose2D::new(
                controller.estimate.x + moved.x + noise * gx,
                controller.estimate.y + moved.y + noise * gy,
                controller.estimate.theta + moved.theta,
            );
        }
        let reading = self.read_sensor(name).expect("caller checked");
        let measurements: Vec<RangeMeasurement> = reading
            .ranges
            .iter()
            .zip(&landmarks)
            .filter_map(|(range, &landmark)| {
                range.map(|range| RangeMeasurement { landmark, range })
            })
            .collect();
        let (_, controller) = self.robot_mut(name).expect("caller checked");
        let prediction = controller.estimate;
        match localizer::solve((prediction.x, prediction.y), &measurements) {
            Some((x, y)) => {
                controller.estimate = Pose2D::new(x, y, prediction.theta);
                controller.diverged = false;
            }
            None => {
                // keep the dead-reckoned prediction
                controller.diverged = measurements.len() >= 3;
            }
        }
    }
}

/// Translate the control mode into a (v, ω) command; navigation advances
/// its waypoint cursor as a side effect.
fn command_for(pose: &Pose2D, mode: &mut ControlMode) -> (f64, f64) {
    match mode {
        ControlMode::Idle => (0.0, 0.0),
        ControlMode::Velocity { v, omega } => (*v, *omega),
        ControlMode::Navigate { path, waypoint, .. } => {
            while *waypoint < path.len() {
                let (wx, wy) = path[*waypoint];
                let dist = (wx - pose.x).hypot(wy - pose.y);
                let final_leg = *waypoint == path.len() - 1;
                let reach = if final_leg { 0.05 } else { 0.08 };
                if dist > reach {
                    let heading = (wy - pose.y).atan2(wx - pose.x);
                    let err = normalize_angle(heading - pose.theta);
                    let omega = (2.0 * err).clamp(-MAX_TURN, MAX_TURN);
                    let v = if err.abs() > 0.5 {
                        0.0
                    } else {
                        MAX_SPEED.min(2.0 * dist)
                    };
                    return (v, omega);
                }
                *waypoint += 1;
            }
            (0.0, 0.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn straight_drive_kinematics() {
        let mut world = WorldState::new(GridMap::open(8.0), 0, 0.1);
        world.add_robot("r");
        world.set_velocity("r", 1.0, 0.0).unwrap();
        world.step();
        let (pose, _) = world.robot("r").unwrap();
        // v clamps to 0.5 m/s
        assert!((pose.x - 0.05).abs() < 1e-12);
        assert!(pose.y.abs() < 1e-12);
    }

    #[test]
    fn pure_rotation_half_turn() {
        let mut world = WorldState::empty(0);
        world.add_robot("r");
        world
            .set_velocity("r", 0.0, std::f64::consts::PI / 4.0)
            .unwrap();
        for _ in 0..100 {
            world.step(); // 2 s at π/4 rad/s → π/2
        }
        let (pose, _) = world.robot("r").unwrap();
        assert!((pose.theta - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
    }

    #[test]
    fn clock_additivity() {
        let mut world = WorldState::empty(0);
        for _ in 0..1000 {
            world.step();
        }
        assert!((world.clock - 1000.0 * DEFAULT_DT).abs() < 1e-9);
    }

    #[test]
    fn wall_blocks_translation_but_not_rotation() {
        let mut world = WorldState::empty(0);
        world.add_robot("r");
        world.set_pose("r", Pose2D::new(2.9, 0.0, 0.0)).unwrap();
        world.set_velocity("r", 0.5, 0.1).unwrap();
        for _ in 0..200 {
            world.step();
        }
        let (pose, _) = world.robot("r").unwrap();
        // border wall occupies x >= 3.5
        assert!(pose.x < 3.5, "stopped at the wall, x = {}", pose.x);
        assert!(pose.theta > 0.0, "still rotating");
    }

    #[test]
    fn sensor_faultless_ranges_exact() {
        let mut world = WorldState::empty(1);
        world.add_robot("r");
        let reading = world.read_sensor("r").unwrap();
        assert_eq!(reading.ranges.len(), 4);
        for (range, &(lx, ly)) in reading.ranges.iter().zip(&world.map.landmarks) {
            let truth = lx.hypot(ly);
            assert!((range.unwrap() - truth).abs() < 1e-12);
        }
    }

    #[test]
    fn sensor_drop_all() {
        let mut world = WorldState::empty(1);
        world.add_robot("r");
        world.set_fault_params("random_drop_percentage", 1.0).unwrap();
        let reading = world.read_sensor("r").unwrap();
        assert!(reading.ranges.iter().all(|r| r.is_none()));
    }

    #[test]
    fn sensor_noise_std_matches_sigma() {
        let mut world = WorldState::empty(3);
        world.add_robot("r");
        world
            .set_fault_params("gaussian_noise_std_deviation", 0.2)
            .unwrap();
        let truth: Vec<f64> = world
            .map
            .landmarks
            .iter()
            .map(|&(lx, ly)| lx.hypot(ly))
            .collect();
        let mut residuals = Vec::new();
        for _ in 0..2500 {
            let reading = world.read_sensor("r").unwrap();
            for (r, t) in reading.ranges.iter().zip(&truth) {
                residuals.push(r.unwrap() - t);
            }
        }
        let n = residuals.len() as f64;
        let mean = residuals.iter().sum::<f64>() / n;
        let std = (residuals.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
        assert!((0.19..=0.21).contains(&std), "std {std}");
    }

    #[test]
    fn fault_params_clamped_and_unknown_rejected() {
        let mut world = WorldState::empty(0);
        world.set_fault_params("gaussian_noise_std_deviation", -1.0).unwrap();
        assert_eq!(world.fault.sigma, 0.0);
        world.set_fault_params("random_drop_percentage", 2.0).unwrap();
        assert_eq!(world.fault.drop, 1.0);
        assert!(world.set_fault_params("bogus", 1.0).is_err());
    }

    #[test]
    fn localization_error_three_four_five() {
        let mut world = WorldState::empty(0);
        world.add_robot("r");
        world.set_pose("r", Pose2D::new(4.0, 5.0, 0.0)).unwrap();
        let (_, controller) = world.robot_mut("r").unwrap();
        controller.estimate = Pose2D::new(1.0, 1.0, 0.0);
        assert!((world.localization_error("r").unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn faultless_localization_stays_exact_while_driving() {
        let mut world = WorldState::empty(0);
        world.add_robot("r");
        world.init_localization("r").unwrap();
        world.set_velocity("r", 0.3, 0.2).unwrap();
        for _ in 0..500 {
            world.step();
            assert!(world.localization_error("r").unwrap() < 1e-3);
        }
    }

    #[test]
    fn all_dropped_falls_back_to_dead_reckoning() {
        let mut world = WorldState::empty(0);
        world.add_robot("r");
        world.init_localization("r").unwrap();
        world.set_fault_params("random_drop_percentage", 1.0).unwrap();
        world.set_velocity("r", 0.4, 0.0).unwrap();
        for _ in 0..500 {
            world.step();
        }
        let err = world.localization_error("r").unwrap();
        assert!(err > 0.0, "odometry noise accumulates, err = {err}");
        let (_, controller) = world.robot("r").unwrap();
        assert!(!controller.diverged);
    }

    #[test]
    fn navigation_reaches_goal_and_avoids_box() {
        let mut world = WorldState::empty(0);
        world.add_robot("r");
        world.set_pose("r", Pose2D::new(-2.0, 0.0, 0.0)).unwrap();
        world.spawn_obstacle("box", 0.0, 0.0, 0.2).unwrap();
        world.navigate("r", Pose2D::new(2.0, 0.0, 0.0), 0.3).unwrap();
        for _ in 0..3000 {
            world.step();
        }
        let (pose, _) = world.robot("r").unwrap();
        assert!(pose.distance_to(&Pose2D::new(2.0, 0.0, 0.0)) < 0.3);
    }

    #[test]
    fn replan_after_obstacle_appears() {
        let mut world = WorldState::empty(0);
        world.add_robot("r");
        world.set_pose("r", Pose2D::new(-2.0, 0.0, 0.0)).unwrap();
        world.navigate("r", Pose2D::new(2.0, 0.0, 0.0), 0.3).unwrap();
        assert!(!world.path_needs_replan("r"));
        world.spawn_obstacle("box", 0.0, 0.0, 0.2).unwrap();
        assert!(world.path_needs_replan("r"));
        world.replan("r").unwrap();
        assert!(!world.path_needs_replan("r"));
    }

    #[test]
    fn duplicate_obstacle_center_rejected() {
        let mut world = WorldState::empty(0);
        world.spawn_obstacle("a", 1.0, 1.0, 0.2).unwrap();
        assert!(world.spawn_obstacle("b", 1.0, 1.0005, 0.2).is_err());
        assert!(world.spawn_obstacle("c", 1.5, 1.0, 0.2).is_ok());
    }

    #[test]
    fn determinism_same_seed_same_trajectory() {
        let run = |seed| {
            let mut world = WorldState::empty(seed);
            world.add_robot("r");
            world.init_localization("r").unwrap();
            world.set_fault_params("gaussian_noise_std_deviation", 0.3).unwrap();
            world.set_fault_params("random_drop_percentage", 0.2).unwrap();
            world.set_velocity("r", 0.4, 0.3).unwrap();
            for _ in 0..300 {
                world.step();
            }
            let (pose, controller) = world.robot("r").unwrap();
            (*pose, controller.estimate)
        };
        assert_eq!(run(7), run(7));
        assert_ne!(run(7).1, run(8).1);
    }

    #[test]
    fn channel_schedule_applies_in_order() {
        let mut world = WorldState::empty(0);
        world.channel_schedule.push((5, "late/scan".into()));
        world.apply_channel_schedule(0);
        assert!(!world.has_channel("late/scan"));
        world.apply_channel_schedule(4);
        assert!(!world.has_channel("late/scan"));
        world.apply_channel_schedule(5);
        assert!(world.has_channel("late/scan"));
    }

    #[test]
    fn estimated_frame_differs_from_ground_truth_under_noise() {
        let mut world = WorldState::empty(11);
        world.add_robot("r");
        world.init_localization("r").unwrap();
        world.set_fault_params("gaussian_noise_std_deviation", 0.3).unwrap();
        world.set_velocity("r", 0.4, 0.1).unwrap();
        for _ in 0..100 {
            world.step();
        }
        let truth = world.pose_in_frame("r", "ground_truth").unwrap();
        let est = world.pose_in_frame("r", "estimated").unwrap();
        assert!(truth.distance_to(&est) > 0.0);
        assert!(world.pose_in_frame("r", "odom").is_none());
    }
}
