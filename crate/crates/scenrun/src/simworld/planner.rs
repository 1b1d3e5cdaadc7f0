//! Grid path planning: 8-connected A* on the inflated occupancy grid,
//! followed by line-of-sight shortcutting on the raw waypoint chain.

use super::map::{Occupancy, CELL_M};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

pub const INFLATION_M: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub enum PlanError {
    StartOccupied,
    GoalOccupied,
    Unreachable,
}

impl std::fmt::Display for PlanError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PlanError::StartOccupied => write!(f, "start position is inside an obstacle"),
            PlanError::GoalOccupied => write!(f, "goal position is inside an obstacle"),
            PlanError::Unreachable => write!(f, "no collision-free path to the goal"),
        }
    }
}

#[derive(PartialEq)]
struct OpenNode {
    f: f64,
    g: f64,
    cell: (usize, usize),
}

impl Eq for OpenNode {}

impl Ord for OpenNode {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on f, ties broken on g so straighter expansions win
        other
            .f
            .partial_cmp(&self.f)
            .unwrap_or(Ordering::Equal)
            .then(other.g.partial_cmp(&self.g).unwrap_or(Ordering::Equal))
    }
}

impl PartialOrd for OpenNode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

const NEIGHBORS: [(isize, isize, f64); 8] = [
    (1, 0, 1.0),
    (-1, 0, 1.0),
    (0, 1, 1.0),
    (0, -1, 1.0),
    (1, 1, std::f64::consts::SQRT_2),
    (1, -1, std::f64::consts::SQRT_2),
    (-1, 1, std::f64::consts::SQRT_2),
    (-1, -1, std::f64::consts::SQRT_2),
];

fn octile(a: (usize, usize), b: (usize, usize)) -> f64 {
    let dx = (a.0 as f64 - b.0 as f64).abs();
    let dy = (a.1 as f64 - b.1 as f64).abs();
    dx.max(dy) + (std::f64::consts::SQRT_2 - 1.0) * dx.min(dy)
}

/// Plan a path of world-coordinate waypoints from `start` to `goal` on the
/// raw occupancy grid. Obstacles are inflated by [`INFLATION_M`]; if the
/// start sits inside the inflated band (but not inside a real obstacle) the
/// nearest free cell is used so a robot hugging a wall can still leave.
pub fn plan(
    occ: &Occupancy,
    start: (f64, f64),
    goal: (f64, f64),
) -> Result<Vec<(f64, f64)>, PlanError> {
    let inflated = occ.inflate(INFLATION_M);
    let start_cell = match occ.cell_of(start.0, start.1) {
        Some(c) if !occ.occupied(c.0 as isize, c.1 as isize) => c,
        _ => return Err(PlanError::StartOccupied),
    };
    let goal_cell = match occ.cell_of(goal.0, goal.1) {
        Some(c) if !occ.occupied(c.0 as isize, c.1 as isize) => c,
        _ => return Err(PlanError::GoalOccupied),
    };
    let start_cell = nearest_free(&inflated, start_cell).ok_or(PlanError::Unreachable)?;
    let goal_cell = nearest_free(&inflated, goal_cell).ok_or(PlanError::Unreachable)?;

    let width = inflated.width;
    let idx = |c: (usize, usize)| c.1 * width + c.0;
    let mut g_score = vec![f64::INFINITY; width * inflated.height];
    let mut came_from: Vec<u32> = vec![u32::MAX; width * inflated.height];
    let mut open = BinaryHeap::new();
    g_score[idx(start_cell)] = 0.0;
    open.push(OpenNode {
        f: octile(start_cell, goal_cell),
        g: 0.0,
        cell: start_cell,
    });

    while let Some(OpenNode { g, cell, .. }) = open.pop() {
        if g > g_score[idx(cell)] {
            continue; // stale entry
        }
        if cell == goal_cell {
            let mut cells = vec![cell];
            let mut cur = idx(cell);
            while came_from[cur] != u32::MAX {
                cur = came_from[cur] as usize;
                cells.push((cur % width, cur / width));
            }
            cells.reverse();
            let mut path = shortcut(&inflated, &cells);
            // snap endpoints to the requested coordinates
            if let Some(first) = path.first_mut() {
                *first = start;
            }
            if let Some(last) = path.last_mut() {
                *last = goal;
            }
            return Ok(path);
        }
        for &(dx, dy, cost) in &NEIGHBORS {
            let nx = cell.0 as isize + dx;
            let ny = cell.1 as isize + dy;
            if inflated.occupied(nx, ny) {
                continue;
            }
            // forbid cutting a corner between two diagonal walls
            if dx != 0 && dy != 0 {
                if inflated.occupied(cell.0 as isize + dx, cell.1 as isize)
                    || inflated.occupied(cell.0 as isize, cell.1 as isize + dy)
                {
                    continue;
                }
            }
            let next = (nx as usize, ny as usize);
            let tentative = g + cost;
            if tentative < g_score[idx(next)] {
                g_score[idx(next)] = tentative;
                came_from[idx(next)] = idx(cell) as u32;
                open.push(OpenNode {
                    f: tentative + octile(next, goal_cell),
                    g: tentative,
                    cell: next,
                });
            }
        }
    }
    Err(PlanError::Unreachable)
}

/// Greedy shortcutting: from each kept waypoint, jump to the farthest later
/// cell still in line of sight on the inflated grid.
fn shortcut(inflated: &Occupancy, cells: &[(usize, usize)]) -> Vec<(f64, f64)> {
    let points: Vec<(f64, f64)> = cells
        .iter()
        .map(|&(ix, iy)| inflated.cell_center(ix, iy))
        .collect();
    if points.len() <= 2 {
        return points;
    }
    let mut out = vec![points[0]];
    let mut i = 0;
    while i < points.len() - 1 {
        let mut j = points.len() - 1;
        while j > i + 1 && !inflated.line_of_sight(points[i], points[j]) {
            j -= 1;
        }
        out.push(points[j]);
        i = j;
    }
    out
}

/// True when any segment of the path crosses an occupied cell of the grid
/// inflated by a reduced margin (half the planning inflation, so a freshly
/// planned path is not immediately reported blocked).
pub fn path_blocked(occ: &Occupancy, path: &[(f64, f64)]) -> bool {
    if path.len() < 2 {
        return false;
    }
    let inflated = occ.inflate(INFLATION_M / 2.0);
    path.windows(2)
        .any(|w| !inflated.line_of_sight(w[0], w[1]))
}

fn nearest_free(occ: &Occupancy, cell: (usize, usize)) -> Option<(usize, usize)> {
    if !occ.occupied(cell.0 as isize, cell.1 as isize) {
        return Some(cell);
    }
    // small spiral search; callers are at most one inflation band deep
    let max_r = (2.0 * INFLATION_M / CELL_M).ceil() as isize + 1;
    for r in 1..=max_r {
        let mut best: Option<((usize, usize), f64)> = None;
        for dy in -r..=r {
            for dx in -r..=r {
                if dx.abs() != r && dy.abs() != r {
                    continue;
                }
                let nx = cell.0 as isize + dx;
                let ny = cell.1 as isize + dy;
                if occ.occupied(nx, ny) {
                    continue;
                }
                let d = ((dx * dx + dy * dy) as f64).sqrt();
                if best.map_or(true, |(_, bd)| d < bd) {
                    best = Some(((nx as usize, ny as usize), d));
                }
            }
        }
        if let Some((c, _)) = best {
            return Some(c);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simworld::map::GridMap;

    #[test]
    fn straight_corridor_shortcuts_to_two_points() {
        let map = GridMap::open(8.0);
        let occ = map.occupancy_with(&[]);
        let path = plan(&occ, (-2.0, 0.0), (2.0, 0.0)).unwrap();
        assert_eq!(path.len(), 2);
        assert_eq!(path[0], (-2.0, 0.0));
        assert_eq!(path[1], (2.0, 0.0));
    }

    #[test]
    fn routes_around_obstacle() {
        let map = GridMap::open(8.0);
        let occ = map.occupancy_with(&[(0.0, 0.0, 0.3)]);
        let path = plan(&occ, (-2.0, 0.0), (2.0, 0.0)).unwrap();
        assert!(path.len() > 2);
        // every kept waypoint clears the obstacle footprint
        for &(x, y) in &path[1..path.len() - 1] {
            assert!(x.abs().max(y.abs()) > 0.3, "waypoint ({x},{y}) inside box");
        }
    }

    #[test]
    fn walled_off_goal_is_unreachable() {
        let map = GridMap::parse("#####\n#.#.#\n#####\n").unwrap();
        let occ = map.occupancy_with(&[]);
        let left = map.cell_center(7, 7);
        let right = map.cell_center(17, 7);
        assert_eq!(plan(&occ, left, right), Err(PlanError::Unreachable));
    }

    #[test]
    fn goal_inside_obstacle_reported() {
        let map = GridMap::open(8.0);
        let occ = map.occupancy_with(&[(1.0, 1.0, 0.3)]);
        assert_eq!(plan(&occ, (0.0, 0.0), (1.0, 1.0)), Err(PlanError::GoalOccupied));
    }

    #[test]
    fn fresh_plan_is_not_blocked_and_new_obstacle_blocks_it() {
        let map = GridMap::open(8.0);
        let occ = map.occupancy_with(&[]);
        let path = plan(&occ, (-2.0, 0.0), (2.0, 0.0)).unwrap();
        assert!(!path_blocked(&occ, &path));
        let with_box = map.occupancy_with(&[(0.0, 0.0, 0.3)]);
        assert!(path_blocked(&with_box, &path));
    }

    #[test]
    fn maze_diagonal_plan_exists() {
        let map = GridMap::parse(crate::simworld::map::DEFAULT_MAP).unwrap();
        let occ = map.occupancy_with(&[]);
        let path = plan(&occ, (0.0, 0.0), (3.0, -3.0)).unwrap();
        assert!(path.len() >= 2);
    }
}
