//! Occupancy map loaded from a plain-text grid.
//!
//! One character covers a 0.5 m macro-cell (`#` wall, `.` free, `L` landmark
//! on a free cell); the grid is refined internally to 0.1 m cells. The world
//! origin sits at the map center, rows read top to bottom.

use thiserror::Error;

pub const MACRO_CELL_M: f64 = 0.5;
pub const CELL_M: f64 = 0.1;
const REFINE: usize = 5; // MACRO_CELL_M / CELL_M

#[derive(Debug, Error)]
pub enum MapError {
    #[error("map is empty")]
    Empty,
    #[error("line {line}, column {column}: unknown map character '{ch}'")]
    UnknownChar { line: usize, column: usize, ch: char },
}

#[derive(Debug, Clone)]
pub struct GridMap {
    /// Cell counts at 0.1 m resolution.
    pub width: usize,
    pub height: usize,
    /// World coordinates of the lower-left map corner.
    pub origin_x: f64,
    pub origin_y: f64,
    cells: Vec<bool>, // true = wall
    pub landmarks: Vec<(f64, f64)>,
}

impl GridMap {
    pub fn parse(text: &str) -> Result<GridMap, MapError> {
        let rows: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
        if rows.is_empty() {
            return Err(MapError::Empty);
        }
        let macro_w = rows.iter().map(|r| r.chars().count()).max().unwrap_or(0);
        let macro_h = rows.len();
        let width = macro_w * REFINE;
        let height = macro_h * REFINE;
        let origin_x = -(macro_w as f64) * MACRO_CELL_M / 2.0;
        let origin_y = -(macro_h as f64) * MACRO_CELL_M / 2.0;
        let mut cells = vec![true; width * height];
        let mut landmarks = Vec::new();
        for (row_idx, row) in rows.iter().enumerate() {
            // text rows run top to bottom, cell rows bottom to top
            let macro_y = macro_h - 1 - row_idx;
            for (col_idx, ch) in row.chars().enumerate() {
                let wall = match ch {
                    '#' => true,
                    '.' => false,
                    'L' => {
                        landmarks.push((
                            origin_x + (col_idx as f64 + 0.5) * MACRO_CELL_M,
                            origin_y + (macro_y as f64 + 0.5) * MACRO_CELL_M,
                        ));
                        false
                    }
                    other => {
                        return Err(MapError::UnknownChar {
                            line: row_idx + 1,
                            column: col_idx + 1,
                            ch: other,
                        })
                    }
                };
                for dy in 0..REFINE {
                    for dx in 0..REFINE {
                        let ix = col_idx * REFINE + dx;
                        let iy = macro_y * REFINE + dy;
                        cells[iy * width + ix] = wall;
                    }
                }
            }
        }
        Ok(GridMap {
            width,
            height,
            origin_x,
            origin_y,
            cells,
            landmarks,
        })
    }

    /// An all-free unbounded-feeling square of the given side length, with
    /// landmarks at the four inner corners.
    pub fn open(side_m: f64) -> GridMap {
        let macro_n = ((side_m / MACRO_CELL_M).ceil() as usize).max(2);
        let mut text = String::new();
        for row in 0..macro_n {
            for col in 0..macro_n {
                let border = row == 0 || col == 0 || row == macro_n - 1 || col == macro_n - 1;
                let corner = (row == 1 || row == macro_n - 2) && (col == 1 || col == macro_n - 2);
                text.push(if border {
                    '#'
                } else if corner {
                    'L'
                } else {
                    '.'
                });
            }
            text.push('\n');
        }
        GridMap::parse(&text).expect("generated map is valid")
    }

    pub fn cell_of(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let ix = ((x - self.origin_x) / CELL_M).floor();
        let iy = ((y - self.origin_y) / CELL_M).floor();
        if ix < 0.0 || iy < 0.0 || ix >= self.width as f64 || iy >= self.height as f64 {
            return None;
        }
        Some((ix as usize, iy as usize))
    }

    pub fn cell_center(&self, ix: usize, iy: usize) -> (f64, f64) {
        (
            self.origin_x + (ix as f64 + 0.5) * CELL_M,
            self.origin_y + (iy as f64 + 0.5) * CELL_M,
        )
    }

    /// Out-of-bounds counts as wall.
    pub fn occupied(&self, ix: isize, iy: isize) -> bool {
        if ix < 0 || iy < 0 || ix >= self.width as isize || iy >= self.height as isize {
            return true;
        }
        self.cells[iy as usize * self.width + ix as usize]
    }

    pub fn occupied_at(&self, x: f64, y: f64) -> bool {
        match self.cell_of(x, y) {
            Some((ix, iy)) => self.cells[iy * self.width + ix],
            None => true,
        }
    }

    /// Occupancy grid combining the static map with extra axis-aligned
    /// square footprints (spawned obstacles).
    pub fn occupancy_with(&self, obstacles: &[(f64, f64, f64)]) -> Occupancy {
        let mut cells = self.cells.clone();
        for &(cx, cy, half) in obstacles {
            let x0 = ((cx - half - self.origin_x) / CELL_M).floor().max(0.0) as usize;
            let y0 = ((cy - half - self.origin_y) / CELL_M).floor().max(0.0) as usize;
            let x1 = (((cx + half - self.origin_x) / CELL_M).ceil() as usize).min(self.width);
            let y1 = (((cy + half - self.origin_y) / CELL_M).ceil() as usize).min(self.height);
            for iy in y0..y1 {
                for ix in x0..x1 {
                    cells[iy * self.width + ix] = true;
                }
            }
        }
        Occupancy {
            width: self.width,
            height: self.height,
            origin_x: self.origin_x,
            origin_y: self.origin_y,
            cells,
        }
    }
}

/// A concrete occupancy snapshot the planner works on.
#[derive(Debug, Clone)]
pub struct Occupancy {
    pub width: usize,
    pub height: usize,
    pub origin_x: f64,
    pub origin_y: f64,
    cells: Vec<bool>,
}

impl Occupancy {
    pub fn occupied(&self, ix: isize, iy: isize) -> bool {
        if ix < 0 || iy < 0 || ix >= self.width as isize || iy >= self.height as isize {
            return true;
        }
        self.cells[iy as usize * self.width + ix as usize]
    }

    pub fn cell_of(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let ix = ((x - self.origin_x) / CELL_M).floor();
        let iy = ((y - self.origin_y) / CELL_M).floor();
        if ix < 0.0 || iy < 0.0 || ix >= self.width as f64 || iy >= self.height as f64 {
            return None;
        }
        Some((ix as usize, iy as usize))
    }

    pub fn cell_center(&self, ix: usize, iy: usize) -> (f64, f64) {
        (
            self.origin_x + (ix as f64 + 0.5) * CELL_M,
            self.origin_y + (iy as f64 + 0.5) * CELL_M,
        )
    }

    /// Dilate occupied cells by a Euclidean disk of the given radius.
    pub fn inflate(&self, radius_m: f64) -> Occupancy {
        let r = (radius_m / CELL_M).ceil() as isize;
        let mut offsets = Vec::new();
        for dy in -r..=r {
            for dx in -r..=r {
                let dist = ((dx * dx + dy * dy) as f64).sqrt() * CELL_M;
                if dist <= radius_m + 1e-9 {
                    offsets.push((dx, dy));
                }
            }
        }
        let mut cells = vec![false; self.width * self.height];
        for iy in 0..self.height as isize {
            for ix in 0..self.width as isize {
                if !self.cells[iy as usize * self.width + ix as usize] {
                    continue;
                }
                for &(dx, dy) in &offsets {
                    let (nx, ny) = (ix + dx, iy + dy);
                    if nx >= 0 && ny >= 0 && nx < self.width as isize && ny < self.height as isize {
                        cells[ny as usize * self.width + nx as usize] = true;
                    }
                }
            }
        }
        Occupancy {
            width: self.width,
            height: self.height,
            origin_x: self.origin_x,
            origin_y: self.origin_y,
            cells,
        }
    }

    /// True when the straight segment between two points stays free.
    pub fn line_of_sight(&self, from: (f64, f64), to: (f64, f64)) -> bool {
        let dist = ((to.0 - from.0).powi(2) + (to.1 - from.1).powi(2)).sqrt();
        let steps = (dist / (CELL_M / 2.0)).ceil().max(1.0) as usize;
        for i in 0..=steps {
            let t = i as f64 / steps as f64;
            let x = from.0 + t * (to.0 - from.0);
            let y = from.1 + t * (to.1 - from.1);
            match self.cell_of(x, y) {
                Some((ix, iy)) => {
                    if self.cells[iy * self.width + ix] {
                        return false;
                    }
                }
                None => return false,
            }
        }
        true
    }
}

/// Default maze world: 8x8 m bounded, three internal walls, landmarks in
/// the four corners.
pub const DEFAULT_MAP: &str = include_str!("../../maps/maze.map");

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_map_parses_with_four_corner_landmarks() {
        let map = GridMap::parse(DEFAULT_MAP).unwrap();
        assert_eq!(map.landmarks.len(), 4);
        assert_eq!(map.width, 80);
        assert_eq!(map.height, 80);
        // center of the map is free, border is wall
        assert!(!map.occupied_at(0.0, 0.0));
        assert!(map.occupied_at(-3.9, 0.0));
        assert!(map.occupied_at(0.0, 3.9));
    }

    #[test]
    fn start_goal_and_action_quadrant_free() {
        let map = GridMap::parse(DEFAULT_MAP).unwrap();
        for (x, y) in [(0.0, 0.0), (3.0, -3.0), (1.5, -1.5), (2.0, -2.0)] {
            assert!(!map.occupied_at(x, y), "({x},{y}) should be free");
        }
    }

    #[test]
    fn unknown_char_rejected() {
        let err = GridMap::parse("##\n#X\n").unwrap_err();
        assert!(matches!(err, MapError::UnknownChar { ch: 'X', .. }));
    }

    #[test]
    fn obstacle_rasterized_into_occupancy() {
        let map = GridMap::open(8.0);
        let occ = map.occupancy_with(&[(1.0, 1.0, 0.2)]);
        let (ix, iy) = occ.cell_of(1.0, 1.0).unwrap();
        assert!(occ.occupied(ix as isize, iy as isize));
        let (ix, iy) = occ.cell_of(2.0, 2.0).unwrap();
        assert!(!occ.occupied(ix as isize, iy as isize));
    }

    #[test]
    fn inflation_grows_walls() {
        let map = GridMap::open(8.0);
        let occ = map.occupancy_with(&[]);
        let inflated = occ.inflate(0.2);
        // a point 0.15 m from the border wall becomes occupied after inflation
        let x = map.origin_x + MACRO_CELL_M + 0.15; // border is one macro cell thick
        let (ix, iy) = occ.cell_of(x, 0.0).unwrap();
        assert!(!occ.occupied(ix as isize, iy as isize));
        assert!(inflated.occupied(ix as isize, iy as isize));
    }
}
