//! Maze geometry: ground-truth walls, the explorer's knowledge map, and the
//! text file format.
//!
//! Cells are indexed `(x, y)` with y growing upward. Edges live on the cell
//! boundaries: vertical edges separate horizontally adjacent cells, boundary
//! edges are always walls.
//!
//! # File format
//!
//! ```text
//! maze <width> <height> <pitch_mm>
//! <height rows of <width> hex digits, top row first>
//! ```
//!
//! Each hex digit encodes one cell's walls: bit 0 = +x, bit 1 = +y,
//! bit 2 = -x, bit 3 = -y. Shared edges must agree between neighbors and
//! the outer boundary must be fully walled; a maze that fails either check,
//! or is not fully connected, is rejected.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Cell {
    pub x: usize,
    pub y: usize,
}

impl Cell {
    pub fn new(x: usize, y: usize) -> Cell {
        Cell { x, y }
    }
}

/// Axis-aligned move directions in the explorer's fixed visit order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    PlusX,
    PlusY,
    MinusX,
    MinusY,
}

/// Fixed neighbor visit order: +x, +y, -x, -y.
pub const VISIT_ORDER: [Direction; 4] = [
    Direction::PlusX,
    Direction::PlusY,
    Direction::MinusX,
    Direction::MinusY,
];

impl Direction {
    pub fn delta(self) -> (isize, isize) {
        match self {
            Direction::PlusX => (1, 0),
            Direction::PlusY => (0, 1),
            Direction::MinusX => (-1, 0),
            Direction::MinusY => (0, -1),
        }
    }

    pub fn unit(self) -> [f64; 2] {
        let (dx, dy) = self.delta();
        [dx as f64, dy as f64]
    }

    pub fn opposite(self) -> Direction {
        match self {
            Direction::PlusX => Direction::MinusX,
            Direction::PlusY => Direction::MinusY,
            Direction::MinusX => Direction::PlusX,
            Direction::MinusY => Direction::PlusY,
        }
    }
}

/// Index of the edge on `dir` side of `cell` within the vertical or
/// horizontal edge array; `vertical` is true for edges crossed by x moves.
fn edge_index(width: usize, cell: Cell, dir: Direction) -> (bool, usize) {
    match dir {
        Direction::PlusX => (true, cell.y * (width + 1) + cell.x + 1),
        Direction::MinusX => (true, cell.y * (width + 1) + cell.x),
        Direction::PlusY => (false, (cell.y + 1) * width + cell.x),
        Direction::MinusY => (false, cell.y * width + cell.x),
    }
}

/// Ground-truth maze.
#[derive(Debug, Clone, PartialEq)]
pub struct Maze {
    pub width: usize,
    pub height: usize,
    /// mm between adjacent cell centers.
    pub cell_pitch_mm: f64,
    /// Vertical edges, (width+1) * height.
    walls_v: Vec<bool>,
    /// Horizontal edges, width * (height+1).
    walls_h: Vec<bool>,
}

impl Maze {
    /// Fully-walled maze (every edge a wall).
    pub fn walled(width: usize, height: usize, cell_pitch_mm: f64) -> Result<Maze> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidInput("maze must be at least 1x1".into()));
        }
        if !(cell_pitch_mm.is_finite() && cell_pitch_mm >= 1.0) {
            return Err(Error::InvalidInput(
                "cell pitch must be at least 1 mm".into(),
            ));
        }
        Ok(Maze {
            width,
            height,
            cell_pitch_mm,
            walls_v: vec![true; (width + 1) * height],
            walls_h: vec![true; width * (height + 1)],
        })
    }

    pub fn in_bounds(&self, cell: Cell) -> bool {
        cell.x < self.width && cell.y < self.height
    }

    pub fn neighbor(&self, cell: Cell, dir: Direction) -> Option<Cell> {
        let (dx, dy) = dir.delta();
        let nx = cell.x as isize + dx;
        let ny = cell.y as isize + dy;
        if nx < 0 || ny < 0 || nx as usize >= self.width || ny as usize >= self.height {
            None
        } else {
            Some(Cell::new(nx as usize, ny as usize))
        }
    }

    pub fn has_wall(&self, cell: Cell, dir: Direction) -> bool {
        let (vertical, idx) = edge_index(self.width, cell, dir);
        if vertical {
            self.walls_v[idx]
        } else {
            self.walls_h[idx]
        }
    }

    fn set_wall(&mut self, cell: Cell, dir: Direction, wall: bool) {
        let (vertical, idx) = edge_index(self.width, cell, dir);
        if vertical {
            self.walls_v[idx] = wall;
        } else {
            self.walls_h[idx] = wall;
        }
    }

    pub fn interior_edge_count(&self) -> usize {
        (self.width - 1) * self.height + self.width * (self.height - 1)
    }

    /// Count of interior edges that are walls.
    pub fn interior_wall_count(&self) -> usize {
        let mut count = 0;
        for y in 0..self.height {
            for x in 0..self.width {
                let cell = Cell::new(x, y);
                if x + 1 < self.width && self.has_wall(cell, Direction::PlusX) {
                    count += 1;
                }
                if y + 1 < self.height && self.has_wall(cell, Direction::PlusY) {
                    count += 1;
                }
            }
        }
        count
    }

    /// Generate a connected maze by recursive backtracking: a uniform
    /// spanning-tree-style carve that visits every cell.
    pub fn generate(width: usize, height: usize, cell_pitch_mm: f64, seed: u64) -> Result<Maze> {
        let mut maze = Maze::walled(width, height, cell_pitch_mm)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut visited = vec![false; width * height];
        let mut stack = vec![Cell::new(0, 0)];
        visited[0] = true;
        while let Some(&current) = stack.last() {
            let mut dirs = VISIT_ORDER;
            dirs.shuffle(&mut rng);
            let next = dirs.iter().find_map(|&d| {
                maze.neighbor(current, d)
                    .filter(|n| !visited[n.y * width + n.x])
                    .map(|n| (d, n))
            });
            match next {
                Some((dir, n)) => {
                    maze.set_wall(current, dir, false);
                    visited[n.y * width + n.x] = true;
                    stack.push(n);
                }
                None => {
                    stack.pop();
                }
            }
        }
        debug_assert!(maze.is_connected());
        Ok(maze)
    }

    /// Every cell reachable from (0,0) through open edges.
    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.width * self.height];
        let mut stack = vec![Cell::new(0, 0)];
        seen[0] = true;
        let mut count = 1;
        while let Some(cell) = stack.pop() {
            for dir in VISIT_ORDER {
                if self.has_wall(cell, dir) {
                    continue;
                }
                if let Some(n) = self.neighbor(cell, dir) {
                    let idx = n.y * self.width + n.x;
                    if !seen[idx] {
                        seen[idx] = true;
                        count += 1;
                        stack.push(n);
                    }
                }
            }
        }
        count == self.width * self.height
    }

    fn cell_nibble(&self, cell: Cell) -> u8 {
        let mut bits = 0u8;
        if self.has_wall(cell, Direction::PlusX) {
            bits |= 1;
        }
        if self.has_wall(cell, Direction::PlusY) {
            bits |= 2;
        }
        if self.has_wall(cell, Direction::MinusX) {
            bits |= 4;
        }
        if self.has_wall(cell, Direction::MinusY) {
            bits |= 8;
        }
        bits
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("maze {} {} {}\n", self.width, self.height, self.cell_pitch_mm);
        for y in (0..self.height).rev() {
            for x in 0..self.width {
                let nibble = self.cell_nibble(Cell::new(x, y));
                out.push(char::from_digit(nibble as u32, 16).unwrap());
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Maze> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty maze file".into()))?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 4 || parts[0] != "maze" {
            return Err(Error::Parse(
                "maze header must be `maze <width> <height> <pitch_mm>`".into(),
            ));
        }
        let width: usize = parts[1]
            .parse()
            .map_err(|_| Error::Parse("bad maze width".into()))?;
        let height: usize = parts[2]
            .parse()
            .map_err(|_| Error::Parse("bad maze height".into()))?;
        let pitch: f64 = parts[3]
            .parse()
            .map_err(|_| Error::Parse("bad maze pitch".into()))?;
        let mut maze = Maze::walled(width, height, pitch)?;

        let rows: Vec<&str> = lines.collect();
        if rows.len() != height {
            return Err(Error::Parse(format!(
                "expected {height} maze rows, got {}",
                rows.len()
            )));
        }
        for (row_idx, row) in rows.iter().enumerate() {
            let y = height - 1 - row_idx;
            let digits: Vec<char> = row.trim().chars().collect();
            if digits.len() != width {
                return Err(Error::Parse(format!(
                    "maze row {} has {} cells, expected {width}",
                    row_idx + 2,
                    digits.len()
                )));
            }
            for (x, ch) in digits.iter().enumerate() {
                let bits = ch
                    .to_digit(16)
                    .ok_or_else(|| Error::Parse(format!("bad wall digit `{ch}`")))?
                    as u8;
                let cell = Cell::new(x, y);
                maze.set_wall(cell, Direction::PlusX, bits & 1 != 0);
                maze.set_wall(cell, Direction::PlusY, bits & 2 != 0);
                maze.set_wall(cell, Direction::MinusX, bits & 4 != 0);
                maze.set_wall(cell, Direction::MinusY, bits & 8 != 0);
            }
        }
        maze.validate_consistency(text)?;
        Ok(maze)
    }

    /// Re-check shared edges (each stored once, so conflicting nibbles are
    /// detected against the re-parse), boundary walls, and connectivity.
    fn validate_consistency(&self, original: &str) -> Result<()> {
        // Boundary must be fully walled.
        for y in 0..self.height {
            if !self.has_wall(Cell::new(0, y), Direction::MinusX)
                || !self.has_wall(Cell::new(self.width - 1, y), Direction::PlusX)
            {
                return Err(Error::Parse("maze boundary must be walled".into()));
            }
        }
        for x in 0..self.width {
            if !self.has_wall(Cell::new(x, 0), Direction::MinusY)
                || !self.has_wall(Cell::new(x, self.height - 1), Direction::PlusY)
            {
                return Err(Error::Parse("maze boundary must be walled".into()));
            }
        }
        // Shared edges: the file stores each edge twice (both cells); after
        // parsing, the second write wins, so round-trip and compare.
        let canonical = self.to_text();
        let reparse_rows: Vec<&str> = canonical.lines().skip(1).collect();
        let original_rows: Vec<String> = original
            .lines()
            .filter(|l| !l.trim().is_empty())
            .skip(1)
            .map(|l| l.trim().to_lowercase())
            .collect();
        if reparse_rows
            .iter()
            .zip(&original_rows)
            .any(|(a, b)| a != b)
        {
            return Err(Error::Parse(
                "maze cells disagree about a shared edge".into(),
            ));
        }
        if !self.is_connected() {
            return Err(Error::Parse("maze is not fully connected".into()));
        }
        Ok(())
    }
}

/// Explorer's knowledge about one edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeState {
    Unknown,
    Wall,
    Open,
}

/// State of one 1 mm map cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MmCell {
    Untouched,
    Traversed,
    Contact,
}

/// The explorer's evolving picture: per-edge knowledge at maze scale plus a
/// 1 mm occupancy grid of where the fingertip has been and touched.
#[derive(Debug, Clone)]
pub struct MazeMap {
    pub width: usize,
    pub height: usize,
    pub cell_pitch_mm: f64,
    knowledge_v: Vec<EdgeState>,
    knowledge_h: Vec<EdgeState>,
    /// Row-major `mm_width * mm_height`, 1 mm resolution.
    pub mm_cells: Vec<MmCell>,
    pub mm_width: usize,
    pub mm_height: usize,
}

impl MazeMap {
    /// Fresh map with boundary edges pre-marked as walls.
    pub fn new(width: usize, height: usize, cell_pitch_mm: f64) -> MazeMap {
        let mm_width = (width as f64 * cell_pitch_mm).ceil() as usize;
        let mm_height = (height as f64 * cell_pitch_mm).ceil() as usize;
        let mut map = MazeMap {
            width,
            height,
            cell_pitch_mm,
            knowledge_v: vec![EdgeState::Unknown; (width + 1) * height],
            knowledge_h: vec![EdgeState::Unknown; width * (height + 1)],
            mm_cells: vec![MmCell::Untouched; mm_width * mm_height],
            mm_width,
            mm_height,
        };
        for y in 0..height {
            map.knowledge_v[y * (width + 1)] = EdgeState::Wall;
            map.knowledge_v[y * (width + 1) + width] = EdgeState::Wall;
        }
        for x in 0..width {
            map.knowledge_h[x] = EdgeState::Wall;
            map.knowledge_h[height * width + x] = EdgeState::Wall;
        }
        map
    }

    pub fn edge(&self, cell: Cell, dir: Direction) -> EdgeState {
        let (vertical, idx) = edge_index(self.width, cell, dir);
        if vertical {
            self.knowledge_v[idx]
        } else {
            self.knowledge_h[idx]
        }
    }

    /// Record knowledge. Unknown may become Wall or Open; flipping a decided
    /// edge is a simulation integrity error.
    pub fn set_edge(&mut self, cell: Cell, dir: Direction, state: EdgeState) -> Result<()> {
        if state == EdgeState::Unknown {
            return Err(Error::Integrity("cannot unlearn an edge".into()));
        }
        let (vertical, idx) = edge_index(self.width, cell, dir);
        let slot = if vertical {
            &mut self.knowledge_v[idx]
        } else {
            &mut self.knowledge_h[idx]
        };
        match *slot {
            EdgeState::Unknown => {
                *slot = state;
                Ok(())
            }
            existing if existing == state => Ok(()),
            existing => Err(Error::Integrity(format!(
                "edge already {existing:?}, cannot mark {state:?}"
            ))),
        }
    }

    pub fn edges_classified(&self) -> bool {
        self.knowledge_v.iter().all(|e| *e != EdgeState::Unknown)
            && self.knowledge_h.iter().all(|e| *e != EdgeState::Unknown)
    }

    pub fn wall_count(&self) -> usize {
        self.knowledge_v
            .iter()
            .chain(&self.knowledge_h)
            .filter(|e| **e == EdgeState::Wall)
            .count()
    }

    pub fn unknown_count(&self) -> usize {
        self.knowledge_v
            .iter()
            .chain(&self.knowledge_h)
            .filter(|e| **e == EdgeState::Unknown)
            .count()
    }

    /// Interior edges agree with ground truth; boundary is wall by
    /// construction on both sides.
    pub fn matches_ground_truth(&self, maze: &Maze) -> bool {
        for y in 0..self.height {
            for x in 0..self.width {
                let cell = Cell::new(x, y);
                for dir in [Direction::PlusX, Direction::PlusY] {
                    if maze.neighbor(cell, dir).is_none() {
                        continue;
                    }
                    let truth = if maze.has_wall(cell, dir) {
                        EdgeState::Wall
                    } else {
                        EdgeState::Open
                    };
                    if self.edge(cell, dir) != truth {
                        return false;
                    }
                }
            }
        }
        true
    }

    pub fn mark_mm(&mut self, x_mm: f64, y_mm: f64, state: MmCell) {
        let x = x_mm.floor() as isize;
        let y = y_mm.floor() as isize;
        if x < 0 || y < 0 || x as usize >= self.mm_width || y as usize >= self.mm_height {
            return;
        }
        let slot = &mut self.mm_cells[y as usize * self.mm_width + x as usize];
        // Contact marks are sticky; traversal never downgrades them.
        if *slot == MmCell::Contact && state == MmCell::Traversed {
            return;
        }
        *slot = state;
    }

    /// Mark the fingertip footprint (disk of `radius_mm`) as traversed.
    pub fn mark_footprint(&mut self, center: [f64; 2], radius_mm: f64) {
        let r = radius_mm.ceil() as isize;
        let cx = center[0].floor() as isize;
        let cy = center[1].floor() as isize;
        for dy in -r..=r {
            for dx in -r..=r {
                let x = cx + dx;
                let y = cy + dy;
                if x < 0 || y < 0 || x as usize >= self.mm_width || y as usize >= self.mm_height
                {
                    continue;
                }
                let fx = x as f64 + 0.5 - center[0];
                let fy = y as f64 + 0.5 - center[1];
                if fx * fx + fy * fy <= radius_mm * radius_mm {
                    self.mark_mm(x as f64, y as f64, MmCell::Traversed);
                }
            }
        }
    }

    pub fn mm_state(&self, x: usize, y: usize) -> MmCell {
        self.mm_cells[y * self.mm_width + x]
    }

    pub fn contact_count(&self) -> usize {
        self.mm_cells.iter().filter(|c| **c == MmCell::Contact).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_mazes_are_connected_and_tree_like() {
        for seed in 0..10 {
            let maze = Maze::generate(5, 5, 60.0, seed).unwrap();
            assert!(maze.is_connected());
            // A carve that visits every cell opens exactly cells-1 edges.
            let open = maze.interior_edge_count() - maze.interior_wall_count();
            assert_eq!(open, 24);
        }
    }

    #[test]
    fn text_round_trip() {
        let maze = Maze::generate(5, 4, 60.0, 3).unwrap();
        let text = maze.to_text();
        let back = Maze::from_text(&text).unwrap();
        assert_eq!(maze, back);
    }

    #[test]
    fn one_by_one_maze_is_all_boundary() {
        let maze = Maze::generate(1, 1, 60.0, 0).unwrap();
        assert_eq!(maze.interior_edge_count(), 0);
        let cell = Cell::new(0, 0);
        for dir in VISIT_ORDER {
            assert!(maze.has_wall(cell, dir));
            assert!(maze.neighbor(cell, dir).is_none());
        }
    }

    #[test]
    fn rejects_inconsistent_and_open_boundary_files() {
        // 2x1 maze where the shared edge disagrees: left cell says open +x,
        // right cell says wall -x.
        let bad = "maze 2 1 60\nef\n";
        assert!(Maze::from_text(bad).is_err());
        // The consistent version parses.
        assert!(Maze::from_text("maze 2 1 60\neb\n").is_ok());
        // Boundary breach: left cell opens -x.
        let breach = "maze 2 1 60\nbf\n";
        assert!(Maze::from_text(breach).is_err());
        // Disconnected: 2x1 with a wall between the cells.
        let disconnected = "maze 2 1 60\nff\n";
        assert!(Maze::from_text(disconnected).is_err());
    }

    #[test]
    fn map_boundary_starts_as_walls() {
        let map = MazeMap::new(3, 3, 60.0);
        assert_eq!(map.edge(Cell::new(0, 0), Direction::MinusX), EdgeState::Wall);
        assert_eq!(map.edge(Cell::new(2, 2), Direction::PlusY), EdgeState::Wall);
        assert_eq!(map.edge(Cell::new(1, 1), Direction::PlusX), EdgeState::Unknown);
        assert_eq!(map.wall_count(), 12);
    }

    #[test]
    fn knowledge_is_monotone() {
        let mut map = MazeMap::new(2, 2, 60.0);
        let cell = Cell::new(0, 0);
        map.set_edge(cell, Direction::PlusX, EdgeState::Open).unwrap();
        assert!(map.set_edge(cell, Direction::PlusX, EdgeState::Open).is_ok());
        assert!(map
            .set_edge(cell, Direction::PlusX, EdgeState::Wall)
            .is_err());
        assert!(map
            .set_edge(cell, Direction::PlusY, EdgeState::Unknown)
            .is_err());
    }

    #[test]
    fn footprint_marks_a_disk() {
        let mut map = MazeMap::new(2, 2, 60.0);
        map.mark_footprint([30.0, 30.0], 16.0);
        assert_eq!(map.mm_state(30, 30), MmCell::Traversed);
        assert_eq!(map.mm_state(30, 44), MmCell::Traversed);
        assert_eq!(map.mm_state(30, 50), MmCell::Untouched);
        // Contact marks survive later traversal.
        map.mark_mm(30.0, 30.0, MmCell::Contact);
        map.mark_footprint([30.0, 30.0], 16.0);
        assert_eq!(map.mm_state(30, 30), MmCell::Contact);
    }
}
