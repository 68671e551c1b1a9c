//! Tactile maze exploration: guarded 1 mm moves with displacement-threshold
//! wall detection, driven by a depth-first search over maze cells.
//!
//! A guarded move advances the commanded fingertip position in 1 mm
//! increments toward the neighboring cell. If the shared edge is a true
//! wall, the tip meets it `tip_radius` before the wall plane and the lattice
//! starts deflecting like a unilateral spring: 1 mm of deflection per mm of
//! commanded penetration, reported in the motion direction (the arm-command
//! minus the pinned tip). Once the *estimated* lateral deflection crosses
//! the threshold the move aborts, the edge is recorded as a wall together
//! with its contact arc, and the robot walks back to the cell it came from.
//!
//! The search keeps a cell stack and probes neighbors in the fixed order
//! +x, +y, -x, -y. A neighbor is worth probing when it is inside the maze,
//! not currently on the stack, and the connecting edge is still
//! unclassified. When nothing around the stack top qualifies, the robot
//! backtracks one cell. Boundary edges start as walls, so the loop ends
//! with every reachable edge classified.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::estimator::{
    contact_arc, estimate_displacement, ArcConfig, ContactArc, EstimatorCalibration,
};
use crate::maze::grid::{Cell, Direction, EdgeState, Maze, MazeMap, MmCell, VISIT_ORDER};
use crate::model::{synth_tip_pressures, LatticeParams, TipDisplacement};

#[derive(Debug, Clone, Copy)]
pub struct ExploreConfig {
    /// mm of estimated lateral deflection that flags a wall.
    pub threshold_mm: f64,
    /// mm, fingertip radius (contact begins this far from a wall plane).
    pub tip_radius_mm: f64,
    /// Sensor noise on when set.
    pub noise_seed: Option<u64>,
    pub arc: ArcConfig,
}

impl Default for ExploreConfig {
    fn default() -> Self {
        ExploreConfig {
            threshold_mm: 2.0,
            tip_radius_mm: 16.0,
            noise_seed: None,
            arc: ArcConfig::default(),
        }
    }
}

impl ExploreConfig {
    pub fn validate(&self, maze: &Maze) -> Result<()> {
        if !(self.threshold_mm.is_finite() && self.threshold_mm > 0.0) {
            return Err(Error::InvalidInput("threshold must be > 0".into()));
        }
        let clearance = maze.cell_pitch_mm / 2.0 - self.tip_radius_mm;
        if clearance <= self.threshold_mm {
            return Err(Error::InvalidInput(format!(
                "tip radius {} mm plus threshold {} mm does not fit a {} mm corridor",
                self.tip_radius_mm, self.threshold_mm, maze.cell_pitch_mm
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MoveOutcome {
    Reached,
    Blocked(ContactArc),
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ExploreStats {
    pub guarded_moves: usize,
    pub backtracks: usize,
    pub cells_visited: usize,
    pub walls_found: usize,
}

/// Exploration run artifacts: the knowledge map, move statistics, recorded
/// contact arcs, and the full 1 mm position trace of the robot.
#[derive(Debug, Clone)]
pub struct Exploration {
    pub map: MazeMap,
    pub stats: ExploreStats,
    pub arcs: Vec<([f64; 2], ContactArc)>,
    pub trace: Vec<[f64; 2]>,
}

struct Explorer<'a> {
    maze: &'a Maze,
    params: &'a LatticeParams,
    cal: &'a EstimatorCalibration,
    cfg: ExploreConfig,
    map: MazeMap,
    rng: Option<ChaCha8Rng>,
    pos: [f64; 2],
    trace: Vec<[f64; 2]>,
    arcs: Vec<([f64; 2], ContactArc)>,
    stats: ExploreStats,
}

impl<'a> Explorer<'a> {
    fn cell_center(&self, cell: Cell) -> [f64; 2] {
        let pitch = self.maze.cell_pitch_mm;
        [
            (cell.x as f64 + 0.5) * pitch,
            (cell.y as f64 + 0.5) * pitch,
        ]
    }

    fn record_position(&mut self) {
        self.map
            .mark_footprint(self.pos, self.cfg.tip_radius_mm);
        self.trace.push(self.pos);
    }

    /// Estimated lateral deflection at the current commanded position while
    /// pressing `penetration` mm into a wall along `dir`.
    fn sense(&mut self, dir: Direction, penetration: f64) -> Result<TipDisplacement> {
        let unit = dir.unit();
        let true_deflection =
            TipDisplacement::new(penetration * unit[0], penetration * unit[1], 0.0);
        let pressures = match self.rng.as_mut() {
            Some(rng) => synth_tip_pressures(self.params, &true_deflection, Some(rng))?,
            None => synth_tip_pressures::<ChaCha8Rng>(self.params, &true_deflection, None)?,
        };
        estimate_displacement(&pressures, self.cal)
    }

    /// One guarded move from the center of `from` toward `dir`.
    fn guarded_move(&mut self, from: Cell, dir: Direction) -> Result<MoveOutcome> {
        self.stats.guarded_moves += 1;
        let pitch = self.maze.cell_pitch_mm;
        let steps = pitch.round() as usize;
        let unit = dir.unit();
        let start = self.cell_center(from);
        let wall_ahead = self.maze.has_wall(from, dir);
        // Signed distance from the start to the wall plane along the motion.
        let wall_plane = pitch / 2.0;

        for step in 1..=steps {
            let advance = step as f64;
            self.pos = [
                start[0] + advance * unit[0],
                start[1] + advance * unit[1],
            ];
            let penetration = if wall_ahead {
                (advance - (wall_plane - self.cfg.tip_radius_mm)).max(0.0)
            } else {
                0.0
            };
            let est = self.sense(dir, penetration)?;
            self.record_position();

            if est.lateral() >= self.cfg.threshold_mm {
                let arc = contact_arc(&est, &self.cfg.arc).ok_or_else(|| {
                    Error::Integrity("threshold crossed but no arc produced".into())
                })?;
                if !wall_ahead {
                    return Err(Error::Integrity(
                        "deflection threshold crossed with no wall present".into(),
                    ));
                }
                let touch = [
                    self.pos[0] + self.cfg.tip_radius_mm * unit[0],
                    self.pos[1] + self.cfg.tip_radius_mm * unit[1],
                ];
                self.map.mark_mm(touch[0], touch[1], MmCell::Contact);
                self.arcs.push((touch, arc));
                self.map.set_edge(from, dir, EdgeState::Wall)?;
                self.stats.walls_found += 1;
                // Walk back to the previous cell, 1 mm at a time.
                for back in (0..step).rev() {
                    self.pos = [
                        start[0] + back as f64 * unit[0],
                        start[1] + back as f64 * unit[1],
                    ];
                    self.record_position();
                }
                return Ok(MoveOutcome::Blocked(arc));
            }

            // Reaching the wall plane without detection would let the
            // commanded path exit the corridor.
            if wall_ahead && advance >= wall_plane {
                return Err(Error::Integrity(
                    "commanded position crossed a wall plane undetected".into(),
                ));
            }
        }

        self.map.set_edge(from, dir, EdgeState::Open)?;
        Ok(MoveOutcome::Reached)
    }

    /// Retreat along a known-open edge during backtracking.
    fn walk(&mut self, from: Cell, to: Cell) {
        let steps = self.maze.cell_pitch_mm.round() as usize;
        let start = self.cell_center(from);
        let target = self.cell_center(to);
        let unit = [
            (target[0] - start[0]) / steps as f64,
            (target[1] - start[1]) / steps as f64,
        ];
        for step in 1..=steps {
            self.pos = [
                start[0] + step as f64 * unit[0],
                start[1] + step as f64 * unit[1],
            ];
            self.record_position();
        }
    }
}

/// Explore `maze` from `start` until every reachable edge is classified.
pub fn dfs_explore(
    maze: &Maze,
    start: Cell,
    params: &LatticeParams,
    cal: &EstimatorCalibration,
    cfg: ExploreConfig,
) -> Result<Exploration> {
    if !maze.in_bounds(start) {
        return Err(Error::InvalidInput(format!(
            "start cell ({}, {}) outside the maze",
            start.x, start.y
        )));
    }
    cfg.validate(maze)?;

    let mut explorer = Explorer {
        maze,
        params,
        cal,
        cfg,
        map: MazeMap::new(maze.width, maze.height, maze.cell_pitch_mm),
        rng: cfg.noise_seed.map(ChaCha8Rng::seed_from_u64),
        pos: [0.0, 0.0],
        trace: Vec::new(),
        arcs: Vec::new(),
        stats: ExploreStats::default(),
    };
    explorer.pos = explorer.cell_center(start);
    explorer.record_position();

    let mut stack = vec![start];
    let mut on_stack = vec![false; maze.width * maze.height];
    let mut visited = vec![false; maze.width * maze.height];
    let idx = |c: Cell| c.y * maze.width + c.x;
    on_stack[idx(start)] = true;
    visited[idx(start)] = true;

    while let Some(&current) = stack.last() {
        // First neighbor that is in bounds, not on the stack, and reached
        // through a still-unknown edge.
        let candidate = VISIT_ORDER.iter().find_map(|&dir| {
            maze.neighbor(current, dir)
                .filter(|n| !on_stack[idx(*n)])
                .filter(|_| explorer.map.edge(current, dir) == EdgeState::Unknown)
                .map(|n| (dir, n))
        });

        match candidate {
            Some((dir, next)) => match explorer.guarded_move(current, dir)? {
                MoveOutcome::Reached => {
                    stack.push(next);
                    on_stack[idx(next)] = true;
                    visited[idx(next)] = true;
                }
                MoveOutcome::Blocked(_) => {}
            },
            None => {
                let popped = stack.pop().expect("loop guard");
                on_stack[idx(popped)] = false;
                explorer.stats.backtracks += 1;
                if let Some(&parent) = stack.last() {
                    explorer.walk(popped, parent);
                }
            }
        }
    }

    explorer.stats.cells_visited = visited.iter().filter(|v| **v).count();
    Ok(Exploration {
        map: explorer.map,
        stats: explorer.stats,
        arcs: explorer.arcs,
        trace: explorer.trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::calibrate;
    use crate::model::synth_tip_pressures;
    use std::f64::consts::FRAC_PI_2;

    fn noiseless_params() -> LatticeParams {
        LatticeParams {
            noise_sigma: 0.0,
            ..LatticeParams::default()
        }
    }

    fn fitted_cal(params: &LatticeParams) -> EstimatorCalibration {
        let mut samples = Vec::new();
        for k in -20..=20 {
            let v = k as f64 * 0.4;
            for d in [
                TipDisplacement::new(v, 0.0, 0.0),
                TipDisplacement::new(0.0, v, 0.0),
            ] {
                samples.push((
                    synth_tip_pressures::<ChaCha8Rng>(params, &d, None).unwrap(),
                    d,
                ));
            }
        }
        for k in 1..=30 {
            let d = TipDisplacement::new(0.0, 0.0, -(k as f64 * 0.1));
            samples.push((
                synth_tip_pressures::<ChaCha8Rng>(params, &d, None).unwrap(),
                d,
            ));
        }
        calibrate(&samples).unwrap().cal
    }

    fn setup() -> (LatticeParams, EstimatorCalibration) {
        let params = noiseless_params();
        let cal = fitted_cal(&params);
        (params, cal)
    }

    #[test]
    fn one_by_one_maze_needs_no_moves() {
        let (params, cal) = setup();
        let maze = Maze::generate(1, 1, 60.0, 0).unwrap();
        let run = dfs_explore(&maze, Cell::new(0, 0), &params, &cal, ExploreConfig::default())
            .unwrap();
        assert_eq!(run.stats.guarded_moves, 0);
        assert!(run.map.edges_classified());
        assert_eq!(run.map.wall_count(), 4);
    }

    #[test]
    fn explores_random_mazes_exactly() {
        let (params, cal) = setup();
        for seed in 0..5 {
            let maze = Maze::generate(5, 5, 60.0, seed).unwrap();
            let run = dfs_explore(
                &maze,
                Cell::new(0, 0),
                &params,
                &cal,
                ExploreConfig::default(),
            )
            .unwrap();
            assert!(run.map.edges_classified(), "seed {seed}");
            assert!(run.map.matches_ground_truth(&maze), "seed {seed}");
            assert_eq!(run.stats.cells_visited, 25);
            let bound = 2 * maze.interior_edge_count() + run.stats.walls_found;
            assert!(run.stats.guarded_moves <= bound);
        }
    }

    #[test]
    fn noise_does_not_change_the_answer() {
        let params = LatticeParams::default(); // default 0.5 Pa noise
        let cal = fitted_cal(&noiseless_params());
        let maze = Maze::generate(5, 5, 60.0, 11).unwrap();
        let cfg = ExploreConfig {
            noise_seed: Some(42),
            ..ExploreConfig::default()
        };
        let run = dfs_explore(&maze, Cell::new(2, 2), &params, &cal, cfg).unwrap();
        assert!(run.map.matches_ground_truth(&maze));
    }

    #[test]
    fn exploration_is_deterministic() {
        let (params, cal) = setup();
        let maze = Maze::generate(4, 4, 60.0, 5).unwrap();
        let a = dfs_explore(&maze, Cell::new(0, 0), &params, &cal, ExploreConfig::default())
            .unwrap();
        let b = dfs_explore(&maze, Cell::new(0, 0), &params, &cal, ExploreConfig::default())
            .unwrap();
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.stats.guarded_moves, b.stats.guarded_moves);
    }

    #[test]
    fn no_teleporting() {
        let (params, cal) = setup();
        let maze = Maze::generate(5, 5, 60.0, 2).unwrap();
        let run = dfs_explore(&maze, Cell::new(0, 0), &params, &cal, ExploreConfig::default())
            .unwrap();
        for w in run.trace.windows(2) {
            let d = ((w[1][0] - w[0][0]).powi(2) + (w[1][1] - w[0][1]).powi(2)).sqrt();
            assert!(d <= 1.0 + 1e-9, "jumped {d} mm");
        }
    }

    #[test]
    fn open_corridor_probes_without_contact() {
        let (params, cal) = setup();
        let maze = Maze::from_text("maze 2 1 60\neb\n").unwrap();
        let run = dfs_explore(&maze, Cell::new(0, 0), &params, &cal, ExploreConfig::default())
            .unwrap();
        assert_eq!(run.stats.walls_found, 0);
        assert_eq!(run.stats.guarded_moves, 1);
        assert!(run.arcs.is_empty());
        assert!(run.map.edges_classified());
    }

    #[test]
    fn head_on_contact_points_at_the_wall() {
        let (params, cal) = setup();
        // 2x2 maze whose only interior wall separates (0,0) from (1,0); the
        // DFS probes it +x first, producing a head-on contact.
        let maze = Maze::from_text("maze 2 2 60\n63\ndd\n").unwrap();
        let run = dfs_explore(&maze, Cell::new(0, 0), &params, &cal, ExploreConfig::default())
            .unwrap();
        assert!(run.map.matches_ground_truth(&maze));
        assert_eq!(run.stats.walls_found, 1);
        // A +x head-on arc points along +x, i.e. pi/2 in the x-first atan2
        // convention.
        let (_, arc) = run.arcs[0];
        assert!(
            (arc.center_angle - FRAC_PI_2).abs() < 1e-6,
            "angle {}",
            arc.center_angle
        );
        assert!(run.map.contact_count() >= 1);
    }

    #[test]
    fn start_outside_rejected_and_tight_corridor_rejected() {
        let (params, cal) = setup();
        let maze = Maze::generate(3, 3, 60.0, 0).unwrap();
        assert!(dfs_explore(&maze, Cell::new(9, 0), &params, &cal, ExploreConfig::default())
            .is_err());
        let tight = Maze::generate(3, 3, 34.0, 0).unwrap();
        assert!(
            dfs_explore(&tight, Cell::new(0, 0), &params, &cal, ExploreConfig::default())
                .is_err()
        );
    }
}
