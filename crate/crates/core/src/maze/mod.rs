//! Tactile exploration of a 2-D maze on a 1 mm grid.

pub mod explore;
pub mod grid;
pub mod render;

pub use explore::{dfs_explore, ExploreConfig, ExploreStats, Exploration, MoveOutcome};
pub use grid::{Cell, Direction, EdgeState, Maze, MazeMap, MmCell, VISIT_ORDER};
pub use render::{render_map, MazeRender};
