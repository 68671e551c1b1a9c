//! Map rendering: an SVG with the maze abstraction next to the 1 mm
//! occupancy grid, plus a plain-text abstraction.
//!
//! Colors follow the established map convention: known walls white, open
//! edges green, unknown edges gray; traversed regions green and contact
//! points red on the millimetre panel.

use crate::estimator::ContactArc;
use crate::maze::grid::{Cell, Direction, EdgeState, MazeMap, MmCell};
use crate::svg::SvgDoc;

pub const WALL_COLOR: &str = "#ffffff";
pub const OPEN_COLOR: &str = "#43a047";
pub const UNKNOWN_COLOR: &str = "#777777";
pub const TRAVERSED_COLOR: &str = "#2e7d32";
pub const CONTACT_COLOR: &str = "#e53935";
const BACKGROUND: &str = "#10141c";

#[derive(Debug, Clone)]
pub struct MazeRender {
    pub svg: String,
    pub ascii: String,
}

/// Render any map state; partial exploration is fine.
pub fn render_map(map: &MazeMap, arcs: &[([f64; 2], ContactArc)]) -> MazeRender {
    MazeRender {
        svg: render_svg(map, arcs),
        ascii: render_ascii(map),
    }
}

fn render_svg(map: &MazeMap, arcs: &[([f64; 2], ContactArc)]) -> String {
    let cell_px = 40.0;
    let margin = 20.0;
    let abstraction_w = map.width as f64 * cell_px;
    let abstraction_h = map.height as f64 * cell_px;
    let mm_scale = (abstraction_h / map.mm_height as f64).min(1.0);
    let mm_w = map.mm_width as f64 * mm_scale;
    let mm_h = map.mm_height as f64 * mm_scale;
    let total_w = margin * 3.0 + abstraction_w + mm_w;
    let total_h = margin * 2.0 + abstraction_h.max(mm_h) + 20.0;

    let mut doc = SvgDoc::new(total_w, total_h);
    doc.rect(0.0, 0.0, total_w, total_h, BACKGROUND);

    // Left panel: edge knowledge. y flips so +y points up.
    let ox = margin;
    let oy = margin;
    let fy = |y: f64| oy + abstraction_h - y * cell_px;
    for y in 0..map.height {
        for x in 0..map.width {
            let cell = Cell::new(x, y);
            // Draw the -x and -y edges of every cell plus the +x/+y edges of
            // the far row/column, so each edge appears exactly once.
            let mut edges = vec![
                (Direction::MinusX, (x, y), (x, y + 1)),
                (Direction::MinusY, (x, y), (x + 1, y)),
            ];
            if x + 1 == map.width {
                edges.push((Direction::PlusX, (x + 1, y), (x + 1, y + 1)));
            }
            if y + 1 == map.height {
                edges.push((Direction::PlusY, (x, y + 1), (x + 1, y + 1)));
            }
            for (dir, a, b) in edges {
                let (x1, y1) = (ox + a.0 as f64 * cell_px, fy(a.1 as f64));
                let (x2, y2) = (ox + b.0 as f64 * cell_px, fy(b.1 as f64));
                match map.edge(cell, dir) {
                    EdgeState::Wall => doc.line(x1, y1, x2, y2, WALL_COLOR, 3.0),
                    EdgeState::Open => doc.line(x1, y1, x2, y2, OPEN_COLOR, 1.5),
                    EdgeState::Unknown => doc.dashed_line(x1, y1, x2, y2, UNKNOWN_COLOR, 1.0),
                }
            }
        }
    }
    doc.text(ox, total_h - 6.0, 11.0, "#cccccc", "edges: wall / open / unknown");

    // Right panel: 1 mm occupancy, run-length merged per row.
    let mx = margin * 2.0 + abstraction_w;
    let my = margin;
    for row in 0..map.mm_height {
        let mut col = 0;
        while col < map.mm_width {
            let state = map.mm_state(col, row);
            let mut end = col + 1;
            while end < map.mm_width && map.mm_state(end, row) == state {
                end += 1;
            }
            if state != MmCell::Untouched {
                let color = match state {
                    MmCell::Traversed => TRAVERSED_COLOR,
                    MmCell::Contact => CONTACT_COLOR,
                    MmCell::Untouched => unreachable!(),
                };
                // Screen y flips; mm row `row` spans one scaled pixel.
                let sy = my + mm_h - (row + 1) as f64 * mm_scale;
                doc.rect(
                    mx + col as f64 * mm_scale,
                    sy,
                    (end - col) as f64 * mm_scale,
                    mm_scale,
                    color,
                );
            }
            col = end;
        }
    }
    for (touch, _arc) in arcs {
        doc.circle(
            mx + touch[0] * mm_scale,
            my + mm_h - touch[1] * mm_scale,
            2.5,
            CONTACT_COLOR,
        );
    }
    doc.text(mx, total_h - 6.0, 11.0, "#cccccc", "1 mm map: traversed / contact");

    doc.finish()
}

fn render_ascii(map: &MazeMap) -> String {
    let mut out = String::new();
    for y in (0..map.height).rev() {
        // Horizontal edges above this row.
        for x in 0..map.width {
            out.push('+');
            out.push_str(match map.edge(Cell::new(x, y), Direction::PlusY) {
                EdgeState::Wall => "--",
                EdgeState::Open => "  ",
                EdgeState::Unknown => "??",
            });
        }
        out.push_str("+\n");
        // Vertical edges and cell interiors.
        for x in 0..map.width {
            out.push(match map.edge(Cell::new(x, y), Direction::MinusX) {
                EdgeState::Wall => '|',
                EdgeState::Open => ' ',
                EdgeState::Unknown => '?',
            });
            out.push_str("  ");
        }
        out.push(match map.edge(Cell::new(map.width - 1, y), Direction::PlusX) {
            EdgeState::Wall => '|',
            EdgeState::Open => ' ',
            EdgeState::Unknown => '?',
        });
        out.push('\n');
    }
    for x in 0..map.width {
        out.push('+');
        out.push_str(match map.edge(Cell::new(x, 0), Direction::MinusY) {
            EdgeState::Wall => "--",
            EdgeState::Open => "  ",
            EdgeState::Unknown => "??",
        });
    }
    out.push_str("+\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maze::grid::MazeMap;

    #[test]
    fn empty_map_renders_all_unknown_interior() {
        let map = MazeMap::new(3, 3, 60.0);
        let render = render_map(&map, &[]);
        // 24 interior edges unknown, 12 boundary walls.
        assert_eq!(render.svg.matches("stroke-dasharray").count(), 12);
        // 6 horizontal unknowns render as `??`, 6 vertical ones as `?`.
        assert_eq!(render.ascii.matches('?').count(), 18);
        assert!(render.svg.contains(WALL_COLOR));
    }

    #[test]
    fn wall_count_matches_map() {
        let mut map = MazeMap::new(2, 2, 60.0);
        map.set_edge(Cell::new(0, 0), Direction::PlusX, EdgeState::Wall)
            .unwrap();
        map.set_edge(Cell::new(0, 0), Direction::PlusY, EdgeState::Open)
            .unwrap();
        let render = render_map(&map, &[]);
        let wall_lines = render
            .svg
            .matches(&format!("stroke=\"{WALL_COLOR}\""))
            .count();
        assert_eq!(wall_lines, map.wall_count());
        let open_lines = render
            .svg
            .matches(&format!("stroke=\"{OPEN_COLOR}\""))
            .count();
        assert_eq!(open_lines, 1);
    }

    #[test]
    fn partial_map_renders_without_error() {
        let mut map = MazeMap::new(4, 4, 60.0);
        map.mark_footprint([120.0, 120.0], 16.0);
        map.mark_mm(100.0, 100.0, MmCell::Contact);
        let render = render_map(&map, &[]);
        assert!(render.svg.contains(TRAVERSED_COLOR));
        assert!(render.svg.contains(CONTACT_COLOR));
    }
}
