//! Minimal SVG emission. Enough for the figure outputs this crate produces;
//! not a drawing library.

use std::fmt::Write;

#[derive(Debug, Clone)]
pub struct SvgDoc {
    width: f64,
    height: f64,
    body: String,
}

impl SvgDoc {
    pub fn new(width: f64, height: f64) -> SvgDoc {
        SvgDoc {
            width,
            height,
            body: String::new(),
        }
    }

    pub fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str) {
        let _ = writeln!(
            self.body,
            r#"<rect x="{x:.2}" y="{y:.2}" width="{w:.2}" height="{h:.2}" fill="{fill}"/>"#
        );
    }

    pub fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, width: f64) {
        let _ = writeln!(
            self.body,
            r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{stroke}" stroke-width="{width:.2}" stroke-linecap="round"/>"#
        );
    }

    pub fn dashed_line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, width: f64) {
        let _ = writeln!(
            self.body,
            r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{stroke}" stroke-width="{width:.2}" stroke-dasharray="3 3"/>"#
        );
    }

    pub fn circle(&mut self, cx: f64, cy: f64, r: f64, fill: &str) {
        let _ = writeln!(
            self.body,
            r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="{r:.2}" fill="{fill}"/>"#
        );
    }

    pub fn polyline(&mut self, points: &[(f64, f64)], stroke: &str, width: f64) {
        if points.is_empty() {
            return;
        }
        let pts: Vec<String> = points
            .iter()
            .map(|(x, y)| format!("{x:.2},{y:.2}"))
            .collect();
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="{width:.2}"/>"#,
            pts.join(" ")
        );
    }

    /// Filled polygon, e.g. a +/- one-standard-deviation band.
    pub fn polygon(&mut self, points: &[(f64, f64)], fill: &str, opacity: f64) {
        if points.is_empty() {
            return;
        }
        let pts: Vec<String> = points
            .iter()
            .map(|(x, y)| format!("{x:.2},{y:.2}"))
            .collect();
        let _ = writeln!(
            self.body,
            r#"<polygon points="{}" fill="{fill}" fill-opacity="{opacity:.2}" stroke="none"/>"#,
            pts.join(" ")
        );
    }

    pub fn text(&mut self, x: f64, y: f64, size: f64, fill: &str, content: &str) {
        let escaped = content
            .replace('&', "&amp;")
            .replace('<', "&lt;")
            .replace('>', "&gt;");
        let _ = writeln!(
            self.body,
            r#"<text x="{x:.2}" y="{y:.2}" font-size="{size:.1}" font-family="sans-serif" fill="{fill}">{escaped}</text>"#
        );
    }

    pub fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.0} {h:.0}\">\n{body}</svg>\n",
            w = self.width,
            h = self.height,
            body = self.body
        )
    }
}

/// Map data coordinates to pixel coordinates for simple 2-D charts.
#[derive(Debug, Clone, Copy)]
pub struct ChartFrame {
    pub x0: f64,
    pub y0: f64,
    pub w: f64,
    pub h: f64,
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl ChartFrame {
    pub fn map(&self, x: f64, y: f64) -> (f64, f64) {
        let fx = (x - self.xmin) / (self.xmax - self.xmin).max(1e-12);
        let fy = (y - self.ymin) / (self.ymax - self.ymin).max(1e-12);
        (self.x0 + fx * self.w, self.y0 + self.h - fy * self.h)
    }

    pub fn draw_axes(&self, doc: &mut SvgDoc, x_label: &str, y_label: &str) {
        doc.line(self.x0, self.y0 + self.h, self.x0 + self.w, self.y0 + self.h, "#444", 1.0);
        doc.line(self.x0, self.y0, self.x0, self.y0 + self.h, "#444", 1.0);
        doc.text(self.x0 + self.w / 2.0 - 20.0, self.y0 + self.h + 28.0, 11.0, "#333", x_label);
        doc.text(self.x0 - 34.0, self.y0 - 8.0, 11.0, "#333", y_label);
        doc.text(
            self.x0 - 6.0,
            self.y0 + self.h + 14.0,
            9.0,
            "#666",
            &trim_num(self.xmin),
        );
        doc.text(
            self.x0 + self.w - 12.0,
            self.y0 + self.h + 14.0,
            9.0,
            "#666",
            &trim_num(self.xmax),
        );
        doc.text(self.x0 - 34.0, self.y0 + self.h, 9.0, "#666", &trim_num(self.ymin));
        doc.text(self.x0 - 34.0, self.y0 + 10.0, 9.0, "#666", &trim_num(self.ymax));
    }
}

fn trim_num(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e6 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn emits_wellformed_document() {
        let mut doc = SvgDoc::new(100.0, 50.0);
        doc.rect(0.0, 0.0, 10.0, 10.0, "#fff");
        doc.line(0.0, 0.0, 5.0, 5.0, "red", 1.0);
        doc.text(1.0, 1.0, 10.0, "#000", "a<b&c");
        let text = doc.finish();
        assert!(text.starts_with("<svg"));
        assert!(text.trim_end().ends_with("</svg>"));
        assert!(text.contains("a&lt;b&amp;c"));
        assert_eq!(text.matches("<rect").count(), 1);
    }

    #[test]
    fn chart_maps_corners() {
        let frame = ChartFrame {
            x0: 10.0,
            y0: 20.0,
            w: 100.0,
            h: 50.0,
            xmin: 0.0,
            xmax: 2.0,
            ymin: -1.0,
            ymax: 1.0,
        };
        assert_eq!(frame.map(0.0, -1.0), (10.0, 70.0));
        assert_eq!(frame.map(2.0, 1.0), (110.0, 20.0));
    }
}
