//! SVG figure builders for the artifacts each subcommand emits. All data
//! also lands in CSVs; these are quick-look renderings, not the record.

use lattice_tact::admittance::{LoopConfig, LoopState, StiffnessReport};
use lattice_tact::model::{Dataset, CHANNEL_COUNT, RADIAL_ANGLES};
use lattice_tact::net::EpochMetrics;
use lattice_tact::svg::{ChartFrame, SvgDoc};
use lattice_tact::telemetry::FatigueReport;

pub const CHANNEL_COLORS: [&str; 7] = [
    "#e41a1c", "#377eb8", "#4daf4a", "#984ea3", "#ff7f00", "#a65628", "#f781bf",
];

const AXIAL_COLORS: [&str; 5] = ["#e41a1c", "#377eb8", "#4daf4a", "#984ea3", "#ff7f00"];

/// Mean response curves with +/- one standard deviation bands, one panel
/// per axial position for two radial angles (the grid's first two).
pub fn characterization_figure(ds: &Dataset) -> String {
    let positions = 5;
    let angles_shown = 2.min(RADIAL_ANGLES);
    let panel_w = 190.0;
    let panel_h = 130.0;
    let margin = 48.0;
    let total_w = margin + positions as f64 * (panel_w + 24.0);
    let total_h = margin + angles_shown as f64 * (panel_h + 44.0);
    let mut doc = SvgDoc::new(total_w, total_h);
    doc.rect(0.0, 0.0, total_w, total_h, "#ffffff");

    // Collect forces present, sorted.
    let mut forces: Vec<f64> = Vec::new();
    for s in &ds.samples {
        if ds.samples.first().map(|f| f.trial) == Some(s.trial)
            && s.contact.axial_pos == 0
            && s.contact.radial_angle == 0
        {
            forces.push(s.contact.force);
        }
    }
    let fmax = forces.last().copied().unwrap_or(1.0);

    for angle in 0..angles_shown {
        for pos in 0..positions {
            // mean and std across trials per (force index, channel).
            let mut acc: Vec<[(f64, f64, f64); CHANNEL_COUNT]> =
                vec![[(0.0, 0.0, 0.0); CHANNEL_COUNT]; forces.len()];
            for s in &ds.samples {
                if s.contact.axial_pos != pos || s.contact.radial_angle != angle {
                    continue;
                }
                if let Some(fi) = forces.iter().position(|&f| (f - s.contact.force).abs() < 1e-9)
                {
                    for c in 0..CHANNEL_COUNT {
                        let (n, sum, sumsq) = acc[fi][c];
                        acc[fi][c] =
                            (n + 1.0, sum + s.pressures.p[c], sumsq + s.pressures.p[c].powi(2));
                    }
                }
            }
            let mut ymin = f64::INFINITY;
            let mut ymax = f64::NEG_INFINITY;
            let mut mean_std: Vec<[(f64, f64); CHANNEL_COUNT]> =
                vec![[(0.0, 0.0); CHANNEL_COUNT]; forces.len()];
            for (fi, row) in acc.iter().enumerate() {
                for (c, &(n, sum, sumsq)) in row.iter().enumerate() {
                    if n > 0.0 {
                        let m = sum / n;
                        let var = (sumsq / n - m * m).max(0.0);
                        let sd = var.sqrt();
                        mean_std[fi][c] = (m, sd);
                        ymin = ymin.min(m - sd);
                        ymax = ymax.max(m + sd);
                    }
                }
            }
            if !ymin.is_finite() {
                continue;
            }

            let frame = ChartFrame {
                x0: margin + pos as f64 * (panel_w + 24.0),
                y0: 16.0 + angle as f64 * (panel_h + 44.0),
                w: panel_w,
                h: panel_h,
                xmin: 0.0,
                xmax: fmax,
                ymin: ymin.min(0.0),
                ymax: ymax.max(1.0),
            };
            frame.draw_axes(&mut doc, "force N", "Pa");
            doc.text(
                frame.x0 + 4.0,
                frame.y0 + 10.0,
                10.0,
                "#333",
                &format!("axial {pos}, radial {angle}"),
            );
            for c in 0..CHANNEL_COUNT {
                let band: Vec<(f64, f64)> = forces
                    .iter()
                    .enumerate()
                    .map(|(fi, &f)| frame.map(f, mean_std[fi][c].0 + mean_std[fi][c].1))
                    .chain(forces.iter().enumerate().rev().map(|(fi, &f)| {
                        frame.map(f, mean_std[fi][c].0 - mean_std[fi][c].1)
                    }))
                    .collect();
                doc.polygon(&band, CHANNEL_COLORS[c], 0.15);
                let line: Vec<(f64, f64)> = forces
                    .iter()
                    .enumerate()
                    .map(|(fi, &f)| frame.map(f, mean_std[fi][c].0))
                    .collect();
                doc.polyline(&line, CHANNEL_COLORS[c], 1.2);
            }
        }
    }
    doc.finish()
}

/// Weighted pressure sums against true displacements with the fitted line,
/// one panel per axis.
pub fn calibration_figure(axes: &[(&str, Vec<(f64, f64)>, f64, f64)]) -> String {
    let panel_w = 200.0;
    let panel_h = 170.0;
    let margin = 52.0;
    let total_w = margin + axes.len() as f64 * (panel_w + 36.0);
    let total_h = margin + panel_h + 40.0;
    let mut doc = SvgDoc::new(total_w, total_h);
    doc.rect(0.0, 0.0, total_w, total_h, "#ffffff");

    for (i, (label, points, alpha, r2)) in axes.iter().enumerate() {
        let (mut xmin, mut xmax, mut ymin, mut ymax) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for &(w, d) in points {
            xmin = xmin.min(w);
            xmax = xmax.max(w);
            ymin = ymin.min(d);
            ymax = ymax.max(d);
        }
        let frame = ChartFrame {
            x0: margin + i as f64 * (panel_w + 36.0),
            y0: 20.0,
            w: panel_w,
            h: panel_h,
            xmin: xmin * 1.1 - 1e-9,
            xmax: xmax * 1.1 + 1e-9,
            ymin: ymin * 1.1 - 1e-9,
            ymax: ymax * 1.1 + 1e-9,
        };
        frame.draw_axes(&mut doc, "weighted sum Pa", "mm");
        for &(w, d) in points {
            let (px, py) = frame.map(w, d);
            doc.circle(px, py, 1.6, "#377eb8");
        }
        let (x1, y1) = frame.map(frame.xmin, alpha * frame.xmin);
        let (x2, y2) = frame.map(frame.xmax, alpha * frame.xmax);
        doc.line(x1, y1, x2, y2, "#e41a1c", 1.0);
        doc.text(
            frame.x0 + 4.0,
            frame.y0 + 12.0,
            10.0,
            "#333",
            &format!("{label}: alpha={alpha:.4e}, R2={r2:.6}"),
        );
    }
    doc.finish()
}

/// Predicted force against ground truth, colored by axial position.
pub fn force_scatter_figure(points: &[(f64, f64, usize)]) -> String {
    let mut doc = SvgDoc::new(360.0, 360.0);
    doc.rect(0.0, 0.0, 360.0, 360.0, "#ffffff");
    let fmax = points
        .iter()
        .map(|&(t, p, _)| t.max(p))
        .fold(1.0f64, f64::max);
    let frame = ChartFrame {
        x0: 48.0,
        y0: 20.0,
        w: 280.0,
        h: 280.0,
        xmin: 0.0,
        xmax: fmax,
        ymin: 0.0,
        ymax: fmax,
    };
    frame.draw_axes(&mut doc, "true force N", "predicted N");
    let (dx1, dy1) = frame.map(0.0, 0.0);
    let (dx2, dy2) = frame.map(fmax, fmax);
    doc.dashed_line(dx1, dy1, dx2, dy2, "#999", 1.0);
    for &(truth, pred, axial) in points {
        let (px, py) = frame.map(truth, pred);
        doc.circle(px, py, 1.4, AXIAL_COLORS[axial % AXIAL_COLORS.len()]);
    }
    doc.finish()
}

/// Force against total displacement with the through-origin fit per axis.
pub fn stiffness_figure(reports: &[StiffnessReport]) -> String {
    let panel_w = 200.0;
    let panel_h = 170.0;
    let margin = 52.0;
    let total_w = margin + reports.len() as f64 * (panel_w + 36.0);
    let total_h = margin + panel_h + 40.0;
    let mut doc = SvgDoc::new(total_w, total_h);
    doc.rect(0.0, 0.0, total_w, total_h, "#ffffff");

    for (i, report) in reports.iter().enumerate() {
        let (mut xmin, mut xmax, mut ymin, mut ymax) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for &(f, x) in &report.points {
            xmin = xmin.min(x);
            xmax = xmax.max(x);
            ymin = ymin.min(f);
            ymax = ymax.max(f);
        }
        let frame = ChartFrame {
            x0: margin + i as f64 * (panel_w + 36.0),
            y0: 20.0,
            w: panel_w,
            h: panel_h,
            xmin: xmin * 1.1 - 1e-9,
            xmax: xmax * 1.1 + 1e-9,
            ymin: ymin * 1.1 - 1e-9,
            ymax: ymax * 1.1 + 1e-9,
        };
        frame.draw_axes(&mut doc, "total disp mm", "force N");
        for &(f, x) in &report.points {
            let (px, py) = frame.map(x, f);
            doc.circle(px, py, 2.0, "#377eb8");
        }
        let (x1, y1) = frame.map(frame.xmin, report.stiffness * frame.xmin);
        let (x2, y2) = frame.map(frame.xmax, report.stiffness * frame.xmax);
        doc.line(x1, y1, x2, y2, "#e41a1c", 1.0);
        doc.text(
            frame.x0 + 4.0,
            frame.y0 + 12.0,
            10.0,
            "#333",
            &format!(
                "{}: k={:.4} N/mm, R2={:.6}",
                report.axis.label(),
                report.stiffness,
                report.r2
            ),
        );
    }
    doc.finish()
}

/// Commanded position and estimated deflection over time, per axis.
pub fn admittance_figure(log: &[LoopState], cfg: &LoopConfig) -> String {
    let mut doc = SvgDoc::new(560.0, 300.0);
    doc.rect(0.0, 0.0, 560.0, 300.0, "#ffffff");
    if log.is_empty() {
        return doc.finish();
    }
    let tmax = log.last().unwrap().time_s(cfg);
    let mut ymin = 0.0f64;
    let mut ymax = 0.0f64;
    for s in log {
        for i in 0..3 {
            ymin = ymin.min(s.commanded[i]).min(s.estimated[i]);
            ymax = ymax.max(s.commanded[i]).max(s.estimated[i]);
        }
    }
    let frame = ChartFrame {
        x0: 52.0,
        y0: 20.0,
        w: 460.0,
        h: 230.0,
        xmin: 0.0,
        xmax: tmax.max(1e-3),
        ymin: ymin * 1.1 - 1e-6,
        ymax: ymax * 1.1 + 1e-6,
    };
    frame.draw_axes(&mut doc, "t s", "mm");
    let labels = ["ux", "uy", "uz"];
    for i in 0..3 {
        let cmd: Vec<(f64, f64)> = log
            .iter()
            .map(|s| frame.map(s.time_s(cfg), s.commanded[i]))
            .collect();
        doc.polyline(&cmd, CHANNEL_COLORS[i], 1.4);
        let est: Vec<(f64, f64)> = log
            .iter()
            .map(|s| frame.map(s.time_s(cfg), s.estimated[i]))
            .collect();
        doc.polyline(&est, CHANNEL_COLORS[i + 3], 0.8);
        doc.text(
            60.0 + i as f64 * 60.0,
            270.0,
            10.0,
            CHANNEL_COLORS[i],
            labels[i],
        );
    }
    doc.finish()
}

/// Training history: loss plus the two accuracies.
pub fn training_figure(history: &[EpochMetrics]) -> String {
    let mut doc = SvgDoc::new(520.0, 280.0);
    doc.rect(0.0, 0.0, 520.0, 280.0, "#ffffff");
    if history.is_empty() {
        return doc.finish();
    }
    let loss_max = history
        .iter()
        .map(|h| h.train_loss)
        .fold(f64::MIN_POSITIVE, f64::max);
    let frame = ChartFrame {
        x0: 52.0,
        y0: 20.0,
        w: 420.0,
        h: 210.0,
        xmin: 0.0,
        xmax: (history.len() - 1).max(1) as f64,
        ymin: 0.0,
        ymax: 1.05,
    };
    frame.draw_axes(&mut doc, "epoch", "value");
    let loss: Vec<(f64, f64)> = history
        .iter()
        .map(|h| frame.map(h.epoch as f64, h.train_loss / loss_max))
        .collect();
    doc.polyline(&loss, "#e41a1c", 1.2);
    let axial: Vec<(f64, f64)> = history
        .iter()
        .map(|h| frame.map(h.epoch as f64, h.metrics.axial_accuracy))
        .collect();
    doc.polyline(&axial, "#377eb8", 1.2);
    let radial: Vec<(f64, f64)> = history
        .iter()
        .map(|h| frame.map(h.epoch as f64, h.metrics.radial_accuracy))
        .collect();
    doc.polyline(&radial, "#4daf4a", 1.2);
    doc.text(60.0, 250.0, 10.0, "#e41a1c", &format!("loss (/{loss_max:.2})"));
    doc.text(180.0, 250.0, 10.0, "#377eb8", "axial acc");
    doc.text(280.0, 250.0, 10.0, "#4daf4a", "radial acc");
    doc.finish()
}

/// Overlaid force-displacement loops with canonical cycles highlighted.
pub fn fatigue_figure(report: &FatigueReport) -> String {
    let mut doc = SvgDoc::new(420.0, 360.0);
    doc.rect(0.0, 0.0, 420.0, 360.0, "#ffffff");
    let (mut xmin, mut xmax, mut ymin, mut ymax) =
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for c in &report.cycles {
        for &(f, x) in &c.points {
            xmin = xmin.min(x);
            xmax = xmax.max(x);
            ymin = ymin.min(f);
            ymax = ymax.max(f);
        }
    }
    if !xmin.is_finite() {
        return doc.finish();
    }
    let frame = ChartFrame {
        x0: 52.0,
        y0: 20.0,
        w: 330.0,
        h: 280.0,
        xmin,
        xmax,
        ymin,
        ymax,
    };
    frame.draw_axes(&mut doc, "disp mm", "force N");

    // All cycles in gray, decimated for file size; then the highlights.
    let stride = (report.cycles.len() / 200).max(1);
    for c in report.cycles.iter().step_by(stride) {
        let pts: Vec<(f64, f64)> = c.points.iter().map(|&(f, x)| frame.map(x, f)).collect();
        doc.polyline(&pts, "#cccccc", 0.4);
    }
    let highlight_positions = highlight_indices(report.retained);
    let colors = ["#e41a1c", "#377eb8", "#4daf4a", "#984ea3", "#ff7f00", "#a65628", "#000000"];
    for (slot, &pos) in highlight_positions.iter().enumerate() {
        let c = &report.cycles[pos];
        let pts: Vec<(f64, f64)> = c.points.iter().map(|&(f, x)| frame.map(x, f)).collect();
        doc.polyline(&pts, colors[slot % colors.len()], 1.4);
        doc.text(
            frame.x0 + 4.0,
            frame.y0 + 12.0 + slot as f64 * 12.0,
            9.0,
            colors[slot % colors.len()],
            &format!("cycle #{}", pos + 1),
        );
    }
    doc.finish()
}

/// 1-based positions 1, 50, 100, 500, 1000, 5000 and the final retained
/// cycle, clipped to the retained count.
pub fn highlight_indices(retained: usize) -> Vec<usize> {
    let mut out: Vec<usize> = [1usize, 50, 100, 500, 1000, 5000]
        .iter()
        .filter(|&&k| k <= retained)
        .map(|&k| k - 1)
        .collect();
    if retained > 0 && !out.contains(&(retained - 1)) {
        out.push(retained - 1);
    }
    out
}
