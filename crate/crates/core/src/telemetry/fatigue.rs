//! Cyclic-loading log analysis: per-cycle hysteresis, peak displacement and
//! drift.
//!
//! Bookkeeping follows the measurement protocol: the first five cycles are
//! discarded (elastomer stress softening), cycles containing NaN samples are
//! dropped, and everything that remains is analyzed. Drift is reported
//! against the first retained cycle.

use crate::error::{Error, Result};

pub const FATIGUE_CSV_HEADER: &str = "cycle,t_s,force_N,disp_mm";

/// Cycles discarded from the start of every log.
pub const DISCARDED_INITIAL_CYCLES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FatigueRow {
    pub cycle: usize,
    pub t_s: f64,
    pub force_n: f64,
    pub disp_mm: f64,
}

pub fn rows_to_csv(rows: &[FatigueRow]) -> String {
    let mut out = String::from(FATIGUE_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{:.4},{:.6},{:.6}\n",
            r.cycle, r.t_s, r.force_n, r.disp_mm
        ));
    }
    out
}

pub fn rows_from_csv(text: &str) -> Result<Vec<FatigueRow>> {
    let mut lines = text.lines();
    match lines.next().map(str::trim) {
        Some(h) if h == FATIGUE_CSV_HEADER => {}
        other => {
            return Err(Error::Parse(format!(
                "fatigue log header mismatch: got {other:?}"
            )))
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::Parse(format!(
                "fatigue row {}: expected 4 fields",
                i + 2
            )));
        }
        let cycle = fields[0]
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::Parse(format!("fatigue row {}: bad cycle id", i + 2)))?;
        // NaN is legal data here (that is the point of the filter).
        let parse = |f: &str| -> Result<f64> {
            let t = f.trim();
            if t.eq_ignore_ascii_case("nan") {
                return Ok(f64::NAN);
            }
            t.parse::<f64>()
                .map_err(|_| Error::Parse(format!("fatigue row {}: bad number `{t}`", i + 2)))
        };
        rows.push(FatigueRow {
            cycle,
            t_s: parse(fields[1])?,
            force_n: parse(fields[2])?,
            disp_mm: parse(fields[3])?,
        });
    }
    Ok(rows)
}

/// Stats of one retained cycle.
#[derive(Debug, Clone)]
pub struct FatigueCycle {
    pub cycle: usize,
    /// (force N, displacement mm) in log order.
    pub points: Vec<(f64, f64)>,
    /// N*mm, enclosed loop area.
    pub hysteresis_area: f64,
    pub peak_disp_mm: f64,
    pub min_force_n: f64,
    pub max_force_n: f64,
}

#[derive(Debug, Clone)]
pub struct FatigueReport {
    pub cycles: Vec<FatigueCycle>,
    pub retained: usize,
    pub discarded_initial: usize,
    pub dropped_nan: usize,
    /// (cycle id, peak displacement minus first retained cycle's peak), mm.
    pub drift: Vec<(usize, f64)>,
}

impl FatigueReport {
    /// Every retained cycle's forces stay inside `[lo, hi]` N.
    pub fn force_range_ok(&self, lo: f64, hi: f64) -> bool {
        self.cycles
            .iter()
            .all(|c| c.min_force_n >= lo - 1e-9 && c.max_force_n <= hi + 1e-9)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("cycle,peak_disp_mm,hysteresis_Nmm,drift_mm\n");
        for (c, (_, d)) in self.cycles.iter().zip(&self.drift) {
            out.push_str(&format!(
                "{},{:.6},{:.6},{:.6}\n",
                c.cycle, c.peak_disp_mm, c.hysteresis_area, d
            ));
        }
        out
    }
}

/// Shoelace area of the closed (displacement, force) loop.
fn loop_area(points: &[(f64, f64)]) -> f64 {
    if points.len() < 3 {
        return 0.0;
    }
    let mut twice_area = 0.0;
    for k in 0..points.len() {
        let (f1, x1) = points[k];
        let (f2, x2) = points[(k + 1) % points.len()];
        twice_area += x1 * f2 - x2 * f1;
    }
    (twice_area / 2.0).abs()
}

pub fn analyze_fatigue(rows: &[FatigueRow]) -> Result<FatigueReport> {
    if rows.is_empty() {
        return Err(Error::InvalidInput("empty fatigue log".into()));
    }

    // Group rows by cycle id, in order of first appearance.
    let mut order: Vec<usize> = Vec::new();
    let mut groups: std::collections::HashMap<usize, Vec<(f64, f64)>> =
        std::collections::HashMap::new();
    for r in rows {
        let entry = groups.entry(r.cycle).or_insert_with(|| {
            order.push(r.cycle);
            Vec::new()
        });
        entry.push((r.force_n, r.disp_mm));
    }

    let discarded_initial = order.len().min(DISCARDED_INITIAL_CYCLES);
    let mut dropped_nan = 0;
    let mut cycles = Vec::new();
    for &cycle_id in order.iter().skip(discarded_initial) {
        let points = groups.remove(&cycle_id).expect("grouped above");
        if points
            .iter()
            .any(|(f, x)| f.is_nan() || x.is_nan())
        {
            dropped_nan += 1;
            continue;
        }
        let peak = points.iter().map(|(_, x)| *x).fold(f64::NEG_INFINITY, f64::max);
        let min_f = points.iter().map(|(f, _)| *f).fold(f64::INFINITY, f64::min);
        let max_f = points.iter().map(|(f, _)| *f).fold(f64::NEG_INFINITY, f64::max);
        cycles.push(FatigueCycle {
            cycle: cycle_id,
            hysteresis_area: loop_area(&points),
            peak_disp_mm: peak,
            min_force_n: min_f,
            max_force_n: max_f,
            points,
        });
    }

    if cycles.is_empty() {
        return Err(Error::InvalidInput(
            "no cycles retained after filtering".into(),
        ));
    }
    let reference_peak = cycles[0].peak_disp_mm;
    let drift = cycles
        .iter()
        .map(|c| (c.cycle, c.peak_disp_mm - reference_peak))
        .collect();
    Ok(FatigueReport {
        retained: cycles.len(),
        discarded_initial,
        dropped_nan,
        drift,
        cycles,
    })
}

/// Build a synthetic cyclic-loading log: a 0.05..=5.05 N triangular ramp per
/// cycle with a fixed hysteresis offset between loading and unloading.
/// Cycles listed in `nan_cycles` get one NaN displacement sample.
pub fn synth_fatigue_log(
    n_cycles: usize,
    points_per_leg: usize,
    nan_cycles: &[usize],
) -> Vec<FatigueRow> {
    let nan_set: std::collections::HashSet<usize> = nan_cycles.iter().copied().collect();
    let stiffness = 2.0; // N per mm
    let hysteresis_offset = 0.05; // mm
    let f_lo = 0.05;
    let f_hi = 5.05;
    let mut rows = Vec::new();
    let mut t = 0.0;
    let dt = 0.1;
    for cycle in 1..=n_cycles {
        let poison = nan_set.contains(&cycle);
        for leg in 0..2 {
            for k in 0..points_per_leg {
                let frac = k as f64 / (points_per_leg - 1) as f64;
                let f = if leg == 0 {
                    f_lo + (f_hi - f_lo) * frac
                } else {
                    f_hi - (f_hi - f_lo) * frac
                };
                let sign = if leg == 0 { -1.0 } else { 1.0 };
                let mut disp = f / stiffness + sign * hysteresis_offset;
                if poison && leg == 1 && k == points_per_leg / 2 {
                    disp = f64::NAN;
                }
                rows.push(FatigueRow {
                    cycle,
                    t_s: t,
                    force_n: f,
                    disp_mm: disp,
                });
                t += dt;
            }
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bookkeeping_matches_discard_then_filter() {
        let nan_cycles: Vec<usize> = (0..374).map(|k| 6 + 5 * k).collect();
        assert!(nan_cycles.iter().all(|&c| c > 5 && c <= 10_000));
        let rows = synth_fatigue_log(10_000, 20, &nan_cycles);
        let report = analyze_fatigue(&rows).unwrap();
        assert_eq!(report.discarded_initial, 5);
        assert_eq!(report.dropped_nan, 374);
        assert_eq!(report.retained, 10_000 - 5 - 374);
    }

    #[test]
    fn identical_cycles_have_zero_drift_and_equal_areas() {
        let rows = synth_fatigue_log(100, 25, &[]);
        let report = analyze_fatigue(&rows).unwrap();
        assert_eq!(report.retained, 95);
        for (_, d) in &report.drift {
            assert_eq!(*d, 0.0);
        }
        let areas: Vec<f64> = report.cycles.iter().map(|c| c.hysteresis_area).collect();
        let spread = areas.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - areas.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(spread <= 1e-9);
        // The loop area is a real enclosed area, not zero.
        assert!(areas[0] > 0.0);
    }

    #[test]
    fn force_range_check() {
        let rows = synth_fatigue_log(10, 15, &[]);
        let report = analyze_fatigue(&rows).unwrap();
        assert!(report.force_range_ok(0.05, 5.05));
        assert!(!report.force_range_ok(0.1, 5.05));
    }

    #[test]
    fn empty_and_exhausted_logs_error() {
        assert!(analyze_fatigue(&[]).is_err());
        // All cycles eaten by the initial discard.
        let rows = synth_fatigue_log(4, 10, &[]);
        assert!(analyze_fatigue(&rows).is_err());
    }

    #[test]
    fn csv_round_trip_preserves_nan_rows() {
        let rows = synth_fatigue_log(8, 6, &[7]);
        let text = rows_to_csv(&rows);
        let back = rows_from_csv(&text).unwrap();
        assert_eq!(back.len(), rows.len());
        assert_eq!(back.iter().filter(|r| r.disp_mm.is_nan()).count(), 1);
        let report_a = analyze_fatigue(&rows).unwrap();
        let report_b = analyze_fatigue(&back).unwrap();
        assert_eq!(report_a.retained, report_b.retained);
        assert!(rows_from_csv("cycle,bad\n").is_err());
    }

    #[test]
    fn hysteresis_area_matches_hand_computed_loop() {
        // A unit parallelogram in (disp, force): loading along force = 2x - 1
        // over x in [1,2] shifted down, unloading back shifted up.
        let points = vec![(0.0, 0.0), (1.0, 1.0), (1.0, 2.0), (0.0, 1.0)];
        // Shoelace of this parallelogram is exactly 1.
        assert!((loop_area(&points) - 1.0).abs() < 1e-12);
    }
}
