//! Baseline and temperature compensation of a decoded frame stream.
//!
//! The stream is assumed to start unloaded. Compensation subtracts the
//! per-channel mean of the first `baseline_window` frames and, optionally,
//! a per-channel linear temperature model fitted on that same window,
//! leaving deformation-induced pressure changes in Pa.

use crate::error::{Error, Result};
use crate::model::{ChannelPressures, CHANNEL_COUNT};
use crate::telemetry::frame::WireFrame;

#[derive(Debug, Clone, Copy)]
pub struct CompensateConfig {
    /// Number of leading unloaded frames that define the baseline.
    pub baseline_window: usize,
    /// Also remove a linear pressure-vs-temperature trend per channel.
    pub temperature_model: bool,
}

impl Default for CompensateConfig {
    fn default() -> Self {
        CompensateConfig {
            baseline_window: 50,
            temperature_model: false,
        }
    }
}

pub fn compensate(frames: &[WireFrame], cfg: &CompensateConfig) -> Result<Vec<ChannelPressures>> {
    let w = cfg.baseline_window;
    if w == 0 {
        return Err(Error::InvalidInput("baseline window must be >= 1".into()));
    }
    if frames.len() < w {
        return Err(Error::InvalidInput(format!(
            "baseline window {w} exceeds stream length {}",
            frames.len()
        )));
    }

    let mut mean_p = [0.0; CHANNEL_COUNT];
    let mut mean_t = [0.0; CHANNEL_COUNT];
    for f in &frames[..w] {
        let p = f.pressures_pa();
        let t = f.temps_c();
        for i in 0..CHANNEL_COUNT {
            mean_p[i] += p[i];
            mean_t[i] += t[i];
        }
    }
    for i in 0..CHANNEL_COUNT {
        mean_p[i] /= w as f64;
        mean_t[i] /= w as f64;
    }

    // Per-channel slope of pressure against temperature over the window.
    let mut slope = [0.0; CHANNEL_COUNT];
    if cfg.temperature_model {
        let mut cov = [0.0; CHANNEL_COUNT];
        let mut var = [0.0; CHANNEL_COUNT];
        for f in &frames[..w] {
            let p = f.pressures_pa();
            let t = f.temps_c();
            for i in 0..CHANNEL_COUNT {
                cov[i] += (t[i] - mean_t[i]) * (p[i] - mean_p[i]);
                var[i] += (t[i] - mean_t[i]).powi(2);
            }
        }
        for i in 0..CHANNEL_COUNT {
            if var[i] > 0.0 {
                slope[i] = cov[i] / var[i];
            }
        }
    }

    Ok(frames
        .iter()
        .map(|f| {
            let p = f.pressures_pa();
            let t = f.temps_c();
            let mut out = [0.0; CHANNEL_COUNT];
            for i in 0..CHANNEL_COUNT {
                out[i] = p[i] - mean_p[i] - slope[i] * (t[i] - mean_t[i]);
            }
            ChannelPressures::new(out)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(seq: u16, pressures: [f64; 7], temps: [f64; 7]) -> WireFrame {
        WireFrame::from_physical(seq, pressures, temps)
    }

    #[test]
    fn constant_stream_compensates_to_zero() {
        let frames: Vec<WireFrame> = (0..100)
            .map(|s| frame(s, [101_300.0; 7], [21.0; 7]))
            .collect();
        let cfg = CompensateConfig {
            baseline_window: 50,
            temperature_model: false,
        };
        for p in compensate(&frames, &cfg).unwrap() {
            assert_eq!(p.p, [0.0; 7]);
        }
    }

    #[test]
    fn window_must_fit() {
        let frames: Vec<WireFrame> = (0..10).map(|s| frame(s, [0.0; 7], [20.0; 7])).collect();
        let cfg = CompensateConfig {
            baseline_window: 11,
            temperature_model: false,
        };
        assert!(compensate(&frames, &cfg).is_err());
        assert!(compensate(
            &frames,
            &CompensateConfig {
                baseline_window: 0,
                temperature_model: false
            }
        )
        .is_err());
    }

    #[test]
    fn idempotent_on_zero_baseline_stream() {
        // Baseline window reads zero; later frames carry signal.
        let mut frames: Vec<WireFrame> =
            (0..50).map(|s| frame(s, [0.0; 7], [21.0; 7])).collect();
        for s in 50..80 {
            frames.push(frame(s, [12.0, -3.0, 0.5, 0.0, 7.0, 1.0, 40.0], [21.0; 7]));
        }
        let cfg = CompensateConfig {
            baseline_window: 50,
            temperature_model: false,
        };
        let once = compensate(&frames, &cfg).unwrap();
        assert_eq!(once[60].p[0], 12.0);
        assert_eq!(once[60].p[6], 40.0);
        // Re-encode the compensated stream and compensate again.
        let rewrapped: Vec<WireFrame> = once
            .iter()
            .enumerate()
            .map(|(i, p)| frame(i as u16, p.p, [21.0; 7]))
            .collect();
        let twice = compensate(&rewrapped, &cfg).unwrap();
        for (a, b) in once.iter().zip(&twice) {
            for i in 0..7 {
                assert!((a.p[i] - b.p[i]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn linear_temperature_drift_is_removed() {
        // Pressure follows temperature with a known coupling; temperature
        // ramps through baseline and beyond. Quantization (milli-Pa,
        // centi-degC) is the only residual source.
        let coupling = 120.0; // Pa per degC
        let frames: Vec<WireFrame> = (0..400)
            .map(|s| {
                let t = 20.0 + s as f64 * 0.01;
                frame(s as u16, [coupling * t; 7], [t; 7])
            })
            .collect();
        let cfg = CompensateConfig {
            baseline_window: 100,
            temperature_model: true,
        };
        let out = compensate(&frames, &cfg).unwrap();
        let injected_drift = coupling * (400.0 * 0.01);
        for p in &out {
            for i in 0..7 {
                assert!(
                    p.p[i].abs() < 0.01 * injected_drift,
                    "residual {} vs drift {injected_drift}",
                    p.p[i]
                );
            }
        }
        // Without the model the drift stays in.
        let cfg_off = CompensateConfig {
            baseline_window: 100,
            temperature_model: false,
        };
        let raw = compensate(&frames, &cfg_off).unwrap();
        assert!(raw.last().unwrap().p[0] > 0.5 * injected_drift);
    }

    #[test]
    fn common_mode_drift_cancels_in_the_estimator_anyway() {
        use crate::estimator::{estimate_displacement, EstimatorCalibration};
        let cal = EstimatorCalibration::new(0.02, 0.02, 0.03).unwrap();
        let signal = [5.0, -1.0, 2.0, 0.0, 1.5, -2.5, 8.0];
        let base = ChannelPressures::new(signal);
        let drifted = base.add_offset(37.5);
        let a = estimate_displacement(&base, &cal).unwrap();
        let b = estimate_displacement(&drifted, &cal).unwrap();
        assert!((a.dx - b.dx).abs() < 1e-12);
        assert!((a.dy - b.dy).abs() < 1e-12);
        assert!((a.dz - b.dz).abs() < 1e-12);
    }
}
